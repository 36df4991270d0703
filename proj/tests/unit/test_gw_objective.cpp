/*
Copyright 2026 The slotalign Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "slotalign/gw_objective.hpp"

using namespace slotalign;

namespace {

StructureBasisSet single(const Matrix& d) {
  return StructureBasisSet({{BasisView::Edge, 0, StructureBasis(DenseBasis{d})}});
}

StructureBasisSet dense_set(const std::vector<Matrix>& ds) {
  std::vector<StructureBasisSet::Entry> entries;
  for (const auto& d : ds) entries.push_back({BasisView::Edge, 0, StructureBasis(DenseBasis{d})});
  return StructureBasisSet(std::move(entries));
}

Matrix p3_adjacency() { return Graph(3, {{0, 1}, {1, 2}}).dense_adjacency(); }

Vector uniform_vec(Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST_CASE("coupling helpers") {
  const Coupling u = Coupling::uniform(2, 3);
  CHECK((u.plan - Matrix::Constant(2, 3, 1.0 / 6.0)).norm() < 1e-16);
  CHECK(u.has_uniform_marginals());
  CHECK(u.marginal_error() < 1e-16);
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  CHECK(Coupling::with_uniform_marginals(p).marginal_error() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Coupling::uniform(0, 2), DimensionError);
}

TEST_CASE("weights helpers") {
  const Weights w = Weights::uniform(4);
  for (Index q = 0; q < 4; ++q) CHECK(w.source(q) == 0.25);
  w.validate();
  const Weights v = Weights::vertex(3, 1);
  CHECK(v.source == Vector::Unit(3, 1));
  const Vector a = (Vector(4) << 0.3, 0.7, 1.0, 0.0).finished();
  CHECK(Weights::from_alpha(a).alpha() == a);
  CHECK_THROWS_AS(Weights::from_alpha(Vector::Ones(3)), DimensionError);
  CHECK_THROWS_AS((Weights{Vector::Constant(2, 0.6), Vector::Constant(2, 0.5)}.validate()), ConfigError);
  CHECK_THROWS_AS((Weights{(Vector(2) << -0.1, 1.1).finished(), Vector::Constant(2, 0.5)}.validate()), ConfigError);
}

TEST_CASE("mix combines bases linearly") {
  const Matrix a = p3_adjacency();
  const auto set = dense_set({a, Matrix::Identity(3, 3)});
  CHECK(mix(set, Vector::Unit(2, 0)).materialize() == a);
  const Matrix half = mix(set, Vector::Constant(2, 0.5)).materialize();
  CHECK((half - (0.5 * a + 0.5 * Matrix::Identity(3, 3))).norm() < 1e-16);
  CHECK_THROWS_AS(mix(set, Vector::Zero(2)), ConfigError);
  CHECK_THROWS_AS(mix(set, Vector::Ones(3)), DimensionError);
}

TEST_CASE("objective on hand-computed instances") {
  const Matrix a = p3_adjacency();
  const Coupling id = Coupling::with_uniform_marginals(Matrix::Identity(3, 3) / 3.0);
  const Weights w = Weights::vertex(1, 0);

  CHECK(std::abs(objective(single(a), single(a), id, w)) < 1e-15);
  CHECK(objective(single(a), single(Matrix::Zero(3, 3)), id, w) == doctest::Approx(4.0 / 9.0));
  CHECK(oracle::quadruple_sum(a, Matrix::Zero(3, 3), id.plan) == doctest::Approx(4.0 / 9.0));

  const Matrix s = Matrix::Constant(1, 1, 0.7);
  const Matrix t = Matrix::Constant(1, 1, -0.2);
  const Coupling one = Coupling::uniform(1, 1);
  CHECK(objective(single(s), single(t), one, w) == doctest::Approx(0.81));
}

TEST_CASE("objective equals the quadruple sum on random feasible couplings") {
  Rng rng(101);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(6), k = 1 + rng.below(4), d = 1 + rng.below(4);
    const auto gs = oracle::random_graph(n, 0.5, d, rng);
    const auto gt = oracle::random_graph(m, 0.5, d, rng);
    const auto bs = build_bases(gs, k);
    const auto bt = build_bases(gt, k);
    const Coupling pi = Coupling::with_uniform_marginals(oracle::random_feasible_plan(static_cast<Index>(n), static_cast<Index>(m), rng));
    const Weights w{oracle::random_simplex(k, rng), oracle::random_simplex(k, rng)};
    const double want = oracle::quadruple_sum(oracle::mixed_dense(bs, w.source), oracle::mixed_dense(bt, w.target), pi.plan);
    CHECK(std::abs(objective(bs, bt, pi, w) - want) < 1e-10);
  }
}

TEST_CASE("grad_pi special cases") {
  const Coupling id3 = Coupling::with_uniform_marginals(Matrix::Identity(3, 3) / 3.0);
  const Weights w = Weights::vertex(1, 0);
  CHECK(grad_pi(single(p3_adjacency()), single(Matrix::Zero(3, 3)), id3, w).isZero());
  const Matrix g = grad_pi(single(Matrix::Identity(3, 3)), single(Matrix::Identity(3, 3)), id3, w);
  CHECK((g + 4.0 * Matrix::Identity(3, 3) / 3.0).norm() < 1e-15);
}

TEST_CASE("gradients match central differences on random instances") {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(4), m = 2 + rng.below(4), k = 1 + rng.below(4), d = 1 + rng.below(4);
    const auto gs = oracle::random_graph(n, 0.5, d, rng);
    const auto gt = oracle::random_graph(m, 0.5, d, rng);
    const auto bs = build_bases(gs, k);
    const auto bt = build_bases(gt, k);
    const Coupling pi = Coupling::with_uniform_marginals(oracle::random_feasible_plan(static_cast<Index>(n), static_cast<Index>(m), rng));
    const Weights w{oracle::random_simplex(k, rng), oracle::random_simplex(k, rng)};

    const auto f_pi = [&](const Matrix& p) {
      Coupling c = pi;
      c.plan = p;
      return objective(bs, bt, c, w);
    };
    CHECK(oracle::relative_error(grad_pi(bs, bt, pi, w), oracle::finite_difference(f_pi, pi.plan)) < 1e-5);

    const auto f_alpha = [&](const Matrix& a) { return objective(bs, bt, pi, Weights::from_alpha(a)); };
    const Matrix fd = oracle::finite_difference(f_alpha, w.alpha());
    CHECK(oracle::relative_error(grad_alpha(bs, bt, pi, w), fd) < 1e-5);
  }
}

TEST_CASE("grad_alpha on a single pair is scalar calculus") {
  const std::vector<Matrix> s{Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 2.0)};
  const std::vector<Matrix> t{Matrix::Constant(1, 1, 1.5), Matrix::Constant(1, 1, -1.0)};
  const Weights w{(Vector(2) << 0.25, 0.75).finished(), (Vector(2) << 0.6, 0.4).finished()};
  const double ds = 0.25 * 0.5 + 0.75 * 2.0;
  const double dt = 0.6 * 1.5 + 0.4 * -1.0;
  const Vector g = grad_alpha(dense_set(s), dense_set(t), Coupling::uniform(1, 1), w);
  CHECK(g(0) == doctest::Approx(2.0 * 0.5 * (ds - dt)));
  CHECK(g(1) == doctest::Approx(2.0 * 2.0 * (ds - dt)));
  CHECK(g(2) == doctest::Approx(-2.0 * 1.5 * (ds - dt)));
  CHECK(g(3) == doctest::Approx(-2.0 * -1.0 * (ds - dt)));
}

TEST_CASE("K = 1 on identical graphs at the identity coupling has mirrored weight gradients") {
  const Matrix a = p3_adjacency();
  const Coupling id = Coupling::with_uniform_marginals(Matrix::Identity(3, 3) / 3.0);
  const Vector g = grad_alpha(single(a), single(a), id, Weights::vertex(1, 0));
  CHECK(g(0) == doctest::Approx(g(1)));
}

TEST_CASE("weighted marginals enter the constant terms") {
  Rng rng(77);
  const auto gs = oracle::random_graph(4, 0.6, 2, rng);
  const auto gt = oracle::random_graph(5, 0.6, 2, rng);
  const auto bs = build_bases(gs, 2);
  const auto bt = build_bases(gt, 2);
  const Vector mu = oracle::random_simplex(4, rng);
  const Vector nu = oracle::random_simplex(5, rng);
  // Scale a positive kernel to the non-uniform marginals.
  Matrix p = Matrix::Constant(4, 5, 1.0) + 0.5 * Matrix::Random(4, 5).cwiseAbs();
  for (int it = 0; it < 5000; ++it) {
    for (Index i = 0; i < 4; ++i) p.row(i) *= mu(i) / p.row(i).sum();
    for (Index j = 0; j < 5; ++j) p.col(j) *= nu(j) / p.col(j).sum();
  }
  const Weights w{oracle::random_simplex(2, rng), oracle::random_simplex(2, rng)};
  const GwObjective f(bs, bt, mu, nu);
  const double want = oracle::quadruple_sum(oracle::mixed_dense(bs, w.source), oracle::mixed_dense(bt, w.target), p);
  CHECK(std::abs(f.value(p, w.source, w.target) - want) < 1e-10);
}

TEST_CASE("products overloads agree with the plan overloads") {
  Rng rng(9);
  const auto gs = oracle::random_graph(6, 0.4, 3, rng);
  const auto gt = oracle::random_graph(6, 0.4, 3, rng);
  const auto bs = build_bases(gs, 3);
  const auto bt = build_bases(gt, 3);
  const GwObjective f = GwObjective::uniform(bs, bt);
  const Matrix p = oracle::random_feasible_plan(6, 6, rng);
  const Vector b1 = oracle::random_simplex(3, rng), b2 = oracle::random_simplex(3, rng);
  const auto prod = f.products(p);
  CHECK(f.value(prod, b1, b2) == doctest::Approx(f.value(p, b1, b2)).epsilon(1e-14));
  CHECK((f.grad_plan(prod, b1, b2) - f.grad_plan(p, b1, b2)).norm() < 1e-14);
  CHECK((f.grad_alpha(prod, b1, b2) - f.grad_alpha(p, b1, b2)).norm() < 1e-14);
  CHECK_THROWS_AS(f.value(Matrix::Zero(5, 6), b1, b2), DimensionError);
  CHECK_THROWS_AS(f.value(p, Vector::Ones(2), b2), DimensionError);
}

TEST_CASE("objective is non-negative on feasible couplings") {
  Rng rng(55);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(6);
    const auto gs = oracle::random_graph(n, 0.4, 2, rng);
    const auto gt = oracle::random_graph(n, 0.4, 2, rng);
    const auto bs = build_bases(gs, 3);
    const auto bt = build_bases(gt, 3);
    const Coupling pi = Coupling::with_uniform_marginals(oracle::random_feasible_plan(static_cast<Index>(n), static_cast<Index>(n), rng));
    const Weights w{oracle::random_simplex(3, rng), oracle::random_simplex(3, rng)};
    CHECK(objective(bs, bt, pi, w) >= -1e-14);
  }
}
