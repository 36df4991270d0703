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

#include "slotalign/gw_objective.hpp"

#include <cmath>

namespace slotalign {
namespace {

constexpr double kSimplexTolerance = 1e-9;

bool is_uniform(const Vector& v) {
  if (v.size() == 0) return true;
  const double expected = 1.0 / static_cast<double>(v.size());
  return (v.array() == expected).all();
}

Matrix gram(const StructureBasisSet& set, const Vector& marginal) {
  const auto k = static_cast<Index>(set.count());
  Matrix g(k, k);
  const bool uniform = is_uniform(marginal);
  const double scale = 1.0 / (static_cast<double>(set.nodes()) * static_cast<double>(set.nodes()));
  for (Index q = 0; q < k; ++q) {
    for (Index p = q; p < k; ++p) {
      const auto& a = set[static_cast<std::size_t>(q)];
      const auto& b = set[static_cast<std::size_t>(p)];
      const double v = uniform ? weighted_inner(a, b) * scale : weighted_inner(a, b, marginal);
      g(q, p) = v;
      g(p, q) = v;
    }
  }
  return g;
}

void check_simplex(const Vector& v, const char* name) {
  if (v.size() == 0) throw ConfigError(std::string(name) + " weights are empty");
  if ((v.array() < 0.0).any()) throw ConfigError(std::string(name) + " weights must be non-negative");
  if (std::abs(v.sum() - 1.0) > kSimplexTolerance) throw ConfigError(std::string(name) + " weights must sum to 1");
}

}  // namespace

Coupling Coupling::uniform(Index n, Index m) {
  if (n <= 0 || m <= 0) throw DimensionError("coupling needs at least one row and column");
  return Coupling{Matrix::Constant(n, m, 1.0 / (static_cast<double>(n) * static_cast<double>(m))),
                  Vector::Constant(n, 1.0 / static_cast<double>(n)), Vector::Constant(m, 1.0 / static_cast<double>(m))};
}

Coupling Coupling::with_uniform_marginals(Matrix plan) {
  const Index n = plan.rows();
  const Index m = plan.cols();
  if (n <= 0 || m <= 0) throw DimensionError("coupling needs at least one row and column");
  return Coupling{std::move(plan), Vector::Constant(n, 1.0 / static_cast<double>(n)),
                  Vector::Constant(m, 1.0 / static_cast<double>(m))};
}

bool Coupling::has_uniform_marginals() const { return is_uniform(source_marginal) && is_uniform(target_marginal); }

double Coupling::marginal_error() const {
  const double rows_err = (plan.rowwise().sum() - source_marginal).cwiseAbs().maxCoeff();
  const double cols_err = (plan.colwise().sum().transpose() - target_marginal).cwiseAbs().maxCoeff();
  return std::max(rows_err, cols_err);
}

Weights Weights::uniform(std::size_t count) {
  if (count == 0) throw ConfigError("number of bases K must be at least 1");
  const auto k = static_cast<Index>(count);
  return Weights{Vector::Constant(k, 1.0 / static_cast<double>(count)),
                 Vector::Constant(k, 1.0 / static_cast<double>(count))};
}

Weights Weights::vertex(std::size_t count, std::size_t q) {
  if (q >= count) throw ConfigError("simplex vertex index out of range");
  Weights w{Vector::Zero(static_cast<Index>(count)), Vector::Zero(static_cast<Index>(count))};
  w.source(static_cast<Index>(q)) = 1.0;
  w.target(static_cast<Index>(q)) = 1.0;
  return w;
}

Weights Weights::from_alpha(const Vector& alpha) {
  if (alpha.size() == 0 || alpha.size() % 2 != 0) throw DimensionError("alpha must have even, non-zero length");
  const Index k = alpha.size() / 2;
  return Weights{alpha.head(k), alpha.tail(k)};
}

Vector Weights::alpha() const {
  Vector a(source.size() + target.size());
  a << source, target;
  return a;
}

void Weights::validate() const {
  if (source.size() != target.size()) throw DimensionError("source and target weights differ in length");
  check_simplex(source, "source");
  check_simplex(target, "target");
}

MixedCost::MixedCost(const StructureBasisSet& bases, Vector beta) : bases_(&bases), beta_(std::move(beta)) {
  if (static_cast<std::size_t>(beta_.size()) != bases.count()) {
    throw DimensionError("weight vector has " + std::to_string(beta_.size()) + " entries for " +
                         std::to_string(bases.count()) + " bases");
  }
  if (beta_.sum() == 0.0) throw ConfigError("mixture weights sum to zero");
}

Matrix MixedCost::multiply(const Matrix& rhs) const {
  Matrix out = Matrix::Zero(size(), rhs.cols());
  for (std::size_t q = 0; q < bases_->count(); ++q) {
    const double b = beta_(static_cast<Index>(q));
    if (b != 0.0) out.noalias() += b * (*bases_)[q].multiply(rhs);
  }
  return out;
}

Matrix MixedCost::multiply_left(const Matrix& lhs) const {
  Matrix out = Matrix::Zero(lhs.rows(), size());
  for (std::size_t q = 0; q < bases_->count(); ++q) {
    const double b = beta_(static_cast<Index>(q));
    if (b != 0.0) out.noalias() += b * (*bases_)[q].multiply_left(lhs);
  }
  return out;
}

Matrix MixedCost::materialize() const {
  Matrix out = Matrix::Zero(size(), size());
  for (std::size_t q = 0; q < bases_->count(); ++q) out += beta_(static_cast<Index>(q)) * (*bases_)[q].materialize();
  return out;
}

MixedCost mix(const StructureBasisSet& bases, const Vector& beta) { return MixedCost(bases, beta); }

GwObjective::GwObjective(const StructureBasisSet& source, const StructureBasisSet& target, Vector source_marginal,
                         Vector target_marginal)
    : source_(&source),
      target_(&target),
      source_marginal_(std::move(source_marginal)),
      target_marginal_(std::move(target_marginal)) {
  if (source.count() != target.count()) throw DimensionError("source and target basis sets differ in size K");
  if (source_marginal_.size() != source.nodes() || target_marginal_.size() != target.nodes()) {
    throw DimensionError("marginal lengths do not match graph sizes");
  }
  source_gram_ = gram(source, source_marginal_);
  target_gram_ = gram(target, target_marginal_);
}

GwObjective GwObjective::uniform(const StructureBasisSet& source, const StructureBasisSet& target) {
  return GwObjective(source, target, Vector::Constant(source.nodes(), 1.0 / static_cast<double>(source.nodes())),
                     Vector::Constant(target.nodes(), 1.0 / static_cast<double>(target.nodes())));
}

void GwObjective::check_plan(const Matrix& plan) const {
  if (plan.rows() != source_->nodes() || plan.cols() != target_->nodes()) {
    throw DimensionError("coupling is " + std::to_string(plan.rows()) + "x" + std::to_string(plan.cols()) +
                         ", bases are " + std::to_string(source_->nodes()) + " and " +
                         std::to_string(target_->nodes()));
  }
}

void GwObjective::check_weights(const Vector& beta_s, const Vector& beta_t) const {
  const auto k = static_cast<Index>(count());
  if (beta_s.size() != k || beta_t.size() != k) throw DimensionError("weight vectors must have K entries");
}

PlanProducts GwObjective::products(const Matrix& plan) const {
  check_plan(plan);
  const auto k = count();
  PlanProducts out;
  out.source_products.reserve(k);
  out.target_products.reserve(k);
  for (std::size_t q = 0; q < k; ++q) out.source_products.push_back((*source_)[q].multiply(plan));
  for (std::size_t p = 0; p < k; ++p) out.target_products.push_back((*target_)[p].multiply_left(plan));
  // tr(Ds pi Dt pi^T) = <Ds pi, pi Dt> for symmetric Dt.
  out.cross.resize(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t q = 0; q < k; ++q) {
    for (std::size_t p = 0; p < k; ++p) {
      out.cross(static_cast<Index>(q), static_cast<Index>(p)) =
          out.source_products[q].cwiseProduct(out.target_products[p]).sum();
    }
  }
  return out;
}

double GwObjective::value(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const {
  check_weights(beta_s, beta_t);
  const double source_term = beta_s.dot(source_gram_ * beta_s);
  const double target_term = beta_t.dot(target_gram_ * beta_t);
  const double cross_term = beta_s.dot(products.cross * beta_t);
  return source_term + target_term - 2.0 * cross_term;
}

double GwObjective::value(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const {
  return value(products(plan), beta_s, beta_t);
}

Matrix GwObjective::grad_plan(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const {
  check_weights(beta_s, beta_t);
  const auto& first = products.target_products.front();
  Matrix plan_dt = Matrix::Zero(first.rows(), first.cols());
  for (std::size_t p = 0; p < count(); ++p) {
    const double b = beta_t(static_cast<Index>(p));
    if (b != 0.0) plan_dt.noalias() += b * products.target_products[p];
  }
  return -4.0 * MixedCost(*source_, beta_s).multiply(plan_dt);
}

Matrix GwObjective::grad_plan(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const {
  check_plan(plan);
  check_weights(beta_s, beta_t);
  const Matrix plan_dt = MixedCost(*target_, beta_t).multiply_left(plan);
  return -4.0 * MixedCost(*source_, beta_s).multiply(plan_dt);
}

Vector GwObjective::grad_alpha(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const {
  check_weights(beta_s, beta_t);
  const auto k = static_cast<Index>(count());
  Vector g(2 * k);
  g.head(k) = 2.0 * (source_gram_ * beta_s) - 2.0 * (products.cross * beta_t);
  g.tail(k) = 2.0 * (target_gram_ * beta_t) - 2.0 * (products.cross.transpose() * beta_s);
  return g;
}

Vector GwObjective::grad_alpha(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const {
  return grad_alpha(products(plan), beta_s, beta_t);
}

double objective(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
                 const Weights& w) {
  GwObjective f(source, target, pi.source_marginal, pi.target_marginal);
  return f.value(pi.plan, w.source, w.target);
}

Matrix grad_pi(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
               const Weights& w) {
  GwObjective f(source, target, pi.source_marginal, pi.target_marginal);
  return f.grad_plan(pi.plan, w.source, w.target);
}

Vector grad_alpha(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
                  const Weights& w) {
  GwObjective f(source, target, pi.source_marginal, pi.target_marginal);
  return f.grad_alpha(pi.plan, w.source, w.target);
}

}  // namespace slotalign
