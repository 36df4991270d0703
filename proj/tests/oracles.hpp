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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code paths except where a
// helper needs a feasible coupling to start from.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "slotalign/bases.hpp"
#include "slotalign/graph.hpp"
#include "slotalign/gw_objective.hpp"
#include "slotalign/rng.hpp"
#include "slotalign/types.hpp"

namespace slotalign::oracle {

inline Graph random_graph(std::size_t n, double p, std::size_t d, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  Matrix x(static_cast<Index>(n), static_cast<Index>(d));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  return Graph(n, edges, x);
}

inline Vector random_simplex(std::size_t k, Rng& rng) {
  Vector v(static_cast<Index>(k));
  for (Index i = 0; i < v.size(); ++i) v(i) = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

// Coupling with uniform marginals built by plain alternate scaling of a random
// positive kernel, run far past any tolerance used in the tests.
inline Matrix random_feasible_plan(Index n, Index m, Rng& rng) {
  Matrix p(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) p(i, j) = 0.05 + rng.uniform();
  }
  for (int it = 0; it < 5000; ++it) {
    for (Index i = 0; i < n; ++i) p.row(i) *= (1.0 / static_cast<double>(n)) / p.row(i).sum();
    for (Index j = 0; j < m; ++j) p.col(j) *= (1.0 / static_cast<double>(m)) / p.col(j).sum();
  }
  return p;
}

inline Matrix mixed_dense(const StructureBasisSet& bases, const Vector& beta) {
  Matrix d = Matrix::Zero(bases.nodes(), bases.nodes());
  for (std::size_t q = 0; q < bases.count(); ++q) d += beta(static_cast<Index>(q)) * bases[q].materialize();
  return d;
}

// sum_{i,j,k,l} (Ds(i,k) - Dt(j,l))^2 pi(i,j) pi(k,l), four nested loops.
inline double quadruple_sum(const Matrix& ds, const Matrix& dt, const Matrix& pi) {
  long double total = 0.0L;
  for (Index i = 0; i < pi.rows(); ++i) {
    for (Index j = 0; j < pi.cols(); ++j) {
      for (Index k = 0; k < pi.rows(); ++k) {
        for (Index l = 0; l < pi.cols(); ++l) {
          const long double diff = ds(i, k) - dt(j, l);
          total += diff * diff * pi(i, j) * pi(k, l);
        }
      }
    }
  }
  return static_cast<double>(total);
}

inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-6) {
  Matrix g(at.rows(), at.cols());
  Matrix x = at;
  for (Index i = 0; i < at.rows(); ++i) {
    for (Index j = 0; j < at.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + h;
      const double up = f(x);
      x(i, j) = keep - h;
      const double down = f(x);
      x(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline double relative_error(const Matrix& got, const Matrix& want) {
  const double scale = std::max(want.norm(), 1e-12);
  return (got - want).norm() / scale;
}

// Euclidean projection onto the probability simplex by bisection on the
// threshold of max(v - theta, 0): a different algorithm from sort-and-scan.
inline Vector simplex_by_bisection(const Vector& v) {
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.array() - mid).max(0.0).sum();
    (mass > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

// Brute-force minimizer of |x - v|^2 over a grid on the 2- or 3-simplex.
inline Vector simplex_by_grid(const Vector& v, int steps) {
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  const double h = 1.0 / steps;
  if (v.size() == 2) {
    for (int a = 0; a <= steps; ++a) {
      Vector x(2);
      x << a * h, 1.0 - a * h;
      const double d = (x - v).squaredNorm();
      if (d < best_dist) best_dist = d, best = x;
    }
  } else {
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; a + b <= steps; ++b) {
        Vector x(3);
        x << a * h, b * h, 1.0 - (a + b) * h;
        const double d = (x - v).squaredNorm();
        if (d < best_dist) best_dist = d, best = x;
      }
    }
  }
  return best;
}

// Every permutation of 0..n-1 as a list; n is tiny.
inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline Matrix permutation_plan(const std::vector<std::size_t>& perm) {
  const auto n = static_cast<Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) p(i, static_cast<Index>(perm[static_cast<std::size_t>(i)])) = 1.0 / static_cast<double>(n);
  return p;
}

}  // namespace slotalign::oracle
