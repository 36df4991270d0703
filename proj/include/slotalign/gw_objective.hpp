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

#pragma once

#include <cstddef>
#include <vector>

#include "slotalign/bases.hpp"
#include "slotalign/types.hpp"

namespace slotalign {

// Transport plan with its prescribed marginals.
struct Coupling {
  Matrix plan;
  Vector source_marginal;
  Vector target_marginal;

  static Coupling uniform(Index n, Index m);
  // Uniform marginals around an arbitrary plan (no balancing is done).
  static Coupling with_uniform_marginals(Matrix plan);

  Index rows() const { return plan.rows(); }
  Index cols() const { return plan.cols(); }
  bool has_uniform_marginals() const;
  // max(|plan 1 - mu|_inf, |plan^T 1 - nu|_inf)
  double marginal_error() const;
};

// Simplex weights over the K bases of each graph; alpha = [source, target].
struct Weights {
  Vector source;
  Vector target;

  static Weights uniform(std::size_t count);
  static Weights vertex(std::size_t count, std::size_t q);
  static Weights from_alpha(const Vector& alpha);

  std::size_t count() const { return static_cast<std::size_t>(source.size()); }
  Vector alpha() const;
  // Throws ConfigError unless both halves lie on the simplex within 1e-9.
  void validate() const;
};

// Lazily combined cost matrix sum_q beta_q D^(q). Products run one pass over
// each basis and never densify factored terms.
class MixedCost {
 public:
  MixedCost(const StructureBasisSet& bases, Vector beta);

  Index size() const { return bases_->nodes(); }
  const Vector& beta() const { return beta_; }
  Matrix multiply(const Matrix& rhs) const;
  Matrix multiply_left(const Matrix& lhs) const;
  Matrix materialize() const;

 private:
  const StructureBasisSet* bases_;
  Vector beta_;
};

// Rejects length mismatch and zero-sum weights.
MixedCost mix(const StructureBasisSet& bases, const Vector& beta);

// Per-plan products shared by objective and gradient evaluation:
// source_products[q] = D_s^(q) pi, target_products[p] = pi D_t^(p),
// cross(q, p) = tr(D_s^(q) pi D_t^(p) pi^T).
struct PlanProducts {
  std::vector<Matrix> source_products;
  std::vector<Matrix> target_products;
  Matrix cross;
};

// The bi-quadratic Gromov-Wasserstein objective
//   F = sum_ij D_s(i,j)^2 mu_i mu_j + sum_kl D_t(k,l)^2 nu_k nu_l - 2 tr(D_s pi D_t pi^T)
// over convex combinations of two basis sets. With uniform marginals the
// constant terms reduce to |D_s|_F^2 / n^2 and |D_t|_F^2 / m^2.
//
// The marginal-weighted Gram matrices of each basis set are computed once, so
// the quadratic terms cost O(K^2) per call. Evaluation is single-threaded and
// sums in a fixed order (bases in index order, Eigen's sequential kernels),
// so results are reproducible bit for bit.
class GwObjective {
 public:
  GwObjective(const StructureBasisSet& source, const StructureBasisSet& target, Vector source_marginal,
              Vector target_marginal);
  static GwObjective uniform(const StructureBasisSet& source, const StructureBasisSet& target);

  std::size_t count() const { return source_->count(); }
  const Matrix& source_gram() const { return source_gram_; }
  const Matrix& target_gram() const { return target_gram_; }

  PlanProducts products(const Matrix& plan) const;

  double value(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const;
  double value(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const;

  // -2 (D_s pi D_t + D_s^T pi D_t^T) = -4 D_s pi D_t for symmetric bases.
  Matrix grad_plan(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const;
  Matrix grad_plan(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const;

  // [dF/dbeta_s ; dF/dbeta_t], length 2K.
  Vector grad_alpha(const Matrix& plan, const Vector& beta_s, const Vector& beta_t) const;
  Vector grad_alpha(const PlanProducts& products, const Vector& beta_s, const Vector& beta_t) const;

 private:
  void check_plan(const Matrix& plan) const;
  void check_weights(const Vector& beta_s, const Vector& beta_t) const;

  const StructureBasisSet* source_;
  const StructureBasisSet* target_;
  Vector source_marginal_;
  Vector target_marginal_;
  Matrix source_gram_;  // (q,p) -> sum_ij mu_i mu_j D^(q)(i,j) D^(p)(i,j)
  Matrix target_gram_;
};

// Convenience entry points; each builds a GwObjective over the coupling's
// marginals.
double objective(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
                 const Weights& w);
Matrix grad_pi(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
               const Weights& w);
Vector grad_alpha(const StructureBasisSet& source, const StructureBasisSet& target, const Coupling& pi,
                  const Weights& w);

}  // namespace slotalign
