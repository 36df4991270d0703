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

#include "slotalign/gw_objective.hpp"
#include "slotalign/types.hpp"

namespace slotalign {

struct SinkhornSettings {
  int max_iterations = 200;
  double tolerance = 1e-6;  // on the inf-norm of both marginal residuals
  bool log_domain = false;
  double floor = 1e-30;  // kernel and plan entries are clamped here before logs
  // Scaling sweeps after which an unconverged solve switches to Newton's
  // method on the potentials (or at the cap if that comes first); 0 never
  // switches.
  int newton_after = 500;

  void validate() const;
};

// Raised when scaling stops at max_iterations above tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct SinkhornReport {
  int iterations = 0;
  double residual = 0.0;
  bool log_domain = false;
  int newton_steps = 0;
};

// Euclidean projection onto the probability simplex (sort and threshold).
// Feasible inputs (non-negative, summing to 1 up to rounding) are returned
// unchanged.
Vector project_simplex(const Vector& v);

// Projected gradient step on alpha = [beta_s, beta_t]; each half is projected
// onto its own simplex.
Vector update_alpha(const Vector& alpha, const Vector& gradient, double step);

// Scales `kernel` to diag(a) K diag(b) with the given marginals by alternate
// column/row normalization. Entries are clamped at settings.floor. Switches to
// log-domain potentials when requested or when the kernel's dynamic range would
// underflow the plain scaling vectors.
// Log scalings of a balanced plan: plan(i,j) = exp(source(i)) * K(i,j) * exp(target(j)).
// Passing the potentials of a previous, similar problem as `warm` starts the
// scaling from there; on success they are replaced by the new ones. The
// balanced plan does not depend on the start, only the iteration count does.
struct SinkhornPotentials {
  Vector source;
  Vector target;
};

Coupling sinkhorn(const Matrix& kernel, const Vector& source_marginal, const Vector& target_marginal,
                  const SinkhornSettings& settings, SinkhornReport* report = nullptr,
                  SinkhornPotentials* warm = nullptr);

// Same, starting from log-kernel values.
Coupling sinkhorn_log(const Matrix& log_kernel, const Vector& source_marginal, const Vector& target_marginal,
                      const SinkhornSettings& settings, SinkhornReport* report = nullptr,
                      SinkhornPotentials* warm = nullptr);

// argmin_{pi in C} <gradient, pi> + (1/step) KL(pi || current), solved by
// balancing the kernel current .* exp(-step * gradient) to the marginals of
// `current`.
Coupling kl_prox_step(const Coupling& current, const Matrix& gradient, double step,
                      const SinkhornSettings& settings, SinkhornReport* report = nullptr,
                      SinkhornPotentials* warm = nullptr);

// Generalized KL divergence sum p log(p/q) - p + q, with the floor applied.
double kl_divergence(const Matrix& p, const Matrix& q, double floor = 1e-30);

}  // namespace slotalign
