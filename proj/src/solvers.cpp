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

#include "slotalign/solvers.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace slotalign {
namespace {

// Below this the plain scaling vectors risk overflow; use potentials instead.
constexpr double kMinDenseKernel = 1e-200;
constexpr double kFeasibleSum = 1e-12;

void check_marginals(const Vector& mu, const Vector& nu, Index rows, Index cols) {
  if (mu.size() != rows || nu.size() != cols) throw DimensionError("marginal lengths do not match kernel shape");
  if ((mu.array() <= 0.0).any() || (nu.array() <= 0.0).any()) {
    throw ConfigError("marginals must be strictly positive");
  }
}

double residual_of(const Matrix& plan, const Vector& mu, const Vector& nu) {
  const double rows = (plan.rowwise().sum() - mu).cwiseAbs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

[[noreturn]] void fail(double residual, int iterations) {
  throw ConvergenceError("Sinkhorn did not reach the marginal tolerance after " + std::to_string(iterations) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         residual, iterations);
}

bool fits(const SinkhornPotentials* warm, Index rows, Index cols) {
  return warm && warm->source.size() == rows && warm->target.size() == cols && warm->source.allFinite();
}

// Row-wise log-sum-exp of (values + shift broadcast along columns).
Vector row_lse(const Matrix& values, const Vector& col_shift) {
  Vector out(values.rows());
  for (Index i = 0; i < values.rows(); ++i) {
    const auto row = values.row(i).transpose() + col_shift;
    const double mx = row.maxCoeff();
    out(i) = mx + std::log((row.array() - mx).exp().sum());
  }
  return out;
}

// Sweep at which a stalled solve hands over to Newton; the last sweep at the
// latest, so a tight iteration cap still gets one attempt.
int newton_at(const SinkhornSettings& settings) {
  if (settings.newton_after == 0) return 0;
  return std::min(settings.newton_after, settings.max_iterations);
}

// Above this many unknowns the Newton system is solved by conjugate gradients
// instead of a dense factorization.
constexpr Index kDenseNewtonLimit = 2000;

Matrix plan_from(const Matrix& log_kernel, const Vector& f, const Vector& g) {
  return ((log_kernel.colwise() + f).rowwise() + g.transpose()).array().exp().matrix();
}

// Jacobi-preconditioned CG on the Newton system, matrix-free. Unknowns are the
// source block followed by all but the last target entry.
Vector newton_direction_cg(const Matrix& plan, const Vector& rows, const Vector& cols, const Vector& rhs) {
  const Index n = plan.rows();
  const Index m1 = plan.cols() - 1;
  const auto apply = [&](const Vector& x) {
    Vector y(n + m1);
    y.head(n) = rows.cwiseProduct(x.head(n)) + plan.leftCols(m1) * x.tail(m1);
    y.tail(m1) = plan.leftCols(m1).transpose() * x.head(n) + cols.head(m1).cwiseProduct(x.tail(m1));
    return y;
  };
  Vector diag(n + m1);
  diag << rows, cols.head(m1);
  Vector x = Vector::Zero(n + m1);
  Vector r = rhs;
  Vector z = r.cwiseQuotient(diag);
  Vector p = z;
  double rz = r.dot(z);
  const double stop = 1e-24 * rhs.squaredNorm();
  for (Index it = 0; it < 4 * (n + m1) && r.squaredNorm() > stop; ++it) {
    const Vector hp = apply(p);
    const double alpha = rz / p.dot(hp);
    x += alpha * p;
    r -= alpha * hp;
    z = r.cwiseQuotient(diag);
    const double next = r.dot(z);
    p = z + (next / rz) * p;
    rz = next;
  }
  return x;
}

// Newton's method on the dual of the balancing problem
//   max_{f,g} <mu, f> + <nu, g> - sum_ij exp(f_i + L_ij + g_j),
// for kernels on which alternate scaling crawls (nearly decomposable ones can
// need millions of sweeps). The last target potential stays fixed because
// (f + c, g - c) gives the same plan. Steps backtrack on the squared marginal
// gap, for which the Newton direction is a descent direction.
// Returns the number of steps taken, or -1 when it stalls.
int newton_balance(const Matrix& log_kernel, const Vector& mu, const Vector& nu, double tolerance, Vector& f,
                   Vector& g, Matrix& plan, double& residual) {
  constexpr int kMaxSteps = 100;
  const Index n = log_kernel.rows();
  const Index m1 = log_kernel.cols() - 1;
  plan = plan_from(log_kernel, f, g);
  Vector rows = plan.rowwise().sum();
  Vector cols = plan.colwise().sum().transpose();
  Vector gap(n + m1 + 1);
  gap << rows - mu, cols - nu;
  residual = gap.cwiseAbs().maxCoeff();
  double merit = gap.squaredNorm();
  for (int step = 0; step < kMaxSteps; ++step) {
    if (residual <= tolerance) return step;
    const Vector rhs = -gap.head(n + m1);
    Vector d;
    if (n + m1 <= kDenseNewtonLimit) {
      Matrix h = Matrix::Zero(n + m1, n + m1);
      h.topLeftCorner(n, n).diagonal() = rows;
      h.topRightCorner(n, m1) = plan.leftCols(m1);
      h.bottomLeftCorner(m1, n) = plan.leftCols(m1).transpose();
      h.bottomRightCorner(m1, m1).diagonal() = cols.head(m1);
      d = h.ldlt().solve(rhs);
    } else {
      d = newton_direction_cg(plan, rows, cols, rhs);
    }
    if (!d.allFinite()) return -1;

    bool moved = false;
    for (double t = 1.0; t > 1e-12 && !moved; t *= 0.5) {
      Vector f_try = f + t * d.head(n);
      Vector g_try = g;
      g_try.head(m1) += t * d.tail(m1);
      Matrix plan_try = plan_from(log_kernel, f_try, g_try);
      if (!plan_try.allFinite()) continue;
      Vector rows_try = plan_try.rowwise().sum();
      Vector cols_try = plan_try.colwise().sum().transpose();
      Vector gap_try(n + m1 + 1);
      gap_try << rows_try - mu, cols_try - nu;
      const double merit_try = gap_try.squaredNorm();
      if (merit_try > (1.0 - 1e-4 * t) * merit) continue;
      f = std::move(f_try);
      g = std::move(g_try);
      plan = std::move(plan_try);
      rows = std::move(rows_try);
      cols = std::move(cols_try);
      gap = std::move(gap_try);
      merit = merit_try;
      residual = gap.cwiseAbs().maxCoeff();
      moved = true;
    }
    if (!moved) return -1;
  }
  return residual <= tolerance ? kMaxSteps : -1;
}

}  // namespace

void SinkhornSettings::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("Sinkhorn tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("Sinkhorn needs at least one iteration");
  if (newton_after < 0) throw ConfigError("Newton switch-over must be non-negative");
  if (!(floor > 0.0)) throw ConfigError("Sinkhorn floor must be positive");
}

Vector project_simplex(const Vector& v) {
  const Index k = v.size();
  if (k == 0) throw DimensionError("cannot project an empty vector onto the simplex");
  // Points already on the simplex, up to summation noise, come back untouched.
  if ((v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) <= kFeasibleSum) return v;

  std::vector<double> sorted(v.data(), v.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < k; ++j) {
    running += sorted[static_cast<std::size_t>(j)];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vector update_alpha(const Vector& alpha, const Vector& gradient, double step) {
  if (!(step > 0.0)) throw ConfigError("structure-learning step size must be positive");
  if (alpha.size() != gradient.size()) throw DimensionError("alpha and gradient lengths differ");
  if (alpha.size() == 0 || alpha.size() % 2 != 0) throw DimensionError("alpha must have even, non-zero length");
  const Index k = alpha.size() / 2;
  const Vector moved = alpha - step * gradient;
  Vector out(alpha.size());
  out.head(k) = project_simplex(moved.head(k));
  out.tail(k) = project_simplex(moved.tail(k));
  return out;
}

Coupling sinkhorn_log(const Matrix& log_kernel, const Vector& mu, const Vector& nu,
                      const SinkhornSettings& settings, SinkhornReport* report, SinkhornPotentials* warm) {
  settings.validate();
  check_marginals(mu, nu, log_kernel.rows(), log_kernel.cols());
  const Vector log_mu = mu.array().log().matrix();
  const Vector log_nu = nu.array().log().matrix();
  const Matrix log_kernel_t = log_kernel.transpose();

  Vector f = Vector::Zero(log_kernel.rows());
  Vector g = Vector::Zero(log_kernel.cols());
  if (fits(warm, log_kernel.rows(), log_kernel.cols())) f = warm->source;
  Matrix plan;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  int newton_steps = 0;
  while (it < settings.max_iterations) {
    ++it;
    g = log_nu - row_lse(log_kernel_t, f);
    f = log_mu - row_lse(log_kernel, g);
    plan = plan_from(log_kernel, f, g);
    residual = residual_of(plan, mu, nu);
    if (residual <= settings.tolerance) break;
    if (it == newton_at(settings)) {
      Vector nf = f;
      Vector ng = g;
      Matrix nplan;
      double nres = 0.0;
      const int steps = newton_balance(log_kernel, mu, nu, settings.tolerance, nf, ng, nplan, nres);
      if (steps >= 0) {
        f = std::move(nf);
        g = std::move(ng);
        plan = std::move(nplan);
        residual = nres;
        newton_steps = steps;
        break;
      }
    }
  }
  if (report) *report = SinkhornReport{it, residual, true, newton_steps};
  if (residual > settings.tolerance) fail(residual, it);
  if (warm) *warm = SinkhornPotentials{std::move(f), std::move(g)};
  return Coupling{std::move(plan), mu, nu};
}

namespace {

// Plain alternate scaling; `kernel` must be strictly positive.
Coupling balance(const Matrix& kernel, const Vector& mu, const Vector& nu, const SinkhornSettings& settings,
                 SinkhornReport* report, SinkhornPotentials* warm) {
  Vector a = Vector::Ones(kernel.rows());
  if (fits(warm, kernel.rows(), kernel.cols())) a = warm->source.array().exp().matrix();
  Vector b = Vector::Ones(kernel.cols());
  Vector kt_a = kernel.transpose() * a;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < settings.max_iterations) {
    ++it;
    b = nu.cwiseQuotient(kt_a);
    a = mu.cwiseQuotient(kernel * b);
    // Rows are exact after the a-update up to rounding; the column residual
    // reuses K^T a, which the next b-update needs anyway.
    kt_a.noalias() = kernel.transpose() * a;
    residual = (b.cwiseProduct(kt_a) - nu).cwiseAbs().maxCoeff();
    if (residual <= settings.tolerance) break;
    if (it == newton_at(settings) && (a.array() > 0.0).all() && (b.array() > 0.0).all()) {
      Vector f = a.array().log().matrix();
      Vector g = b.array().log().matrix();
      Matrix plan;
      double nres = 0.0;
      const int steps = newton_balance(kernel.array().log().matrix(), mu, nu, settings.tolerance, f, g, plan, nres);
      if (steps >= 0) {
        if (report) *report = SinkhornReport{it, nres, false, steps};
        if (warm) *warm = SinkhornPotentials{std::move(f), std::move(g)};
        return Coupling{std::move(plan), mu, nu};
      }
    }
  }
  Matrix plan = a.asDiagonal() * kernel * b.asDiagonal();
  if (!plan.allFinite()) {
    if (warm) *warm = {};
    return sinkhorn_log(kernel.array().log().matrix(), mu, nu, settings, report, warm);
  }
  residual = residual_of(plan, mu, nu);
  if (report) *report = SinkhornReport{it, residual, false};
  if (residual > settings.tolerance) fail(residual, it);
  if (warm) *warm = SinkhornPotentials{a.array().log().matrix(), b.array().log().matrix()};
  return Coupling{std::move(plan), mu, nu};
}

}  // namespace

Coupling sinkhorn(const Matrix& kernel, const Vector& mu, const Vector& nu, const SinkhornSettings& settings,
                  SinkhornReport* report, SinkhornPotentials* warm) {
  settings.validate();
  check_marginals(mu, nu, kernel.rows(), kernel.cols());
  if ((kernel.array() < 0.0).any() || !kernel.allFinite()) {
    throw InputError("Sinkhorn kernel must be finite and non-negative");
  }
  const Matrix clamped = kernel.cwiseMax(settings.floor);
  if (settings.log_domain || clamped.minCoeff() / clamped.maxCoeff() < kMinDenseKernel) {
    return sinkhorn_log(clamped.array().log().matrix(), mu, nu, settings, report, warm);
  }
  return balance(clamped, mu, nu, settings, report, warm);
}

Coupling kl_prox_step(const Coupling& current, const Matrix& gradient, double step, const SinkhornSettings& settings,
                      SinkhornReport* report, SinkhornPotentials* warm) {
  settings.validate();
  check_marginals(current.source_marginal, current.target_marginal, current.rows(), current.cols());
  if (!(step > 0.0)) throw ConfigError("Sinkhorn step size must be positive");
  if (gradient.rows() != current.rows() || gradient.cols() != current.cols()) {
    throw DimensionError("gradient and coupling shapes differ");
  }
  // Shifting the gradient by a constant rescales the kernel uniformly and
  // leaves the balanced plan unchanged; subtracting the minimum keeps the
  // exponent non-positive.
  const double shift = gradient.minCoeff();
  Matrix log_kernel = current.plan.cwiseMax(settings.floor).array().log().matrix();
  log_kernel.array() -= step * (gradient.array() - shift);
  const double top = log_kernel.maxCoeff();
  log_kernel.array() -= top;

  if (settings.log_domain || log_kernel.minCoeff() < std::log(kMinDenseKernel)) {
    return sinkhorn_log(log_kernel, current.source_marginal, current.target_marginal, settings, report, warm);
  }
  return balance(log_kernel.array().exp().matrix(), current.source_marginal, current.target_marginal, settings,
                 report, warm);
}

double kl_divergence(const Matrix& p, const Matrix& q, double floor) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw DimensionError("KL operands differ in shape");
  const auto pc = p.array().cwiseMax(floor);
  const auto qc = q.array().cwiseMax(floor);
  return (pc * (pc / qc).log() - pc + qc).sum();
}

}  // namespace slotalign
