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

#include "slotalign/aligner.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>

namespace slotalign {

std::string to_string(InitMode mode) { return mode == InitMode::Uniform ? "uniform" : "featsim"; }

InitMode parse_init_mode(const std::string& name) {
  if (name == "uniform") return InitMode::Uniform;
  if (name == "featsim") return InitMode::FeatureSimilarity;
  throw ConfigError("unknown init mode '" + name + "' (expected uniform or featsim)");
}

AlignConfig AlignConfig::real_world() { return AlignConfig{}; }

AlignConfig AlignConfig::semi_synthetic() {
  AlignConfig cfg;
  cfg.bases = 2;
  cfg.tau = 0.1;
  return cfg;
}

AlignConfig AlignConfig::gwd() {
  AlignConfig cfg;
  cfg.bases = 1;
  cfg.freeze_weights = true;
  return cfg;
}

void AlignConfig::validate() const {
  if (bases < 1) throw ConfigError("K must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (max_iterations < 1) throw ConfigError("kmax must be at least 1");
  if (!(alpha_tolerance > 0.0) || !(plan_tolerance > 0.0)) throw ConfigError("eps1 and eps2 must be positive");
  sinkhorn.validate();
}

AlignProblem::AlignProblem(const Graph& source, const Graph& target, const AlignConfig& cfg)
    : source_bases_(build_bases(source, cfg.bases, cfg.basis)),
      target_bases_(build_bases(target, cfg.bases, cfg.basis)),
      objective_(GwObjective::uniform(source_bases_, target_bases_)) {}

AlignState initialize(const Graph& source, const Graph& target, const AlignConfig& cfg) {
  cfg.validate();
  if (source.num_nodes() == 0 || target.num_nodes() == 0) throw InputError("graphs must have at least one node");
  const auto n = static_cast<Index>(source.num_nodes());
  const auto m = static_cast<Index>(target.num_nodes());

  AlignState state;
  state.weights = Weights::uniform(cfg.bases);
  if (cfg.init == InitMode::Uniform) {
    state.coupling = Coupling::uniform(n, m);
    return state;
  }

  if (!source.has_features() || !target.has_features()) {
    throw ConfigError("feature-similarity initialization needs features on both graphs");
  }
  if (source.feature_dim() != target.feature_dim()) {
    throw InputError("feature-similarity initialization needs equal feature dimensions (" +
                     std::to_string(source.feature_dim()) + " vs " + std::to_string(target.feature_dim()) + ")");
  }
  const Matrix xs = cfg.basis.normalize_features ? normalize_rows(source.features()) : source.features();
  const Matrix xt = cfg.basis.normalize_features ? normalize_rows(target.features()) : target.features();
  const Matrix kernel = (xs * xt.transpose()).cwiseMax(0.0).array() + cfg.sinkhorn.floor;
  const auto uniform = Coupling::uniform(n, m);
  state.coupling = sinkhorn(kernel, uniform.source_marginal, uniform.target_marginal, cfg.sinkhorn);
  return state;
}

Optimizer::Optimizer(const GwObjective& objective, const AlignConfig& cfg, AlignState state)
    : objective_(&objective), cfg_(cfg), state_(std::move(state)) {
  cfg_.validate();
  if (state_.weights.count() != objective.count()) throw DimensionError("state weights do not match K");
  products_ = objective.products(state_.coupling.plan);
  if (state_.trace.empty() && state_.iteration == 0) {
    state_.initial_objective = objective.value(products_, state_.weights.source, state_.weights.target);
  }
}

void Optimizer::advance() {
  const Weights old_weights = state_.weights;
  Weights weights = old_weights;
  if (!cfg_.freeze_weights) {
    const Vector g = objective_->grad_alpha(products_, weights.source, weights.target);
    weights = Weights::from_alpha(update_alpha(weights.alpha(), g, cfg_.tau));
  }

  const Matrix g_plan = objective_->grad_plan(products_, weights.source, weights.target);
  SinkhornReport report;
  Coupling next = kl_prox_step(state_.coupling, g_plan, cfg_.plan_step(), cfg_.sinkhorn, &report, &state_.potentials);

  products_ = objective_->products(next.plan);
  const double value = objective_->value(products_, weights.source, weights.target);

  const double alpha_step = (weights.alpha() - old_weights.alpha()).cwiseAbs().maxCoeff();
  const double plan_step = (next.plan - state_.coupling.plan).norm();

  state_.coupling = std::move(next);
  state_.weights = std::move(weights);
  ++state_.iteration;
  state_.trace.push_back(value);
  state_.alpha_steps.push_back(alpha_step);
  state_.plan_steps.push_back(plan_step);
  state_.sinkhorn_iterations.push_back(report.iterations);
  state_.converged = below_tolerance();
}

bool Optimizer::below_tolerance() const {
  if (state_.alpha_steps.empty()) return false;
  return state_.alpha_steps.back() < cfg_.alpha_tolerance && state_.plan_steps.back() < cfg_.plan_tolerance;
}

AlignState step(const AlignState& state, const StructureBasisSet& source_bases, const StructureBasisSet& target_bases,
                const AlignConfig& cfg) {
  GwObjective objective(source_bases, target_bases, state.coupling.source_marginal, state.coupling.target_marginal);
  Optimizer opt(objective, cfg, state);
  opt.advance();
  return opt.release();
}

AlignOutcome run(const Graph& source, const Graph& target, const AlignConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  AlignState init = initialize(source, target, cfg);
  AlignProblem problem(source, target, cfg);
  Optimizer opt(problem.objective(), cfg, std::move(init));
  for (int k = 0; k < cfg.max_iterations; ++k) {
    opt.advance();
    if (opt.below_tolerance()) break;
  }
  AlignOutcome out;
  out.state = opt.release();
  out.converged = out.state.converged;
  out.final_alpha_step = out.state.alpha_steps.empty() ? 0.0 : out.state.alpha_steps.back();
  out.final_plan_step = out.state.plan_steps.empty() ? 0.0 : out.state.plan_steps.back();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_trace_csv(const AlignState& state, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "iteration,objective,alpha_step_norm,pi_step_norm\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < state.trace.size(); ++k) {
    out << (k + 1) << ',' << state.trace[k] << ',' << state.alpha_steps[k] << ',' << state.plan_steps[k] << '\n';
  }
}

}  // namespace slotalign
