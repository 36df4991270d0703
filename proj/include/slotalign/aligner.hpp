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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slotalign/bases.hpp"
#include "slotalign/graph.hpp"
#include "slotalign/gw_objective.hpp"
#include "slotalign/solvers.hpp"

namespace slotalign {

enum class InitMode { Uniform, FeatureSimilarity };

std::string to_string(InitMode mode);
InitMode parse_init_mode(const std::string& name);

struct AlignConfig {
  std::size_t bases = 4;           // K
  double tau = 1.0;                // structure-learning step
  double eta = 0.01;               // KL-proximal weight of the transport step
  int max_iterations = 500;        // k_max
  double alpha_tolerance = 1e-6;   // eps1, on |alpha^{k+1} - alpha^k|_inf
  double plan_tolerance = 1e-6;    // eps2, on |pi^{k+1} - pi^k|_F
  InitMode init = InitMode::Uniform;
  bool freeze_weights = false;     // keep beta at its initial value (GWD / ablation)
  // Near convergence the proximal kernels are badly conditioned; plain
  // scaling needs thousands of sweeps there.
  SinkhornSettings sinkhorn{.max_iterations = 100000};
  BasisOptions basis;

  // K = 4, tau = 1: settings used for real-world graph pairs.
  static AlignConfig real_world();
  // K = 2, tau = 0.1: settings used for node-permuted synthetic targets.
  static AlignConfig semi_synthetic();
  // Fixed adjacency costs: K = 1 with frozen weights.
  static AlignConfig gwd();

  void validate() const;
  // Multiplier applied to the plan gradient inside the KL-proximal step.
  double plan_step() const { return 1.0 / eta; }
  bool is_gwd() const { return bases == 1 && freeze_weights; }
};

struct AlignState {
  Coupling coupling;
  Weights weights;
  int iteration = 0;
  double initial_objective = 0.0;
  std::vector<double> trace;         // objective after each outer iteration
  std::vector<double> alpha_steps;   // |alpha^{k+1} - alpha^k|_inf
  std::vector<double> plan_steps;    // |pi^{k+1} - pi^k|_F
  std::vector<int> sinkhorn_iterations;
  SinkhornPotentials potentials;      // warm start for the next transport step
  bool converged = false;
};

// Structured outcome of a full run; the coupling is returned even when the
// iteration budget ran out.
struct AlignOutcome {
  AlignState state;
  bool converged = false;
  double final_alpha_step = 0.0;
  double final_plan_step = 0.0;
  double seconds = 0.0;
};

// Both graphs' basis sets plus the objective over them; one per run.
class AlignProblem {
 public:
  AlignProblem(const Graph& source, const Graph& target, const AlignConfig& cfg);

  const StructureBasisSet& source_bases() const { return source_bases_; }
  const StructureBasisSet& target_bases() const { return target_bases_; }
  const GwObjective& objective() const { return objective_; }

 private:
  StructureBasisSet source_bases_;
  StructureBasisSet target_bases_;
  GwObjective objective_;
};

AlignState initialize(const Graph& source, const Graph& target, const AlignConfig& cfg);

// One outer iteration: alpha is updated with the current plan, then the plan
// with the new alpha. Appends the new objective and step norms.
AlignState step(const AlignState& state, const StructureBasisSet& source_bases, const StructureBasisSet& target_bases,
                const AlignConfig& cfg);

// Stepper reusing plan products between iterations; `step` above builds one
// per call.
class Optimizer {
 public:
  Optimizer(const GwObjective& objective, const AlignConfig& cfg, AlignState state);

  const AlignState& state() const { return state_; }
  AlignState release() { return std::move(state_); }
  void advance();
  bool below_tolerance() const;

 private:
  const GwObjective* objective_;
  AlignConfig cfg_;
  AlignState state_;
  PlanProducts products_;
};

AlignOutcome run(const Graph& source, const Graph& target, const AlignConfig& cfg);

// iteration,objective,alpha_step_norm,pi_step_norm
void write_trace_csv(const AlignState& state, const std::filesystem::path& path);

}  // namespace slotalign
