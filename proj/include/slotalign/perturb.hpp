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
#include <cstdint>
#include <string>
#include <vector>

#include "slotalign/graph.hpp"

namespace slotalign {

enum class FeatureOp { None, Permute, Truncate, Compress };

std::string to_string(FeatureOp op);
FeatureOp parse_feature_op(const std::string& name);

struct PerturbSpec {
  std::uint64_t seed = 0;
  double edge_ratio = 0.0;
  FeatureOp feature_op = FeatureOp::None;
  double feature_ratio = 0.0;

  void validate() const;
};

struct Target {
  Graph graph;
  AnchorSet anchors;  // (source node, target node)
};

// Relabels nodes: source node i becomes target node permutation[i].
Target make_target(const Graph& g, const std::vector<std::size_t>& permutation);
// Uniformly random relabeling drawn from `seed`.
Target make_target(const Graph& g, std::uint64_t seed);

// Moves round(ratio * |E|) edges to positions that are unconnected in `g`.
Graph perturb_edges(const Graph& g, double ratio, std::uint64_t seed);

// Picks round(ratio * d) columns and rotates them cyclically in a random
// order, so no chosen column stays in place when two or more are picked.
Graph permute_features(const Graph& g, double ratio, std::uint64_t seed);

// Drops round(ratio * d) uniformly chosen columns, keeping the order of the rest.
Graph truncate_features(const Graph& g, double ratio, std::uint64_t seed);

// Projects the column-centered features onto the top max(1, round((1-ratio) d))
// principal components. Each component's largest-magnitude coordinate is made
// positive; components without variance produce zero columns.
Graph compress_features(const Graph& g, double ratio);

// make_target, then edge perturbation, then the feature operation. Each stage
// draws from its own stream derived from spec.seed.
Target generate_target(const Graph& source, const PerturbSpec& spec);

// G(n, p) with p = avg_degree / (n - 1) and i.i.d. standard normal features.
Graph erdos_renyi(std::size_t n, double avg_degree, std::size_t feature_dim, std::uint64_t seed);

}  // namespace slotalign
