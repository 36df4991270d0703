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

#include "slotalign/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "slotalign/rng.hpp"

namespace slotalign {
namespace {

std::size_t scaled_count(double ratio, std::size_t total) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
}

void check_ratio(double ratio, const char* what) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError(std::string(what) + " ratio must lie in [0, 1]");
}

Matrix select_columns(const Matrix& x, const std::vector<std::size_t>& columns) {
  Matrix out(x.rows(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) out.col(static_cast<Index>(c)) = x.col(static_cast<Index>(columns[c]));
  return out;
}

}  // namespace

double Rng::normal() {
  // 1 - uniform() lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  shuffle(p);
  return p;
}

std::vector<std::size_t> Rng::sample(std::size_t population, std::size_t count) {
  if (count > population) throw ConfigError("cannot sample more items than the population holds");
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = i;
  // Partial Fisher-Yates from the front.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string to_string(FeatureOp op) {
  switch (op) {
    case FeatureOp::None:
      return "none";
    case FeatureOp::Permute:
      return "permute";
    case FeatureOp::Truncate:
      return "truncate";
    case FeatureOp::Compress:
      return "compress";
  }
  return "none";
}

FeatureOp parse_feature_op(const std::string& name) {
  if (name == "none") return FeatureOp::None;
  if (name == "permute") return FeatureOp::Permute;
  if (name == "truncate") return FeatureOp::Truncate;
  if (name == "compress") return FeatureOp::Compress;
  throw ConfigError("unknown feature op '" + name + "' (expected none, permute, truncate or compress)");
}

void PerturbSpec::validate() const {
  check_ratio(edge_ratio, "edge");
  check_ratio(feature_ratio, "feature");
}

Target make_target(const Graph& g, const std::vector<std::size_t>& permutation) {
  const auto n = g.num_nodes();
  if (permutation.size() != n) throw DimensionError("permutation length differs from node count");
  std::vector<char> seen(n, 0);
  for (auto p : permutation) {
    if (p >= n || seen[p]) throw InputError("not a permutation");
    seen[p] = 1;
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) edges.emplace_back(permutation[e.u], permutation[e.v]);

  Matrix features(g.features().rows(), g.features().cols());
  std::vector<std::pair<std::size_t, std::size_t>> anchors;
  anchors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    features.row(static_cast<Index>(permutation[i])) = g.features().row(static_cast<Index>(i));
    anchors.emplace_back(i, permutation[i]);
  }
  return Target{Graph(n, edges, std::move(features)), AnchorSet(std::move(anchors), n, n)};
}

Target make_target(const Graph& g, std::uint64_t seed) {
  Rng rng(seed);
  return make_target(g, rng.permutation(g.num_nodes()));
}

Graph perturb_edges(const Graph& g, double ratio, std::uint64_t seed) {
  check_ratio(ratio, "edge");
  const std::size_t count = scaled_count(ratio, g.num_edges());
  if (count == 0) return g;

  const std::size_t n = g.num_nodes();
  const std::size_t all_pairs = n * (n - 1) / 2;
  const std::size_t open = all_pairs - g.num_edges();
  if (open < count) {
    throw InputError("cannot move " + std::to_string(count) + " edges: only " + std::to_string(open) +
                     " unconnected positions");
  }

  Rng rng(seed);
  const auto removed = rng.sample(g.num_edges(), count);
  std::vector<char> drop(g.num_edges(), 0);
  for (auto r : removed) drop[r] = 1;

  std::vector<std::pair<std::size_t, std::size_t>> kept;
  kept.reserve(g.num_edges());
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    if (!drop[k]) kept.emplace_back(g.edges()[k].u, g.edges()[k].v);
  }

  std::vector<std::pair<std::size_t, std::size_t>> added;
  added.reserve(count);
  if (open >= 2 * count) {
    std::set<std::pair<std::size_t, std::size_t>> taken;
    while (added.size() < count) {
      auto u = static_cast<std::size_t>(rng.below(n));
      auto v = static_cast<std::size_t>(rng.below(n));
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (g.has_edge(u, v) || !taken.insert({u, v}).second) continue;
      added.emplace_back(u, v);
    }
  } else {
    // Near-complete graph: enumerate the complement and sample from it.
    std::vector<std::pair<std::size_t, std::size_t>> complement;
    complement.reserve(open);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (!g.has_edge(u, v)) complement.emplace_back(u, v);
      }
    }
    for (auto idx : rng.sample(complement.size(), count)) added.push_back(complement[idx]);
  }

  kept.insert(kept.end(), added.begin(), added.end());
  return Graph(n, kept, g.features());
}

Graph permute_features(const Graph& g, double ratio, std::uint64_t seed) {
  check_ratio(ratio, "feature");
  const std::size_t d = g.feature_dim();
  const std::size_t count = scaled_count(ratio, d);
  if (count < 2) return g;

  Rng rng(seed);
  const auto chosen = rng.sample(d, count);  // already in random order
  Matrix x = g.features();
  for (std::size_t i = 0; i < count; ++i) {
    x.col(static_cast<Index>(chosen[i])) = g.features().col(static_cast<Index>(chosen[(i + 1) % count]));
  }
  return g.with_features(std::move(x));
}

Graph truncate_features(const Graph& g, double ratio, std::uint64_t seed) {
  check_ratio(ratio, "feature");
  const std::size_t d = g.feature_dim();
  if (d == 0) throw ConfigError("truncation needs node features");
  const std::size_t removed = scaled_count(ratio, d);
  if (removed >= d) throw ConfigError("truncation would leave zero feature columns");
  if (removed == 0) return g;

  Rng rng(seed);
  auto keep = rng.sample(d, d - removed);
  std::sort(keep.begin(), keep.end());
  return g.with_features(select_columns(g.features(), keep));
}

Graph compress_features(const Graph& g, double ratio) {
  check_ratio(ratio, "feature");
  const std::size_t d = g.feature_dim();
  if (d < 2) throw ConfigError("compression needs at least two feature columns");
  const auto kept = static_cast<Index>(std::max<std::size_t>(1, scaled_count(1.0 - ratio, d)));

  const Matrix& x = g.features();
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix scatter = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition of the feature covariance failed");

  const Vector& values = eig.eigenvalues();  // ascending
  const double top = std::max(values.maxCoeff(), 0.0);
  const double cutoff = top * 1e-12 * static_cast<double>(d);
  Matrix components = Matrix::Zero(static_cast<Index>(d), kept);
  for (Index c = 0; c < kept; ++c) {
    const Index src = static_cast<Index>(d) - 1 - c;
    if (!(values(src) > cutoff)) continue;  // no variance: leave a zero column
    Vector v = eig.eigenvectors().col(src);
    Index lead = 0;
    v.cwiseAbs().maxCoeff(&lead);
    if (v(lead) < 0.0) v = -v;
    components.col(c) = v;
  }
  return g.with_features(centered * components);
}

Target generate_target(const Graph& source, const PerturbSpec& spec) {
  spec.validate();
  Target t = make_target(source, derive_seed(spec.seed, 0));
  Graph g = perturb_edges(t.graph, spec.edge_ratio, derive_seed(spec.seed, 1));
  const auto feature_seed = derive_seed(spec.seed, 2);
  switch (spec.feature_op) {
    case FeatureOp::None:
      break;
    case FeatureOp::Permute:
      g = permute_features(g, spec.feature_ratio, feature_seed);
      break;
    case FeatureOp::Truncate:
      g = truncate_features(g, spec.feature_ratio, feature_seed);
      break;
    case FeatureOp::Compress:
      g = compress_features(g, spec.feature_ratio);
      break;
  }
  return Target{std::move(g), std::move(t.anchors)};
}

Graph erdos_renyi(std::size_t n, double avg_degree, std::size_t feature_dim, std::uint64_t seed) {
  if (n == 0) throw ConfigError("graph needs at least one node");
  Rng rng(seed);
  const double p = n > 1 ? std::clamp(avg_degree / static_cast<double>(n - 1), 0.0, 1.0) : 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.emplace_back(u, v);
    }
  }
  Matrix x(static_cast<Index>(n), static_cast<Index>(feature_dim));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  return Graph(n, edges, std::move(x));
}

}  // namespace slotalign
