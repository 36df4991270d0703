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
#include <utility>
#include <vector>

#include "slotalign/types.hpp"

namespace slotalign {

// Undirected edge stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Attributed undirected graph. Immutable once built; the edge list is the
// single source of truth and adjacency is derived on demand.
class Graph {
 public:
  Graph() = default;

  // Validates indices and self-loops, canonicalizes every pair to u < v and
  // removes duplicates. `features` must have exactly n rows; pass a n x 0
  // matrix (or an empty one) for a plain graph.
  Graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
        Matrix features = Matrix());

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  bool has_features() const { return feature_dim() > 0; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& features() const { return features_; }

  std::vector<std::size_t> degrees() const;
  bool has_edge(std::size_t u, std::size_t v) const;

  Matrix dense_adjacency() const;
  SparseMatrix sparse_adjacency() const;

  // Same topology, new feature matrix (row count must match).
  Graph with_features(Matrix features) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;  // sorted, unique
  Matrix features_;
};

// Ground-truth correspondences (source index, target index).
class AnchorSet {
 public:
  AnchorSet() = default;

  // Throws InputError on out-of-range indices or when a source or target
  // index is reused by two different pairs. Exact repeats are dropped.
  AnchorSet(std::vector<std::pair<std::size_t, std::size_t>> pairs, std::size_t source_nodes,
            std::size_t target_nodes);

  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// Edge file: "i j" per line, '#' comments, optional leading "n <count>".
// Feature file: "n d" header followed by n rows of d numbers.
Graph load_graph(const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& features_path = std::nullopt);

AnchorSet load_anchors(const std::filesystem::path& path, std::size_t source_nodes,
                       std::size_t target_nodes);

// Writes the canonical edge ordering with an explicit node-count header, so
// load_graph(save_graph(g)) == g.
void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::optional<std::filesystem::path>& features_path = std::nullopt);
void save_anchors(const AnchorSet& anchors, const std::filesystem::path& path);

// Dense matrix text format shared with feature files.
void write_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);

// Rows scaled to unit L2 norm; all-zero rows are left at zero.
Matrix normalize_rows(const Matrix& x);
Graph normalize_features(const Graph& g);

bool operator==(const Graph& a, const Graph& b);

}  // namespace slotalign
