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
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "slotalign/graph.hpp"
#include "slotalign/types.hpp"

namespace slotalign {

// Which side's nodes are queried. TargetToSource ranks, for every target node,
// the source nodes by score (column-wise); SourceToTarget ranks rows.
enum class Direction { TargetToSource, SourceToTarget };

struct Candidate {
  std::size_t index;
  double score;
};

// ranked[q] lists the best counterparts of query node q, sorted by
// non-increasing score with ties broken by lower index.
using RankedLists = std::vector<std::vector<Candidate>>;

struct AlignmentResult {
  Direction direction = Direction::TargetToSource;
  RankedLists topk;
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> one_to_one;
  std::map<std::size_t, double> hits;  // k -> Hit@k in percent
  double seconds = 0.0;
};

// Works on any n x m score matrix (coupling mass or feature similarity).
// k beyond the counterpart count truncates.
RankedLists rank_candidates(const Matrix& scores, std::size_t k, Direction direction = Direction::TargetToSource);

// Percentage of anchors whose true counterpart is among the query node's
// top-k. Throws InputError for an empty anchor set.
std::map<std::size_t, double> hit_at_k(const Matrix& scores, const AnchorSet& anchors,
                                       const std::vector<std::size_t>& ks,
                                       Direction direction = Direction::TargetToSource);

enum class Extraction { Greedy, Exact };

// Injective (source, target) pairs. Greedy scans entries by decreasing mass
// (ties: lower row, then lower column) and keeps pairs with both endpoints
// free. Exact maximizes total mass with an assignment solver and is only
// allowed when n * m <= exact_limit.
std::vector<std::pair<std::size_t, std::size_t>> extract_one_to_one(const Matrix& plan,
                                                                    Extraction method = Extraction::Greedy,
                                                                    std::size_t exact_limit = 1'000'000);

double total_mass(const Matrix& plan, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Cosine similarity of the two feature matrices, X_s_hat X_t_hat^T.
Matrix feature_similarity(const Graph& source, const Graph& target);

// Feature-only baseline: ranks counterparts by cosine similarity.
AlignmentResult knn_align(const Graph& source, const Graph& target, std::size_t k,
                          Direction direction = Direction::TargetToSource);

// "query_index,rank1_<other>,score1,..." one row per query node.
void write_ranked_csv(const RankedLists& ranked, Direction direction, const std::filesystem::path& path);
// "Hit@k: value" lines, two decimals.
void write_metrics(const std::map<std::size_t, double>& hits, const std::filesystem::path& path);
std::map<std::size_t, double> read_metrics(const std::filesystem::path& path);

}  // namespace slotalign
