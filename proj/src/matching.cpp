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

#include "slotalign/matching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace slotalign {
namespace {

// Scores of query node q against every counterpart.
Vector query_scores(const Matrix& scores, std::size_t q, Direction direction) {
  const auto idx = static_cast<Index>(q);
  return direction == Direction::TargetToSource ? Vector(scores.col(idx)) : Vector(scores.row(idx).transpose());
}

std::size_t query_count(const Matrix& scores, Direction direction) {
  return static_cast<std::size_t>(direction == Direction::TargetToSource ? scores.cols() : scores.rows());
}

bool better(double a_score, std::size_t a_index, double b_score, std::size_t b_index) {
  return a_score > b_score || (a_score == b_score && a_index < b_index);
}

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// shortest augmenting paths with potentials. Returns the column of each row.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);  // p[j]: row (1-based) matched to column j
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Index>(i0 - 1), static_cast<Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

RankedLists rank_candidates(const Matrix& scores, std::size_t k, Direction direction) {
  if (k < 1) throw ConfigError("k must be at least 1");
  const std::size_t queries = query_count(scores, direction);
  RankedLists out(queries);
  for (std::size_t q = 0; q < queries; ++q) {
    const Vector s = query_scores(scores, q, direction);
    const auto others = static_cast<std::size_t>(s.size());
    std::vector<std::size_t> order(others);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(k, others);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return better(s(static_cast<Index>(a)), a, s(static_cast<Index>(b)), b);
                      });
    out[q].reserve(take);
    for (std::size_t r = 0; r < take; ++r) out[q].push_back({order[r], s(static_cast<Index>(order[r]))});
  }
  return out;
}

std::map<std::size_t, double> hit_at_k(const Matrix& scores, const AnchorSet& anchors,
                                       const std::vector<std::size_t>& ks, Direction direction) {
  if (anchors.empty()) throw InputError("Hit@k is undefined without anchors");
  for (auto k : ks) {
    if (k < 1) throw ConfigError("k must be at least 1");
  }
  for (auto [s, t] : anchors.pairs()) {
    if (static_cast<Index>(s) >= scores.rows() || static_cast<Index>(t) >= scores.cols()) {
      throw DimensionError("anchor outside the score matrix");
    }
  }

  std::vector<std::size_t> ranks;
  ranks.reserve(anchors.size());
  for (auto [s, t] : anchors.pairs()) {
    const std::size_t query = direction == Direction::TargetToSource ? t : s;
    const std::size_t truth = direction == Direction::TargetToSource ? s : t;
    const Vector v = query_scores(scores, query, direction);
    const double mine = v(static_cast<Index>(truth));
    std::size_t rank = 0;  // number of counterparts ranked ahead of the truth
    for (Index j = 0; j < v.size(); ++j) {
      if (better(v(j), static_cast<std::size_t>(j), mine, truth)) ++rank;
    }
    ranks.push_back(rank);
  }

  std::map<std::size_t, double> out;
  for (auto k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r < k; });
    out[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(anchors.size());
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> extract_one_to_one(const Matrix& plan, Extraction method,
                                                                    std::size_t exact_limit) {
  const auto n = static_cast<std::size_t>(plan.rows());
  const auto m = static_cast<std::size_t>(plan.cols());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n == 0 || m == 0) return pairs;

  if (method == Extraction::Exact) {
    if (n * m > exact_limit) {
      throw ConfigError("exact extraction limited to n*m <= " + std::to_string(exact_limit));
    }
    if (n <= m) {
      const auto cols = min_cost_assignment(-plan);
      for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, cols[i]);
    } else {
      const Matrix flipped = -plan.transpose();
      const auto rows = min_cost_assignment(flipped);
      for (std::size_t j = 0; j < m; ++j) pairs.emplace_back(rows[j], j);
      std::sort(pairs.begin(), pairs.end());
    }
    return pairs;
  }

  std::vector<std::size_t> order(n * m);
  std::iota(order.begin(), order.end(), 0);
  // Flat index i * m + j orders ties by row, then column.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan(static_cast<Index>(a / m), static_cast<Index>(a % m)) >
           plan(static_cast<Index>(b / m), static_cast<Index>(b % m));
  });
  std::vector<char> row_used(n, 0), col_used(m, 0);
  const std::size_t limit = std::min(n, m);
  for (auto flat : order) {
    const std::size_t i = flat / m;
    const std::size_t j = flat % m;
    if (row_used[i] || col_used[j]) continue;
    row_used[i] = col_used[j] = 1;
    pairs.emplace_back(i, j);
    if (pairs.size() == limit) break;
  }
  return pairs;
}

double total_mass(const Matrix& plan, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  double total = 0.0;
  for (auto [i, j] : pairs) total += plan(static_cast<Index>(i), static_cast<Index>(j));
  return total;
}

Matrix feature_similarity(const Graph& source, const Graph& target) {
  if (!source.has_features() || !target.has_features()) throw InputError("feature similarity needs node features");
  if (source.feature_dim() != target.feature_dim()) {
    throw InputError("feature dimensions differ (" + std::to_string(source.feature_dim()) + " vs " +
                     std::to_string(target.feature_dim()) + ")");
  }
  return normalize_rows(source.features()) * normalize_rows(target.features()).transpose();
}

AlignmentResult knn_align(const Graph& source, const Graph& target, std::size_t k, Direction direction) {
  const auto start = std::chrono::steady_clock::now();
  AlignmentResult out;
  out.direction = direction;
  out.topk = rank_candidates(feature_similarity(source, target), k, direction);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_ranked_csv(const RankedLists& ranked, Direction direction, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const bool t2s = direction == Direction::TargetToSource;
  std::size_t width = 0;
  for (const auto& r : ranked) width = std::max(width, r.size());
  out << (t2s ? "target_index" : "source_index");
  for (std::size_t r = 1; r <= width; ++r) out << ",rank" << r << (t2s ? "_source" : "_target") << ",score" << r;
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t q = 0; q < ranked.size(); ++q) {
    out << q;
    for (const auto& c : ranked[q]) out << ',' << c.index << ',' << c.score;
    out << '\n';
  }
}

void write_metrics(const std::map<std::size_t, double>& hits, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::fixed << std::setprecision(2);
  for (auto [k, v] : hits) out << "Hit@" << k << ": " << v << '\n';
}

std::map<std::size_t, double> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::map<std::size_t, double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto at = line.find('@');
    const auto colon = line.find(':');
    if (line.rfind("Hit@", 0) != 0 || colon == std::string::npos) continue;
    out[std::stoul(line.substr(at + 1, colon - at - 1))] = std::stod(line.substr(colon + 1));
  }
  return out;
}

}  // namespace slotalign
