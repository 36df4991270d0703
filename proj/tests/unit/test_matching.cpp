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

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "slotalign/matching.hpp"

using namespace slotalign;

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

AnchorSet identity_anchors(std::size_t n) {
  Pairs p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(i, i);
  return AnchorSet(p, n, n);
}

// Rank of the true counterpart computed by sorting a copy of the column.
std::size_t rank_by_sort(const Matrix& scores, std::size_t s, std::size_t t) {
  std::vector<std::pair<double, std::size_t>> col;
  for (Index i = 0; i < scores.rows(); ++i) col.emplace_back(-scores(i, static_cast<Index>(t)), static_cast<std::size_t>(i));
  std::sort(col.begin(), col.end());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col[r].second == s) return r + 1;
  }
  return 0;
}

}  // namespace

TEST_CASE("rank_candidates basics") {
  const auto id = rank_candidates(Matrix::Identity(4, 4) / 4.0, 1);
  for (std::size_t t = 0; t < 4; ++t) CHECK(id[t][0].index == t);

  const auto uni = rank_candidates(Matrix::Constant(5, 5, 0.04), 3);
  for (const auto& list : uni) {
    REQUIRE(list.size() == 3);
    CHECK(list[0].index == 0);
    CHECK(list[1].index == 1);
    CHECK(list[2].index == 2);
  }

  const Matrix p = (Matrix(2, 2) << 0.4, 0.1, 0.2, 0.3).finished();
  const auto t2s = rank_candidates(p, 1, Direction::TargetToSource);
  CHECK(t2s[0][0].index == 0);
  CHECK(t2s[1][0].index == 1);
  const auto s2t = rank_candidates(p, 2, Direction::SourceToTarget);
  CHECK(s2t[1][0].index == 1);
  CHECK(s2t[1][1].index == 0);

  CHECK(rank_candidates(p, 10)[0].size() == 2);  // truncated, not an error
  CHECK_THROWS_AS(rank_candidates(p, 0), ConfigError);
}

TEST_CASE("ranked lists are sorted with lower index first on ties") {
  Rng rng(3);
  Matrix s(12, 9);
  for (Index i = 0; i < 12; ++i) {
    for (Index j = 0; j < 9; ++j) s(i, j) = static_cast<double>(rng.below(4));
  }
  for (const auto& list : rank_candidates(s, 12)) {
    for (std::size_t r = 1; r < list.size(); ++r) {
      const bool ordered = list[r - 1].score > list[r].score ||
                           (list[r - 1].score == list[r].score && list[r - 1].index < list[r].index);
      CHECK(ordered);
    }
  }
}

TEST_CASE("hit_at_k hand cases") {
  auto h = hit_at_k(Matrix::Identity(3, 3) / 3.0, identity_anchors(3), {1, 5});
  CHECK(h.at(1) == doctest::Approx(100.0));
  CHECK(h.at(5) == doctest::Approx(100.0));

  // Column 2's true source is second best.
  const Matrix p = (Matrix(3, 3) << 0.3, 0.0, 0.0, 0.0, 0.3, 0.2, 0.0, 0.0, 0.1).finished();
  h = hit_at_k(p, identity_anchors(3), {1, 2});
  CHECK(h.at(1) == doctest::Approx(200.0 / 3.0));
  CHECK(h.at(2) == doctest::Approx(100.0));

  h = hit_at_k(Matrix::Constant(3, 3, 1.0 / 9), AnchorSet({{0, 0}}, 3, 3), {1});
  CHECK(h.at(1) == doctest::Approx(100.0));

  CHECK_THROWS_AS(hit_at_k(p, AnchorSet(), {1}), InputError);
}

TEST_CASE("hit_at_k agrees with sorting and is non-decreasing in k") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + rng.below(10);
    Matrix s(static_cast<Index>(n), static_cast<Index>(n));
    for (Index i = 0; i < s.rows(); ++i) {
      for (Index j = 0; j < s.cols(); ++j) s(i, j) = rng.uniform();
    }
    const auto perm = rng.permutation(n);
    Pairs pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, perm[i]);
    const AnchorSet anchors(pairs, n, n);
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= n; ++k) ks.push_back(k);
    const auto h = hit_at_k(s, anchors, ks);
    double prev = 0.0;
    for (std::size_t k : ks) {
      std::size_t hits = 0;
      for (auto [a, b] : pairs) hits += rank_by_sort(s, a, b) <= k;
      CHECK(h.at(k) == doctest::Approx(100.0 * static_cast<double>(hits) / static_cast<double>(n)));
      CHECK(h.at(k) >= prev);
      prev = h.at(k);
    }
    CHECK(prev == doctest::Approx(100.0));
  }
}

TEST_CASE("one-to-one extraction") {
  const Matrix perm = oracle::permutation_plan({2, 0, 1});
  const Pairs want{{0, 2}, {1, 0}, {2, 1}};
  auto sorted = [](Pairs p) {
    std::sort(p.begin(), p.end());
    return p;
  };
  CHECK(sorted(extract_one_to_one(perm, Extraction::Greedy)) == want);
  CHECK(sorted(extract_one_to_one(perm, Extraction::Exact)) == want);

  const Matrix p = (Matrix(2, 2) << 0.5, 0.4, 0.45, 0.1).finished();
  const auto greedy = extract_one_to_one(p, Extraction::Greedy);
  CHECK(sorted(greedy) == Pairs{{0, 0}, {1, 1}});
  CHECK(total_mass(p, greedy) == doctest::Approx(0.6));
  const auto exact = extract_one_to_one(p, Extraction::Exact);
  CHECK(sorted(exact) == Pairs{{0, 1}, {1, 0}});
  CHECK(total_mass(p, exact) == doctest::Approx(0.85));

  CHECK(sorted(extract_one_to_one(Matrix::Constant(3, 3, 1e-30))) == Pairs{{0, 0}, {1, 1}, {2, 2}});
  CHECK_THROWS_AS(extract_one_to_one(Matrix::Ones(10, 10), Extraction::Exact, 50), ConfigError);
}

TEST_CASE("exact extraction matches exhaustive search") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng.below(6);
    Matrix s(static_cast<Index>(n), static_cast<Index>(n));
    for (Index i = 0; i < s.rows(); ++i) {
      for (Index j = 0; j < s.cols(); ++j) s(i, j) = rng.uniform();
    }
    double best = -1.0;
    for (const auto& perm : oracle::all_permutations(n)) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += s(static_cast<Index>(i), static_cast<Index>(perm[i]));
      best = std::max(best, m);
    }
    const auto pairs = extract_one_to_one(s, Extraction::Exact);
    CHECK(pairs.size() == n);
    CHECK(total_mass(s, pairs) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("rectangular extraction is injective on both sides") {
  Rng rng(9);
  for (auto [n, m] : std::vector<std::pair<Index, Index>>{{3, 5}, {5, 3}}) {
    Matrix s(n, m);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) s(i, j) = rng.uniform();
    }
    for (auto method : {Extraction::Greedy, Extraction::Exact}) {
      const auto pairs = extract_one_to_one(s, method);
      CHECK(pairs.size() == static_cast<std::size_t>(std::min(n, m)));
      std::vector<bool> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(m));
      for (auto [a, b] : pairs) {
        CHECK_FALSE(rows[a]);
        CHECK_FALSE(cols[b]);
        rows[a] = cols[b] = true;
      }
    }
  }
}

TEST_CASE("KNN feature baseline") {
  Rng rng(10);
  const Graph gs = oracle::random_graph(6, 0.0, 4, rng);
  auto r = knn_align(gs, gs, 5);
  CHECK(r.hits.empty());
  CHECK(hit_at_k(feature_similarity(gs, gs), identity_anchors(6), {1}).at(1) == doctest::Approx(100.0));

  Matrix swapped = gs.features();
  swapped.row(1).swap(swapped.row(4));
  const Matrix sim = feature_similarity(gs, gs.with_features(swapped));
  const auto top = rank_candidates(sim, 1);
  for (std::size_t t = 0; t < 6; ++t) {
    const std::size_t want = t == 1 ? 4 : (t == 4 ? 1 : t);
    CHECK(top[t][0].index == want);
  }
  CHECK(hit_at_k(sim, identity_anchors(6), {1}).at(1) == doctest::Approx(400.0 / 6.0));
  CHECK_THROWS_AS(feature_similarity(gs, gs.with_features(Matrix::Ones(6, 3))), InputError);
}

TEST_CASE("ranked csv and metrics files") {
  testing::TempDir dir;
  const Matrix p = (Matrix(2, 2) << 0.4, 0.1, 0.2, 0.3).finished();
  write_ranked_csv(rank_candidates(p, 2), Direction::TargetToSource, dir.path() / "m.csv");
  CHECK(testing::slurp(dir.path() / "m.csv") ==
        "target_index,rank1_source,score1,rank2_source,score2\n0,0,0.40000000000000002,1,0.20000000000000001\n"
        "1,1,0.29999999999999999,0,0.10000000000000001\n");
  const std::map<std::size_t, double> hits{{1, 200.0 / 3.0}, {10, 100.0}};
  write_metrics(hits, dir.path() / "metrics.txt");
  CHECK(testing::slurp(dir.path() / "metrics.txt") == "Hit@1: 66.67\nHit@10: 100.00\n");
  const auto back = read_metrics(dir.path() / "metrics.txt");
  CHECK(back.at(1) == doctest::Approx(66.67));
  CHECK(back.at(10) == doctest::Approx(100.0));
}
