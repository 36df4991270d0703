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

#include "slotalign/bases.hpp"

#include <cmath>
#include <type_traits>

namespace slotalign {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double weight_at(const Vector& w, Index i) { return w.size() == 0 ? 1.0 : w(i); }

// Sum over stored entries of `s`: s(i,j) w_i w_j f(i,j).
template <class F>
double sparse_weighted_sum(const SparseMatrix& s, const Vector& w, F&& f) {
  double total = 0.0;
  for (Index i = 0; i < s.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) {
      const Index j = it.col();
      total += it.value() * weight_at(w, i) * weight_at(w, j) * f(i, j);
    }
  }
  return total;
}

Matrix scale_rows_by_sqrt(const Matrix& z, const Vector& w) {
  if (w.size() == 0) return z;
  return w.cwiseSqrt().asDiagonal() * z;
}

double dense_weighted(const Matrix& a, const Matrix& b, const Vector& w) {
  if (w.size() == 0) return a.cwiseProduct(b).sum();
  return (w.asDiagonal() * a * w.asDiagonal()).cwiseProduct(b).sum();
}

bool is_symmetric(const Matrix& m) { return m.rows() == m.cols() && m == m.transpose(); }

bool is_symmetric(const SparseMatrix& s) {
  if (s.rows() != s.cols()) return false;
  SparseMatrix t = s.transpose();
  return (s - t).norm() == 0.0;
}

}  // namespace

NormalizedAdjacency normalized_adjacency(const Graph& g) {
  const auto deg = g.degrees();
  const auto n = static_cast<Index>(g.num_nodes());
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(i)]) + 1.0);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.num_edges() + g.num_nodes());
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt(i) * inv_sqrt(i));
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Index>(e.u);
    const auto v = static_cast<Index>(e.v);
    const double w = inv_sqrt(u) * inv_sqrt(v);
    triplets.emplace_back(u, v, w);
    triplets.emplace_back(v, u, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return NormalizedAdjacency(std::move(a));
}

Matrix propagate(const NormalizedAdjacency& a_hat, const Matrix& x, int steps) {
  if (steps < 1) throw ConfigError("propagation needs at least one step");
  if (x.rows() != a_hat.size()) throw DimensionError("feature rows do not match adjacency size");
  Matrix z = x;
  for (int k = 0; k < steps; ++k) z = a_hat.apply(z);
  return z;
}

StructureBasis::StructureBasis(Storage storage) : storage_(std::move(storage)) {
  std::visit(Overloaded{
                 [](const DenseBasis& d) {
                   if (!is_symmetric(d.values)) throw DimensionError("dense basis must be square and symmetric");
                 },
                 [](const FactoredBasis&) {},
                 [](const SparseBasis& s) {
                   if (!is_symmetric(s.values)) throw DimensionError("sparse basis must be square and symmetric");
                 },
             },
             storage_);
}

Index StructureBasis::size() const {
  return std::visit(Overloaded{
                        [](const DenseBasis& d) { return d.values.rows(); },
                        [](const FactoredBasis& f) { return f.factor.rows(); },
                        [](const SparseBasis& s) { return s.values.rows(); },
                    },
                    storage_);
}

std::string StructureBasis::kind() const {
  return std::visit(Overloaded{
                        [](const DenseBasis&) { return std::string("dense"); },
                        [](const FactoredBasis& f) { return "factored(rank " + std::to_string(f.factor.cols()) + ")"; },
                        [](const SparseBasis&) { return std::string("sparse"); },
                    },
                    storage_);
}

Matrix StructureBasis::materialize() const {
  return std::visit(Overloaded{
                        [](const DenseBasis& d) -> Matrix { return d.values; },
                        [](const FactoredBasis& f) -> Matrix { return f.factor * f.factor.transpose(); },
                        [](const SparseBasis& s) -> Matrix { return Matrix(s.values); },
                    },
                    storage_);
}

Matrix StructureBasis::multiply(const Matrix& rhs) const {
  if (rhs.rows() != size()) throw DimensionError("basis multiply: inner dimensions differ");
  return std::visit(Overloaded{
                        [&](const DenseBasis& d) -> Matrix { return d.values * rhs; },
                        [&](const FactoredBasis& f) -> Matrix {
                          const Matrix thin = f.factor.transpose() * rhs;
                          return f.factor * thin;
                        },
                        [&](const SparseBasis& s) -> Matrix { return s.values * rhs; },
                    },
                    storage_);
}

Matrix StructureBasis::multiply_left(const Matrix& lhs) const {
  if (lhs.cols() != size()) throw DimensionError("basis multiply: inner dimensions differ");
  return std::visit(Overloaded{
                        [&](const DenseBasis& d) -> Matrix { return lhs * d.values; },
                        [&](const FactoredBasis& f) -> Matrix {
                          const Matrix thin = lhs * f.factor;
                          return thin * f.factor.transpose();
                        },
                        // (S^T lhs^T)^T with S symmetric
                        [&](const SparseBasis& s) -> Matrix { return (s.values * lhs.transpose()).transpose(); },
                    },
                    storage_);
}

double weighted_inner(const StructureBasis& a, const StructureBasis& b, const Vector& w) {
  if (a.size() != b.size()) throw DimensionError("inner product of bases of different sizes");
  if (w.size() != 0 && w.size() != a.size()) throw DimensionError("weight vector length mismatch");

  return std::visit(
      Overloaded{
          [&](const FactoredBasis& x, const FactoredBasis& y) {
            const Matrix cross = scale_rows_by_sqrt(x.factor, w).transpose() * scale_rows_by_sqrt(y.factor, w);
            return cross.squaredNorm();
          },
          [&](const SparseBasis& x, const SparseBasis& y) {
            return sparse_weighted_sum(x.values, w, [&](Index i, Index j) { return y.values.coeff(i, j); });
          },
          [&](const SparseBasis& x, const FactoredBasis& y) {
            return sparse_weighted_sum(x.values, w,
                                       [&](Index i, Index j) { return y.factor.row(i).dot(y.factor.row(j)); });
          },
          [&](const FactoredBasis& x, const SparseBasis& y) {
            return sparse_weighted_sum(y.values, w,
                                       [&](Index i, Index j) { return x.factor.row(i).dot(x.factor.row(j)); });
          },
          [&](const SparseBasis& x, const DenseBasis& y) {
            return sparse_weighted_sum(x.values, w, [&](Index i, Index j) { return y.values(i, j); });
          },
          [&](const DenseBasis& x, const SparseBasis& y) {
            return sparse_weighted_sum(y.values, w, [&](Index i, Index j) { return x.values(i, j); });
          },
          [&](const auto&, const auto&) { return dense_weighted(a.materialize(), b.materialize(), w); },
      },
      a.storage(), b.storage());
}

StructureBasisSet::StructureBasisSet(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("a basis set needs at least one basis");
  for (const auto& e : entries_) {
    if (e.basis.size() != entries_.front().basis.size()) throw DimensionError("bases in a set must share a size");
  }
}

std::string StructureBasisSet::label(std::size_t q) const {
  const auto& e = entries_.at(q);
  switch (e.view) {
    case BasisView::Edge:
      return "edge";
    case BasisView::Node:
      return "node";
    case BasisView::Subgraph:
      return "subgraph-" + std::to_string(e.hops);
  }
  return "unknown";
}

StructureBasisSet build_bases(const Graph& g, std::size_t count, const BasisOptions& options) {
  if (count < 1) throw ConfigError("number of bases K must be at least 1");
  if (count >= 2 && !g.has_features()) {
    throw ConfigError("K >= 2 needs node features; use K = 1 for plain graphs");
  }

  std::vector<StructureBasisSet::Entry> entries;
  entries.reserve(count);
  if (g.num_nodes() <= options.dense_edge_threshold) {
    entries.push_back({BasisView::Edge, 0, StructureBasis(DenseBasis{g.dense_adjacency()})});
  } else {
    entries.push_back({BasisView::Edge, 0, StructureBasis(SparseBasis{g.sparse_adjacency()})});
  }
  if (count == 1) return StructureBasisSet(std::move(entries));

  Matrix z = options.normalize_features ? normalize_rows(g.features()) : g.features();
  entries.push_back({BasisView::Node, 0, StructureBasis(FactoredBasis{z})});
  if (count == 2) return StructureBasisSet(std::move(entries));

  const auto a_hat = normalized_adjacency(g);
  for (std::size_t q = 3; q <= count; ++q) {
    z = a_hat.apply(z);
    entries.push_back({BasisView::Subgraph, static_cast<int>(q - 2), StructureBasis(FactoredBasis{z})});
  }
  return StructureBasisSet(std::move(entries));
}

}  // namespace slotalign
