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
#include <string>
#include <variant>
#include <vector>

#include "slotalign/graph.hpp"
#include "slotalign/types.hpp"

namespace slotalign {

// Symmetric normalized adjacency with self-loops, M^-1/2 (A + I) M^-1/2,
// where M is the degree matrix of A + I. Kept sparse.
class NormalizedAdjacency {
 public:
  explicit NormalizedAdjacency(SparseMatrix values) : values_(std::move(values)) {}

  Index size() const { return values_.rows(); }
  const SparseMatrix& sparse() const { return values_; }
  Matrix dense() const { return Matrix(values_); }
  Matrix apply(const Matrix& x) const { return values_ * x; }

 private:
  SparseMatrix values_;
};

NormalizedAdjacency normalized_adjacency(const Graph& g);

// k successive multiplications by the normalized adjacency; the k-th power
// itself is never formed.
Matrix propagate(const NormalizedAdjacency& a_hat, const Matrix& x, int steps);

struct DenseBasis {
  Matrix values;
};

// Represents factor * factor^T.
struct FactoredBasis {
  Matrix factor;
};

struct SparseBasis {
  SparseMatrix values;
};

// One candidate intra-graph cost matrix. Always symmetric.
class StructureBasis {
 public:
  using Storage = std::variant<DenseBasis, FactoredBasis, SparseBasis>;

  // Throws DimensionError if a dense or sparse matrix is not square and
  // symmetric.
  explicit StructureBasis(Storage storage);

  Index size() const;
  const Storage& storage() const { return storage_; }
  std::string kind() const;

  Matrix materialize() const;
  // B * rhs
  Matrix multiply(const Matrix& rhs) const;
  // lhs * B
  Matrix multiply_left(const Matrix& lhs) const;

 private:
  Storage storage_;
};

// Sum_ij w_i w_j a(i,j) b(i,j). With `weights` empty the plain Frobenius
// inner product is returned.
double weighted_inner(const StructureBasis& a, const StructureBasis& b, const Vector& weights = Vector());

enum class BasisView { Edge, Node, Subgraph };

struct BasisOptions {
  // Nodewise L2 normalization of features before building node/subgraph views.
  bool normalize_features = true;
  // Edge-view is stored dense up to this many nodes, sparse beyond.
  std::size_t dense_edge_threshold = 64;
};

// Ordered [edge-view, node-view, subgraph k=1, subgraph k=2, ...].
class StructureBasisSet {
 public:
  struct Entry {
    BasisView view;
    int hops;  // propagation steps for subgraph views, 0 otherwise
    StructureBasis basis;
  };

  explicit StructureBasisSet(std::vector<Entry> entries);

  std::size_t count() const { return entries_.size(); }
  Index nodes() const { return entries_.front().basis.size(); }
  const StructureBasis& operator[](std::size_t q) const { return entries_[q].basis; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::string label(std::size_t q) const;

 private:
  std::vector<Entry> entries_;
};

// K >= 2 requires features; subgraph views reuse the previous propagation.
StructureBasisSet build_bases(const Graph& g, std::size_t count, const BasisOptions& options = {});

}  // namespace slotalign
