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

#include "slotalign/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace slotalign {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::size_t parse_index(std::string_view token, const std::string& source, std::size_t line) {
  std::size_t value = 0;
  if (!parse_number(token, value)) {
    throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

// One logical line of a text input: its 1-based number and content.
struct Line {
  std::size_t number;
  std::string_view text;
};

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : source_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + source_);
    std::ostringstream ss;
    ss << in.rdbuf();
    buffer_ = ss.str();
  }

  const std::string& source() const { return source_; }

  // Skips blank lines and '#' comments.
  std::optional<Line> next() {
    while (pos_ < buffer_.size()) {
      auto end = buffer_.find('\n', pos_);
      if (end == std::string::npos) end = buffer_.size();
      std::string_view raw(buffer_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      auto text = trim(raw);
      if (text.empty() || text.front() == '#') continue;
      return Line{number_, text};
    }
    return std::nullopt;
  }

 private:
  std::string source_;
  std::string buffer_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

struct PairFile {
  std::optional<std::size_t> declared_n;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> lines;
};

PairFile read_pairs(const std::filesystem::path& path, bool allow_header) {
  LineReader reader(path);
  PairFile out;
  bool first = true;
  while (auto line = reader.next()) {
    auto tokens = split_ws(line->text);
    if (first && allow_header && tokens.size() == 2 && tokens[0] == "n") {
      out.declared_n = parse_index(tokens[1], reader.source(), line->number);
      first = false;
      continue;
    }
    first = false;
    if (tokens.size() != 2) {
      throw ParseError(reader.source(), line->number, "expected two indices");
    }
    out.pairs.emplace_back(parse_index(tokens[0], reader.source(), line->number),
                           parse_index(tokens[1], reader.source(), line->number));
    out.lines.push_back(line->number);
  }
  return out;
}

}  // namespace

Graph::Graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
             Matrix features)
    : n_(n) {
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") out of range for n = " + std::to_string(n));
    }
    if (a == b) throw InputError("self-loop on node " + std::to_string(a));
    edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  if (features.size() == 0) {
    features_ = Matrix(static_cast<Index>(n), 0);
  } else {
    if (static_cast<std::size_t>(features.rows()) != n) {
      throw InputError("feature matrix has " + std::to_string(features.rows()) +
                       " rows, graph has " + std::to_string(n) + " nodes");
    }
    features_ = std::move(features);
  }
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  if (u == v) return false;
  const Edge key{std::min(u, v), std::max(u, v)};
  return std::binary_search(edges_.begin(), edges_.end(), key);
}

Matrix Graph::dense_adjacency() const {
  Matrix a = Matrix::Zero(static_cast<Index>(n_), static_cast<Index>(n_));
  for (const auto& e : edges_) {
    a(static_cast<Index>(e.u), static_cast<Index>(e.v)) = 1.0;
    a(static_cast<Index>(e.v), static_cast<Index>(e.u)) = 1.0;
  }
  return a;
}

SparseMatrix Graph::sparse_adjacency() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges_.size());
  for (const auto& e : edges_) {
    triplets.emplace_back(static_cast<Index>(e.u), static_cast<Index>(e.v), 1.0);
    triplets.emplace_back(static_cast<Index>(e.v), static_cast<Index>(e.u), 1.0);
  }
  SparseMatrix a(static_cast<Index>(n_), static_cast<Index>(n_));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

Graph Graph::with_features(Matrix features) const {
  Graph g = *this;
  if (features.size() == 0) {
    g.features_ = Matrix(static_cast<Index>(n_), 0);
    return g;
  }
  if (static_cast<std::size_t>(features.rows()) != n_) {
    throw InputError("feature matrix row count does not match node count");
  }
  g.features_ = std::move(features);
  return g;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.num_nodes() == b.num_nodes() && a.edges() == b.edges() &&
         a.features().rows() == b.features().rows() &&
         a.features().cols() == b.features().cols() && a.features() == b.features();
}

AnchorSet::AnchorSet(std::vector<std::pair<std::size_t, std::size_t>> pairs,
                     std::size_t source_nodes, std::size_t target_nodes) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<char> source_used(source_nodes, 0);
  std::vector<char> target_used(target_nodes, 0);
  for (auto [s, t] : pairs) {
    if (s >= source_nodes || t >= target_nodes) {
      throw InputError("anchor (" + std::to_string(s) + ", " + std::to_string(t) +
                       ") out of range");
    }
    if (!seen.insert({s, t}).second) continue;
    if (source_used[s]) throw InputError("repeated source index " + std::to_string(s) + " in anchors");
    if (target_used[t]) throw InputError("repeated target index " + std::to_string(t) + " in anchors");
    source_used[s] = target_used[t] = 1;
    pairs_.emplace_back(s, t);
  }
}

Matrix read_matrix(const std::filesystem::path& path) {
  LineReader reader(path);
  auto header = reader.next();
  if (!header) throw ParseError(reader.source(), 1, "missing \"n d\" header");
  auto dims = split_ws(header->text);
  if (dims.size() != 2) throw ParseError(reader.source(), header->number, "expected \"n d\" header");
  const auto rows = parse_index(dims[0], reader.source(), header->number);
  const auto cols = parse_index(dims[1], reader.source(), header->number);

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t r = 0;
  while (auto line = reader.next()) {
    if (r == rows) throw ParseError(reader.source(), line->number, "more rows than the declared " + std::to_string(rows));
    auto tokens = split_ws(line->text);
    if (tokens.size() != cols) {
      throw ParseError(reader.source(), line->number,
                       "expected " + std::to_string(cols) + " values, got " + std::to_string(tokens.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_number(tokens[c], v) || !std::isfinite(v)) {
        throw ParseError(reader.source(), line->number, "bad number '" + std::string(tokens[c]) + "'");
      }
      m(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
    ++r;
  }
  if (r != rows) {
    throw InputError(reader.source() + ": declared " + std::to_string(rows) + " rows, found " + std::to_string(r));
  }
  return m;
}

void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

Graph load_graph(const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& features_path) {
  auto file = read_pairs(edges_path, /*allow_header=*/true);

  std::size_t inferred = 0;
  for (auto [a, b] : file.pairs) inferred = std::max({inferred, a + 1, b + 1});

  std::optional<Matrix> features;
  if (features_path) features = read_matrix(*features_path);

  std::size_t n = inferred;
  if (file.declared_n) {
    n = *file.declared_n;
    for (std::size_t k = 0; k < file.pairs.size(); ++k) {
      auto [a, b] = file.pairs[k];
      if (a >= n || b >= n) {
        throw ParseError(edges_path.string(), file.lines[k],
                         "index out of range for declared n = " + std::to_string(n));
      }
    }
  } else if (features && static_cast<std::size_t>(features->rows()) > inferred) {
    // Without an edge header the feature header is the only record of
    // trailing isolated nodes.
    n = static_cast<std::size_t>(features->rows());
  }
  for (std::size_t k = 0; k < file.pairs.size(); ++k) {
    if (file.pairs[k].first == file.pairs[k].second) {
      throw ParseError(edges_path.string(), file.lines[k], "self-loop");
    }
  }
  if (features && static_cast<std::size_t>(features->rows()) != n) {
    throw InputError(features_path->string() + ": " + std::to_string(features->rows()) +
                     " feature rows for a graph with " + std::to_string(n) + " nodes");
  }
  return Graph(n, file.pairs, features ? std::move(*features) : Matrix());
}

AnchorSet load_anchors(const std::filesystem::path& path, std::size_t source_nodes,
                       std::size_t target_nodes) {
  auto file = read_pairs(path, /*allow_header=*/false);
  return AnchorSet(std::move(file.pairs), source_nodes, target_nodes);
}

void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::optional<std::filesystem::path>& features_path) {
  std::ofstream out(edges_path);
  if (!out) throw InputError("cannot write " + edges_path.string());
  out << "n " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  if (features_path) write_matrix(g.features(), *features_path);
}

void save_anchors(const AnchorSet& anchors, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (auto [s, t] : anchors.pairs()) out << s << ' ' << t << '\n';
}

Matrix normalize_rows(const Matrix& x) {
  Matrix out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

Graph normalize_features(const Graph& g) { return g.with_features(normalize_rows(g.features())); }

}  // namespace slotalign
