/*
 * Copyright 2026 The HTE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hte/partition.hpp"

#include <algorithm>

#include "hte/error.hpp"

namespace hte {

GridPartition::GridPartition(HistogramTransform transform, std::vector<BinKey> keys)
    : transform_(std::move(transform)), keys_(std::move(keys)) {
  index_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i].size() != transform_.dim()) throw FormatError("bin key has wrong dimension");
    if (!index_.emplace(keys_[i], static_cast<CellId>(i)).second)
      throw FormatError("duplicate bin key in grid partition");
  }
}

std::optional<CellId> GridPartition::assign(Point x) const {
  const std::size_t d = dim();
  if (x.size() != d) throw DimensionMismatch(d, x.size());
  std::vector<double> scratch(2 * d);
  BinKey key(d);
  bin_key_into(transform_, x, scratch, key);
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GridBuild build_grid(HistogramTransform transform, const Matrix& x) {
  const std::size_t d = transform.dim();
  if (static_cast<std::size_t>(x.cols()) != d) throw DimensionMismatch(d, static_cast<std::size_t>(x.cols()));

  std::unordered_map<BinKey, CellId, BinKeyHash> index;
  std::vector<BinKey> keys;
  std::vector<CellId> row_cells(static_cast<std::size_t>(x.rows()));
  std::vector<double> scratch(2 * d);
  BinKey key(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    bin_key_into(transform, row(x, i), scratch, key);
    auto [it, inserted] = index.try_emplace(key, static_cast<CellId>(keys.size()));
    if (inserted) keys.push_back(key);
    row_cells[static_cast<std::size_t>(i)] = it->second;
  }
  return {GridPartition(std::move(transform), std::move(keys)), std::move(row_cells)};
}

// --- adaptive splitting ---

namespace {

void rotate_into(const Eigen::MatrixXd& r, Point x, std::span<double> out) {
  const auto d = r.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) acc += r(i, j) * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& z, std::size_t min_leaf) : z_(z), min_leaf_(min_leaf) {
    rows_.resize(static_cast<std::size_t>(z.rows()));
    for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i] = static_cast<Eigen::Index>(i);
    row_cells_.assign(rows_.size(), 0);
  }

  void run() {
    if (!rows_.empty()) grow(0, rows_.size());
    else make_leaf(0, 0);
  }

  std::vector<AdaptiveTree::Node> nodes;
  std::vector<CellId> row_cells_;

 private:
  std::int32_t make_leaf(std::size_t lo, std::size_t hi) {
    AdaptiveTree::Node leaf;
    leaf.cell = next_cell_++;
    for (std::size_t k = lo; k < hi; ++k) row_cells_[static_cast<std::size_t>(rows_[k])] = leaf.cell;
    nodes.push_back(leaf);
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  // Largest sample variance among coordinates that are not constant on the
  // range; -1 when every coordinate is constant.
  int pick_dimension(std::size_t lo, std::size_t hi) const {
    const auto d = z_.cols();
    const double count = static_cast<double>(hi - lo);
    int best = -1;
    double best_var = -1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      double lo_v = z_(rows_[lo], j), hi_v = lo_v, sum = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const double v = z_(rows_[k], j);
        lo_v = std::min(lo_v, v);
        hi_v = std::max(hi_v, v);
        sum += v;
      }
      if (!(lo_v < hi_v)) continue;
      const double mean = sum / count;
      double ss = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const double dv = z_(rows_[k], j) - mean;
        ss += dv * dv;
      }
      const double var = ss / (count - 1.0);
      if (var > best_var) {
        best_var = var;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  std::size_t count_below(std::size_t lo, std::size_t hi, int dim, double threshold) const {
    std::size_t c = 0;
    for (std::size_t k = lo; k < hi; ++k) c += z_(rows_[k], dim) < threshold;
    return c;
  }

  double choose_threshold(std::size_t lo, std::size_t hi, int dim) const {
    std::vector<double> v;
    v.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) v.push_back(z_(rows_[k], dim));
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    double threshold = (n % 2 == 1) ? v[mid] : v[mid - 1] + (v[mid] - v[mid - 1]) / 2.0;
    const std::size_t left = count_below(lo, hi, dim, threshold);
    if (left > 0 && left < n) return threshold;

    // Ties around the median: take the distinct-value boundary closest to
    // the middle. Splitting at v[k] sends every value below v[k] left.
    std::size_t best_k = 0;
    std::size_t best_gap = n;
    for (std::size_t k = 1; k < n; ++k) {
      if (!(v[k - 1] < v[k])) continue;
      const std::size_t gap = k > mid ? k - mid : mid - k;
      if (gap < best_gap) {
        best_gap = gap;
        best_k = k;
      }
    }
    return v[best_k];
  }

  std::int32_t grow(std::size_t lo, std::size_t hi) {
    if (hi - lo <= min_leaf_) return make_leaf(lo, hi);
    const int dim = pick_dimension(lo, hi);
    if (dim < 0) return make_leaf(lo, hi);

    const double threshold = choose_threshold(lo, hi, dim);
    const auto first_right = std::stable_partition(
        rows_.begin() + static_cast<std::ptrdiff_t>(lo), rows_.begin() + static_cast<std::ptrdiff_t>(hi),
        [&](Eigen::Index r) { return z_(r, dim) < threshold; });
    const auto mid = static_cast<std::size_t>(first_right - rows_.begin());

    const auto self = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({dim, threshold, -1, -1, 0});
    const std::int32_t left = grow(lo, mid);
    const std::int32_t right = grow(mid, hi);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }

  const Matrix& z_;
  std::size_t min_leaf_;
  std::vector<Eigen::Index> rows_;
  CellId next_cell_ = 0;
};

}  // namespace

Matrix rotate_rows(const Eigen::MatrixXd& rotation, const Matrix& x) {
  if (x.cols() != rotation.rows())
    throw DimensionMismatch(static_cast<std::size_t>(rotation.rows()), static_cast<std::size_t>(x.cols()));
  Matrix z(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    rotate_into(rotation, row(x, i), {z.data() + i * z.cols(), static_cast<std::size_t>(z.cols())});
  return z;
}

AdaptiveBuild build_adaptive(const Eigen::MatrixXd& rotation, const Matrix& x,
                             std::size_t min_leaf) {
  if (min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
  const Matrix z = rotate_rows(rotation, x);
  TreeBuilder builder(z, min_leaf);
  builder.run();
  AdaptiveBuild out{AdaptiveTree(rotation, std::move(builder.nodes), min_leaf),
                    std::move(builder.row_cells_)};
  return out;
}

AdaptiveTree::AdaptiveTree(Eigen::MatrixXd rotation, std::vector<Node> nodes, std::size_t min_leaf)
    : rotation_(std::move(rotation)), nodes_(std::move(nodes)), min_leaf_(min_leaf) {
  if (nodes_.empty()) throw FormatError("adaptive tree has no nodes");
  const auto d = static_cast<std::int32_t>(rotation_.rows());
  const auto count = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      ++n_cells_;
      continue;
    }
    // Children follow their parent in preorder; this also rules out cycles.
    if (n.dim >= d || n.left <= i || n.right <= i || n.left >= count || n.right >= count)
      throw FormatError("malformed adaptive tree node");
  }
  for (const Node& n : nodes_)
    if (n.is_leaf() && n.cell >= n_cells_) throw FormatError("adaptive tree leaf id out of range");
}

CellId AdaptiveTree::assign_rotated(std::span<const double> z) const {
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const Node& n = nodes_[at];
    at = static_cast<std::size_t>(z[static_cast<std::size_t>(n.dim)] < n.threshold ? n.left : n.right);
  }
  return nodes_[at].cell;
}

CellId AdaptiveTree::assign(Point x) const {
  if (x.size() != dim()) throw DimensionMismatch(dim(), x.size());
  std::vector<double> z(dim());
  rotate_into(rotation_, x, z);
  return assign_rotated(z);
}

std::optional<CellId> assign(const Partition& p, Point x) {
  return std::visit([&](const auto& part) -> std::optional<CellId> { return part.assign(x); }, p);
}

std::size_t n_cells(const Partition& p) {
  return std::visit([](const auto& part) { return part.n_cells(); }, p);
}

std::size_t dim(const Partition& p) {
  return std::visit([](const auto& part) { return part.dim(); }, p);
}

}  // namespace hte
