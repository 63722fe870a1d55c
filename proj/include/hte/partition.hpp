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

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "hte/transform.hpp"
#include "hte/types.hpp"

namespace hte {

struct BinKeyHash {
  std::size_t operator()(const BinKey& key) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (std::int64_t k : key) h = mix64(h ^ static_cast<std::uint64_t>(k));
    return static_cast<std::size_t>(h);
  }
};

/// Cells of a histogram transform that received training data. Bin keys are
/// kept exactly; ids are dense and assigned in first-occurrence row order.
class GridPartition {
 public:
  GridPartition() = default;
  GridPartition(HistogramTransform transform, std::vector<BinKey> keys);

  const HistogramTransform& transform() const { return transform_; }
  std::size_t dim() const { return transform_.dim(); }
  std::size_t n_cells() const { return keys_.size(); }

  /// Keys in cell-id order.
  const std::vector<BinKey>& keys() const { return keys_; }

  /// None when the bin of x held no training point.
  std::optional<CellId> assign(Point x) const;

 private:
  HistogramTransform transform_;
  std::vector<BinKey> keys_;
  std::unordered_map<BinKey, CellId, BinKeyHash> index_;
};

/// Result of build_grid: the partition plus the training rows' cell ids.
struct GridBuild {
  GridPartition partition;
  std::vector<CellId> row_cells;
};

GridBuild build_grid(HistogramTransform transform, const Matrix& x);

/// Median-split tree over the rotated space. Internal nodes compare one
/// rotated coordinate against a threshold: < goes left, >= goes right.
class AdaptiveTree {
 public:
  struct Node {
    std::int32_t dim = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    CellId cell = 0;  // valid for leaves

    bool is_leaf() const { return dim < 0; }
  };

  AdaptiveTree() = default;
  AdaptiveTree(Eigen::MatrixXd rotation, std::vector<Node> nodes, std::size_t min_leaf);

  const Eigen::MatrixXd& rotation() const { return rotation_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t min_leaf() const { return min_leaf_; }
  std::size_t dim() const { return static_cast<std::size_t>(rotation_.rows()); }
  std::size_t n_cells() const { return n_cells_; }

  /// Always a leaf; the tree covers the whole rotated space.
  CellId assign(Point x) const;

  /// Leaf reached by an already rotated point.
  CellId assign_rotated(std::span<const double> z) const;

 private:
  Eigen::MatrixXd rotation_;
  std::vector<Node> nodes_;  // nodes_[0] is the root, stored in preorder
  std::size_t min_leaf_ = 1;
  std::size_t n_cells_ = 0;
};

struct AdaptiveBuild {
  AdaptiveTree tree;
  std::vector<CellId> row_cells;
};

/// Rotates rows by R and splits every cell with more than `min_leaf` points
/// on its largest-variance coordinate at the median, until no cell exceeds
/// min_leaf or a cell's points coincide. Leaf ids follow preorder.
AdaptiveBuild build_adaptive(const Eigen::MatrixXd& rotation, const Matrix& x,
                             std::size_t min_leaf);

/// x -> R x, row by row, with the summation order used by AdaptiveTree::assign.
Matrix rotate_rows(const Eigen::MatrixXd& rotation, const Matrix& x);

using Partition = std::variant<GridPartition, AdaptiveTree>;

std::optional<CellId> assign(const Partition& p, Point x);
std::size_t n_cells(const Partition& p);
std::size_t dim(const Partition& p);

}  // namespace hte
