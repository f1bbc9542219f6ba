#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "orthofrac/types.hpp"

namespace orthofrac {

/// Cell of a forest of quadtrees laid over a grid of square roots.
///
/// (ix, iy) index the cell within the uniform grid of its level, so a cell at
/// level l spans [ix, ix + 1] * (root_size / 2^l) along x.
struct QuadtreeCell {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  int parent = -1;
  int first_child = -1;  ///< children are stored contiguously: SW, SE, NW, NE

  bool is_leaf() const { return first_child < 0; }
};

/// Axis-aligned square.
struct CellBounds {
  Vec2 lo;
  double size = 0.0;

  Vec2 hi() const { return lo + Vec2(size, size); }
  Vec2 center() const { return lo + Vec2(0.5 * size, 0.5 * size); }
};

class Quadtree {
 public:
  static constexpr int kMaxLevel = 24;

  Quadtree() = default;
  Quadtree(const Vec2& origin, double root_size, int roots_x, int roots_y);

  int size() const { return static_cast<int>(cells_.size()); }
  const QuadtreeCell& cell(int id) const { return cells_.at(id); }
  CellBounds bounds(int id) const;

  /// Splits a leaf into four children. Throws MeshError for non-leaves.
  void split(int id);

  /// Cell at exactly (level, ix, iy), or -1.
  int find(int level, std::int64_t ix, std::int64_t iy) const;

  /// Deepest existing cell with level <= `level` whose region contains cell (level, ix, iy),
  /// or -1 when (ix, iy) lies outside the forest.
  int covering(int level, std::int64_t ix, std::int64_t iy) const;

  /// Leaf containing the point (ties resolved towards the upper-right cell, clamped to the forest).
  int locate(const Vec2& x) const;

  /// Leaves in depth-first order from the roots (row-major), deterministic.
  std::vector<int> leaves() const;

  int max_leaf_level() const;
  int roots_x() const { return roots_x_; }
  int roots_y() const { return roots_y_; }
  double root_size() const { return root_size_; }
  const Vec2& origin() const { return origin_; }
  double cell_size(int level) const;

  /// True when every pair of edge-adjacent leaves differs by at most one level.
  bool is_balanced() const;

 private:
  static std::uint64_t key(int level, std::int64_t ix, std::int64_t iy);
  int add_cell(const QuadtreeCell& c);

  Vec2 origin_ = Vec2::Zero();
  double root_size_ = 1.0;
  int roots_x_ = 0;
  int roots_y_ = 0;
  std::vector<QuadtreeCell> cells_;
  std::unordered_map<std::uint64_t, int> index_;
};

}  // namespace orthofrac
