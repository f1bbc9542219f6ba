#include "orthofrac/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace orthofrac {

Quadtree::Quadtree(const Vec2& origin, double root_size, int roots_x, int roots_y)
    : origin_(origin), root_size_(root_size), roots_x_(roots_x), roots_y_(roots_y) {
  if (!(root_size > 0.0) || roots_x <= 0 || roots_y <= 0) {
    throw MeshError("quadtree: root grid must be non-empty with positive cell size");
  }
  for (int j = 0; j < roots_y; ++j) {
    for (int i = 0; i < roots_x; ++i) {
      add_cell(QuadtreeCell{0, i, j, -1, -1});
    }
  }
}

std::uint64_t Quadtree::key(int level, std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(level) << 58) |
         (static_cast<std::uint64_t>(ix) << 29) | static_cast<std::uint64_t>(iy);
}

int Quadtree::add_cell(const QuadtreeCell& c) {
  const int id = static_cast<int>(cells_.size());
  cells_.push_back(c);
  index_.emplace(key(c.level, c.ix, c.iy), id);
  return id;
}

double Quadtree::cell_size(int level) const { return std::ldexp(root_size_, -level); }

CellBounds Quadtree::bounds(int id) const {
  const QuadtreeCell& c = cells_.at(id);
  const double h = cell_size(c.level);
  return {origin_ + Vec2(static_cast<double>(c.ix) * h, static_cast<double>(c.iy) * h), h};
}

void Quadtree::split(int id) {
  if (!cells_.at(id).is_leaf()) {
    throw MeshError("quadtree: cell " + std::to_string(id) + " is not a leaf");
  }
  const QuadtreeCell parent = cells_[id];
  if (parent.level + 1 > kMaxLevel) throw MeshError("quadtree: maximum level exceeded");
  const int first = size();
  for (int k = 0; k < 4; ++k) {
    add_cell(QuadtreeCell{parent.level + 1, 2 * parent.ix + (k & 1), 2 * parent.iy + (k >> 1),
                          id, -1});
  }
  cells_[id].first_child = first;
}

int Quadtree::find(int level, std::int64_t ix, std::int64_t iy) const {
  if (level < 0 || ix < 0 || iy < 0) return -1;
  auto it = index_.find(key(level, ix, iy));
  return it == index_.end() ? -1 : it->second;
}

int Quadtree::covering(int level, std::int64_t ix, std::int64_t iy) const {
  if (ix < 0 || iy < 0) return -1;
  if ((ix >> level) >= roots_x_ || (iy >> level) >= roots_y_) return -1;
  int id = find(0, ix >> level, iy >> level);
  for (int l = 1; l <= level; ++l) {
    const QuadtreeCell& c = cells_[id];
    if (c.is_leaf()) break;
    const int shift = level - l;
    const int cx = static_cast<int>((ix >> shift) & 1);
    const int cy = static_cast<int>((iy >> shift) & 1);
    id = c.first_child + cx + 2 * cy;
  }
  return id;
}

int Quadtree::locate(const Vec2& x) const {
  const Vec2 rel = (x - origin_) / root_size_;
  auto clamp_index = [](double v, int n) {
    return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1);
  };
  int id = find(0, clamp_index(rel.x(), roots_x_), clamp_index(rel.y(), roots_y_));
  while (!cells_[id].is_leaf()) {
    const CellBounds b = bounds(id);
    const Vec2 c = b.center();
    const int cx = x.x() >= c.x() ? 1 : 0;
    const int cy = x.y() >= c.y() ? 1 : 0;
    id = cells_[id].first_child + cx + 2 * cy;
  }
  return id;
}

std::vector<int> Quadtree::leaves() const {
  std::vector<int> out;
  std::vector<int> stack;
  for (int r = roots_x_ * roots_y_ - 1; r >= 0; --r) stack.push_back(r);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const QuadtreeCell& c = cells_[id];
    if (c.is_leaf()) {
      out.push_back(id);
    } else {
      for (int k = 3; k >= 0; --k) stack.push_back(c.first_child + k);
    }
  }
  return out;
}

int Quadtree::max_leaf_level() const {
  int m = 0;
  for (const auto& c : cells_)
    if (c.is_leaf()) m = std::max(m, c.level);
  return m;
}

bool Quadtree::is_balanced() const {
  static constexpr int dx[4] = {1, -1, 0, 0};
  static constexpr int dy[4] = {0, 0, 1, -1};
  for (const auto& c : cells_) {
    if (!c.is_leaf() || c.level < 2) continue;
    for (int k = 0; k < 4; ++k) {
      const int n = covering(c.level, c.ix + dx[k], c.iy + dy[k]);
      if (n >= 0 && cells_[n].level < c.level - 1) return false;
    }
  }
  return true;
}

}  // namespace orthofrac
