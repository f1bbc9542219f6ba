#pragma once

#include <set>
#include <vector>

#include "orthofrac/elements.hpp"
#include "orthofrac/quadtree.hpp"
#include "orthofrac/types.hpp"

namespace orthofrac {

struct MeshElement {
  std::vector<int> nodes;  ///< counter-clockwise
  int cell = -1;           ///< quadtree leaf
  ElementKind kind = ElementKind::quad;
};

/// Quadtree plus the conforming element list derived from its leaves.
///
/// An optional notch polyline (axis-aligned segments on base-level grid lines,
/// starting on the boundary) is cut into the mesh: every node on it except the
/// last vertex (the tip) is duplicated, one copy per side.
class QuadtreeMesh {
 public:
  QuadtreeMesh() = default;

  const Domain& domain() const { return domain_; }
  const Quadtree& tree() const { return tree_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<MeshElement>& elements() const { return elements_; }
  const std::vector<Vec2>& notch() const { return notch_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int base_level() const { return base_level_; }

  /// +1 / -1 for the two copies of a notch node, 0 elsewhere.
  int node_side(int node) const { return node_side_.at(node); }

  /// Element index of a leaf cell, or -1.
  int element_of_cell(int cell) const;

  std::vector<Vec2> element_vertices(int e) const;
  double element_size(int e) const;

  /// False after an unbalancing refinement; the element list is then empty.
  bool has_elements() const { return elements_valid_; }

  friend QuadtreeMesh build_initial(const Domain& domain, int base_level,
                                    const std::vector<Vec2>& notch);
  friend QuadtreeMesh refine(const QuadtreeMesh& mesh, const std::set<int>& cells);
  friend QuadtreeMesh balance_2to1(const QuadtreeMesh& mesh);

 private:
  void regenerate();

  Domain domain_;
  int base_level_ = 0;
  Quadtree tree_;
  std::vector<Vec2> notch_;
  std::vector<Vec2> nodes_;
  std::vector<int> node_side_;
  std::vector<MeshElement> elements_;
  std::vector<int> cell_element_;
  bool elements_valid_ = false;
};

/// Uniform quadtree at `base_level`. Roots are squares of side min(width, height); the
/// aspect ratio must be an integer. Throws MeshError for invalid domains or notches.
QuadtreeMesh build_initial(const Domain& domain, int base_level,
                           const std::vector<Vec2>& notch = {});

/// Splits each listed leaf once. Elements are regenerated when the result is balanced.
QuadtreeMesh refine(const QuadtreeMesh& mesh, const std::set<int>& cells);

/// Splits coarse leaves until edge-adjacent leaves differ by at most one level.
QuadtreeMesh balance_2to1(const QuadtreeMesh& mesh);

/// One element per leaf; leaves with hanging mid-edge nodes become polygons.
/// Throws MeshError on unbalanced trees.
std::vector<MeshElement> extract_elements(const QuadtreeMesh& mesh);

/// Per-element recovery error norms.
struct ErrorMap {
  std::vector<double> element;
  double global = 0.0;
};

/// Leaves whose element error exceeds tol.
std::set<int> flag_by_error(const QuadtreeMesh& mesh, const ErrorMap& errors, double tol);

}  // namespace orthofrac
