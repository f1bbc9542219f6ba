#include "orthofrac/mesh.hpp"

#include <cmath>
#include <map>
#include <tuple>

namespace orthofrac {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Topology {
  std::vector<Vec2> nodes;
  std::vector<int> side;
  std::vector<MeshElement> elements;
};

/// Side of the notch a node copy belongs to, seen from a cell center; 0 if the node is not on
/// the cut part of the notch.
int notch_side(const std::vector<Vec2>& notch, const Vec2& p, const Vec2& cell_center,
               double tol) {
  if (notch.size() < 2) return 0;
  if ((p - notch.back()).norm() <= tol) return 0;  // tip is shared
  int best_side = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < notch.size(); ++k) {
    const Vec2& a = notch[k];
    const Vec2& b = notch[k + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = (p - a).dot(ab) / len2;
    if (t < -1e-12 || t > 1.0 + 1e-12) continue;
    if ((a + t * ab - p).norm() > tol) continue;
    const double tc = std::clamp((cell_center - a).dot(ab) / len2, 0.0, 1.0);
    const double dist = (a + tc * ab - cell_center).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best_side = cross(ab, cell_center - a) > 0.0 ? 1 : -1;
    }
  }
  return best_side;
}

Topology build_topology(const Quadtree& tree, const std::vector<Vec2>& notch) {
  constexpr int K = Quadtree::kMaxLevel;
  Topology topo;
  std::map<std::tuple<std::int64_t, std::int64_t, int>, int> ids;
  const double tol = 1e-9 * tree.root_size();

  auto node_id = [&](std::int64_t X, std::int64_t Y, const Vec2& center) {
    const double h = tree.cell_size(K);
    const Vec2 p = tree.origin() + Vec2(static_cast<double>(X) * h, static_cast<double>(Y) * h);
    const int side = notch_side(notch, p, center, tol);
    auto [it, inserted] = ids.try_emplace({X, Y, side}, static_cast<int>(topo.nodes.size()));
    if (inserted) {
      topo.nodes.push_back(p);
      topo.side.push_back(side);
    }
    return it->second;
  };

  for (int id : tree.leaves()) {
    const QuadtreeCell& c = tree.cell(id);
    const int l = c.level;
    const std::int64_t s = std::int64_t{1} << (K - l);
    const std::int64_t X0 = c.ix * s;
    const std::int64_t Y0 = c.iy * s;
    const Vec2 center = tree.bounds(id).center();

    // Hanging node on an edge when the same-level neighbour across it is split; a split
    // child touching the edge would mean a level jump of two.
    auto hanging = [&](std::int64_t nx, std::int64_t ny, int child_a, int child_b) {
      const int n = tree.find(l, nx, ny);
      if (n < 0 || tree.cell(n).is_leaf()) return false;
      const int first = tree.cell(n).first_child;
      if (!tree.cell(first + child_a).is_leaf() || !tree.cell(first + child_b).is_leaf()) {
        throw MeshError("extract_elements: quadtree is not 2:1 balanced");
      }
      return true;
    };

    MeshElement e;
    e.cell = id;
    e.nodes.push_back(node_id(X0, Y0, center));
    if (hanging(c.ix, c.iy - 1, 2, 3)) e.nodes.push_back(node_id(X0 + s / 2, Y0, center));
    e.nodes.push_back(node_id(X0 + s, Y0, center));
    if (hanging(c.ix + 1, c.iy, 0, 2)) e.nodes.push_back(node_id(X0 + s, Y0 + s / 2, center));
    e.nodes.push_back(node_id(X0 + s, Y0 + s, center));
    if (hanging(c.ix, c.iy + 1, 0, 1)) e.nodes.push_back(node_id(X0 + s / 2, Y0 + s, center));
    e.nodes.push_back(node_id(X0, Y0 + s, center));
    if (hanging(c.ix - 1, c.iy, 1, 3)) e.nodes.push_back(node_id(X0, Y0 + s / 2, center));
    e.kind = e.nodes.size() == 4 ? ElementKind::quad : ElementKind::polygon;
    topo.elements.push_back(std::move(e));
  }
  return topo;
}

void validate_notch(const Domain& d, double h_base, const std::vector<Vec2>& notch) {
  if (notch.empty()) return;
  if (notch.size() < 2) throw MeshError("notch: at least two vertices required");
  const double tol = 1e-9 * d.scale();
  auto on_grid = [&](double v, double o) {
    const double r = (v - o) / h_base;
    return std::abs(r - std::round(r)) * h_base <= tol;
  };
  for (const Vec2& v : notch) {
    if (v.x() < d.origin.x() - tol || v.x() > d.origin.x() + d.width + tol ||
        v.y() < d.origin.y() - tol || v.y() > d.origin.y() + d.height + tol) {
      throw MeshError("notch: vertex outside the domain");
    }
    if (!on_grid(v.x(), d.origin.x()) || !on_grid(v.y(), d.origin.y())) {
      throw MeshError("notch: vertices must lie on base-level grid lines");
    }
  }
  for (std::size_t k = 0; k + 1 < notch.size(); ++k) {
    const Vec2 ab = notch[k + 1] - notch[k];
    if (ab.norm() <= tol) throw MeshError("notch: degenerate segment");
    if (std::abs(ab.x()) > tol && std::abs(ab.y()) > tol) {
      throw MeshError("notch: segments must be axis-aligned");
    }
  }
  const Vec2& m = notch.front();
  const bool on_boundary = std::abs(m.x() - d.origin.x()) <= tol ||
                           std::abs(m.x() - d.origin.x() - d.width) <= tol ||
                           std::abs(m.y() - d.origin.y()) <= tol ||
                           std::abs(m.y() - d.origin.y() - d.height) <= tol;
  if (!on_boundary) throw MeshError("notch: first vertex must lie on the domain boundary");
}

}  // namespace

int QuadtreeMesh::element_of_cell(int cell) const {
  if (cell < 0 || cell >= static_cast<int>(cell_element_.size())) return -1;
  return cell_element_[cell];
}

std::vector<Vec2> QuadtreeMesh::element_vertices(int e) const {
  const MeshElement& el = elements_.at(e);
  std::vector<Vec2> v;
  v.reserve(el.nodes.size());
  for (int n : el.nodes) v.push_back(nodes_[n]);
  return v;
}

double QuadtreeMesh::element_size(int e) const {
  return tree_.cell_size(tree_.cell(elements_.at(e).cell).level);
}

void QuadtreeMesh::regenerate() {
  Topology topo = build_topology(tree_, notch_);
  nodes_ = std::move(topo.nodes);
  node_side_ = std::move(topo.side);
  elements_ = std::move(topo.elements);
  cell_element_.assign(tree_.size(), -1);
  for (int e = 0; e < static_cast<int>(elements_.size()); ++e) cell_element_[elements_[e].cell] = e;
  elements_valid_ = true;
}

QuadtreeMesh build_initial(const Domain& domain, int base_level, const std::vector<Vec2>& notch) {
  if (!(domain.width > 0.0) || !(domain.height > 0.0)) {
    throw MeshError("domain dimensions must be positive");
  }
  if (base_level < 0 || base_level > 16) throw MeshError("base_level must lie in [0, 16]");
  const double root = std::min(domain.width, domain.height);
  const double rx = domain.width / root;
  const double ry = domain.height / root;
  if (std::abs(rx - std::round(rx)) > 1e-9 * rx || std::abs(ry - std::round(ry)) > 1e-9 * ry) {
    throw MeshError("domain aspect ratio must be an integer");
  }
  QuadtreeMesh mesh;
  mesh.domain_ = domain;
  mesh.base_level_ = base_level;
  mesh.tree_ = Quadtree(domain.origin, root, static_cast<int>(std::round(rx)),
                        static_cast<int>(std::round(ry)));
  validate_notch(domain, mesh.tree_.cell_size(base_level), notch);
  mesh.notch_ = notch;
  for (int l = 0; l < base_level; ++l) {
    for (int id : mesh.tree_.leaves()) mesh.tree_.split(id);
  }
  mesh.regenerate();
  return mesh;
}

QuadtreeMesh refine(const QuadtreeMesh& mesh, const std::set<int>& cells) {
  QuadtreeMesh out = mesh;
  if (cells.empty()) return out;
  for (int id : cells) {
    if (id < 0 || id >= out.tree_.size()) throw MeshError("refine: unknown cell " + std::to_string(id));
    out.tree_.split(id);
  }
  if (out.tree_.is_balanced()) {
    out.regenerate();
  } else {
    out.nodes_.clear();
    out.node_side_.clear();
    out.elements_.clear();
    out.cell_element_.clear();
    out.elements_valid_ = false;
  }
  return out;
}

QuadtreeMesh balance_2to1(const QuadtreeMesh& mesh) {
  static constexpr int dx[4] = {1, -1, 0, 0};
  static constexpr int dy[4] = {0, 0, 1, -1};
  QuadtreeMesh out = mesh;
  Quadtree& tree = out.tree_;
  bool changed = true;
  bool any = false;
  while (changed) {
    changed = false;
    for (int id : tree.leaves()) {
      const QuadtreeCell c = tree.cell(id);
      if (c.level < 2) continue;
      for (int k = 0; k < 4; ++k) {
        const int n = tree.covering(c.level, c.ix + dx[k], c.iy + dy[k]);
        if (n >= 0 && tree.cell(n).is_leaf() && tree.cell(n).level < c.level - 1) {
          tree.split(n);
          changed = any = true;
        }
      }
    }
  }
  if (any || !out.elements_valid_) out.regenerate();
  return out;
}

std::vector<MeshElement> extract_elements(const QuadtreeMesh& mesh) {
  return build_topology(mesh.tree(), mesh.notch()).elements;
}

std::set<int> flag_by_error(const QuadtreeMesh& mesh, const ErrorMap& errors, double tol) {
  std::set<int> out;
  const int n = std::min<int>(mesh.num_elements(), static_cast<int>(errors.element.size()));
  for (int e = 0; e < n; ++e) {
    if (errors.element[e] > tol) out.insert(mesh.elements()[e].cell);
  }
  return out;
}

}  // namespace orthofrac
