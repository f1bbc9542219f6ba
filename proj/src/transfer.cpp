#include "orthofrac/transfer.hpp"

#include <algorithm>

namespace orthofrac {

namespace {

bool same_topology(const QuadtreeMesh& a, const QuadtreeMesh& b) {
  if (a.num_nodes() != b.num_nodes() || a.num_elements() != b.num_elements()) return false;
  for (int e = 0; e < a.num_elements(); ++e) {
    if (a.elements()[e].nodes != b.elements()[e].nodes || a.elements()[e].cell != b.elements()[e].cell)
      return false;
  }
  for (int n = 0; n < a.num_nodes(); ++n) {
    if (a.nodes()[n] != b.nodes()[n]) return false;
  }
  return true;
}

/// Old leaf that contains new leaf `cell` (cell ids are preserved by refinement).
int old_ancestor(const QuadtreeMesh& old_mesh, const QuadtreeMesh& new_mesh, int cell) {
  int c = cell;
  while (c >= 0) {
    if (c < old_mesh.tree().size() && old_mesh.tree().cell(c).is_leaf()) return c;
    c = new_mesh.tree().cell(c).parent;
  }
  throw MeshError("transfer: new cell is not inside the old mesh");
}

}  // namespace

MeshTransfer::MeshTransfer(const QuadtreeMesh& old_mesh, const QuadtreeMesh& new_mesh, int order)
    : old_(old_mesh), new_(new_mesh) {
  identical_ = same_topology(old_mesh, new_mesh);
  if (identical_) return;
  if (!new_mesh.has_elements() || !old_mesh.has_elements()) {
    throw MeshError("transfer: both meshes need element lists");
  }

  // old quadrature data for the lumped projection
  std::vector<int> old_offset(old_mesh.num_elements() + 1, 0);
  for (int e = 0; e < old_mesh.num_elements(); ++e) {
    const auto shapes = element_shapes(old_mesh.element_vertices(e), old_mesh.elements()[e].kind, order);
    old_offset[e + 1] = old_offset[e] + static_cast<int>(shapes.size());
    for (const auto& s : shapes) {
      old_qp_N_.emplace_back(s.N.data(), s.N.data() + s.N.size());
      old_qp_w_.push_back(s.weight);
      old_qp_element_.push_back(e);
    }
  }

  node_stencil_.assign(new_mesh.num_nodes(), {});
  std::vector<char> done(new_mesh.num_nodes(), 0);
  for (int e = 0; e < new_mesh.num_elements(); ++e) {
    const MeshElement& el = new_mesh.elements()[e];
    const int old_cell = old_ancestor(old_mesh, new_mesh, el.cell);
    const int eo = old_mesh.element_of_cell(old_cell);
    const MeshElement& oel = old_mesh.elements()[eo];
    const std::vector<Vec2> overts = old_mesh.element_vertices(eo);

    for (int n : el.nodes) {
      if (done[n]) continue;
      done[n] = 1;
      Stencil& st = node_stencil_[n];
      Eigen::VectorXd N;
      try {
        N = element_values_at(overts, oel.kind, new_mesh.nodes()[n]);
      } catch (const GeometryError&) {
        throw MeshError("transfer: node could not be located in the old mesh");
      }
      for (int k = 0; k < N.size(); ++k) {
        if (N[k] != 0.0) {
          st.nodes.push_back(oel.nodes[k]);
          st.weights.push_back(N[k]);
        }
      }
    }

    const auto shapes = element_shapes(new_mesh.element_vertices(e), el.kind, order);
    const bool unchanged = old_cell == el.cell && oel.nodes.size() == el.nodes.size();
    for (std::size_t q = 0; q < shapes.size(); ++q) {
      if (unchanged) {
        qp_copy_.push_back(old_offset[eo] + static_cast<int>(q));
        qp_stencil_.push_back({});
        continue;
      }
      qp_copy_.push_back(-1);
      const Eigen::VectorXd N = element_values_at(overts, oel.kind, shapes[q].x);
      Stencil st;
      for (int k = 0; k < N.size(); ++k) {
        st.nodes.push_back(oel.nodes[k]);
        st.weights.push_back(N[k]);
      }
      qp_stencil_.push_back(std::move(st));
    }
  }
}

double MeshTransfer::apply(const Stencil& s, const Eigen::VectorXd& v, int stride, int comp) const {
  double out = 0.0;
  for (std::size_t k = 0; k < s.nodes.size(); ++k) out += s.weights[k] * v[stride * s.nodes[k] + comp];
  return out;
}

Eigen::VectorXd MeshTransfer::scalar(const Eigen::VectorXd& old_values) const {
  if (identical_) return old_values;
  Eigen::VectorXd out(new_.num_nodes());
  for (int n = 0; n < new_.num_nodes(); ++n) out[n] = apply(node_stencil_[n], old_values, 1, 0);
  return out;
}

Eigen::VectorXd MeshTransfer::vector(const Eigen::VectorXd& old_values) const {
  if (identical_) return old_values;
  Eigen::VectorXd out(2 * new_.num_nodes());
  for (int n = 0; n < new_.num_nodes(); ++n) {
    out[2 * n] = apply(node_stencil_[n], old_values, 2, 0);
    out[2 * n + 1] = apply(node_stencil_[n], old_values, 2, 1);
  }
  return out;
}

std::vector<double> MeshTransfer::history(const std::vector<double>& old_H) const {
  if (identical_) return old_H;
  if (old_H.size() != old_qp_w_.size()) {
    throw MeshError("transfer: history field does not match the old quadrature layout");
  }
  // lumped L2 projection onto the old nodes
  Eigen::VectorXd num = Eigen::VectorXd::Zero(old_.num_nodes());
  Eigen::VectorXd den = Eigen::VectorXd::Zero(old_.num_nodes());
  for (std::size_t q = 0; q < old_H.size(); ++q) {
    const auto& nodes = old_.elements()[old_qp_element_[q]].nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double nw = old_qp_N_[q][k] * old_qp_w_[q];
      num[nodes[k]] += nw * old_H[q];
      den[nodes[k]] += nw;
    }
  }
  Eigen::VectorXd nodal = Eigen::VectorXd::Zero(old_.num_nodes());
  for (int n = 0; n < old_.num_nodes(); ++n)
    if (den[n] > 0.0) nodal[n] = num[n] / den[n];

  std::vector<double> out(qp_copy_.size());
  for (std::size_t q = 0; q < qp_copy_.size(); ++q) {
    out[q] = qp_copy_[q] >= 0 ? old_H[qp_copy_[q]]
                              : std::max(0.0, apply(qp_stencil_[q], nodal, 1, 0));
  }
  return out;
}

SolutionState transfer_state(const QuadtreeMesh& old_mesh, const SolutionState& old_state,
                             const QuadtreeMesh& new_mesh, int order) {
  const MeshTransfer t(old_mesh, new_mesh, order);
  SolutionState s;
  s.u = t.vector(old_state.u);
  s.phi = t.scalar(old_state.phi);
  s.H = t.history(old_state.H);
  return s;
}

}  // namespace orthofrac
