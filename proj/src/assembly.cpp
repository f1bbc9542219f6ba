#include <algorithm>
#include <cmath>

#include "orthofrac/solver.hpp"

namespace orthofrac {

Discretization::Discretization(const QuadtreeMesh& mesh, const MaterialModel& material, int order)
    : mesh_(&mesh), order_(order) {
  const int ne = mesh.num_elements();
  shapes_.resize(ne);
  offset_.assign(ne + 1, 0);
  for (int e = 0; e < ne; ++e) {
    shapes_[e] = element_shapes(mesh.element_vertices(e), mesh.elements()[e].kind, order);
    offset_[e + 1] = offset_[e] + static_cast<int>(shapes_[e].size());
  }
  points_.reserve(offset_.back());
  for (int e = 0; e < ne; ++e) {
    for (const ShapeEvaluation& s : shapes_[e]) {
      const PointProperties p = evaluate_properties(material.base, material.gradation, s.x);
      PointMaterial pm;
      pm.D = constitutive_matrix(reduced_stiffness(p), material.base.theta, material.rotation);
      pm.Gc = p.Gc;
      pm.lame = effective_lame(p, material.lame);
      points_.push_back(pm);
    }
  }
}

void BoundaryConditions::validate() const {
  for (const auto& d : dirichlet) {
    if (d.component < 0 || d.component > 1) throw ConfigError("boundary: component must be x or y");
    for (const auto& n : neumann) {
      if (n.edge == d.edge && n.traction[d.component] != 0.0) {
        throw ConfigError("boundary: Dirichlet and Neumann conditions overlap on one edge component");
      }
    }
  }
}

void LoadSchedule::validate() const {
  if (!(increment > 0.0)) throw ConfigError("schedule.increment must be positive");
  if (steps < 0) throw ConfigError("schedule.steps must be non-negative");
  if (!(staggered_tolerance > 0.0)) throw ConfigError("schedule.staggered_tolerance must be positive");
  if (max_staggered_iterations < 1) throw ConfigError("schedule.max_staggered_iterations must be >= 1");
  if (max_cutbacks < 0) throw ConfigError("schedule.max_cutbacks must be non-negative");
  if (stop_force_fraction < 0.0 || stop_force_fraction >= 1.0) {
    throw ConfigError("schedule.stop_force_fraction must lie in [0, 1)");
  }
  if (stop_crack_extension < 0.0) throw ConfigError("schedule.stop_crack_extension must be non-negative");
}

std::vector<int> edge_nodes(const QuadtreeMesh& mesh, BoundaryEdge edge) {
  const Domain& d = mesh.domain();
  const double tol = 1e-9 * d.scale();
  std::vector<int> out;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const Vec2& p = mesh.nodes()[n];
    bool on = false;
    switch (edge) {
      case BoundaryEdge::left: on = std::abs(p.x() - d.origin.x()) <= tol; break;
      case BoundaryEdge::right: on = std::abs(p.x() - d.origin.x() - d.width) <= tol; break;
      case BoundaryEdge::bottom: on = std::abs(p.y() - d.origin.y()) <= tol; break;
      case BoundaryEdge::top: on = std::abs(p.y() - d.origin.y() - d.height) <= tol; break;
    }
    if (on) out.push_back(n);
  }
  return out;
}

DirichletSet dirichlet_dofs(const QuadtreeMesh& mesh, const BoundaryConditions& bcs,
                            double applied) {
  DirichletSet set;
  for (const auto& d : bcs.dirichlet) {
    const double v = d.loaded ? d.value * applied : d.value;
    for (int n : edge_nodes(mesh, d.edge)) set.values[2 * n + d.component] = v;
  }
  return set;
}

std::vector<int> loaded_dofs(const QuadtreeMesh& mesh, const BoundaryConditions& bcs) {
  std::vector<int> out;
  for (const auto& d : bcs.dirichlet) {
    if (!d.loaded) continue;
    for (int n : edge_nodes(mesh, d.edge)) out.push_back(2 * n + d.component);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> phase_at_qps(const Discretization& disc, const Eigen::VectorXd& phi) {
  const QuadtreeMesh& mesh = disc.mesh();
  std::vector<double> out(disc.num_qp(), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements()[e].nodes;
    int q = disc.first_qp(e);
    for (const ShapeEvaluation& s : disc.shapes(e)) {
      double v = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) v += s.N[k] * phi[nodes[k]];
      out[q++] = v;
    }
  }
  return out;
}

LinearSystem assemble_elasticity(const Discretization& disc, const Eigen::VectorXd& phi,
                                 const PhaseFieldParams& params,
                                 const std::vector<NeumannCondition>& tractions) {
  const QuadtreeMesh& mesh = disc.mesh();
  const int ndof = 2 * mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * 100);
  Eigen::MatrixXd Ke;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements()[e].nodes;
    const int nn = static_cast<int>(nodes.size());
    Ke.setZero(2 * nn, 2 * nn);
    int q = disc.first_qp(e);
    for (const ShapeEvaluation& s : disc.shapes(e)) {
      double ph = 0.0;
      for (int k = 0; k < nn; ++k) ph += s.N[k] * phi[nodes[k]];
      const double g = degradation(ph, params.k_p);
      const BMatrices b = b_matrices(s);
      Ke.noalias() += (g * s.weight) * (b.B.transpose() * disc.material(q).D * b.B);
      ++q;
    }
    for (int a = 0; a < 2 * nn; ++a) {
      const int ga = 2 * nodes[a / 2] + a % 2;
      for (int c = 0; c < 2 * nn; ++c) {
        trip.emplace_back(ga, 2 * nodes[c / 2] + c % 2, Ke(a, c));
      }
    }
  }
  LinearSystem sys;
  sys.K.resize(ndof, ndof);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.f = Eigen::VectorXd::Zero(ndof);

  if (!tractions.empty()) {
    for (const auto& t : tractions) {
      const std::vector<int> on_edge = edge_nodes(mesh, t.edge);
      std::vector<char> flag(mesh.num_nodes(), 0);
      for (int n : on_edge) flag[n] = 1;
      for (const auto& el : mesh.elements()) {
        const int nn = static_cast<int>(el.nodes.size());
        for (int k = 0; k < nn; ++k) {
          const int a = el.nodes[k];
          const int b = el.nodes[(k + 1) % nn];
          if (!flag[a] || !flag[b]) continue;
          const double len = (mesh.nodes()[b] - mesh.nodes()[a]).norm();
          for (int c = 0; c < 2; ++c) {
            sys.f[2 * a + c] += 0.5 * len * t.traction[c];
            sys.f[2 * b + c] += 0.5 * len * t.traction[c];
          }
        }
      }
    }
  }
  return sys;
}

LinearSystem assemble_phasefield(const Discretization& disc, const std::vector<double>& H,
                                 const PhaseFieldParams& params, double theta) {
  const QuadtreeMesh& mesh = disc.mesh();
  const int n = mesh.num_nodes();
  const Mat2 A = structural_tensor(params.structural_angle(theta), params.beta_penalty);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * 25);
  LinearSystem sys;
  sys.f = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Ke;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements()[e].nodes;
    const int nn = static_cast<int>(nodes.size());
    Ke.setZero(nn, nn);
    int q = disc.first_qp(e);
    for (const ShapeEvaluation& s : disc.shapes(e)) {
      const double Gc = disc.material(q).Gc;
      const double h = H[q];
      const Eigen::Matrix<double, 2, Eigen::Dynamic> grad = s.dN.transpose();
      Ke.noalias() += (s.weight * Gc * params.ell0) * (grad.transpose() * A * grad);
      Ke.noalias() += (s.weight * (Gc / params.ell0 + 2.0 * h)) * (s.N * s.N.transpose());
      for (int k = 0; k < nn; ++k) sys.f[nodes[k]] += s.weight * 2.0 * h * s.N[k];
      ++q;
    }
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < nn; ++c) trip.emplace_back(nodes[a], nodes[c], Ke(a, c));
  }
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

void energy_split_at_qps(const Discretization& disc, const Eigen::VectorXd& u,
                         std::vector<double>& psi_plus, std::vector<double>& psi_minus) {
  const QuadtreeMesh& mesh = disc.mesh();
  psi_plus.assign(disc.num_qp(), 0.0);
  psi_minus.assign(disc.num_qp(), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements()[e].nodes;
    int q = disc.first_qp(e);
    for (const ShapeEvaluation& s : disc.shapes(e)) {
      Mat2 grad = Mat2::Zero();
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Vec2 uk(u[2 * nodes[k]], u[2 * nodes[k] + 1]);
        grad += uk * s.dN.row(static_cast<Eigen::Index>(k));
      }
      const Mat2 eps = 0.5 * (grad + grad.transpose());
      const LameConstants& l = disc.material(q).lame;
      const EnergySplit split = spectral_split(eps, l.lambda, l.mu);
      psi_plus[q] = split.plus;
      psi_minus[q] = split.minus;
      ++q;
    }
  }
}

}  // namespace orthofrac
