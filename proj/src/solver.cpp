#include "orthofrac/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <spdlog/spdlog.h>

namespace orthofrac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  error_indicator += o.error_indicator;
  remeshing += o.remeshing;
  assemble_phi += o.assemble_phi;
  solve_phi += o.solve_phi;
  assemble_u += o.assemble_u;
  solve_u += o.solve_u;
  return *this;
}

void SpdSolver::factorize(const SparseMatrix& K) {
  const bool same = analyzed_ && outer_.size() == static_cast<std::size_t>(K.outerSize() + 1) &&
                    inner_.size() == static_cast<std::size_t>(K.nonZeros()) &&
                    std::equal(outer_.begin(), outer_.end(), K.outerIndexPtr()) &&
                    std::equal(inner_.begin(), inner_.end(), K.innerIndexPtr());
  if (!same) {
    ldlt_.analyzePattern(K);
    outer_.assign(K.outerIndexPtr(), K.outerIndexPtr() + K.outerSize() + 1);
    inner_.assign(K.innerIndexPtr(), K.innerIndexPtr() + K.nonZeros());
    analyzed_ = true;
  }
  ldlt_.factorize(K);
  if (ldlt_.info() != Eigen::Success) throw SolverError("sparse factorization failed");
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = ldlt_.solve(b);
  if (ldlt_.info() != Eigen::Success) throw SolverError("sparse solve failed");
  return x;
}

ConstrainedSystem::ConstrainedSystem(LinearSystem system, const DirichletSet& bcs)
    : full_(std::move(system)) {
  const int n = static_cast<int>(full_.K.rows());
  prescribed_ = Eigen::VectorXd::Zero(n);
  std::vector<int> map(n, -1);
  std::vector<char> fixed(n, 0);
  for (const auto& [dof, value] : bcs.values) {
    if (dof < 0 || dof >= n) {
      throw SolverError("Dirichlet condition on unknown dof " + std::to_string(dof));
    }
    fixed[dof] = 1;
    prescribed_[dof] = value;
  }
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) {
      map[i] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  const Eigen::VectorXd lifted = full_.f - full_.K * prescribed_;
  f_red_.resize(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) f_red_[k] = lifted[free_[k]];

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(full_.K.nonZeros());
  for (int j = 0; j < full_.K.outerSize(); ++j) {
    if (map[j] < 0) continue;
    for (SparseMatrix::InnerIterator it(full_.K, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (map[i] >= 0) trip.emplace_back(map[i], map[j], it.value());
    }
  }
  K_ff_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
  K_ff_.setFromTriplets(trip.begin(), trip.end());
}

Eigen::VectorXd ConstrainedSystem::solve(SpdSolver& solver) const {
  Eigen::VectorXd u = prescribed_;
  if (free_.empty()) return u;
  solver.factorize(K_ff_);
  const Eigen::VectorXd x = solver.solve(f_red_);
  for (std::size_t k = 0; k < free_.size(); ++k) u[free_[k]] = x[k];
  return u;
}

Eigen::VectorXd ConstrainedSystem::residual(const Eigen::VectorXd& u) const {
  return full_.K * u - full_.f;
}

ConstrainedSystem apply_dirichlet(LinearSystem system, const DirichletSet& bcs) {
  return ConstrainedSystem(std::move(system), bcs);
}

double reaction_force(const ConstrainedSystem& system, const Eigen::VectorXd& u,
                      const std::vector<int>& dofs) {
  const Eigen::VectorXd r = system.residual(u);
  double sum = 0.0;
  for (int d : dofs) sum += r[d];
  return sum;
}

StaggeredResult staggered_step(const SolutionState& start, const Discretization& disc,
                               const MaterialModel& material, const PhaseFieldParams& params,
                               const BoundaryConditions& bcs, double applied,
                               const StaggeredOptions& options) {
  const QuadtreeMesh& mesh = disc.mesh();
  StaggeredResult result;
  result.state = start;
  SolutionState& state = result.state;
  if (static_cast<int>(state.H.size()) != disc.num_qp()) {
    throw SolverError("staggered_step: history field does not match the quadrature layout");
  }
  const DirichletSet dirichlet = dirichlet_dofs(mesh, bcs, applied);
  const std::vector<int> loaded = loaded_dofs(mesh, bcs);

  // nodes -> adjacent elements, for the hybrid constraint
  std::vector<std::vector<int>> node_elements(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int n : mesh.elements()[e].nodes) node_elements[n].push_back(e);

  std::vector<char> released(mesh.num_nodes(), 0);
  SpdSolver u_solver;
  SpdSolver phi_solver;
  std::vector<double> psi_plus, psi_minus;
  for (int it = 1; it <= options.max_iterations; ++it) {
    auto t0 = Clock::now();
    ConstrainedSystem elastic =
        apply_dirichlet(assemble_elasticity(disc, state.phi, params, bcs.neumann), dirichlet);
    result.timings.assemble_u += seconds_since(t0);
    t0 = Clock::now();
    state.u = elastic.solve(u_solver);
    result.timings.solve_u += seconds_since(t0);
    result.reaction = reaction_force(elastic, state.u, loaded);

    energy_split_at_qps(disc, state.u, psi_plus, psi_minus);
    for (int q = 0; q < disc.num_qp(); ++q) state.H[q] = update_history(state.H[q], psi_plus[q]);

    t0 = Clock::now();
    const LinearSystem phase = assemble_phasefield(disc, state.H, params, material.base.theta);
    result.timings.assemble_phi += seconds_since(t0);
    t0 = Clock::now();
    phi_solver.factorize(phase.K);
    Eigen::VectorXd phi = phi_solver.solve(phase.f);
    result.timings.solve_phi += seconds_since(t0);

    std::vector<char> compressive(mesh.num_elements(), 1);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      for (int q = disc.first_qp(e); q < disc.first_qp(e + 1); ++q) {
        if (hybrid_constraint(psi_plus[q], psi_minus[q], 1.0) != 0.0) {
          compressive[e] = 0;
          break;
        }
      }
    }
    // A node released once stays released for the rest of the step; re-evaluating it every
    // iteration can lock the loop into a two-cycle.
    int zeroed = 0;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      bool all = !node_elements[n].empty();
      for (int e : node_elements[n]) all = all && compressive[e];
      if (!all) released[n] = 1;
      if (!released[n]) {
        zeroed += phi[n] > 1e-3 ? 1 : 0;
        phi[n] = 0.0;
      }
      phi[n] = std::clamp(phi[n], 0.0, 1.0);
    }

    Eigen::Index worst = 0;
    result.phi_change = (phi - state.phi).cwiseAbs().maxCoeff(&worst);
    spdlog::trace("staggered {}: phi change {:.3e} at ({:.4f}, {:.4f}), {} damaged nodes zeroed, F = {:.6e}",
                  it, result.phi_change, mesh.nodes()[worst].x(), mesh.nodes()[worst].y(), zeroed,
                  result.reaction);
    state.phi = std::move(phi);
    result.iterations = it;
    if (result.phi_change < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace orthofrac
