#pragma once

#include <map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "orthofrac/elements.hpp"
#include "orthofrac/material.hpp"
#include "orthofrac/mesh.hpp"
#include "orthofrac/phasefield.hpp"
#include "orthofrac/state.hpp"

namespace orthofrac {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Constitutive description of the graded solid.
struct MaterialModel {
  OrthotropicBase base;
  GradationSpec gradation;
  RotationConvention rotation = RotationConvention::printed;
  EffectiveLame lame = EffectiveLame::longitudinal;
};

/// Material data frozen at one quadrature point.
struct PointMaterial {
  Mat3 D;
  double Gc = 0.0;
  LameConstants lame;
};

/// Shape functions and material data at every quadrature point of a mesh.
class Discretization {
 public:
  static constexpr int kDefaultOrder = 2;

  Discretization(const QuadtreeMesh& mesh, const MaterialModel& material,
                 int order = kDefaultOrder);

  const QuadtreeMesh& mesh() const { return *mesh_; }
  int num_qp() const { return offset_.back(); }
  /// First quadrature point of element e; first_qp(num_elements) == num_qp.
  int first_qp(int e) const { return offset_[e]; }
  const std::vector<ShapeEvaluation>& shapes(int e) const { return shapes_[e]; }
  const PointMaterial& material(int q) const { return points_[q]; }
  int order() const { return order_; }

 private:
  const QuadtreeMesh* mesh_;
  int order_;
  std::vector<std::vector<ShapeEvaluation>> shapes_;
  std::vector<int> offset_;
  std::vector<PointMaterial> points_;
};

enum class BoundaryEdge { left, right, bottom, top };

/// Prescribed displacement component on a whole domain edge. When `loaded`, the value is
/// multiplied by the current applied displacement.
struct DirichletCondition {
  BoundaryEdge edge = BoundaryEdge::bottom;
  int component = 0;
  double value = 0.0;
  bool loaded = false;
};

/// Traction (N/mm) on a domain edge.
struct NeumannCondition {
  BoundaryEdge edge = BoundaryEdge::top;
  Vec2 traction = Vec2::Zero();
};

struct BoundaryConditions {
  std::vector<DirichletCondition> dirichlet;
  std::vector<NeumannCondition> neumann;

  /// Throws ConfigError when an edge component is both prescribed and loaded by tractions.
  void validate() const;
};

struct LoadSchedule {
  double increment = 1e-4;
  int steps = 100;
  double staggered_tolerance = 1e-4;
  int max_staggered_iterations = 200;
  int max_cutbacks = 2;
  /// Stop once the reaction drops below this fraction of its peak (0 disables).
  double stop_force_fraction = 0.0;
  /// Stop once damage reaches this distance from the notch tip, mm (0 disables).
  double stop_crack_extension = 0.0;

  void validate() const;
};

/// Dirichlet data by global dof.
struct DirichletSet {
  std::map<int, double> values;
};

std::vector<int> edge_nodes(const QuadtreeMesh& mesh, BoundaryEdge edge);

DirichletSet dirichlet_dofs(const QuadtreeMesh& mesh, const BoundaryConditions& bcs,
                            double applied);

/// Dofs carrying a loaded Dirichlet condition, used for the reaction force.
std::vector<int> loaded_dofs(const QuadtreeMesh& mesh, const BoundaryConditions& bcs);

struct LinearSystem {
  SparseMatrix K;
  Eigen::VectorXd f;
};

/// K_uu = sum int g(phi) B^T D B, f_uu from tractions.
LinearSystem assemble_elasticity(const Discretization& disc, const Eigen::VectorXd& phi,
                                 const PhaseFieldParams& params,
                                 const std::vector<NeumannCondition>& tractions = {});

/// K_phi = sum int Bphi^T Gc l0 A Bphi + N^T (Gc / l0 + 2H) N, f_phi = sum int N^T 2H.
LinearSystem assemble_phasefield(const Discretization& disc, const std::vector<double>& H,
                                 const PhaseFieldParams& params, double theta);

/// Sparse symmetric factorization, reusing the symbolic analysis while the pattern is unchanged.
class SpdSolver {
 public:
  void factorize(const SparseMatrix& K);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  std::vector<int> outer_;
  std::vector<int> inner_;
  bool analyzed_ = false;
};

/// System with prescribed dofs eliminated; keeps what is needed to recover reactions.
class ConstrainedSystem {
 public:
  ConstrainedSystem(LinearSystem system, const DirichletSet& bcs);

  /// Full solution vector, prescribed dofs included.
  Eigen::VectorXd solve(SpdSolver& solver) const;
  /// K u - f on every dof (nonzero only at constrained dofs for a solved system).
  Eigen::VectorXd residual(const Eigen::VectorXd& u) const;

  const SparseMatrix& reduced_matrix() const { return K_ff_; }
  const Eigen::VectorXd& reduced_rhs() const { return f_red_; }
  const std::vector<int>& free_dofs() const { return free_; }

 private:
  LinearSystem full_;
  std::vector<int> free_;
  Eigen::VectorXd prescribed_;  ///< full-size, zero on free dofs
  SparseMatrix K_ff_;
  Eigen::VectorXd f_red_;
};

/// Throws SolverError when a prescribed dof does not exist.
ConstrainedSystem apply_dirichlet(LinearSystem system, const DirichletSet& bcs);

/// Sum of reactions over the given dofs.
double reaction_force(const ConstrainedSystem& system, const Eigen::VectorXd& u,
                      const std::vector<int>& dofs);

/// Wall time per stage, seconds.
struct StageTimings {
  double error_indicator = 0.0;
  double remeshing = 0.0;
  double assemble_phi = 0.0;
  double solve_phi = 0.0;
  double assemble_u = 0.0;
  double solve_u = 0.0;

  double total() const {
    return error_indicator + remeshing + assemble_phi + solve_phi + assemble_u + solve_u;
  }
  StageTimings& operator+=(const StageTimings& o);
};

struct StaggeredResult {
  SolutionState state;
  int iterations = 0;
  bool converged = false;
  double phi_change = 0.0;  ///< last max |phi_new - phi_old|
  double reaction = 0.0;
  StageTimings timings;
};

struct StaggeredOptions {
  double tolerance = 1e-4;
  int max_iterations = 200;
};

/// Alternates displacement and phase-field solves at a fixed load until the phase field
/// stops changing. H is updated as a running maximum across iterations.
StaggeredResult staggered_step(const SolutionState& start, const Discretization& disc,
                               const MaterialModel& material, const PhaseFieldParams& params,
                               const BoundaryConditions& bcs, double applied,
                               const StaggeredOptions& options);

/// Tensile/compressive energies at every quadrature point for a displacement field.
void energy_split_at_qps(const Discretization& disc, const Eigen::VectorXd& u,
                         std::vector<double>& psi_plus, std::vector<double>& psi_minus);

/// Phase field interpolated at every quadrature point.
std::vector<double> phase_at_qps(const Discretization& disc, const Eigen::VectorXd& phi);

}  // namespace orthofrac
