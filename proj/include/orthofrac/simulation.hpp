#pragma once

#include <functional>
#include <vector>

#include "orthofrac/mesh.hpp"
#include "orthofrac/recovery.hpp"
#include "orthofrac/solver.hpp"

namespace orthofrac {

struct MeshSettings {
  int base_level = 4;
  int max_depth = 8;              ///< no leaf is split beyond this level
  double error_tolerance = 1e-5;  ///< per-element recovery error that triggers a split
  int max_passes = 5;             ///< refinement passes per load step
  int quadrature_order = 2;
  /// When false the error indicator is skipped and the initial mesh is kept.
  bool adaptive = true;
  MlsConfig mls;

  void validate() const;
};

/// Everything needed to run the staggered, adaptively refined load stepping.
struct SimulationSetup {
  Domain domain;
  std::vector<Vec2> notch;
  MaterialModel material;
  PhaseFieldParams params;
  BoundaryConditions bcs;
  LoadSchedule schedule;
  MeshSettings mesh;
  int threads = 1;

  /// Finest admissible element size, root size / 2^max_depth.
  double finest_size() const;
  void validate() const;
};

struct StepRecord {
  int step = 0;
  double applied = 0.0;       ///< mm
  double reaction = 0.0;      ///< N
  int dofs = 0;               ///< displacement dofs
  int staggered_iterations = 0;
  double wall_time = 0.0;     ///< s
  bool converged = true;
  int elements = 0;
  int refinement_passes = 0;
  double global_error = 0.0;
  double crack_extension = 0.0;  ///< farthest fully damaged point from the notch tip, mm
};

/// Snapshot handed to observers after each accepted step (step 0 is the initial mesh).
struct StepView {
  const QuadtreeMesh& mesh;
  const SolutionState& state;
  const ErrorMap& errors;
  const StepRecord& record;
};

/// Returning false ends the run after the current step.
using StepObserver = std::function<bool(const StepView&)>;

struct SimulationResult {
  std::vector<StepRecord> steps;
  QuadtreeMesh mesh;
  SolutionState state;
  CrackGeometry crack;
  ErrorMap errors;
  StageTimings timings;
};

SimulationResult run_simulation(const SimulationSetup& setup, const StepObserver& observer = {});

/// Direction of the damage band leaving the notch tip, degrees from the x axis.
///
/// Fits a line through `tip` (area weighted) to the quadrature points with phi > threshold whose
/// distance from `tip` lies in [r_min, r_max], keeping only damage connected to the tip.
/// Returns the direction in degrees, or NaN when fewer than 3 points qualify.
double damage_band_angle(const Discretization& disc, const Eigen::VectorXd& phi, const Vec2& tip,
                         double r_min, double r_max, double threshold = 0.95);

/// Largest distance from `tip` of a quadrature point with phi > threshold in the damage
/// connected to the tip (0 if none).
double damage_extent(const Discretization& disc, const Eigen::VectorXd& phi, const Vec2& tip,
                     double threshold = 0.95);

/// Uniform-versus-adaptive comparison at matching crack-tip resolution.
///
/// The adaptive run is stepped until its refinement loop first settles with leaves at
/// mesh.max_depth; the uniform run uses a mesh at mesh.max_depth everywhere for the same
/// number of load steps.
struct BenchReport {
  int steps = 0;
  double applied = 0.0;
  int level = 0;  ///< resolution level of both runs
  int adaptive_dofs = 0;
  int uniform_dofs = 0;
  int adaptive_elements = 0;
  int uniform_elements = 0;
  double adaptive_time = 0.0;
  double uniform_time = 0.0;
  double adaptive_reaction = 0.0;
  double uniform_reaction = 0.0;
  StageTimings adaptive_stages;
  StageTimings uniform_stages;
};

BenchReport run_bench(const SimulationSetup& setup);

}  // namespace orthofrac
