#include "orthofrac/simulation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <spdlog/spdlog.h>

#include "orthofrac/transfer.hpp"

namespace orthofrac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kDamaged = 0.95;

/// Elements holding a quadrature point above `threshold` that are connected, through shared
/// nodes, to a damaged element within three element sizes of the notch tip. Damage nucleated
/// elsewhere (corners, supports) is left out.
std::vector<char> tip_cluster(const Discretization& disc, const std::vector<double>& pq,
                              const Vec2& tip, double threshold) {
  const QuadtreeMesh& mesh = disc.mesh();
  const int ne = mesh.num_elements();
  std::vector<char> damaged(ne, 0), in(ne, 0);
  std::vector<int> queue;
  for (int e = 0; e < ne; ++e) {
    double nearest = std::numeric_limits<double>::infinity();
    const auto& shapes = disc.shapes(e);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      if (pq[disc.first_qp(e) + k] > threshold) damaged[e] = 1;
      nearest = std::min(nearest, (shapes[k].x - tip).norm());
    }
    if (damaged[e] && nearest <= 3.0 * mesh.element_size(e)) {
      in[e] = 1;
      queue.push_back(e);
    }
  }
  std::vector<std::vector<int>> node_elements(mesh.num_nodes());
  for (int e = 0; e < ne; ++e)
    for (int n : mesh.elements()[e].nodes) node_elements[n].push_back(e);
  while (!queue.empty()) {
    const int e = queue.back();
    queue.pop_back();
    for (int n : mesh.elements()[e].nodes) {
      for (int f : node_elements[n]) {
        if (damaged[f] && !in[f]) {
          in[f] = 1;
          queue.push_back(f);
        }
      }
    }
  }
  return in;
}

int displacement_dofs(const QuadtreeMesh& mesh) { return 2 * mesh.num_nodes(); }

/// Leaves flagged by the indicator that may still be split.
std::set<int> admissible_flags(const QuadtreeMesh& mesh, const ErrorMap& errors,
                               const MeshSettings& settings) {
  std::set<int> out;
  for (int c : flag_by_error(mesh, errors, settings.error_tolerance)) {
    if (mesh.tree().cell(c).level < settings.max_depth) out.insert(c);
  }
  return out;
}

/// Extends the crack polyline with the newly damaged region of this step.
void grow_crack(CrackGeometry& crack, const Vec2& notch_tip, const Discretization& disc,
                const std::vector<double>& phi_now, const std::vector<double>& phi_before,
                double ell0) {
  Vec2 sum = Vec2::Zero();
  double area = 0.0;
  Vec2 far = notch_tip;
  double far_d = -1.0;
  const std::vector<char> cluster = tip_cluster(disc, phi_now, notch_tip, kDamaged);
  for (int e = 0; e < disc.mesh().num_elements(); ++e) {
    if (!cluster[e]) continue;
    const auto& shapes = disc.shapes(e);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const int q = disc.first_qp(e) + static_cast<int>(k);
      if (phi_now[q] <= kDamaged || phi_before[q] > kDamaged) continue;
      sum += shapes[k].weight * shapes[k].x;
      area += shapes[k].weight;
      const double d = (shapes[k].x - notch_tip).norm();
      if (d > far_d) {
        far_d = d;
        far = shapes[k].x;
      }
    }
  }
  if (area <= 0.0) return;
  const Vec2 centroid = sum / area;
  auto extends = [&](const Vec2& p) {
    const Vec2& tip = crack.tip();
    return (p - notch_tip).norm() > (tip - notch_tip).norm() && (p - tip).norm() > 0.5 * ell0;
  };
  if (extends(centroid)) crack.vertices.push_back(centroid);
  if ((far - centroid).norm() > 2.0 * ell0 && extends(far)) crack.vertices.push_back(far);
}

struct StepOutcome {
  StaggeredResult result;
  double applied = 0.0;
};

/// Solves one load level, halving the increment on non-convergence.
StepOutcome solve_with_cutbacks(const SolutionState& start, const Discretization& disc,
                                const SimulationSetup& setup, double base, double increment) {
  const StaggeredOptions options{setup.schedule.staggered_tolerance,
                                 setup.schedule.max_staggered_iterations};
  StepOutcome out;
  double inc = increment;
  for (int attempt = 0;; ++attempt) {
    out.applied = base + inc;
    out.result = staggered_step(start, disc, setup.material, setup.params, setup.bcs, out.applied,
                                options);
    if (out.result.converged || attempt >= setup.schedule.max_cutbacks) break;
    spdlog::warn("staggered loop did not converge at u = {:.6g} (change {:.3g}); halving increment",
                 out.applied, out.result.phi_change);
    inc *= 0.5;
  }
  if (!out.result.converged) {
    spdlog::warn("accepting unconverged step at u = {:.6g} (change {:.3g})", out.applied,
                 out.result.phi_change);
  }
  return out;
}

}  // namespace

void MeshSettings::validate() const {
  if (base_level < 0) throw ConfigError("mesh.base_level must be non-negative");
  if (max_depth < base_level) throw ConfigError("mesh.max_depth must be at least mesh.base_level");
  if (max_depth > Quadtree::kMaxLevel) throw ConfigError("mesh.max_depth is too large");
  if (!(error_tolerance > 0.0)) throw ConfigError("mesh.error_tolerance must be positive");
  if (max_passes < 0) throw ConfigError("mesh.max_passes must be non-negative");
  if (quadrature_order < 1 || quadrature_order > 4)
    throw ConfigError("mesh.quadrature_order must be between 1 and 4");
  mls.validate();
}

double SimulationSetup::finest_size() const {
  return std::min(domain.width, domain.height) / std::ldexp(1.0, mesh.max_depth);
}

void SimulationSetup::validate() const {
  if (!(domain.width > 0.0) || !(domain.height > 0.0))
    throw ConfigError("geometry: width and height must be positive");
  material.base.validate();
  params.validate();
  bcs.validate();
  schedule.validate();
  mesh.validate();
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

double damage_band_angle(const Discretization& disc, const Eigen::VectorXd& phi, const Vec2& tip,
                         double r_min, double r_max, double threshold) {
  const std::vector<double> pq = phase_at_qps(disc, phi);
  const std::vector<char> cluster = tip_cluster(disc, pq, tip, threshold);
  std::vector<Vec2> pts;
  std::vector<double> w;
  for (int e = 0; e < disc.mesh().num_elements(); ++e) {
    if (!cluster[e]) continue;
    const auto& shapes = disc.shapes(e);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      if (pq[disc.first_qp(e) + k] <= threshold) continue;
      const double d = (shapes[k].x - tip).norm();
      if (d < r_min || d > r_max) continue;
      pts.push_back(shapes[k].x);
      w.push_back(shapes[k].weight);
    }
  }
  if (pts.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  // total least squares for a line through the tip
  Vec2 mean = Vec2::Zero();
  Mat2 moment = Mat2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - tip;
    mean += w[i] * d;
    moment += w[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat2> eig(moment);
  Vec2 dir = eig.eigenvectors().col(1);
  if (dir.dot(mean) < 0.0) dir = -dir;
  return std::atan2(dir.y(), dir.x()) * 180.0 / std::numbers::pi;
}

double damage_extent(const Discretization& disc, const Eigen::VectorXd& phi, const Vec2& tip,
                     double threshold) {
  const std::vector<double> pq = phase_at_qps(disc, phi);
  const std::vector<char> cluster = tip_cluster(disc, pq, tip, threshold);
  double out = 0.0;
  for (int e = 0; e < disc.mesh().num_elements(); ++e) {
    if (!cluster[e]) continue;
    const auto& shapes = disc.shapes(e);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      if (pq[disc.first_qp(e) + k] > threshold) out = std::max(out, (shapes[k].x - tip).norm());
    }
  }
  return out;
}

SimulationResult run_simulation(const SimulationSetup& setup, const StepObserver& observer) {
  setup.validate();
  const int order = setup.mesh.quadrature_order;
  SimulationResult run;
  run.mesh = build_initial(setup.domain, setup.mesh.base_level, setup.notch);
  run.crack.vertices = setup.notch;
  const Vec2 notch_tip = setup.notch.empty() ? Vec2(setup.domain.origin) : setup.notch.back();
  {
    const Discretization disc(run.mesh, setup.material, order);
    run.state = SolutionState::zeros(run.mesh.num_nodes(), disc.num_qp());
  }
  run.errors.element.assign(run.mesh.num_elements(), 0.0);

  StepRecord initial;
  initial.dofs = displacement_dofs(run.mesh);
  initial.elements = run.mesh.num_elements();
  if (observer && !observer({run.mesh, run.state, run.errors, initial})) return run;

  double applied = 0.0;
  double peak = 0.0;
  for (int step = 1; step <= setup.schedule.steps; ++step) {
    const auto t_step = Clock::now();
    StepRecord rec;
    rec.step = step;
    SolutionState start = run.state;
    Eigen::VectorXd phi_before = run.state.phi;
    StageTimings timings;

    for (int pass = 0;; ++pass) {
      const Discretization disc(run.mesh, setup.material, order);
      StepOutcome outcome = solve_with_cutbacks(start, disc, setup, applied, setup.schedule.increment);
      timings += outcome.result.timings;
      rec.applied = outcome.applied;
      rec.reaction = outcome.result.reaction;
      rec.converged = outcome.result.converged;
      rec.staggered_iterations += outcome.result.iterations;

      auto t0 = Clock::now();
      ErrorMap errors;
      std::set<int> flags;
      if (setup.mesh.adaptive) {
        errors = compute_error_map(run.mesh, run.crack, setup.mesh.mls, outcome.result.state.u,
                                   setup.threads);
        flags = admissible_flags(run.mesh, errors, setup.mesh);
      } else {
        errors.element.assign(run.mesh.num_elements(), 0.0);
      }
      timings.error_indicator += seconds_since(t0);

      if (flags.empty() || pass >= setup.mesh.max_passes) {
        run.state = std::move(outcome.result.state);
        run.errors = std::move(errors);
        rec.refinement_passes = pass;
        grow_crack(run.crack, notch_tip, disc, phase_at_qps(disc, run.state.phi),
                   phase_at_qps(disc, phi_before), setup.params.ell0);
        rec.crack_extension = damage_extent(disc, run.state.phi, notch_tip);
        break;
      }

      t0 = Clock::now();
      QuadtreeMesh next = balance_2to1(refine(run.mesh, flags));
      const MeshTransfer transfer(run.mesh, next, order);
      start = SolutionState{transfer.vector(start.u), transfer.scalar(start.phi),
                            transfer.history(start.H)};
      phi_before = transfer.scalar(phi_before);
      run.mesh = std::move(next);
      timings.remeshing += seconds_since(t0);
      spdlog::debug("step {} pass {}: split {} leaves, {} elements", step, pass + 1, flags.size(),
                    run.mesh.num_elements());
    }

    applied = rec.applied;
    rec.dofs = displacement_dofs(run.mesh);
    rec.elements = run.mesh.num_elements();
    rec.global_error = run.errors.global;
    rec.wall_time = seconds_since(t_step);
    run.timings += timings;
    run.steps.push_back(rec);
    spdlog::info("step {:4d}  u = {:.6e}  F = {:.6e}  dofs = {}  iters = {}  ext = {:.4f}", step,
                 rec.applied, rec.reaction, rec.dofs, rec.staggered_iterations,
                 rec.crack_extension);
    if (observer && !observer({run.mesh, run.state, run.errors, run.steps.back()})) break;

    peak = std::max(peak, rec.reaction);
    if (setup.schedule.stop_force_fraction > 0.0 && peak > 0.0 &&
        rec.reaction < setup.schedule.stop_force_fraction * peak) {
      spdlog::info("reaction dropped below {} of its peak; stopping", setup.schedule.stop_force_fraction);
      break;
    }
    if (setup.schedule.stop_crack_extension > 0.0 &&
        rec.crack_extension >= setup.schedule.stop_crack_extension) {
      spdlog::info("damage reached {:.4f} mm from the notch tip; stopping", rec.crack_extension);
      break;
    }
  }
  return run;
}

BenchReport run_bench(const SimulationSetup& setup) {
  BenchReport report;
  SimulationSetup adaptive = setup;
  adaptive.schedule.stop_force_fraction = 0.0;
  adaptive.schedule.stop_crack_extension = 0.0;
  adaptive.mesh.adaptive = true;
  const int depth = setup.mesh.max_depth;

  auto t0 = Clock::now();
  const SimulationResult a = run_simulation(adaptive, [&](const StepView& v) {
    return v.record.step == 0 || v.mesh.tree().max_leaf_level() < depth ||
           v.record.refinement_passes >= setup.mesh.max_passes;
  });
  report.adaptive_time = seconds_since(t0);
  if (a.steps.empty()) throw SolverError("bench: the schedule has no load steps");
  report.steps = static_cast<int>(a.steps.size());
  report.applied = a.steps.back().applied;
  report.level = depth;
  report.adaptive_dofs = a.steps.back().dofs;
  report.adaptive_elements = a.mesh.num_elements();
  report.adaptive_reaction = a.steps.back().reaction;
  report.adaptive_stages = a.timings;

  SimulationSetup uniform = adaptive;
  uniform.mesh.adaptive = false;
  uniform.mesh.base_level = depth;
  uniform.schedule.steps = report.steps;
  t0 = Clock::now();
  const SimulationResult u = run_simulation(uniform);
  report.uniform_time = seconds_since(t0);
  report.uniform_dofs = u.steps.back().dofs;
  report.uniform_elements = u.mesh.num_elements();
  report.uniform_reaction = u.steps.back().reaction;
  report.uniform_stages = u.timings;
  return report;
}

}  // namespace orthofrac
