#include "orthofrac/output.hpp"

#include <cstdio>

namespace orthofrac {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

OutputMetadata OutputMetadata::from(const SimulationConfig& config) {
  OutputMetadata m;
  m.config_hash = config.hash();
  m.ell0 = config.setup.params.ell0;
  m.increment = config.setup.schedule.increment;
  m.error_tolerance = config.setup.mesh.error_tolerance;
  m.staggered_tolerance = config.setup.schedule.staggered_tolerance;
  m.quadrature_order = config.setup.mesh.quadrature_order;
  return m;
}

std::string OutputMetadata::line() const {
  return "config_hash=" + config_hash + " ell0=" + num(ell0) + " increment=" + num(increment) +
         " error_tolerance=" + num(error_tolerance) +
         " staggered_tolerance=" + num(staggered_tolerance) +
         " quadrature_order=" + std::to_string(quadrature_order);
}

std::string vtk_file_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%04d.vtk", step);
  return buf;
}

void write_vtk(const std::filesystem::path& path, const QuadtreeMesh& mesh,
               const SolutionState& state, const ErrorMap& errors, int step,
               const OutputMetadata& meta) {
  const int nn = mesh.num_nodes();
  const int ne = mesh.num_elements();
  if (state.u.size() != 2 * nn || state.phi.size() != nn) {
    throw Error("write_vtk: state does not match the mesh");
  }
  std::ofstream out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "orthofrac step " << step << " " << meta.line() << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nn << " double\n";
  for (const Vec2& p : mesh.nodes()) out << num(p.x()) << ' ' << num(p.y()) << " 0\n";

  std::size_t size = 0;
  for (const auto& el : mesh.elements()) size += el.nodes.size() + 1;
  out << "CELLS " << ne << ' ' << size << "\n";
  for (const auto& el : mesh.elements()) {
    out << el.nodes.size();
    for (int n : el.nodes) out << ' ' << n;
    out << "\n";
  }
  out << "CELL_TYPES " << ne << "\n";
  for (int e = 0; e < ne; ++e) out << "7\n";

  out << "POINT_DATA " << nn << "\n";
  out << "VECTORS u double\n";
  for (int n = 0; n < nn; ++n) out << num(state.u[2 * n]) << ' ' << num(state.u[2 * n + 1]) << " 0\n";
  out << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) out << num(state.phi[n]) << "\n";

  out << "CELL_DATA " << ne << "\n";
  out << "SCALARS element_error double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < ne; ++e) {
    out << num(e < static_cast<int>(errors.element.size()) ? errors.element[e] : 0.0) << "\n";
  }
  out << "SCALARS level int 1\nLOOKUP_TABLE default\n";
  for (const auto& el : mesh.elements()) out << mesh.tree().cell(el.cell).level << "\n";
  if (!out) throw Error("write_vtk: failed writing " + path.string());
}

std::string format_step_row(const StepRecord& r, bool record_timing) {
  return std::to_string(r.step) + "," + num(r.applied) + "," + num(r.reaction) + "," +
         std::to_string(r.dofs) + "," + std::to_string(r.staggered_iterations) + "," +
         num(record_timing ? r.wall_time : 0.0);
}

LoadDisplacementWriter::LoadDisplacementWriter(const std::filesystem::path& path,
                                               const OutputMetadata& meta, bool record_timing)
    : out_(open_for_writing(path)), record_timing_(record_timing) {
  out_ << "# " << meta.line() << "\n";
  out_ << "step,applied_displacement_mm,reaction_N,dofs,staggered_iterations,wall_time_s\n";
  out_.flush();
}

void LoadDisplacementWriter::append(const StepRecord& record) {
  out_ << format_step_row(record, record_timing_) << "\n";
  out_.flush();
  if (!out_) throw Error("load-displacement file: write failed");
}

void write_load_displacement(const std::filesystem::path& path,
                             const std::vector<StepRecord>& history, const OutputMetadata& meta,
                             bool record_timing) {
  if (history.empty()) throw Error("write_load_displacement: no completed steps");
  LoadDisplacementWriter w(path, meta, record_timing);
  for (const auto& r : history) w.append(r);
}

std::string format_bench_report(const BenchReport& r, const OutputMetadata& meta) {
  auto row = [](const char* name, double a, double u) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-22s %14.6g %14.6g\n", name, a, u);
    return std::string(buf);
  };
  std::string s = "# " + meta.line() + "\n";
  char head[160];
  std::snprintf(head, sizeof head,
                "%d load steps to %.6g mm, crack-tip level %d\n", r.steps, r.applied, r.level);
  s += head;
  std::snprintf(head, sizeof head, "%-22s %14s %14s\n", "", "adaptive", "uniform");
  s += head;
  s += row("dofs", r.adaptive_dofs, r.uniform_dofs);
  s += row("elements", r.adaptive_elements, r.uniform_elements);
  s += row("reaction_N", r.adaptive_reaction, r.uniform_reaction);
  s += row("error_indicator_s", r.adaptive_stages.error_indicator, r.uniform_stages.error_indicator);
  s += row("remeshing_s", r.adaptive_stages.remeshing, r.uniform_stages.remeshing);
  s += row("assemble_phi_s", r.adaptive_stages.assemble_phi, r.uniform_stages.assemble_phi);
  s += row("solve_phi_s", r.adaptive_stages.solve_phi, r.uniform_stages.solve_phi);
  s += row("assemble_u_s", r.adaptive_stages.assemble_u, r.uniform_stages.assemble_u);
  s += row("solve_u_s", r.adaptive_stages.solve_u, r.uniform_stages.solve_u);
  s += row("total_s", r.adaptive_time, r.uniform_time);
  std::snprintf(head, sizeof head, "dof ratio %.4f, time ratio %.4f\n",
                static_cast<double>(r.adaptive_dofs) / r.uniform_dofs,
                r.adaptive_time / r.uniform_time);
  s += head;
  return s;
}

}  // namespace orthofrac
