#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "orthofrac/config.hpp"
#include "orthofrac/simulation.hpp"

namespace orthofrac {

/// Provenance echoed into every output file.
struct OutputMetadata {
  std::string config_hash;
  double ell0 = 0.0;
  double increment = 0.0;
  double error_tolerance = 0.0;
  double staggered_tolerance = 0.0;
  int quadrature_order = 2;

  static OutputMetadata from(const SimulationConfig& config);
  /// Single line of key=value pairs.
  std::string line() const;
};

/// Legacy ASCII unstructured grid: every element as a VTK_POLYGON, point fields u (z = 0)
/// and phi, cell fields element_error and level. Throws Error if the file cannot be written.
void write_vtk(const std::filesystem::path& path, const QuadtreeMesh& mesh,
               const SolutionState& state, const ErrorMap& errors, int step,
               const OutputMetadata& meta);

/// "step_0007.vtk"
std::string vtk_file_name(int step);

/// Load-displacement CSV written one row at a time and flushed after each row.
///
/// The first line is a '#' comment carrying the metadata, then the header
/// step,applied_displacement_mm,reaction_N,dofs,staggered_iterations,wall_time_s.
class LoadDisplacementWriter {
 public:
  LoadDisplacementWriter(const std::filesystem::path& path, const OutputMetadata& meta,
                         bool record_timing = true);
  void append(const StepRecord& record);

 private:
  std::ofstream out_;
  bool record_timing_;
};

void write_load_displacement(const std::filesystem::path& path,
                             const std::vector<StepRecord>& history, const OutputMetadata& meta,
                             bool record_timing = true);

/// One CSV row of a load-displacement file.
std::string format_step_row(const StepRecord& record, bool record_timing);

/// Plain-text comparison table of a bench run.
std::string format_bench_report(const BenchReport& report, const OutputMetadata& meta);

}  // namespace orthofrac
