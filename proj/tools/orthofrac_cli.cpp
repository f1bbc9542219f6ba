#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "orthofrac/config.hpp"
#include "orthofrac/output.hpp"
#include "orthofrac/simulation.hpp"

namespace fs = std::filesystem;
using namespace orthofrac;

namespace {

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<int> max_steps;
  std::optional<int> threads;
  std::optional<int> seed;
  std::optional<std::string> log_level;
};

void add_common_flags(CLI::App& app, Overrides& o) {
  app.add_option("--output-dir", o.output_dir, "Directory for VTK/CSV output");
  app.add_option("--max-steps", o.max_steps, "Override the number of load steps")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", o.threads, "Worker threads for the error indicator")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Reserved; recorded in the output metadata")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
}

SimulationConfig load(const std::string& path, const Overrides& o) {
  SimulationConfig c = parse_config(path);
  apply_env_overrides(c);
  if (o.output_dir) c.output.directory = *o.output_dir;
  if (o.max_steps) c.setup.schedule.steps = *o.max_steps;
  if (o.threads) c.setup.threads = *o.threads;
  if (o.seed) c.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.log_level) c.log_level = *o.log_level;
  refresh_resolved(c);
  spdlog::set_level(spdlog::level::from_str(c.log_level));
  return c;
}

void write_resolved(const SimulationConfig& c, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.resolved.json");
  out << c.resolved << "\n";
}

int cmd_check(const SimulationConfig& c) {
  const SimulationSetup& s = c.setup;
  std::printf("config ok (hash %s)\n", c.hash().c_str());
  std::printf("  domain        %g x %g mm, notch with %zu vertices\n", s.domain.width,
              s.domain.height, s.notch.size());
  std::printf("  mesh          base level %d, max depth %d, finest size %g mm, tolerance %g\n",
              s.mesh.base_level, s.mesh.max_depth, s.finest_size(), s.mesh.error_tolerance);
  std::printf("  phase field   ell0 %g mm, beta %g, k_p %g\n", s.params.ell0,
              s.params.beta_penalty, s.params.k_p);
  std::printf("  schedule      %d steps of %g mm, staggered tolerance %g\n", s.schedule.steps,
              s.schedule.increment, s.schedule.staggered_tolerance);
  std::printf("  output        %s\n", c.output.directory.c_str());
  return 0;
}

int cmd_mesh(const SimulationConfig& c) {
  const fs::path dir = c.output.directory;
  write_resolved(c, dir);
  const QuadtreeMesh mesh = build_initial(c.setup.domain, c.setup.mesh.base_level, c.setup.notch);
  const Discretization disc(mesh, c.setup.material, c.setup.mesh.quadrature_order);
  const SolutionState state = SolutionState::zeros(mesh.num_nodes(), disc.num_qp());
  ErrorMap errors;
  errors.element.assign(mesh.num_elements(), 0.0);
  const fs::path file = dir / "mesh_initial.vtk";
  write_vtk(file, mesh, state, errors, 0, OutputMetadata::from(c));
  std::printf("%d nodes, %d elements -> %s\n", mesh.num_nodes(), mesh.num_elements(),
              file.string().c_str());
  return 0;
}

int cmd_run(const SimulationConfig& c) {
  const fs::path dir = c.output.directory;
  write_resolved(c, dir);
  const OutputMetadata meta = OutputMetadata::from(c);
  std::optional<LoadDisplacementWriter> csv;
  if (c.setup.schedule.steps > 0) csv.emplace(dir / "load_displacement.csv", meta, c.output.record_timing);
  const SimulationResult result = run_simulation(c.setup, [&](const StepView& v) {
    const int step = v.record.step;
    if (step > 0) csv->append(v.record);
    const bool last = step == c.setup.schedule.steps;
    if (c.output.write_vtk && (step % c.output.stride == 0 || last)) {
      write_vtk(dir / vtk_file_name(step), v.mesh, v.state, v.errors, step, meta);
    }
    return true;
  });
  if (c.output.write_vtk && !result.steps.empty() && result.steps.back().step % c.output.stride != 0) {
    write_vtk(dir / vtk_file_name(result.steps.back().step), result.mesh, result.state,
              result.errors, result.steps.back().step, meta);
  }
  std::printf("%zu steps written to %s\n", result.steps.size(), dir.string().c_str());
  return 0;
}

int cmd_bench(const SimulationConfig& c) {
  const fs::path dir = c.output.directory;
  write_resolved(c, dir);
  const BenchReport report = run_bench(c.setup);
  const std::string text = format_bench_report(report, OutputMetadata::from(c));
  std::fputs(text.c_str(), stdout);
  std::ofstream(dir / "bench.txt") << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive phase-field fracture of orthotropic graded plates"};
  app.require_subcommand(1);
  Overrides overrides;
  std::string config_path;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const SimulationConfig&);
  };
  const Command commands[] = {
      {"run", "Run the full simulation", cmd_run},
      {"check", "Validate a configuration and print a summary", cmd_check},
      {"mesh", "Write the initial mesh as VTK", cmd_mesh},
      {"bench", "Compare uniform and adaptive meshes at matching crack-tip resolution", cmd_bench},
  };
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("config", config_path, "JSON configuration file")->required();
    add_common_flags(*sub, overrides);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    for (const auto& cmd : commands) {
      if (app.got_subcommand(cmd.name)) return cmd.fn(load(config_path, overrides));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
