#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "orthofrac/simulation.hpp"

namespace orthofrac {

struct OutputSettings {
  std::string directory = "output";
  int stride = 1;             ///< write a VTK file every `stride` steps
  bool write_vtk = true;
  bool record_timing = true;  ///< false writes 0 in the wall-time column
};

struct SimulationConfig {
  SimulationSetup setup;
  OutputSettings output;
  std::uint64_t seed = 0;  ///< reserved; nothing in the solver is random
  std::string log_level = "info";
  /// The configuration with every default filled in, as canonical JSON.
  std::string resolved;

  /// 16 hex digits identifying `resolved`.
  std::string hash() const;
};

/// Reads a JSON configuration. Unknown keys, missing required sections and out-of-range
/// values raise ConfigError naming the field (and line/column for syntax errors).
SimulationConfig parse_config(const std::filesystem::path& path);
SimulationConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Looks up environment variables; the default reads the process environment.
using EnvLookup = std::function<const char*(const char*)>;

/// Applies ORTHOFRAC_OUTPUT_DIR, ORTHOFRAC_MAX_STEPS, ORTHOFRAC_THREADS, ORTHOFRAC_SEED and
/// ORTHOFRAC_LOG_LEVEL. Throws ConfigError on malformed values.
void apply_env_overrides(SimulationConfig& config, const EnvLookup& lookup = {});

/// Re-derives `resolved` after fields were changed programmatically.
void refresh_resolved(SimulationConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace orthofrac
