#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "orthofrac/config.hpp"

using namespace orthofrac;

namespace {

const char* kMinimal = R"({
  "geometry": {"width": 1.0, "height": 1.0, "notch": [[0.0, 0.5], [0.5, 0.5]]},
  "material": {"E1": 114800, "E2": 11700, "G12": 9660, "nu12": 0.21, "Gc": 2.7},
  "schedule": {"steps": 10}
})";

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(Config, MinimalFillsDefaults) {
  const SimulationConfig c = parse_config_text(kMinimal);
  EXPECT_DOUBLE_EQ(c.setup.params.beta_penalty, 20.0);
  EXPECT_DOUBLE_EQ(c.setup.params.k_p, 1e-6);
  EXPECT_DOUBLE_EQ(c.setup.mesh.error_tolerance, 1e-5);
  EXPECT_EQ(c.setup.mesh.max_depth, 8);
  EXPECT_DOUBLE_EQ(c.setup.params.ell0, 2.0 / 256.0);
  EXPECT_DOUBLE_EQ(c.setup.schedule.increment, 1e-4);
  EXPECT_DOUBLE_EQ(c.setup.schedule.staggered_tolerance, 1e-4);
  EXPECT_EQ(c.setup.schedule.max_staggered_iterations, 200);
  EXPECT_EQ(c.setup.bcs.dirichlet.size(), 4u);
  EXPECT_EQ(c.setup.notch.size(), 2u);
  EXPECT_EQ(c.hash().size(), 16u);
  // defaults are echoed in the resolved form
  const SimulationConfig again = parse_config_text(c.resolved);
  EXPECT_EQ(again.resolved, c.resolved);
  EXPECT_EQ(again.hash(), c.hash());
}

TEST(Config, HashChangesWithParameters) {
  const SimulationConfig a = parse_config_text(kMinimal);
  const SimulationConfig b = parse_config_text(with("\"steps\": 10", "\"steps\": 11"));
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, NegativeModulusNamesTheField) {
  const std::string e = error_of(with("\"E1\": 114800", "\"E1\": -5"));
  EXPECT_NE(e.find("material.E1"), std::string::npos) << e;
}

TEST(Config, MissingScheduleListsSection) {
  const std::string e = error_of(R"({"geometry": {"width": 1, "height": 1},
    "material": {"E1": 1, "E2": 1, "G12": 1, "nu12": 0.2, "Gc": 1}})");
  EXPECT_NE(e.find("schedule"), std::string::npos) << e;
  const std::string e2 = error_of("{}");
  EXPECT_NE(e2.find("geometry, material, schedule"), std::string::npos) << e2;
}

TEST(Config, UnknownKeyRejected) {
  const std::string e = error_of(with("\"steps\": 10", "\"steps\": 10, \"stpes\": 3"));
  EXPECT_NE(e.find("schedule.stpes"), std::string::npos) << e;
  EXPECT_NE(error_of(with("\"schedule\"", "\"extra\": 1, \"schedule\"")).find("extra"), std::string::npos);
}

TEST(Config, SyntaxErrorReportsLine) {
  const std::string e = error_of("{\n  \"geometry\": {\n    \"width\": 1,,\n  }\n}");
  EXPECT_NE(e.find("line 3"), std::string::npos) << e;
}

TEST(Config, RangeAndTypeErrors) {
  EXPECT_NE(error_of(with("\"nu12\": 0.21", "\"nu12\": 4.0")).find("material.nu12"), std::string::npos);
  EXPECT_NE(error_of(with("\"steps\": 10", "\"steps\": \"ten\"")).find("schedule.steps"), std::string::npos);
  EXPECT_NE(error_of(with("\"steps\": 10", "\"steps\": 10, \"increment\": 0")).find("schedule.increment"),
            std::string::npos);
  EXPECT_NE(error_of(with("\"Gc\": 2.7", "\"Gc\": 2.7, \"rotation\": \"sideways\"")).find("material.rotation"),
            std::string::npos);
  EXPECT_NE(error_of(with("\"width\": 1.0", "\"width\": 1.5")).find("geometry"), std::string::npos);
}

TEST(Config, FullDocumentParses) {
  const SimulationConfig c = parse_config_text(R"({
    "geometry": {"origin": [0, 0], "width": 1, "height": 1, "notch": [[0, 0.5], [0.5, 0.5]]},
    "material": {"E1": 114800, "E2": 11700, "G12": 9660, "nu12": 0.21, "Gc": 2.7, "theta_deg": 45,
                 "rotation": "tensor", "split_moduli": "transverse"},
    "gradation": {"direction": "x", "alpha": 0.2, "beta": 0.1, "gamma": 0.5, "grade_toughness": true},
    "phasefield": {"ell0": 0.02, "beta": 10, "k_p": 1e-5, "structural_axis": "fibre"},
    "boundary": {"dirichlet": [{"edge": "left", "component": "x", "value": 0},
                               {"edge": "right", "component": "x", "value": 1, "loaded": true},
                               {"edge": "bottom", "component": "y"}],
                 "neumann": [{"edge": "top", "traction": [0.5, 0]}]},
    "schedule": {"increment": 2e-4, "steps": 3, "stop_force_fraction": 0.1},
    "mesh": {"base_level": 3, "max_depth": 6, "error_tolerance": 1e-4, "max_passes": 2,
             "mls": {"support_factor": 3.0}},
    "output": {"directory": "x", "stride": 2, "record_timing": false},
    "run": {"threads": 2, "seed": 7, "log_level": "warn"}
  })");
  EXPECT_NEAR(c.setup.material.base.theta, std::acos(-1.0) / 4, 1e-15);
  EXPECT_EQ(c.setup.material.rotation, RotationConvention::tensor);
  EXPECT_EQ(c.setup.material.lame, EffectiveLame::transverse);
  EXPECT_EQ(c.setup.material.gradation.direction, GradingDirection::x);
  EXPECT_DOUBLE_EQ(c.setup.material.gradation.reference_length, 1.0);
  EXPECT_EQ(c.setup.params.axis, StructuralAxis::fibre);
  EXPECT_EQ(c.setup.bcs.dirichlet.size(), 3u);
  EXPECT_TRUE(c.setup.bcs.dirichlet[1].loaded);
  EXPECT_EQ(c.setup.bcs.neumann.size(), 1u);
  EXPECT_DOUBLE_EQ(c.setup.mesh.mls.support_factor, 3.0);
  EXPECT_EQ(c.output.stride, 2);
  EXPECT_FALSE(c.output.record_timing);
  EXPECT_EQ(c.setup.threads, 2);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.log_level, "warn");
}

TEST(Config, ConflictingBoundaryConditionsRejected) {
  const std::string e = error_of(with("\"schedule\"", R"("boundary": {"dirichlet": [{"edge": "top", "component": "y"}],
      "neumann": [{"edge": "top", "traction": [0, 1]}]}, "schedule")"));
  EXPECT_NE(e.find("boundary"), std::string::npos) << e;
}

TEST(Config, EnvironmentOverrides) {
  SimulationConfig c = parse_config_text(kMinimal);
  const std::string before = c.hash();
  std::map<std::string, std::string> env = {{"ORTHOFRAC_MAX_STEPS", "3"},
                                            {"ORTHOFRAC_OUTPUT_DIR", "/tmp/x"},
                                            {"ORTHOFRAC_THREADS", "2"},
                                            {"ORTHOFRAC_LOG_LEVEL", "debug"}};
  apply_env_overrides(c, [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.setup.schedule.steps, 3);
  EXPECT_EQ(c.output.directory, "/tmp/x");
  EXPECT_EQ(c.setup.threads, 2);
  EXPECT_EQ(c.log_level, "debug");
  EXPECT_NE(c.hash(), before);
  env = {{"ORTHOFRAC_THREADS", "zero"}};
  EXPECT_THROW(apply_env_overrides(c, [&](const char* k) -> const char* {
                 auto it = env.find(k);
                 return it == env.end() ? nullptr : it->second.c_str();
               }),
               ConfigError);
}

TEST(Config, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(Config, MissingFile) { EXPECT_THROW(parse_config("/nonexistent/config.json"), ConfigError); }
