#include "orthofrac/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace orthofrac {

namespace {

using json = nlohmann::json;

/// Strict view of one JSON object: every key must be consumed before finish().
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }
  Vec2 point(const std::string& key, const Vec2& fallback) {
    if (!has(key)) return fallback;
    return to_point(get(key), field(key));
  }
  Section child(const std::string& key) { return Section(get(key), field(key)); }
  const json& raw(const std::string& key) { return get(key); }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive, got " + repr(v));
    return v;
  }
  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0)) fail(key, "must be positive, got " + repr(v));
    return v;
  }

  template <class E>
  E choice(const std::string& key, E fallback, std::initializer_list<std::pair<const char*, E>> options) {
    if (!has(key)) return fallback;
    const std::string v = text(key, "");
    std::string names;
    for (const auto& [name, value] : options) {
      if (v == name) return value;
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(key, "must be one of " + names + ", got \"" + v + "\"");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError((key.empty() ? path_ : field(key)) + ": " + what);
  }

  static Vec2 to_point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(where + ": expected [x, y]");
    return Vec2(v[0].get<double>(), v[1].get<double>());
  }
  static std::string repr(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

 private:
  const json& get(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key) + ": required key is missing");
    used_.insert(key);
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

constexpr double kDeg = std::numbers::pi / 180.0;

const char* edge_name(BoundaryEdge e) {
  switch (e) {
    case BoundaryEdge::left: return "left";
    case BoundaryEdge::right: return "right";
    case BoundaryEdge::bottom: return "bottom";
    case BoundaryEdge::top: return "top";
  }
  return "";
}

BoundaryEdge parse_edge(Section& s) {
  return s.choice<BoundaryEdge>("edge", BoundaryEdge::bottom,
                                {{"left", BoundaryEdge::left},
                                 {"right", BoundaryEdge::right},
                                 {"bottom", BoundaryEdge::bottom},
                                 {"top", BoundaryEdge::top}});
}

BoundaryConditions default_boundary() {
  BoundaryConditions b;
  b.dirichlet.push_back({BoundaryEdge::bottom, 0, 0.0, false});
  b.dirichlet.push_back({BoundaryEdge::bottom, 1, 0.0, false});
  b.dirichlet.push_back({BoundaryEdge::top, 0, 0.0, false});
  b.dirichlet.push_back({BoundaryEdge::top, 1, 1.0, true});
  return b;
}

void parse_geometry(Section g, SimulationSetup& s) {
  s.domain.origin = g.point("origin", Vec2::Zero());
  s.domain.width = g.positive("width");
  s.domain.height = g.positive("height");
  if (g.has("notch")) {
    const json& n = g.raw("notch");
    if (!n.is_array()) throw ConfigError(g.field("notch") + ": expected a list of [x, y] points");
    for (std::size_t i = 0; i < n.size(); ++i) {
      s.notch.push_back(Section::to_point(n[i], g.field("notch") + "[" + std::to_string(i) + "]"));
    }
    if (s.notch.size() == 1) throw ConfigError(g.field("notch") + ": needs at least two points");
  }
  g.finish();
}

void parse_material(Section m, MaterialModel& mat) {
  OrthotropicBase& b = mat.base;
  b.E1 = m.positive("E1");
  b.E2 = m.positive("E2");
  b.G12 = m.positive("G12");
  b.nu12 = m.number("nu12");
  if (!(b.nu12 > -1.0 && 1.0 - b.nu12 * b.nu12 * b.E2 / b.E1 > 0.0))
    m.fail("nu12", "must exceed -1 and keep 1 - nu12*nu21 positive");
  b.Gc = m.positive("Gc");
  b.theta = m.number("theta_deg", 0.0) * kDeg;
  mat.rotation = m.choice<RotationConvention>(
      "rotation", RotationConvention::printed,
      {{"printed", RotationConvention::printed}, {"tensor", RotationConvention::tensor}});
  mat.lame = m.choice<EffectiveLame>(
      "split_moduli", EffectiveLame::longitudinal,
      {{"longitudinal", EffectiveLame::longitudinal}, {"transverse", EffectiveLame::transverse}});
  m.finish();
}

void parse_gradation(Section g, const Domain& d, GradationSpec& out) {
  out.direction = g.choice<GradingDirection>(
      "direction", GradingDirection::none,
      {{"none", GradingDirection::none}, {"x", GradingDirection::x}, {"y", GradingDirection::y}});
  out.alpha = g.number("alpha", 0.0);
  out.beta_idx = g.number("beta", 0.0);
  out.gamma = g.number("gamma", 0.0);
  out.grade_toughness = g.boolean("grade_toughness", false);
  const bool along_y = out.direction == GradingDirection::y;
  out.reference_length = g.positive("reference_length", along_y ? d.height : d.width);
  out.origin = g.number("origin", along_y ? d.origin.y() : d.origin.x());
  g.finish();
}

void parse_boundary(Section b, BoundaryConditions& out) {
  out = {};
  if (b.has("dirichlet")) {
    const json& list = b.raw("dirichlet");
    if (!list.is_array()) b.fail("dirichlet", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section c(list[i], b.field("dirichlet") + "[" + std::to_string(i) + "]");
      DirichletCondition d;
      d.edge = parse_edge(c);
      d.component = c.choice<int>("component", 0, {{"x", 0}, {"y", 1}});
      d.value = c.number("value", 0.0);
      d.loaded = c.boolean("loaded", false);
      c.finish();
      out.dirichlet.push_back(d);
    }
  }
  if (b.has("neumann")) {
    const json& list = b.raw("neumann");
    if (!list.is_array()) b.fail("neumann", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section c(list[i], b.field("neumann") + "[" + std::to_string(i) + "]");
      NeumannCondition n;
      n.edge = parse_edge(c);
      n.traction = c.point("traction", Vec2::Zero());
      c.finish();
      out.neumann.push_back(n);
    }
  }
  b.finish();
  if (out.dirichlet.empty()) throw ConfigError("boundary.dirichlet: at least one condition is required");
}

void parse_schedule(Section s, double scale, LoadSchedule& out) {
  out.increment = s.positive("increment", 1e-4 * scale);
  out.steps = s.integer("steps", out.steps);
  if (out.steps < 0) s.fail("steps", "must be non-negative");
  out.staggered_tolerance = s.positive("staggered_tolerance", out.staggered_tolerance);
  out.max_staggered_iterations = s.integer("max_staggered_iterations", out.max_staggered_iterations);
  if (out.max_staggered_iterations < 1) s.fail("max_staggered_iterations", "must be at least 1");
  out.max_cutbacks = s.integer("max_cutbacks", out.max_cutbacks);
  if (out.max_cutbacks < 0) s.fail("max_cutbacks", "must be non-negative");
  out.stop_force_fraction = s.number("stop_force_fraction", 0.0);
  if (out.stop_force_fraction < 0.0 || out.stop_force_fraction >= 1.0)
    s.fail("stop_force_fraction", "must lie in [0, 1)");
  out.stop_crack_extension = s.number("stop_crack_extension", 0.0);
  if (out.stop_crack_extension < 0.0) s.fail("stop_crack_extension", "must be non-negative");
  s.finish();
}

void parse_mesh(Section m, MeshSettings& out) {
  out.base_level = m.integer("base_level", out.base_level);
  if (out.base_level < 0 || out.base_level > 12) m.fail("base_level", "must lie in [0, 12]");
  out.max_depth = m.integer("max_depth", out.max_depth);
  if (out.max_depth < out.base_level || out.max_depth > 16)
    m.fail("max_depth", "must lie in [base_level, 16]");
  out.error_tolerance = m.positive("error_tolerance", out.error_tolerance);
  out.max_passes = m.integer("max_passes", out.max_passes);
  if (out.max_passes < 0) m.fail("max_passes", "must be non-negative");
  out.quadrature_order = m.integer("quadrature_order", out.quadrature_order);
  if (out.quadrature_order < 1 || out.quadrature_order > 4) m.fail("quadrature_order", "must lie in [1, 4]");
  out.adaptive = m.boolean("adaptive", out.adaptive);
  if (m.has("mls")) {
    Section l = m.child("mls");
    out.mls.support_factor = l.positive("support_factor", out.mls.support_factor);
    out.mls.min_neighbors = l.integer("min_neighbors", out.mls.min_neighbors);
    if (out.mls.min_neighbors <= 3) l.fail("min_neighbors", "must exceed the basis size 3");
    out.mls.growth = l.number("growth", out.mls.growth);
    if (!(out.mls.growth > 1.0)) l.fail("growth", "must exceed 1");
    out.mls.max_growth_attempts = l.integer("max_growth_attempts", out.mls.max_growth_attempts);
    if (out.mls.max_growth_attempts < 0) l.fail("max_growth_attempts", "must be non-negative");
    out.mls.max_condition = l.positive("max_condition", out.mls.max_condition);
    l.finish();
  }
  m.finish();
}

void parse_phasefield(Section p, double default_ell0, PhaseFieldParams& out) {
  out.ell0 = p.positive("ell0", default_ell0);
  out.beta_penalty = p.number("beta", out.beta_penalty);
  if (out.beta_penalty < 0.0) p.fail("beta", "must be non-negative");
  out.k_p = p.number("k_p", out.k_p);
  if (!(out.k_p > 0.0 && out.k_p < 1.0)) p.fail("k_p", "must lie in (0, 1)");
  out.axis = p.choice<StructuralAxis>(
      "structural_axis", StructuralAxis::cleavage_normal,
      {{"cleavage_normal", StructuralAxis::cleavage_normal}, {"fibre", StructuralAxis::fibre}});
  p.finish();
}

void parse_output(Section o, OutputSettings& out) {
  out.directory = o.text("directory", out.directory);
  if (out.directory.empty()) o.fail("directory", "must not be empty");
  out.stride = o.integer("stride", out.stride);
  if (out.stride < 1) o.fail("stride", "must be at least 1");
  out.write_vtk = o.boolean("write_vtk", out.write_vtk);
  out.record_timing = o.boolean("record_timing", out.record_timing);
  o.finish();
}

const std::set<std::string> kLogLevels = {"trace", "debug", "info", "warn", "error", "off"};

void parse_run(Section r, SimulationConfig& c) {
  c.setup.threads = r.integer("threads", 1);
  if (c.setup.threads < 1) r.fail("threads", "must be at least 1");
  const int seed = r.integer("seed", 0);
  if (seed < 0) r.fail("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.log_level = r.text("log_level", "info");
  if (!kLogLevels.count(c.log_level)) r.fail("log_level", "unknown level \"" + c.log_level + "\"");
  r.finish();
}

json to_json(const SimulationConfig& c) {
  const SimulationSetup& s = c.setup;
  auto pt = [](const Vec2& p) { return json::array({p.x(), p.y()}); };
  json notch = json::array();
  for (const auto& p : s.notch) notch.push_back(pt(p));
  json dirichlet = json::array();
  for (const auto& d : s.bcs.dirichlet) {
    dirichlet.push_back({{"edge", edge_name(d.edge)},
                         {"component", d.component == 0 ? "x" : "y"},
                         {"value", d.value},
                         {"loaded", d.loaded}});
  }
  json neumann = json::array();
  for (const auto& n : s.bcs.neumann) {
    neumann.push_back({{"edge", edge_name(n.edge)}, {"traction", pt(n.traction)}});
  }
  const auto& m = s.material;
  const auto& g = m.gradation;
  return json{
      {"geometry", {{"origin", pt(s.domain.origin)}, {"width", s.domain.width},
                    {"height", s.domain.height}, {"notch", notch}}},
      {"material", {{"E1", m.base.E1}, {"E2", m.base.E2}, {"G12", m.base.G12},
                    {"nu12", m.base.nu12}, {"Gc", m.base.Gc}, {"theta_deg", m.base.theta / kDeg},
                    {"rotation", m.rotation == RotationConvention::printed ? "printed" : "tensor"},
                    {"split_moduli", m.lame == EffectiveLame::longitudinal ? "longitudinal" : "transverse"}}},
      {"gradation", {{"direction", g.direction == GradingDirection::none ? "none"
                                   : g.direction == GradingDirection::x  ? "x" : "y"},
                     {"alpha", g.alpha}, {"beta", g.beta_idx}, {"gamma", g.gamma},
                     {"grade_toughness", g.grade_toughness},
                     {"reference_length", g.reference_length}, {"origin", g.origin}}},
      {"phasefield", {{"ell0", s.params.ell0}, {"beta", s.params.beta_penalty}, {"k_p", s.params.k_p},
                      {"structural_axis", s.params.axis == StructuralAxis::cleavage_normal
                                              ? "cleavage_normal" : "fibre"}}},
      {"boundary", {{"dirichlet", dirichlet}, {"neumann", neumann}}},
      {"schedule", {{"increment", s.schedule.increment}, {"steps", s.schedule.steps},
                    {"staggered_tolerance", s.schedule.staggered_tolerance},
                    {"max_staggered_iterations", s.schedule.max_staggered_iterations},
                    {"max_cutbacks", s.schedule.max_cutbacks},
                    {"stop_force_fraction", s.schedule.stop_force_fraction},
                    {"stop_crack_extension", s.schedule.stop_crack_extension}}},
      {"mesh", {{"base_level", s.mesh.base_level}, {"max_depth", s.mesh.max_depth},
                {"error_tolerance", s.mesh.error_tolerance}, {"max_passes", s.mesh.max_passes},
                {"quadrature_order", s.mesh.quadrature_order}, {"adaptive", s.mesh.adaptive},
                {"mls", {{"support_factor", s.mesh.mls.support_factor},
                         {"min_neighbors", s.mesh.mls.min_neighbors},
                         {"growth", s.mesh.mls.growth},
                         {"max_growth_attempts", s.mesh.mls.max_growth_attempts},
                         {"max_condition", s.mesh.mls.max_condition}}}}},
      {"output", {{"directory", c.output.directory}, {"stride", c.output.stride},
                  {"write_vtk", c.output.write_vtk}, {"record_timing", c.output.record_timing}}},
      {"run", {{"threads", s.threads}, {"seed", c.seed}, {"log_level", c.log_level}}},
  };
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string SimulationConfig::hash() const {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(resolved);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xF];
  return out;
}

void refresh_resolved(SimulationConfig& config) { config.resolved = to_json(config).dump(); }

SimulationConfig parse_config_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": syntax error at " + line_column(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  SimulationConfig c;
  try {
    Section top(root, "");
    std::vector<std::string> missing;
    for (const char* key : {"geometry", "material", "schedule"})
      if (!top.has(key)) missing.push_back(key);
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("missing required section(s): " + list);
    }
    SimulationSetup& s = c.setup;
    parse_geometry(top.child("geometry"), s);
    parse_material(top.child("material"), s.material);
    if (top.has("mesh")) parse_mesh(top.child("mesh"), s.mesh);
    if (top.has("gradation")) {
      parse_gradation(top.child("gradation"), s.domain, s.material.gradation);
    } else {
      s.material.gradation.reference_length = s.domain.width;
      s.material.gradation.origin = s.domain.origin.x();
    }
    PhaseFieldParams& p = s.params;
    const double ell0_default = 2.0 * s.finest_size();
    if (top.has("phasefield")) {
      parse_phasefield(top.child("phasefield"), ell0_default, p);
    } else {
      p.ell0 = ell0_default;
    }
    if (top.has("boundary")) {
      parse_boundary(top.child("boundary"), s.bcs);
    } else {
      s.bcs = default_boundary();
    }
    parse_schedule(top.child("schedule"), s.domain.scale(), s.schedule);
    if (top.has("output")) parse_output(top.child("output"), c.output);
    if (top.has("run")) parse_run(top.child("run"), c);
    top.finish();
    s.validate();
    try {
      build_initial(s.domain, s.mesh.base_level, s.notch);
    } catch (const MeshError& e) {
      throw ConfigError(std::string("geometry: ") + e.what());
    }
  } catch (const DegenerateMaterial& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  refresh_resolved(c);
  return c;
}

SimulationConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot be read");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void apply_env_overrides(SimulationConfig& config, const EnvLookup& lookup) {
  auto get = [&](const char* name) -> const char* {
    return lookup ? lookup(name) : std::getenv(name);
  };
  auto to_int = [](const char* name, const char* v, long lo) {
    char* end = nullptr;
    const long x = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || x < lo || x > 1000000000L)
      throw ConfigError(std::string(name) + ": invalid value \"" + v + "\"");
    return x;
  };
  if (const char* v = get("ORTHOFRAC_OUTPUT_DIR"); v && *v) config.output.directory = v;
  if (const char* v = get("ORTHOFRAC_MAX_STEPS"); v && *v)
    config.setup.schedule.steps = static_cast<int>(to_int("ORTHOFRAC_MAX_STEPS", v, 0));
  if (const char* v = get("ORTHOFRAC_THREADS"); v && *v)
    config.setup.threads = static_cast<int>(to_int("ORTHOFRAC_THREADS", v, 1));
  if (const char* v = get("ORTHOFRAC_SEED"); v && *v)
    config.seed = static_cast<std::uint64_t>(to_int("ORTHOFRAC_SEED", v, 0));
  if (const char* v = get("ORTHOFRAC_LOG_LEVEL"); v && *v) {
    if (!kLogLevels.count(v)) throw ConfigError(std::string("ORTHOFRAC_LOG_LEVEL: unknown level \"") + v + "\"");
    config.log_level = v;
  }
  refresh_resolved(config);
}

}  // namespace orthofrac
