#include "cloak/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>

namespace cloak::config {
namespace {

using materials::CoreParams;

constexpr std::array<std::pair<Command, const char*>, 8> kCommands{{
    {Command::solve, "solve"},
    {Command::sweep, "sweep"},
    {Command::source_sweep, "source-sweep"},
    {Command::equivalence, "equivalence"},
    {Command::buster_passive, "buster-passive"},
    {Command::buster_active, "buster-active"},
    {Command::sound_hard, "sound-hard"},
    {Command::oracle, "oracle"},
}};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

[[noreturn]] void wrong_type(const std::string& path, const char* expected, const json& got) {
  fail(path, std::string("expected ") + expected + ", got " + got.type_name() + " " + got.dump());
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& as_object(const json& j, const std::string& path,
                      std::initializer_list<const char*> allowed) {
  if (!j.is_object()) wrong_type(path, "object", j);
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&key](const char* a) { return key == a; });
    if (!known) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      fail(join(path, key), "unknown key (allowed: " + list + ")");
    }
  }
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) wrong_type(path, "number", j);
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) wrong_type(path, "integer", j);
  const auto v = j.get<long long>();
  if (v < -1000000000LL || v > 1000000000LL) fail(path, "integer out of range");
  return static_cast<int>(v);
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) wrong_type(path, "boolean", j);
  return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) wrong_type(path, "string", j);
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) wrong_type(path, "array of numbers", j);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

cplx complex_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) wrong_type(path, "[re, im]", j);
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

void check_epsilon_grid(const std::vector<double>& grid, const std::string& path) {
  if (grid.size() < 2) fail(path, "needs at least two values");
  harness::SweepPlan plan;
  plan.epsilon_grid = grid;
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

CoreParams parse_core(const json& j, const std::string& path) {
  as_object(j, path, {"sigma", "sigma_r", "sigma_t", "q"});
  CoreParams core;
  if (j.contains("sigma")) {
    if (j.contains("sigma_r") || j.contains("sigma_t")) {
      fail(path, "give either sigma or sigma_r/sigma_t, not both");
    }
    core.sigma_r = core.sigma_t = coefficient_from_json(j["sigma"], join(path, "sigma"));
  }
  if (j.contains("sigma_r")) core.sigma_r = coefficient_from_json(j["sigma_r"], join(path, "sigma_r"));
  if (j.contains("sigma_t")) core.sigma_t = coefficient_from_json(j["sigma_t"], join(path, "sigma_t"));
  if (j.contains("q")) core.q = coefficient_from_json(j["q"], join(path, "q"));
  return core;
}

json core_to_json(const CoreParams& core) {
  return {{"sigma_r", coefficient_to_json(core.sigma_r)},
          {"sigma_t", coefficient_to_json(core.sigma_t)},
          {"q", coefficient_to_json(core.q)}};
}

materials::CloakSpec parse_spec(const json& j, const std::string& path) {
  as_object(j, path,
            {"N", "epsilon", "r", "omega", "lossy", "core", "source", "absorption_floor",
             "allow_buster"});
  materials::CloakSpec spec;
  if (j.contains("N")) spec.dimension = integer(j["N"], join(path, "N"));
  if (j.contains("epsilon")) spec.epsilon = number(j["epsilon"], join(path, "epsilon"));
  if (j.contains("r")) spec.r_exponent = number(j["r"], join(path, "r"));
  if (j.contains("omega")) spec.omega = number(j["omega"], join(path, "omega"));
  if (j.contains("lossy")) {
    const std::string lp = join(path, "lossy");
    const json& l = as_object(j["lossy"], lp, {"enabled", "gamma", "g", "alpha", "beta"});
    if (l.contains("enabled")) spec.lossy_enabled = boolean(l["enabled"], join(lp, "enabled"));
    if (l.contains("gamma")) spec.lossy.gamma = coefficient_from_json(l["gamma"], join(lp, "gamma"));
    if (l.contains("g")) spec.lossy.g = coefficient_from_json(l["g"], join(lp, "g"));
    if (l.contains("alpha")) spec.lossy.alpha = coefficient_from_json(l["alpha"], join(lp, "alpha"));
    if (l.contains("beta")) spec.lossy.beta = coefficient_from_json(l["beta"], join(lp, "beta"));
  }
  if (j.contains("core")) spec.core = parse_core(j["core"], join(path, "core"));
  if (j.contains("source") && !j["source"].is_null()) {
    spec.source = coefficient_from_json(j["source"], join(path, "source"));
  }
  if (j.contains("absorption_floor") && !j["absorption_floor"].is_null()) {
    spec.absorption_floor = number(j["absorption_floor"], join(path, "absorption_floor"));
  }
  if (j.contains("allow_buster")) {
    spec.allow_buster = boolean(j["allow_buster"], join(path, "allow_buster"));
  }
  try {
    materials::validate(spec);
  } catch (const materials::SpecError& e) {
    fail(path, e.what());
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return spec;
}

json spec_to_json(const materials::CloakSpec& s) {
  return {{"N", s.dimension},
          {"epsilon", s.epsilon},
          {"r", s.r_exponent},
          {"omega", s.omega},
          {"lossy",
           {{"enabled", s.lossy_enabled},
            {"gamma", coefficient_to_json(s.lossy.gamma)},
            {"g", coefficient_to_json(s.lossy.g)},
            {"alpha", coefficient_to_json(s.lossy.alpha)},
            {"beta", coefficient_to_json(s.lossy.beta)}}},
          {"core", core_to_json(s.core)},
          {"source", s.source ? coefficient_to_json(*s.source) : json(nullptr)},
          {"absorption_floor", s.absorption_floor ? json(*s.absorption_floor) : json(nullptr)},
          {"allow_buster", s.allow_buster}};
}

std::vector<LayerConfig> parse_medium(const json& j, const std::string& path) {
  as_object(j, path, {"layers"});
  const std::string lp = join(path, "layers");
  if (!j.contains("layers") || !j["layers"].is_array()) {
    wrong_type(lp, "array of layers", j.value("layers", json(nullptr)));
  }
  std::vector<LayerConfig> out;
  for (std::size_t i = 0; i < j["layers"].size(); ++i) {
    const std::string p = lp + "[" + std::to_string(i) + "]";
    const json& l = as_object(j["layers"][i], p, {"r_outer", "sigma", "sigma_r", "sigma_t", "q", "source"});
    if (!l.contains("r_outer")) fail(join(p, "r_outer"), "required");
    LayerConfig layer;
    layer.r_outer = number(l["r_outer"], join(p, "r_outer"));
    json core = json::object();
    for (const char* key : {"sigma", "sigma_r", "sigma_t", "q"}) {
      if (l.contains(key)) core[key] = l[key];
    }
    const CoreParams cp = parse_core(core, p);
    layer.sigma_r = cp.sigma_r;
    layer.sigma_t = cp.sigma_t;
    layer.q = l.contains("q") ? cp.q : CoefficientFn::constant(1.0);
    if (l.contains("source") && !l["source"].is_null()) {
      layer.source = coefficient_from_json(l["source"], join(p, "source"));
    }
    out.push_back(std::move(layer));
  }
  if (out.empty()) fail(lp, "needs at least one layer");
  return out;
}

const char* observable_name(harness::Observable o) {
  return o == harness::Observable::sup_norm ? "sup_norm" : "l2_norm";
}

const char* form_name(harness::ProblemForm f) {
  return f == harness::ProblemForm::virtual_form ? "virtual" : "physical";
}

harness::ProblemForm parse_form(const json& j, const std::string& path) {
  const std::string s = string(j, path);
  if (s == "virtual") return harness::ProblemForm::virtual_form;
  if (s == "physical") return harness::ProblemForm::physical;
  fail(path, "expected \"virtual\" or \"physical\", got \"" + s + "\"");
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& [c, name] : kCommands) {
    if (c == command) return name;
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (const auto& [c, n] : kCommands) {
    if (name == n) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

json coefficient_to_json(const CoefficientFn& fn) {
  switch (fn.kind()) {
    case CoefficientFn::Kind::constant: {
      const cplx v = fn.coefficients().front();
      return {{"type", "constant"}, {"re", v.real()}, {"im", v.imag()}};
    }
    case CoefficientFn::Kind::polynomial: {
      json c = json::array();
      for (const cplx& v : fn.coefficients()) c.push_back({v.real(), v.imag()});
      return {{"type", "poly"}, {"coeffs", c}};
    }
    case CoefficientFn::Kind::table: {
      json p = json::array();
      for (const auto& pt : fn.points()) p.push_back({pt.r, pt.value.real(), pt.value.imag()});
      return {{"type", "table"}, {"points", p}};
    }
  }
  return nullptr;
}

CoefficientFn coefficient_from_json(const json& value, const std::string& path) {
  if (value.is_number()) return CoefficientFn::constant(number(value, path));
  if (!value.is_object()) wrong_type(path, "number or coefficient object", value);
  if (!value.contains("type")) fail(join(path, "type"), "required");
  const std::string type = string(value["type"], join(path, "type"));
  try {
    if (type == "constant") {
      as_object(value, path, {"type", "re", "im"});
      const double re = value.contains("re") ? number(value["re"], join(path, "re")) : 0.0;
      const double im = value.contains("im") ? number(value["im"], join(path, "im")) : 0.0;
      return CoefficientFn::constant({re, im});
    }
    if (type == "poly") {
      as_object(value, path, {"type", "coeffs"});
      const std::string cp = join(path, "coeffs");
      if (!value.contains("coeffs") || !value["coeffs"].is_array()) {
        wrong_type(cp, "array of [re, im]", value.value("coeffs", json(nullptr)));
      }
      std::vector<cplx> c;
      for (std::size_t i = 0; i < value["coeffs"].size(); ++i) {
        c.push_back(complex_pair(value["coeffs"][i], cp + "[" + std::to_string(i) + "]"));
      }
      return CoefficientFn::polynomial(std::move(c));
    }
    if (type == "table") {
      as_object(value, path, {"type", "points"});
      const std::string pp = join(path, "points");
      if (!value.contains("points") || !value["points"].is_array()) {
        wrong_type(pp, "array of [r, re, im]", value.value("points", json(nullptr)));
      }
      std::vector<CoefficientFn::TablePoint> pts;
      for (std::size_t i = 0; i < value["points"].size(); ++i) {
        const json& p = value["points"][i];
        const std::string ip = pp + "[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 3) wrong_type(ip, "[r, re, im]", p);
        pts.push_back({number(p[0], ip + "[0]"), {number(p[1], ip + "[1]"), number(p[2], ip + "[2]")}});
      }
      return CoefficientFn::table(std::move(pts));
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(join(path, "type"), "expected \"constant\", \"poly\" or \"table\", got \"" + type + "\"");
}

RunConfig parse_config(const json& doc, std::optional<Command> command) {
  as_object(doc, "config",
            {"command", "spec", "incident", "solver", "sweep", "buster", "sound_hard", "solve",
             "medium", "output"});
  RunConfig cfg;
  if (doc.contains("command")) {
    cfg.command = parse_command(string(doc["command"], "command"));
    if (command && *command != cfg.command) {
      fail("command", "config says '" + to_string(cfg.command) + "' but '" + to_string(*command) +
                          "' was requested");
    }
  } else if (command) {
    cfg.command = *command;
  } else {
    fail("command", "required");
  }

  if (doc.contains("spec")) cfg.spec = parse_spec(doc["spec"], "spec");

  if (doc.contains("incident")) {
    const json& j = as_object(doc["incident"], "incident", {"kind", "angle", "amplitude"});
    if (j.contains("kind")) {
      const std::string kind = string(j["kind"], "incident.kind");
      if (kind != "plane_wave" && kind != "none") {
        fail("incident.kind", "expected \"plane_wave\" or \"none\", got \"" + kind + "\"");
      }
      cfg.incident.plane_wave = kind == "plane_wave";
    }
    if (j.contains("angle")) cfg.incident.angle = number(j["angle"], "incident.angle");
    if (j.contains("amplitude")) cfg.incident.amplitude = number(j["amplitude"], "incident.amplitude");
    if (cfg.spec.dimension == 3 && cfg.incident.angle != 0.0) {
      fail("incident.angle", "3D incidence is along the polar axis; angle must be 0");
    }
  }

  if (doc.contains("solver")) {
    const json& j = as_object(doc["solver"], "solver", {"rel_tol", "tail_tol", "far_grid"});
    if (j.contains("rel_tol")) cfg.solver.rel_tol = number(j["rel_tol"], "solver.rel_tol");
    if (j.contains("tail_tol")) cfg.solver.tail_tol = number(j["tail_tol"], "solver.tail_tol");
    if (j.contains("far_grid")) cfg.solver.far_grid = integer(j["far_grid"], "solver.far_grid");
    if (!(cfg.solver.rel_tol > 0.0 && cfg.solver.rel_tol < 1.0)) {
      fail("solver.rel_tol", "must lie in (0, 1)");
    }
    if (!(cfg.solver.tail_tol > 0.0 && cfg.solver.tail_tol < 1.0)) {
      fail("solver.tail_tol", "must lie in (0, 1)");
    }
    if (cfg.solver.far_grid < 360 || cfg.solver.far_grid > 1000000) {
      fail("solver.far_grid", "must lie in [360, 1000000]");
    }
  }

  if (doc.contains("sweep")) {
    const json& j = as_object(doc["sweep"], "sweep", {"epsilon_grid", "observable", "form", "materials"});
    if (j.contains("epsilon_grid")) {
      cfg.sweep.epsilon_grid = numbers(j["epsilon_grid"], "sweep.epsilon_grid");
    }
    if (j.contains("observable")) {
      const std::string o = string(j["observable"], "sweep.observable");
      if (o == "sup_norm") {
        cfg.sweep.observable = harness::Observable::sup_norm;
      } else if (o == "l2_norm") {
        cfg.sweep.observable = harness::Observable::l2_norm;
      } else {
        fail("sweep.observable", "expected \"sup_norm\" or \"l2_norm\", got \"" + o + "\"");
      }
    }
    if (j.contains("form")) cfg.sweep.form = parse_form(j["form"], "sweep.form");
    if (j.contains("materials")) {
      if (!j["materials"].is_array()) wrong_type("sweep.materials", "array of cores", j["materials"]);
      for (std::size_t i = 0; i < j["materials"].size(); ++i) {
        const std::string p = "sweep.materials[" + std::to_string(i) + "]";
        const CoreParams core = parse_core(j["materials"][i], p);
        materials::CloakSpec probe = cfg.spec;
        probe.core = core;
        try {
          materials::validate(probe);
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
        cfg.sweep.materials.push_back(core);
      }
    }
  }
  check_epsilon_grid(cfg.sweep.epsilon_grid, "sweep.epsilon_grid");

  if (doc.contains("buster")) {
    const json& j = as_object(doc["buster"], "buster", {"q_min", "q_max", "points", "epsilon_grid", "c0"});
    if (j.contains("q_min")) cfg.buster.q_min = number(j["q_min"], "buster.q_min");
    if (j.contains("q_max")) cfg.buster.q_max = number(j["q_max"], "buster.q_max");
    if (j.contains("points")) cfg.buster.points = integer(j["points"], "buster.points");
    if (j.contains("epsilon_grid")) {
      cfg.buster.epsilon_grid = numbers(j["epsilon_grid"], "buster.epsilon_grid");
    }
    if (j.contains("c0")) cfg.buster.c0 = number(j["c0"], "buster.c0");
  }
  if (!(cfg.buster.q_min > 0.0 && cfg.buster.q_max >= cfg.buster.q_min)) {
    fail("buster", "need 0 < q_min <= q_max");
  }
  if (cfg.buster.points < 1) fail("buster.points", "must be at least 1");
  check_epsilon_grid(cfg.buster.epsilon_grid, "buster.epsilon_grid");

  if (doc.contains("sound_hard")) {
    const json& j = as_object(doc["sound_hard"], "sound_hard", {"tau_grid"});
    if (j.contains("tau_grid")) cfg.sound_hard.tau_grid = numbers(j["tau_grid"], "sound_hard.tau_grid");
  }
  if (cfg.sound_hard.tau_grid.size() < 2) fail("sound_hard.tau_grid", "needs at least two radii");
  for (double t : cfg.sound_hard.tau_grid) {
    if (!(t > 0.0 && t < materials::kCoreRadius)) {
      fail("sound_hard.tau_grid", "radii must lie in (0, 0.5)");
    }
  }

  if (doc.contains("solve")) {
    const json& j = as_object(doc["solve"], "solve", {"form"});
    if (j.contains("form")) cfg.solve_form = parse_form(j["form"], "solve.form");
  }

  if (doc.contains("medium") && !doc["medium"].is_null()) {
    cfg.medium = parse_medium(doc["medium"], "medium");
    try {
      explicit_medium(cfg);
    } catch (const std::exception& e) {
      fail("medium", e.what());
    }
  }

  if (doc.contains("output")) {
    const json& j = as_object(doc["output"], "output", {"dir", "formats"});
    if (j.contains("dir")) cfg.output.dir = string(j["dir"], "output.dir");
    if (j.contains("formats")) {
      if (!j["formats"].is_array()) wrong_type("output.formats", "array of strings", j["formats"]);
      cfg.output.csv = cfg.output.json = false;
      for (std::size_t i = 0; i < j["formats"].size(); ++i) {
        const std::string f = string(j["formats"][i], "output.formats[" + std::to_string(i) + "]");
        if (f == "csv") {
          cfg.output.csv = true;
        } else if (f == "json") {
          cfg.output.json = true;
        } else {
          fail("output.formats", "expected \"csv\" or \"json\", got \"" + f + "\"");
        }
      }
    }
  }
  return cfg;
}

RunConfig parse_config(const std::string& text, std::optional<Command> command) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, command);
}

json to_json(const RunConfig& c) {
  json sweep_materials = json::array();
  for (const auto& m : c.sweep.materials) sweep_materials.push_back(core_to_json(m));
  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  json medium = nullptr;
  if (c.medium) {
    json layers = json::array();
    for (const auto& l : *c.medium) {
      layers.push_back({{"r_outer", l.r_outer},
                        {"sigma_r", coefficient_to_json(l.sigma_r)},
                        {"sigma_t", coefficient_to_json(l.sigma_t)},
                        {"q", coefficient_to_json(l.q)},
                        {"source", l.source ? coefficient_to_json(*l.source) : json(nullptr)}});
    }
    medium = {{"layers", layers}};
  }
  return {{"command", to_string(c.command)},
          {"spec", spec_to_json(c.spec)},
          {"incident",
           {{"kind", c.incident.plane_wave ? "plane_wave" : "none"},
            {"angle", c.incident.angle},
            {"amplitude", c.incident.amplitude}}},
          {"solver",
           {{"rel_tol", c.solver.rel_tol},
            {"tail_tol", c.solver.tail_tol},
            {"far_grid", c.solver.far_grid}}},
          {"sweep",
           {{"epsilon_grid", c.sweep.epsilon_grid},
            {"observable", observable_name(c.sweep.observable)},
            {"form", form_name(c.sweep.form)},
            {"materials", sweep_materials}}},
          {"buster",
           {{"q_min", c.buster.q_min},
            {"q_max", c.buster.q_max},
            {"points", c.buster.points},
            {"epsilon_grid", c.buster.epsilon_grid},
            {"c0", c.buster.c0}}},
          {"sound_hard", {{"tau_grid", c.sound_hard.tau_grid}}},
          {"solve", {{"form", form_name(c.solve_form)}}},
          {"medium", medium},
          {"output", {{"dir", c.output.dir}, {"formats", formats}}}};
}

scattering::SolveOptions solve_options(const RunConfig& config) {
  scattering::SolveOptions o;
  o.solver.rel_tol = config.solver.rel_tol;
  o.tail_tol = config.solver.tail_tol;
  o.far_grid = config.solver.far_grid;
  return o;
}

std::optional<materials::LayeredMedium> explicit_medium(const RunConfig& config) {
  if (!config.medium) return std::nullopt;
  std::vector<materials::Layer> layers;
  double r = 0.0;
  for (const auto& l : *config.medium) {
    materials::Layer layer{r, l.r_outer, {l.sigma_r, l.sigma_t, l.q}, std::nullopt};
    if (l.source) layer.source = RadialFn(*l.source);
    layers.push_back(std::move(layer));
    r = l.r_outer;
  }
  return materials::LayeredMedium(config.spec.dimension, std::move(layers));
}

}  // namespace cloak::config
