#include "varistep/config.hpp"

#include <cmath>
#include <initializer_list>
#include <map>

#include <json.hpp>

#include "varistep/error.hpp"

namespace varistep {
namespace {

using nlohmann::json;

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
}

void allow_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view k : keys) known = known || key == k;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

double number(const json& j, std::string_view where) {
  if (!j.is_number()) throw ConfigError(std::string(where) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string(where) + " must be finite");
  return v;
}

std::uint64_t count(const json& j, std::string_view where) {
  if (!j.is_number_integer() || (j.is_number_integer() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string(where) + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Vector vector_field(const json& j, std::string_view where) {
  if (j.is_number()) {
    Vector v(1);
    v[0] = number(j, where);
    return v;
  }
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(where) + " must be a number or array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where);
  return v;
}

ModelSpec parse_model(const json& j) {
  require_object(j, "model");
  allow_keys(j, "model", {"builtin", "params", "hamiltonian_expr", "dimension"});
  ModelSpec spec;
  const bool has_builtin = j.contains("builtin");
  const bool has_expr = j.contains("hamiltonian_expr");
  if (has_builtin == has_expr) {
    throw ConfigError("model needs exactly one of 'builtin' and 'hamiltonian_expr'");
  }
  if (has_builtin) {
    if (!j["builtin"].is_string()) throw ConfigError("model.builtin must be a string");
    if (j.contains("dimension")) throw ConfigError("builtin models take 'dimension' in params");
    spec.builtin = j["builtin"].get<std::string>();
    if (j.contains("params")) {
      require_object(j["params"], "model.params");
      for (const auto& [key, value] : j["params"].items()) {
        spec.params.emplace(key, number(value, "model.params." + key));
      }
    }
  } else {
    if (!j["hamiltonian_expr"].is_string()) throw ConfigError("model.hamiltonian_expr must be a string");
    if (j.contains("params")) throw ConfigError("expression models take no params");
    spec.expression = j["hamiltonian_expr"].get<std::string>();
    if (j.contains("dimension")) {
      const std::uint64_t d = count(j["dimension"], "model.dimension");
      if (d == 0 || d > 64) throw ConfigError("model.dimension must be between 1 and 64");
      spec.dimension = static_cast<int>(d);
    }
  }
  return spec;
}

SchemeChoice parse_scheme(const json& j) {
  require_object(j, "scheme");
  allow_keys(j, "scheme", {"kind", "alpha", "beta"});
  SchemeChoice s;
  const std::string kind = j.value("kind", std::string("variable-step-midpoint"));
  if (kind == "variable-step-midpoint") {
    s.kind = SchemeKind::VariableStepMidpoint;
  } else if (kind == "fixed-step-midpoint") {
    s.kind = SchemeKind::FixedStepMidpoint;
  } else if (kind == "alpha-beta") {
    s.kind = SchemeKind::AlphaBeta;
  } else {
    throw ConfigError("unknown scheme kind '" + kind + "'");
  }
  const bool has_a = j.contains("alpha");
  const bool has_b = j.contains("beta");
  if ((has_a || has_b) && s.kind != SchemeKind::AlphaBeta) {
    throw ConfigError("alpha and beta apply to the alpha-beta scheme only");
  }
  if (has_a) s.alpha = number(j["alpha"], "scheme.alpha");
  s.beta = has_b ? number(j["beta"], "scheme.beta") : 1.0 - s.alpha;
  if (has_b && !has_a) s.alpha = 1.0 - s.beta;
  if (std::abs(s.alpha + s.beta - 1.0) > 1e-14) throw ConfigError("alpha + beta must equal 1");
  return s;
}

const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"paper-sec5", R"({
  "model": {"builtin": "perturbed_pendulum",
            "params": {"inertia": 1, "mgr": 1, "a": 0.1, "omega": 0.02}},
  "initial": {"q": 0.5, "p": 0.5, "t": 0},
  "tau1": 0.5,
  "stop": {"t_end": 10000},
  "scheme": {"kind": "variable-step-midpoint"}
})"},
      {"pendulum-autonomous", R"({
  "model": {"builtin": "perturbed_pendulum",
            "params": {"inertia": 1, "mgr": 1, "a": 0, "omega": 0.02}},
  "initial": {"q": 0.5, "p": 0.5, "t": 0},
  "tau1": 0.1,
  "stop": {"max_steps": 10000},
  "scheme": {"kind": "variable-step-midpoint"}
})"},
      {"harmonic", R"({
  "model": {"builtin": "harmonic", "params": {"k": 1}},
  "initial": {"q": 1, "p": 0, "t": 0},
  "tau1": 0.1,
  "stop": {"max_steps": 100},
  "scheme": {"kind": "fixed-step-midpoint"}
})"},
      {"free", R"({
  "model": {"builtin": "free"},
  "initial": {"q": 0, "p": 1, "t": 0},
  "tau1": 0.1,
  "stop": {"max_steps": 10},
  "scheme": {"kind": "variable-step-midpoint"}
})"},
      {"quartic", R"({
  "model": {"builtin": "polynomial_potential", "params": {"c2": 0.5, "c4": 0.25}},
  "initial": {"q": 0.5, "p": 1, "t": 0},
  "tau1": 0.05,
  "stop": {"t_end": 20},
  "scheme": {"kind": "variable-step-midpoint"}
})"},
  };
  return table;
}

}  // namespace

ModelPtr make_model(const ModelSpec& spec) {
  if (!spec.builtin.empty()) return builtin_model(spec.builtin, spec.params);
  return expression_model(spec.expression, spec.dimension);
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  require_object(doc, "config");
  allow_keys(doc, "config",
             {"model", "initial", "tau1", "stop", "scheme", "solver", "output", "checks"});
  for (const char* key : {"model", "initial", "tau1", "stop"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
  }

  RunConfig cfg;
  cfg.model = parse_model(doc["model"]);
  const ModelPtr model = make_model(cfg.model);

  const json& init = doc["initial"];
  require_object(init, "initial");
  allow_keys(init, "initial", {"q", "p", "t"});
  if (!init.contains("q") || !init.contains("p")) throw ConfigError("initial needs q and p");
  cfg.initial.q = vector_field(init["q"], "initial.q");
  cfg.initial.p = vector_field(init["p"], "initial.p");
  cfg.initial.t = init.contains("t") ? number(init["t"], "initial.t") : 0.0;
  if (cfg.initial.q.size() != model->dimension() || cfg.initial.p.size() != model->dimension()) {
    throw ConfigError("initial state does not match the model dimension " +
                      std::to_string(model->dimension()));
  }

  cfg.tau1 = number(doc["tau1"], "tau1");
  if (!(cfg.tau1 > 0.0)) throw ConfigError("tau1 must be positive");

  const json& stop = doc["stop"];
  require_object(stop, "stop");
  allow_keys(stop, "stop", {"t_end", "max_steps"});
  if (stop.contains("t_end") == stop.contains("max_steps")) {
    throw ConfigError("stop needs exactly one of 't_end' and 'max_steps'");
  }
  if (stop.contains("t_end")) {
    cfg.stop.t_end = number(stop["t_end"], "stop.t_end");
    if (!(*cfg.stop.t_end > cfg.initial.t)) throw ConfigError("stop.t_end must exceed initial.t");
  } else {
    cfg.stop.max_steps = count(stop["max_steps"], "stop.max_steps");
    if (*cfg.stop.max_steps == 0) throw ConfigError("stop.max_steps must be positive");
  }

  if (doc.contains("scheme")) cfg.scheme = parse_scheme(doc["scheme"]);

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    require_object(s, "solver");
    allow_keys(s, "solver", {"tolerance", "max_iterations"});
    if (s.contains("tolerance")) cfg.stepper.solve.tolerance = number(s["tolerance"], "solver.tolerance");
    if (s.contains("max_iterations")) {
      cfg.stepper.solve.max_iterations =
          static_cast<int>(count(s["max_iterations"], "solver.max_iterations"));
    }
    try {
      cfg.stepper.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("solver: ") + e.what());
    }
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    require_object(o, "output");
    allow_keys(o, "output", {"csv"});
    if (o.contains("csv")) {
      if (!o["csv"].is_string()) throw ConfigError("output.csv must be a string");
      cfg.csv_path = o["csv"].get<std::string>();
    }
  }

  if (doc.contains("checks")) {
    const json& c = doc["checks"];
    require_object(c, "checks");
    allow_keys(c, "checks", {"samples", "steps", "seed"});
    if (c.contains("samples")) cfg.checks.samples = count(c["samples"], "checks.samples");
    if (c.contains("steps")) cfg.checks.steps = count(c["steps"], "checks.steps");
    if (c.contains("seed")) cfg.checks.seed = count(c["seed"], "checks.seed");
    if (cfg.checks.samples == 0 || cfg.checks.steps == 0) {
      throw ConfigError("checks.samples and checks.steps must be positive");
    }
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

std::string preset_config(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
  return it->second;
}

}  // namespace varistep
