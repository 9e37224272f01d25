#include "varistep/varistep.h"

#include <cmath>
#include <exception>
#include <map>
#include <new>
#include <string>

#include <json.hpp>

#include "varistep/config.hpp"
#include "varistep/csv.hpp"
#include "varistep/error.hpp"
#include "varistep/geometry.hpp"
#include "varistep/model.hpp"
#include "varistep/runner.hpp"

using namespace varistep;

struct vstep_model {
  ModelPtr model;
};

struct vstep_trajectory {
  Trajectory trajectory;
};

struct vstep_report {
  std::string json;
  bool pass = true;
};

namespace {

thread_local std::string last_error;

vstep_status status_of(ErrorCode code) {
  static_assert(static_cast<int>(ErrorCode::Io) + 1 == VSTEP_ERR_IO);
  return static_cast<vstep_status>(static_cast<int>(code) + 1);
}

vstep_status fail(vstep_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body` and converts exceptions into status codes.
template <typename Body>
vstep_status guarded(Body&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VSTEP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VSTEP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VSTEP_ERR_INTERNAL, "unknown exception");
  }
}

Vector copy_vector(const double* data, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = data[i];
  return v;
}

vstep_status finish_run(const RunOutcome& outcome, vstep_report** report) {
  *report = new vstep_report{outcome.report, outcome.pass};
  if (outcome.failure) {
    return fail(status_of(*outcome.failure), "integration failed; see the report");
  }
  return VSTEP_OK;
}

std::optional<CheckKind> check_kind(vstep_check which) {
  switch (which) {
    case VSTEP_CHECK_SYMPLECTIC: return CheckKind::Symplectic;
    case VSTEP_CHECK_COHOMOLOGY: return CheckKind::Cohomology;
    case VSTEP_CHECK_SITE_DENSITY: return CheckKind::SiteDensity;
    case VSTEP_CHECK_EL_RESIDUAL: return CheckKind::ElResidual;
    case VSTEP_CHECK_LEGENDRE: return CheckKind::Legendre;
  }
  return std::nullopt;
}

}  // namespace

extern "C" {

const char* vstep_version(void) { return "1.0.0"; }

const char* vstep_status_name(vstep_status status) {
  switch (status) {
    case VSTEP_OK: return "OK";
    case VSTEP_ERR_NULL_ARGUMENT: return "NullArgument";
    case VSTEP_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  if (status > VSTEP_OK && status <= VSTEP_ERR_IO) {
    return to_string(static_cast<ErrorCode>(status - 1)).data();
  }
  return "UnknownStatus";
}

const char* vstep_last_error(void) { return last_error.c_str(); }

vstep_status vstep_model_create_builtin(const char* name, const char* params_json,
                                        vstep_model** out) {
  return guarded([&] {
    if (!name || !out) return fail(VSTEP_ERR_NULL_ARGUMENT, "name and out are required");
    ParamMap params;
    if (params_json) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed params JSON: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("params must be a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
        params.emplace(key, value.get<double>());
      }
    }
    *out = new vstep_model{builtin_model(name, params)};
    return VSTEP_OK;
  });
}

vstep_status vstep_model_create_expression(const char* source, int dimension, vstep_model** out) {
  return guarded([&] {
    if (!source || !out) return fail(VSTEP_ERR_NULL_ARGUMENT, "source and out are required");
    *out = new vstep_model{expression_model(source, dimension)};
    return VSTEP_OK;
  });
}

void vstep_model_destroy(vstep_model* model) { delete model; }

int vstep_model_dimension(const vstep_model* model) {
  return model ? model->model->dimension() : 0;
}

vstep_status vstep_model_evaluate(const vstep_model* model, const double* q, const double* p,
                                  double t, double* value, double* grad_p, double* grad_q,
                                  double* dt) {
  return guarded([&] {
    if (!model || !q || !p) return fail(VSTEP_ERR_NULL_ARGUMENT, "model, q and p are required");
    const int n = model->model->dimension();
    const PhasePoint x{copy_vector(q, n), copy_vector(p, n), t};
    unsigned request = 0;
    if (value) request |= partial::value;
    if (grad_p) request |= partial::grad_p;
    if (grad_q) request |= partial::grad_q;
    if (dt) request |= partial::time;
    const HamiltonianEval h = model->model->evaluate(x, request);
    if (value) *value = h.value;
    if (dt) *dt = h.time;
    for (int i = 0; i < n; ++i) {
      if (grad_p) grad_p[i] = h.grad_p[i];
      if (grad_q) grad_q[i] = h.grad_q[i];
    }
    return VSTEP_OK;
  });
}

vstep_status vstep_integrate(const vstep_model* model, vstep_scheme scheme, double alpha,
                             double beta, const double* q0, const double* p0, double t0,
                             double tau, double t_end, size_t max_steps, vstep_trajectory** out) {
  return guarded([&] {
    if (!model || !q0 || !p0 || !out) {
      return fail(VSTEP_ERR_NULL_ARGUMENT, "model, q0, p0 and out are required");
    }
    *out = nullptr;
    SchemeChoice choice;
    switch (scheme) {
      case VSTEP_SCHEME_VARIABLE_STEP_MIDPOINT: choice.kind = SchemeKind::VariableStepMidpoint; break;
      case VSTEP_SCHEME_FIXED_STEP_MIDPOINT: choice.kind = SchemeKind::FixedStepMidpoint; break;
      case VSTEP_SCHEME_ALPHA_BETA:
        choice.kind = SchemeKind::AlphaBeta;
        choice.alpha = alpha;
        choice.beta = beta;
        break;
      default: throw InvalidInput("unknown scheme");
    }
    StopRule stop;
    if (t_end > t0) stop.t_end = t_end;
    if (max_steps > 0) stop.max_steps = max_steps;
    if (stop.t_end.has_value() == stop.max_steps.has_value()) {
      throw InvalidInput("exactly one of t_end and max_steps must be active");
    }
    const int n = model->model->dimension();
    const PhasePoint x0{copy_vector(q0, n), copy_vector(p0, n), t0};
    IntegrationResult r = integrate_scheme(model->model, choice, x0, tau, stop, StepperSettings{});
    *out = new vstep_trajectory{std::move(r.trajectory)};
    if (r.failure) return fail(status_of(r.failure->code), r.failure->message);
    return VSTEP_OK;
  });
}

void vstep_trajectory_destroy(vstep_trajectory* trajectory) { delete trajectory; }

size_t vstep_trajectory_size(const vstep_trajectory* trajectory) {
  return trajectory ? trajectory->trajectory.size() : 0;
}

vstep_status vstep_trajectory_node(const vstep_trajectory* trajectory, size_t k, double* t,
                                   double* q, double* p) {
  return guarded([&] {
    if (!trajectory) return fail(VSTEP_ERR_NULL_ARGUMENT, "trajectory is required");
    const Trajectory& tr = trajectory->trajectory;
    if (k >= tr.size()) throw InvalidRange("node index out of range");
    if (t) *t = tr.t[k];
    for (int i = 0; i < tr.dimension(); ++i) {
      if (q) q[i] = tr.q[k][i];
      if (p) p[i] = tr.p[k][i];
    }
    return VSTEP_OK;
  });
}

vstep_status vstep_trajectory_step(const vstep_trajectory* trajectory, size_t k, double* tau,
                                   double* e_mid, double* energy_residual, int* newton_iterations,
                                   unsigned* flags) {
  return guarded([&] {
    if (!trajectory) return fail(VSTEP_ERR_NULL_ARGUMENT, "trajectory is required");
    const Trajectory& tr = trajectory->trajectory;
    if (k >= tr.steps.size()) throw InvalidRange("interval index out of range");
    const StepState& s = tr.steps[k];
    if (tau) *tau = s.tau;
    if (e_mid) *e_mid = s.e_mid;
    if (energy_residual) *energy_residual = s.energy_residual;
    if (newton_iterations) *newton_iterations = s.newton_iterations;
    if (flags) *flags = s.flags;
    return VSTEP_OK;
  });
}

vstep_status vstep_trajectory_write_csv(const vstep_trajectory* trajectory, const char* path) {
  return guarded([&] {
    if (!trajectory || !path) return fail(VSTEP_ERR_NULL_ARGUMENT, "trajectory and path are required");
    write_trajectory_csv(trajectory->trajectory, std::string(path));
    return VSTEP_OK;
  });
}

vstep_status vstep_run_integrate(const char* config_json, const char* csv_path,
                                 vstep_report** report) {
  return guarded([&] {
    if (!config_json || !report) return fail(VSTEP_ERR_NULL_ARGUMENT, "config and report are required");
    *report = nullptr;
    const RunConfig cfg = parse_config(config_json);
    return finish_run(run_integrate(cfg, csv_path ? csv_path : ""), report);
  });
}

vstep_status vstep_run_check(const char* config_json, vstep_check which, const char* out_path,
                             vstep_report** report) {
  return guarded([&] {
    if (!config_json || !report) return fail(VSTEP_ERR_NULL_ARGUMENT, "config and report are required");
    *report = nullptr;
    const auto kind = check_kind(which);
    if (!kind) throw InvalidInput("unknown check");
    const RunConfig cfg = parse_config(config_json);
    return finish_run(run_check(cfg, *kind, out_path ? out_path : ""), report);
  });
}

const char* vstep_report_json(const vstep_report* report) {
  return report ? report->json.c_str() : "";
}

int vstep_report_passed(const vstep_report* report) { return report && report->pass ? 1 : 0; }

void vstep_report_destroy(vstep_report* report) { delete report; }

const char* vstep_list_presets(void) {
  static const std::string joined = [] {
    std::string s;
    for (const std::string& name : preset_names()) {
      if (!s.empty()) s += '\n';
      s += name;
    }
    return s;
  }();
  return joined.c_str();
}

vstep_status vstep_preset_config(const char* name, const char** config_json) {
  return guarded([&] {
    if (!name || !config_json) return fail(VSTEP_ERR_NULL_ARGUMENT, "name and out are required");
    static const auto cache = [] {
      std::map<std::string, std::string, std::less<>> m;
      for (const std::string& n : preset_names()) m.emplace(n, preset_config(n));
      return m;
    }();
    const auto it = cache.find(std::string_view(name));
    if (it == cache.end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
    *config_json = it->second.c_str();
    return VSTEP_OK;
  });
}

}  // extern "C"
