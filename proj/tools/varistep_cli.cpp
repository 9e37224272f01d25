// Command-line front end. Talks to the library only through varistep.h.
//
// Exit codes: 0 success, 1 a check ran but an asserted invariant failed,
// 2 configuration/parse/name errors (nothing written), 3 integration
// failure (partial CSV plus JSON diagnostic on stdout), 4 check not
// applicable to the configured model or scheme.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "varistep/varistep.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kIntegration = 3, kCapability = 4 };

struct Options {
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> newton_tol;
  std::optional<int> newton_max_iter;
  std::optional<std::uint64_t> seed;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(vstep_status status) {
  switch (status) {
    case VSTEP_OK:
      return kOk;
    case VSTEP_ERR_CAPABILITY:
      return kCapability;
    case VSTEP_ERR_INVALID_GRID:
    case VSTEP_ERR_INVALID_RANGE:
    case VSTEP_ERR_INVALID_INPUT:
    case VSTEP_ERR_CONFIG:
    case VSTEP_ERR_PARSE:
    case VSTEP_ERR_NAME:
    case VSTEP_ERR_IO:
    case VSTEP_ERR_NULL_ARGUMENT:
      return kConfig;
    default:
      return kIntegration;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads the config document and folds the command-line overrides into it.
json load_config(const Options& o) {
  if (o.config_path.empty() == o.preset.empty()) {
    throw UsageError("give exactly one of --config and --preset");
  }
  std::string text;
  if (!o.preset.empty()) {
    const char* preset = nullptr;
    if (vstep_preset_config(o.preset.c_str(), &preset) != VSTEP_OK) {
      throw UsageError(vstep_last_error());
    }
    text = preset;
  } else {
    text = read_file(o.config_path);
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");

  if (o.alpha || o.beta) {
    const double alpha = o.alpha ? *o.alpha : 1.0 - *o.beta;
    const double beta = o.beta ? *o.beta : 1.0 - alpha;
    doc["scheme"] = {{"kind", "alpha-beta"}, {"alpha", alpha}, {"beta", beta}};
  }
  if (o.newton_tol) doc["solver"]["tolerance"] = *o.newton_tol;
  if (o.newton_max_iter) doc["solver"]["max_iterations"] = *o.newton_max_iter;
  if (o.seed) doc["checks"]["seed"] = *o.seed;
  return doc;
}

int report_error(vstep_status status) {
  std::cerr << "varistep: " << vstep_status_name(status) << ": " << vstep_last_error() << '\n';
  return exit_code(status);
}

int run_integrate(const Options& o) {
  json doc = load_config(o);
  if (!o.out.empty()) doc["output"]["csv"] = o.out;
  if (!doc.contains("output") || !doc["output"].contains("csv")) {
    throw UsageError("no output path: pass --out or set output.csv");
  }
  vstep_report* report = nullptr;
  const vstep_status status = vstep_run_integrate(doc.dump().c_str(), nullptr, &report);
  if (report) {
    std::cout << vstep_report_json(report) << '\n';
    vstep_report_destroy(report);
  }
  return status == VSTEP_OK ? kOk : report_error(status);
}

int run_check(const Options& o, vstep_check which) {
  const json doc = load_config(o);
  const bool csv_out = which == VSTEP_CHECK_SITE_DENSITY;
  vstep_report* report = nullptr;
  const vstep_status status = vstep_run_check(
      doc.dump().c_str(), which, csv_out && !o.out.empty() ? o.out.c_str() : nullptr, &report);
  if (!report) return report_error(status);
  const std::string text = vstep_report_json(report);
  const bool passed = vstep_report_passed(report) != 0;
  vstep_report_destroy(report);
  std::cout << text << '\n';
  if (!csv_out && !o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
    file << text << '\n';
    if (!file) {
      std::cerr << "varistep: cannot write '" << o.out << "'\n";
      return kConfig;
    }
  }
  if (status != VSTEP_OK) return report_error(status);
  return passed ? kOk : kCheckFailed;
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--preset", o.preset, "named preset (see list-presets)");
  cmd->add_option("--out", o.out, "output path");
  cmd->add_option("--alpha", o.alpha, "alpha of the alpha-beta scheme");
  cmd->add_option("--beta", o.beta, "beta of the alpha-beta scheme");
  cmd->add_option("--newton-tol", o.newton_tol, "Newton residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--newton-max-iter", o.newton_max_iter, "Newton iteration cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed for randomized checks");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-step energy-conserving symplectic integrator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vstep_version()));

  Options o;
  auto* integrate = app.add_subcommand("integrate", "integrate a configured run to CSV");
  add_run_options(integrate, o);

  const std::pair<const char*, vstep_check> checks[] = {
      {"check-symplectic", VSTEP_CHECK_SYMPLECTIC},
      {"check-cohomology", VSTEP_CHECK_COHOMOLOGY},
      {"site-density", VSTEP_CHECK_SITE_DENSITY},
      {"el-residual", VSTEP_CHECK_EL_RESIDUAL},
      {"legendre", VSTEP_CHECK_LEGENDRE},
  };
  std::vector<std::pair<CLI::App*, vstep_check>> check_cmds;
  for (const auto& [name, which] : checks) {
    auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " check");
    add_run_options(cmd, o);
    check_cmds.emplace_back(cmd, which);
  }
  auto* list = app.add_subcommand("list-presets", "print the preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (list->parsed()) {
      std::cout << vstep_list_presets() << '\n';
      return kOk;
    }
    if (integrate->parsed()) return run_integrate(o);
    for (const auto& [cmd, which] : check_cmds) {
      if (cmd->parsed()) return run_check(o, which);
    }
  } catch (const UsageError& e) {
    std::cerr << "varistep: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
