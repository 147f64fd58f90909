// Command-line driver: run scenarios, verification suites, refinement sweeps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "whf/error.hpp"
#include "whf/scenarios.hpp"
#include "whf/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::string config_flag;
  std::vector<std::string> overrides;
  std::string out;
  long long seed = -1;
  bool quiet = false;
};

// A path to a JSON file or the name of a built-in preset.
whf::Json resolve_config(const Common& o) {
  const std::string& ref = o.config_flag.empty() ? o.config : o.config_flag;
  if (ref.empty()) throw whf::Error(whf::ErrorKind::Config, "no config given (path or preset name)");
  whf::Json j;
  if (std::filesystem::is_regular_file(ref)) {
    j = whf::to_json(whf::load_config(ref));
  } else {
    const auto& names = whf::scenario_names();
    if (std::find(names.begin(), names.end(), ref) == names.end()) {
      throw whf::Error(whf::ErrorKind::Config, "'" + ref + "' is neither a config file nor a preset name");
    }
    j = whf::to_json(whf::preset(ref));
  }
  for (const auto& s : o.overrides) whf::apply_override(j, s);
  if (o.seed >= 0) whf::apply_override(j, "oracle.seed=" + std::to_string(o.seed));
  if (!o.out.empty()) j["output_dir"] = o.out;
  return j;
}

whf::ScenarioConfig checked_config(const whf::Json& j) {
  whf::ScenarioConfig c = whf::config_from_json(j);
  const auto violations = whf::validate(c);
  if (!violations.empty()) {
    std::string msg = "invalid config:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw whf::Error(whf::ErrorKind::Config, msg);
  }
  return c;
}

int cmd_run(const Common& o) {
  const whf::ScenarioConfig c = checked_config(resolve_config(o));
  const whf::RunReport r = whf::run(c, {true, o.quiet});
  if (!o.quiet) std::cout << r.summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_config(const Common& o) {
  std::cout << whf::to_json(checked_config(resolve_config(o))).dump(2) << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& profile, const std::vector<std::string>& only, bool quiet) {
  const whf::Profile p = profile == "full" ? whf::Profile::Full : whf::Profile::Quick;
  int failed = 0;
  whf::run_checks(p, only, [&](const whf::CheckResult& r) {
    if (!r.passed) ++failed;
    if (!quiet || !r.passed) std::cout << whf::format_result(r) << std::endl;
  });
  if (!quiet) std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << "\n";
  return failed == 0 ? kExitOk : kExitFailed;
}

double metric(const whf::Json& s, const char* key) {
  const whf::Json* v = &s;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (!v->contains(part)) return std::nan("");
    v = &(*v)[part];
  }
  return v->is_number() ? v->get<double>() : std::nan("");
}

int cmd_sweep(const Common& o, const std::string& param, const std::vector<std::string>& values) {
  if (param.empty() || values.size() < 2) {
    throw whf::Error(whf::ErrorKind::Config, "sweep needs --param and at least two --values");
  }
  const char* keys[] = {"hamiltonian_drift", "mass_error", "primal_residual_mid", "oracle_l1",
                        "oracle.continuity_residual", "oracle.hj_residual"};
  std::vector<double> xs;
  std::vector<std::vector<double>> table;
  std::vector<whf::ScenarioConfig> configs;
  for (const auto& v : values) {
    whf::Json j = resolve_config(o);
    whf::apply_override(j, param + "=" + v);
    try {
      xs.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw whf::Error(whf::ErrorKind::Config, param + ": sweep value '" + v + "' is not a number");
    }
    if (!o.out.empty()) j["output_dir"] = (std::filesystem::path(o.out) / (param + "=" + v)).string();
    configs.push_back(checked_config(j));
  }
  for (const auto& c : configs) {
    const whf::RunReport r = whf::run(c, {!o.out.empty(), o.quiet});
    std::vector<double> row;
    for (const char* k : keys) row.push_back(metric(r.summary, k));
    table.push_back(std::move(row));
  }

  std::printf("%-14s", param.c_str());
  for (const char* k : keys) std::printf(" %26s", k);
  std::printf("\n");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::printf("%-14.6g", xs[i]);
    for (double m : table[i]) {
      if (std::isnan(m)) {
        std::printf(" %26s", "-");
      } else {
        std::printf(" %26.3e", m);
      }
    }
    std::printf("\n");
  }
  std::printf("observed orders (log ratio of metric / log ratio of %s):\n", param.c_str());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    std::printf("%-6.3g->%-7.3g", xs[i], xs[i + 1]);
    for (std::size_t k = 0; k < std::size(keys); ++k) {
      const double a = table[i][k], b = table[i + 1][k];
      if (std::isnan(a) || std::isnan(b) || a <= 0.0 || b <= 0.0) {
        std::printf(" %26s", "-");
      } else {
        std::printf(" %26.3f", std::log(a / b) / std::log(xs[i] / xs[i + 1]));
      }
    }
    std::printf("\n");
  }
  return kExitOk;
}

int cmd_info() {
  for (const auto& name : whf::scenario_names()) {
    const whf::ScenarioConfig c = whf::preset(name);
    std::string energy;
    for (const auto& t : c.energy) {
      if (!energy.empty()) energy += " + ";
      std::ostringstream ss;
      ss << t.coefficient << "*" << t.kind;
      energy += ss.str();
    }
    std::printf("%-17s d=%d n=%-4d dt=%-8g T=%-5g integrator=%-8s energy=%s oracle=%s\n", name.c_str(), c.dim, c.n,
                c.dt, c.T, name == "bridge" ? "heat" : c.integrator.c_str(), energy.empty() ? "0" : energy.c_str(),
                c.oracle.kind.c_str());
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& o, bool positional) {
  if (positional) cmd->add_option("scenario", o.config, "Config file or preset name");
  cmd->add_option("--config", o.config_flag, "Config file or preset name");
  cmd->add_option("--set", o.overrides, "Override a dotted key, key=value (repeatable)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Particle oracle seed")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", o.quiet, "Only report errors and failures");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein Hamiltonian flow solver and oracles"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run one scenario");
  add_common(run, run_opts, true);

  Common config_opts;
  auto* config = app.add_subcommand("config", "Print a resolved config as JSON");
  add_common(config, config_opts, true);

  std::string profile = "quick";
  std::vector<std::string> only;
  bool verify_quiet = false;
  auto* verify = app.add_subcommand("verify", "Run the invariant and acceptance checks");
  verify->add_option("--profile", profile, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--only", only, "Check ids to run (e.g. 1,5,M2)")->delimiter(',');
  verify->add_flag("--quiet", verify_quiet, "Only print failures");

  Common sweep_opts;
  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Refinement study over one parameter");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--param", param, "Dotted key to vary, e.g. time.dt")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();

  app.add_subcommand("info", "List preset scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (config->parsed()) return cmd_config(config_opts);
    if (verify->parsed()) return cmd_verify(profile, only, verify_quiet);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, param, values);
    return cmd_info();
  } catch (const whf::Error& e) {
    std::cerr << "error (" << whf::to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == whf::ErrorKind::Config ? kExitUsage : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}
