#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "whf/dynamics.hpp"
#include "whf/functionals.hpp"
#include "whf/grid.hpp"
#include "whf/particles.hpp"

namespace whf {

using Json = nlohmann::ordered_json;

/// Analytic field preset.
///   zero
///   constant: value
///   cosine:   offset + amplitude * cos(2 pi mode . x)
///   sine:     offset + amplitude * sin(2 pi mode . x)
///   file:     ScalarField CSV at `path`
struct FieldSpec {
  std::string preset = "zero";
  double value = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
  std::array<int, 2> mode{1, 0};
  std::string path;

  ScalarField sample(const Grid& grid) const;
  /// Closed-form gradient, if the preset has one.
  std::optional<std::function<std::array<double, 2>(std::array<double, 2>)>> gradient() const;
  /// max |staggered gradient| of the sampled field.
  double max_gradient(const Grid& grid) const;
};

/// One energy term. `field` is the potential V (linear) or the kernel W as a
/// function of the offset x - y (interaction). Fisher terms have no field.
struct EnergyTermSpec {
  std::string kind = "linear";  // linear | interaction | fisher
  double coefficient = 1.0;
  FieldSpec field;
  std::string method = "convolution";  // interaction only: direct | convolution
};

struct OracleSpec {
  std::string kind = "none";  // none | particles | schrodinger | bridge
  std::size_t particles = 0;
  std::uint64_t seed = 1;
  bool smooth = true;
};

struct ScenarioConfig {
  std::string name;  // geodesic | linear-vlasov | nonlinear-vlasov | schrodinger | bridge
  int dim = 1;
  int n = 64;
  double dt = 1e-3;
  double T = 1.0;
  int snapshot_stride = 0;  // 0: initial and final only
  std::vector<EnergyTermSpec> energy;
  FieldSpec rho;
  FieldSpec phi;
  FieldSpec eta;       // bridge only, at t = 0
  FieldSpec eta_star;  // bridge only, at t = T
  std::string integrator = "midpoint";
  MidpointOptions midpoint{};
  double solver_tol = 1e-12;
  OracleSpec oracle;
  std::string output_dir;

  int steps() const;
};

inline constexpr int kSummarySchemaVersion = 1;

const std::vector<std::string>& scenario_names();
/// Built-in defaults; identical to the files under presets/.
ScenarioConfig preset(const std::string& name);

Json to_json(const ScenarioConfig& c);
/// Strict parser: unknown or ill-typed keys throw ErrorKind::Config naming the
/// dotted key.
ScenarioConfig config_from_json(const Json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Sets a dotted key (`time.dt`, `energy.0.coefficient`) from `key=value`.
/// The value is parsed as JSON, falling back to a plain string. Throws
/// ErrorKind::Config naming the key if its parent does not exist.
void apply_override(Json& j, const std::string& assignment);

/// Empty iff the config is runnable. Each entry starts with the field name.
std::vector<std::string> validate(const ScenarioConfig& c);

Grid make_grid(const ScenarioConfig& c);
EnergyFunctional build_energy(const ScenarioConfig& c);
/// Normalized rho and zero-mean phi.
DualState initial_state(const ScenarioConfig& c);
/// Particle force for the configured energy: closed-form or grid gradient for
/// linear terms, the mean-field estimator for interaction terms.
Force particle_force(const ScenarioConfig& c);

struct RunOptions {
  bool write_files = true;
  bool quiet = true;
};

struct RunReport {
  Json summary;
  Trajectory trajectory;
  std::vector<std::filesystem::path> files;
};

/// Validates, integrates (or, for the bridge, transforms the heat pair),
/// runs the oracle and writes diagnostics.csv, snapshots and summary.json into
/// output_dir. Nothing is written when validation fails.
RunReport run(const ScenarioConfig& c, const RunOptions& options = {});

/// Summary JSON without the wall-clock field, for reproducibility checks.
Json deterministic_part(Json summary);

}  // namespace whf
