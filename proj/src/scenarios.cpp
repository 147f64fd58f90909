#include "whf/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "whf/error.hpp"
#include "whf/io.hpp"
#include "whf/quantum.hpp"

namespace whf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported by their dotted path.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(key_path(key), "missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) fail(key_path(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number_integer()) fail(key_path(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) fail(key_path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_boolean()) fail(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(key_path(key), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::Config, where + ": " + what);
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FieldSpec field_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  FieldSpec f;
  f.preset = r.string("preset", "zero");
  if (f.preset == "constant") {
    f.value = r.number("value");
  } else if (f.preset == "cosine" || f.preset == "sine") {
    f.offset = r.number("offset", 0.0);
    f.amplitude = r.number("amplitude");
    if (r.has("mode")) {
      const Json& m = r.at("mode");
      if (m.is_number_integer()) {
        f.mode = {m.get<int>(), 0};
      } else if (m.is_array() && !m.empty() && m.size() <= 2 &&
                 std::all_of(m.begin(), m.end(), [](const Json& v) { return v.is_number_integer(); })) {
        f.mode = {m[0].get<int>(), m.size() == 2 ? m[1].get<int>() : 0};
      } else {
        Reader::fail(r.key_path("mode"), "expected an integer or an array of one or two integers");
      }
    }
  } else if (f.preset == "file") {
    f.path = r.string("path");
  } else if (f.preset != "zero") {
    Reader::fail(r.key_path("preset"), "unknown preset '" + f.preset + "' (zero, constant, cosine, sine, file)");
  }
  r.finish();
  return f;
}

Json field_to_json(const FieldSpec& f, int dim) {
  Json j;
  j["preset"] = f.preset;
  if (f.preset == "constant") {
    j["value"] = f.value;
  } else if (f.preset == "cosine" || f.preset == "sine") {
    j["offset"] = f.offset;
    j["amplitude"] = f.amplitude;
    j["mode"] = dim == 1 ? Json(f.mode[0]) : Json::array({f.mode[0], f.mode[1]});
  } else if (f.preset == "file") {
    j["path"] = f.path;
  }
  return j;
}

FieldSpec cosine(double offset, double amplitude, int mode = 1) {
  FieldSpec f;
  f.preset = "cosine";
  f.offset = offset;
  f.amplitude = amplitude;
  f.mode = {mode, 0};
  return f;
}

FieldSpec sine(double offset, double amplitude, int mode = 1) {
  FieldSpec f = cosine(offset, amplitude, mode);
  f.preset = "sine";
  return f;
}

std::string snapshot_name(const char* stem, int step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06d.csv", stem, step);
  return buf;
}

Json null_if_nan(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- FieldSpec

ScalarField FieldSpec::sample(const Grid& grid) const {
  if (preset == "zero") return ScalarField(grid);
  if (preset == "constant") return ScalarField(grid, value);
  if (preset == "cosine" || preset == "sine") {
    const bool cos = preset == "cosine";
    return ScalarField::from_function(grid, [&](std::array<double, 2> x) {
      const double arg = kTwoPi * (mode[0] * x[0] + (grid.dim() == 2 ? mode[1] * x[1] : 0.0));
      return offset + amplitude * (cos ? std::cos(arg) : std::sin(arg));
    });
  }
  if (preset == "file") {
    ScalarField f = read_field_csv(std::filesystem::path(path));
    if (!(f.grid == grid)) {
      throw Error(ErrorKind::Config, "field file " + path + " has a different grid than the scenario");
    }
    return f;
  }
  throw Error(ErrorKind::Config, "unknown field preset '" + preset + "'");
}

std::optional<std::function<std::array<double, 2>(std::array<double, 2>)>> FieldSpec::gradient() const {
  if (preset == "zero" || preset == "constant") {
    return [](std::array<double, 2>) { return std::array<double, 2>{0.0, 0.0}; };
  }
  if (preset == "cosine" || preset == "sine") {
    const bool cos = preset == "cosine";
    const auto k = mode;
    const double a = amplitude;
    return [cos, k, a](std::array<double, 2> x) {
      const double arg = kTwoPi * (k[0] * x[0] + k[1] * x[1]);
      const double d = cos ? -a * std::sin(arg) : a * std::cos(arg);
      return std::array<double, 2>{kTwoPi * k[0] * d, kTwoPi * k[1] * d};
    };
  }
  return std::nullopt;
}

double FieldSpec::max_gradient(const Grid& grid) const {
  double m = 0.0;
  const VectorField g = whf::gradient(sample(grid));
  for (int a = 0; a < grid.dim(); ++a) {
    for (double v : g.components[a]) m = std::max(m, std::abs(v));
  }
  return m;
}

// ------------------------------------------------------------------ config

int ScenarioConfig::steps() const {
  if (!(dt > 0.0) || !(T > 0.0)) return 0;
  return static_cast<int>(std::lround(T / dt));
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"geodesic", "linear-vlasov", "nonlinear-vlasov", "schrodinger",
                                              "bridge"};
  return names;
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.dim = 1;
  c.n = 64;
  c.rho = cosine(1.0, 0.5);
  c.output_dir = "out/" + name;
  if (name == "geodesic") {
    c.dt = 1e-3;
    c.T = 1.0;
    c.snapshot_stride = 100;
    c.phi = sine(0.0, 0.01);
  } else if (name == "linear-vlasov") {
    c.dt = 1e-3;
    c.T = 0.5;
    c.snapshot_stride = 100;
    c.energy.push_back({"linear", 1.0, cosine(0.0, -1.0 / (kTwoPi * kTwoPi)), "convolution"});
    c.oracle = {"particles", 100000, 1, false};
  } else if (name == "nonlinear-vlasov") {
    c.dt = 1e-3;
    c.T = 0.3;
    c.snapshot_stride = 100;
    c.energy.push_back({"interaction", 1.0, cosine(0.0, 0.2), "convolution"});
    c.oracle = {"particles", 100000, 1, true};
  } else if (name == "schrodinger") {
    c.dt = 5e-5;
    c.T = 0.2;
    c.snapshot_stride = 1000;
    c.integrator = "rk4";
    c.energy.push_back({"linear", 1.0, cosine(0.0, 0.1), "convolution"});
    c.energy.push_back({"fisher", 0.125, FieldSpec{}, "convolution"});
    c.oracle.kind = "schrodinger";
  } else if (name == "bridge") {
    c.dt = 1e-3;
    c.T = 0.2;
    c.snapshot_stride = 50;
    c.rho = FieldSpec{};
    c.eta = cosine(1.0, 0.5);
    c.eta_star = sine(1.0, 0.4);
    c.energy.push_back({"fisher", -0.125, FieldSpec{}, "convolution"});
    c.oracle.kind = "bridge";
  } else {
    throw Error(ErrorKind::Config, "unknown scenario '" + name + "'");
  }
  return c;
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["grid"] = {{"dim", c.dim}, {"n", c.n}};
  j["time"] = {{"dt", c.dt}, {"T", c.T}, {"snapshot_stride", c.snapshot_stride}};
  Json energy = Json::array();
  for (const auto& t : c.energy) {
    Json e;
    e["kind"] = t.kind;
    e["coefficient"] = t.coefficient;
    if (t.kind != "fisher") e["field"] = field_to_json(t.field, c.dim);
    if (t.kind == "interaction") e["method"] = t.method;
    energy.push_back(std::move(e));
  }
  j["energy"] = std::move(energy);
  Json initial;
  if (c.name == "bridge") {
    initial["eta"] = field_to_json(c.eta, c.dim);
    initial["eta_star"] = field_to_json(c.eta_star, c.dim);
  } else {
    initial["rho"] = field_to_json(c.rho, c.dim);
    initial["phi"] = field_to_json(c.phi, c.dim);
  }
  j["initial"] = std::move(initial);
  j["integrator"] = {{"method", c.integrator},
                     {"tol", c.midpoint.tol},
                     {"max_iters", c.midpoint.max_iters},
                     {"max_halvings", c.midpoint.max_halvings},
                     {"solver_tol", c.solver_tol}};
  Json oracle{{"kind", c.oracle.kind}};
  if (c.oracle.kind == "particles") {
    oracle["N"] = c.oracle.particles;
    oracle["seed"] = c.oracle.seed;
    oracle["smooth"] = c.oracle.smooth;
  }
  j["oracle"] = std::move(oracle);
  j["output_dir"] = c.output_dir;
  return j;
}

ScenarioConfig config_from_json(const Json& j) {
  Reader r(j, "");
  ScenarioConfig c;
  c.name = r.string("name");
  {
    Reader g(r.at("grid"), "grid");
    c.dim = static_cast<int>(g.integer("dim", 1));
    c.n = static_cast<int>(g.integer("n"));
    g.finish();
  }
  {
    Reader t(r.at("time"), "time");
    c.dt = t.number("dt");
    c.T = t.number("T");
    c.snapshot_stride = static_cast<int>(t.integer("snapshot_stride", 0));
    t.finish();
  }
  if (r.has("energy")) {
    const Json& terms = r.at("energy");
    if (!terms.is_array()) Reader::fail("energy", "expected an array of terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string path = "energy." + std::to_string(i);
      Reader e(terms[i], path);
      EnergyTermSpec t;
      t.kind = e.string("kind");
      t.coefficient = e.number("coefficient", 1.0);
      if (t.kind == "linear" || t.kind == "interaction") {
        t.field = field_from_json(e.at("field"), path + ".field");
        if (t.kind == "interaction") t.method = e.string("method", "convolution");
      } else if (t.kind != "fisher") {
        Reader::fail(path + ".kind", "unknown energy kind '" + t.kind + "' (linear, interaction, fisher)");
      }
      e.finish();
      c.energy.push_back(std::move(t));
    }
  }
  if (r.has("initial")) {
    Reader i(r.at("initial"), "initial");
    if (i.has("rho")) c.rho = field_from_json(i.at("rho"), "initial.rho");
    if (i.has("phi")) c.phi = field_from_json(i.at("phi"), "initial.phi");
    if (i.has("eta")) c.eta = field_from_json(i.at("eta"), "initial.eta");
    if (i.has("eta_star")) c.eta_star = field_from_json(i.at("eta_star"), "initial.eta_star");
    i.finish();
  }
  if (r.has("integrator")) {
    Reader i(r.at("integrator"), "integrator");
    c.integrator = i.string("method", c.integrator);
    c.midpoint.tol = i.number("tol", c.midpoint.tol);
    c.midpoint.max_iters = static_cast<int>(i.integer("max_iters", c.midpoint.max_iters));
    c.midpoint.max_halvings = static_cast<int>(i.integer("max_halvings", c.midpoint.max_halvings));
    c.solver_tol = i.number("solver_tol", c.solver_tol);
    i.finish();
  }
  if (r.has("oracle")) {
    Reader o(r.at("oracle"), "oracle");
    c.oracle.kind = o.string("kind", "none");
    const long long n = o.integer("N", 0);
    if (n < 0) Reader::fail("oracle.N", "must be non-negative");
    c.oracle.particles = static_cast<std::size_t>(n);
    const long long seed = o.integer("seed", 1);
    if (seed < 0) Reader::fail("oracle.seed", "must be non-negative");
    c.oracle.seed = static_cast<std::uint64_t>(seed);
    c.oracle.smooth = o.boolean("smooth", true);
    o.finish();
  }
  c.output_dir = r.string("output_dir", "");
  r.finish();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::Config, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  Json* node = &j;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(p, &used);
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "override key '" + key + "': '" + p + "' is not an array index");
      }
      if (idx >= node->size()) throw Error(ErrorKind::Config, "override key '" + key + "': index out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!last && !node->contains(p)) {
        throw Error(ErrorKind::Config, "override key '" + key + "': no such field '" + p + "'");
      }
      node = &(*node)[p];
    } else {
      throw Error(ErrorKind::Config, "override key '" + key + "': cannot descend into a value");
    }
  }
  *node = std::move(value);
}

// -------------------------------------------------------------- validation

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> v;
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.name) == names.end()) {
    v.push_back("name: unknown scenario '" + c.name + "'");
  }
  const bool bridge = c.name == "bridge";
  bool grid_ok = true;
  if (c.dim != 1 && c.dim != 2) {
    v.push_back("grid.dim: must be 1 or 2");
    grid_ok = false;
  }
  if (c.n < Grid::kMinCells) {
    v.push_back("grid.n: minimum grid size is " + std::to_string(Grid::kMinCells) + " cells per axis, got " +
                std::to_string(c.n));
    grid_ok = false;
  }
  bool time_ok = true;
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) {
    v.push_back("time.dt: must be positive and finite");
    time_ok = false;
  }
  if (!(c.T > 0.0) || !std::isfinite(c.T)) {
    v.push_back("time.T: must be positive and finite");
    time_ok = false;
  }
  if (time_ok) {
    const int steps = c.steps();
    if (steps < 1 || std::abs(steps * c.dt - c.T) > 1e-9 * c.T) {
      v.push_back("time.T: must be a positive integer multiple of time.dt");
    }
  }
  if (c.snapshot_stride < 0) v.push_back("time.snapshot_stride: must be non-negative");
  if (c.integrator != "rk4" && c.integrator != "midpoint") {
    v.push_back("integrator.method: must be rk4 or midpoint");
  }
  if (!(c.midpoint.tol > 0.0)) v.push_back("integrator.tol: must be positive");
  if (c.midpoint.max_iters < 1) v.push_back("integrator.max_iters: must be at least 1");
  if (c.midpoint.max_halvings < 0) v.push_back("integrator.max_halvings: must be non-negative");
  if (!(c.solver_tol > 0.0)) v.push_back("integrator.solver_tol: must be positive");

  int linear = 0, interaction = 0, fisher = 0;
  double fisher_coefficient = 0.0;
  for (std::size_t i = 0; i < c.energy.size(); ++i) {
    const auto& t = c.energy[i];
    const std::string path = "energy." + std::to_string(i);
    if (!std::isfinite(t.coefficient)) v.push_back(path + ".coefficient: must be finite");
    if (t.kind == "linear") {
      ++linear;
    } else if (t.kind == "interaction") {
      ++interaction;
      if (t.method != "direct" && t.method != "convolution") {
        v.push_back(path + ".method: must be direct or convolution");
      }
    } else if (t.kind == "fisher") {
      ++fisher;
      fisher_coefficient += t.coefficient;
      if (!bridge && t.coefficient < 0.0) {
        v.push_back(path + ".coefficient: a negative Fisher coefficient makes the initial-value problem ill-posed; "
                           "only the bridge scenario accepts it");
      }
    } else {
      v.push_back(path + ".kind: unknown energy kind '" + t.kind + "'");
    }
    if (grid_ok && t.kind != "fisher") {
      try {
        const Grid g = make_grid(c);
        const ScalarField f = t.field.sample(g);
        require_finite(f, "energy field");
        if (t.kind == "interaction") Interaction(f, InteractionMethod::Direct);
      } catch (const Error& e) {
        v.push_back(path + ".field: " + e.what());
      }
    }
  }

  if (c.name == "geodesic" && !c.energy.empty()) v.push_back("energy: geodesic requires an empty energy (F = 0)");
  if (c.name == "linear-vlasov" && (linear == 0 || interaction + fisher > 0)) {
    v.push_back("energy: linear-vlasov requires one or more linear terms and nothing else");
  }
  if (c.name == "nonlinear-vlasov" && (interaction == 0 || fisher > 0)) {
    v.push_back("energy: nonlinear-vlasov requires an interaction term and no Fisher term");
  }
  if (c.name == "schrodinger" && (fisher != 1 || fisher_coefficient != 0.125 || interaction > 0)) {
    v.push_back("energy: schrodinger requires exactly one Fisher term with coefficient +1/8 plus linear terms");
  }
  if (bridge && (fisher != 1 || fisher_coefficient != -0.125 || linear + interaction > 0)) {
    v.push_back("energy: bridge requires exactly one Fisher term with coefficient -1/8 and nothing else");
  }

  if (grid_ok) {
    const Grid g = make_grid(c);
    auto check_field = [&](const FieldSpec& f, const std::string& path, bool positive) {
      if ((f.preset == "cosine" || f.preset == "sine") &&
          (std::abs(f.mode[0]) >= c.n / 2 || std::abs(f.mode[1]) >= c.n / 2 || (c.dim == 1 && f.mode[1] != 0))) {
        v.push_back(path + ".mode: must be resolved by the grid (|k| < n/2, one component in 1D)");
        return;
      }
      try {
        const ScalarField s = f.sample(g);
        require_finite(s, path.c_str());
        if (positive && !(min_value(s) > 0.0)) v.push_back(path + ": must be positive everywhere");
      } catch (const Error& e) {
        v.push_back(path + ": " + e.what());
      }
    };
    if (bridge) {
      check_field(c.eta, "initial.eta", true);
      check_field(c.eta_star, "initial.eta_star", true);
    } else {
      check_field(c.rho, "initial.rho", true);
      check_field(c.phi, "initial.phi", false);
      if (time_ok) {
        try {
          const double courant = c.dt * c.phi.max_gradient(g) / g.spacing();
          if (courant > kMaxCourant) {
            v.push_back("time.dt: Courant number " + format_double(courant) + " exceeds " + format_double(kMaxCourant));
          }
        } catch (const Error&) {
        }
        if (fisher > 0 && fisher_coefficient > 0.0) {
          const double omega = std::sqrt(2.0 * fisher_coefficient) * 4.0 * c.dim / (g.spacing() * g.spacing());
          const double limit = c.integrator == "rk4" ? 2.5 : 1.5;
          if (c.dt * omega > limit) {
            v.push_back("time.dt: dispersive limit dt * omega_max = " + format_double(c.dt * omega) + " exceeds " +
                        format_double(limit) + " for " + c.integrator);
          }
        }
      }
    }
  }

  const std::string& o = c.oracle.kind;
  if (o == "particles") {
    if (c.oracle.particles < 1) v.push_back("oracle.N: particle oracle needs N >= 1");
    if (fisher > 0) v.push_back("oracle.kind: the particle oracle does not model the Fisher term");
    if (bridge) v.push_back("oracle.kind: bridge scenario supports only the bridge oracle");
  } else if (o == "schrodinger") {
    if (c.name != "schrodinger") v.push_back("oracle.kind: schrodinger oracle requires the schrodinger scenario");
  } else if (o == "bridge") {
    if (!bridge) v.push_back("oracle.kind: bridge oracle requires the bridge scenario");
  } else if (o != "none") {
    v.push_back("oracle.kind: unknown oracle '" + o + "' (none, particles, schrodinger, bridge)");
  }
  return v;
}

// ------------------------------------------------------------ construction

Grid make_grid(const ScenarioConfig& c) { return Grid(c.dim, c.n); }

EnergyFunctional build_energy(const ScenarioConfig& c) {
  const Grid g = make_grid(c);
  EnergyFunctional F;
  for (const auto& t : c.energy) {
    if (t.kind == "linear") {
      F.add(LinearPotential{t.field.sample(g)}, t.coefficient);
    } else if (t.kind == "interaction") {
      F.add(Interaction(t.field.sample(g),
                        t.method == "direct" ? InteractionMethod::Direct : InteractionMethod::Convolution),
            t.coefficient);
    } else {
      F.add(FisherInformation{}, t.coefficient);
    }
  }
  return F;
}

DualState initial_state(const ScenarioConfig& c) {
  const Grid g = make_grid(c);
  ScalarField rho = c.rho.sample(g);
  require_positive(rho, "initial density");
  rho *= 1.0 / integrate(rho);
  ScalarField phi = c.phi.sample(g);
  remove_mean(phi);
  return {std::move(rho), std::move(phi)};
}

Force particle_force(const ScenarioConfig& c) {
  const Grid g = make_grid(c);
  std::vector<Force> parts;
  EnergyFunctional mean_field;
  for (const auto& t : c.energy) {
    if (t.kind == "linear") {
      if (auto grad = t.field.gradient()) {
        parts.push_back(analytic_force(*grad, t.coefficient));
      } else {
        parts.push_back(potential_force(t.field.sample(g), t.coefficient));
      }
    } else if (t.kind == "interaction") {
      mean_field.add(Interaction(t.field.sample(g),
                                 t.method == "direct" ? InteractionMethod::Direct : InteractionMethod::Convolution),
                     t.coefficient);
    } else {
      throw Error(ErrorKind::Config, "particle force: Fisher terms are not supported");
    }
  }
  if (!mean_field.empty()) parts.push_back(mean_field_force(mean_field, g, c.oracle.smooth));
  if (parts.size() == 1) return parts.front();
  return [parts](double t, const ParticleEnsemble& e) {
    std::vector<double> acc(e.positions.size(), 0.0);
    for (const auto& f : parts) {
      const auto a = f(t, e);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i];
    }
    return acc;
  };
}

// --------------------------------------------------------------------- run

namespace {

struct BridgeResult {
  Trajectory trajectory;
  Json oracle;
};

BridgeResult run_bridge(const ScenarioConfig& c, const EnergyFunctional& F, const std::filesystem::path* dir,
                        std::vector<std::filesystem::path>& files) {
  const Grid g = make_grid(c);
  const HeatPair boundary{c.eta.sample(g), c.eta_star.sample(g)};
  const int steps = c.steps();
  BridgeResult out;
  out.trajectory.dt = c.dt;
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = -pmin;
  for (int k = 0; k <= steps; ++k) {
    const double t = k == steps ? c.T : k * c.dt;
    const HeatPair hp = heat_pair_evolve(boundary, 0.0, c.T, t);
    const double p = product_integral(hp);
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
    out.trajectory.append(t, hopf_cole(hp).state, F);
    const bool snap = k == 0 || k == steps || (c.snapshot_stride > 0 && k % c.snapshot_stride == 0);
    if (dir && snap) {
      files.push_back(*dir / snapshot_name("eta", k));
      write_field_csv(files.back(), hp.eta);
      files.push_back(*dir / snapshot_name("eta_star", k));
      write_field_csv(files.back(), hp.eta_star);
    }
  }
  double continuity = 0.0, hj = 0.0;
  const auto& s = out.trajectory.states;
  for (int k = 1; k < steps; ++k) {
    const DualRhs r = rhs_dual(s[k], F);
    ScalarField res_rho = s[k + 1].rho - s[k - 1].rho;
    res_rho *= 1.0 / (2.0 * c.dt);
    res_rho -= r.drho.field();
    ScalarField res_phi = s[k + 1].phi - s[k - 1].phi;
    res_phi *= 1.0 / (2.0 * c.dt);
    res_phi -= r.dphi;
    remove_mean(res_phi);
    continuity = std::max(continuity, max_abs(res_rho));
    hj = std::max(hj, max_abs(res_phi));
  }
  out.oracle = {{"kind", "bridge"},
                {"continuity_residual", steps >= 2 ? Json(continuity) : Json(nullptr)},
                {"hj_residual", steps >= 2 ? Json(hj) : Json(nullptr)},
                {"product_integral", pmin},
                {"product_integral_spread", pmax - pmin}};
  return out;
}

}  // namespace

RunReport run(const ScenarioConfig& c, const RunOptions& options) {
  const auto violations = validate(c);
  if (!violations.empty()) {
    std::string msg = "invalid config:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw Error(ErrorKind::Config, msg);
  }
  const auto start = std::chrono::steady_clock::now();
  const EnergyFunctional F = build_energy(c);
  const int steps = c.steps();

  RunReport report;
  std::filesystem::path dir;
  const std::filesystem::path* dir_ptr = nullptr;
  if (options.write_files) {
    dir = c.output_dir.empty() ? std::filesystem::path("out") / c.name : std::filesystem::path(c.output_dir);
    std::filesystem::create_directories(dir);
    dir_ptr = &dir;
  }
  auto log = [&](const std::string& msg) {
    if (!options.quiet) std::cerr << "[" << c.name << "] " << msg << "\n";
  };

  Json oracle{{"kind", c.oracle.kind}};
  double oracle_l1 = std::numeric_limits<double>::quiet_NaN();

  if (c.name == "bridge") {
    log("transforming heat pair over " + std::to_string(steps) + " steps");
    BridgeResult b = run_bridge(c, F, dir_ptr, report.files);
    report.trajectory = std::move(b.trajectory);
    oracle = std::move(b.oracle);
  } else {
    const DualState initial = initial_state(c);
    IntegrationOptions opt;
    opt.method = c.integrator == "rk4" ? Integrator::Rk4 : Integrator::Midpoint;
    opt.dt = c.dt;
    opt.steps = steps;
    opt.midpoint = c.midpoint;
    log("integrating " + std::to_string(steps) + " steps with " + c.integrator);
    report.trajectory = integrate(initial, F, opt);
    const DualState& final_state = report.trajectory.states.back();

    if (c.oracle.kind == "particles") {
      log("evolving " + std::to_string(c.oracle.particles) + " particles");
      ParticleEnsemble e = init_from_density(initial.rho, initial.phi, c.oracle.particles, c.oracle.seed);
      const auto p0 = mean_momentum(e);
      evolve_particles(e, particle_force(c), 0.0, c.dt, steps);
      const auto p1 = mean_momentum(e);
      oracle_l1 = compare_densities(push_forward(e, initial.rho.grid), final_state.rho);
      double dp = 0.0;
      for (int a = 0; a < c.dim; ++a) dp = std::max(dp, std::abs(p1[a] - p0[a]));
      oracle["N"] = c.oracle.particles;
      oracle["seed"] = c.oracle.seed;
      oracle["smooth"] = c.oracle.smooth;
      oracle["l1"] = oracle_l1;
      oracle["statistical_bound"] = 5.0 / std::sqrt(static_cast<double>(c.oracle.particles));
      oracle["momentum_drift"] = dp;
      if (dir_ptr) {
        report.files.push_back(dir / "particles_final.csv");
        write_ensemble_csv(report.files.back(), e);
      }
    } else if (c.oracle.kind == "schrodinger") {
      log("split-step reference");
      ScalarField V(initial.rho.grid);
      for (const auto& t : c.energy) {
        if (t.kind == "linear") V.add_scaled(t.coefficient, t.field.sample(initial.rho.grid));
      }
      // The flow's Phi is the standard Madelung phase S, and madelung_compose
      // uses exp(-i Phi), so it is given -Phi.
      WaveFunction psi = madelung_compose(initial.rho, -initial.phi);
      SplitStepSolver(V, c.dt).advance(psi, steps);
      const Madelung m = madelung_decompose(psi);
      oracle_l1 = compare_densities(m.rho, final_state.rho);
      oracle["l1"] = oracle_l1;
      oracle["norm_error"] = std::abs(norm_squared(psi) - 1.0);
      if (dir_ptr) {
        report.files.push_back(dir / "psi_final.csv");
        write_wavefunction_csv(report.files.back(), psi);
      }
    }
  }

  const Trajectory& traj = report.trajectory;
  const auto& diag = traj.diagnostics;
  const double H0 = diag.front().hamiltonian;
  // Relative to |K| + |U| at t = 0, which stays meaningful when H itself is near zero.
  const double h_scale = std::abs(diag.front().kinetic) + std::abs(diag.front().potential);
  double h_drift = 0.0, mass_error = 0.0, mass_step = 0.0, min_rho = diag.front().min_rho;
  for (std::size_t k = 0; k < diag.size(); ++k) {
    h_drift = std::max(h_drift, h_scale > 0.0 ? std::abs(diag[k].hamiltonian - H0) / h_scale
                                                   : std::abs(diag[k].hamiltonian - H0));
    mass_error = std::max(mass_error, std::abs(diag[k].mass - 1.0));
    if (k > 0) mass_step = std::max(mass_step, std::abs(diag[k].mass - diag[k - 1].mass));
    min_rho = std::min(min_rho, diag[k].min_rho);
  }
  double max_courant = 0.0;
  for (const auto& s : traj.states) max_courant = std::max(max_courant, courant_number(s, c.dt));
  const double residual = traj.size() >= 3 ? primal_residual(traj, F, traj.size() / 2, c.solver_tol)
                                           : std::numeric_limits<double>::quiet_NaN();

  if (dir_ptr) {
    report.files.push_back(dir / "diagnostics.csv");
    write_diagnostics_csv(report.files.back(), traj);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const bool snap = k == 0 || k + 1 == traj.size() || (c.snapshot_stride > 0 && k % c.snapshot_stride == 0);
      if (!snap) continue;
      report.files.push_back(dir / snapshot_name("rho", static_cast<int>(k)));
      write_field_csv(report.files.back(), traj.states[k].rho);
      report.files.push_back(dir / snapshot_name("phi", static_cast<int>(k)));
      write_field_csv(report.files.back(), traj.states[k].phi);
    }
  }

  Json& s = report.summary;
  s["schema_version"] = kSummarySchemaVersion;
  s["scenario"] = c.name;
  s["grid"] = {{"dim", c.dim}, {"n", c.n}};
  s["time"] = {{"dt", c.dt}, {"T", c.T}, {"steps", steps}};
  s["integrator"] = c.name == "bridge" ? "heat-pair" : c.integrator;
  s["hamiltonian_initial"] = H0;
  s["hamiltonian_final"] = diag.back().hamiltonian;
  s["hamiltonian_drift"] = h_drift;
  s["mass_error"] = mass_error;
  s["mass_error_per_step"] = mass_step;
  s["min_rho"] = min_rho;
  s["max_courant"] = max_courant;
  s["primal_residual_mid"] = null_if_nan(residual);
  if (c.name == "geodesic" && traj.size() >= 2) {
    s["kinetic_integrand_deviation"] = geodesic_energy(traj, c.solver_tol).max_relative_deviation;
  }
  s["oracle"] = oracle;
  s["oracle_l1"] = null_if_nan(oracle_l1);
  s["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (dir_ptr) {
    report.files.push_back(dir / "summary.json");
    std::ofstream out(report.files.back());
    if (!out) throw Error(ErrorKind::Io, "cannot write " + report.files.back().string());
    out << s.dump(2) << "\n";
  }
  log("done");
  return report;
}

Json deterministic_part(Json summary) {
  summary.erase("wall_clock_seconds");
  return summary;
}

}  // namespace whf
