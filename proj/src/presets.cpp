#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "driftinv/experiment.hpp"

namespace driftinv {

namespace {

using std::numbers::pi;

ProblemSpec example_coefficients(double horizon) {
  ProblemSpec spec;
  spec.source = [](double x) { return 10.0 + 10.0 * x; };
  spec.potential = 5.0;
  spec.initial = [](double x) { return std::sin(pi * x); };
  spec.left_flux = 1.0;
  spec.right_flux = [](double t) { return 1.0 + t; };
  spec.horizon = horizon;
  return spec;
}

DriftProfile sine_drift() { return {"sin(x)", [](double x) { return std::sin(x); }, {}}; }

DriftProfile piecewise_quadratic_drift() {
  return {"x^2 | -x^2+2x-1/2",
          [](double x) { return x <= 0.5 ? x * x : -x * x + 2.0 * x - 0.5; },
          {0.5}};
}

DriftProfile hat_drift() {
  return {"x | 1-x", [](double x) { return x <= 0.5 ? x : 1.0 - x; }, {0.5}};
}

DriftProfile periodic_abs_drift() {
  return {"20|x-c_k|-1",
          [](double x) {
            // centres 0.1, 0.3, ..., 0.9 on the cells (0,0.2], (0.2,0.4], ...
            const double c = x <= 0.2 ? 0.1 : x <= 0.4 ? 0.3 : x <= 0.6 ? 0.5 : x <= 0.8 ? 0.7 : 0.9;
            return 20.0 * std::abs(x - c) - 1.0;
          },
          {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
}

DriftProfile staircase_drift() {
  return {"staircase 0,1,0,1",
          [](double x) { return x <= 0.25 ? 0.0 : x <= 0.5 ? 1.0 : x <= 0.75 ? 0.0 : 1.0; },
          {0.25, 0.5, 0.75}};
}

DriftProfile plateau_drift() {
  return {"-1 | x/2 | -1",
          [](double x) { return x < 0.2 ? -1.0 : x <= 0.8 ? 0.5 * x : -1.0; },
          {0.2, 0.8}};
}

ExperimentPreset smooth_data_preset(std::string name, double horizon, DriftProfile drift) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.spec = example_coefficients(horizon);
  p.drift = std::move(drift);
  p.m = 100;
  p.n_steps = 100;
  p.data_points = 101;  // one observation per solver node
  p.mollify = false;
  p.iteration.max_iter = 3;
  return p;
}

ExperimentPreset noisy_data_preset(std::string name, DriftProfile drift) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.spec = example_coefficients(1.0);
  p.drift = std::move(drift);
  p.m = 20;
  p.n_steps = 80;
  p.data_points = 10001;
  p.noise = NoiseSpec{0.01, 7, NoiseScaling::RelativeToSup};
  p.mollify = true;
  p.iteration.max_iter = 3;
  return p;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"ex1a", "ex1b", "ex2c", "ex2d", "ex3e", "ex3f"};
  return names;
}

ExperimentPreset make_preset(const std::string& name) {
  if (name == "ex1a") return smooth_data_preset(name, 1.0, sine_drift());
  if (name == "ex1b") return smooth_data_preset(name, 1.0, piecewise_quadratic_drift());
  if (name == "ex2c") return smooth_data_preset(name, 0.5, hat_drift());
  if (name == "ex2d") return smooth_data_preset(name, 0.5, periodic_abs_drift());
  if (name == "ex3e") return noisy_data_preset(name, staircase_drift());
  if (name == "ex3f") return noisy_data_preset(name, plateau_drift());

  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "'; valid presets: " + valid);
}

void ExperimentPreset::validate() const {
  spec.validate();
  if (!drift.q) throw ConfigError("drift: callable missing");
  if (m < 3) throw ConfigError("grid-m: need at least 3 intervals");
  if (n_steps < 1) throw ConfigError("grid-n: need at least one time step");
  if (refinement < 1) throw ConfigError("refine: factor must be at least 1");
  if (data_points < 3) throw ConfigError("data-points: need at least 3");
  if (noise && !(noise->level >= 0.0)) throw ConfigError("noise: level must be non-negative");
  iteration.validate();
  tikhonov.validate();
}

void PresetOverrides::apply(ExperimentPreset& preset) const {
  if (grid_m) preset.m = *grid_m;
  if (grid_n) preset.n_steps = *grid_n;
  if (refine) preset.refinement = *refine;
  if (data_points) preset.data_points = *data_points;
  if (noise) {
    NoiseSpec ns = preset.noise.value_or(NoiseSpec{0.0, 7, NoiseScaling::RelativeToSup});
    ns.level = *noise;
    preset.noise = ns;
  }
  if (seed) {
    NoiseSpec ns = preset.noise.value_or(NoiseSpec{0.0, 7, NoiseScaling::RelativeToSup});
    ns.seed = *seed;
    preset.noise = ns;
  }
  if (mollify) preset.mollify = *mollify;
  if (lambda) preset.tikhonov.lambda = *lambda;
  if (max_iter) preset.iteration.max_iter = *max_iter;
  if (tol) preset.iteration.tol_step = *tol;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& section, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : section.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("config: unknown key '" + where + key + "'");
  }
}

template <typename T>
std::optional<T> read(const json& section, const char* key, const std::string& where) {
  if (!section.contains(key)) return std::nullopt;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + where + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentPreset preset_from_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, {"preset", "grid", "data", "iteration"}, "");
  const auto name = read<std::string>(root, "preset", "");
  if (!name) throw ConfigError("config: 'preset' is required");

  ExperimentPreset preset = make_preset(*name);
  PresetOverrides o;
  if (root.contains("grid")) {
    const json& g = root["grid"];
    reject_unknown(g, {"m", "n", "refine"}, "grid.");
    o.grid_m = read<int>(g, "m", "grid.");
    o.grid_n = read<int>(g, "n", "grid.");
    o.refine = read<int>(g, "refine", "grid.");
  }
  if (root.contains("data")) {
    const json& d = root["data"];
    reject_unknown(d, {"points", "noise", "seed", "mollify", "lambda"}, "data.");
    o.data_points = read<std::size_t>(d, "points", "data.");
    o.noise = read<double>(d, "noise", "data.");
    o.seed = read<std::uint64_t>(d, "seed", "data.");
    o.mollify = read<bool>(d, "mollify", "data.");
    if (d.contains("lambda")) {
      const json& l = d["lambda"];
      if (l.is_string() && l.get<std::string>() == "auto") {
        o.lambda = std::optional<double>{};
      } else if (l.is_number()) {
        o.lambda = std::optional<double>{l.get<double>()};
      } else {
        throw ConfigError("config: 'data.lambda' must be a number or \"auto\"");
      }
    }
  }
  if (root.contains("iteration")) {
    const json& it = root["iteration"];
    reject_unknown(it, {"max_iter", "tol"}, "iteration.");
    o.max_iter = read<int>(it, "max_iter", "iteration.");
    o.tol = read<double>(it, "tol", "iteration.");
  }
  o.apply(preset);
  preset.validate();
  return preset;
}

ExperimentPreset load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return preset_from_config_text(buf.str());
}

}  // namespace driftinv
