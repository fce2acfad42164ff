#include <algorithm>
#include <charconv>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "driftinv/experiment.hpp"
#include "driftinv/forward_solver.hpp"
#include "driftinv/outputs.hpp"

namespace fs = std::filesystem;
using namespace driftinv;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::optional<int> grid_m, grid_n, refine, max_iter;
  std::optional<std::size_t> data_points;
  std::optional<double> noise, tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> lambda;
  bool no_mollify = false;
  std::string out;
  std::string formats = "csv,json";

  PresetOverrides overrides() const {
    PresetOverrides o;
    o.grid_m = grid_m;
    o.grid_n = grid_n;
    o.refine = refine;
    o.data_points = data_points;
    o.noise = noise;
    o.seed = seed;
    o.max_iter = max_iter;
    o.tol = tol;
    if (no_mollify) o.mollify = false;
    if (lambda) {
      if (*lambda == "auto") {
        o.lambda = std::optional<double>{};
      } else {
        double v = 0.0;
        const auto res = std::from_chars(lambda->data(), lambda->data() + lambda->size(), v);
        if (res.ec != std::errc{} || res.ptr != lambda->data() + lambda->size()) {
          throw ConfigError("lambda: expected a number or 'auto', got '" + *lambda + "'");
        }
        o.lambda = std::optional<double>{v};
      }
    }
    return o;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, const std::string& default_out) {
  f.out = default_out;
  cmd->add_option("--grid-m", f.grid_m, "spatial intervals of the solver grid");
  cmd->add_option("--grid-n", f.grid_n, "time steps of the solver grid");
  cmd->add_option("--refine", f.refine, "refinement factor of the data-generation grid");
  cmd->add_option("--data-points", f.data_points, "number K of final-time observations");
  cmd->add_option("--noise", f.noise, "noise level relative to sup|g|");
  cmd->add_option("--lambda", f.lambda, "Tikhonov parameter, or 'auto'");
  cmd->add_flag("--no-mollify", f.no_mollify, "skip data mollification");
  cmd->add_option("--seed", f.seed, "noise seed");
  cmd->add_option("--max-iter", f.max_iter, "maximum applications of K");
  cmd->add_option("--tol", f.tol, "stop when the step sup-norm drops below this");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--formats", f.formats, "comma-separated subset of csv,json,svg")
      ->capture_default_str();
}

ExperimentPreset preset_with(const std::string& name, const CommonFlags& f) {
  ExperimentPreset p = make_preset(name);
  f.overrides().apply(p);
  p.validate();
  return p;
}

std::string summary_line(const ResultBundle& b) {
  char buf[256];
  const auto& m = b.metrics;
  const int iters = b.trace.iterates.empty() ? 0 : static_cast<int>(b.trace.iterates.size()) - 1;
  std::snprintf(buf, sizeof buf, "%-5s %-8s iterations=%d rel_l2=%s rel_linf=%s",
                b.provenance.preset.c_str(), to_string(b.status), iters,
                m ? format_number(m->rel_l2).c_str() : "-",
                m ? format_number(m->rel_linf).c_str() : "-");
  std::string line = buf;
  if (b.mollification.applied) line += " lambda=" + format_number(b.mollification.lambda);
  if (!b.message.empty()) line += " (" + b.message + ")";
  return line;
}

int finish(const ResultBundle& bundle, const CommonFlags& f, const fs::path& out) {
  emit_outputs(bundle, parse_formats(f.formats), out);
  std::cout << summary_line(bundle) << "\n";
  return bundle.exit_code;
}

int run_forward(const std::string& preset_name, const CommonFlags& f) {
  const ExperimentPreset p = preset_with(preset_name, f);
  const GridPair grids = build_grids(p.m, p.n_steps, p.spec.horizon);
  const GridFunction q = GridFunction::sample(grids.space, p.drift.q);
  const SpaceTimeField u = solve_forward(p.spec, q, grids);
  const GridFunction uT = u.final_level();
  const GridFunction ut = final_time_derivative(u);
  const std::vector<double> x = grids.space.nodes();

  fs::create_directories(f.out);
  write_text(fs::path(f.out) / "forward.csv",
             csv_text({{"x", x}, {"q", q.values()}, {"u_T", uT.values()}, {"u_t_T", ut.values()}}));
  const auto [lo, hi] = std::minmax_element(uT.values().begin(), uT.values().end());
  std::cout << p.name << " forward m=" << p.m << " N=" << p.n_steps
            << " min u(T)=" << format_number(*lo) << " max u(T)=" << format_number(*hi) << "\n";
  return 0;
}

Measurement measurement_for(const ExperimentPreset& p, const std::string& data_file) {
  if (data_file.empty()) return generate_data(p);
  Measurement data = read_measurement_csv(data_file);
  const double level = p.noise ? p.noise->level : 0.0;
  double sup = 0.0;
  for (double g : data.noisy) sup = std::max(sup, std::abs(g));
  data.sigma = level * sup;
  return data;
}

int run_mollify(const std::string& preset_name, const std::string& data_file,
                const CommonFlags& f) {
  const ExperimentPreset p = preset_with(preset_name, f);
  const Measurement data = measurement_for(p, data_file);
  const MollifyResult r = mollify(data.noisy, p.spec.left_flux, p.spec.right_flux(p.spec.horizon),
                                  data.sigma, p.tikhonov);
  std::vector<CsvColumn> cols{{"x", data.x}};
  if (!data.exact.empty()) cols.push_back({"g_exact", data.exact});
  cols.push_back({"g_noisy", data.noisy});
  cols.push_back({"g_mollified", r.g});
  fs::create_directories(f.out);
  write_text(fs::path(f.out) / "mollified.csv", csv_text(cols));
  std::cout << "K=" << data.x.size() << " sigma=" << format_number(data.sigma)
            << " lambda=" << format_number(r.selection.lambda)
            << " residual=" << format_number(r.solution.residual_norm)
            << " target=" << format_number(r.selection.target)
            << (r.selection.qualified ? "" : " (target not reached)") << "\n";
  return 0;
}

int run_invert(const std::string& preset_name, const std::string& data_file,
               const CommonFlags& f) {
  const ExperimentPreset p = preset_with(preset_name, f);
  return finish(run_experiment(p, measurement_for(p, data_file)), f, f.out);
}

int run_suite(const CommonFlags& f, int jobs) {
  const auto& names = preset_names();
  std::vector<ExperimentPreset> presets;
  for (const auto& n : names) presets.push_back(preset_with(n, f));
  const OutputFormats formats = parse_formats(f.formats);

  std::vector<std::string> lines(presets.size());
  std::vector<int> codes(presets.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < presets.size(); i = next++) {
      try {
        const ResultBundle b = run_experiment(presets[i]);
        emit_outputs(b, formats, fs::path(f.out) / presets[i].name);
        lines[i] = summary_line(b);
        codes[i] = b.exit_code;
      } catch (const std::exception& e) {
        lines[i] = presets[i].name + " failed: " + e.what();
        codes[i] = dynamic_cast<const NumericalError*>(&e) ? kExitNumerical : kExitConfig;
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(presets.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& l : lines) std::cout << l << "\n";
  int code = 0;
  for (int c : codes) {
    if (c == kExitConfig || (c == kExitNumerical && code == 0)) code = c;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover the drift q(x) of a 1D parabolic equation from final-time data"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonFlags forward_f, invert_f, mollify_f, exp_f, suite_f;
  std::string forward_preset = "ex1a", invert_preset = "ex1a", mollify_preset = "ex3e";
  std::string invert_data, mollify_data, exp_preset, exp_config;
  int jobs = 1;

  auto* forward = app.add_subcommand("forward", "solve the forward problem for a preset drift");
  forward->add_option("--preset", forward_preset, "preset supplying coefficients and drift")
      ->capture_default_str();
  add_common_flags(forward, forward_f, "out/forward");

  auto* invert = app.add_subcommand("invert", "recover the drift from final-time data");
  invert->add_option("--preset", invert_preset, "preset supplying coefficients and grids")
      ->capture_default_str();
  invert->add_option("--data", invert_data, "CSV with columns x,g (default: synthetic data)");
  add_common_flags(invert, invert_f, "out/invert");

  auto* moll = app.add_subcommand("mollify", "smooth noisy final-time data");
  moll->add_option("--preset", mollify_preset, "preset supplying data and boundary fluxes")
      ->capture_default_str();
  moll->add_option("--data", mollify_data, "CSV with columns x,g on a uniform grid");
  add_common_flags(moll, mollify_f, "out/mollify");

  auto* exp = app.add_subcommand("experiment", "run one preset end to end");
  exp->add_option("preset", exp_preset, "one of ex1a, ex1b, ex2c, ex2d, ex3e, ex3f");
  exp->add_option("--config", exp_config, "JSON config file instead of a preset name");
  add_common_flags(exp, exp_f, "");

  auto* suite = app.add_subcommand("suite", "run all presets");
  suite->add_option("--jobs", jobs, "presets run concurrently")->capture_default_str();
  add_common_flags(suite, suite_f, "out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*forward) return run_forward(forward_preset, forward_f);
    if (*invert) return run_invert(invert_preset, invert_data, invert_f);
    if (*moll) return run_mollify(mollify_preset, mollify_data, mollify_f);
    if (*exp) {
      if (exp_preset.empty() == exp_config.empty()) {
        throw ConfigError("experiment: give either a preset name or --config");
      }
      ExperimentPreset p = exp_config.empty() ? make_preset(exp_preset) : load_config(exp_config);
      exp_f.overrides().apply(p);
      p.validate();
      const fs::path out = exp_f.out.empty() ? fs::path("out") / p.name : fs::path(exp_f.out);
      return finish(run_experiment(p), exp_f, out);
    }
    if (*suite) return run_suite(suite_f, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
