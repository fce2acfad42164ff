#include "driftinv/experiment.hpp"

#include <cmath>

#include "driftinv/forward_solver.hpp"

namespace driftinv {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::Diverged:
      return "diverged";
    case RunStatus::Failed:
      return "failed";
  }
  return "failed";
}

Measurement generate_data(const ExperimentPreset& preset) {
  preset.validate();
  const GridPair fine = build_grids(preset.m * preset.refinement,
                                    preset.n_steps * preset.refinement, preset.spec.horizon);
  const GridFunction q_fine = GridFunction::sample(fine.space, preset.drift.q);
  const GridFunction final_level = solve_forward(preset.spec, q_fine, fine).final_level();

  Measurement data;
  data.x = uniform_points(preset.data_points);
  data.exact.resize(data.x.size());
  for (std::size_t j = 0; j < data.x.size(); ++j) {
    data.exact[j] = interpolate_uniform(final_level.values(), data.x[j]);
  }
  const NoiseSpec noise = preset.noise.value_or(NoiseSpec{});
  data.sigma = noise_sigma(data.exact, noise);
  data.noisy = add_noise(data.exact, noise);
  return data;
}

std::vector<bool> away_from_kinks(const SpatialGrid& grid, const std::vector<double>& kinks) {
  std::vector<bool> keep(grid.size(), true);
  const double reach = grid.spacing() * (1.0 + 1e-9);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (double c : kinks) {
      if (std::abs(grid.node(i) - c) <= reach) keep[i] = false;
    }
  }
  return keep;
}

ResultBundle run_experiment(const ExperimentPreset& preset) {
  preset.validate();
  return run_experiment(preset, generate_data(preset));
}

namespace {

GridFunction on_solver_grid(const Measurement& data, std::span<const double> values,
                            const SpatialGrid& grid) {
  return restrict_to(data.x, values, grid);
}

}  // namespace

ResultBundle run_experiment(const ExperimentPreset& preset, const Measurement& data) {
  preset.validate();
  if (data.x.size() != data.noisy.size() || data.x.size() < 3) {
    throw ConfigError("measurement: need at least 3 (x, g) samples");
  }
  if (preset.mollify) {
    const double h = 1.0 / static_cast<double>(data.x.size() - 1);
    for (std::size_t j = 0; j < data.x.size(); ++j) {
      if (std::abs(data.x[j] - static_cast<double>(j) * h) > 1e-9) {
        throw ConfigError("measurement: mollification needs uniformly spaced data");
      }
    }
  }
  const GridPair grids = build_grids(preset.m, preset.n_steps, preset.spec.horizon);
  const GridFunction q_true = GridFunction::sample(grids.space, preset.drift.q);
  const std::vector<double>& exact = data.exact.empty() ? data.noisy : data.exact;

  ResultBundle bundle{
      .provenance = {},
      .grids = grids,
      .q_true = q_true,
      .recovered = std::nullopt,
      .trace = {},
      .metrics = std::nullopt,
      .metrics_away_from_kinks = std::nullopt,
      .mollification = {},
      .assumptions = validate_assumptions(preset.spec, preset.drift.q),
      .g_exact = on_solver_grid(data, exact, grids.space),
      .g_noisy = on_solver_grid(data, data.noisy, grids.space),
      .g_used = on_solver_grid(data, data.noisy, grids.space),
      .status = RunStatus::Ok,
      .message = {},
      .exit_code = 0,
  };

  auto& prov = bundle.provenance;
  prov.preset = preset.name;
  prov.drift = preset.drift.label;
  prov.seed = preset.noise ? preset.noise->seed : 0;
  prov.noise_level = preset.noise ? preset.noise->level : 0.0;
  prov.m = preset.m;
  prov.n_steps = preset.n_steps;
  prov.horizon = preset.spec.horizon;
  prov.refinement = preset.refinement;
  prov.data_points = data.x.size();
  prov.inverse_crime = preset.refinement == 1;
  prov.max_iter = preset.iteration.max_iter;
  prov.tol = preset.iteration.tol_step;

  try {
    if (preset.mollify) {
      const double b2_final = preset.spec.right_flux(preset.spec.horizon);
      const MollifyResult mol =
          mollify(data.noisy, preset.spec.left_flux, b2_final, data.sigma, preset.tikhonov);
      auto& info = bundle.mollification;
      info.applied = true;
      info.lambda = mol.selection.lambda;
      info.mu = mol.selection.lambda / TikhonovConfig::lambda_scale(data.x.size());
      info.residual = mol.solution.residual_norm;
      info.target = mol.selection.target;
      info.qualified = mol.selection.qualified;
      info.gradient_residual = mol.solution.gradient_residual;
      bundle.g_used = on_solver_grid(data, mol.g, grids.space);
    }

    bundle.assumptions = validate_assumptions(preset.spec, preset.drift.q, bundle.g_used);

    IterationResult result = run_iteration(bundle.g_used, preset.spec, grids, preset.iteration);
    bundle.trace = std::move(result.trace);
    bundle.recovered = std::move(result.drift);
  } catch (const DivergenceError& e) {
    bundle.trace = e.trace();
    bundle.status = RunStatus::Diverged;
    bundle.message = e.what();
    bundle.exit_code = 3;
  } catch (const NumericalError& e) {
    bundle.status = RunStatus::Failed;
    bundle.message = e.what();
    bundle.exit_code = 3;
  } catch (const ConfigError& e) {
    bundle.status = RunStatus::Failed;
    bundle.message = e.what();
    bundle.exit_code = 2;
  }

  if (bundle.recovered) {
    bundle.metrics = error_metrics(*bundle.recovered, q_true);
    bundle.metrics_away_from_kinks =
        error_metrics(*bundle.recovered, q_true, away_from_kinks(grids.space, preset.drift.kinks));
  }
  return bundle;
}

}  // namespace driftinv
