#include <cmath>

#include "driftinv/core_model.hpp"

namespace driftinv {

GridFunction apply_stencil(Stencil kind, const GridFunction& u, double tau) {
  const auto& grid = u.grid();
  const std::size_t last = grid.size() - 1;
  const double h = grid.spacing();
  GridFunction out(grid);

  switch (kind) {
    case Stencil::L:
      if (!(tau > 0.0)) throw ConfigError("stencil L: time step must be positive");
      out[0] = (u[1] - u[0]) / h;
      for (std::size_t i = 1; i < last; ++i) out[i] = u[i] / tau;
      out[last] = (u[last] - u[last - 1]) / h;
      break;
    case Stencil::I:
      for (std::size_t i = 1; i < last; ++i) out[i] = u[i];
      break;
    case Stencil::DeltaX:
      for (std::size_t i = 1; i < last; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
      break;
    case Stencil::DeltaX2:
      for (std::size_t i = 1; i < last; ++i) {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
      }
      break;
  }
  return out;
}

}  // namespace driftinv
