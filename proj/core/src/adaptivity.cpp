#include "spinn/adaptivity.hpp"

#include <stdexcept>

namespace spinn {

double scaling_update(double f_prev, double f_curr, double beta,
                      const AdaptiveConfig& cfg) {
  if (f_prev > 0.0 && f_curr / f_prev > cfg.nu) return cfg.q * beta;
  return beta;
}

std::pair<int, double> p_refine_update(double f_prev, double f_curr, int order,
                                       double rho, const AdaptiveConfig& cfg) {
  if (f_prev > 0.0 && f_curr > rho * f_prev)
    return {order + 1, rho * cfg.gamma_ratio};
  if (cfg.enable_p_decrease && f_curr < f_prev / cfg.rho0 && order > 4)
    return {order - 1, rho};
  return {order, rho};
}

double move_update(const SpectralExpansion& e, const AdaptiveConfig& cfg) {
  if (e.basis.family != BasisFamily::HermiteFunction)
    throw std::invalid_argument("move_update: translation only meaningful for Hermite");
  const double f0 = frequency_indicator(e);
  if (f0 == 0.0) return e.basis.x_left;
  double best_f = f0;
  double best_xl = e.basis.x_left;
  for (int g = 0; g < 5; ++g) {
    const double delta = cfg.d_min + g * (cfg.d_max - cfg.d_min) / 4.0;
    for (const double sign : {-1.0, 1.0}) {
      BasisDescriptor cand = e.basis;
      cand.x_left = e.basis.x_left + sign * delta;
      const double f = frequency_indicator(reproject(e, cand, e.order));
      if (f < best_f) {
        best_f = f;
        best_xl = cand.x_left;
      }
    }
  }
  if (best_f > 0.0 && f0 / best_f > cfg.move_threshold) return best_xl;
  return e.basis.x_left;
}

}  // namespace spinn
