#pragma once

#include "spinn/expansion.hpp"

#include <utility>
#include <vector>

namespace spinn {

/// Tuning knobs for the three between-timestep controllers.
struct AdaptiveConfig {
  double q = 0.95;           // scaling ratio, in (0,1)
  double nu = 1.0 / 0.95;    // scaling trigger threshold, > 1
  double rho = 1.5;          // p-increase threshold, > 1
  double rho0 = 2.0;         // p-decrease threshold, > 1
  double gamma_ratio = 1.3;  // rho update factor, >= 1
  double d_min = 0.004;      // displacement bounds for the moving technique
  double d_max = 0.1;
  double move_threshold = 1.001;
  bool enable_scaling = false;
  bool enable_p_refine = false;
  bool enable_p_decrease = false;
  bool enable_moving = false;
};

/// Reference indicator and current rho, one slot per dimension.
struct AdaptiveState {
  std::vector<double> f_ref;
  std::vector<double> rho;
};

/// Shrinks beta by q when the indicator grew by more than nu.
double scaling_update(double f_prev, double f_curr, double beta,
                      const AdaptiveConfig& cfg);

/// Returns (new order, new rho). The order changes by at most one and never
/// drops below 4.
std::pair<int, double> p_refine_update(double f_prev, double f_curr, int order,
                                       double rho, const AdaptiveConfig& cfg);

/// Indicator-greedy search over candidate centers x_left +- delta on a
/// 5-point grid in [d_min, d_max]; Hermite only.
double move_update(const SpectralExpansion& e, const AdaptiveConfig& cfg);

}  // namespace spinn
