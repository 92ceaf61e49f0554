#pragma once

#include "spinn/collocation.hpp"

namespace spinn {

/// One-window diffusivity inference: the estimate, the converged loss split
/// into its two anchors, and the learned stage coefficients.
struct InferenceResult {
  double theta_hat = 0.0;
  double sse = 0.0, sse_left = 0.0, sse_right = 0.0;
  Eigen::MatrixXd stage_coef;  // coef_size x stages
  long epochs = 0;
  bool diverged = false;
};

/// Trains a network outputting the stage coefficient vectors while the
/// scalar diffusivity is descended jointly (same learning rate). obs_left /
/// obs_right are coefficient vectors of the observed solution at the window
/// ends, already projected onto disc's basis.
InferenceResult infer_parameter(const Discretization& disc,
                                const Eigen::VectorXd& obs_left,
                                const Eigen::VectorXd& obs_right,
                                const ButcherTableau& tab, double t_left, double dt,
                                double theta_init, const NetConfig& cfg);

/// Per-window trace of a multi-window inference run.
struct InferenceWindowRecord {
  int window = 0;
  double t = 0.0;          // window start
  double theta_hat = 0.0;
  double sse = 0.0;
  double f = 0.0;          // frequency indicator after the window
  double beta = 0.0;
  double wall_ms = 0.0;
};

/// Successive windows over [0, windows*dt] with noisy observations drawn at
/// each endpoint and scaling adaptivity between windows.
std::vector<InferenceWindowRecord> run_inference_windows(
    const ProblemSpec& spec, double sigma, int windows, const ButcherTableau& tab,
    double dt, double theta_init, const NetConfig& cfg, const AdaptiveConfig& adapt,
    std::uint64_t noise_seed);

struct SourceRecoveryResult {
  Eigen::MatrixXd h;  // (order+1) x stages: source coefficients at stage times
  double sse0 = 0.0, sse_left = 0.0, sse_right = 0.0;
  double h_norm = 0.0;                // sqrt(sum of squared stage norms)
  double reconstruction_error = 0.0;  // RMS over stages of ||f - f_N||, NaN if no truth
  long epochs = 0;
  bool diverged = false;
};

/// Learns the source coefficients at the stage times from observed solution
/// coefficients u_obs (window start, the K stage times, window end -- K+2
/// vectors) with an L2 penalty of strength lambda on the stage coefficients.
/// true_source, when given, is used for the reconstruction error only.
SourceRecoveryResult recover_source(const std::vector<Eigen::VectorXd>& u_obs,
                                    double lambda, const BasisDescriptor& basis,
                                    int order, const ButcherTableau& tab,
                                    double t_left, double dt, const NetConfig& cfg,
                                    const SpaceTimeFn& true_source = nullptr);

}  // namespace spinn
