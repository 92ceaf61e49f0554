#pragma once

#include "spinn/adaptivity.hpp"
#include "spinn/net.hpp"
#include "spinn/problems.hpp"

#include <optional>

namespace spinn {

/// Gauss-Legendre collocation coefficients: stage nodes c in (0,1),
/// quadrature weights b, and the stage integration matrix a.
struct ButcherTableau {
  int stages = 0;
  Eigen::VectorXd c, b;
  Eigen::MatrixXd a;
};

/// K-stage Gauss-Legendre tableau (order 2K). Stage nodes are the roots of
/// the shifted Legendre polynomial; a and b solve the moment conditions.
ButcherTableau gauss_legendre_tableau(int stages);

/// Dirichlet penalty data for one timestep: basis values at the boundary
/// point, target values at the stage times, and at the step end.
struct StepBoundary {
  Eigen::VectorXd phi;
  Eigen::VectorXd g_stage;  // one per stage
  double g_end = 0.0;
};

/// Everything needed to evaluate the one-step collocation loss in
/// coefficient space. The network outputs are the coefficient vectors at the
/// stage times (columns 0..K-1) and at the step end (column K).
struct StepSystem {
  ButcherTableau tab;
  double dt = 0.0;
  Eigen::VectorXd w_prev;
  std::vector<Eigen::MatrixXd> op;      // stage-time operator matrices
  std::vector<Eigen::VectorXd> source;  // stage-time source coefficients (may be empty)
  Eigen::VectorXd norm_w;               // diagonal weights of the squared norm
  std::optional<StepBoundary> boundary;
};

/// Sum of weighted squared stage and endpoint residuals (plus boundary
/// penalties), with its gradient with respect to the outputs.
LossEval step_loss(const StepSystem& sys, const Eigen::MatrixXd& outputs);
double assemble_step_loss(const StepSystem& sys, const Eigen::MatrixXd& outputs);

struct NetConfig {
  int hidden_layers = 5;
  int width = 100;
  double eta = 5e-4;
  long max_epochs = 100000;
  double tol = 1e-12;
  std::uint64_t seed = 1;
  bool warm_start = true;
};

/// Per-timestep trace row. Unused dimensions carry NaN.
struct StepRecord {
  int step = 0;
  double t = 0.0;
  double loss = 0.0;
  double l2_error = 0.0;  // NaN when no analytic reference
  double f[3] = {0.0, 0.0, 0.0};
  double beta[3] = {0.0, 0.0, 0.0};
  double x_left = 0.0;
  int order = 0;
  long epochs = 0;
  double wall_ms = 0.0;
};

/// Advances a problem in time by training a network per step on the
/// collocation loss, applying the adaptive basis controllers between steps.
class Stepper {
 public:
  Stepper(ProblemSpec spec, Discretization disc, ButcherTableau tab, double dt,
          NetConfig net, AdaptiveConfig adapt);

  StepRecord step();
  std::vector<StepRecord> run(double t_end);

  double time() const { return t_; }
  const Eigen::VectorXd& state() const { return coef_; }
  const Discretization& disc() const { return disc_; }
  StepSystem make_system() const;  // the loss the next step() will train on

 private:
  ProblemSpec spec_;
  Discretization disc_;
  ButcherTableau tab_;
  double dt_;
  NetConfig net_cfg_;
  AdaptiveConfig adapt_;
  Eigen::VectorXd coef_;
  AdaptiveState astate_;
  std::optional<MlpParams> net_;
  double t_ = 0.0;
  int step_index_ = 0;
};

/// Convenience driver: builds the default discretization and runs to t_end.
std::vector<StepRecord> solve(const ProblemSpec& spec, int stages, double dt,
                              double t_end, const NetConfig& net,
                              const AdaptiveConfig& adapt,
                              std::optional<double> gamma_cross = std::nullopt);

}  // namespace spinn
