#include "spinn/collocation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spinn {
namespace {

// Legendre polynomial value and derivative at x via the three-term
// recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

ButcherTableau gauss_legendre_tableau(int stages) {
  if (stages < 1) throw std::invalid_argument("gauss_legendre_tableau: stages < 1");
  const int k = stages;
  ButcherTableau tab;
  tab.stages = k;
  tab.c.resize(k);
  // Roots of P_k on (-1,1) by Newton iteration, mapped to (0,1).
  for (int i = 0; i < k; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(k, z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    tab.c[k - 1 - i] = 0.5 * (1.0 + z);
  }
  // Moment conditions: sum_r b_r c_r^{m-1} = 1/m and
  // sum_r a_sr c_r^{m-1} = c_s^m / m for m = 1..K.
  Eigen::MatrixXd vand(k, k);
  for (int m = 0; m < k; ++m)
    for (int r = 0; r < k; ++r) vand(m, r) = std::pow(tab.c[r], m);
  Eigen::VectorXd rhs(k);
  for (int m = 0; m < k; ++m) rhs[m] = 1.0 / (m + 1.0);
  const auto lu = vand.fullPivLu();
  tab.b = lu.solve(rhs);
  tab.a.resize(k, k);
  for (int s = 0; s < k; ++s) {
    for (int m = 0; m < k; ++m) rhs[m] = std::pow(tab.c[s], m + 1) / (m + 1.0);
    tab.a.row(s) = lu.solve(rhs).transpose();
  }
  return tab;
}

LossEval step_loss(const StepSystem& sys, const Eigen::MatrixXd& outputs) {
  const int k = sys.tab.stages;
  const int n = int(sys.w_prev.size());
  if (outputs.rows() != n || outputs.cols() != k + 1)
    throw std::invalid_argument("step_loss: outputs must be dim x (stages+1)");

  // Stage slopes G_r = M_r W_r + F_r.
  Eigen::MatrixXd g(n, k);
  for (int r = 0; r < k; ++r) {
    g.col(r) = sys.op[r] * outputs.col(r);
    if (!sys.source.empty()) g.col(r) += sys.source[r];
  }

  LossEval le;
  le.grad = Eigen::MatrixXd::Zero(n, k + 1);
  const Eigen::ArrayXd nw = sys.norm_w.array();

  Eigen::MatrixXd weighted_res(n, k + 1);  // n .* R, per residual
  for (int s = 0; s < k; ++s) {
    Eigen::VectorXd r = outputs.col(s) - sys.w_prev;
    for (int q = 0; q < k; ++q) r -= sys.dt * sys.tab.a(s, q) * g.col(q);
    le.value += (r.array().square() * nw).sum();
    weighted_res.col(s) = (r.array() * nw).matrix();
  }
  {
    Eigen::VectorXd r = outputs.col(k) - sys.w_prev;
    for (int q = 0; q < k; ++q) r -= sys.dt * sys.tab.b[q] * g.col(q);
    le.value += (r.array().square() * nw).sum();
    weighted_res.col(k) = (r.array() * nw).matrix();
  }

  for (int q = 0; q < k; ++q) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < k; ++s) acc += sys.tab.a(s, q) * weighted_res.col(s);
    acc += sys.tab.b[q] * weighted_res.col(k);
    le.grad.col(q) = 2.0 * weighted_res.col(q) -
                     2.0 * sys.dt * (sys.op[q].transpose() * acc);
  }
  le.grad.col(k) = 2.0 * weighted_res.col(k);

  if (sys.boundary) {
    const StepBoundary& bc = *sys.boundary;
    for (int s = 0; s < k; ++s) {
      const double r = bc.phi.dot(outputs.col(s)) - bc.g_stage[s];
      le.value += r * r;
      le.grad.col(s) += 2.0 * r * bc.phi;
    }
    const double r = bc.phi.dot(outputs.col(k)) - bc.g_end;
    le.value += r * r;
    le.grad.col(k) += 2.0 * r * bc.phi;
  }
  return le;
}

double assemble_step_loss(const StepSystem& sys, const Eigen::MatrixXd& outputs) {
  return step_loss(sys, outputs).value;
}

Stepper::Stepper(ProblemSpec spec, Discretization disc, ButcherTableau tab, double dt,
                 NetConfig net, AdaptiveConfig adapt)
    : spec_(std::move(spec)),
      disc_(std::move(disc)),
      tab_(std::move(tab)),
      dt_(dt),
      net_cfg_(net),
      adapt_(adapt) {
  if (dt_ <= 0.0) throw std::invalid_argument("Stepper: dt must be positive");
  coef_ = disc_.project_initial();
  astate_.f_ref.resize(disc_.dim());
  astate_.rho.assign(disc_.dim(), adapt_.rho);
  for (int d = 0; d < disc_.dim(); ++d) astate_.f_ref[d] = disc_.indicator(coef_, d);
}

StepSystem Stepper::make_system() const {
  StepSystem sys;
  sys.tab = tab_;
  sys.dt = dt_;
  sys.w_prev = coef_;
  sys.norm_w = disc_.norm_weights();
  const bool has_source = bool(spec_.source);
  for (int r = 0; r < tab_.stages; ++r) {
    const double tr = t_ + tab_.c[r] * dt_;
    sys.op.push_back(disc_.operator_matrix(tr));
    if (has_source) sys.source.push_back(disc_.source_coeffs(tr));
  }
  if (spec_.has_boundary) {
    StepBoundary bc;
    bc.phi = disc_.boundary_phi();
    bc.g_stage.resize(tab_.stages);
    for (int s = 0; s < tab_.stages; ++s)
      bc.g_stage[s] = spec_.boundary_value(t_ + tab_.c[s] * dt_);
    bc.g_end = spec_.boundary_value(t_ + dt_);
    sys.boundary = std::move(bc);
  }
  return sys;
}

StepRecord Stepper::step() {
  const auto t_start = std::chrono::steady_clock::now();
  const StepSystem sys = make_system();
  const int k = tab_.stages;
  const int n = disc_.coef_size();

  Eigen::MatrixXd inputs(1, k + 1);
  inputs.leftCols(k) = tab_.c.transpose();
  inputs(0, k) = 1.0;

  std::vector<int> dims;
  dims.push_back(1);
  dims.insert(dims.end(), size_t(net_cfg_.hidden_layers), net_cfg_.width);
  dims.push_back(n);
  if (!net_ || !net_cfg_.warm_start || net_->dims != dims)
    net_ = init_mlp(dims, net_cfg_.seed + std::uint64_t(step_index_));

  TrainConfig tc;
  tc.eta = net_cfg_.eta;
  tc.max_epochs = net_cfg_.max_epochs;
  tc.tol = net_cfg_.tol;
  tc.seed = net_cfg_.seed;
  const OutputLoss loss = [&sys](const Eigen::MatrixXd& out) {
    return step_loss(sys, out);
  };
  const TrainResult tr = train(*net_, inputs, loss, tc);

  // The loss is defined on training-mode (batch-statistics) outputs, so the
  // accepted coefficients are read back the same way.
  const Eigen::MatrixXd out = forward(*net_, inputs, Mode::Train);
  coef_ = out.col(k);
  t_ += dt_;
  ++step_index_;

  // Between-step basis adaptation, per dimension. The reference indicator is
  // refreshed only when a controller fires, so slow cumulative growth of the
  // indicator can still trip a trigger many steps later.
  for (int d = 0; d < disc_.dim(); ++d) {
    double f = disc_.indicator(coef_, d);
    const double f_ref = astate_.f_ref[d];
    bool adapted = false;
    if (adapt_.enable_scaling) {
      BasisDescriptor nb = disc_.bases()[d];
      nb.beta = scaling_update(f_ref, f, nb.beta, adapt_);
      if (nb != disc_.bases()[d]) {
        disc_.set_basis(d, nb, coef_);
        adapted = true;
      }
    }
    if (adapt_.enable_moving && disc_.dim() == 1 &&
        disc_.bases()[d].family == BasisFamily::HermiteFunction) {
      const double x_left = move_update(disc_.to_expansion(coef_), adapt_);
      if (x_left != disc_.bases()[d].x_left) {
        BasisDescriptor nb = disc_.bases()[d];
        nb.x_left = x_left;
        disc_.set_basis(d, nb, coef_);
        adapted = true;
      }
    }
    if ((adapt_.enable_p_refine || adapt_.enable_p_decrease) && disc_.dim() == 1) {
      f = disc_.indicator(coef_, d);
      const auto [new_order, new_rho] =
          p_refine_update(f_ref, f, disc_.order(), astate_.rho[d], adapt_);
      astate_.rho[d] = new_rho;
      if (new_order != disc_.order()) {
        disc_.set_order(new_order, coef_);
        adapted = true;
      }
    }
    if (adapted) astate_.f_ref[d] = disc_.indicator(coef_, d);
  }

  StepRecord rec;
  rec.step = step_index_;
  rec.t = t_;
  rec.loss = tr.history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : tr.history.back();
  rec.l2_error = disc_.error_vs_analytic(coef_, t_);
  for (int d = 0; d < 3; ++d) {
    const bool used = d < disc_.dim();
    rec.f[d] = used ? disc_.indicator(coef_, d)
                    : std::numeric_limits<double>::quiet_NaN();
    rec.beta[d] =
        used ? disc_.bases()[d].beta : std::numeric_limits<double>::quiet_NaN();
  }
  rec.x_left = disc_.bases()[0].x_left;
  rec.order = disc_.order();
  rec.epochs = tr.epochs;
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return rec;
}

std::vector<StepRecord> Stepper::run(double t_end) {
  std::vector<StepRecord> records;
  const double eps = 1e-9 * dt_;
  while (t_ + dt_ <= t_end + eps) records.push_back(step());
  return records;
}

std::vector<StepRecord> solve(const ProblemSpec& spec, int stages, double dt,
                              double t_end, const NetConfig& net,
                              const AdaptiveConfig& adapt,
                              std::optional<double> gamma_cross) {
  Discretization disc(spec, spec.default_bases, spec.default_order, gamma_cross);
  Stepper stepper(spec, std::move(disc), gauss_legendre_tableau(stages), dt, net,
                  adapt);
  return stepper.run(t_end);
}

}  // namespace spinn
