#include "spinn/inverse.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinn {

InferenceResult infer_parameter(const Discretization& disc,
                                const Eigen::VectorXd& obs_left,
                                const Eigen::VectorXd& obs_right,
                                const ButcherTableau& tab, double t_left, double dt,
                                double theta_init, const NetConfig& cfg) {
  if (disc.dim() != 1 || disc.spec().op != OperatorKind::Diffusion)
    throw std::invalid_argument("infer_parameter: 1D diffusion problems only");
  const int n = disc.coef_size();
  const int k = tab.stages;
  if (obs_left.size() != n || obs_right.size() != n)
    throw std::invalid_argument("infer_parameter: observation size mismatch");

  const Eigen::MatrixXd lap = DerivativeMap(disc.bases()[0], 2).dense(n);
  std::vector<Eigen::VectorXd> src;
  for (int r = 0; r < k; ++r)
    src.push_back(disc.spec().source ? disc.source_coeffs(t_left + tab.c[r] * dt)
                                     : Eigen::VectorXd::Zero(n).eval());
  const Eigen::ArrayXd nw = disc.norm_weights().array();

  double theta = theta_init;
  double dtheta = 0.0, sse_l = 0.0, sse_r = 0.0;
  const OutputLoss loss = [&](const Eigen::MatrixXd& w) {
    LossEval le;
    le.grad = Eigen::MatrixXd::Zero(n, k);
    Eigen::MatrixXd h(n, k), g(n, k);
    for (int r = 0; r < k; ++r) {
      h.col(r) = lap * w.col(r);
      g.col(r) = theta * h.col(r) + src[r];
    }
    Eigen::MatrixXd wl(n, k), wr(n, k);  // norm-weighted residuals
    sse_l = sse_r = 0.0;
    for (int s = 0; s < k; ++s) {
      Eigen::VectorXd rl = w.col(s) - obs_left;
      Eigen::VectorXd rr = w.col(s) - obs_right;
      for (int r = 0; r < k; ++r) {
        rl -= dt * tab.a(s, r) * g.col(r);
        rr -= dt * (tab.a(s, r) - tab.b[r]) * g.col(r);
      }
      sse_l += (rl.array().square() * nw).sum();
      sse_r += (rr.array().square() * nw).sum();
      wl.col(s) = (rl.array() * nw).matrix();
      wr.col(s) = (rr.array() * nw).matrix();
    }
    le.value = sse_l + sse_r;
    dtheta = 0.0;
    for (int q = 0; q < k; ++q) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (int s = 0; s < k; ++s)
        acc += tab.a(s, q) * wl.col(s) + (tab.a(s, q) - tab.b[q]) * wr.col(s);
      le.grad.col(q) =
          2.0 * (wl.col(q) + wr.col(q)) - 2.0 * dt * theta * (lap.transpose() * acc);
      dtheta -= 2.0 * dt * acc.dot(h.col(q));
    }
    return le;
  };

  std::vector<int> dims;
  dims.push_back(1);
  dims.insert(dims.end(), size_t(cfg.hidden_layers), cfg.width);
  dims.push_back(n);
  MlpParams p = init_mlp(dims, cfg.seed);
  Eigen::MatrixXd inputs = tab.c.transpose();

  InferenceResult res;
  double last_dtheta = 0.0;
  MlpGradients last;
  bool has_last = false;
  for (long epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double value = 0.0;
    MlpGradients g = loss_gradient(p, inputs, loss, &value);
    if (!std::isfinite(value) || !std::isfinite(dtheta)) {
      if (has_last) {
        for (size_t l = 0; l < p.w.size(); ++l) {
          p.w[l] += cfg.eta * last.w[l];
          p.b[l] += cfg.eta * last.b[l];
        }
        for (int l = 0; l < p.hidden_count(); ++l) {
          p.bn_scale[l] += cfg.eta * last.bn_scale[l];
          p.bn_shift[l] += cfg.eta * last.bn_shift[l];
        }
        theta += cfg.eta * last_dtheta;
      }
      res.diverged = true;
      break;
    }
    res.epochs = epoch + 1;
    if (value <= cfg.tol) break;
    for (size_t l = 0; l < p.w.size(); ++l) {
      p.w[l] -= cfg.eta * g.w[l];
      p.b[l] -= cfg.eta * g.b[l];
    }
    for (int l = 0; l < p.hidden_count(); ++l) {
      p.bn_scale[l] -= cfg.eta * g.bn_scale[l];
      p.bn_shift[l] -= cfg.eta * g.bn_shift[l];
    }
    theta -= cfg.eta * dtheta;
    last = std::move(g);
    last_dtheta = dtheta;
    has_last = true;
  }

  res.stage_coef = forward(p, inputs, Mode::Train);
  res.sse = loss(res.stage_coef).value;
  res.sse_left = sse_l;
  res.sse_right = sse_r;
  res.theta_hat = theta;
  return res;
}

std::vector<InferenceWindowRecord> run_inference_windows(
    const ProblemSpec& spec, double sigma, int windows, const ButcherTableau& tab,
    double dt, double theta_init, const NetConfig& cfg, const AdaptiveConfig& adapt,
    std::uint64_t noise_seed) {
  Discretization disc(spec, spec.default_bases, spec.default_order);
  std::vector<InferenceWindowRecord> out;
  double theta = theta_init;
  double f_ref = -1.0;
  NetConfig wcfg = cfg;
  for (int j = 0; j < windows; ++j) {
    const auto t_start = std::chrono::steady_clock::now();
    const double t_left = j * dt;
    const QuadratureRule rule =
        quadrature_rule(disc.bases()[0], disc.order() + 41);
    auto project_obs = [&](double t, std::uint64_t seed) {
      const std::vector<double> values = observe_noisy(spec, t, sigma, rule, seed);
      const std::vector<double> w = project(values, rule, disc.bases()[0], disc.order());
      return Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()).eval();
    };
    const Eigen::VectorXd u_l = project_obs(t_left, noise_seed + 2 * j);
    const Eigen::VectorXd u_r = project_obs(t_left + dt, noise_seed + 2 * j + 1);

    wcfg.seed = cfg.seed + std::uint64_t(j);
    const InferenceResult r =
        infer_parameter(disc, u_l, u_r, tab, t_left, dt, theta, wcfg);
    theta = r.theta_hat;

    double f = disc.indicator(u_r, 0);
    if (adapt.enable_scaling && f_ref >= 0.0) {
      BasisDescriptor nb = disc.bases()[0];
      nb.beta = scaling_update(f_ref, f, nb.beta, adapt);
      if (nb != disc.bases()[0]) {
        Eigen::VectorXd tmp = u_r;
        disc.set_basis(0, nb, tmp);
        f = disc.indicator(tmp, 0);
      }
    }
    f_ref = f;

    InferenceWindowRecord rec;
    rec.window = j;
    rec.t = t_left;
    rec.theta_hat = r.theta_hat;
    rec.sse = r.sse;
    rec.f = f;
    rec.beta = disc.bases()[0].beta;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    out.push_back(rec);
  }
  return out;
}

SourceRecoveryResult recover_source(const std::vector<Eigen::VectorXd>& u_obs,
                                    double lambda, const BasisDescriptor& basis,
                                    int order, const ButcherTableau& tab,
                                    double t_left, double dt, const NetConfig& cfg,
                                    const SpaceTimeFn& true_source) {
  const int k = tab.stages;
  const int n = order + 1;
  if (int(u_obs.size()) != k + 2)
    throw std::invalid_argument(
        "recover_source: need window start, K stage, and window end observations");
  for (const auto& u : u_obs)
    if (u.size() != n)
      throw std::invalid_argument("recover_source: observation size mismatch");
  if (lambda < 0.0) throw std::invalid_argument("recover_source: lambda < 0");

  const Eigen::MatrixXd lap = DerivativeMap(basis, 2).dense(n);
  std::vector<Eigen::VectorXd> uxx;  // at stage times
  for (int r = 0; r < k; ++r) uxx.push_back(lap * u_obs[r + 1]);

  double sse_l = 0.0, sse_r = 0.0;
  const OutputLoss loss = [&](const Eigen::MatrixXd& h) {
    LossEval le;
    le.grad = Eigen::MatrixXd::Zero(n, k);
    Eigen::MatrixXd p(n, k);
    for (int r = 0; r < k; ++r) p.col(r) = uxx[r] + h.col(r);
    Eigen::MatrixXd rl(n, k), rr(n, k);
    sse_l = sse_r = 0.0;
    for (int s = 0; s < k; ++s) {
      rl.col(s) = u_obs[s + 1] - u_obs[0];
      rr.col(s) = u_obs[s + 1] - u_obs[k + 1];
      for (int r = 0; r < k; ++r) {
        rl.col(s) -= dt * tab.a(s, r) * p.col(r);
        rr.col(s) -= dt * (tab.a(s, r) - tab.b[r]) * p.col(r);
      }
      sse_l += rl.col(s).squaredNorm();
      sse_r += rr.col(s).squaredNorm();
    }
    le.value = sse_l + sse_r + lambda * h.squaredNorm();
    for (int q = 0; q < k; ++q) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (int s = 0; s < k; ++s)
        acc += tab.a(s, q) * rl.col(s) + (tab.a(s, q) - tab.b[q]) * rr.col(s);
      le.grad.col(q) = -2.0 * dt * acc + 2.0 * lambda * h.col(q);
    }
    return le;
  };

  std::vector<int> dims;
  dims.push_back(1);
  dims.insert(dims.end(), size_t(cfg.hidden_layers), cfg.width);
  dims.push_back(n);
  MlpParams p = init_mlp(dims, cfg.seed);
  const Eigen::MatrixXd inputs = tab.c.transpose();
  TrainConfig tc;
  tc.eta = cfg.eta;
  tc.max_epochs = cfg.max_epochs;
  tc.tol = cfg.tol;
  tc.seed = cfg.seed;
  const TrainResult tr = train(p, inputs, loss, tc);

  SourceRecoveryResult res;
  res.h = forward(p, inputs, Mode::Train);
  res.sse0 = loss(res.h).value - lambda * res.h.squaredNorm();
  res.sse_left = sse_l;
  res.sse_right = sse_r;
  res.h_norm = res.h.norm();
  res.epochs = tr.epochs;
  res.diverged = tr.diverged;
  if (true_source) {
    double acc = 0.0;
    for (int s = 0; s < k; ++s) {
      SpectralExpansion e;
      e.basis = basis;
      e.order = order;
      e.re.assign(res.h.col(s).data(), res.h.col(s).data() + n);
      const double ts = t_left + tab.c[s] * dt;
      const double err = l2_error(
          e,
          [&](double x) {
            const double xv[1] = {x};
            return true_source(xv, ts);
          },
          order + 41);
      acc += err * err;
    }
    res.reconstruction_error = std::sqrt(acc / k);
  } else {
    res.reconstruction_error = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace spinn
