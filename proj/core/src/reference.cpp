#include "spinn/reference.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinn {

BandMatrix::BandMatrix(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("BandMatrix: size must be >= 1");
  main_ = Eigen::VectorXd::Zero(n);
  upper2_ = Eigen::VectorXd::Zero(std::max(0, n - 2));
}

double BandMatrix::entry(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::out_of_range("BandMatrix::entry");
  if (i == j) return main_[i];
  if (j - i == 2) return upper2_[i];
  if (i - j == 2) return upper2_[j];
  return 0.0;
}

void BandMatrix::set(int i, int j, double v) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::out_of_range("BandMatrix::set");
  if (i == j)
    main_[i] = v;
  else if (j - i == 2)
    upper2_[i] = v;
  else if (i - j == 2)
    upper2_[j] = v;
  else
    throw std::invalid_argument("BandMatrix::set: off-band entry");
}

Eigen::MatrixXd BandMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) m(i, i) = main_[i];
  for (int i = 0; i + 2 < n_; ++i) m(i, i + 2) = m(i + 2, i) = upper2_[i];
  return m;
}

Eigen::VectorXd BandMatrix::apply(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw std::invalid_argument("BandMatrix::apply: size mismatch");
  Eigen::VectorXd y = main_.cwiseProduct(x);
  for (int i = 0; i + 2 < n_; ++i) {
    y[i] += upper2_[i] * x[i + 2];
    y[i + 2] += upper2_[i] * x[i];
  }
  return y;
}

BandMatrix hermite_laplacian(int order, double beta) {
  const int n = order + 1;
  BandMatrix m(n);
  const double b2 = beta * beta;
  for (int i = 0; i < n; ++i) {
    m.set(i, i, -b2 * (i + 0.5));
    if (i + 2 < n) m.set(i, i + 2, b2 * std::sqrt((i + 1.0) * (i + 2.0)) / 2.0);
  }
  return m;
}

std::vector<StepRecord> cn_solve(const ProblemSpec& spec, double dt, double t_end,
                                 const AdaptiveConfig& adapt) {
  if (spec.dim != 1 || spec.op != OperatorKind::Diffusion ||
      spec.default_bases[0].family != BasisFamily::HermiteFunction)
    throw std::invalid_argument("cn_solve: 1D Hermite diffusion problems only");
  if (dt <= 0.0) throw std::invalid_argument("cn_solve: dt must be positive");

  Discretization disc(spec, spec.default_bases, spec.default_order);
  Eigen::VectorXd u = disc.project_initial();
  double f_ref = disc.indicator(u, 0);

  std::vector<StepRecord> records;
  double t = 0.0;
  int step = 0;
  const double eps = 1e-9 * dt;
  while (t + dt <= t_end + eps) {
    const auto t_start = std::chrono::steady_clock::now();
    const int n = disc.coef_size();
    const Eigen::MatrixXd d =
        hermite_laplacian(disc.order(), disc.bases()[0].beta).dense() * spec.kappa;
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * d;
    Eigen::VectorXd rhs = u + 0.5 * dt * (d * u);
    if (spec.source)
      rhs += 0.5 * dt * (disc.source_coeffs(t) + disc.source_coeffs(t + dt));
    u = lhs.partialPivLu().solve(rhs);
    t += dt;
    ++step;

    if (adapt.enable_scaling) {
      const double f = disc.indicator(u, 0);
      BasisDescriptor nb = disc.bases()[0];
      nb.beta = scaling_update(f_ref, f, nb.beta, adapt);
      if (nb != disc.bases()[0]) {
        disc.set_basis(0, nb, u);
        f_ref = disc.indicator(u, 0);
      }
    }

    StepRecord rec;
    rec.step = step;
    rec.t = t;
    rec.loss = 0.0;
    rec.l2_error = disc.error_vs_analytic(u, t);
    rec.f[0] = disc.indicator(u, 0);
    rec.f[1] = rec.f[2] = std::numeric_limits<double>::quiet_NaN();
    rec.beta[0] = disc.bases()[0].beta;
    rec.beta[1] = rec.beta[2] = std::numeric_limits<double>::quiet_NaN();
    rec.x_left = disc.bases()[0].x_left;
    rec.order = disc.order();
    rec.epochs = 0;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    records.push_back(rec);
  }
  return records;
}

}  // namespace spinn
