#include "spinn/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNewtonCap = 100;
constexpr double kNewtonTol = 1e-14;

// Orthonormal Hermite functions psi_0..psi_n at y (weight already folded in,
// so the recurrence never overflows).
void hermite_functions(int n, double y, std::vector<double>& out) {
  out.resize(n + 1);
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  if (n == 0) return;
  out[1] = std::sqrt(2.0) * y * out[0];
  for (int i = 1; i < n; ++i) {
    out[i + 1] = std::sqrt(2.0 / (i + 1)) * y * out[i] -
                 std::sqrt(double(i) / (i + 1)) * out[i - 1];
  }
}

// Orthonormal Laguerre functions l_i(y) = L_i(y) exp(-y/2) on R+.
void laguerre_functions(int n, double y, std::vector<double>& out) {
  out.resize(n + 1);
  out[0] = std::exp(-0.5 * y);
  if (n == 0) return;
  out[1] = (1.0 - y) * out[0];
  for (int i = 1; i < n; ++i) {
    out[i + 1] = ((2.0 * i + 1.0 - y) * out[i] - i * out[i - 1]) / (i + 1);
  }
}

void chebyshev_polys(int n, double y, std::vector<double>& out) {
  out.resize(n + 1);
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = y;
  for (int i = 1; i < n; ++i) out[i + 1] = 2.0 * y * out[i] - out[i - 1];
}

// MMGF values R_i^{lambda,beta}(x), i = 0..n. lambda = 0 routes through
// Chebyshev; otherwise the Gegenbauer recurrence is used.
void mmgf_values(const BasisDescriptor& d, int n, double x,
                 std::vector<double>& out) {
  const double bx = d.beta * x;
  const double s = 1.0 + bx * bx;
  const double y = bx / std::sqrt(s);
  if (d.gegenbauer_lambda == 0.0) {
    chebyshev_polys(n, y, out);
    const double pre = 1.0 / std::sqrt(s);
    for (double& v : out) v *= pre;
    return;
  }
  const double lam = d.gegenbauer_lambda;
  out.resize(n + 1);
  out[0] = 1.0;
  if (n >= 1) out[1] = 2.0 * lam * y;
  for (int i = 2; i <= n; ++i) {
    out[i] = (2.0 * (i + lam - 1.0) * y * out[i - 1] -
              (i + 2.0 * lam - 2.0) * out[i - 2]) / i;
  }
  const double pre = std::pow(s, -0.5 * (lam + 1.0));
  for (double& v : out) v *= pre;
}

[[noreturn]] void unsupported(const char* what) {
  throw std::invalid_argument(std::string("basis: unsupported ") + what);
}

void check_descriptor(const BasisDescriptor& d) {
  if (!(d.beta > 0.0)) throw std::invalid_argument("basis: beta must be > 0");
  if (d.family == BasisFamily::MappedGegenbauer && d.gegenbauer_lambda < -0.5)
    throw std::invalid_argument("basis: gegenbauer_lambda must be >= -1/2");
}

QuadratureRule gauss_hermite(const BasisDescriptor& d, int q) {
  std::vector<double> y(q), w(q);
  std::vector<double> psi;
  const int m = (q + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * q + 1.0) - 1.85575 * std::pow(2.0 * q + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(double(q), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * y[q - 1];
    else if (i == 3)
      z = 1.91 * z - 0.91 * y[q - 2];
    else
      z = 2.0 * z - y[q - i + 1];
    int it = 0;
    for (; it < kNewtonCap; ++it) {
      hermite_functions(q, z, psi);
      const double deriv = -z * psi[q] + std::sqrt(2.0 * q) * psi[q - 1];
      const double dz = psi[q] / deriv;
      z -= dz;
      if (std::abs(dz) <= kNewtonTol * std::max(1.0, std::abs(z))) break;
    }
    if (it >= kNewtonCap)
      throw std::runtime_error("quadrature_rule: Gauss-Hermite Newton iteration did not converge");
    hermite_functions(q - 1, z, psi);
    double chr = 0.0;
    for (int j = 0; j < q; ++j) chr += psi[j] * psi[j];
    const double lw = 1.0 / chr;  // Lebesgue weight via the Christoffel function
    y[q - 1 - i] = z;
    y[i] = -z;
    w[q - 1 - i] = lw;
    w[i] = lw;
  }
  if (q % 2 == 1) y[q / 2] = 0.0;
  QuadratureRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    rule.nodes[k] = d.x_left + y[k] / d.beta;
    rule.weights[k] = w[k] / d.beta;
  }
  return rule;
}

QuadratureRule gauss_laguerre(const BasisDescriptor& d, int q) {
  std::vector<double> y(q), w(q);
  std::vector<double> l;
  double z = 0.0;
  for (int i = 0; i < q; ++i) {
    if (i == 0)
      z = 3.0 / (1.0 + 2.4 * q);
    else if (i == 1)
      z += 15.0 / (1.0 + 2.5 * q);
    else {
      const double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - y[i - 2]);
    }
    int it = 0;
    for (; it < kNewtonCap; ++it) {
      laguerre_functions(q, z, l);
      const double deriv = ((q - 0.5 * z) * l[q] - q * l[q - 1]) / z;
      const double dz = l[q] / deriv;
      z -= dz;
      if (std::abs(dz) <= kNewtonTol * std::max(1.0, std::abs(z))) break;
    }
    if (it >= kNewtonCap)
      throw std::runtime_error("quadrature_rule: Gauss-Laguerre Newton iteration did not converge");
    laguerre_functions(q - 1, z, l);
    double chr = 0.0;
    for (int j = 0; j < q; ++j) chr += l[j] * l[j];
    y[i] = z;
    w[i] = 1.0 / chr;
  }
  QuadratureRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    rule.nodes[k] = y[k] / d.beta;
    rule.weights[k] = w[k] / d.beta;
  }
  return rule;
}

QuadratureRule chebyshev_gauss_lobatto(int q) {
  QuadratureRule rule;
  if (q == 1) {  // one-point Gauss-Chebyshev
    rule.nodes = {0.0};
    rule.weights = {kPi};
    return rule;
  }
  const int m = q - 1;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int k = 0; k <= m; ++k) {
    rule.nodes[k] = -std::cos(kPi * k / m);
    rule.weights[k] = (k == 0 || k == m) ? kPi / (2.0 * m) : kPi / m;
  }
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  if (m % 2 == 0) rule.nodes[m / 2] = 0.0;
  return rule;
}

QuadratureRule mmgf_rule(const BasisDescriptor& d, int q) {
  if (d.gegenbauer_lambda != 0.0)
    unsupported("quadrature for MappedGegenbauer with lambda != 0");
  QuadratureRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    const double y = std::cos((2.0 * (q - 1 - k) + 1.0) * kPi / (2.0 * q));
    const double s = 1.0 - y * y;
    rule.nodes[k] = y / (d.beta * std::sqrt(s));
    rule.weights[k] = kPi / (q * d.beta * s);
  }
  return rule;
}

}  // namespace

double eval_basis(const BasisDescriptor& desc, int i, double x) {
  if (i < 0) throw std::invalid_argument("eval_basis: negative order");
  return eval_basis_all(desc, i, x)[i];
}

std::vector<double> eval_basis_all(const BasisDescriptor& desc, int n, double x) {
  check_descriptor(desc);
  if (n < 0) throw std::invalid_argument("eval_basis: negative order");
  std::vector<double> out;
  switch (desc.family) {
    case BasisFamily::HermiteFunction: {
      hermite_functions(n, desc.beta * (x - desc.x_left), out);
      const double sb = std::sqrt(desc.beta);
      for (double& v : out) v *= sb;
      break;
    }
    case BasisFamily::LaguerreFunction: {
      if (x < 0.0) throw std::invalid_argument("eval_basis: x outside R+ for Laguerre");
      laguerre_functions(n, desc.beta * x, out);
      const double sb = std::sqrt(desc.beta);
      for (double& v : out) v *= sb;
      break;
    }
    case BasisFamily::ChebyshevPolynomial:
      if (x < -1.0 || x > 1.0)
        throw std::invalid_argument("eval_basis: x outside [-1,1] for Chebyshev");
      chebyshev_polys(n, x, out);
      break;
    case BasisFamily::MappedGegenbauer:
      mmgf_values(desc, n, x, out);
      break;
  }
  return out;
}

QuadratureRule quadrature_rule(const BasisDescriptor& desc, int q) {
  check_descriptor(desc);
  if (q < 1) throw std::invalid_argument("quadrature_rule: q must be >= 1");
  switch (desc.family) {
    case BasisFamily::HermiteFunction: return gauss_hermite(desc, q);
    case BasisFamily::LaguerreFunction: return gauss_laguerre(desc, q);
    case BasisFamily::ChebyshevPolynomial: return chebyshev_gauss_lobatto(q);
    case BasisFamily::MappedGegenbauer: return mmgf_rule(desc, q);
  }
  unsupported("family");
}

double basis_norm_sq(const BasisDescriptor& desc, int i) {
  switch (desc.family) {
    case BasisFamily::HermiteFunction:
    case BasisFamily::LaguerreFunction:
      return 1.0;
    case BasisFamily::ChebyshevPolynomial:
      return i == 0 ? kPi : 0.5 * kPi;
    case BasisFamily::MappedGegenbauer:
      if (desc.gegenbauer_lambda != 0.0)
        unsupported("norm for MappedGegenbauer with lambda != 0");
      return (i == 0 ? kPi : 0.5 * kPi) / desc.beta;
  }
  unsupported("family");
}

std::vector<double> project(std::span<const double> values_at_nodes,
                            const QuadratureRule& rule,
                            const BasisDescriptor& desc, int order) {
  if (values_at_nodes.size() != rule.nodes.size())
    throw std::invalid_argument("project: node/value length mismatch");
  const int q = int(rule.nodes.size());
  std::vector<double> w(order + 1, 0.0);
  std::vector<double> phi;
  for (int k = 0; k < q; ++k) {
    phi = eval_basis_all(desc, order, rule.nodes[k]);
    const double fw = rule.weights[k] * values_at_nodes[k];
    for (int i = 0; i <= order; ++i) w[i] += fw * phi[i];
  }
  if (desc.family == BasisFamily::ChebyshevPolynomial) {
    // Discrete CGL norms: the top mode aliases to norm pi on a q-node grid.
    for (int i = 0; i <= order; ++i)
      w[i] /= (i == 0 || i == q - 1) ? kPi : 0.5 * kPi;
  } else {
    for (int i = 0; i <= order; ++i) w[i] /= basis_norm_sq(desc, i);
  }
  return w;
}

std::vector<double> project(const std::function<double(double)>& f,
                            const BasisDescriptor& desc, int order, int q) {
  if (q < order + 1)
    throw std::invalid_argument("project: q must be >= order + 1");
  const QuadratureRule rule = quadrature_rule(desc, q);
  std::vector<double> vals(rule.nodes.size());
  for (size_t k = 0; k < rule.nodes.size(); ++k) vals[k] = f(rule.nodes[k]);
  return project(vals, rule, desc, order);
}

std::vector<double> project(const std::function<double(double)>& f,
                            const BasisDescriptor& desc, int order) {
  return project(f, desc, order, order + 1);
}

DerivativeMap::DerivativeMap(const BasisDescriptor& desc, int order)
    : desc_(desc), order_(order) {
  check_descriptor(desc);
  if (order != 1 && order != 2)
    throw std::invalid_argument("derivative_map: order must be 1 or 2");
  if (desc.family == BasisFamily::MappedGegenbauer)
    unsupported("derivative map for MappedGegenbauer");
  if (desc.family == BasisFamily::LaguerreFunction && order == 2)
    unsupported("order-2 derivative map for Laguerre");
}

Eigen::MatrixXd DerivativeMap::dense(int n) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double b = desc_.beta;
  switch (desc_.family) {
    case BasisFamily::HermiteFunction:
      if (order_ == 1) {
        for (int j = 0; j < n; ++j) {
          if (j >= 1) m(j - 1, j) = b * std::sqrt(0.5 * j);
          if (j + 1 < n) m(j + 1, j) = -b * std::sqrt(0.5 * (j + 1));
        }
      } else {
        for (int i = 0; i < n; ++i) {
          m(i, i) = -b * b * (i + 0.5);
          if (i + 2 < n) m(i, i + 2) = b * b * 0.5 * std::sqrt(double(i + 1) * (i + 2));
          if (i >= 2) m(i, i - 2) = b * b * 0.5 * std::sqrt(double(i) * (i - 1));
        }
      }
      break;
    case BasisFamily::LaguerreFunction:
      for (int j = 0; j < n; ++j) {
        m(j, j) = -0.5 * b;
        for (int i = 0; i < j; ++i) m(i, j) = -b;
      }
      break;
    case BasisFamily::ChebyshevPolynomial: {
      Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n);
      for (int j = 1; j < n; ++j)
        for (int i = j - 1; i >= 0; i -= 2) d1(i, j) = (i == 0 ? 1.0 : 2.0) * j;
      m = (order_ == 1) ? d1 : Eigen::MatrixXd(d1 * d1);
      break;
    }
    default:
      unsupported("family for derivative map");
  }
  return m;
}

double DerivativeMap::entry(int i, int j) const {
  if (i < 0 || j < 0) return 0.0;
  if (desc_.family == BasisFamily::HermiteFunction) {
    const double b = desc_.beta;
    if (order_ == 1) {
      if (i == j - 1) return b * std::sqrt(0.5 * j);
      if (i == j + 1) return -b * std::sqrt(0.5 * (j + 1));
      return 0.0;
    }
    if (i == j) return -b * b * (i + 0.5);
    if (j == i + 2) return b * b * 0.5 * std::sqrt(double(i + 1) * (i + 2));
    if (j == i - 2) return b * b * 0.5 * std::sqrt(double(i) * (i - 1));
    return 0.0;
  }
  const int n = std::max(i, j) + 1;
  return dense(n)(i, j);
}

std::vector<double> DerivativeMap::apply(std::span<const double> coeffs) const {
  const int n = int(coeffs.size());
  Eigen::Map<const Eigen::VectorXd> w(coeffs.data(), n);
  Eigen::VectorXd r = dense(n) * w;
  return std::vector<double>(r.data(), r.data() + n);
}

}  // namespace spinn
