#include "spinn/expansion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinn {

namespace {

constexpr double kPi = std::numbers::pi;

double indicator_weight(const BasisDescriptor& b, int i) {
  // The paper defines gamma_i only for Chebyshev; the orthonormal families
  // and MMGF take weight 1.
  if (b.family == BasisFamily::ChebyshevPolynomial)
    return i == 0 ? kPi : 0.5 * kPi;
  return 1.0;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
}

}  // namespace

double evaluate(const SpectralExpansion& e, double x) {
  const auto phi = eval_basis_all(e.basis, e.order, x);
  double s = 0.0;
  for (int i = 0; i <= e.order; ++i) s += e.re[i] * phi[i];
  return s;
}

double evaluate_imag(const SpectralExpansion& e, double x) {
  if (!e.is_complex()) return 0.0;
  const auto phi = eval_basis_all(e.basis, e.order, x);
  double s = 0.0;
  for (int i = 0; i <= e.order; ++i) s += e.im[i] * phi[i];
  return s;
}

double evaluate(const MultiExpansion& e, std::span<const double> x) {
  const int d = e.set.dim;
  if (int(x.size()) != d) throw std::invalid_argument("evaluate: dimension mismatch");
  std::vector<std::vector<double>> phi(d);
  for (int k = 0; k < d; ++k) phi[k] = eval_basis_all(e.bases[k], e.set.cap, x[k]);
  double s = 0.0;
  for (int m = 0; m < e.set.size(); ++m) {
    double p = e.coef[m];
    for (int k = 0; k < d; ++k) p *= phi[k][e.set.indices[m][k]];
    s += p;
  }
  return s;
}

double frequency_indicator(std::span<const double> re, std::span<const double> im,
                           const BasisDescriptor& basis, int order) {
  if (order < 1) return 0.0;
  const int lo = order - order / 3 + 1;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= order; ++i) {
    double e2 = re[i] * re[i];
    if (!im.empty()) e2 += im[i] * im[i];
    e2 *= indicator_weight(basis, i);
    den += e2;
    if (i >= lo) num += e2;
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

double frequency_indicator(const SpectralExpansion& e) {
  return frequency_indicator(e.re, e.im, e.basis, e.order);
}

double frequency_indicator(const MultiExpansion& e, int dim) {
  const int cap = e.set.cap;
  if (cap < 1) return 0.0;
  std::vector<double> marginal(cap + 1, 0.0);
  for (int m = 0; m < e.set.size(); ++m)
    marginal[e.set.indices[m][dim]] += e.coef[m] * e.coef[m];
  const int lo = cap - cap / 3 + 1;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= cap; ++i) {
    den += marginal[i];
    if (i >= lo) num += marginal[i];
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

SpectralExpansion reproject(const SpectralExpansion& e,
                            const BasisDescriptor& new_basis, int new_order) {
  if (new_basis.family != e.basis.family)
    throw std::invalid_argument("reproject: family mismatch");
  check_finite(e.re, "reproject");
  SpectralExpansion out;
  out.basis = new_basis;
  out.order = new_order;
  if (new_basis == e.basis) {
    out.re.assign(new_order + 1, 0.0);
    for (int i = 0; i <= std::min(e.order, new_order); ++i) out.re[i] = e.re[i];
    if (e.is_complex()) {
      out.im.assign(new_order + 1, 0.0);
      for (int i = 0; i <= std::min(e.order, new_order); ++i) out.im[i] = e.im[i];
    }
    return out;
  }
  const int q = std::max(e.order, new_order) + 10;
  out.re = project([&](double x) { return evaluate(e, x); }, new_basis, new_order, q);
  if (e.is_complex())
    out.im = project([&](double x) { return evaluate_imag(e, x); }, new_basis, new_order, q);
  return out;
}

Eigen::MatrixXd reprojection_matrix(const BasisDescriptor& old_basis, int old_order,
                                    const BasisDescriptor& new_basis, int new_order) {
  if (new_basis.family != old_basis.family)
    throw std::invalid_argument("reproject: family mismatch");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(new_order + 1, old_order + 1);
  if (new_basis == old_basis) {
    for (int i = 0; i <= std::min(new_order, old_order); ++i) t(i, i) = 1.0;
    return t;
  }
  const int q = std::max(old_order, new_order) + 10;
  const QuadratureRule rule = quadrature_rule(new_basis, q);
  for (int k = 0; k < q; ++k) {
    const auto pn = eval_basis_all(new_basis, new_order, rule.nodes[k]);
    const auto po = eval_basis_all(old_basis, old_order, rule.nodes[k]);
    for (int i = 0; i <= new_order; ++i)
      for (int j = 0; j <= old_order; ++j)
        t(i, j) += rule.weights[k] * pn[i] * po[j];
  }
  for (int i = 0; i <= new_order; ++i) t.row(i) /= basis_norm_sq(new_basis, i);
  return t;
}

MultiExpansion reproject(const MultiExpansion& e,
                         const std::vector<BasisDescriptor>& new_bases) {
  const int d = e.set.dim;
  std::vector<Eigen::MatrixXd> t(d);
  for (int k = 0; k < d; ++k)
    t[k] = reprojection_matrix(e.bases[k], e.set.cap, new_bases[k], e.set.cap);
  MultiExpansion out;
  out.bases = new_bases;
  out.set = e.set;
  out.coef.assign(e.set.size(), 0.0);
  for (int n = 0; n < e.set.size(); ++n) {
    double s = 0.0;
    for (int m = 0; m < e.set.size(); ++m) {
      double p = e.coef[m];
      for (int k = 0; k < d; ++k) p *= t[k](e.set.indices[n][k], e.set.indices[m][k]);
      s += p;
    }
    out.coef[n] = s;
  }
  return out;
}

MultiIndexSet hyperbolic_index_set(int dim, int cap, std::optional<double> gamma) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("hyperbolic_index_set: dim must be in [1,3]");
  if (gamma && *gamma >= 1.0) throw std::invalid_argument("hyperbolic_index_set: gamma must be < 1");
  MultiIndexSet set;
  set.dim = dim;
  set.cap = cap;
  set.gamma_cross = gamma;
  std::array<int, 3> n{0, 0, 0};
  const int n1max = cap, n2max = dim >= 2 ? cap : 0, n3max = dim >= 3 ? cap : 0;
  for (n[0] = 0; n[0] <= n1max; ++n[0])
    for (n[1] = 0; n[1] <= n2max; ++n[1])
      for (n[2] = 0; n[2] <= n3max; ++n[2]) {
        if (gamma) {
          int ninf = 0, mix = 1;
          for (int k = 0; k < dim; ++k) {
            ninf = std::max(ninf, n[k]);
            mix *= std::max(n[k], 1);
          }
          if (ninf > 0 &&
              mix * std::pow(double(ninf), -*gamma) >
                  std::pow(double(cap), 1.0 - *gamma) * (1.0 + 1e-12))
            continue;
        }
        set.indices.push_back(n);
      }
  return set;
}

double l2_error(const SpectralExpansion& e, const std::function<double(double)>& ref,
                int q) {
  const QuadratureRule rule = quadrature_rule(e.basis, q);
  double s = 0.0;
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    const double d = evaluate(e, rule.nodes[k]) - ref(rule.nodes[k]);
    s += rule.weights[k] * d * d;
  }
  return std::sqrt(s);
}

double l2_error(const SpectralExpansion& e, const std::function<double(double)>& ref_re,
                const std::function<double(double)>& ref_im, int q) {
  const QuadratureRule rule = quadrature_rule(e.basis, q);
  double s = 0.0;
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    const double dr = evaluate(e, rule.nodes[k]) - ref_re(rule.nodes[k]);
    const double di = evaluate_imag(e, rule.nodes[k]) - ref_im(rule.nodes[k]);
    s += rule.weights[k] * (dr * dr + di * di);
  }
  return std::sqrt(s);
}

double l2_error(const MultiExpansion& e,
                const std::function<double(std::span<const double>)>& ref, int q) {
  const int d = e.set.dim;
  std::vector<QuadratureRule> rules(d);
  for (int k = 0; k < d; ++k) rules[k] = quadrature_rule(e.bases[k], q);
  double s = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const int i1max = q, i2max = d >= 2 ? q : 1, i3max = d >= 3 ? q : 1;
  for (idx[0] = 0; idx[0] < i1max; ++idx[0])
    for (idx[1] = 0; idx[1] < i2max; ++idx[1])
      for (idx[2] = 0; idx[2] < i3max; ++idx[2]) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
          x[k] = rules[k].nodes[idx[k]];
          w *= rules[k].weights[idx[k]];
        }
        const double diff = evaluate(e, std::span<const double>(x.data(), d)) -
                            ref(std::span<const double>(x.data(), d));
        s += w * diff * diff;
      }
  return std::sqrt(s);
}

}  // namespace spinn
