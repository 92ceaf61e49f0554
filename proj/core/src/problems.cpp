#include "spinn/problems.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spinn {
namespace {

constexpr double kPi = std::numbers::pi;

// u(x,t) = sin(x)/sqrt(t+1) exp(-x^2/(4(t+1))) and the pieces needed to
// manufacture sources for u_t = kappa u_xx + f.
double heat_u(double x, double t) {
  const double s = t + 1.0;
  return std::sin(x) / std::sqrt(s) * std::exp(-x * x / (4.0 * s));
}

double heat_u_t(double x, double t) {
  const double s = t + 1.0;
  const double g = std::exp(-x * x / (4.0 * s)) / std::sqrt(s);
  return g * std::sin(x) * (x * x / (4.0 * s * s) - 0.5 / s);
}

double heat_u_xx(double x, double t) {
  const double s = t + 1.0;
  const double g = std::exp(-x * x / (4.0 * s)) / std::sqrt(s);
  return g * (-(x / s) * std::cos(x) -
              (1.0 + 0.5 / s - x * x / (4.0 * s * s)) * std::sin(x));
}

ProblemSpec heat_with_source(double kappa, bool known) {
  ProblemSpec p;
  p.id = known ? "heat-source" : "diffusivity-inference";
  p.domain = DomainTag::RealLine;
  p.dim = 1;
  p.op = OperatorKind::Diffusion;
  p.default_bases = {BasisDescriptor{BasisFamily::HermiteFunction, 0.8, 0.0}};
  p.default_order = known ? 32 : 16;
  p.kappa = kappa;
  p.kappa_known = known;
  p.source = [kappa](std::span<const double> x, double t) {
    return heat_u_t(x[0], t) - kappa * heat_u_xx(x[0], t);
  };
  p.initial = [](std::span<const double> x) { return heat_u(x[0], 0.0); };
  p.analytic = [](std::span<const double> x, double t) { return heat_u(x[0], t); };
  return p;
}

// Product-of-1D-kernels heat solution used by the 2D/3D problems; shift[i]
// is the per-dimension time offset.
ProblemSpec heat_nd(int dim) {
  const double shift[3] = {3.0, 2.0, 1.0};
  ProblemSpec p;
  p.id = dim == 2 ? "heat2d" : "heat3d";
  p.domain = dim == 2 ? DomainTag::RealPlane : DomainTag::Real3Space;
  p.dim = dim;
  p.op = OperatorKind::Diffusion;
  if (dim == 2) {
    p.default_bases = {BasisDescriptor{BasisFamily::HermiteFunction, 0.4, 0.0},
                       BasisDescriptor{BasisFamily::HermiteFunction, 0.5, 0.0}};
    p.default_order = 8;
  } else {
    p.default_bases = {BasisDescriptor{BasisFamily::HermiteFunction, 0.4, 0.0},
                       BasisDescriptor{BasisFamily::HermiteFunction, 0.5, 0.0},
                       BasisDescriptor{BasisFamily::HermiteFunction, 0.7, 0.0}};
    p.default_order = 9;
  }
  auto sol = [dim, shift](std::span<const double> x, double t) {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) {
      const double s = t + shift[d];
      v *= std::exp(-x[d] * x[d] / (4.0 * s)) / std::sqrt(s);
    }
    return v;
  };
  p.analytic = sol;
  p.initial = [sol](std::span<const double> x) { return sol(x, 0.0); };
  return p;
}

struct BoxMuller {
  std::mt19937_64 rng;
  bool has_spare = false;
  double spare = 0.0;

  explicit BoxMuller(std::uint64_t seed) : rng(seed) {}

  double uniform01() {  // (0, 1]
    return ((rng() >> 11) + 1.0) * 0x1p-53;
  }
  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u1 = uniform01(), u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * kPi * u2);
    has_spare = true;
    return r * std::cos(2.0 * kPi * u2);
  }
};

}  // namespace

ProblemSpec builtin_schrodinger(double zeta, double k) {
  using cd = std::complex<double>;
  ProblemSpec p;
  p.id = "schrodinger";
  p.domain = DomainTag::RealLine;
  p.dim = 1;
  p.op = OperatorKind::Schrodinger;
  p.complex_valued = true;
  p.schrodinger_zeta = zeta;
  p.schrodinger_k = k;
  p.default_bases = {BasisDescriptor{BasisFamily::HermiteFunction, 0.8, 0.0}};
  p.default_order = 24;
  auto psi = [zeta, k](double x, double t) -> cd {
    const cd denom(zeta, t);
    const cd phase = cd(0.0, 1.0) * (k * (x - k * t));
    const double shifted = x - 2.0 * k * t;
    return std::exp(phase - shifted * shifted / (4.0 * denom)) / std::sqrt(denom);
  };
  p.analytic = [psi](std::span<const double> x, double t) { return psi(x[0], t).real(); };
  p.analytic_im = [psi](std::span<const double> x, double t) { return psi(x[0], t).imag(); };
  p.initial = [psi](std::span<const double> x) { return psi(x[0], 0.0).real(); };
  p.initial_im = [psi](std::span<const double> x) { return psi(x[0], 0.0).imag(); };
  return p;
}

ProblemSpec builtin(const std::string& id) {
  if (id == "bounded-advection") {
    ProblemSpec p;
    p.id = id;
    p.domain = DomainTag::BoundedInterval;
    p.op = OperatorKind::Advection;
    p.default_bases = {BasisDescriptor{BasisFamily::ChebyshevPolynomial, 1.0, 0.0}};
    p.default_order = 8;
    p.advection_coef = [](double x, double t) { return (x + 2.0) / (t + 1.0); };
    p.initial = [](std::span<const double> x) { return std::cos(x[0] + 2.0); };
    p.analytic = [](std::span<const double> x, double t) {
      return std::cos((t + 1.0) * (x[0] + 2.0));
    };
    p.has_boundary = true;
    p.boundary_x = 1.0;
    p.boundary_value = [](double t) { return std::cos(3.0 * (t + 1.0)); };
    return p;
  }
  if (id == "halfline-advection") {
    ProblemSpec p;
    p.id = id;
    p.domain = DomainTag::HalfLine;
    p.op = OperatorKind::Advection;
    p.default_bases = {BasisDescriptor{BasisFamily::LaguerreFunction, 2.0, 0.0}};
    p.default_order = 8;
    p.advection_coef = [](double x, double t) { return -x / (t + 1.0); };
    p.initial = [](std::span<const double> x) { return std::exp(-x[0]); };
    p.analytic = [](std::span<const double> x, double t) {
      return std::exp(-x[0] / (t + 1.0));
    };
    p.has_boundary = true;
    p.boundary_x = 0.0;
    p.boundary_value = [](double) { return 1.0; };
    return p;
  }
  if (id == "heat2d") return heat_nd(2);
  if (id == "heat3d") return heat_nd(3);
  if (id == "schrodinger") return builtin_schrodinger(1.0, 1.0);
  if (id == "heat-source") return heat_with_source(1.0, true);
  if (id == "diffusivity-inference") return heat_with_source(2.0, false);
  throw std::invalid_argument("builtin: unknown problem id '" + id + "'");
}

Discretization::Discretization(const ProblemSpec& spec,
                               std::vector<BasisDescriptor> bases, int order,
                               std::optional<double> gamma_cross)
    : spec_(spec), bases_(std::move(bases)), order_(order) {
  if (int(bases_.size()) != spec_.dim)
    throw std::invalid_argument("Discretization: one basis per dimension required");
  if (order_ < 0) throw std::invalid_argument("Discretization: negative order");
  if (spec_.dim == 1) {
    spatial_size_ = order_ + 1;
  } else {
    set_ = hyperbolic_index_set(spec_.dim, order_, gamma_cross);
    spatial_size_ = set_.size();
  }
}

namespace {

// Discrete norm of mode i under the q-node rule (Chebyshev-Gauss-Lobatto
// aliases the top mode onto gamma_0).
double discrete_norm(const BasisDescriptor& b, int i, int q) {
  if (b.family == BasisFamily::ChebyshevPolynomial)
    return (i == 0 || i == q - 1) ? kPi : kPi / 2.0;
  return basis_norm_sq(b, i);
}

}  // namespace

Eigen::MatrixXd Discretization::spatial_operator(double t) const {
  if (spec_.dim == 1) {
    const int n = order_ + 1;
    const BasisDescriptor& b = bases_[0];
    switch (spec_.op) {
      case OperatorKind::Diffusion:
      case OperatorKind::Schrodinger: {
        Eigen::MatrixXd d2 = DerivativeMap(b, 2).dense(n);
        if (spec_.op == OperatorKind::Diffusion) d2 *= spec_.kappa;
        return d2;
      }
      case OperatorKind::Advection: {
        const QuadratureRule rule = quadrature_rule(b, n);
        Eigen::MatrixXd values(n, n);  // coefficients -> node values
        for (int k = 0; k < n; ++k) {
          const std::vector<double> phi = eval_basis_all(b, order_, rule.nodes[k]);
          for (int i = 0; i < n; ++i) values(k, i) = phi[i];
        }
        Eigen::MatrixXd proj(n, n);  // node values -> coefficients
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k)
            proj(i, k) = rule.weights[k] * values(k, i) / discrete_norm(b, i, n);
        Eigen::VectorXd a(n);
        for (int k = 0; k < n; ++k) a[k] = spec_.advection_coef(rule.nodes[k], t);
        return proj * a.asDiagonal() * values * DerivativeMap(b, 1).dense(n);
      }
    }
    throw std::logic_error("spatial_operator: unsupported operator");
  }

  // Kronecker sum of per-dimension second-derivative maps, Galerkin-truncated
  // to the index set.
  const int n1 = order_ + 1;
  std::vector<Eigen::MatrixXd> d2;
  for (int d = 0; d < spec_.dim; ++d) d2.push_back(DerivativeMap(bases_[d], 2).dense(n1));
  std::map<std::array<int, 3>, int> row_of;
  for (int r = 0; r < set_.size(); ++r) row_of[set_.indices[r]] = r;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(set_.size(), set_.size());
  for (int r = 0; r < set_.size(); ++r) {
    const std::array<int, 3> n = set_.indices[r];
    for (int d = 0; d < spec_.dim; ++d) {
      for (int m = n[d] - 2; m <= n[d] + 2; m += 2) {
        if (m < 0 || m > order_) continue;
        std::array<int, 3> col = n;
        col[d] = m;
        auto it = row_of.find(col);
        if (it != row_of.end()) a(r, it->second) += spec_.kappa * d2[d](n[d], m);
      }
    }
  }
  return a;
}

Eigen::MatrixXd Discretization::operator_matrix(double t) const {
  const Eigen::MatrixXd block = spatial_operator(t);
  if (!spec_.complex_valued) return block;
  // i psi_t = -psi_xx: real part obeys a_t = -b_xx, imaginary part b_t = a_xx.
  const int n = spatial_size_;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m.topRightCorner(n, n) = -block;
  m.bottomLeftCorner(n, n) = block;
  return m;
}

Eigen::VectorXd Discretization::project(const SpaceTimeFn& f, double t) const {
  if (spec_.dim != 1)
    throw std::logic_error("Discretization::project: 1D only");
  const std::vector<double> w = spinn::project(
      [&](double x) {
        const double xv[1] = {x};
        return f(xv, t);
      },
      bases_[0], order_, order_ + 41);
  return Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
}

Eigen::VectorXd Discretization::source_coeffs(double t) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(coef_size());
  if (!spec_.source) return out;
  out.head(spatial_size_) = project(spec_.source, t);
  return out;
}

Eigen::VectorXd Discretization::project_initial() const {
  if (spec_.dim == 1) {
    auto wrap = [](const SpaceFn& f) {
      return [&f](double x) {
        const double xv[1] = {x};
        return f(xv);
      };
    };
    Eigen::VectorXd out(coef_size());
    std::vector<double> re =
        spinn::project(wrap(spec_.initial), bases_[0], order_, order_ + 41);
    out.head(spatial_size_) = Eigen::Map<const Eigen::VectorXd>(re.data(), re.size());
    if (spec_.complex_valued) {
      std::vector<double> im =
          spinn::project(wrap(spec_.initial_im), bases_[0], order_, order_ + 41);
      out.tail(spatial_size_) = Eigen::Map<const Eigen::VectorXd>(im.data(), im.size());
    }
    return out;
  }

  // Tensor-product quadrature, contracted one dimension at a time.
  const int n1 = order_ + 1;
  const int q = order_ + 13;
  std::vector<QuadratureRule> rules;
  std::vector<Eigen::MatrixXd> v;  // v[d](k, i) = phi_i(x_k)
  for (int d = 0; d < spec_.dim; ++d) {
    rules.push_back(quadrature_rule(bases_[d], q));
    Eigen::MatrixXd m(q, n1);
    for (int k = 0; k < q; ++k) {
      const std::vector<double> phi = eval_basis_all(bases_[d], order_, rules[d].nodes[k]);
      for (int i = 0; i < n1; ++i) m(k, i) = phi[i];
    }
    v.push_back(std::move(m));
  }
  const int dim = spec_.dim;
  const int q3 = dim == 3 ? q : 1;
  // Weighted initial values on the grid, then contract each dimension.
  std::vector<double> buf(size_t(q) * q * q3);
  for (int k1 = 0; k1 < q; ++k1)
    for (int k2 = 0; k2 < q; ++k2)
      for (int k3 = 0; k3 < q3; ++k3) {
        double x[3] = {rules[0].nodes[k1], rules[1].nodes[k2],
                       dim == 3 ? rules[2].nodes[k3] : 0.0};
        double w = rules[0].weights[k1] * rules[1].weights[k2] *
                   (dim == 3 ? rules[2].weights[k3] : 1.0);
        buf[(size_t(k1) * q + k2) * q3 + k3] =
            w * spec_.initial(std::span<const double>(x, dim));
      }
  std::vector<double> c1(size_t(n1) * q * q3, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int k1 = 0; k1 < q; ++k1)
      for (int k2 = 0; k2 < q; ++k2)
        for (int k3 = 0; k3 < q3; ++k3)
          c1[(size_t(i) * q + k2) * q3 + k3] +=
              v[0](k1, i) * buf[(size_t(k1) * q + k2) * q3 + k3];
  std::vector<double> c2(size_t(n1) * n1 * q3, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k2 = 0; k2 < q; ++k2)
        for (int k3 = 0; k3 < q3; ++k3)
          c2[(size_t(i) * n1 + j) * q3 + k3] +=
              v[1](k2, j) * c1[(size_t(i) * q + k2) * q3 + k3];
  std::vector<double> c3;
  if (dim == 3) {
    c3.assign(size_t(n1) * n1 * n1, 0.0);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n1; ++j)
        for (int l = 0; l < n1; ++l)
          for (int k3 = 0; k3 < q; ++k3)
            c3[(size_t(i) * n1 + j) * n1 + l] +=
                v[2](k3, l) * c2[(size_t(i) * n1 + j) * q3 + k3];
  }
  Eigen::VectorXd out(set_.size());
  for (int r = 0; r < set_.size(); ++r) {
    const std::array<int, 3>& n = set_.indices[r];
    out[r] = dim == 3 ? c3[(size_t(n[0]) * n1 + n[1]) * n1 + n[2]]
                      : c2[size_t(n[0]) * n1 + n[1]];
  }
  return out;
}

Eigen::VectorXd Discretization::norm_weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(coef_size());
  if (spec_.dim == 1 && bases_[0].family == BasisFamily::ChebyshevPolynomial)
    for (int i = 0; i <= order_; ++i) w[i] = i == 0 ? kPi : kPi / 2.0;
  return w;
}

Eigen::VectorXd Discretization::boundary_phi() const {
  if (!spec_.has_boundary || spec_.dim != 1)
    throw std::logic_error("boundary_phi: problem has no Dirichlet boundary");
  const std::vector<double> phi = eval_basis_all(bases_[0], order_, spec_.boundary_x);
  return Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
}

SpectralExpansion Discretization::to_expansion(const Eigen::VectorXd& coef) const {
  if (spec_.dim != 1) throw std::logic_error("to_expansion: 1D only");
  SpectralExpansion e;
  e.basis = bases_[0];
  e.order = order_;
  e.re.assign(coef.data(), coef.data() + spatial_size_);
  if (spec_.complex_valued)
    e.im.assign(coef.data() + spatial_size_, coef.data() + 2 * spatial_size_);
  return e;
}

MultiExpansion Discretization::to_multi(const Eigen::VectorXd& coef) const {
  if (spec_.dim == 1) throw std::logic_error("to_multi: tensor problems only");
  MultiExpansion e;
  e.bases = bases_;
  e.set = set_;
  e.coef.assign(coef.data(), coef.data() + set_.size());
  return e;
}

double Discretization::error_vs_analytic(const Eigen::VectorXd& coef, double t) const {
  if (!spec_.analytic) return std::numeric_limits<double>::quiet_NaN();
  if (spec_.dim == 1) {
    auto at = [this, t](const SpaceTimeFn& f) {
      return [&f, t](double x) {
        const double xv[1] = {x};
        return f(xv, t);
      };
    };
    const SpectralExpansion e = to_expansion(coef);
    if (spec_.complex_valued)
      return l2_error(e, at(spec_.analytic), at(spec_.analytic_im), order_ + 41);
    return l2_error(e, at(spec_.analytic), order_ + 41);
  }
  return l2_error(
      to_multi(coef),
      [this, t](std::span<const double> x) { return spec_.analytic(x, t); },
      order_ + 13);
}

double Discretization::indicator(const Eigen::VectorXd& coef, int dim) const {
  if (spec_.dim == 1) {
    std::span<const double> re(coef.data(), size_t(spatial_size_));
    std::span<const double> im;
    if (spec_.complex_valued)
      im = std::span<const double>(coef.data() + spatial_size_, size_t(spatial_size_));
    return frequency_indicator(re, im, bases_[0], order_);
  }
  return frequency_indicator(to_multi(coef), dim);
}

void Discretization::set_basis(int dim, const BasisDescriptor& nb,
                               Eigen::VectorXd& coef) {
  if (dim < 0 || dim >= spec_.dim)
    throw std::out_of_range("set_basis: dimension out of range");
  if (nb == bases_[size_t(dim)]) return;
  if (spec_.dim == 1) {
    const SpectralExpansion e = reproject(to_expansion(coef), nb, order_);
    for (int i = 0; i < spatial_size_; ++i) coef[i] = e.re[i];
    if (spec_.complex_valued)
      for (int i = 0; i < spatial_size_; ++i) coef[spatial_size_ + i] = e.im[i];
  } else {
    std::vector<BasisDescriptor> nbs = bases_;
    nbs[size_t(dim)] = nb;
    const MultiExpansion e = reproject(to_multi(coef), nbs);
    for (int r = 0; r < set_.size(); ++r) coef[r] = e.coef[r];
  }
  bases_[size_t(dim)] = nb;
}

void Discretization::set_order(int new_order, Eigen::VectorXd& coef) {
  if (spec_.dim != 1) throw std::logic_error("set_order: 1D only");
  if (new_order < 0) throw std::invalid_argument("set_order: negative order");
  if (new_order == order_) return;
  const SpectralExpansion e = reproject(to_expansion(coef), bases_[0], new_order);
  order_ = new_order;
  spatial_size_ = new_order + 1;
  coef.resize(coef_size());
  for (int i = 0; i < spatial_size_; ++i) coef[i] = e.re[i];
  if (spec_.complex_valued)
    for (int i = 0; i < spatial_size_; ++i) coef[spatial_size_ + i] = e.im[i];
}

SpectralExpansion apply_operator(const ProblemSpec& p, const SpectralExpansion& e,
                                 double t) {
  if (p.dim != 1) throw std::invalid_argument("apply_operator: spec is not 1D");
  Discretization d(p, {e.basis}, e.order);
  Eigen::VectorXd coef(d.coef_size());
  for (int i = 0; i <= e.order; ++i) coef[i] = e.re[i];
  if (p.complex_valued)
    for (int i = 0; i <= e.order; ++i) coef[e.order + 1 + i] = e.im[i];
  const Eigen::VectorXd out = d.operator_matrix(t) * coef;
  return d.to_expansion(out);
}

MultiExpansion apply_operator(const ProblemSpec& p, const MultiExpansion& e, double t) {
  if (p.dim != e.set.dim) throw std::invalid_argument("apply_operator: dim mismatch");
  Discretization d(p, e.bases, e.set.cap, e.set.gamma_cross);
  if (d.index_set().indices != e.set.indices)
    throw std::invalid_argument("apply_operator: index set mismatch");
  const Eigen::VectorXd coef =
      Eigen::Map<const Eigen::VectorXd>(e.coef.data(), e.coef.size());
  const Eigen::VectorXd out = d.operator_matrix(t) * coef;
  MultiExpansion r = e;
  r.coef.assign(out.data(), out.data() + out.size());
  return r;
}

std::vector<double> observe_noisy(const ProblemSpec& p, double t, double sigma,
                                  const QuadratureRule& rule, std::uint64_t seed) {
  if (!p.analytic) throw std::logic_error("observe_noisy: no analytic solution");
  if (sigma < 0.0) throw std::invalid_argument("observe_noisy: sigma < 0");
  BoxMuller noise(seed);
  std::vector<double> out(rule.nodes.size());
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    const double xv[1] = {rule.nodes[k]};
    out[k] = p.analytic(xv, t) + (sigma > 0.0 ? sigma * noise.normal() : 0.0);
  }
  return out;
}

double fit_target(double x, double t) {
  const double d = x * x + 4.0;
  return 8.0 * x * std::sin(3.0 * x) * t / (d * d);
}

FitDataset sample_fit_dataset(const std::function<double(double, double)>& target,
                              int n, double cauchy_scale, double cauchy_location,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_fit_dataset: n < 1");
  FitDataset d;
  d.cauchy_scale = cauchy_scale;
  d.cauchy_location = cauchy_location;
  d.seed = seed;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return ((rng() >> 11) + 0.5) * 0x1p-53; };
  for (int s = 0; s < n; ++s) {
    const double x = cauchy_location + cauchy_scale * std::tan(kPi * (uniform() - 0.5));
    const double t = uniform();
    d.x.push_back(x);
    d.t.push_back(t);
    d.u.push_back(target(x, t));
  }
  return d;
}

FitResult fit_function(const FitDataset& data, FitMode mode,
                       const BasisDescriptor& basis, int order,
                       const std::vector<int>& hidden_dims, const TrainConfig& cfg) {
  const int n = data.size();
  if (n < 2) throw std::invalid_argument("fit_function: need at least 2 samples");
  const int m = n / 2;         // training half
  const int mt = n - m;        // held-out half

  std::vector<int> dims;
  dims.push_back(mode == FitMode::Spectral ? 1 : 2);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(mode == FitMode::Spectral ? order + 1 : 1);

  Eigen::MatrixXd in_train(dims.front(), m), in_test(dims.front(), mt);
  for (int s = 0; s < m; ++s) {
    if (mode == FitMode::Direct) in_train(0, s) = data.x[s];
    in_train(dims.front() - 1, s) = data.t[s];
  }
  for (int s = 0; s < mt; ++s) {
    if (mode == FitMode::Direct) in_test(0, s) = data.x[m + s];
    in_test(dims.front() - 1, s) = data.t[m + s];
  }
  Eigen::VectorXd u_train(m), u_test(mt);
  for (int s = 0; s < m; ++s) u_train[s] = data.u[s];
  for (int s = 0; s < mt; ++s) u_test[s] = data.u[m + s];

  // Basis values at the sample abscissas (spectral mode only).
  Eigen::MatrixXd b_train, b_test;
  if (mode == FitMode::Spectral) {
    b_train.resize(m, order + 1);
    b_test.resize(mt, order + 1);
    for (int s = 0; s < n; ++s) {
      const std::vector<double> phi = eval_basis_all(basis, order, data.x[s]);
      for (int i = 0; i <= order; ++i)
        (s < m ? b_train(s, i) : b_test(s - m, i)) = phi[i];
    }
  }

  auto predict = [&](const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& b) {
    if (mode == FitMode::Direct) return Eigen::VectorXd(outputs.row(0).transpose());
    return Eigen::VectorXd((b.array() * outputs.transpose().array()).rowwise().sum());
  };

  OutputLoss loss = [&](const Eigen::MatrixXd& outputs) {
    LossEval le;
    const Eigen::VectorXd r = predict(outputs, b_train) - u_train;
    le.value = r.squaredNorm() / m;
    le.grad.resize(outputs.rows(), outputs.cols());
    if (mode == FitMode::Direct)
      le.grad.row(0) = (2.0 / m) * r.transpose();
    else
      le.grad = (2.0 / m) * (b_train.array().colwise() * r.array()).matrix().transpose();
    return le;
  };

  FitResult res;
  MlpParams p = init_mlp(dims, cfg.seed);
  TrainConfig tc = cfg;
  tc.on_epoch = [&](long, const MlpParams& cur) {
    const Eigen::MatrixXd out = forward(cur, in_test, Mode::Eval);
    res.test_mse.push_back((predict(out, b_test) - u_test).squaredNorm() / mt);
  };
  TrainResult tr = train(p, in_train, loss, tc);
  res.params = std::move(p);
  res.train_mse = std::move(tr.history);
  return res;
}

}  // namespace spinn
