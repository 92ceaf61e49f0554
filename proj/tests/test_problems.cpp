#include <doctest.h>

#include "spinn/problems.hpp"
#include "spinn/reference.hpp"

#include <cmath>
#include <random>

using namespace spinn;

namespace {

SpectralExpansion expand(const BasisDescriptor& b, std::vector<double> w) {
  SpectralExpansion e;
  e.basis = b;
  e.order = int(w.size()) - 1;
  e.re = std::move(w);
  return e;
}

// 1D analytic solutions: PDE residual u_t - M u - f via finite differences
// in t and the problem's own analytic spatial action.
double pde_residual_1d(const ProblemSpec& p, double x, double t) {
  const double ht = 1e-6;
  std::span<const double> xs(&x, 1);
  const double ut = (p.analytic(xs, t + ht) - p.analytic(xs, t - ht)) / (2 * ht);
  // Spatial action by finite differences of the analytic solution.
  const double hx = 1e-4;
  double xp = x + hx, xm = x - hx;
  const double u = p.analytic(xs, t);
  const double up = p.analytic(std::span<const double>(&xp, 1), t);
  const double um = p.analytic(std::span<const double>(&xm, 1), t);
  double mu = 0.0;
  if (p.op == OperatorKind::Advection)
    mu = p.advection_coef(x, t) * (up - um) / (2 * hx);
  else
    mu = p.kappa * (up - 2 * u + um) / (hx * hx);
  const double f = p.source ? p.source(xs, t) : 0.0;
  return ut - mu - f;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("registry rejects unknown ids") {
  CHECK_THROWS(builtin("no-such-problem"));
}

TEST_CASE("analytic values at known points") {
  const ProblemSpec ba = builtin("bounded-advection");
  double x = 1.0;
  CHECK(ba.analytic(std::span<const double>(&x, 1), 0.0) ==
        doctest::Approx(std::cos(3.0)).epsilon(1e-12));

  const ProblemSpec hl = builtin("halfline-advection");
  x = 0.0;
  for (double t : {0.0, 0.3, 1.0})
    CHECK(hl.analytic(std::span<const double>(&x, 1), t) ==
          doctest::Approx(1.0).epsilon(1e-12));

  const ProblemSpec h3 = builtin("heat3d");
  const double origin[3] = {0.0, 0.0, 0.0};
  CHECK(h3.analytic(origin, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("analytic solutions satisfy their initial conditions") {
  std::mt19937_64 gen(2);
  for (const char* id : {"bounded-advection", "halfline-advection", "heat-source",
                         "diffusivity-inference"}) {
    const ProblemSpec p = builtin(id);
    std::uniform_real_distribution<double> u(
        p.domain == DomainTag::BoundedInterval ? -1.0 : (p.domain == DomainTag::HalfLine ? 0.01 : -4.0),
        p.domain == DomainTag::BoundedInterval ? 1.0 : 4.0);
    for (int s = 0; s < 50; ++s) {
      const double x = u(gen);
      std::span<const double> xs(&x, 1);
      CHECK(p.analytic(xs, 0.0) == doctest::Approx(p.initial(xs)).epsilon(1e-12));
    }
  }
}

TEST_CASE("1D analytic solutions satisfy their PDEs") {
  std::mt19937_64 gen(4);
  for (const char* id : {"bounded-advection", "halfline-advection", "heat-source",
                         "diffusivity-inference"}) {
    const ProblemSpec p = builtin(id);
    std::uniform_real_distribution<double> ux(
        p.domain == DomainTag::BoundedInterval ? -0.95 : (p.domain == DomainTag::HalfLine ? 0.1 : -3.0),
        p.domain == DomainTag::BoundedInterval ? 0.95 : 3.0);
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    for (int s = 0; s < 100; ++s)
      CHECK(pde_residual_1d(p, ux(gen), ut(gen)) ==
            doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("boundary data is consistent with the analytic solution") {
  for (const char* id : {"bounded-advection", "halfline-advection"}) {
    const ProblemSpec p = builtin(id);
    REQUIRE(p.has_boundary);
    const double x = p.boundary_x;
    std::span<const double> xs(&x, 1);
    for (double t : {0.0, 0.25, 0.5, 1.0})
      CHECK(p.boundary_value(t) == doctest::Approx(p.analytic(xs, t)).epsilon(1e-12));
  }
}

TEST_CASE("Laplacian of the lowest Hermite mode") {
  ProblemSpec p = builtin("heat-source");
  p.kappa = 1.0;
  BasisDescriptor b{BasisFamily::HermiteFunction, 1.0, 0.0, 0.0};
  const SpectralExpansion out = apply_operator(p, expand(b, {1, 0, 0, 0, 0}), 0.0);
  CHECK(out.re[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(out.re[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(out.re[2] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(out.re[3] == doctest::Approx(0.0).scale(1.0));
  CHECK(out.re[4] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("advection of the zero expansion is zero") {
  const ProblemSpec p = builtin("halfline-advection");
  const SpectralExpansion out =
      apply_operator(p, expand(p.default_bases[0], std::vector<double>(9, 0.0)), 0.5);
  for (double w : out.re) CHECK(w == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("apply_operator is linear") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* id : {"bounded-advection", "heat-source", "schrodinger"}) {
    const ProblemSpec p = builtin(id);
    const BasisDescriptor b = p.default_bases[0];
    const int n = 8;
    auto rand_exp = [&] {
      SpectralExpansion e = expand(b, {});
      e.order = n;
      e.re.resize(n + 1);
      for (double& v : e.re) v = u(gen);
      if (p.complex_valued) {
        e.im.resize(n + 1);
        for (double& v : e.im) v = u(gen);
      }
      return e;
    };
    const SpectralExpansion e1 = rand_exp(), e2 = rand_exp();
    const double alpha = 1.7;
    SpectralExpansion lin = e1;
    for (int i = 0; i <= n; ++i) lin.re[i] = alpha * e1.re[i] + e2.re[i];
    if (p.complex_valued)
      for (int i = 0; i <= n; ++i) lin.im[i] = alpha * e1.im[i] + e2.im[i];
    const SpectralExpansion a1 = apply_operator(p, e1, 0.3);
    const SpectralExpansion a2 = apply_operator(p, e2, 0.3);
    const SpectralExpansion al = apply_operator(p, lin, 0.3);
    for (int i = 0; i <= n; ++i) {
      CHECK(al.re[i] ==
            doctest::Approx(alpha * a1.re[i] + a2.re[i]).epsilon(1e-10).scale(1.0));
      if (p.complex_valued)
        CHECK(al.im[i] ==
              doctest::Approx(alpha * a1.im[i] + a2.im[i]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("2D weak operator matches the Kronecker-sum quadrature oracle") {
  const ProblemSpec p = builtin("heat2d");
  MultiExpansion e;
  e.bases = p.default_bases;
  e.set = hyperbolic_index_set(2, 4, std::nullopt);
  e.coef.assign(e.set.size(), 0.0);
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : e.coef) v = u(gen);

  const MultiExpansion out = apply_operator(p, e, 0.0);

  // Oracle: <Laplacian u, phi_m> on a 60x60 tensor quadrature grid, with
  // the second derivative of each tensor element from the 1D analytic
  // band matrix (extended two orders past the cap to hold the full band).
  const BandMatrix dx = hermite_laplacian(6, e.bases[0].beta);
  const BandMatrix dy = hermite_laplacian(6, e.bases[1].beta);
  const QuadratureRule rx = quadrature_rule(e.bases[0], 60);
  const QuadratureRule ry = quadrature_rule(e.bases[1], 60);
  for (int m = 0; m < e.set.size(); ++m) {
    const int mi = e.set.indices[m][0], mj = e.set.indices[m][1];
    double oracle = 0.0;
    for (size_t kx = 0; kx < rx.nodes.size(); ++kx) {
      for (size_t ky = 0; ky < ry.nodes.size(); ++ky) {
        // Evaluate Laplacian(u) at the node from per-element band maps.
        double lap = 0.0;
        for (int c = 0; c < e.set.size(); ++c) {
          const int i = e.set.indices[c][0], j = e.set.indices[c][1];
          double ddx = 0.0, ddy = 0.0;
          for (int ii = i - 2; ii <= i + 2; ii += 2) {
            if (ii < 0) continue;
            ddx += dx.entry(ii, i) * eval_basis(e.bases[0], ii, rx.nodes[kx]);
          }
          for (int jj = j - 2; jj <= j + 2; jj += 2) {
            if (jj < 0) continue;
            ddy += dy.entry(jj, j) * eval_basis(e.bases[1], jj, ry.nodes[ky]);
          }
          lap += e.coef[c] * (ddx * eval_basis(e.bases[1], j, ry.nodes[ky]) +
                              eval_basis(e.bases[0], i, rx.nodes[kx]) * ddy);
        }
        oracle += rx.weights[kx] * ry.weights[ky] * lap *
                  eval_basis(e.bases[0], mi, rx.nodes[kx]) *
                  eval_basis(e.bases[1], mj, ry.nodes[ky]);
      }
    }
    CHECK(out.coef[m] == doctest::Approx(p.kappa * oracle).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("wave-packet solution conserves its L2 norm") {
  const ProblemSpec p = builtin("schrodinger");
  const QuadratureRule r = quadrature_rule(p.default_bases[0], 200);
  auto norm_at = [&](double t) {
    double s = 0.0;
    for (size_t k = 0; k < r.nodes.size(); ++k) {
      const double x = r.nodes[k];
      std::span<const double> xs(&x, 1);
      const double re = p.analytic(xs, t), im = p.analytic_im(xs, t);
      s += r.weights[k] * (re * re + im * im);
    }
    return std::sqrt(s);
  };
  const double n0 = norm_at(0.0);
  for (double t : {0.25, 0.5, 0.75, 1.0})
    CHECK(norm_at(t) == doctest::Approx(n0).epsilon(1e-6));
}

TEST_CASE("noisy observations: exactness, reproducibility, variance") {
  const ProblemSpec p = builtin("heat-source");
  const QuadratureRule r = quadrature_rule(p.default_bases[0], 100);

  const auto clean = observe_noisy(p, 0.5, 0.0, r, 1);
  for (size_t k = 0; k < r.nodes.size(); ++k) {
    const double x = r.nodes[k];
    std::span<const double> xs(&x, 1);
    CHECK(clean[k] == doctest::Approx(p.analytic(xs, 0.5)).epsilon(1e-12));
  }

  const auto a = observe_noisy(p, 0.5, 0.1, r, 7);
  const auto b = observe_noisy(p, 0.5, 0.1, r, 7);
  CHECK(a == b);
  const auto c = observe_noisy(p, 0.5, 0.1, r, 8);
  CHECK(a != c);

  // Sample variance of the injected noise over many nodes.
  const QuadratureRule big = quadrature_rule(p.default_bases[0], 200);
  double ss = 0.0;
  long count = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto obs = observe_noisy(p, 0.5, 0.1, big, 100 + rep);
    for (size_t k = 0; k < big.nodes.size(); ++k) {
      const double x = big.nodes[k];
      std::span<const double> xs(&x, 1);
      const double d = obs[k] - p.analytic(xs, 0.5);
      ss += d * d;
      ++count;
    }
  }
  CHECK(ss / double(count) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("fit target vanishes on the x=0 axis") {
  for (double t : {0.0, 0.5, 1.0}) CHECK(fit_target(0.0, t) == 0.0);
}

TEST_CASE("fit dataset sampling is seeded and finite") {
  const auto d1 = sample_fit_dataset(fit_target, 50, 12.0, 0.0, 3);
  const auto d2 = sample_fit_dataset(fit_target, 50, 12.0, 0.0, 3);
  CHECK(d1.x == d2.x);
  CHECK(d1.u == d2.u);
  REQUIRE(d1.size() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::isfinite(d1.x[i]));
    CHECK(d1.t[i] >= 0.0);
    CHECK(d1.t[i] <= 1.0);
    CHECK(d1.u[i] == doctest::Approx(fit_target(d1.x[i], d1.t[i])).epsilon(1e-12));
  }
}

TEST_CASE("spectral fit drives the training error down on realizable data") {
  // Data generated exactly from a time-constant expansion.
  const BasisDescriptor b{BasisFamily::MappedGegenbauer, 0.5, 0.0, 0.0};
  SpectralExpansion truth = expand(b, {0.5, -0.3, 0.8, 0.0, 0.2});
  FitDataset data;
  data.seed = 5;
  std::mt19937_64 gen(5);
  std::cauchy_distribution<double> cx(0.0, 2.0);
  std::uniform_real_distribution<double> ct(0.0, 1.0);
  for (int i = 0; i < 80; ++i) {
    data.x.push_back(cx(gen));
    data.t.push_back(ct(gen));
    data.u.push_back(evaluate(truth, data.x.back()));
  }
  TrainConfig cfg;
  cfg.eta = 2e-3;
  cfg.max_epochs = 30000;
  cfg.tol = 1e-9;
  cfg.seed = 2;
  const FitResult r = fit_function(data, FitMode::Spectral, b, 4, {16, 16}, cfg);
  REQUIRE(!r.train_mse.empty());
  // Plain gradient descent converges slowly; require a small absolute error
  // plus a large relative drop from the initial loss.
  CHECK(r.train_mse.back() <= 1e-3);
  CHECK(r.train_mse.back() <= r.train_mse.front() / 100.0);
}

}  // TEST_SUITE
