#include <doctest.h>

#include "spinn/net.hpp"

#include <cmath>
#include <random>

using namespace spinn;

namespace {

// Central finite differences through the full train-mode forward pass.
// `slot` must point into `p`; the slot is restored before returning.
double fd_gradient(MlpParams& p, double* slot, const Eigen::MatrixXd& in,
                   const OutputLoss& loss) {
  const double eps = 1e-5;
  const double orig = *slot;
  *slot = orig + eps;
  const double up = loss(forward(p, in, Mode::Train)).value;
  *slot = orig - eps;
  const double dn = loss(forward(p, in, Mode::Train)).value;
  *slot = orig;
  return (up - dn) / (2 * eps);
}

OutputLoss sse_to(const Eigen::MatrixXd& target) {
  return [target](const Eigen::MatrixXd& out) {
    LossEval e;
    e.grad = 2.0 * (out - target);
    e.value = (out - target).squaredNorm();
    return e;
  };
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("initialization bounds and determinism") {
  const MlpParams p = init_mlp({1, 10, 10, 10}, 42);
  const double bound = std::sqrt(1.0 / 10.0);
  for (size_t l = 1; l < p.w.size(); ++l)
    for (int i = 0; i < p.w[l].rows(); ++i)
      for (int j = 0; j < p.w[l].cols(); ++j) CHECK(std::abs(p.w[l](i, j)) < bound);
  for (const auto& b : p.b) CHECK(b.isZero());

  const MlpParams q = init_mlp({1, 10, 10, 10}, 42);
  for (size_t l = 0; l < p.w.size(); ++l) CHECK(p.w[l] == q.w[l]);
  const MlpParams r = init_mlp({1, 10, 10, 10}, 43);
  CHECK(p.w[0] != r.w[0]);
}

TEST_CASE("single linear layer shape and exact output") {
  MlpParams p = init_mlp({1, 5}, 1);
  CHECK(p.w.size() == 1);
  CHECK(p.w[0].rows() == 5);
  CHECK(p.w[0].cols() == 1);
  CHECK(p.b[0].size() == 5);
  p.w[0].setConstant(2.0);
  p.b[0].setConstant(-1.0);
  Eigen::MatrixXd in(1, 3);
  in << 0.0, 1.0, 2.5;
  const Eigen::MatrixXd out = forward(p, in, Mode::Eval);
  for (int s = 0; s < 3; ++s)
    for (int i = 0; i < 5; ++i)
      CHECK(out(i, s) == doctest::Approx(2.0 * in(0, s) - 1.0).epsilon(1e-14));
}

TEST_CASE("zero parameters give zero outputs") {
  MlpParams p = init_mlp({2, 8, 8, 3}, 5);
  for (auto& w : p.w) w.setZero();
  Eigen::MatrixXd in = Eigen::MatrixXd::Random(2, 4);
  CHECK(forward(p, in, Mode::Train).isZero(1e-14));
  CHECK(forward(p, in, Mode::Eval).isZero(1e-14));
}

TEST_CASE("train mode rejects a single-sample batch") {
  const MlpParams p = init_mlp({1, 4, 2}, 9);
  Eigen::MatrixXd one(1, 1);
  one << 0.5;
  CHECK_THROWS(forward(p, one, Mode::Train));
  CHECK_NOTHROW(forward(p, one, Mode::Eval));
}

TEST_CASE("eval mode is a per-sample map") {
  MlpParams p = init_mlp({1, 6, 6, 2}, 17);
  // Give the running statistics non-trivial values via a few updates.
  Eigen::MatrixXd in(1, 5);
  in << 0.1, 0.4, 0.7, 1.0, 1.3;
  TrainConfig cfg;
  cfg.eta = 1e-3;
  cfg.max_epochs = 10;
  train(p, in, sse_to(Eigen::MatrixXd::Ones(2, 5)), cfg);

  const Eigen::MatrixXd full = forward(p, in, Mode::Eval);
  for (int s = 0; s < 5; ++s) {
    const Eigen::MatrixXd single = forward(p, in.col(s), Mode::Eval);
    CHECK((single - full.col(s)).norm() == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("gradient matches closed form on a pure linear network") {
  MlpParams p = init_mlp({1, 3}, 2);
  Eigen::MatrixXd in(1, 4);
  in << -1.0, 0.0, 1.0, 2.0;
  const Eigen::MatrixXd target = Eigen::MatrixXd::Random(3, 4);
  double lv = 0.0;
  const MlpGradients g = loss_gradient(p, in, sse_to(target), &lv);
  // d/dW sum (Wx + b - y)^2 = 2 (Wx + b - y) x^T.
  const Eigen::MatrixXd resid = p.w[0] * in + p.b[0].replicate(1, 4) - target;
  CHECK((g.w[0] - 2.0 * resid * in.transpose()).norm() ==
        doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK((g.b[0] - 2.0 * resid.rowwise().sum()).norm() ==
        doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("gradient matches finite differences across architectures") {
  std::mt19937_64 gen(123);
  const std::vector<std::vector<int>> shapes = {
      {1, 5, 3},          {1, 8, 8, 2},     {2, 6, 6, 6, 4}, {1, 20, 1},
      {2, 12, 5},         {1, 4, 4, 4, 4, 2}, {3, 7, 7, 2},  {1, 10, 10, 3},
      {2, 15, 15, 1},     {1, 6, 9, 12, 2}};
  int cfg_index = 0;
  for (const auto& dims : shapes) {
    const MlpParams base = init_mlp(dims, 1000 + cfg_index++);
    Eigen::MatrixXd in = Eigen::MatrixXd::Random(dims.front(), 6) * 0.8;
    const Eigen::MatrixXd target = Eigen::MatrixXd::Random(dims.back(), 6);
    const OutputLoss loss = sse_to(target);

    double lv = 0.0;
    const MlpGradients g = loss_gradient(base, in, loss, &lv);
    CHECK(std::isfinite(lv));

    // Spot-check a handful of coordinates in every parameter group.
    std::uniform_int_distribution<int> pick(0, 1 << 20);
    for (size_t l = 0; l < base.w.size(); ++l) {
      MlpParams p = base;
      for (int rep = 0; rep < 3; ++rep) {
        const int idx = pick(gen) % int(p.w[l].size());
        const double fd = fd_gradient(p, p.w[l].data() + idx, in, loss);
        const double an = g.w[l].data()[idx];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
        CHECK(std::abs(an - fd) / denom <= 1e-5);
      }
      const int bidx = pick(gen) % int(p.b[l].size());
      const double fdb = fd_gradient(p, p.b[l].data() + bidx, in, loss);
      const double anb = g.b[l].data()[bidx];
      CHECK(std::abs(anb - fdb) / std::max({std::abs(fdb), std::abs(anb), 1e-4}) <= 1e-5);
    }
    for (size_t l = 0; l < base.bn_scale.size(); ++l) {
      MlpParams p = base;
      const int idx = pick(gen) % int(p.bn_scale[l].size());
      const double fd = fd_gradient(p, p.bn_scale[l].data() + idx, in, loss);
      CHECK(std::abs(g.bn_scale[l].data()[idx] - fd) /
                std::max({std::abs(fd), std::abs(g.bn_scale[l].data()[idx]), 1e-4}) <=
            1e-5);
      const double fds = fd_gradient(p, p.bn_shift[l].data() + idx, in, loss);
      CHECK(std::abs(g.bn_shift[l].data()[idx] - fds) /
                std::max({std::abs(fds), std::abs(g.bn_shift[l].data()[idx]), 1e-4}) <=
            1e-5);
    }
  }
}

TEST_CASE("constant loss has zero gradients") {
  const MlpParams p = init_mlp({1, 6, 6, 2}, 77);
  Eigen::MatrixXd in = Eigen::MatrixXd::Random(1, 5);
  const OutputLoss constant = [](const Eigen::MatrixXd& out) {
    LossEval e;
    e.value = 3.0;
    e.grad = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    return e;
  };
  const MlpGradients g = loss_gradient(p, in, constant);
  for (const auto& w : g.w) CHECK(w.isZero(0.0));
  for (const auto& s : g.bn_scale) CHECK(s.isZero(0.0));
}

TEST_CASE("training solves linear regression") {
  MlpParams p = init_mlp({1, 1}, 3);
  Eigen::MatrixXd in(1, 5);
  in << -2.0, -1.0, 0.0, 1.0, 2.0;
  Eigen::MatrixXd target = 3.0 * in.array() - 0.5;
  TrainConfig cfg;
  cfg.eta = 1e-2;
  cfg.max_epochs = 20000;
  cfg.tol = 1e-10;
  const TrainResult r = train(p, in, sse_to(target), cfg);
  REQUIRE(!r.history.empty());
  CHECK(r.history.back() <= 1e-10);
}

TEST_CASE("training stop conditions and reproducibility") {
  Eigen::MatrixXd in(1, 4);
  in << 0.0, 0.3, 0.6, 0.9;
  const Eigen::MatrixXd target = Eigen::MatrixXd::Ones(2, 4);
  TrainConfig cfg;
  cfg.eta = 1e-3;
  cfg.max_epochs = 50;
  cfg.tol = 0.0;

  MlpParams p1 = init_mlp({1, 5, 2}, 11);
  const TrainResult r1 = train(p1, in, sse_to(target), cfg);
  CHECK(r1.epochs == 50);
  CHECK(long(r1.history.size()) == 50);

  MlpParams p2 = init_mlp({1, 5, 2}, 11);
  const TrainResult r2 = train(p2, in, sse_to(target), cfg);
  CHECK(r1.history == r2.history);  // bit-for-bit

  MlpParams p3 = init_mlp({1, 5, 2}, 11);
  TrainConfig frozen = cfg;
  frozen.eta = 0.0;
  const TrainResult r3 = train(p3, in, sse_to(target), frozen);
  for (size_t l = 0; l < p3.w.size(); ++l)
    CHECK(p3.w[l] == init_mlp({1, 5, 2}, 11).w[l]);
  for (size_t i = 1; i < r3.history.size(); ++i)
    CHECK(r3.history[i] == r3.history[0]);
}

TEST_CASE("divergence aborts with the last finite state") {
  MlpParams p = init_mlp({1, 4, 1}, 5);
  Eigen::MatrixXd in(1, 3);
  in << 0.0, 0.5, 1.0;
  TrainConfig cfg;
  cfg.eta = 1e6;  // guaranteed blow-up
  cfg.max_epochs = 1000;
  const TrainResult r = train(p, in, sse_to(Eigen::MatrixXd::Ones(1, 3) * 100.0), cfg);
  CHECK(r.diverged);
  for (const auto& w : p.w) CHECK(w.allFinite());
}

TEST_CASE("parameter snapshots round-trip through JSON") {
  MlpParams p = init_mlp({2, 7, 7, 3}, 99);
  Eigen::MatrixXd in = Eigen::MatrixXd::Random(2, 5);
  TrainConfig cfg;
  cfg.eta = 1e-3;
  cfg.max_epochs = 5;
  train(p, in, sse_to(Eigen::MatrixXd::Random(3, 5)), cfg);  // touch bn stats

  const MlpParams q = mlp_from_json(to_json(p));
  CHECK(q.dims == p.dims);
  for (size_t l = 0; l < p.w.size(); ++l) {
    CHECK(q.w[l] == p.w[l]);
    CHECK(q.b[l] == p.b[l]);
  }
  for (size_t l = 0; l < p.bn_mean.size(); ++l) {
    CHECK(q.bn_mean[l] == p.bn_mean[l]);
    CHECK(q.bn_var[l] == p.bn_var[l]);
  }
  const Eigen::MatrixXd a = forward(p, in, Mode::Eval);
  const Eigen::MatrixXd b = forward(q, in, Mode::Eval);
  CHECK(a == b);
}

}  // TEST_SUITE
