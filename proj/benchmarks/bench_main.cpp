#include "spinn/basis.hpp"
#include "spinn/collocation.hpp"
#include "spinn/net.hpp"

#include <benchmark/benchmark.h>

namespace {

void bm_quadrature_hermite(benchmark::State& state) {
  const spinn::BasisDescriptor b{spinn::BasisFamily::HermiteFunction, 0.8, 0.0};
  const int q = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spinn::quadrature_rule(b, q));
}
BENCHMARK(bm_quadrature_hermite)->Arg(17)->Arg(64)->Arg(200);

void bm_tableau(benchmark::State& state) {
  const int k = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spinn::gauss_legendre_tableau(k));
}
BENCHMARK(bm_tableau)->Arg(4)->Arg(10);

void bm_forward(benchmark::State& state) {
  const int width = int(state.range(0));
  std::vector<int> dims = {1, width, width, width, width, width, 17};
  const spinn::MlpParams p = spinn::init_mlp(dims, 1);
  Eigen::MatrixXd in(1, 5);
  in << 0.1, 0.3, 0.5, 0.7, 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(spinn::forward(p, in, spinn::Mode::Train));
}
BENCHMARK(bm_forward)->Arg(100)->Arg(200);

void bm_backward(benchmark::State& state) {
  const int width = int(state.range(0));
  std::vector<int> dims = {1, width, width, width, width, width, 17};
  const spinn::MlpParams p = spinn::init_mlp(dims, 1);
  Eigen::MatrixXd in(1, 5);
  in << 0.1, 0.3, 0.5, 0.7, 1.0;
  const spinn::OutputLoss loss = [](const Eigen::MatrixXd& out) {
    spinn::LossEval le;
    le.value = out.squaredNorm();
    le.grad = 2.0 * out;
    return le;
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(spinn::loss_gradient(p, in, loss));
}
BENCHMARK(bm_backward)->Arg(100)->Arg(200);

void bm_step_loss(benchmark::State& state) {
  const spinn::ProblemSpec spec = spinn::builtin("heat-source");
  spinn::Discretization disc(spec, spec.default_bases, spec.default_order);
  spinn::Stepper stepper(spec, std::move(disc), spinn::gauss_legendre_tableau(4),
                         0.05, spinn::NetConfig{}, spinn::AdaptiveConfig{});
  const spinn::StepSystem sys = stepper.make_system();
  const Eigen::MatrixXd out =
      Eigen::MatrixXd::Random(stepper.disc().coef_size(), sys.tab.stages + 1);
  for (auto _ : state) benchmark::DoNotOptimize(spinn::step_loss(sys, out));
}
BENCHMARK(bm_step_loss);

}  // namespace

BENCHMARK_MAIN();
