#include "spinn/net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace spinn {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

double uniform_pm(std::mt19937_64& rng) {
  // symmetric in (-1, 1); avoids the implementation-defined
  // std::uniform_real_distribution for reproducibility
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> x;       // layer inputs, x[0] = network input
  std::vector<Eigen::MatrixXd> xhat;    // normalized pre-activations
  std::vector<Eigen::MatrixXd> y;       // batch-norm outputs (pre-rectifier)
  std::vector<Eigen::VectorXd> mu, var; // batch statistics per hidden layer
  Eigen::MatrixXd out;
};

void forward_impl(const MlpParams& p, const Eigen::MatrixXd& inputs, Mode mode,
                  ForwardCache* cache) {
  if (inputs.rows() != p.in_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  const long m = inputs.cols();
  if (m < 1) throw std::invalid_argument("forward: empty batch");
  if (mode == Mode::Train && m < 2)
    throw std::invalid_argument("forward: batch size 1 in train mode");
  const int hidden = p.hidden_count();
  Eigen::MatrixXd a = inputs;
  cache->x.assign(hidden + 1, {});
  cache->xhat.assign(hidden, {});
  cache->y.assign(hidden, {});
  cache->mu.assign(hidden, {});
  cache->var.assign(hidden, {});
  for (int l = 0; l < hidden; ++l) {
    cache->x[l] = a;
    Eigen::MatrixXd z = (p.w[l] * a).colwise() + p.b[l];
    Eigen::VectorXd mu, var;
    if (mode == Mode::Train) {
      mu = z.rowwise().mean();
      var = (z.colwise() - mu).array().square().rowwise().mean();
    } else {
      mu = p.bn_mean[l];
      var = p.bn_var[l];
    }
    const Eigen::ArrayXd inv_sd = (var.array() + kBnEps).sqrt().inverse();
    Eigen::MatrixXd xhat = ((z.colwise() - mu).array().colwise() * inv_sd).matrix();
    Eigen::MatrixXd y =
        (xhat.array().colwise() * p.bn_scale[l].array()).matrix().colwise() +
        p.bn_shift[l];
    a = y.array().max(0.0).matrix();
    cache->xhat[l] = std::move(xhat);
    cache->y[l] = std::move(y);
    cache->mu[l] = std::move(mu);
    cache->var[l] = std::move(var);
  }
  cache->x[hidden] = a;
  cache->out = (p.w[hidden] * a).colwise() + p.b[hidden];
}

MlpGradients zero_like(const MlpParams& p) {
  MlpGradients g;
  for (const auto& w : p.w) g.w.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.b) g.b.emplace_back(Eigen::VectorXd::Zero(b.size()));
  for (const auto& s : p.bn_scale) g.bn_scale.emplace_back(Eigen::VectorXd::Zero(s.size()));
  for (const auto& s : p.bn_shift) g.bn_shift.emplace_back(Eigen::VectorXd::Zero(s.size()));
  return g;
}

MlpGradients backward(const MlpParams& p, const ForwardCache& c,
                      const Eigen::MatrixXd& dout) {
  const int hidden = p.hidden_count();
  const double m = double(c.x[0].cols());
  MlpGradients g = zero_like(p);
  g.w[hidden] = dout * c.x[hidden].transpose();
  g.b[hidden] = dout.rowwise().sum();
  Eigen::MatrixXd da = p.w[hidden].transpose() * dout;
  for (int l = hidden - 1; l >= 0; --l) {
    // rectifier (subgradient 0 at the kink)
    Eigen::MatrixXd dy = (c.y[l].array() > 0.0).select(da, 0.0);
    g.bn_scale[l] = (dy.array() * c.xhat[l].array()).rowwise().sum();
    g.bn_shift[l] = dy.rowwise().sum();
    Eigen::MatrixXd dxhat = dy.array().colwise() * p.bn_scale[l].array();
    const Eigen::ArrayXd inv_sd = (c.var[l].array() + kBnEps).sqrt().inverse();
    // batch-statistics pathway
    const Eigen::ArrayXd mean_dxhat = dxhat.rowwise().mean();
    const Eigen::ArrayXd mean_dxhat_xhat =
        (dxhat.array() * c.xhat[l].array()).rowwise().sum() / m;
    Eigen::MatrixXd dz =
        (((dxhat.array().colwise() - mean_dxhat) -
          c.xhat[l].array().colwise() * mean_dxhat_xhat)
             .colwise() * inv_sd)
            .matrix();
    g.w[l] = dz * c.x[l].transpose();
    g.b[l] = dz.rowwise().sum();
    if (l > 0) da = p.w[l].transpose() * dz;
  }
  return g;
}

}  // namespace

MlpParams init_mlp(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("init_mlp: need at least two layer dims");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("init_mlp: layer dims must be >= 1");
  MlpParams p;
  p.dims = dims;
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(1.0 / dims[l]);
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (long i = 0; i < w.rows(); ++i)
      for (long j = 0; j < w.cols(); ++j) w(i, j) = bound * uniform_pm(rng);
    p.w.push_back(std::move(w));
    p.b.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  for (int l = 0; l < p.hidden_count(); ++l) {
    p.bn_scale.emplace_back(Eigen::VectorXd::Ones(dims[l + 1]));
    p.bn_shift.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
    p.bn_mean.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
    p.bn_var.emplace_back(Eigen::VectorXd::Ones(dims[l + 1]));
  }
  return p;
}

Eigen::MatrixXd forward(const MlpParams& p, const Eigen::MatrixXd& inputs, Mode mode) {
  ForwardCache c;
  forward_impl(p, inputs, mode, &c);
  return c.out;
}

MlpGradients loss_gradient(const MlpParams& p, const Eigen::MatrixXd& inputs,
                           const OutputLoss& loss, double* loss_value) {
  ForwardCache c;
  forward_impl(p, inputs, Mode::Train, &c);
  LossEval le = loss(c.out);
  if (!std::isfinite(le.value))
    throw std::runtime_error("loss_gradient: non-finite loss");
  if (loss_value) *loss_value = le.value;
  return backward(p, c, le.grad);
}

TrainResult train(MlpParams& p, const Eigen::MatrixXd& inputs,
                  const OutputLoss& loss, const TrainConfig& cfg) {
  if (cfg.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  TrainResult res;
  res.history.reserve(std::min<long>(cfg.max_epochs, 1 << 20));
  MlpGradients last;
  bool has_last = false;
  const int hidden = p.hidden_count();
  for (long epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ForwardCache c;
    forward_impl(p, inputs, Mode::Train, &c);
    const LossEval le = loss(c.out);
    if (!std::isfinite(le.value)) {
      if (has_last) {  // roll back the step that produced the blow-up
        for (size_t l = 0; l < p.w.size(); ++l) {
          p.w[l] += cfg.eta * last.w[l];
          p.b[l] += cfg.eta * last.b[l];
        }
        for (int l = 0; l < hidden; ++l) {
          p.bn_scale[l] += cfg.eta * last.bn_scale[l];
          p.bn_shift[l] += cfg.eta * last.bn_shift[l];
        }
      }
      res.diverged = true;
      break;
    }
    res.history.push_back(le.value);
    res.epochs = epoch + 1;
    for (int l = 0; l < hidden; ++l) {
      p.bn_mean[l] = (1.0 - kBnMomentum) * p.bn_mean[l] + kBnMomentum * c.mu[l];
      p.bn_var[l] = (1.0 - kBnMomentum) * p.bn_var[l] + kBnMomentum * c.var[l];
    }
    if (le.value <= cfg.tol) break;
    MlpGradients g = backward(p, c, le.grad);
    for (size_t l = 0; l < p.w.size(); ++l) {
      p.w[l] -= cfg.eta * g.w[l];
      p.b[l] -= cfg.eta * g.b[l];
    }
    for (int l = 0; l < hidden; ++l) {
      p.bn_scale[l] -= cfg.eta * g.bn_scale[l];
      p.bn_shift[l] -= cfg.eta * g.bn_shift[l];
    }
    last = std::move(g);
    has_last = true;
    if (cfg.on_epoch) cfg.on_epoch(epoch, p);
  }
  return res;
}

std::string to_json(const MlpParams& p) {
  nlohmann::json j;
  j["format"] = "spinn-mlp";
  j["version"] = 1;
  j["dims"] = p.dims;
  auto flat = [](const auto& mats) {
    std::vector<std::vector<double>> out;
    for (const auto& m : mats)
      out.emplace_back(m.data(), m.data() + m.size());
    return out;
  };
  j["weights"] = flat(p.w);
  j["biases"] = flat(p.b);
  j["bn_scale"] = flat(p.bn_scale);
  j["bn_shift"] = flat(p.bn_shift);
  j["bn_mean"] = flat(p.bn_mean);
  j["bn_var"] = flat(p.bn_var);
  return j.dump();
}

MlpParams mlp_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "spinn-mlp" || j.value("version", 0) != 1)
    throw std::invalid_argument("mlp_from_json: unrecognized snapshot format");
  MlpParams p;
  p.dims = j.at("dims").get<std::vector<int>>();
  const auto wflat = j.at("weights").get<std::vector<std::vector<double>>>();
  const auto bflat = j.at("biases").get<std::vector<std::vector<double>>>();
  for (size_t l = 0; l + 1 < p.dims.size(); ++l) {
    Eigen::MatrixXd w(p.dims[l + 1], p.dims[l]);
    std::copy(wflat[l].begin(), wflat[l].end(), w.data());
    p.w.push_back(std::move(w));
    Eigen::VectorXd b(p.dims[l + 1]);
    std::copy(bflat[l].begin(), bflat[l].end(), b.data());
    p.b.push_back(std::move(b));
  }
  auto vecs = [&](const char* key) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& v : j.at(key).get<std::vector<std::vector<double>>>()) {
      Eigen::VectorXd x(v.size());
      std::copy(v.begin(), v.end(), x.data());
      out.push_back(std::move(x));
    }
    return out;
  };
  p.bn_scale = vecs("bn_scale");
  p.bn_shift = vecs("bn_shift");
  p.bn_mean = vecs("bn_mean");
  p.bn_var = vecs("bn_var");
  return p;
}

}  // namespace spinn
