#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spinn {

/// Fully connected rectifier network. Hidden layers are affine -> batch
/// norm -> rectifier; the output layer is affine only. Inputs and outputs
/// are stored column-per-sample.
struct MlpParams {
  std::vector<int> dims;               // [in, H, ..., H, out]
  std::vector<Eigen::MatrixXd> w;      // w[l]: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::VectorXd> bn_scale, bn_shift;  // per hidden layer
  std::vector<Eigen::VectorXd> bn_mean, bn_var;     // running statistics

  int hidden_count() const { return int(dims.size()) - 2; }
  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::VectorXd> bn_scale, bn_shift;
};

enum class Mode { Train, Eval };

/// Loss value and its gradient with respect to the network outputs.
struct LossEval {
  double value = 0.0;
  Eigen::MatrixXd grad;  // out_dim x batch
};
using OutputLoss = std::function<LossEval(const Eigen::MatrixXd& outputs)>;

struct TrainConfig {
  double eta = 5e-4;
  long max_epochs = 100000;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  /// Invoked after every parameter update with the epoch index.
  std::function<void(long, const MlpParams&)> on_epoch;
};

struct TrainResult {
  std::vector<double> history;  // loss per epoch
  long epochs = 0;
  bool diverged = false;
};

/// Weights ~ U(-sqrt(a), sqrt(a)) with a = 1/fan_in, from a seeded
/// generator; biases zero, batch-norm scale 1 / shift 0.
MlpParams init_mlp(const std::vector<int>& dims, std::uint64_t seed);

/// Train mode uses batch statistics (batch >= 2); eval mode uses the stored
/// running averages, making the map per-sample. Pure: running statistics
/// are not updated here.
Eigen::MatrixXd forward(const MlpParams& p, const Eigen::MatrixXd& inputs, Mode mode);

/// Reverse-mode gradients of loss(forward(p, inputs, Train)) with respect to
/// every weight, bias, and batch-norm scale/shift, including the
/// batch-statistics pathway.
MlpGradients loss_gradient(const MlpParams& p, const Eigen::MatrixXd& inputs,
                           const OutputLoss& loss, double* loss_value = nullptr);

/// Full-batch gradient descent; stops at max_epochs or loss <= tol. Updates
/// batch-norm running statistics with momentum 0.1. On a non-finite loss the
/// last finite parameters are restored and `diverged` is set.
TrainResult train(MlpParams& p, const Eigen::MatrixXd& inputs,
                  const OutputLoss& loss, const TrainConfig& cfg);

/// Versioned JSON snapshot (layer dims + flattened arrays).
std::string to_json(const MlpParams& p);
MlpParams mlp_from_json(const std::string& text);

}  // namespace spinn
