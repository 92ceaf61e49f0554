#pragma once

#include "spinn/collocation.hpp"

namespace spinn {

/// Symmetric matrix with entries confined to diagonals {-2, 0, +2}; the
/// coefficient-space Laplacian of the orthonormal Hermite basis.
class BandMatrix {
 public:
  explicit BandMatrix(int n);

  int size() const { return n_; }
  double entry(int i, int j) const;
  void set(int i, int j, double v);  // j - i must be in {-2, 0, 2}
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

 private:
  int n_;
  Eigen::VectorXd main_, upper2_;
};

/// Laplacian of Hermite functions with scaling beta, order N (size N+1).
BandMatrix hermite_laplacian(int order, double beta);

/// Deterministic Crank-Nicolson time-stepping of a 1D diffusion problem in
/// Hermite coefficient space, with optional scaling adaptivity between
/// steps. `loss` and `epochs` in the records are 0; wall_ms is measured.
std::vector<StepRecord> cn_solve(const ProblemSpec& spec, double dt, double t_end,
                                 const AdaptiveConfig& adapt);

}  // namespace spinn
