#pragma once

#include "spinn/basis.hpp"
#include "spinn/expansion.hpp"
#include "spinn/net.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace spinn {

enum class DomainTag { BoundedInterval, HalfLine, RealLine, RealPlane, Real3Space };

enum class OperatorKind {
  Advection,       // u_t = a(x,t) u_x
  Diffusion,       // u_t = kappa u_xx (+ f); weak Laplacian in d >= 2
  Schrodinger,     // i psi_t = -psi_xx, weak form
};

using SpaceTimeFn = std::function<double(std::span<const double>, double)>;
using SpaceFn = std::function<double(std::span<const double>)>;

struct ProblemSpec {
  std::string id;
  DomainTag domain = DomainTag::RealLine;
  int dim = 1;
  OperatorKind op = OperatorKind::Diffusion;
  std::vector<BasisDescriptor> default_bases;
  int default_order = 8;
  double kappa = 1.0;
  bool kappa_known = true;                      // false for the inference problem
  std::function<double(double, double)> advection_coef;  // a(x, t)
  SpaceTimeFn source;                           // f(x, t), optional
  bool has_boundary = false;
  double boundary_x = 0.0;
  std::function<double(double)> boundary_value; // g(t)
  SpaceFn initial, initial_im;
  SpaceTimeFn analytic, analytic_im;            // optional
  bool complex_valued = false;
  double schrodinger_zeta = 1.0, schrodinger_k = 1.0;

  bool has_analytic() const { return bool(analytic); }
};

/// Registry of the built-in problems: bounded-advection, halfline-advection,
/// heat2d, heat3d, schrodinger, heat-source, diffusivity-inference.
ProblemSpec builtin(const std::string& id);
ProblemSpec builtin_schrodinger(double zeta, double k);

/// Spatial operator applied in coefficient space (the action of the PDE's
/// right-hand side, excluding any source term).
SpectralExpansion apply_operator(const ProblemSpec& p, const SpectralExpansion& e,
                                 double t);
MultiExpansion apply_operator(const ProblemSpec& p, const MultiExpansion& e, double t);

/// Analytic node values plus i.i.d. Gaussian(0, sigma^2) noise, seeded.
std::vector<double> observe_noisy(const ProblemSpec& p, double t, double sigma,
                                  const QuadratureRule& rule, std::uint64_t seed);

/// Concrete coefficient-space form of a problem: stacked coefficient vector
/// (two blocks for complex problems), operator matrix, norms, projections,
/// and the basis-update hooks the adaptive controllers use.
class Discretization {
 public:
  Discretization(const ProblemSpec& spec, std::vector<BasisDescriptor> bases,
                 int order, std::optional<double> gamma_cross = std::nullopt);

  const ProblemSpec& spec() const { return spec_; }
  const std::vector<BasisDescriptor>& bases() const { return bases_; }
  int order() const { return order_; }
  int dim() const { return spec_.dim; }
  int spatial_size() const { return spatial_size_; }
  int coef_size() const { return spec_.complex_valued ? 2 * spatial_size_ : spatial_size_; }
  const MultiIndexSet& index_set() const { return set_; }

  Eigen::VectorXd project_initial() const;
  Eigen::VectorXd project(const SpaceTimeFn& f, double t) const;
  Eigen::MatrixXd operator_matrix(double t) const;
  Eigen::VectorXd source_coeffs(double t) const;  // zero when no source
  Eigen::VectorXd norm_weights() const;

  Eigen::VectorXd boundary_phi() const;  // basis values at the boundary point

  double error_vs_analytic(const Eigen::VectorXd& coef, double t) const;
  double indicator(const Eigen::VectorXd& coef, int dim) const;

  SpectralExpansion to_expansion(const Eigen::VectorXd& coef) const;  // 1D
  MultiExpansion to_multi(const Eigen::VectorXd& coef) const;         // d >= 2

  /// Reproject coef onto an updated descriptor for one dimension.
  void set_basis(int dim, const BasisDescriptor& nb, Eigen::VectorXd& coef);
  /// 1D only; zero-pads or truncates.
  void set_order(int new_order, Eigen::VectorXd& coef);

 private:
  ProblemSpec spec_;
  std::vector<BasisDescriptor> bases_;
  int order_;
  MultiIndexSet set_;  // dim >= 2 only
  int spatial_size_ = 0;

  Eigen::MatrixXd spatial_operator(double t) const;  // per-component block
};

/// Observation triples for the function-approximation task.
struct FitDataset {
  std::vector<double> x, t, u;
  double cauchy_scale = 12.0, cauchy_location = 0.0;
  double t_lo = 0.0, t_hi = 1.0;
  std::uint64_t seed = 0;

  int size() const { return int(x.size()); }
};

/// Samples x ~ Cauchy(location, scale), t ~ U(t_lo, t_hi), u = target(x, t).
FitDataset sample_fit_dataset(const std::function<double(double, double)>& target,
                              int n, double cauchy_scale, double cauchy_location,
                              std::uint64_t seed);

/// The algebraically decaying Example-1 target 8x sin(3x) t / (x^2+4)^2.
double fit_target(double x, double t);

enum class FitMode { Spectral, Direct };

struct FitResult {
  MlpParams params;
  std::vector<double> train_mse;  // per epoch
  std::vector<double> test_mse;
};

/// Trains on the first half of `data`, evaluating held-out MSE on the second
/// half each epoch. Spectral mode learns t -> coefficients of the given
/// basis; direct mode learns (x, t) -> u.
FitResult fit_function(const FitDataset& data, FitMode mode,
                       const BasisDescriptor& basis, int order,
                       const std::vector<int>& hidden_dims, const TrainConfig& cfg);

}  // namespace spinn
