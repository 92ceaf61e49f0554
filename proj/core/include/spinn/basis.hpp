#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace spinn {

enum class BasisFamily {
  HermiteFunction,     // orthonormal generalized Hermite functions on R
  LaguerreFunction,    // orthonormal generalized Laguerre functions on R+
  ChebyshevPolynomial, // Chebyshev polynomials on [-1, 1]
  MappedGegenbauer,    // algebraically decaying mapped Gegenbauer on R
};

/// Descriptor of a spectral basis family together with its scaling beta,
/// translation x_left and (for MappedGegenbauer) the Gegenbauer parameter.
struct BasisDescriptor {
  BasisFamily family = BasisFamily::HermiteFunction;
  double beta = 1.0;
  double x_left = 0.0;
  double gegenbauer_lambda = 0.0;

  bool operator==(const BasisDescriptor&) const = default;
};

/// Nodes with Lebesgue-converted weights: sum_k w_k g(x_k) ~ integral of g
/// over the family's natural domain. For Chebyshev the natural measure is
/// the Chebyshev weight (1-x^2)^{-1/2} dx on [-1, 1] and the rule is
/// Chebyshev-Gauss-Lobatto (endpoints included).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// exp-weighted basis value, phi_i(x).
double eval_basis(const BasisDescriptor& desc, int i, double x);

/// Values phi_0(x) .. phi_n(x) by the family recurrence (one pass).
std::vector<double> eval_basis_all(const BasisDescriptor& desc, int n, double x);

/// Gauss rule of the family with q nodes (CGL for Chebyshev). Throws on
/// root-finding non-convergence.
QuadratureRule quadrature_rule(const BasisDescriptor& desc, int q);

/// Discrete projection w_i = <f, phi_i> / <phi_i, phi_i> using the family's
/// q-node rule; q defaults to order+1.
std::vector<double> project(const std::function<double(double)>& f,
                            const BasisDescriptor& desc, int order);
std::vector<double> project(const std::function<double(double)>& f,
                            const BasisDescriptor& desc, int order, int q);
/// Same, from precomputed values at the nodes of `rule`.
std::vector<double> project(std::span<const double> values_at_nodes,
                            const QuadratureRule& rule,
                            const BasisDescriptor& desc, int order);

/// Squared natural-measure norm <phi_i, phi_i> (1 for the orthonormal
/// families, gamma_i for Chebyshev, gamma_i / beta for MMGF).
double basis_norm_sq(const BasisDescriptor& desc, int i);

/// Coefficient-space differentiation. Banded for Hermite, triangular for
/// Laguerre and Chebyshev.
class DerivativeMap {
 public:
  DerivativeMap(const BasisDescriptor& desc, int order);

  int order() const { return order_; }
  const BasisDescriptor& basis() const { return desc_; }

  /// Matrix element (i, j): contribution of phi_j to the derivative's
  /// phi_i coefficient.
  double entry(int i, int j) const;

  /// Dense (n x n) matrix acting on coefficient vectors of length n.
  Eigen::MatrixXd dense(int n) const;

  std::vector<double> apply(std::span<const double> coeffs) const;

 private:
  BasisDescriptor desc_;
  int order_;
};

inline DerivativeMap derivative_map(const BasisDescriptor& desc, int order) {
  return DerivativeMap(desc, order);
}

}  // namespace spinn
