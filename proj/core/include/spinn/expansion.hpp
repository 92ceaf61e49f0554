#pragma once

#include "spinn/basis.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace spinn {

/// Truncated series sum_i w_i phi_i(x). Complex-valued expansions carry a
/// second coefficient list for the imaginary part.
struct SpectralExpansion {
  BasisDescriptor basis;
  int order = 0;
  std::vector<double> re;  // order + 1 entries
  std::vector<double> im;  // empty for real expansions

  bool is_complex() const { return !im.empty(); }
};

/// Sparse multi-index set for tensorized expansions in d <= 3 dimensions.
/// gamma_cross unset means the full tensor grid.
struct MultiIndexSet {
  int dim = 1;
  int cap = 0;
  std::optional<double> gamma_cross;
  std::vector<std::array<int, 3>> indices;  // lexicographic, unused dims 0

  int size() const { return int(indices.size()); }
};

struct MultiExpansion {
  std::vector<BasisDescriptor> bases;  // one per dimension
  MultiIndexSet set;
  std::vector<double> coef;  // keyed by set.indices
};

double evaluate(const SpectralExpansion& e, double x);
/// Imaginary part at x (zero for real expansions).
double evaluate_imag(const SpectralExpansion& e, double x);
double evaluate(const MultiExpansion& e, std::span<const double> x);

/// Eq.-(9)-style ratio of high-order to total weighted coefficient energy,
/// in [0, 1]. All-zero expansions give 0.
double frequency_indicator(const SpectralExpansion& e);
double frequency_indicator(std::span<const double> re, std::span<const double> im,
                           const BasisDescriptor& basis, int order);
/// Per-dimension indicator from marginal coefficient energies.
double frequency_indicator(const MultiExpansion& e, int dim);

/// Project onto a new descriptor/order of the same family. Identical basis
/// parameters reduce to zero-padding or truncation of the coefficient list.
SpectralExpansion reproject(const SpectralExpansion& e,
                            const BasisDescriptor& new_basis, int new_order);

/// 1D coefficient transfer matrix (new_order+1) x (old_order+1) such that
/// new = T * old; used for dimension-wise reprojection of tensor expansions.
Eigen::MatrixXd reprojection_matrix(const BasisDescriptor& old_basis, int old_order,
                                    const BasisDescriptor& new_basis, int new_order);
MultiExpansion reproject(const MultiExpansion& e,
                         const std::vector<BasisDescriptor>& new_bases);

/// Indices admitted by |n|_mix * |n|_inf^{-gamma} <= cap^{1-gamma}
/// (all of [0,cap]^d when gamma is unset). The all-zero index is always
/// included.
MultiIndexSet hyperbolic_index_set(int dim, int cap, std::optional<double> gamma);

/// Weighted-L2 distance between the expansion and a reference callable,
/// computed with the family's q-node rule.
double l2_error(const SpectralExpansion& e, const std::function<double(double)>& ref,
                int q);
/// Complex reference: pair of callables (real, imag).
double l2_error(const SpectralExpansion& e, const std::function<double(double)>& ref_re,
                const std::function<double(double)>& ref_im, int q);
/// Tensorized rule with q nodes per dimension.
double l2_error(const MultiExpansion& e,
                const std::function<double(std::span<const double>)>& ref, int q);

}  // namespace spinn
