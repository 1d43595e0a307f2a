#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cascade/error.hpp"

namespace cascade {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double kEigResidual = 1e-10;
inline constexpr double kPropagatorCrossCheck = 1e-9;
// Eigenvector bases worse conditioned than this are treated as defective.
inline constexpr double kMaxEigenbasisCondition = 1e10;
}  // namespace tol

/// Eigenvalues sorted by descending real part (ties: descending imaginary
/// part); eigenvectors are the matching unit-norm columns of `vectors`.
struct EigenSystem {
  ComplexVector values;
  ComplexMatrix vectors;

  Eigen::Index dim() const { return values.size(); }
};

bool all_finite(const ComplexMatrix& m);

/// Throws NonFinite on NaN/Inf entries, InvalidParams when the matrix is not
/// square with dimension 4 or 16, and NonDiagonalizable when no eigenbasis
/// meets the residual and conditioning bounds.
EigenSystem eig(const ComplexMatrix& matrix);

/// Eigenvalues only, sorted like eig(); no diagonalizability requirement.
ComplexVector eigenvalues(const ComplexMatrix& matrix);

/// Largest |Mv - lambda v| over all pairs.
double max_residual(const ComplexMatrix& matrix, const EigenSystem& es);

/// exp(generator * t) for a constant generator with no growing modes.
///
/// Evolution always goes through a scaled-and-squared Pade exponential; the
/// eigendecomposition is kept only for the stationary projector. Eigenvector
/// propagation loses accuracy near defective clusters, which these
/// generators have (r = 0, and many Liouvillians with epsilon < 1).
class Propagator {
 public:
  explicit Propagator(ComplexMatrix generator);

  ComplexVector apply(const ComplexVector& state, double t) const;
  ComplexMatrix matrix(double t) const;

/// Spectral projector onto the eigenvalues with |Re lambda| below
  /// zero_threshold (the non-decaying subspace). Zero matrix if none exist.
  const ComplexMatrix& stationary_projector() const { return stationary_; }
  Eigen::Index stationary_dim() const { return stationary_dim_; }

  bool diagonalizable() const { return spectral_.has_value(); }
  const ComplexMatrix& generator() const { return generator_; }
  const std::optional<EigenSystem>& spectrum() const { return spectral_; }

 private:
  ComplexMatrix generator_;
  std::optional<EigenSystem> spectral_;
  ComplexMatrix stationary_;
  Eigen::Index stationary_dim_ = 0;
};

/// Threshold on |Re lambda| below which an eigenvalue counts as zero:
/// 1e-9 times the spectral radius.
double zero_threshold(const ComplexVector& eigenvalues);

ComplexVector propagate(const ComplexMatrix& generator,
                        const ComplexVector& state, double t);

/// Pade exponential, used as fallback and available for cross-checks.
ComplexMatrix expm(const ComplexMatrix& m);

}  // namespace cascade
