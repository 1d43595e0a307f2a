#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix.
class DensityMatrix {
 public:
  /// Validates the invariants (Hermitian to 1e-10, trace 1 +- 1e-9, minimum
  /// eigenvalue >= -1e-9); throws InvalidState otherwise.
  explicit DensityMatrix(const Matrix4& entries);

  static DensityMatrix projector(const StateVector& state);
  /// Skips validation; for intermediate sums whose invariants are checked by
  /// the caller.
  static DensityMatrix unchecked(const Matrix4& entries);

  const Matrix4& entries() const { return entries_; }
  cplx operator()(int i, int j) const { return entries_(i, j); }
  double purity() const;

 private:
  struct Unchecked {};
  DensityMatrix(const Matrix4& entries, Unchecked) : entries_(entries) {}
  Matrix4 entries_;
};

/// Returns a description of the first violated invariant, if any.
std::optional<std::string> density_violation(const Matrix4& rho);

double frobenius_distance(const Matrix4& a, const Matrix4& b);

DensityMatrix evolve_density(const DensityMatrix& rho0, double t,
                             const SystemParams& params);

/// Evolves to every time in `times` (ascending) reusing one decomposition.
std::vector<DensityMatrix> evolve_density_series(const DensityMatrix& rho0,
                                                 const std::vector<double>& times,
                                                 const SystemParams& params);

struct SteadyState {
  DensityMatrix rho;
  std::optional<StateVector> pure_witness;  // set when rho has rank 1
};

/// Raised when the Liouvillian null space has dimension > 1. The basis spans
/// the null space with Hermitian matrices, orthonormal in the Frobenius inner
/// product; coherences between dark states appear as traceless elements.
class DegenerateSteadyStateError : public Error {
 public:
  explicit DegenerateSteadyStateError(std::vector<Matrix4> basis);
  const std::vector<Matrix4>& basis() const { return basis_; }

 private:
  std::vector<Matrix4> basis_;
};

SteadyState steady_state(const SystemParams& params);

/// Hermitian, Frobenius-orthonormal basis of the Liouvillian null space.
std::vector<Matrix4> liouvillian_null_space(const SystemParams& params);

struct SpectrumReport {
  ComplexVector eigenvalues;  // 16, descending real part
  cplx lambda2;
  double tau;  // +infinity when the null space is degenerate
  int zero_multiplicity;

  bool tau_infinite() const { return !std::isfinite(tau); }
};

SpectrumReport relaxation_time(const SystemParams& params);

double expectation_sigmazz(const DensityMatrix& rho);

}  // namespace cascade
