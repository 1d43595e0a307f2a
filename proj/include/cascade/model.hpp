#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "cascade/numerics.hpp"

namespace cascade {

using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

/// Scaled model parameters. Time is measured in units of (beta_r/sqrt(kappa))^-1,
/// so the only remaining knobs are r = beta_s/beta_r and the inter-cavity
/// coupling efficiency epsilon.
class SystemParams {
 public:
  /// Throws InvalidParams unless r >= 0, 0 <= epsilon <= 1, both finite.
  SystemParams(double r, double epsilon);

  /// Reduces unscaled rates (real, non-negative beta_r > 0, beta_s, kappa > 0).
  static SystemParams from_unscaled(double beta_r, double beta_s, double kappa,
                                    double epsilon);

  double r() const { return r_; }
  double epsilon() const { return epsilon_; }
  bool resonant() const;
  bool perfect_coupling() const { return epsilon_ == 1.0; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;

 private:
  double r_;
  double epsilon_;
};

/// Amplitudes in the canonical order (c11, c10, c01, c00); qubit 1 is the
/// left index. Unnormalized states are allowed: between jumps the norm
/// carries the no-jump probability.
class StateVector {
 public:
  StateVector() : amps_(Vector4::Zero()) {}
  explicit StateVector(const Vector4& amps) : amps_(amps) {}
  StateVector(cplx c11, cplx c10, cplx c01, cplx c00) : amps_(c11, c10, c01, c00) {}

  const Vector4& amplitudes() const { return amps_; }
  cplx operator[](Eigen::Index i) const { return amps_[i]; }

  cplx c11() const { return amps_[0]; }
  cplx c10() const { return amps_[1]; }
  cplx c01() const { return amps_[2]; }
  cplx c00() const { return amps_[3]; }

  double norm2() const { return amps_.squaredNorm(); }
  double norm() const { return amps_.norm(); }
  StateVector normalized() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  Vector4 amps_;
};

/// |<a|b>|^2 / (<a|a><b|b>)
double fidelity(const StateVector& a, const StateVector& b);

namespace basis {
StateVector ket11();
StateVector ket10();
StateVector ket01();
StateVector ket00();
StateVector phi_plus();
StateVector phi_minus();
StateVector psi_plus();
StateVector psi_minus();

/// sigma_z on qubit i has |1> -> +|1>, |0> -> -|0>.
Matrix4 sigma_z(int qubit);
Matrix4 sigma_minus(int qubit);
Matrix4 sigma_plus(int qubit);
Matrix4 sigma_zz();
}  // namespace basis

struct ModelOperators {
  SystemParams params;
  Matrix4 R1, R2;
  Matrix4 C1, C2;
  Matrix4 H0;
  Matrix4 heff_generator;  // -i H_eff

  const Matrix4& jump(int detector) const;
};

ModelOperators build_operators(const SystemParams& params);

/// 16x16 matrix of rho -> L0 rho + S rho acting on column-stacked rho.
ComplexMatrix build_liouvillian(const SystemParams& params);

Eigen::Matrix<cplx, 16, 1> vectorize(const Matrix4& rho);
Matrix4 unvectorize(const ComplexVector& v);

struct NoJumpEigenpair {
  StateVector state;
  double eigenvalue;
};

/// Closed-form eigenpairs of the no-jump generator. Supported for epsilon = 1
/// (any r) and for r = 1 (any epsilon, Bell states). Other parameters throw
/// Unsupported; use eig() on the generator instead.
std::vector<NoJumpEigenpair> nojump_eigensystem(const SystemParams& params);

}  // namespace cascade
