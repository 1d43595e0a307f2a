#include "cascade/model.hpp"

#include <cmath>

namespace cascade {

namespace {
constexpr double kResonanceTolerance = 1e-12;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

SystemParams::SystemParams(double r, double epsilon) : r_(r), epsilon_(epsilon) {
  if (!std::isfinite(r) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::InvalidParams, "parameters must be finite");
  }
  if (r < 0.0) {
    throw Error(ErrorKind::InvalidParams, "r must be non-negative");
  }
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw Error(ErrorKind::InvalidParams, "epsilon must lie in [0, 1]");
  }
}

SystemParams SystemParams::from_unscaled(double beta_r, double beta_s,
                                         double kappa, double epsilon) {
  if (!(beta_r > 0.0) || !(kappa > 0.0) || !(beta_s >= 0.0)) {
    throw Error(ErrorKind::InvalidParams,
                "need beta_r > 0, beta_s >= 0 and kappa > 0");
  }
  return SystemParams(beta_s / beta_r, epsilon);
}

bool SystemParams::resonant() const {
  return std::abs(r_ - 1.0) <= kResonanceTolerance;
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) {
    throw Error(ErrorKind::InvalidState, "cannot normalize the zero vector");
  }
  return StateVector(amps_ / n);
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double na = a.norm2();
  const double nb = b.norm2();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::norm(a.amplitudes().dot(b.amplitudes())) / (na * nb);
}

namespace basis {

StateVector ket11() { return {1.0, 0.0, 0.0, 0.0}; }
StateVector ket10() { return {0.0, 1.0, 0.0, 0.0}; }
StateVector ket01() { return {0.0, 0.0, 1.0, 0.0}; }
StateVector ket00() { return {0.0, 0.0, 0.0, 1.0}; }
StateVector phi_plus() { return {kInvSqrt2, 0.0, 0.0, kInvSqrt2}; }
StateVector phi_minus() { return {-kInvSqrt2, 0.0, 0.0, kInvSqrt2}; }
StateVector psi_plus() { return {0.0, kInvSqrt2, kInvSqrt2, 0.0}; }
StateVector psi_minus() { return {0.0, -kInvSqrt2, kInvSqrt2, 0.0}; }

namespace {
// Single-qubit operators in the (|1>, |0>) order used by the product basis.
Eigen::Matrix2cd lower() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(1, 0) = 1.0;  // |0><1|
  return m;
}

Matrix4 on_qubit(int qubit, const Eigen::Matrix2cd& op) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd& left = qubit == 1 ? op : id;
  const Eigen::Matrix2cd& right = qubit == 1 ? id : op;
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
  return out;
}

void check_qubit(int qubit) {
  if (qubit != 1 && qubit != 2) {
    throw Error(ErrorKind::InvalidParams, "qubit index must be 1 or 2");
  }
}
}  // namespace

Matrix4 sigma_minus(int qubit) {
  check_qubit(qubit);
  return on_qubit(qubit, lower());
}

Matrix4 sigma_plus(int qubit) { return sigma_minus(qubit).adjoint(); }

Matrix4 sigma_z(int qubit) {
  check_qubit(qubit);
  Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return on_qubit(qubit, z);
}

Matrix4 sigma_zz() { return sigma_z(1) * sigma_z(2); }

}  // namespace basis

const Matrix4& ModelOperators::jump(int detector) const {
  if (detector == 1) return C1;
  if (detector == 2) return C2;
  throw Error(ErrorKind::InvalidParams, "detector index must be 1 or 2");
}

ModelOperators build_operators(const SystemParams& params) {
  const double r = params.r();
  const double eps = params.epsilon();
  const double sqrt_eps = std::sqrt(eps);

  const Matrix4 R1 = basis::sigma_minus(1) + r * basis::sigma_plus(1);
  const Matrix4 R2 = basis::sigma_minus(2) + r * basis::sigma_plus(2);
  const Matrix4 C1 = std::sqrt(2.0) * (sqrt_eps * R1 - R2);
  const Matrix4 C2 = std::sqrt(2.0 * (1.0 - eps)) * R1;
  const cplx i(0.0, 1.0);
  const Matrix4 H0 = i * sqrt_eps * (R2.adjoint() * R1 - R1.adjoint() * R2);
  const Matrix4 generator =
      -i * H0 - 0.5 * (C1.adjoint() * C1 + C2.adjoint() * C2);

  return ModelOperators{params, R1, R2, C1, C2, H0, generator};
}

Eigen::Matrix<cplx, 16, 1> vectorize(const Matrix4& rho) {
  Eigen::Matrix<cplx, 16, 1> v;
  for (int c = 0; c < 4; ++c) v.segment<4>(4 * c) = rho.col(c);
  return v;
}

Matrix4 unvectorize(const ComplexVector& v) {
  if (v.size() != 16) {
    throw Error(ErrorKind::InvalidState, "vectorized density must have 16 entries");
  }
  Matrix4 rho;
  for (int c = 0; c < 4; ++c) rho.col(c) = v.segment<4>(4 * c);
  return rho;
}

namespace {
// Column stacking: vec(A X B) = (B^T kron A) vec(X).
ComplexMatrix kron(const Matrix4& a, const Matrix4& b) {
  ComplexMatrix out(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return out;
}
}  // namespace

ComplexMatrix build_liouvillian(const SystemParams& params) {
  const ModelOperators ops = build_operators(params);
  const Matrix4 id = Matrix4::Identity();
  const cplx i(0.0, 1.0);

  ComplexMatrix L = -i * (kron(id, ops.H0) - kron(ops.H0.transpose(), id));
  for (const Matrix4* c : {&ops.C1, &ops.C2}) {
    const Matrix4 cdc = c->adjoint() * (*c);
    L += -0.5 * (kron(id, cdc) + kron(cdc.transpose(), id));
    L += kron(c->conjugate(), *c);
  }
  return L;
}

std::vector<NoJumpEigenpair> nojump_eigensystem(const SystemParams& params) {
  const double r = params.r();
  if (params.perfect_coupling()) {
    // The fourth vector is r|10> - |01>: the E- block is not symmetric for
    // r != 1, so it is not orthogonal to the third.
    return {
        {StateVector(r, 0.0, 0.0, 1.0).normalized(), 0.0},
        {StateVector(1.0, 0.0, 0.0, -r).normalized(), -2.0 * (1.0 + r * r)},
        {StateVector(0.0, r, 1.0, 0.0).normalized(), -(r - 1.0) * (r - 1.0)},
        {StateVector(0.0, r, -1.0, 0.0).normalized(), -(r + 1.0) * (r + 1.0)},
    };
  }
  if (params.resonant()) {
    const double root = std::sqrt(params.epsilon());
    const double lambda_plus = -2.0 * (1.0 - root);
    const double lambda_minus = -2.0 * (1.0 + root);
    return {
        {basis::phi_plus(), lambda_plus},
        {basis::psi_plus(), lambda_plus},
        {basis::phi_minus(), lambda_minus},
        {basis::psi_minus(), lambda_minus},
    };
  }
  throw Error(ErrorKind::Unsupported,
              "no closed-form no-jump eigensystem for epsilon < 1 off resonance");
}

}  // namespace cascade
