#include "cascade/master.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace cascade {

namespace {
constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-9;
constexpr double kPositivityTol = 1e-9;
constexpr double kPureRankTol = 1e-9;

Matrix4 hermitian_part(const Matrix4& m) { return 0.5 * (m + m.adjoint()); }
}  // namespace

std::optional<std::string> density_violation(const Matrix4& rho) {
  if (!rho.allFinite()) return "non-finite entries";
  const double asym = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol) {
    std::ostringstream os;
    os << "not Hermitian (max |rho - rho^dagger| = " << asym << ")";
    return os.str();
  }
  const cplx trace = rho.trace();
  if (std::abs(trace - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "trace " << trace.real() << " differs from 1";
    return os.str();
  }
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(hermitian_part(rho),
                                                Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()[0] < -kPositivityTol) {
    std::ostringstream os;
    os << "negative eigenvalue " << solver.eigenvalues()[0];
    return os.str();
  }
  return std::nullopt;
}

DensityMatrix::DensityMatrix(const Matrix4& entries) : entries_(entries) {
  if (auto why = density_violation(entries)) {
    throw Error(ErrorKind::InvalidState, "invalid density matrix: " + *why);
  }
}

DensityMatrix DensityMatrix::projector(const StateVector& state) {
  const Vector4 v = state.normalized().amplitudes();
  return DensityMatrix(v * v.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::unchecked(const Matrix4& entries) {
  return DensityMatrix(entries, Unchecked{});
}

double DensityMatrix::purity() const {
  return (entries_ * entries_).trace().real();
}

double frobenius_distance(const Matrix4& a, const Matrix4& b) {
  return (a - b).norm();
}

std::vector<DensityMatrix> evolve_density_series(const DensityMatrix& rho0,
                                                 const std::vector<double>& times,
                                                 const SystemParams& params) {
  const Propagator propagator(build_liouvillian(params));
  const ComplexVector start = vectorize(rho0.entries());

  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) {
      throw Error(ErrorKind::InvalidParams, "evolution time must be >= 0");
    }
    if (t == 0.0) {
      out.push_back(rho0);
      continue;
    }
    const ComplexVector v = propagator.apply(start, t);
    if (!v.allFinite()) {
      throw Error(ErrorKind::NonFinite, "density evolution overflowed");
    }
    out.emplace_back(hermitian_part(unvectorize(v)));
  }
  return out;
}

DensityMatrix evolve_density(const DensityMatrix& rho0, double t,
                             const SystemParams& params) {
  return evolve_density_series(rho0, {t}, params).front();
}

DegenerateSteadyStateError::DegenerateSteadyStateError(std::vector<Matrix4> basis)
    : Error(ErrorKind::DegenerateSteadyState,
            "Liouvillian null space has dimension " + std::to_string(basis.size())),
      basis_(std::move(basis)) {}

std::vector<Matrix4> liouvillian_null_space(const SystemParams& params) {
  const ComplexMatrix L = build_liouvillian(params);
  Eigen::JacobiSVD<ComplexMatrix> svd(L, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-9 * std::max(sv[0], std::numeric_limits<double>::min());

  // The null space is closed under adjoint, so Hermitian and anti-Hermitian
  // parts of each null vector span it over the reals.
  std::vector<Matrix4> candidates;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) continue;
    const Matrix4 m = unvectorize(svd.matrixV().col(k));
    candidates.push_back(hermitian_part(m));
    candidates.push_back(hermitian_part(cplx(0.0, -1.0) * m));
  }

  std::vector<Matrix4> basis;
  for (Matrix4 c : candidates) {
    for (const auto& b : basis) {
      c -= (b.adjoint() * c).trace().real() * b;
    }
    const double n = c.norm();
    if (n > 1e-6) basis.push_back(c / n);
  }
  return basis;
}

SteadyState steady_state(const SystemParams& params) {
  auto basis = liouvillian_null_space(params);
  if (basis.empty()) {
    throw Error(ErrorKind::NonFinite, "Liouvillian has no null vector");
  }
  if (basis.size() > 1) throw DegenerateSteadyStateError(std::move(basis));

  Matrix4 rho = basis.front();
  rho /= rho.trace();
  rho = hermitian_part(rho);
  SteadyState out{DensityMatrix(rho), std::nullopt};

  Eigen::SelfAdjointEigenSolver<Matrix4> solver(rho);
  const auto& w = solver.eigenvalues();
  if (w[2] < kPureRankTol) {
    Vector4 v = solver.eigenvectors().col(3);
    // Fix the global phase: largest-magnitude amplitude real and positive.
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::conj(v[k]) / std::abs(v[k]);
    out.pure_witness = StateVector(v);
  }
  return out;
}

SpectrumReport relaxation_time(const SystemParams& params) {
  SpectrumReport rep;
  rep.eigenvalues = eigenvalues(build_liouvillian(params));
  const double threshold = zero_threshold(rep.eigenvalues);

  rep.zero_multiplicity = 0;
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& v : rep.eigenvalues) {
    if (std::abs(v.real()) <= threshold) {
      ++rep.zero_multiplicity;
    } else {
      slowest = std::min(slowest, std::abs(v.real()));
    }
  }

  rep.lambda2 = 0.0;
  if (std::isfinite(slowest)) {
    double best_imag = std::numeric_limits<double>::infinity();
    for (const auto& v : rep.eigenvalues) {
      const double re = std::abs(v.real());
      if (re <= threshold || re > slowest * (1.0 + 1e-9)) continue;
      if (std::abs(v.imag()) < best_imag) {
        best_imag = std::abs(v.imag());
        rep.lambda2 = v;
      }
    }
    // A defective eigenvalue comes back as a ring of perturbed copies whose
    // centroid is accurate to rounding; snap to that centroid.
    const double radius = 1e-6 * std::max(1.0, threshold / 1e-9);
    cplx sum = 0.0;
    int members = 0;
    for (const auto& v : rep.eigenvalues) {
      if (std::abs(v - rep.lambda2) <= radius) {
        sum += v;
        ++members;
      }
    }
    if (members > 1) rep.lambda2 = sum / static_cast<double>(members);
  }

  if (rep.zero_multiplicity >= 2 || !std::isfinite(slowest)) {
    rep.tau = std::numeric_limits<double>::infinity();
  } else {
    rep.tau = 1.0 / std::abs(rep.lambda2.real());
  }
  return rep;
}

double expectation_sigmazz(const DensityMatrix& rho) {
  return (rho.entries() * basis::sigma_zz()).trace().real();
}

}  // namespace cascade
