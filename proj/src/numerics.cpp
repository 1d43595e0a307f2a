#include "cascade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace cascade {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorKind::DegenerateSteadyState: return "DegenerateSteadyState";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::BisectionFailure: return "BisectionFailure";
    case ErrorKind::ZeroRate: return "ZeroRate";
    case ErrorKind::AnnihilatedState: return "AnnihilatedState";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void check_input(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || (m.rows() != 4 && m.rows() != 16)) {
    throw Error(ErrorKind::InvalidParams,
                "eigendecomposition expects a square 4x4 or 16x16 matrix");
  }
  if (!all_finite(m)) {
    throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  }
}

std::vector<Eigen::Index> descending_order(const ComplexVector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (values[a].real() != values[b].real()) {
      return values[a].real() > values[b].real();
    }
    return values[a].imag() > values[b].imag();
  });
  return order;
}

double scale_of(const ComplexMatrix& m) {
  return std::max(m.norm(), std::numeric_limits<double>::min());
}

}  // namespace

bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

ComplexVector eigenvalues(const ComplexMatrix& matrix) {
  check_input(matrix);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(matrix, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonDiagonalizable, "Schur iteration did not converge");
  }
  const ComplexVector raw = solver.eigenvalues();
  const auto order = descending_order(raw);
  ComplexVector sorted(raw.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted[static_cast<Eigen::Index>(k)] = raw[order[k]];
  }
  return sorted;
}

EigenSystem eig(const ComplexMatrix& matrix) {
  check_input(matrix);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(matrix, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonDiagonalizable, "Schur iteration did not converge");
  }

  const ComplexVector& raw_values = solver.eigenvalues();
  const ComplexMatrix& raw_vectors = solver.eigenvectors();
  const auto order = descending_order(raw_values);

  EigenSystem es;
  es.values.resize(raw_values.size());
  es.vectors.resize(matrix.rows(), matrix.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    es.values[col] = raw_values[order[k]];
    es.vectors.col(col) = raw_vectors.col(order[k]).normalized();
  }

  if (max_residual(matrix, es) > tol::kEigResidual * scale_of(matrix)) {
    throw Error(ErrorKind::NonDiagonalizable,
                "eigenpair residual exceeds tolerance");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(es.vectors);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (!(smallest > 0.0) || sv[0] / smallest > tol::kMaxEigenbasisCondition) {
    throw Error(ErrorKind::NonDiagonalizable,
                "eigenvectors do not form a well-conditioned basis");
  }
  return es;
}

double max_residual(const ComplexMatrix& matrix, const EigenSystem& es) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < es.dim(); ++k) {
    const ComplexVector v = es.vectors.col(k);
    worst = std::max(worst, (matrix * v - es.values[k] * v).norm());
  }
  return worst;
}

double zero_threshold(const ComplexVector& eigenvalues) {
  double radius = 0.0;
  for (const auto& v : eigenvalues) radius = std::max(radius, std::abs(v));
  return 1e-9 * radius;
}

ComplexMatrix expm(const ComplexMatrix& m) {
  return m.exp();
}

Propagator::Propagator(ComplexMatrix generator)
    : generator_(std::move(generator)) {
  const Eigen::Index n = generator_.rows();
  stationary_ = ComplexMatrix::Zero(n, n);

  ComplexVector values;
  try {
    spectral_ = eig(generator_);
    values = spectral_->values;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonDiagonalizable) throw;
    spectral_.reset();
    values = eigenvalues(generator_);
  }

  if (values.size() > 0 &&
      values[0].real() > tol::kEigResidual * scale_of(generator_)) {
    throw Error(ErrorKind::NonFinite,
                "generator has a growing mode; exponential would overflow");
  }

  const double threshold = zero_threshold(values);
  for (const auto& v : values) {
    if (std::abs(v.real()) <= threshold) ++stationary_dim_;
  }
  if (stationary_dim_ == 0) return;

  if (spectral_) {
    const auto& vecs = spectral_->vectors;
    const ComplexMatrix inverse_vectors = vecs.inverse();
    for (Eigen::Index k = 0; k < stationary_dim_; ++k) {
      stationary_ += vecs.col(k) * inverse_vectors.row(k);
    }
    return;
  }

  // Defective generator: the stationary projector is the long-time limit of
  // the exponential, provided every non-decaying eigenvalue is a true zero.
  double slowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (k < stationary_dim_) {
      if (std::abs(values[k].imag()) > threshold) {
        throw Error(ErrorKind::Unsupported,
                    "defective generator with oscillating stationary modes");
      }
      continue;
    }
    slowest = std::min(slowest, std::abs(values[k].real()));
  }
  // exp(-slowest * horizon) is far below double resolution; the factor covers
  // polynomial growth from Jordan blocks.
  const double horizon = std::isfinite(slowest) ? 60.0 / slowest : 0.0;
  stationary_ = expm(generator_ * horizon);
}

ComplexVector Propagator::apply(const ComplexVector& state, double t) const {
  if (t < 0.0) {
    throw Error(ErrorKind::InvalidParams, "propagation time must be >= 0");
  }
  if (t == 0.0) return state;
  ComplexVector out = expm(generator_ * t) * state;
  if (!out.allFinite()) {
    throw Error(ErrorKind::NonFinite, "propagated state is not finite");
  }
  return out;
}

ComplexMatrix Propagator::matrix(double t) const {
  if (t < 0.0) {
    throw Error(ErrorKind::InvalidParams, "propagation time must be >= 0");
  }
  if (t == 0.0) return ComplexMatrix::Identity(generator_.rows(), generator_.cols());
  return expm(generator_ * t);
}

ComplexVector propagate(const ComplexMatrix& generator,
                        const ComplexVector& state, double t) {
  return Propagator(generator).apply(state, t);
}

}  // namespace cascade
