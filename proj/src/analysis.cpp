#include "cascade/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cascade {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::size_t tag_index(CycleTag tag) { return static_cast<std::size_t>(tag); }
}  // namespace

BellDecomposition bell_decompose(const StateVector& s) {
  return {
      kInvSqrt2 * (s.c00() + s.c11()),
      kInvSqrt2 * (s.c00() - s.c11()),
      kInvSqrt2 * (s.c01() + s.c10()),
      kInvSqrt2 * (s.c01() - s.c10()),
  };
}

StateVector reconstruct(const BellDecomposition& bell) {
  const cplx c11 = kInvSqrt2 * (bell.a - bell.b);
  const cplx c00 = kInvSqrt2 * (bell.a + bell.b);
  const cplx c10 = kInvSqrt2 * (bell.c - bell.d);
  const cplx c01 = kInvSqrt2 * (bell.c + bell.d);
  return {c11, c10, c01, c00};
}

CorrelatedSplit correlated_projection(const StateVector& s) {
  return {
      StateVector(s.c11(), 0.0, 0.0, s.c00()),
      StateVector(0.0, s.c10(), s.c01(), 0.0),
      {s.c00(), s.c11()},
      {s.c01(), s.c10()},
  };
}

double sigmazz(const StateVector& state) {
  const double n = state.norm2();
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidState, "zero state");
  const double plus = std::norm(state.c11()) + std::norm(state.c00());
  const double minus = std::norm(state.c10()) + std::norm(state.c01());
  return (plus - minus) / n;
}

int plane_of(const StateVector& state, double tolerance) {
  const double z = sigmazz(state);
  if (z >= 1.0 - tolerance) return 1;
  if (z <= -1.0 + tolerance) return -1;
  return 0;
}

Eigen::Matrix2cd reduced_density(const StateVector& state) {
  const StateVector s = state.normalized();
  // Rows: qubit 1 in (|1>, |0>); columns: qubit 2 in (|1>, |0>).
  Eigen::Matrix2cd amps;
  amps << s.c11(), s.c10(), s.c01(), s.c00();
  return amps * amps.adjoint();
}

double entanglement_entropy(const StateVector& state) {
  const Eigen::Matrix2cd rho = reduced_density(state);
  const double half_trace = 0.5 * rho.trace().real();
  const double det = (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
  const double gap = std::sqrt(std::max(0.0, half_trace * half_trace - det));
  double entropy = 0.0;
  for (double p : {half_trace + gap, half_trace - gap}) {
    p = std::clamp(p, 0.0, 1.0);
    if (p > 1e-15) entropy -= p * std::log2(p);
  }
  return std::clamp(entropy, 0.0, 1.0);
}

JumpOdds jump_probability_oracle(const StateVector& state, const SystemParams& params) {
  if (!params.perfect_coupling()) {
    throw Error(ErrorKind::Unsupported,
                "analytic jump probabilities require perfect coupling (epsilon = 1)");
  }
  if (plane_of(state, 1e-12) == 0) {
    throw Error(ErrorKind::InvalidState,
                "analytic jump probabilities need a state in a single correlated plane");
  }
  const StateVector s = state.normalized();
  double p_dark = 0.0;
  for (const auto& pair : nojump_eigensystem(params)) {
    if (pair.eigenvalue != 0.0) continue;
    // Zero-eigenvalue states are orthogonal to every other eigenvector in
    // their plane, so the dark weight is a plain overlap.
    p_dark += std::norm(pair.state.normalized().amplitudes().dot(s.amplitudes()));
  }
  p_dark = std::min(p_dark, 1.0);
  return {p_dark, 1.0 - p_dark};
}

ClassCounts count_classes(const std::vector<TrajectoryRecord>& records) {
  ClassCounts counts{};
  for (const auto& rec : records) ++counts[tag_index(rec.terminal.tag)];
  return counts;
}

namespace {

const StateVector* sample_at(const TrajectoryRecord& rec, double t, std::size_t& cursor) {
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  while (cursor < rec.samples.size() && rec.samples[cursor].time < t - tol) ++cursor;
  if (cursor < rec.samples.size() && std::abs(rec.samples[cursor].time - t) <= tol) {
    return &rec.samples[cursor].state;
  }
  return nullptr;
}

}  // namespace

EnsembleReport ensemble_average(const std::vector<TrajectoryRecord>& records,
                                const std::vector<double>& times) {
  if (records.empty()) {
    throw Error(ErrorKind::EmptyClass, "ensemble average of zero records");
  }
  for (const auto& rec : records) {
    if (!(rec.params == records.front().params) || !(rec.initial == records.front().initial)) {
      throw Error(ErrorKind::InvalidParams,
                  "ensemble records must share parameters and initial state");
    }
  }

  const std::size_t nt = times.size();
  const auto n = static_cast<double>(records.size());
  std::vector<Matrix4> rho(nt, Matrix4::Zero());
  std::vector<double> sum(nt, 0.0), sum_sq(nt, 0.0);

  for (const auto& rec : records) {
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < nt; ++k) {
      const StateVector* s = sample_at(rec, times[k], cursor);
      if (s == nullptr) {
        throw Error(ErrorKind::GridMismatch,
                    "record seeded " + std::to_string(rec.seed) +
                        " has no sample at t = " + std::to_string(times[k]));
      }
      const Vector4 v = s->normalized().amplitudes();
      rho[k] += v * v.adjoint();
      const double z = sigmazz(*s);
      sum[k] += z;
      sum_sq[k] += z * z;
    }
  }

  EnsembleReport rep;
  rep.times = times;
  rep.n_trajectories = records.size();
  rep.class_counts = count_classes(records);
  for (std::size_t k = 0; k < nt; ++k) {
    const double mean = sum[k] / n;
    const double var = records.size() > 1
                           ? std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1.0))
                           : 0.0;
    rep.mean_sigmazz.push_back(mean);
    rep.se_sigmazz.push_back(std::sqrt(var / n));
    rep.mean_density.push_back(DensityMatrix(Matrix4(rho[k] / n)));
  }
  return rep;
}

DensityMatrix cycle_mixture(const std::vector<TrajectoryRecord>& records, CycleTag tag) {
  if (tag != CycleTag::CycleSymmetric && tag != CycleTag::CycleAntisymmetric) {
    throw Error(ErrorKind::InvalidParams, "cycle mixtures exist only for cycle classes");
  }
  Matrix4 total = Matrix4::Zero();
  std::size_t used = 0;
  for (const auto& rec : records) {
    if (rec.terminal.tag != tag) continue;
    const double burn_in = kMixtureBurnIn * rec.t_end;
    Matrix4 acc = Matrix4::Zero();
    std::size_t count = 0;
    for (const auto& sample : rec.samples) {
      if (sample.time < burn_in) continue;
      const Vector4 v = sample.state.normalized().amplitudes();
      acc += v * v.adjoint();
      ++count;
    }
    if (count == 0) {
      const Vector4 v = rec.final_state.normalized().amplitudes();
      acc = v * v.adjoint();
      count = 1;
    }
    total += acc / static_cast<double>(count);
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorKind::EmptyClass,
                "no records classified as " + std::string(to_string(tag)));
  }
  return DensityMatrix(Matrix4(total / static_cast<double>(used)));
}

Matrix4 expected_cycle_mixture(CycleTag tag) {
  const bool symmetric = tag == CycleTag::CycleSymmetric;
  if (!symmetric && tag != CycleTag::CycleAntisymmetric) {
    throw Error(ErrorKind::InvalidParams, "cycle mixtures exist only for cycle classes");
  }
  const Vector4 phi = (symmetric ? basis::phi_plus() : basis::phi_minus()).amplitudes();
  const Vector4 psi = (symmetric ? basis::psi_plus() : basis::psi_minus()).amplitudes();
  return 0.5 * (phi * phi.adjoint() + psi * psi.adjoint());
}

double click_rate(const TrajectoryRecord& record, int detector) {
  if (!(record.t_end > 0.0)) return 0.0;
  return static_cast<double>(record.clicks(detector)) / record.t_end;
}

std::vector<double> uniform_grid(double t_max, std::size_t intervals) {
  if (intervals == 0) return {0.0};
  std::vector<double> out;
  out.reserve(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    out.push_back(t_max * static_cast<double>(k) / static_cast<double>(intervals));
  }
  return out;
}

}  // namespace cascade
