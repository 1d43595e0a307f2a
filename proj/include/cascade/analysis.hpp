#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cascade/master.hpp"
#include "cascade/model.hpp"
#include "cascade/trajectory.hpp"

namespace cascade {

/// Coefficients on (Phi+, Phi-, Psi+, Psi-).
struct BellDecomposition {
  cplx a, b, c, d;

  double symmetric_weight() const { return std::norm(a) + std::norm(c); }
  double antisymmetric_weight() const { return std::norm(b) + std::norm(d); }
  std::array<double, 4> weights() const {
    return {std::norm(a), std::norm(b), std::norm(c), std::norm(d)};
  }
};

BellDecomposition bell_decompose(const StateVector& state);
StateVector reconstruct(const BellDecomposition& bell);

struct CorrelatedSplit {
  StateVector plus;   // component in E+ = span{|00>, |11>}
  StateVector minus;  // component in E- = span{|10>, |01>}
  std::array<cplx, 2> plus_plane;   // (c00, c11)
  std::array<cplx, 2> minus_plane;  // (c01, c10)
};

CorrelatedSplit correlated_projection(const StateVector& state);

/// <sigma_1z sigma_2z> of the normalized state.
double sigmazz(const StateVector& state);

/// +1 for E+, -1 for E-, 0 when the state has weight in both planes beyond
/// `tolerance` (relative to its squared norm).
int plane_of(const StateVector& state, double tolerance = 1e-9);

/// Reduced density matrix of qubit 1 for the normalized state.
Eigen::Matrix2cd reduced_density(const StateVector& state);

/// Entropy of entanglement in bits, -Tr(rho_A log2 rho_A).
double entanglement_entropy(const StateVector& state);

struct JumpOdds {
  double p_dark;
  double p_jump;
};

/// Closed-form dark/jump probabilities from the analytic no-jump eigensystem.
/// Requires epsilon = 1 (Unsupported otherwise) and a state confined to one
/// correlated plane (InvalidState otherwise).
JumpOdds jump_probability_oracle(const StateVector& state, const SystemParams& params);

inline constexpr std::size_t kCycleTagCount = 6;
using ClassCounts = std::array<std::size_t, kCycleTagCount>;

ClassCounts count_classes(const std::vector<TrajectoryRecord>& records);

struct EnsembleReport {
  std::vector<double> times;
  std::vector<double> mean_sigmazz;
  std::vector<double> se_sigmazz;
  std::vector<DensityMatrix> mean_density;
  std::size_t n_trajectories = 0;
  ClassCounts class_counts{};
};

/// Per-time averages of |phi><phi| and <sigma_zz> over the records. Each
/// record must carry a sample at every grid time (GridMismatch otherwise).
EnsembleReport ensemble_average(const std::vector<TrajectoryRecord>& records,
                                const std::vector<double>& times);

/// Fraction of each record discarded before time-averaging in cycle_mixture.
inline constexpr double kMixtureBurnIn = 0.2;

/// Late-time average state of the records classified as `tag`.
DensityMatrix cycle_mixture(const std::vector<TrajectoryRecord>& records, CycleTag tag);

/// (|Phi+-><Phi+-| + |Psi+-><Psi+-|) / 2 for the symmetric (+) or
/// antisymmetric (-) cycle.
Matrix4 expected_cycle_mixture(CycleTag tag);

/// Clicks of `detector` per unit time over the whole record.
double click_rate(const TrajectoryRecord& record, int detector);

/// n+1 evenly spaced times on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t intervals);

}  // namespace cascade
