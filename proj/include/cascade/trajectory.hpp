#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

/// Seedable 64-bit stream. Uniform variates are built from the top 53 bits
/// of a Mersenne Twister so sequences are identical across standard library
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-trajectory seed for member `index` of an ensemble.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct ClickEvent {
  double time;
  int detector;  // 1 or 2

  friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
};

struct StateSample {
  double time;
  StateVector state;  // normalized

  friend bool operator==(const StateSample&, const StateSample&) = default;
};

enum class CycleTag {
  DarkPhiPlus,
  DarkPsiPlus,
  DarkGeneric,
  CycleAntisymmetric,
  CycleSymmetric,
  Undecided,
};

std::string_view to_string(CycleTag tag);
CycleTag cycle_tag_from_string(std::string_view name);
bool is_dark(CycleTag tag);

struct CycleClass {
  CycleTag tag = CycleTag::Undecided;
  double confidence = 0.0;

  friend bool operator==(const CycleClass&, const CycleClass&) = default;
};

enum class Termination {
  Dark,        // no further jump will ever occur
  TimeLimit,   // reached t_max
  JumpBudget,  // max_jumps clicks recorded
};

std::string_view to_string(Termination termination);
Termination termination_from_string(std::string_view name);

struct TrajectoryRecord {
  SystemParams params{0.0, 1.0};
  std::uint64_t seed = 0;
  StateVector initial;
  std::vector<ClickEvent> events;
  std::vector<StateSample> samples;
  CycleClass terminal;
  Termination termination = Termination::TimeLimit;
  double t_end = 0.0;
  StateVector final_state;  // normalized state at t_end

  std::size_t clicks(int detector) const;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Model operators plus the cached spectral data of the no-jump generator.
class ConditionalDynamics {
 public:
  explicit ConditionalDynamics(const SystemParams& params);
  explicit ConditionalDynamics(const ModelOperators& ops);

  const ModelOperators& ops() const { return ops_; }
  const Propagator& no_jump() const { return propagator_; }

  /// exp(-i H_eff t) applied to `state`, unnormalized.
  StateVector evolve(const StateVector& state, double t) const;

  /// lim_{t->inf} |phi(t)|^2 / |phi(0)|^2.
  double dark_probability(const StateVector& state) const;
  /// Component of `state` in the non-decaying subspace (unnormalized).
  StateVector dark_component(const StateVector& state) const;

 private:
  ModelOperators ops_;
  Propagator propagator_;
  Matrix4 dark_projector_;
};

struct Dark {};
struct JumpAt {
  double time;  // measured from the current instant
};
using WaitingTime = std::variant<Dark, JumpAt>;

/// Inverse-CDF draw of the next jump time: u < p_dark means no jump ever;
/// otherwise the time at which the normalized no-jump probability equals u.
WaitingTime sample_waiting_time(const StateVector& state,
                                const ConditionalDynamics& dynamics, Rng& rng);
WaitingTime waiting_time_for(const StateVector& state,
                             const ConditionalDynamics& dynamics, double u);

/// Detector index drawn with probability <C_i^dagger C_i> / sum_j <C_j^dagger C_j>.
int select_channel(const StateVector& state, const ModelOperators& ops, Rng& rng);
int channel_for(const StateVector& state, const ModelOperators& ops, double u);
/// Probability that the jump at `state` is registered by Detector 1.
double detector1_probability(const StateVector& state, const ModelOperators& ops);

/// C_i |phi>, unnormalized.
StateVector apply_jump(const StateVector& state, int detector,
                       const ModelOperators& ops);

struct TrajectoryOptions {
  double t_max = 1e3;
  std::size_t max_jumps = 10000;
  /// Samples per unit time on the grid k / sample_rate; 0 disables sampling.
  double sample_rate = 200.0;
  /// When non-empty, replaces the regular grid (ascending times).
  std::vector<double> sample_times;
};

TrajectoryRecord run_trajectory(const StateVector& initial,
                                const SystemParams& params,
                                const TrajectoryOptions& options,
                                std::uint64_t seed);
TrajectoryRecord run_trajectory(const StateVector& initial,
                                const ConditionalDynamics& dynamics,
                                const TrajectoryOptions& options,
                                std::uint64_t seed);

/// Bell-pair decision threshold on the dominant (anti)symmetric weight.
inline constexpr double kCycleDecisionThreshold = 1.0 - 1e-9;
/// Fidelity needed to label a dark state as a specific Bell state.
inline constexpr double kDarkBellFidelity = 1.0 - 1e-6;

CycleClass classify_asymptotics(const TrajectoryRecord& record,
                                const ModelOperators& ops);
CycleClass classify_asymptotics(const TrajectoryRecord& record,
                                const ConditionalDynamics& dynamics);

/// Runs `count` independent trajectories; member i is seeded with
/// derive_seed(master_seed, i). Output is ordered by index regardless of the
/// worker count (0 = hardware concurrency).
std::vector<TrajectoryRecord> run_ensemble(const StateVector& initial,
                                           const SystemParams& params,
                                           const TrajectoryOptions& options,
                                           std::uint64_t master_seed,
                                           std::size_t count,
                                           unsigned workers = 0);

}  // namespace cascade
