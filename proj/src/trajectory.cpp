#include "cascade/trajectory.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cascade/analysis.hpp"

namespace cascade {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(~index));
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() {
  // (k + 0.5) / 2^53 lies strictly inside (0, 1).
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

std::string_view to_string(CycleTag tag) {
  switch (tag) {
    case CycleTag::DarkPhiPlus: return "DarkPhiPlus";
    case CycleTag::DarkPsiPlus: return "DarkPsiPlus";
    case CycleTag::DarkGeneric: return "DarkGeneric";
    case CycleTag::CycleAntisymmetric: return "CycleAntisymmetric";
    case CycleTag::CycleSymmetric: return "CycleSymmetric";
    case CycleTag::Undecided: return "Undecided";
  }
  return "Undecided";
}

CycleTag cycle_tag_from_string(std::string_view name) {
  for (auto tag : {CycleTag::DarkPhiPlus, CycleTag::DarkPsiPlus,
                   CycleTag::DarkGeneric, CycleTag::CycleAntisymmetric,
                   CycleTag::CycleSymmetric, CycleTag::Undecided}) {
    if (to_string(tag) == name) return tag;
  }
  throw Error(ErrorKind::InvalidState, "unknown cycle class " + std::string(name));
}

bool is_dark(CycleTag tag) {
  return tag == CycleTag::DarkPhiPlus || tag == CycleTag::DarkPsiPlus ||
         tag == CycleTag::DarkGeneric;
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Dark: return "dark";
    case Termination::TimeLimit: return "time_limit";
    case Termination::JumpBudget: return "jump_budget";
  }
  return "time_limit";
}

Termination termination_from_string(std::string_view name) {
  for (auto t : {Termination::Dark, Termination::TimeLimit, Termination::JumpBudget}) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorKind::InvalidState, "unknown termination " + std::string(name));
}

std::size_t TrajectoryRecord::clicks(int detector) const {
  std::size_t n = 0;
  for (const auto& e : events) n += e.detector == detector ? 1 : 0;
  return n;
}

ConditionalDynamics::ConditionalDynamics(const SystemParams& params)
    : ConditionalDynamics(build_operators(params)) {}

ConditionalDynamics::ConditionalDynamics(const ModelOperators& ops)
    : ops_(ops),
      propagator_(ComplexMatrix(ops.heff_generator)),
      dark_projector_(propagator_.stationary_projector()) {}

StateVector ConditionalDynamics::evolve(const StateVector& state, double t) const {
  return StateVector(Vector4(propagator_.apply(state.amplitudes(), t)));
}

double ConditionalDynamics::dark_probability(const StateVector& state) const {
  const double n0 = state.norm2();
  if (!(n0 > 0.0)) {
    throw Error(ErrorKind::InvalidState, "zero state has no dark probability");
  }
  return std::min(1.0, (dark_projector_ * state.amplitudes()).squaredNorm() / n0);
}

StateVector ConditionalDynamics::dark_component(const StateVector& state) const {
  return StateVector(Vector4(dark_projector_ * state.amplitudes()));
}

namespace {
constexpr double kNormResolution = 1e-12;
constexpr double kMonotoneSlack = 1e-13;
constexpr double kMaxBracket = 1e12;
}  // namespace

WaitingTime waiting_time_for(const StateVector& state,
                             const ConditionalDynamics& dynamics, double u) {
  const double n0 = state.norm2();
  if (!(n0 > 0.0) || !std::isfinite(n0)) {
    throw Error(ErrorKind::NonFinite, "waiting time requested for a zero or non-finite state");
  }
  const double p_dark = dynamics.dark_probability(state);
  if (u < p_dark) return Dark{};

  const Propagator& prop = dynamics.no_jump();
  auto survival = [&](double t) {
    const double n = prop.apply(state.amplitudes(), t).squaredNorm() / n0;
    if (!std::isfinite(n)) {
      throw Error(ErrorKind::NonFinite, "no-jump norm is not finite");
    }
    return n;
  };

  double lo = 0.0, n_lo = 1.0;
  double hi = 1.0, n_hi = survival(hi);
  while (n_hi > u) {
    if (n_hi > n_lo + kMonotoneSlack) {
      throw Error(ErrorKind::BisectionFailure, "no-jump norm increased in time");
    }
    // The variate sits within rounding of the dark weight: the norm has
    // settled and will never reach it.
    if (n_hi - p_dark <= kNormResolution && n_lo - n_hi <= kNormResolution) return Dark{};
    lo = hi;
    n_lo = n_hi;
    hi *= 2.0;
    if (hi > kMaxBracket) {
      throw Error(ErrorKind::BisectionFailure, "could not bracket the jump time");
    }
    n_hi = survival(hi);
  }

  while (n_lo - n_hi > kNormResolution) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
    const double n_mid = survival(mid);
    if (n_mid > n_lo + kMonotoneSlack || n_mid < n_hi - kMonotoneSlack) {
      throw Error(ErrorKind::BisectionFailure, "no-jump norm is not monotone");
    }
    if (n_mid > u) {
      lo = mid;
      n_lo = n_mid;
    } else {
      hi = mid;
      n_hi = n_mid;
    }
  }
  return JumpAt{0.5 * (lo + hi)};
}

WaitingTime sample_waiting_time(const StateVector& state,
                                const ConditionalDynamics& dynamics, Rng& rng) {
  return waiting_time_for(state, dynamics, rng.uniform());
}

namespace {
double jump_rate(const StateVector& state, const Matrix4& c) {
  return (c * state.amplitudes()).squaredNorm();
}
}  // namespace

double detector1_probability(const StateVector& state, const ModelOperators& ops) {
  const double w1 = jump_rate(state, ops.C1);
  const double w2 = jump_rate(state, ops.C2);
  const double total = w1 + w2;
  if (!(total > 1e-24 * state.norm2())) {
    throw Error(ErrorKind::ZeroRate, "both jump rates vanish for this state");
  }
  return w1 / total;
}

int channel_for(const StateVector& state, const ModelOperators& ops, double u) {
  return u < detector1_probability(state, ops) ? 1 : 2;
}

int select_channel(const StateVector& state, const ModelOperators& ops, Rng& rng) {
  return channel_for(state, ops, rng.uniform());
}

StateVector apply_jump(const StateVector& state, int detector,
                       const ModelOperators& ops) {
  const StateVector out(Vector4(ops.jump(detector) * state.amplitudes()));
  if (!(out.norm() >= 1e-14 * state.norm())) {
    throw Error(ErrorKind::AnnihilatedState,
                "jump operator annihilated the state; channel selection is inconsistent");
  }
  return out;
}

namespace {

class SampleGrid {
 public:
  explicit SampleGrid(const TrajectoryOptions& options) : options_(options) {
    if (!options.sample_times.empty()) {
      count_ = options.sample_times.size();
    } else if (options.sample_rate > 0.0) {
      count_ = static_cast<std::size_t>(std::floor(options.t_max * options.sample_rate + 1e-9)) + 1;
    }
  }

  bool done() const { return next_ >= count_; }
  double time() const {
    return options_.sample_times.empty()
               ? static_cast<double>(next_) / options_.sample_rate
               : options_.sample_times[next_];
  }
  void advance() { ++next_; }

 private:
  const TrajectoryOptions& options_;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
};

// Records normalized samples of the no-jump evolution from `state` (at time
// `start`) for every grid time in [start, stop), or [start, stop] when the
// interval closes the record.
void sample_interval(SampleGrid& grid, const ConditionalDynamics& dyn,
                     const StateVector& state, double start, double stop,
                     bool closed, std::vector<StateSample>& out) {
  while (!grid.done() && (grid.time() < stop || (closed && grid.time() <= stop))) {
    const double t = grid.time();
    if (t >= start) {
      out.push_back({t, dyn.evolve(state, t - start).normalized()});
    }
    grid.advance();
  }
}

}  // namespace

TrajectoryRecord run_trajectory(const StateVector& initial,
                                const SystemParams& params,
                                const TrajectoryOptions& options,
                                std::uint64_t seed) {
  return run_trajectory(initial, ConditionalDynamics(params), options, seed);
}

TrajectoryRecord run_trajectory(const StateVector& initial,
                                const ConditionalDynamics& dynamics,
                                const TrajectoryOptions& options,
                                std::uint64_t seed) {
  if (!(options.t_max > 0.0) || !std::isfinite(options.t_max)) {
    throw Error(ErrorKind::InvalidParams, "t_max must be positive and finite");
  }
  if (std::abs(initial.norm2() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidState, "initial state must be normalized");
  }

  TrajectoryRecord rec;
  rec.params = dynamics.ops().params;
  rec.seed = seed;
  rec.initial = initial;

  Rng rng(seed);
  SampleGrid grid(options);
  const double t_max = options.t_max;
  StateVector phi = initial;
  double t = 0.0;

  while (true) {
    if (rec.events.size() >= options.max_jumps) {
      rec.termination = Termination::JumpBudget;
      rec.t_end = t;
      rec.final_state = phi;
      break;
    }
    const WaitingTime wait = sample_waiting_time(phi, dynamics, rng);
    if (std::holds_alternative<Dark>(wait)) {
      sample_interval(grid, dynamics, phi, t, t_max, true, rec.samples);
      rec.termination = Termination::Dark;
      rec.t_end = t_max;
      rec.final_state = dynamics.evolve(phi, t_max - t).normalized();
      break;
    }

    const double t_jump = t + std::get<JumpAt>(wait).time;
    if (t_jump > t_max) {
      sample_interval(grid, dynamics, phi, t, t_max, true, rec.samples);
      rec.termination = Termination::TimeLimit;
      rec.t_end = t_max;
      rec.final_state = dynamics.evolve(phi, t_max - t).normalized();
      break;
    }

    sample_interval(grid, dynamics, phi, t, t_jump, false, rec.samples);
    const StateVector before = dynamics.evolve(phi, t_jump - t);
    const int detector = select_channel(before, dynamics.ops(), rng);
    phi = apply_jump(before, detector, dynamics.ops()).normalized();
    rec.events.push_back({t_jump, detector});
    t = t_jump;
  }

  rec.terminal = classify_asymptotics(rec, dynamics);
  return rec;
}

CycleClass classify_asymptotics(const TrajectoryRecord& record,
                                const ModelOperators& ops) {
  return classify_asymptotics(record, ConditionalDynamics(ops));
}

CycleClass classify_asymptotics(const TrajectoryRecord& record,
                                const ConditionalDynamics& dynamics) {
  if (record.termination == Termination::Dark) {
    const StateVector dark = dynamics.dark_component(record.final_state);
    if (fidelity(dark, basis::phi_plus()) >= kDarkBellFidelity) {
      return {CycleTag::DarkPhiPlus, 1.0};
    }
    if (fidelity(dark, basis::psi_plus()) >= kDarkBellFidelity) {
      return {CycleTag::DarkPsiPlus, 1.0};
    }
    return {CycleTag::DarkGeneric, 1.0};
  }

  const SystemParams& params = record.params;
  const BellDecomposition bell = bell_decompose(record.final_state.normalized());
  const double symmetric = bell.symmetric_weight();
  const double antisymmetric = bell.antisymmetric_weight();
  const double dominant = std::max(symmetric, antisymmetric);
  if (!params.resonant() || record.events.empty()) {
    return {CycleTag::Undecided, dominant};
  }
  if (antisymmetric >= kCycleDecisionThreshold) {
    return {CycleTag::CycleAntisymmetric, antisymmetric};
  }
  // With perfect coupling the symmetric pair is dark, so it cannot cycle.
  if (symmetric >= kCycleDecisionThreshold && !params.perfect_coupling()) {
    return {CycleTag::CycleSymmetric, symmetric};
  }
  return {CycleTag::Undecided, dominant};
}

std::vector<TrajectoryRecord> run_ensemble(const StateVector& initial,
                                           const SystemParams& params,
                                           const TrajectoryOptions& options,
                                           std::uint64_t master_seed,
                                           std::size_t count, unsigned workers) {
  const ConditionalDynamics dynamics(params);
  std::vector<TrajectoryRecord> out(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = run_trajectory(initial, dynamics, options, derive_seed(master_seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace cascade
