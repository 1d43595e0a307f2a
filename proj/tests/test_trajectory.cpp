#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cascade/analysis.hpp"
#include "cascade/trajectory.hpp"
#include "support.hpp"

using namespace cascade;
using testing::error_kind;

namespace {

TrajectoryOptions opts(double t_max, double sample_rate = 0.0) {
  TrajectoryOptions o;
  o.t_max = t_max;
  o.sample_rate = sample_rate;
  return o;
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("rng is reproducible and strictly inside the unit interval") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("waiting time from an antisymmetric Bell state at resonance") {
  const ConditionalDynamics dyn(SystemParams(1.0, 1.0));
  // Norm squared decays as exp(-8 t).
  const WaitingTime w = waiting_time_for(basis::psi_minus(), dyn, 0.5);
  REQUIRE(std::holds_alternative<JumpAt>(w));
  CHECK(std::get<JumpAt>(w).time == doctest::Approx(std::log(2.0) / 8.0).epsilon(1e-10));
  for (double u : {0.9, 0.1, 1e-6}) {
    const double t = std::get<JumpAt>(waiting_time_for(basis::psi_minus(), dyn, u)).time;
    // Bisection resolves the norm to 1e-12, i.e. the time to 1e-12 / (8 u).
    CHECK(std::abs(t + std::log(u) / 8.0) <= 1e-12 / (8.0 * u) + 1e-14);
  }
}

TEST_CASE("dark outcome when the variate falls below the dark weight") {
  const ConditionalDynamics dyn(SystemParams(0.5, 1.0));
  CHECK(dyn.dark_probability(basis::ket00()) == doctest::Approx(0.8));
  CHECK(dyn.dark_probability(basis::ket11()) == doctest::Approx(0.2));
  CHECK(dyn.dark_probability(basis::ket10()) < 1e-12);
  CHECK(std::holds_alternative<Dark>(waiting_time_for(basis::ket00(), dyn, 0.79)));
  const WaitingTime w = waiting_time_for(basis::ket00(), dyn, 0.81);
  REQUIRE(std::holds_alternative<JumpAt>(w));
  // At the returned instant the survival equals the variate.
  const double n = dyn.evolve(basis::ket00(), std::get<JumpAt>(w).time).norm2();
  CHECK(n == doctest::Approx(0.81).epsilon(1e-10));
}

TEST_CASE("dark probability at resonance") {
  const ConditionalDynamics dyn(SystemParams(1.0, 1.0));
  CHECK(dyn.dark_probability(basis::ket00()) == doctest::Approx(0.5));
  CHECK(dyn.dark_probability(basis::ket10()) == doctest::Approx(0.5));
  CHECK(dyn.dark_probability(basis::phi_minus()) < 1e-12);
  CHECK(fidelity(dyn.dark_component(basis::ket00()), basis::phi_plus()) == doctest::Approx(1.0));
  CHECK(fidelity(dyn.dark_component(basis::ket01()), basis::psi_plus()) == doctest::Approx(1.0));
}

TEST_CASE("channel probabilities at resonance with lossy coupling") {
  const auto ops = build_operators(SystemParams(1.0, 0.5));
  // Ratio of |lambda|^2/2 to 2(1 - eps) for each Bell pair.
  CHECK(detector1_probability(basis::phi_minus(), ops) ==
        doctest::Approx(0.8535533905932737).epsilon(1e-12));
  CHECK(detector1_probability(basis::phi_plus(), ops) ==
        doctest::Approx(0.14644660940672619).epsilon(1e-12));
  CHECK(channel_for(basis::phi_minus(), ops, 0.85) == 1);
  CHECK(channel_for(basis::phi_minus(), ops, 0.86) == 2);

  const auto perfect = build_operators(SystemParams(0.5, 1.0));
  CHECK(detector1_probability(basis::ket00(), perfect) == 1.0);
  const auto none = build_operators(SystemParams(1.0, 1.0));
  CHECK(error_kind([&] { detector1_probability(basis::phi_plus(), none); }) == ErrorKind::ZeroRate);
}

TEST_CASE("jumps swap planes and follow the printed collapse rules") {
  const auto ops = build_operators(SystemParams(1.0, 1.0));
  CHECK(fidelity(apply_jump(basis::ket00(), 1, ops), basis::psi_minus()) == doctest::Approx(1.0));
  CHECK(fidelity(apply_jump(basis::ket10(), 1, ops), basis::phi_minus()) == doctest::Approx(1.0));
  // sign{c11 - c00}: |00> has c11 - c00 < 0, so the image is -Psi-.
  const StateVector img = apply_jump(basis::ket00(), 1, ops).normalized();
  CHECK((img.amplitudes() + basis::psi_minus().amplitudes()).norm() < 1e-14);
  CHECK(error_kind([&] { apply_jump(basis::phi_plus(), 1, ops); }) == ErrorKind::AnnihilatedState);
  CHECK(error_kind([&] { apply_jump(basis::ket00(), 3, ops); }) == ErrorKind::InvalidParams);
}

TEST_CASE("identical seeds give identical records") {
  const SystemParams p(1.0, 0.5);
  const auto a = run_trajectory(basis::ket00(), p, opts(20.0, 20.0), 99);
  const auto b = run_trajectory(basis::ket00(), p, opts(20.0, 20.0), 99);
  const auto c = run_trajectory(basis::ket00(), p, opts(20.0, 20.0), 100);
  CHECK(a == b);
  CHECK_FALSE(a.events == c.events);
}

TEST_CASE("initial state must be normalized and horizon positive") {
  const SystemParams p(0.5, 1.0);
  CHECK(error_kind([&] { run_trajectory(StateVector(1, 0, 0, 1), p, opts(1.0), 1); }) ==
        ErrorKind::InvalidState);
  CHECK(error_kind([&] { run_trajectory(basis::ket00(), p, opts(0.0), 1); }) ==
        ErrorKind::InvalidParams);
}

TEST_CASE("samples cover the grid and stay in one plane between clicks") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto rec = run_trajectory(basis::ket10(), SystemParams(0.5, 1.0), opts(10.0, 50.0), seed);
    REQUIRE(rec.samples.size() == 501);
    CHECK(rec.samples.front().time == 0.0);
    CHECK(rec.samples.back().time == doctest::Approx(10.0));
    CHECK(rec.t_end == 10.0);
    std::size_t next_event = 0;
    int plane = -1;
    for (const auto& s : rec.samples) {
      while (next_event < rec.events.size() && rec.events[next_event].time <= s.time) {
        plane = -plane;
        ++next_event;
      }
      CHECK(s.state.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(plane_of(s.state) == plane);
      CHECK(sigmazz(s.state) == doctest::Approx(plane).epsilon(1e-12));
    }
    CHECK(rec.clicks(1) >= 1);
    CHECK(rec.clicks(2) == 0);
  }
}

TEST_CASE("off resonance every record ends dark in the steady state") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto rec = run_trajectory(basis::ket00(), SystemParams(0.5, 1.0), opts(1e3), seed);
    CHECK(rec.termination == Termination::Dark);
    CHECK(rec.events.size() % 2 == 0);
    CHECK(rec.terminal.tag == CycleTag::DarkGeneric);
    CHECK(fidelity(rec.final_state, StateVector(0.5, 0, 0, 1)) > 1 - 1e-9);
  }
}

TEST_CASE("jump budget and time limit terminations") {
  const SystemParams p(1.0, 1.0);
  // Phi- never reaches a dark state.
  const auto budget = run_trajectory(basis::phi_minus(), p, [] {
    TrajectoryOptions o;
    o.t_max = 1e3;
    o.max_jumps = 25;
    o.sample_rate = 0.0;
    return o;
  }(), 5);
  CHECK(budget.termination == Termination::JumpBudget);
  CHECK(budget.events.size() == 25);
  CHECK(budget.t_end == budget.events.back().time);

  const auto limited = run_trajectory(basis::phi_minus(), p, opts(3.0), 5);
  CHECK(limited.termination == Termination::TimeLimit);
  CHECK(limited.t_end == 3.0);
  CHECK(std::all_of(limited.events.begin(), limited.events.end(),
                    [](const ClickEvent& e) { return e.time <= 3.0; }));
  CHECK(limited.terminal.tag == CycleTag::CycleAntisymmetric);
}

TEST_CASE("resonant cycles alternate between Psi- and Phi-") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto rec = run_trajectory(basis::ket00(), SystemParams(1.0, 1.0), opts(5.0, 20.0), seed);
    if (rec.termination == Termination::Dark) {
      CHECK(rec.events.empty());
      CHECK(rec.terminal.tag == CycleTag::DarkPhiPlus);
      continue;
    }
    for (const auto& s : rec.samples) {
      if (s.time < rec.events.front().time) continue;
      const double f = std::max(fidelity(s.state, basis::psi_minus()),
                                fidelity(s.state, basis::phi_minus()));
      CHECK(f >= 1 - 1e-9);
    }
  }
}

TEST_CASE("antisymmetric lock-in is not undone") {
  // Once the antisymmetric weight is within 1e-6 of one it should stay
  // within 1e-4 for the rest of the record.
  std::size_t locked = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const auto rec = run_trajectory(basis::ket00(), SystemParams(1.0, 0.5), opts(30.0, 10.0), seed);
    bool in_lock = false;
    for (const auto& s : rec.samples) {
      const double w = bell_decompose(s.state).antisymmetric_weight();
      if (in_lock) CHECK(w >= 1 - 1e-4);
      if (w >= 1 - 1e-6) in_lock = true;
    }
    locked += in_lock ? 1 : 0;
  }
  CHECK(locked > 0);
}

TEST_CASE("imperfect coupling at resonance settles into one of two cycles") {
  ClassCounts counts{};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto rec = run_trajectory(basis::ket00(), SystemParams(1.0, 0.5), opts(50.0), seed);
    ++counts[static_cast<std::size_t>(rec.terminal.tag)];
  }
  CHECK(counts[static_cast<std::size_t>(CycleTag::CycleAntisymmetric)] > 0);
  CHECK(counts[static_cast<std::size_t>(CycleTag::CycleSymmetric)] > 0);
  CHECK(counts[static_cast<std::size_t>(CycleTag::Undecided)] == 0);
}

TEST_CASE("ensemble output does not depend on the worker count") {
  TrajectoryOptions o = opts(8.0);
  o.sample_times = uniform_grid(8.0, 16);
  const auto one = run_ensemble(basis::ket00(), SystemParams(1.0, 0.5), o, 7, 40, 1);
  const auto four = run_ensemble(basis::ket00(), SystemParams(1.0, 0.5), o, 7, 40, 4);
  CHECK(one == four);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].seed == derive_seed(7, i));
}

TEST_CASE("first-click waiting times are exponential for an unstable eigenstate") {
  // From Psi- at r=1 the survival is exp(-8 t); compare empirical quantiles.
  const ConditionalDynamics dyn(SystemParams(1.0, 1.0));
  Rng rng(2024);
  std::vector<double> t;
  for (int k = 0; k < 4000; ++k) t.push_back(std::get<JumpAt>(sample_waiting_time(basis::psi_minus(), dyn, rng)).time);
  std::sort(t.begin(), t.end());
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double cdf = 1 - std::exp(-8 * t[i]);
    d = std::max({d, std::abs(cdf - double(i) / t.size()), std::abs(cdf - double(i + 1) / t.size())});
  }
  CHECK(d < 1.628 / std::sqrt(double(t.size())));
}

}  // TEST_SUITE
