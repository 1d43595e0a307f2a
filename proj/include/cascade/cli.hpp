#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cascade/model.hpp"

namespace cascade::cli {

enum class Command { Steady, Spectrum, Single, Ensemble, Portrait, Compare };

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericError = 3,
  kIoError = 4,
};

struct Unscaled {
  double beta_r;
  double beta_s;
  double kappa;
};

struct RunConfig {
  Command command = Command::Single;
  double r = 0.5;
  double epsilon = 1.0;
  std::optional<Unscaled> unscaled;
  std::string initial = "00";
  std::vector<double> r_grid;  // spectrum sweeps
  double t_max = 20.0;
  std::size_t max_jumps = 10000;
  std::size_t n_traj = 1000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  std::set<std::string> formats = {"json", "csv", "svg"};
  double sample_rate = 200.0;
  std::size_t grid_points = 50;
  unsigned threads = 0;
};

/// Environment variable consulted for the default output directory.
inline constexpr const char* kOutDirEnv = "CASCADE_OUT_DIR";

/// "00", "01", "10", "11", "bell:phi+", "bell:phi-", "bell:psi+",
/// "bell:psi-", or "amp:" followed by four comma-separated amplitudes in
/// canonical order, each "re" or "re:im". The result is normalized.
StateVector parse_initial(const std::string& spec);

/// "start:stop:step", stop included when hit within rounding.
std::vector<double> parse_grid(const std::string& spec);

/// Throws Error(Config) on bad arguments. Returns nullopt when help was shown.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Executes the command, writing artifacts under config.out_dir and a short
/// summary to `out`. Errors propagate as cascade::Error.
void run(const RunConfig& config, std::ostream& out);

int exit_code_for(const std::exception& e);

/// Full entry point: parse, run, map failures to exit codes and a one-line
/// JSON error object on `err`.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cascade::cli
