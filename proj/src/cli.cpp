#include "cascade/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cascade/analysis.hpp"
#include "cascade/io.hpp"
#include "cascade/master.hpp"
#include "cascade/trajectory.hpp"

namespace cascade::cli {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::Config, what);
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    config_error("not a number: '" + text + "'");
  }
  if (used != text.size()) config_error("not a number: '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Steady: return "steady";
    case Command::Spectrum: return "spectrum";
    case Command::Single: return "single";
    case Command::Ensemble: return "ensemble";
    case Command::Portrait: return "portrait";
    case Command::Compare: return "compare";
  }
  return "?";
}

}  // namespace

StateVector parse_initial(const std::string& spec) {
  std::string s = spec;
  // Accept the typographic minus as well as '-'.
  for (std::size_t pos; (pos = s.find("−")) != std::string::npos;) s.replace(pos, 3, "-");

  if (s == "11") return basis::ket11();
  if (s == "10") return basis::ket10();
  if (s == "01") return basis::ket01();
  if (s == "00") return basis::ket00();
  if (s == "bell:phi+") return basis::phi_plus();
  if (s == "bell:phi-") return basis::phi_minus();
  if (s == "bell:psi+") return basis::psi_plus();
  if (s == "bell:psi-") return basis::psi_minus();
  if (s.rfind("amp:", 0) == 0) {
    const auto parts = split(s.substr(4), ',');
    if (parts.size() != 4) config_error("amp: needs four amplitudes (c11,c10,c01,c00)");
    Vector4 v;
    for (int k = 0; k < 4; ++k) {
      const auto ri = split(parts[static_cast<std::size_t>(k)], ':');
      if (ri.empty() || ri.size() > 2) config_error("bad amplitude '" + parts[static_cast<std::size_t>(k)] + "'");
      v[k] = cplx(parse_number(ri[0]), ri.size() == 2 ? parse_number(ri[1]) : 0.0);
    }
    if (!v.allFinite() || !(v.norm() > 0.0)) config_error("initial amplitudes must be finite and nonzero");
    return StateVector(v).normalized();
  }
  config_error("unknown initial state '" + spec + "'");
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) config_error("grid must be start:stop:step");
  const double start = parse_number(parts[0]);
  const double stop = parse_number(parts[1]);
  const double step = parse_number(parts[2]);
  if (!(step > 0.0) || stop < start) config_error("grid needs step > 0 and stop >= start");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(start + step * static_cast<double>(k));
  if (stop - out.back() > 1e-9 * std::max(1.0, std::abs(stop))) out.push_back(stop);
  return out;
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Cascaded two-qubit master-equation and quantum-trajectory toolkit", "cascade"};
  app.require_subcommand(1);

  RunConfig cfg;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    cfg.out_dir = env;
  }
  std::optional<double> r, beta_r, beta_s, kappa, t_max;
  std::optional<std::string> r_grid;
  std::string formats;
  std::optional<std::uint64_t> seed;
  std::string out_dir = cfg.out_dir.string();

  struct Sub {
    Command command;
    const char* help;
  };
  const Sub subs[] = {
      {Command::Steady, "steady-state density matrix of the master equation"},
      {Command::Spectrum, "Liouvillian spectrum and relaxation time over an r grid"},
      {Command::Single, "one quantum trajectory with timeseries and portrait"},
      {Command::Ensemble, "ensemble of trajectories, averages and class histogram"},
      {Command::Portrait, "phase-space portrait of one trajectory"},
      {Command::Compare, "ensemble average against the master-equation solution"},
  };
  std::vector<CLI::App*> handles;
  for (const auto& sub : subs) {
    CLI::App* s = app.add_subcommand(command_name(sub.command), sub.help);
    s->add_option("--r", r, "ratio beta_s/beta_r");
    s->add_option("--epsilon", cfg.epsilon, "inter-cavity coupling efficiency");
    s->add_option("--beta-r", beta_r, "unscaled beta_r (reduced to r)");
    s->add_option("--beta-s", beta_s, "unscaled beta_s (reduced to r)");
    s->add_option("--kappa", kappa, "unscaled cavity decay rate");
    s->add_option("--initial", cfg.initial, "initial state");
    s->add_option("--r-grid", r_grid, "r sweep start:stop:step");
    s->add_option("--t-max", t_max, "time horizon (scaled units)");
    s->add_option("--max-jumps", cfg.max_jumps, "jump budget per trajectory");
    s->add_option("--n-traj", cfg.n_traj, "number of trajectories");
    s->add_option("--seed", seed, "64-bit master seed");
    s->add_option("--out-dir", out_dir, "output directory");
    s->add_option("--formats", formats, "comma-separated subset of json,csv,svg");
    s->add_option("--sample-rate", cfg.sample_rate, "samples per unit time (single/portrait)");
    s->add_option("--grid-points", cfg.grid_points, "report grid points (ensemble/compare)");
    s->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    handles.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    config_error(e.what());
  }

  for (std::size_t k = 0; k < handles.size(); ++k) {
    if (handles[k]->parsed()) {
      cfg.command = subs[k].command;
      if (handles[k]->get_help_ptr() != nullptr && handles[k]->get_help_ptr()->count() > 0) {
        out << handles[k]->help();
        return std::nullopt;
      }
    }
  }

  if (beta_r || beta_s || kappa) {
    if (r) config_error("give either --r or --beta-r/--beta-s, not both");
    if (!beta_r || !beta_s) config_error("--beta-r and --beta-s must be given together");
    cfg.unscaled = Unscaled{*beta_r, *beta_s, kappa.value_or(1.0)};
  } else if (r) {
    cfg.r = *r;
  }
  if (r_grid) cfg.r_grid = parse_grid(*r_grid);
  const bool long_run = cfg.command == Command::Ensemble || cfg.command == Command::Compare;
  cfg.t_max = t_max.value_or(long_run ? 10.0 : 20.0);
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  if (!formats.empty()) {
    cfg.formats.clear();
    for (const auto& f : split(formats, ',')) {
      if (f != "json" && f != "csv" && f != "svg") config_error("unknown format '" + f + "'");
      cfg.formats.insert(f);
    }
  }
  return cfg;
}

namespace {

struct Context {
  const RunConfig& cfg;
  SystemParams params;
  std::ostream& out;

  bool wants(const char* format) const { return cfg.formats.count(format) > 0; }

  void emit(const std::string& name, const std::string& contents) const {
    io::write_file(cfg.out_dir / name, contents);
    out << "wrote " << (cfg.out_dir / name).string() << '\n';
  }

  io::Json header() const {
    io::Json h{{"command", command_name(cfg.command)}, {"params", io::to_json(params)}};
    if (cfg.unscaled) {
      h["reduction"] = io::Json{{"beta_r", cfg.unscaled->beta_r},
                                {"beta_s", cfg.unscaled->beta_s},
                                {"kappa", cfg.unscaled->kappa},
                                {"r", params.r()},
                                {"time_unit", std::sqrt(cfg.unscaled->kappa) / cfg.unscaled->beta_r}};
    }
    return h;
  }
};

SystemParams resolve_params(const RunConfig& cfg) {
  try {
    if (cfg.unscaled) {
      return SystemParams::from_unscaled(cfg.unscaled->beta_r, cfg.unscaled->beta_s,
                                         cfg.unscaled->kappa, cfg.epsilon);
    }
    return SystemParams(cfg.r, cfg.epsilon);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

void validate(const RunConfig& cfg) {
  const bool stochastic = cfg.command == Command::Single || cfg.command == Command::Ensemble ||
                          cfg.command == Command::Portrait || cfg.command == Command::Compare;
  if (stochastic && !cfg.seed) config_error("--seed is required for " + command_name(cfg.command));
  if (!(cfg.t_max > 0.0) || !std::isfinite(cfg.t_max)) config_error("--t-max must be positive");
  if (cfg.n_traj == 0) config_error("--n-traj must be positive");
  if (cfg.max_jumps == 0) config_error("--max-jumps must be positive");
  if (cfg.grid_points < 2) config_error("--grid-points must be at least 2");
  if (!(cfg.sample_rate >= 0.0) || !std::isfinite(cfg.sample_rate)) {
    config_error("--sample-rate must be non-negative");
  }
}

void run_steady(const Context& ctx) {
  io::Json doc = ctx.header();
  try {
    const SteadyState ss = steady_state(ctx.params);
    doc["degenerate"] = false;
    doc["null_space_dim"] = 1;
    doc["rho"] = io::to_json(ss.rho.entries());
    doc["purity"] = ss.rho.purity();
    doc["sigmazz"] = expectation_sigmazz(ss.rho);
    doc["pure_witness"] = ss.pure_witness ? io::to_json(*ss.pure_witness) : io::Json(nullptr);
    ctx.out << "steady state: purity " << ss.rho.purity()
            << ", <sz sz> = " << expectation_sigmazz(ss.rho) << '\n';
  } catch (const DegenerateSteadyStateError& e) {
    doc["degenerate"] = true;
    doc["null_space_dim"] = e.basis().size();
    io::Json basis = io::Json::array();
    for (const auto& m : e.basis()) basis.push_back(io::to_json(m));
    doc["basis"] = std::move(basis);
    ctx.out << "degenerate steady state: null space dimension " << e.basis().size() << '\n';
  }
  if (ctx.wants("json")) ctx.emit("steady.json", doc.dump(2) + "\n");
}

void run_spectrum(const Context& ctx) {
  std::vector<double> grid = ctx.cfg.r_grid;
  if (grid.empty()) grid.push_back(ctx.params.r());
  std::vector<io::SpectrumRow> rows;
  io::Json table = io::Json::array();
  for (double r : grid) {
    SystemParams p = [&] {
      try {
        return SystemParams(r, ctx.params.epsilon());
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
      }
    }();
    rows.push_back({p, relaxation_time(p)});
    const auto& rep = rows.back().report;
    ctx.out << "r=" << r << " tau=" << rep.tau
            << " zero_multiplicity=" << rep.zero_multiplicity << '\n';
    table.push_back(io::Json{{"r", r},
                             {"tau", rep.tau_infinite() ? io::Json("inf") : io::Json(rep.tau)},
                             {"lambda2", {rep.lambda2.real(), rep.lambda2.imag()}},
                             {"zero_multiplicity", rep.zero_multiplicity}});
  }
  if (ctx.wants("csv")) ctx.emit("spectrum.csv", io::spectrum_csv(rows));
  if (ctx.wants("json")) {
    io::Json doc = ctx.header();
    doc["rows"] = std::move(table);
    ctx.emit("spectrum.json", doc.dump(2) + "\n");
  }
}

TrajectoryRecord single_record(const Context& ctx, const ConditionalDynamics& dyn) {
  TrajectoryOptions opts;
  opts.t_max = ctx.cfg.t_max;
  opts.max_jumps = ctx.cfg.max_jumps;
  opts.sample_rate = ctx.cfg.sample_rate;
  return run_trajectory(parse_initial(ctx.cfg.initial), dyn, opts, *ctx.cfg.seed);
}

std::string portrait_title(const Context& ctx) {
  std::ostringstream os;
  os << "r = " << ctx.params.r() << ", epsilon = " << ctx.params.epsilon()
     << ", initial " << ctx.cfg.initial << ", seed " << *ctx.cfg.seed;
  return os.str();
}

void run_single(const Context& ctx, bool portrait_only) {
  const ConditionalDynamics dyn(ctx.params);
  const TrajectoryRecord rec = single_record(ctx, dyn);
  ctx.out << "clicks: detector1=" << rec.clicks(1) << " detector2=" << rec.clicks(2)
          << ", terminal " << to_string(rec.terminal.tag) << '\n';
  if (ctx.wants("json")) ctx.emit("trajectory.json", io::record_document(rec));
  const io::Portrait portrait = io::build_portrait(rec, dyn);
  if (ctx.wants("csv")) {
    if (portrait_only) {
      ctx.emit("portrait.csv", io::portrait_csv(portrait));
    } else {
      ctx.emit("timeseries.csv", io::timeseries_csv(rec));
    }
  }
  if (ctx.wants("svg")) ctx.emit("portrait.svg", io::portrait_svg(portrait, portrait_title(ctx)));
}

std::vector<TrajectoryRecord> ensemble_records(const Context& ctx,
                                               const std::vector<double>& grid) {
  TrajectoryOptions opts;
  opts.t_max = ctx.cfg.t_max;
  opts.max_jumps = ctx.cfg.max_jumps;
  opts.sample_times = grid;
  return run_ensemble(parse_initial(ctx.cfg.initial), ctx.params, opts, *ctx.cfg.seed,
                      ctx.cfg.n_traj, ctx.cfg.threads);
}

void print_classes(const Context& ctx, const ClassCounts& counts) {
  for (std::size_t k = 0; k < kCycleTagCount; ++k) {
    ctx.out << std::setw(20) << std::left << to_string(static_cast<CycleTag>(k)) << counts[k]
            << '\n';
  }
}

void run_ensemble_command(const Context& ctx) {
  const auto grid = uniform_grid(ctx.cfg.t_max, ctx.cfg.grid_points - 1);
  const auto records = ensemble_records(ctx, grid);
  const EnsembleReport rep = ensemble_average(records, grid);
  print_classes(ctx, rep.class_counts);
  if (ctx.wants("json")) {
    ctx.emit("ensemble.ndjson", io::records_ndjson(records));
    io::Json doc = ctx.header();
    doc["initial"] = ctx.cfg.initial;
    doc["seed"] = *ctx.cfg.seed;
    doc["report"] = io::to_json(rep);
    ctx.emit("ensemble_report.json", doc.dump(2) + "\n");
  }
  if (ctx.wants("csv")) ctx.emit("ensemble_mean.csv", io::ensemble_csv(rep));
}

void run_compare(const Context& ctx) {
  const auto grid = uniform_grid(ctx.cfg.t_max, ctx.cfg.grid_points - 1);
  const auto records = ensemble_records(ctx, grid);
  const EnsembleReport rep = ensemble_average(records, grid);
  const auto master = evolve_density_series(
      DensityMatrix::projector(parse_initial(ctx.cfg.initial)), grid, ctx.params);

  std::vector<io::CompareRow> rows;
  double worst = 0.0;
  bool all_ok = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double m = expectation_sigmazz(master[k]);
    const double tolerance = std::max(3.0 * rep.se_sigmazz[k], 0.02);
    rows.push_back({grid[k], rep.mean_sigmazz[k], rep.se_sigmazz[k], m, tolerance});
    worst = std::max(worst, std::abs(rep.mean_sigmazz[k] - m));
    all_ok = all_ok && std::abs(rep.mean_sigmazz[k] - m) <= tolerance;
  }
  ctx.out << "max |ensemble - master| = " << worst
          << (all_ok ? " (within tolerance)" : " (OUTSIDE tolerance)") << '\n';
  if (ctx.wants("csv")) ctx.emit("compare.csv", io::compare_csv(rows));
  if (ctx.wants("json")) {
    io::Json doc = ctx.header();
    doc["initial"] = ctx.cfg.initial;
    doc["seed"] = *ctx.cfg.seed;
    doc["n_trajectories"] = ctx.cfg.n_traj;
    doc["max_residual"] = worst;
    doc["all_within_tolerance"] = all_ok;
    ctx.emit("compare.json", doc.dump(2) + "\n");
  }
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const SystemParams params = resolve_params(cfg);
  parse_initial(cfg.initial);  // config errors before any work

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());

  if (cfg.unscaled) {
    out << "reduced beta_r=" << cfg.unscaled->beta_r << " beta_s=" << cfg.unscaled->beta_s
        << " kappa=" << cfg.unscaled->kappa << " -> r=" << params.r()
        << ", time unit sqrt(kappa)/beta_r\n";
  }

  const Context ctx{cfg, params, out};
  switch (cfg.command) {
    case Command::Steady: run_steady(ctx); break;
    case Command::Spectrum: run_spectrum(ctx); break;
    case Command::Single: run_single(ctx, false); break;
    case Command::Ensemble: run_ensemble_command(ctx); break;
    case Command::Portrait: run_single(ctx, true); break;
    case Command::Compare: run_compare(ctx); break;
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::Config:
      case ErrorKind::InvalidParams: return kConfigError;
      case ErrorKind::Io: return kIoError;
      default: return kNumericError;
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kIoError;
  return kNumericError;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kOk;
    run(*cfg, out);
    return kOk;
  } catch (const std::exception& e) {
    const auto* typed = dynamic_cast<const Error*>(&e);
    io::Json j{{"error", typed ? std::string(to_string(typed->kind())) : std::string("Internal")},
               {"message", e.what()}};
    err << j.dump() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace cascade::cli
