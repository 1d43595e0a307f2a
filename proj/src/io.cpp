#include "cascade/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cascade::io {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

Json complex_array(const Vector4& v, bool imaginary) {
  Json out = Json::array();
  for (int k = 0; k < 4; ++k) out.push_back(imaginary ? v[k].imag() : v[k].real());
  return out;
}

Vector4 vector_from(const Json& re, const Json& im) {
  if (re.size() != 4 || im.size() != 4) {
    throw Error(ErrorKind::InvalidState, "state arrays must have four entries");
  }
  Vector4 v;
  for (int k = 0; k < 4; ++k) {
    v[k] = cplx(re.at(k).get<double>(), im.at(k).get<double>());
  }
  return v;
}

}  // namespace

Json to_json(const SystemParams& params) {
  return Json{{"r", params.r()}, {"epsilon", params.epsilon()}};
}

Json to_json(const StateVector& state) {
  return Json{{"re", complex_array(state.amplitudes(), false)},
              {"im", complex_array(state.amplitudes(), true)}};
}

StateVector state_from_json(const Json& j) {
  return StateVector(vector_from(j.at("re"), j.at("im")));
}

Json to_json(const TrajectoryRecord& rec) {
  Json events = Json::array();
  for (const auto& e : rec.events) {
    events.push_back(Json{{"t", e.time}, {"detector", e.detector}});
  }
  Json samples = Json::array();
  for (const auto& s : rec.samples) {
    samples.push_back(Json{{"t", s.time},
                           {"re", complex_array(s.state.amplitudes(), false)},
                           {"im", complex_array(s.state.amplitudes(), true)}});
  }
  return Json{
      {"params", to_json(rec.params)},
      {"seed", rec.seed},
      {"initial", to_json(rec.initial)},
      {"events", std::move(events)},
      {"samples", std::move(samples)},
      {"terminal", Json{{"tag", std::string(to_string(rec.terminal.tag))},
                        {"confidence", rec.terminal.confidence}}},
      {"termination", std::string(to_string(rec.termination))},
      {"t_end", rec.t_end},
      {"final", to_json(rec.final_state)},
  };
}

TrajectoryRecord record_from_json(const Json& j) {
  try {
    TrajectoryRecord rec;
    const Json& p = j.at("params");
    rec.params = SystemParams(p.at("r").get<double>(), p.at("epsilon").get<double>());
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.initial = state_from_json(j.at("initial"));
    for (const auto& e : j.at("events")) {
      rec.events.push_back({e.at("t").get<double>(), e.at("detector").get<int>()});
    }
    for (const auto& s : j.at("samples")) {
      rec.samples.push_back({s.at("t").get<double>(),
                             StateVector(vector_from(s.at("re"), s.at("im")))});
    }
    const Json& term = j.at("terminal");
    rec.terminal = {cycle_tag_from_string(term.at("tag").get<std::string>()),
                    term.at("confidence").get<double>()};
    rec.termination = termination_from_string(j.at("termination").get<std::string>());
    rec.t_end = j.at("t_end").get<double>();
    rec.final_state = state_from_json(j.at("final"));
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidState, std::string("malformed record: ") + e.what());
  }
}

Json to_json(const Matrix4& m) {
  Json re = Json::array(), im = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json rr = Json::array(), ii = Json::array();
    for (int k = 0; k < 4; ++k) {
      rr.push_back(m(i, k).real());
      ii.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

Json to_json(const EnsembleReport& rep) {
  Json classes = Json::object();
  for (std::size_t k = 0; k < kCycleTagCount; ++k) {
    classes[std::string(to_string(static_cast<CycleTag>(k)))] = rep.class_counts[k];
  }
  Json density = Json::array();
  for (const auto& rho : rep.mean_density) density.push_back(to_json(rho.entries()));
  return Json{
      {"n_trajectories", rep.n_trajectories},
      {"class_counts", std::move(classes)},
      {"times", rep.times},
      {"mean_sigmazz", rep.mean_sigmazz},
      {"se_sigmazz", rep.se_sigmazz},
      {"mean_density", std::move(density)},
  };
}

std::string record_document(const TrajectoryRecord& record) {
  return to_json(record).dump(2) + "\n";
}

std::string records_ndjson(const std::vector<TrajectoryRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    out += to_json(rec).dump();
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryRecord> parse_ndjson(const std::string& text) {
  std::vector<TrajectoryRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::InvalidState, std::string("malformed record line: ") + e.what());
    }
  }
  return out;
}

std::string timeseries_csv(const TrajectoryRecord& record) {
  std::ostringstream os;
  os << "t,sigmazz,entropy,weight_phi_plus,weight_phi_minus,weight_psi_plus,"
        "weight_psi_minus,plane\n";
  for (const auto& s : record.samples) {
    const auto w = bell_decompose(s.state.normalized()).weights();
    os << format_double(s.time) << ',' << format_double(sigmazz(s.state)) << ','
       << format_double(entanglement_entropy(s.state));
    for (double x : w) os << ',' << format_double(x);
    os << ',' << plane_of(s.state) << '\n';
  }
  return os.str();
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::ostringstream os;
  os << "r,epsilon,tau,lambda2_re,lambda2_im,zero_multiplicity\n";
  for (const auto& row : rows) {
    os << format_double(row.params.r()) << ',' << format_double(row.params.epsilon())
       << ',' << format_double(row.report.tau) << ','
       << format_double(row.report.lambda2.real()) << ','
       << format_double(row.report.lambda2.imag()) << ','
       << row.report.zero_multiplicity << '\n';
  }
  return os.str();
}

std::string ensemble_csv(const EnsembleReport& rep) {
  std::ostringstream os;
  os << "t,mean_sigmazz,se_sigmazz,p11,p10,p01,p00\n";
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    os << format_double(rep.times[k]) << ',' << format_double(rep.mean_sigmazz[k]) << ','
       << format_double(rep.se_sigmazz[k]);
    for (int i = 0; i < 4; ++i) {
      os << ',' << format_double(rep.mean_density[k](i, i).real());
    }
    os << '\n';
  }
  return os.str();
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "t,ensemble_sigmazz,ensemble_se,master_sigmazz,residual,tolerance,ok\n";
  for (const auto& row : rows) {
    const double residual = row.ensemble_mean - row.master;
    os << format_double(row.t) << ',' << format_double(row.ensemble_mean) << ','
       << format_double(row.ensemble_se) << ',' << format_double(row.master) << ','
       << format_double(residual) << ',' << format_double(row.tolerance) << ','
       << (std::abs(residual) <= row.tolerance ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

constexpr double kPlaneWeightFloor = 1e-12;

PortraitPoint plane_point(const StateVector& s, int plane) {
  const auto split = correlated_projection(s);
  const auto& xy = plane > 0 ? split.plus_plane : split.minus_plane;
  return {xy[0].real(), xy[1].real()};
}

double plane_weight(const StateVector& s, int plane) {
  return plane > 0 ? std::norm(s.c00()) + std::norm(s.c11())
                   : std::norm(s.c01()) + std::norm(s.c10());
}

int dominant_plane(const StateVector& s) { return sigmazz(s) >= 0.0 ? 1 : -1; }

}  // namespace

Portrait build_portrait(const TrajectoryRecord& record,
                        const ConditionalDynamics& dynamics,
                        std::size_t points_per_segment) {
  Portrait out;
  points_per_segment = std::max<std::size_t>(points_per_segment, 2);
  StateVector phi = record.initial.normalized();
  double t = 0.0;

  auto add_segments = [&](const StateVector& start, double duration) {
    for (int plane : {1, -1}) {
      if (plane_weight(start, plane) <= kPlaneWeightFloor) continue;
      PortraitSegment seg{plane, {}};
      for (std::size_t k = 0; k < points_per_segment; ++k) {
        const double dt = duration * static_cast<double>(k) /
                          static_cast<double>(points_per_segment - 1);
        seg.points.push_back(plane_point(dynamics.evolve(start, dt), plane));
      }
      out.segments.push_back(std::move(seg));
    }
  };

  for (const auto& event : record.events) {
    const double duration = event.time - t;
    add_segments(phi, duration);
    const StateVector before = dynamics.evolve(phi, duration);
    const StateVector after = apply_jump(before, event.detector, dynamics.ops()).normalized();
    const int from = dominant_plane(before);
    const int to = dominant_plane(after);
    out.jumps.push_back({event.time, event.detector, from, to,
                         plane_point(before, from), plane_point(after, to)});
    phi = after;
    t = event.time;
  }
  add_segments(phi, std::max(0.0, record.t_end - t));
  return out;
}

std::string portrait_csv(const Portrait& portrait) {
  std::ostringstream os;
  os << "kind,index,plane,x,y\n";
  for (std::size_t i = 0; i < portrait.segments.size(); ++i) {
    const auto& seg = portrait.segments[i];
    for (const auto& p : seg.points) {
      os << "path," << i << ',' << seg.plane << ',' << format_double(p.x) << ','
         << format_double(p.y) << '\n';
    }
  }
  for (std::size_t i = 0; i < portrait.jumps.size(); ++i) {
    const auto& j = portrait.jumps[i];
    os << "jump_from," << i << ',' << j.from_plane << ',' << format_double(j.from.x) << ','
       << format_double(j.from.y) << '\n';
    os << "jump_to," << i << ',' << j.to_plane << ',' << format_double(j.to.x) << ','
       << format_double(j.to.y) << '\n';
  }
  return os.str();
}

namespace {

constexpr double kRadius = 150.0;
constexpr double kCenterY = 200.0;

double center_x(int plane) { return plane > 0 ? 200.0 : 600.0; }

std::string svg_x(int plane, double x) { return fixed4(center_x(plane) + kRadius * x); }
std::string svg_y(double y) { return fixed4(kCenterY - kRadius * y); }

void bell_diameter(std::ostringstream& os, int plane, double dx, double dy,
                   const char* label) {
  const double cx = center_x(plane);
  os << "<line x1=\"" << fixed4(cx - kRadius * dx) << "\" y1=\"" << fixed4(kCenterY + kRadius * dy)
     << "\" x2=\"" << fixed4(cx + kRadius * dx) << "\" y2=\"" << fixed4(kCenterY - kRadius * dy)
     << "\" stroke=\"#888\" stroke-dasharray=\"2,4\"/>\n";
  os << "<text x=\"" << fixed4(cx + 1.08 * kRadius * dx) << "\" y=\""
     << fixed4(kCenterY - 1.08 * kRadius * dy) << "\" font-size=\"12\">" << label
     << "</text>\n";
}

}  // namespace

std::string portrait_svg(const Portrait& portrait, const std::string& title) {
  const double d = 1.0 / std::sqrt(2.0);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"420\" "
        "viewBox=\"0 0 800 420\">\n";
  os << "<rect width=\"800\" height=\"420\" fill=\"white\"/>\n";
  os << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  for (int plane : {1, -1}) {
    os << "<circle cx=\"" << fixed4(center_x(plane)) << "\" cy=\"" << fixed4(kCenterY)
       << "\" r=\"" << fixed4(kRadius) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed4(center_x(plane)) << "\" y=\"395\" text-anchor=\"middle\" "
       << "font-size=\"14\">" << (plane > 0 ? "E+ (c00, c11)" : "E- (c01, c10)")
       << "</text>\n";
  }
  // Axes are (c00, c11) on the left and (c01, c10) on the right.
  bell_diameter(os, 1, d, d, "Phi+");
  bell_diameter(os, 1, d, -d, "Phi-");
  bell_diameter(os, -1, d, d, "Psi+");
  bell_diameter(os, -1, d, -d, "Psi-");

  for (const auto& seg : portrait.segments) {
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < seg.points.size(); ++k) {
      if (k) os << ' ';
      os << svg_x(seg.plane, seg.points[k].x) << ',' << svg_y(seg.points[k].y);
    }
    os << "\"/>\n";
  }
  for (const auto& j : portrait.jumps) {
    const char* colour = j.detector == 1 ? "#d62728" : "#2ca02c";
    os << "<line x1=\"" << svg_x(j.from_plane, j.from.x) << "\" y1=\"" << svg_y(j.from.y)
       << "\" x2=\"" << svg_x(j.to_plane, j.to.x) << "\" y2=\"" << svg_y(j.to.y)
       << "\" stroke=\"" << colour << "\" stroke-opacity=\"0.6\"/>\n";
    os << "<circle cx=\"" << svg_x(j.to_plane, j.to.x) << "\" cy=\"" << svg_y(j.to.y)
       << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace cascade::io
