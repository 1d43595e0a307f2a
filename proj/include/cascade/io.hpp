#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/analysis.hpp"
#include "cascade/master.hpp"
#include "cascade/trajectory.hpp"

namespace cascade::io {

using Json = nlohmann::ordered_json;

/// %.17g: enough digits to reproduce every double exactly.
std::string format_double(double v);

Json to_json(const SystemParams& params);
Json to_json(const StateVector& state);
Json to_json(const TrajectoryRecord& record);
Json to_json(const Matrix4& m);
Json to_json(const EnsembleReport& report);

StateVector state_from_json(const Json& j);
TrajectoryRecord record_from_json(const Json& j);

/// Pretty-printed single-record document.
std::string record_document(const TrajectoryRecord& record);
/// One compact JSON line per record.
std::string records_ndjson(const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> parse_ndjson(const std::string& text);

/// Columns: t, sigmazz, entropy, weight_phi_plus, weight_phi_minus,
/// weight_psi_plus, weight_psi_minus, plane.
std::string timeseries_csv(const TrajectoryRecord& record);

struct SpectrumRow {
  SystemParams params;
  SpectrumReport report;
};
std::string spectrum_csv(const std::vector<SpectrumRow>& rows);

std::string ensemble_csv(const EnsembleReport& report);

struct CompareRow {
  double t;
  double ensemble_mean;
  double ensemble_se;
  double master;
  double tolerance;
};
std::string compare_csv(const std::vector<CompareRow>& rows);

/// Cascaded-system phase-space path: unnormalized between-jump segments in
/// the E+ (c00, c11) and E- (c01, c10) planes plus jump chords.
struct PortraitPoint {
  double x, y;
};
struct PortraitSegment {
  int plane;  // +1 or -1
  std::vector<PortraitPoint> points;
};
struct PortraitJump {
  double time;
  int detector;
  int from_plane, to_plane;
  PortraitPoint from, to;
};
struct Portrait {
  std::vector<PortraitSegment> segments;
  std::vector<PortraitJump> jumps;
};

/// Replays the record's click sequence to recover unnormalized paths.
Portrait build_portrait(const TrajectoryRecord& record,
                        const ConditionalDynamics& dynamics,
                        std::size_t points_per_segment = 64);
std::string portrait_csv(const Portrait& portrait);
std::string portrait_svg(const Portrait& portrait, const std::string& title);

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cascade::io
