#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ghostsweep/grid_config.hpp"
#include "ghostsweep/pcd_io.hpp"
#include "ghostsweep/removal.hpp"
#include "ghostsweep/synth.hpp"

namespace ghostsweep {

struct RunConfig {
  std::filesystem::path map;
  /// Directory of *.pcd scans, a single file, or a wildcard pattern such as scans/*.pcd.
  std::filesystem::path scans;
  std::optional<std::filesystem::path> poses;
  PoseSource pose_source = PoseSource::Viewpoint;
  bool scans_global = false;
  GridOverrides grid;
  PipelineOptions pipeline;
  /// Ground-truth label field of the map. When unset a field named "label" is used if present.
  std::optional<std::string> eval_labels;
  std::string dynamic_labels = "251-259";
  std::filesystem::path out;
  bool overwrite = false;
  bool dump_grids = false;
  PcdFormat format = PcdFormat::Binary;
  /// Worker cap; 0 keeps the OpenMP default.
  int threads = 0;
};

/// Scan files named by `spec`, sorted by file name. Throws when nothing matches.
std::vector<std::filesystem::path> list_scans(const std::filesystem::path& spec);

/// Cleans a map: writes static.pcd, dynamic.pcd, run_log.jsonl and, with labels, report.json.
/// Returns 0 on success; otherwise prints one line naming the cause to `err`.
int cmd_clean(const RunConfig& config, std::ostream& out, std::ostream& err);

enum class MatchMode { Index, Coordinates };

struct EvalConfig {
  std::filesystem::path static_pcd;
  std::filesystem::path gt_map;
  std::string label_field = "label";
  std::string dynamic_labels = "251-259";
  MatchMode match = MatchMode::Index;
  /// Largest per-axis distance accepted by coordinate matching.
  double tolerance = 0.0;
  /// JSON report path; defaults to eval_report.json next to the static cloud.
  std::optional<std::filesystem::path> report;
  bool overwrite = false;
};

/// Scores a cleaned map against a labeled map, prints the table and writes the JSON report.
int cmd_eval(const EvalConfig& config, std::ostream& out, std::ostream& err);

struct SynthConfig {
  SynthSpec spec = SynthSpec::defaults();
  std::uint64_t seed = 0;
  std::filesystem::path out;
  bool overwrite = false;
  PcdFormat format = PcdFormat::Binary;
};

/// Writes map.pcd (labels in field "label"), scans/NNNNNN.pcd in the sensor frame with
/// VIEWPOINT poses, poses.txt and scene.json.
int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ghostsweep
