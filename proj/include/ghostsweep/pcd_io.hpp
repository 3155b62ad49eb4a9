#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "ghostsweep/point_cloud.hpp"

namespace ghostsweep {

// Label codes written by write_cloud. Reading maps any code in the dynamic set to
// Label::Dynamic, kUnlabeledCode to Label::Unlabeled and everything else to Label::Static.
inline constexpr std::uint32_t kStaticCode = 0;
inline constexpr std::uint32_t kDynamicCode = 252;
inline constexpr std::uint32_t kUnlabeledCode = 0xFFFFFFFFu;

/// Integer label values treated as dynamic. Defaults to the SemanticKITTI moving classes.
struct DynamicLabelSet {
  std::vector<std::int64_t> values{251, 252, 253, 254, 255, 256, 257, 258, 259};

  bool contains(std::int64_t v) const;
  /// Parses "251-259" or "1,5,9" style lists (ranges inclusive).
  static DynamicLabelSet parse(const std::string& text);
};

struct PcdField {
  std::string name;
  int size = 4;
  char type = 'F';  // 'F', 'U' or 'I'
  int count = 1;
  std::size_t offset = 0;  // byte offset inside one binary record
};

enum class PcdFormat { Ascii, Binary };

struct PcdHeader {
  std::string version;
  std::vector<PcdField> fields;
  std::size_t width = 0;
  std::size_t height = 1;
  std::size_t points = 0;
  PcdFormat data = PcdFormat::Ascii;
  /// tx ty tz qw qx qy qz, present only when the header carried a well-formed VIEWPOINT.
  std::optional<std::array<double, 7>> viewpoint;
  bool viewpoint_malformed = false;
  std::size_t record_size = 0;

  const PcdField* find(const std::string& name) const;
};

PcdHeader read_pcd_header(const std::filesystem::path& path);

struct ReadOptions {
  /// Integer-valued field holding ground-truth labels; when unset all points are unlabeled.
  std::optional<std::string> label_field;
  /// Field holding stable point indices; when unset indices are 0..n-1 in file order.
  std::optional<std::string> index_field;
  DynamicLabelSet dynamic_labels;
};

LabeledCloud read_cloud(const std::filesystem::path& path, const ReadOptions& options = {});

struct WriteOptions {
  PcdFormat format = PcdFormat::Binary;
  bool write_index = true;
  /// Emit a label field; defaults to "only when the cloud carries labels".
  std::optional<bool> write_labels;
  /// Sensor pose stored in VIEWPOINT (identity when unset).
  std::optional<Eigen::Isometry3d> viewpoint;
  /// Write a header-only file (POINTS 0) instead of refusing an empty cloud.
  bool allow_empty = false;
};

void write_points(std::span<const Point> points, const std::filesystem::path& path,
                  const WriteOptions& options = {});
void write_cloud(const LabeledCloud& cloud, const std::filesystem::path& path,
                 PcdFormat format = PcdFormat::Binary);

// ---------------------------------------------------------------------------
// Poses and scans

enum class PoseSource { Viewpoint, PoseFile };

/// Builds a rigid pose from a row-major 3x4 [R|t]. Rotations off orthonormal by more than
/// 1e-3 are re-orthonormalized with a warning; a degenerate rotation throws.
Eigen::Isometry3d pose_from_row_major(std::span<const double, 12> values);

/// One pose per non-empty line, 12 whitespace separated floats.
std::vector<Eigen::Isometry3d> read_pose_file(const std::filesystem::path& path);

/// VIEWPOINT translation + quaternion as a pose; throws when absent or malformed.
Eigen::Isometry3d viewpoint_pose(const PcdHeader& header);

struct ScanReadOptions {
  PoseSource pose_source = PoseSource::Viewpoint;
  std::optional<std::filesystem::path> pose_file;
  std::optional<std::size_t> row;
  /// Points in the file are already in the global frame; only the origin is taken from the pose.
  bool already_global = false;
  std::int64_t sequence_id = 0;
};

/// Loads one scan. An explicit pose file takes precedence over the VIEWPOINT header.
ScanFrame read_scan(const std::filesystem::path& path, const ScanReadOptions& options);

/// Loads one scan with a pose that was resolved by the caller.
ScanFrame read_scan(const std::filesystem::path& path, const Eigen::Isometry3d& pose,
                    bool already_global, std::int64_t sequence_id);

}  // namespace ghostsweep
