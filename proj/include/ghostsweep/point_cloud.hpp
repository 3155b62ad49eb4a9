#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ghostsweep {

/// Raised for malformed inputs, I/O failures and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { Unlabeled, Static, Dynamic };

using PointIndex = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  PointIndex index = 0;
  Label label = Label::Unlabeled;
};

struct BoundingBox {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
};

/// A point cloud in the global frame. Indices are stable identifiers assigned at load time.
struct LabeledCloud {
  std::vector<Point> points;
  std::string source_path;
  /// Non-finite points discarded while loading.
  std::size_t dropped = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const;

  /// Componentwise min/max over all points; throws on an empty cloud.
  BoundingBox bounding_box() const;
};

/// One LiDAR sweep already expressed in the global frame.
struct ScanFrame {
  std::vector<Point> points;
  Eigen::Vector3d sensor_origin = Eigen::Vector3d::Zero();
  std::int64_t sequence_id = 0;
};

}  // namespace ghostsweep
