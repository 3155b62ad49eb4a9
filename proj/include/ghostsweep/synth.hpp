#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "ghostsweep/point_cloud.hpp"

namespace ghostsweep {

struct AxisBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

/// Scene parameters for a simulated drive: flat ground, static boxes (walls, occluders), one
/// box translating along a lane, and a spinning multi-beam LiDAR moving along a straight path.
struct SynthSpec {
  double ground_half_extent = 50.0;
  std::vector<AxisBox> walls;

  Eigen::Vector3d box_size{4.5, 1.8, 1.6};
  /// Gap between the ground and the underside of the box, like a vehicle's ground clearance.
  double box_clearance = 0.25;
  /// Centre of the box footprint at scan 0.
  Eigen::Vector2d box_start{19.0, 6.0};
  /// Unit heading of the box in the ground plane.
  Eigen::Vector2d box_heading{-1.0, 0.0};
  /// Metres travelled between consecutive scans.
  double box_speed = 2.0;

  int scans = 20;
  Eigen::Vector2d sensor_start{-19.0, 0.0};
  /// Sensor displacement between consecutive scans.
  Eigen::Vector2d sensor_step{2.0, 0.0};
  double sensor_height = 1.73;

  int channels = 40;
  double elevation_min_deg = -24.8;
  double elevation_max_deg = 2.0;
  int azimuth_steps = 300;
  double max_range = 35.0;
  /// Standard deviation of the range noise, metres.
  double noise_sigma = 0.01;

  /// Ground, walls along both sides and ends of a straight road, and the moving box.
  static SynthSpec defaults();
  /// defaults() plus a row of static blockers in front of the lane that hides the moving box
  /// from the sensor during the first half of the drive.
  static SynthSpec occluded();

  /// Throws Error on a degenerate spec.
  void validate() const;
};

nlohmann::json to_json(const SynthSpec& spec);
/// Keys absent from `j` keep the defaults() value.
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthScene {
  /// Global map, index == position, labels from the generator.
  LabeledCloud map;
  /// Sensor-frame scans, as they would be stored on disk.
  std::vector<LabeledCloud> local_scans;
  std::vector<Eigen::Isometry3d> poses;
  /// Box footprint centre per scan.
  std::vector<Eigen::Vector2d> box_positions;
  /// Scans whose own box position received at least one return.
  std::size_t box_visible_scans = 0;

  /// Scan `n` in the global frame, computed from the stored (float-rounded) local points.
  ScanFrame global_scan(std::size_t n) const;
};

/// Deterministic for a given (spec, seed). The map is the union of all scans. Box returns are
/// labeled dynamic when the box moves and static otherwise. Throws Error when some box
/// position that appears in the map is not in clear view of any other scan.
SynthScene synth_scene(const SynthSpec& spec, std::uint64_t seed);

}  // namespace ghostsweep
