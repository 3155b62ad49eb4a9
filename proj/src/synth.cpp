#include "ghostsweep/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>

namespace ghostsweep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AxisBox make_box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return AxisBox{Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x1, y1, z1)};
}

// Entry parameter of the ray o + t d into the box, for t in (t_min, t_max); nothing otherwise.
std::optional<double> ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const AxisBox& b, double t_min,
                              double t_max) {
  double lo = t_min;
  double hi = t_max;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[a] - o[a]) / d[a];
    double t1 = (b.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return std::nullopt;
  }
  return lo;
}

AxisBox moving_box_at(const SynthSpec& spec, const Eigen::Vector2d& centre) {
  const Eigen::Vector2d half = spec.box_size.head<2>() / 2.0;
  // The box keeps its long side along the heading; headings are axis aligned or the
  // footprint is the axis-aligned hull of the rotated rectangle.
  const Eigen::Vector2d h = spec.box_heading.normalized();
  const double ex = std::abs(h.x()) * half.x() + std::abs(h.y()) * half.y();
  const double ey = std::abs(h.y()) * half.x() + std::abs(h.x()) * half.y();
  return make_box(centre.x() - ex, centre.y() - ey, spec.box_clearance, centre.x() + ex, centre.y() + ey,
                  spec.box_clearance + spec.box_size.z());
}

Eigen::Isometry3d sensor_pose(const SynthSpec& spec, int n) {
  const Eigen::Vector2d xy = spec.sensor_start + static_cast<double>(n) * spec.sensor_step;
  const double yaw = spec.sensor_step.norm() > 0.0 ? std::atan2(spec.sensor_step.y(), spec.sensor_step.x()) : 0.0;
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.linear() = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  pose.translation() = Eigen::Vector3d(xy.x(), xy.y(), spec.sensor_height);
  return pose;
}

bool segment_clear(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const std::vector<AxisBox>& obstacles) {
  const Eigen::Vector3d d = b - a;
  for (const AxisBox& box : obstacles) {
    if (ray_box(a, d, box, 0.0, 1.0)) return false;
  }
  return true;
}

Eigen::Vector3d to_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Eigen::Vector2d to_vec2(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

SynthSpec SynthSpec::defaults() {
  SynthSpec s;
  // Faces sit mid-cell for a 1 m grid anchored at integer coordinates, so range noise does not
  // scatter a wall over two cell rows.
  s.walls = {
      make_box(-42.5, -12.8, 0.0, 42.5, -12.5, 3.0),
      make_box(-42.5, 14.5, 0.0, 42.5, 14.8, 3.0),
      make_box(-42.8, -12.8, 0.0, -42.5, 14.8, 3.0),
      make_box(42.5, -12.8, 0.0, 42.8, 14.8, 3.0),
      make_box(-8.75, -6.75, 0.0, -8.25, -6.25, 4.0),
      make_box(9.25, -5.75, 0.0, 9.75, -5.25, 4.0),
  };
  return s;
}

SynthSpec SynthSpec::occluded() {
  SynthSpec s = defaults();
  s.walls.push_back(make_box(-1.0, 4.35, 0.0, 22.0, 4.65, 2.5));
  return s;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error("invalid synth spec: " + what); };
  if (!(ground_half_extent > 0.0)) fail("ground_half_extent must be positive");
  if (!(box_size.minCoeff() > 0.0)) fail("box_size must be positive");
  if (!(box_clearance >= 0.0)) fail("box_clearance must be >= 0");
  if (!(box_heading.norm() > 0.0)) fail("box_heading must be non-zero");
  if (!(box_speed >= 0.0) || !std::isfinite(box_speed)) fail("box_speed must be finite and >= 0");
  if (scans < 1) fail("scans must be >= 1");
  if (!(sensor_height > 0.0)) fail("sensor_height must be positive");
  if (channels < 1) fail("channels must be >= 1");
  if (azimuth_steps < 1) fail("azimuth_steps must be >= 1");
  if (!(elevation_min_deg <= elevation_max_deg) || elevation_min_deg < -90.0 || elevation_max_deg > 90.0) {
    fail("elevation range must satisfy -90 <= min <= max <= 90");
  }
  if (channels > 1 && elevation_min_deg == elevation_max_deg) fail("several channels need an elevation span");
  if (!(max_range > 0.0)) fail("max_range must be positive");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  for (const AxisBox& w : walls) {
    if (!((w.max - w.min).minCoeff() > 0.0)) fail("every wall needs positive extent");
  }
}

nlohmann::json to_json(const SynthSpec& s) {
  auto v3 = [](const Eigen::Vector3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  auto v2 = [](const Eigen::Vector2d& v) { return nlohmann::json::array({v.x(), v.y()}); };
  nlohmann::json walls = nlohmann::json::array();
  for (const AxisBox& w : s.walls) walls.push_back({{"min", v3(w.min)}, {"max", v3(w.max)}});
  return {{"ground_half_extent", s.ground_half_extent},
          {"walls", walls},
          {"box_size", v3(s.box_size)},
          {"box_clearance", s.box_clearance},
          {"box_start", v2(s.box_start)},
          {"box_heading", v2(s.box_heading)},
          {"box_speed", s.box_speed},
          {"scans", s.scans},
          {"sensor_start", v2(s.sensor_start)},
          {"sensor_step", v2(s.sensor_step)},
          {"sensor_height", s.sensor_height},
          {"channels", s.channels},
          {"elevation_min_deg", s.elevation_min_deg},
          {"elevation_max_deg", s.elevation_max_deg},
          {"azimuth_steps", s.azimuth_steps},
          {"max_range", s.max_range},
          {"noise_sigma", s.noise_sigma}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s = SynthSpec::defaults();
  try {
    if (j.contains("walls")) {
      s.walls.clear();
      for (const auto& w : j.at("walls")) s.walls.push_back({to_vec(w.at("min")), to_vec(w.at("max"))});
    }
    if (j.contains("ground_half_extent")) s.ground_half_extent = j.at("ground_half_extent").get<double>();
    if (j.contains("box_size")) s.box_size = to_vec(j.at("box_size"));
    if (j.contains("box_clearance")) s.box_clearance = j.at("box_clearance").get<double>();
    if (j.contains("box_start")) s.box_start = to_vec2(j.at("box_start"));
    if (j.contains("box_heading")) s.box_heading = to_vec2(j.at("box_heading"));
    if (j.contains("box_speed")) s.box_speed = j.at("box_speed").get<double>();
    if (j.contains("scans")) s.scans = j.at("scans").get<int>();
    if (j.contains("sensor_start")) s.sensor_start = to_vec2(j.at("sensor_start"));
    if (j.contains("sensor_step")) s.sensor_step = to_vec2(j.at("sensor_step"));
    if (j.contains("sensor_height")) s.sensor_height = j.at("sensor_height").get<double>();
    if (j.contains("channels")) s.channels = j.at("channels").get<int>();
    if (j.contains("elevation_min_deg")) s.elevation_min_deg = j.at("elevation_min_deg").get<double>();
    if (j.contains("elevation_max_deg")) s.elevation_max_deg = j.at("elevation_max_deg").get<double>();
    if (j.contains("azimuth_steps")) s.azimuth_steps = j.at("azimuth_steps").get<int>();
    if (j.contains("max_range")) s.max_range = j.at("max_range").get<double>();
    if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid synth spec: ") + e.what());
  }
  return s;
}

ScanFrame SynthScene::global_scan(std::size_t n) const {
  ScanFrame frame;
  frame.sequence_id = static_cast<std::int64_t>(n);
  frame.sensor_origin = poses.at(n).translation();
  frame.points.reserve(local_scans[n].size());
  for (const Point& p : local_scans[n].points) {
    const Eigen::Vector3d g = poses[n] * Eigen::Vector3d(p.x, p.y, p.z);
    frame.points.push_back({g.x(), g.y(), g.z(), p.index, p.label});
  }
  return frame;
}

SynthScene synth_scene(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Label box_label = spec.box_speed > 0.0 ? Label::Dynamic : Label::Static;
  const Eigen::Vector2d heading = spec.box_heading.normalized();

  SynthScene scene;
  std::vector<double> elevations(spec.channels);
  for (int c = 0; c < spec.channels; ++c) {
    const double f = spec.channels == 1 ? 0.0 : static_cast<double>(c) / (spec.channels - 1);
    elevations[c] = (spec.elevation_min_deg + f * (spec.elevation_max_deg - spec.elevation_min_deg)) *
                    std::numbers::pi / 180.0;
  }

  for (int n = 0; n < spec.scans; ++n) {
    const Eigen::Isometry3d pose = sensor_pose(spec, n);
    const Eigen::Vector3d o = pose.translation();
    const Eigen::Vector2d box_xy = spec.box_start + static_cast<double>(n) * spec.box_speed * heading;
    const AxisBox box = moving_box_at(spec, box_xy);
    scene.poses.push_back(pose);
    scene.box_positions.push_back(box_xy);

    LabeledCloud local;
    std::size_t box_hits = 0;
    for (int a = 0; a < spec.azimuth_steps; ++a) {
      const double az = 2.0 * std::numbers::pi * a / spec.azimuth_steps;
      for (double el : elevations) {
        const Eigen::Vector3d d_local(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        const Eigen::Vector3d d = pose.linear() * d_local;
        double best = kInf;
        bool on_box = false;
        if (d.z() < 0.0) {
          const double t = -o.z() / d.z();
          const Eigen::Vector3d hit = o + t * d;
          if (std::abs(hit.x()) <= spec.ground_half_extent && std::abs(hit.y()) <= spec.ground_half_extent) best = t;
        }
        for (const AxisBox& w : spec.walls) {
          if (auto t = ray_box(o, d, w, 1e-6, best); t && *t < best) best = *t;
        }
        if (auto t = ray_box(o, d, box, 1e-6, best); t && *t < best) {
          best = *t;
          on_box = true;
        }
        // The noise draw happens for every beam so that the stream does not depend on hits.
        const double jitter = spec.noise_sigma * noise(rng);
        if (!(best <= spec.max_range)) continue;
        const double range = std::max(best + jitter, 1e-3);
        const Eigen::Vector3d p = d_local * range;
        Point pt;
        pt.x = static_cast<float>(p.x());
        pt.y = static_cast<float>(p.y());
        pt.z = static_cast<float>(p.z());
        pt.index = static_cast<PointIndex>(local.points.size());
        pt.label = on_box ? box_label : Label::Static;
        if (on_box) ++box_hits;
        local.points.push_back(pt);
      }
    }
    if (box_hits > 0) ++scene.box_visible_scans;
    local.source_path = "scan " + std::to_string(n);
    scene.local_scans.push_back(std::move(local));

    const ScanFrame global = scene.global_scan(static_cast<std::size_t>(n));
    for (const Point& p : global.points) {
      Point m;
      m.x = static_cast<float>(p.x);
      m.y = static_cast<float>(p.y);
      m.z = static_cast<float>(p.z);
      m.index = static_cast<PointIndex>(scene.map.points.size());
      m.label = p.label;
      scene.map.points.push_back(m);
    }
    if (box_hits > 0 && spec.box_speed > 0.0) {
      // Some other scan must see this box position with nothing in the way.
      bool seen = false;
      const Eigen::Vector3d target(box_xy.x(), box_xy.y(), spec.box_clearance + spec.box_size.z() / 2.0);
      for (int s = 0; s < spec.scans && !seen; ++s) {
        if (s == n) continue;
        std::vector<AxisBox> obstacles = spec.walls;
        obstacles.push_back(moving_box_at(spec, spec.box_start + static_cast<double>(s) * spec.box_speed * heading));
        if (const AxisBox& other = obstacles.back();
            target.x() >= other.min.x() && target.x() <= other.max.x() && target.y() >= other.min.y() &&
            target.y() <= other.max.y()) {
          continue;
        }
        seen = segment_clear(sensor_pose(spec, s).translation(), target, obstacles);
      }
      if (!seen) {
        throw Error("invalid synth spec: box position of scan " + std::to_string(n) +
                    " is not in clear view of any other scan");
      }
    }
  }
  if (scene.map.empty()) throw Error("invalid synth spec: no beam hit anything");
  scene.map.source_path = "synth";
  return scene;
}

}  // namespace ghostsweep
