#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ghostsweep/point_cloud.hpp"

namespace ghostsweep {

/// 2 * sa * da / (sa + da); 0 when both are 0.
double harmonic_accuracy(double sa, double da);

struct TimingStats {
  double mean = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
  std::size_t samples = 0;

  /// "0.046 ± 0.011"
  std::string format() const;
};

TimingStats timing(std::span<const double> seconds);

struct EvalCounts {
  std::size_t gt_static = 0;
  std::size_t gt_dynamic = 0;
  std::size_t static_retained = 0;
  std::size_t dynamic_removed = 0;
  std::size_t unlabeled = 0;
};

/// Point-level removal quality, in percent. A metric is unset when its denominator is zero.
struct EvalReport {
  std::optional<double> sa;
  std::optional<double> da;
  std::optional<double> ha;
  EvalCounts counts;
  std::optional<TimingStats> runtime;
};

/// Scores the retained (static) point indices against a labeled ground-truth map.
/// Unlabeled points count towards neither accuracy.
EvalReport score(std::span<const PointIndex> retained, const LabeledCloud& gt);

nlohmann::json to_json(const EvalReport& report);

/// Aligned text table with columns Method, SA, DA, HA (two decimals, "-" when undefined).
std::string format_table(const EvalReport& report, std::string_view method);

}  // namespace ghostsweep
