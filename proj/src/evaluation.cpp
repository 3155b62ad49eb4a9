#include "ghostsweep/evaluation.hpp"

#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

namespace ghostsweep {

double harmonic_accuracy(double sa, double da) {
  const double sum = sa + da;
  return sum > 0.0 ? 2.0 * sa * da / sum : 0.0;
}

std::string TimingStats::format() const { return fmt::format("{:.3f} ± {:.3f}", mean, stddev); }

TimingStats timing(std::span<const double> seconds) {
  if (seconds.empty()) throw Error("timing needs at least one measurement");
  TimingStats t;
  t.samples = seconds.size();
  double sum = 0.0;
  for (double s : seconds) sum += s;
  t.mean = sum / static_cast<double>(seconds.size());
  double sq = 0.0;
  for (double s : seconds) sq += (s - t.mean) * (s - t.mean);
  t.stddev = std::sqrt(sq / static_cast<double>(seconds.size()));
  return t;
}

EvalReport score(std::span<const PointIndex> retained, const LabeledCloud& gt) {
  std::unordered_map<PointIndex, Label> label_of;
  label_of.reserve(gt.size());
  EvalReport report;
  for (const Point& p : gt.points) {
    label_of.emplace(p.index, p.label);
    switch (p.label) {
      case Label::Static: ++report.counts.gt_static; break;
      case Label::Dynamic: ++report.counts.gt_dynamic; break;
      case Label::Unlabeled: ++report.counts.unlabeled; break;
    }
  }
  std::size_t dynamic_retained = 0;
  for (PointIndex idx : retained) {
    const auto it = label_of.find(idx);
    if (it == label_of.end()) throw Error("retained point index " + std::to_string(idx) + " not in ground truth");
    if (it->second == Label::Static) ++report.counts.static_retained;
    if (it->second == Label::Dynamic) ++dynamic_retained;
  }
  if (report.counts.static_retained > report.counts.gt_static || dynamic_retained > report.counts.gt_dynamic) {
    throw Error("retained set contains duplicate indices");
  }
  report.counts.dynamic_removed = report.counts.gt_dynamic - dynamic_retained;
  if (report.counts.gt_static > 0) {
    report.sa = 100.0 * static_cast<double>(report.counts.static_retained) / static_cast<double>(report.counts.gt_static);
  }
  if (report.counts.gt_dynamic > 0) {
    report.da = 100.0 * static_cast<double>(report.counts.dynamic_removed) / static_cast<double>(report.counts.gt_dynamic);
  }
  if (report.sa && report.da) report.ha = harmonic_accuracy(*report.sa, *report.da);
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j{{"sa", opt(r.sa)},
                   {"da", opt(r.da)},
                   {"ha", opt(r.ha)},
                   {"counts",
                    {{"gt_static", r.counts.gt_static},
                     {"gt_dynamic", r.counts.gt_dynamic},
                     {"static_retained", r.counts.static_retained},
                     {"dynamic_removed", r.counts.dynamic_removed},
                     {"unlabeled", r.counts.unlabeled}}}};
  if (r.runtime) {
    j["runtime"] = {{"mean_s", r.runtime->mean},
                    {"std_s", r.runtime->stddev},
                    {"samples", r.runtime->samples},
                    {"text", r.runtime->format()}};
  }
  return j;
}

std::string format_table(const EvalReport& r, std::string_view method) {
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string("-"); };
  const std::size_t w = std::max<std::size_t>(method.size(), 7);
  std::string out = fmt::format("{:<{}}  {:>7}  {:>7}  {:>7}\n", "Method", w, "SA ↑", "DA ↑", "HA ↑");
  out += fmt::format("{:<{}}  {:>7}  {:>7}  {:>7}\n", method, w, cell(r.sa), cell(r.da), cell(r.ha));
  if (r.runtime) out += fmt::format("Runtime/point cloud [s]: {}\n", r.runtime->format());
  return out;
}

}  // namespace ghostsweep
