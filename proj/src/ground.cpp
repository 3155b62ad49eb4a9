#include "ghostsweep/ground.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ghostsweep {

double median_of(std::span<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

MadBand mad_band(std::span<double> values) {
  MadBand band;
  band.median = median_of(values);
  for (double& v : values) v = std::abs(v - band.median);
  band.mad = median_of(values);
  band.lower = band.median - 3.0 * band.mad;
  band.upper = band.median + 3.0 * band.mad;
  return band;
}

std::vector<std::optional<double>> lowest_heights(std::span<const Point> points, const GridConfig& config) {
  std::vector<std::optional<double>> lowest(config.cell_count());
  for (const auto& p : points) {
    const auto cell = config.cell_of(p.x, p.y);
    if (!cell) continue;
    auto& slot = lowest[config.linear(*cell)];
    if (!slot || p.z < *slot) slot = p.z;
  }
  return lowest;
}

GroundField coarse_ground(std::span<const std::optional<double>> lowest, const GridConfig& config) {
  config.validate();
  if (lowest.size() != config.cell_count()) {
    throw std::invalid_argument("lowest-height array does not match grid dimensions");
  }
  GroundField field;
  field.lowest.assign(lowest.begin(), lowest.end());
  field.g.assign(config.cell_count(), config.z_floor);
  field.l_min.assign(config.cell_count(), config.z_floor);
  field.l_max.assign(config.cell_count(), config.z_floor);

  const auto n1 = static_cast<std::ptrdiff_t>(config.n1);
  const auto n2 = static_cast<std::ptrdiff_t>(config.n2);
  const std::ptrdiff_t r = config.mad_window_radius;

#pragma omp parallel
  {
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>((2 * r + 1) * (2 * r + 1)));
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n1; ++i) {
      for (std::ptrdiff_t j = 0; j < n2; ++j) {
        window.clear();
        for (std::ptrdiff_t di = std::max<std::ptrdiff_t>(0, i - r); di <= std::min(n1 - 1, i + r); ++di) {
          for (std::ptrdiff_t dj = std::max<std::ptrdiff_t>(0, j - r); dj <= std::min(n2 - 1, j + r); ++dj) {
            const auto& l = lowest[static_cast<std::size_t>(di * n2 + dj)];
            if (l) window.push_back(*l);
          }
        }
        const auto c = static_cast<std::size_t>(i * n2 + j);
        if (window.empty()) continue;  // keeps z_floor
        const MadBand band = mad_band(window);
        field.l_min[c] = band.lower;
        field.l_max[c] = band.upper;
        field.g[c] = lowest[c] ? std::min(std::max(*lowest[c], band.lower), band.upper) : band.median;
      }
    }
  }
  return field;
}

std::vector<std::size_t> select_csel(const DynamicMask& mask, const EncodedMatrix& map) {
  std::vector<std::size_t> out;
  if (map.config().n_bit < 2) return out;
  for (const auto& cw : mask.cells) {
    if ((map.word(cw.cell) & 1u) && ((cw.word >> 1) & 1u)) out.push_back(cw.cell);
  }
  return out;
}

int ground_top_subbin(std::span<const std::uint32_t> counts, double ratio) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0;
  const double need = ratio * static_cast<double>(total);
  std::uint64_t cumulative = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    cumulative += counts[t];
    if (static_cast<double>(cumulative) >= need) return static_cast<int>(t);
  }
  return static_cast<int>(counts.size()) - 1;
}

FineSegmentation fine_segment(std::size_t cell, const EncodedMatrix& map, std::span<const Point> map_points,
                              const GridConfig& config) {
  const auto members = map.bucket(cell, 0);
  if (members.empty()) throw Error("fine_segment: ground bin of the selected cell is empty");
  const double g = map.base_height(cell);
  const double sub_h = config.res_h / config.fine_factor;

  FineSegmentation out;
  out.subbin_counts.assign(static_cast<std::size_t>(config.fine_factor), 0);
  std::vector<int> sub(members.size());
  for (std::size_t n = 0; n < members.size(); ++n) {
    if (members[n] >= map_points.size()) throw Error("fine_segment: bucket index outside the map cloud");
    const double z = map_points[members[n]].z;
    const auto s = static_cast<int>(std::floor((z - g) / sub_h));
    sub[n] = std::clamp(s, 0, config.fine_factor - 1);
    ++out.subbin_counts[static_cast<std::size_t>(sub[n])];
  }
  out.ground_top_subbin = ground_top_subbin(out.subbin_counts, config.ground_ratio);
  for (std::size_t n = 0; n < members.size(); ++n) {
    if (sub[n] > out.ground_top_subbin) out.dynamic_points.push_back(members[n]);
  }
  return out;
}

void dump_ground_csv(const GroundField& ground, const GridConfig& config, std::ostream& out) {
  out << "i,j,l_k,l_min,l_max,g_k\n";
  for (std::size_t c = 0; c < ground.g.size(); ++c) {
    const CellIndex ij = config.cell(c);
    out << ij.i << ',' << ij.j << ',';
    if (ground.lowest[c]) out << *ground.lowest[c];
    out << ',' << ground.l_min[c] << ',' << ground.l_max[c] << ',' << ground.g[c] << '\n';
  }
}

}  // namespace ghostsweep
