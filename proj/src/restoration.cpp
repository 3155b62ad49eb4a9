#include "ghostsweep/restoration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ghostsweep {

namespace {

constexpr double kTieEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Walks the columns pierced by from -> to and, inside each, the pierced bins in travel order.
// `visit` returns false to stop early.
template <typename Visit>
void walk_ray(const EncodedMatrix& grid, const Eigen::Vector3d& from, const Eigen::Vector3d& to, Visit&& visit) {
  const GridConfig& cfg = grid.config();
  const Eigen::Vector3d d = to - from;
  const auto n1 = static_cast<std::int64_t>(cfg.n1);
  const auto n2 = static_cast<std::int64_t>(cfg.n2);

  std::int64_t ix = static_cast<std::int64_t>(std::floor((from.x() - cfg.origin_x) / cfg.res_g));
  std::int64_t iy = static_cast<std::int64_t>(std::floor((from.y() - cfg.origin_y) / cfg.res_g));
  const std::int64_t ex = static_cast<std::int64_t>(std::floor((to.x() - cfg.origin_x) / cfg.res_g));
  const std::int64_t ey = static_cast<std::int64_t>(std::floor((to.y() - cfg.origin_y) / cfg.res_g));

  const std::int64_t step_x = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
  const std::int64_t step_y = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
  const double delta_x = step_x != 0 ? cfg.res_g / std::abs(d.x()) : kInf;
  const double delta_y = step_y != 0 ? cfg.res_g / std::abs(d.y()) : kInf;
  double t_max_x = kInf, t_max_y = kInf;
  if (step_x != 0) {
    const double boundary = cfg.origin_x + static_cast<double>(ix + (step_x > 0 ? 1 : 0)) * cfg.res_g;
    t_max_x = (boundary - from.x()) / d.x();
  }
  if (step_y != 0) {
    const double boundary = cfg.origin_y + static_cast<double>(iy + (step_y > 0 ? 1 : 0)) * cfg.res_g;
    t_max_y = (boundary - from.y()) / d.y();
  }

  double t_enter = 0.0;
  while (true) {
    if (ix < 0 || iy < 0 || ix >= n1 || iy >= n2) return;  // left the grid
    const double t_exit = std::min({t_max_x, t_max_y, 1.0});

    // Bins of this column spanned by z over [t_enter, t_exit].
    const std::size_t cell = static_cast<std::size_t>(ix * n2 + iy);
    const double base = grid.base_height(cell);
    const double u0 = (from.z() + t_enter * d.z() - base) / cfg.res_h;
    const double u1 = (from.z() + t_exit * d.z() - base) / cfg.res_h;
    const double lo = std::min(u0, u1), hi = std::max(u0, u1);
    auto k_lo = static_cast<std::int64_t>(std::floor(lo + kTieEps));
    auto k_hi = static_cast<std::int64_t>(std::ceil(hi - kTieEps)) - 1;
    if (k_hi < k_lo) k_hi = k_lo = static_cast<std::int64_t>(std::floor(0.5 * (lo + hi)));
    if (d.z() >= 0) {
      for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        if (!visit(Voxel{ix, iy, k})) return;
      }
    } else {
      for (std::int64_t k = k_hi; k >= k_lo; --k) {
        if (!visit(Voxel{ix, iy, k})) return;
      }
    }

    if ((ix == ex && iy == ey) || t_exit >= 1.0 - kTieEps) return;
    // Axes crossing at the same parameter step together, so edge-only contacts are skipped.
    const double t_next = std::min(t_max_x, t_max_y);
    if (t_max_x <= t_next + kTieEps) {
      ix += step_x;
      t_max_x += delta_x;
    }
    if (t_max_y <= t_next + kTieEps) {
      iy += step_y;
      t_max_y += delta_y;
    }
    t_enter = t_next;
  }
}

}  // namespace

Eigen::Vector3d voxel_center(const Voxel& v, const EncodedMatrix& grid) {
  const GridConfig& cfg = grid.config();
  const std::size_t cell = static_cast<std::size_t>(v.i) * cfg.n2 + static_cast<std::size_t>(v.j);
  return {cfg.origin_x + (static_cast<double>(v.i) + 0.5) * cfg.res_g,
          cfg.origin_y + (static_cast<double>(v.j) + 0.5) * cfg.res_g,
          grid.base_height(cell) + (static_cast<double>(v.k) + 0.5) * cfg.res_h};
}

std::optional<Voxel> voxel_of(const Eigen::Vector3d& p, const EncodedMatrix& grid) {
  const GridConfig& cfg = grid.config();
  const auto cell = cfg.cell_of(p.x(), p.y());
  if (!cell) return std::nullopt;
  return Voxel{static_cast<std::int64_t>(cell->i), static_cast<std::int64_t>(cell->j),
               cfg.raw_bin(p.z(), grid.base_height(cfg.linear(*cell)))};
}

double max_ray_slope(const ScanFrame& scan) {
  if (scan.points.empty()) throw Error("height mask of an empty scan");
  double k = -kInf;
  bool any = false;
  for (const auto& p : scan.points) {
    const double dx = p.x - scan.sensor_origin.x();
    const double dy = p.y - scan.sensor_origin.y();
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r < 1e-9) continue;
    k = std::max(k, (p.z - scan.sensor_origin.z()) / r);
    any = true;
  }
  return any ? k : kInf;
}

std::uint64_t bits_above(double ceiling_z, double base, const GridConfig& config) {
  if (ceiling_z == kInf) return 0;
  const double rel = std::floor((ceiling_z - base) / config.res_h) + 1.0;
  if (rel >= config.n_bit) return 0;
  if (rel <= 0.0) return config.word_mask();
  return config.word_mask() & ~bits_below(static_cast<int>(rel));
}

VisibilityMask height_mask(const ScanFrame& scan, std::span<const std::size_t> footprint, const EncodedMatrix& map,
                           const GridConfig& config) {
  VisibilityMask out;
  out.max_slope = max_ray_slope(scan);
  out.protected_bits.cells.reserve(footprint.size());
  for (std::size_t c : footprint) {
    const CellIndex ij = config.cell(c);
    const double s = std::hypot(config.cell_center_x(ij.i) - scan.sensor_origin.x(),
                                config.cell_center_y(ij.j) - scan.sensor_origin.y());
    const double ceiling = scan.sensor_origin.z() + std::ceil(out.max_slope * s);
    const std::uint64_t bits = bits_above(ceiling, map.base_height(c), config);
    if (bits != 0) out.protected_bits.cells.push_back({c, bits});
  }
  return out;
}

std::vector<Voxel> ray_voxels(const EncodedMatrix& grid, const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  std::vector<Voxel> out;
  walk_ray(grid, from, to, [&](const Voxel& v) {
    out.push_back(v);
    return true;
  });
  return out;
}

RayVerdict rvrc(const Voxel& v, const Eigen::Vector3d& sensor_origin, const EncodedMatrix& scan) {
  const GridConfig& cfg = scan.config();
  const Eigen::Vector3d start = voxel_center(v, scan);
  const std::optional<Voxel> sensor_voxel = voxel_of(sensor_origin, scan);
  const Eigen::Vector3d end = sensor_voxel ? voxel_center(*sensor_voxel, scan) : sensor_origin;

  bool blocked = false;
  walk_ray(scan, start, end, [&](const Voxel& u) {
    if (u == v || (sensor_voxel && u == *sensor_voxel)) return true;
    if (u.k < 0 || u.k >= cfg.n_bit) return true;
    const std::size_t cell = static_cast<std::size_t>(u.i) * cfg.n2 + static_cast<std::size_t>(u.j);
    if ((scan.word(cell) >> u.k) & 1u) {
      blocked = true;
      return false;
    }
    return true;
  });
  return blocked ? RayVerdict::Blocked : RayVerdict::Clear;
}

// ---------------------------------------------------------------------------

DecisionCache::Status DecisionCache::status(std::size_t cell, int bit) const {
  const std::uint64_t m = std::uint64_t{1} << bit;
  if (dynamic_[cell] & m) return Status::Dynamic;
  if (protected_[cell] & m) return Status::Protected;
  return Status::Undecided;
}

void DecisionCache::mark_protected(std::size_t cell, std::uint64_t bits) {
  protected_[cell] |= bits & ~dynamic_[cell];
}

void DecisionCache::mark_dynamic(std::size_t cell, std::uint64_t bits) {
  dynamic_[cell] |= bits & ~protected_[cell];
}

RestoreResult restore(const DynamicMask& raw, const ScanContext& ctx, DecisionCache* cache) {
  RestoreResult result;
  result.stats.raw_bits = raw.bit_count();
  if (raw.empty()) return result;

  const GridConfig& cfg = ctx.map.config();
  if (cache && cache->cells() != cfg.cell_count()) throw Error("decision cache does not match grid");
  const VisibilityMask visibility = height_mask(ctx.scan, ctx.footprint, ctx.map, cfg);
  result.max_slope = visibility.max_slope;
  const Eigen::Vector3d& sensor = ctx.scan.sensor_origin;

  struct CellOutcome {
    std::uint64_t keep = 0;
    std::uint64_t new_dynamic = 0;
    std::uint64_t new_protected = 0;
    RestoreStats stats;
  };
  std::vector<CellOutcome> outcome(raw.cells.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(raw.cells.size()); ++n) {
    const CellWord& cw = raw.cells[static_cast<std::size_t>(n)];
    CellOutcome& out = outcome[static_cast<std::size_t>(n)];
    std::uint64_t pending = cw.word;
    if (cache) {
      const std::uint64_t dyn = pending & cache->dynamic_word(cw.cell);
      const std::uint64_t prot = pending & cache->protected_word(cw.cell);
      out.keep |= dyn;
      out.stats.cached_dynamic += static_cast<std::size_t>(std::popcount(dyn));
      out.stats.cached_protected += static_cast<std::size_t>(std::popcount(prot));
      pending &= ~(dyn | prot);
    }
    const std::uint64_t high = pending & visibility.protected_bits.word(cw.cell);
    out.stats.height_protected += static_cast<std::size_t>(std::popcount(high));
    pending &= ~high;

    const CellIndex ij = cfg.cell(cw.cell);
    for (std::uint64_t w = pending; w != 0; w &= w - 1) {
      const int bit = std::countr_zero(w);
      const std::uint64_t m = std::uint64_t{1} << bit;
      const Voxel v{static_cast<std::int64_t>(ij.i), static_cast<std::int64_t>(ij.j), bit};
      const double range = (voxel_center(v, ctx.map) - sensor).norm();
      if (range < cfg.min_range || range > cfg.max_range) {
        ++out.stats.range_protected;
        continue;
      }
      if (rvrc(v, sensor, ctx.scan_matrix) == RayVerdict::Blocked) {
        ++out.stats.rvrc_blocked;
        out.new_protected |= m;
      } else {
        ++out.stats.rvrc_clear;
        out.new_dynamic |= m;
        out.keep |= m;
      }
    }
  }

  // Single writer: merge per-cell outcomes and update the cache.
  for (std::size_t n = 0; n < raw.cells.size(); ++n) {
    const CellWord& cw = raw.cells[n];
    const CellOutcome& out = outcome[n];
    if (out.keep) result.mask.cells.push_back({cw.cell, out.keep});
    if (cw.word & ~out.keep) result.protected_bits.cells.push_back({cw.cell, cw.word & ~out.keep});
    if (cache) {
      cache->mark_dynamic(cw.cell, out.new_dynamic);
      cache->mark_protected(cw.cell, out.new_protected);
    }
    auto& s = result.stats;
    s.cached_dynamic += out.stats.cached_dynamic;
    s.cached_protected += out.stats.cached_protected;
    s.height_protected += out.stats.height_protected;
    s.range_protected += out.stats.range_protected;
    s.rvrc_blocked += out.stats.rvrc_blocked;
    s.rvrc_clear += out.stats.rvrc_clear;
  }
  return result;
}

}  // namespace ghostsweep
