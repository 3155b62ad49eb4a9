#include "ghostsweep/grid_config.hpp"

#include <stdexcept>
#include <string>

namespace ghostsweep {

void GridConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("grid config: " + what); };
  if (!(res_g > 0.0) || !std::isfinite(res_g)) fail("res_g must be positive");
  if (!(res_h > 0.0) || !std::isfinite(res_h)) fail("res_h must be positive");
  if (n_bit < 1 || n_bit > 64) fail("n_bit must be in [1, 64]");
  if (fine_factor < 2) fail("fine_factor must be at least 2");
  if (!(ground_ratio > 0.0 && ground_ratio <= 1.0)) fail("ground_ratio must be in (0, 1]");
  if (mad_window_radius < 0) fail("mad_window_radius must be non-negative");
  if (!(min_range >= 0.0) || !(max_range > min_range)) fail("need 0 <= min_range < max_range");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y) || !std::isfinite(z_floor)) {
    fail("non-finite grid origin");
  }
}

bool GridConfig::same_geometry(const GridConfig& o) const {
  return res_g == o.res_g && res_h == o.res_h && n_bit == o.n_bit && origin_x == o.origin_x &&
         origin_y == o.origin_y && n1 == o.n1 && n2 == o.n2;
}

GridConfig make_grid_config(const LabeledCloud& map_cloud, const GridOverrides& overrides) {
  if (map_cloud.empty()) throw Error("cannot derive a grid from an empty map");
  GridConfig cfg;
  if (overrides.res_g) cfg.res_g = *overrides.res_g;
  if (overrides.res_h) cfg.res_h = *overrides.res_h;
  if (overrides.n_bit) cfg.n_bit = *overrides.n_bit;
  if (overrides.ground_ratio) cfg.ground_ratio = *overrides.ground_ratio;
  if (overrides.fine_factor) cfg.fine_factor = *overrides.fine_factor;
  if (overrides.min_range) cfg.min_range = *overrides.min_range;
  if (overrides.max_range) cfg.max_range = *overrides.max_range;
  if (!(cfg.res_g > 0.0)) throw std::invalid_argument("grid config: res_g must be positive");
  // Roughly a 5 m neighbourhood for the ground window.
  cfg.mad_window_radius = overrides.mad_window_radius.value_or(
      static_cast<int>(std::ceil(5.0 / cfg.res_g)));

  const BoundingBox box = map_cloud.bounding_box();
  if (box.max.x() <= box.min.x() || box.max.y() <= box.min.y()) {
    throw Error("degenerate map bounding box (zero extent in x or y)");
  }
  cfg.origin_x = std::floor(box.min.x() / cfg.res_g) * cfg.res_g;
  cfg.origin_y = std::floor(box.min.y() / cfg.res_g) * cfg.res_g;
  cfg.n1 = static_cast<std::size_t>(std::floor((box.max.x() - cfg.origin_x) / cfg.res_g)) + 1;
  cfg.n2 = static_cast<std::size_t>(std::floor((box.max.y() - cfg.origin_y) / cfg.res_g)) + 1;
  cfg.z_floor = box.min.z();
  cfg.validate();
  return cfg;
}

}  // namespace ghostsweep
