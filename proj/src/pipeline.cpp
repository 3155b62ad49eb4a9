#include "ghostsweep/pipeline.hpp"

#include "ghostsweep/log.hpp"

namespace ghostsweep {

Pipeline::Pipeline(const LabeledCloud& map, const GridOverrides& overrides, PipelineOptions options)
    : map_(map), renumbered_(map.points) {
  for (std::size_t n = 0; n < renumbered_.size(); ++n) renumbered_[n].index = static_cast<PointIndex>(n);
  config_ = make_grid_config(map, overrides);
  ground_ = coarse_ground(lowest_heights(renumbered_, config_), config_);
  matrix_ = std::make_unique<EncodedMatrix>(encode(renumbered_, config_, ground_.g, BucketMode::WithBuckets));
  state_ = std::make_unique<RemovalState>(*matrix_, renumbered_, options);
  log().info("grid {}x{} cells, res_g {} res_h {} n_bit {}; {} map points, {} below base", config_.n1, config_.n2,
             config_.res_g, config_.res_h, config_.n_bit, renumbered_.size(), matrix_->below_base());
}

std::vector<double> Pipeline::scan_seconds() const {
  std::vector<double> out;
  for (const ScanStats& s : state_->history()) out.push_back(s.elapsed_ms / 1000.0);
  return out;
}

Partition Pipeline::finalize() const {
  Partition part;
  part.static_cloud.source_path = map_.source_path;
  part.dynamic_cloud.source_path = map_.source_path;
  for (std::size_t n = 0; n < map_.points.size(); ++n) {
    (state_->is_flagged(static_cast<PointIndex>(n)) ? part.dynamic_cloud : part.static_cloud)
        .points.push_back(map_.points[n]);
  }
  return part;
}

std::vector<PointIndex> Pipeline::retained_indices() const {
  std::vector<PointIndex> out;
  for (std::size_t n = 0; n < map_.points.size(); ++n) {
    if (!state_->is_flagged(static_cast<PointIndex>(n))) out.push_back(map_.points[n].index);
  }
  return out;
}

}  // namespace ghostsweep
