#pragma once

#include <memory>
#include <vector>

#include "ghostsweep/encoded_matrix.hpp"
#include "ghostsweep/grid_config.hpp"
#include "ghostsweep/ground.hpp"
#include "ghostsweep/removal.hpp"

namespace ghostsweep {

/// Owns everything derived from one map: grid, ground field, encoded matrix and removal state.
/// Map points keep their original indices in the outputs; internally they are renumbered by
/// position.
class Pipeline {
 public:
  Pipeline(const LabeledCloud& map, const GridOverrides& overrides = {}, PipelineOptions options = {});

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const GridConfig& config() const { return config_; }
  const GroundField& ground() const { return ground_; }
  const EncodedMatrix& map_matrix() const { return *matrix_; }
  const RemovalState& state() const { return *state_; }

  ScanDetection process(const ScanFrame& scan) { return state_->process_scan_detailed(scan); }

  /// Per-scan processing times in seconds.
  std::vector<double> scan_seconds() const;

  /// Partition of the input map, in input order.
  Partition finalize() const;
  /// Original indices of the points kept as static.
  std::vector<PointIndex> retained_indices() const;

 private:
  const LabeledCloud& map_;
  std::vector<Point> renumbered_;
  GridConfig config_;
  GroundField ground_;
  std::unique_ptr<EncodedMatrix> matrix_;
  std::unique_ptr<RemovalState> state_;
};

}  // namespace ghostsweep
