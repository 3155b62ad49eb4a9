#include "ghostsweep/point_cloud.hpp"

#include <algorithm>

namespace ghostsweep {

bool LabeledCloud::has_labels() const {
  return std::any_of(points.begin(), points.end(),
                     [](const Point& p) { return p.label != Label::Unlabeled; });
}

BoundingBox LabeledCloud::bounding_box() const {
  if (points.empty()) throw Error("bounding box of an empty cloud");
  BoundingBox box{Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()),
                  Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& p : points) {
    const Eigen::Vector3d v(p.x, p.y, p.z);
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

}  // namespace ghostsweep
