#include "iflow/association.hpp"

#include <algorithm>
#include <optional>

namespace iflow {

namespace {

std::optional<Box> bounds(const PixelSet& s) {
  if (s.empty()) return std::nullopt;
  return bbox_of(s);
}

}  // namespace

AffinityMatrix affinity(std::span<const PredictedMask> predictions,
                        std::span<const InstanceMask> detections) {
  AffinityMatrix a = AffinityMatrix::Zero(Eigen::Index(predictions.size()),
                                          Eigen::Index(detections.size()));
  std::vector<std::optional<Box>> det_boxes;
  for (const auto& d : detections) det_boxes.push_back(bounds(d.pixels()));

  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const PixelSet& p = predictions[i].pixels;
    const auto pb = bounds(p);
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const PixelSet& d = detections[j].pixels();
      if (p.dims() != d.dims()) throw DimsMismatch("prediction and detection grids differ");
      if (!pb || !det_boxes[j]) continue;
      // Count only inside the overlap of the two bounding boxes.
      const Box& db = *det_boxes[j];
      const int x0 = std::max(pb->left, db.left), y0 = std::max(pb->top, db.top);
      const int x1 = std::min(pb->left + pb->width, db.left + db.width);
      const int y1 = std::min(pb->top + pb->height, db.top + db.height);
      if (x1 <= x0 || y1 <= y0) continue;
      a(Eigen::Index(i), Eigen::Index(j)) =
          (p.bits().block(y0, x0, y1 - y0, x1 - x0) && d.bits().block(y0, x0, y1 - y0, x1 - x0))
              .count();
    }
  }
  return a;
}

}  // namespace iflow
