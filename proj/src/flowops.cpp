#include "iflow/flowops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iflow/interpolation.hpp"

namespace iflow {

std::vector<SparseFlowSample> valid_instance_flow(const PixelSet& mask, const FlowField& flow) {
  if (mask.dims() != flow.dims) throw DimsMismatch("mask and flow field grids differ");
  std::vector<SparseFlowSample> samples;
  for (const PixelPos& p : mask.positions())
    if (flow.is_valid(p)) samples.push_back({p, flow.at(p)});
  return samples;
}

DenseFlow interpolate_instance_flow(const PixelSet& mask, std::span<const SparseFlowSample> samples) {
  if (samples.empty()) throw NoSamples("instance has no valid flow samples");
  std::vector<PixelPos> sites;
  sites.reserve(samples.size());
  VectorField2<double> values(2, Eigen::Index(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sites.push_back(samples[i].pos);
    values.col(Eigen::Index(i)) = samples[i].vec;
  }
  DenseFlow dense{mask.positions(), {}};
  dense.vectors = interpolate_scattered<double>(sites, values, dense.pixels);
  return dense;
}

PredictedMask predict_mask(const DenseFlow& dense_flow, GridDims dims) {
  PredictedMask out{0, PixelSet(dims), 0};
  for (std::size_t k = 0; k < dense_flow.pixels.size(); ++k) {
    const PixelPos& p = dense_flow.pixels[k];
    const auto v = dense_flow.vectors.col(Eigen::Index(k));
    const PixelPos target{int(std::round(p.x + v.x())), int(std::round(p.y + v.y()))};
    if (in_bounds(dims, target)) out.pixels.insert(target);
  }
  return out;
}

namespace {

// Sliding-window test along rows (axis 0) or columns (axis 1) of a window
// [i - r, i + r] clipped to the array. want_all selects erosion semantics.
Bitmap window_pass(const Bitmap& in, int r, bool along_rows, bool want_all) {
  const int rows = int(in.rows()), cols = int(in.cols());
  Bitmap out(rows, cols);
  const int lines = along_rows ? rows : cols;
  const int len = along_rows ? cols : rows;
  std::vector<int> prefix(std::size_t(len) + 1);
  for (int l = 0; l < lines; ++l) {
    prefix[0] = 0;
    for (int i = 0; i < len; ++i)
      prefix[i + 1] = prefix[i] + (along_rows ? in(l, i) : in(i, l));
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - r), hi = std::min(len - 1, i + r);
      const int hits = prefix[hi + 1] - prefix[lo];
      const bool v = want_all ? hits == hi - lo + 1 : hits > 0;
      (along_rows ? out(l, i) : out(i, l)) = v;
    }
  }
  return out;
}

}  // namespace

PixelSet close_mask(const PixelSet& pixels, int radius) {
  if (radius < 0) throw InvalidArgument("closing radius must be non-negative");
  if (radius == 0 || pixels.empty()) return pixels;

  // Work on the bounding box grown by 2r: dilation reaches r beyond the box
  // and erosion windows of those pixels reach another r.
  const GridDims dims = pixels.dims();
  const Box box = bbox_of(pixels);
  const int x0 = std::max(0, box.left - 2 * radius);
  const int y0 = std::max(0, box.top - 2 * radius);
  const int x1 = std::min(dims.width - 1, box.left + box.width - 1 + 2 * radius);
  const int y1 = std::min(dims.height - 1, box.top + box.height - 1 + 2 * radius);
  const Bitmap crop = pixels.bits().block(y0, x0, y1 - y0 + 1, x1 - x0 + 1);

  const Bitmap dilated = window_pass(window_pass(crop, radius, true, false), radius, false, false);
  const Bitmap closed = window_pass(window_pass(dilated, radius, true, true), radius, false, true);

  Bitmap bits = Bitmap::Constant(dims.height, dims.width, false);
  bits.block(y0, x0, closed.rows(), closed.cols()) = closed;
  return PixelSet(dims, std::move(bits));
}

PredictedMask dense_predict(const PixelSet& mask, const FlowField& flow, int radius) {
  const auto samples = valid_instance_flow(mask, flow);
  PredictedMask pred = predict_mask(interpolate_instance_flow(mask, samples), mask.dims());
  pred.pixels = close_mask(pred.pixels, radius);
  return pred;
}

PredictedMask identity_predict(const PixelSet& mask, int radius) {
  return {0, close_mask(mask, radius), 0};
}

FlowField block_match_flow(const GrayImage& prev, const GrayImage& next,
                           const BlockMatchParams& params) {
  if (prev.dims != next.dims) throw DimsMismatch("block matching needs equally sized images");
  if (params.block < 1 || params.block % 2 == 0)
    throw InvalidArgument("block size must be odd and positive");
  if (params.search < 0) throw InvalidArgument("search range must be non-negative");

  const GridDims dims = prev.dims;
  FlowField flow(dims);
  flow.valid.setConstant(false);

  const int half = params.block / 2, reach = half + params.search;
  const double n = double(params.block) * params.block;
  for (int cy = half; cy + half < dims.height; cy += params.block) {
    for (int cx = half; cx + half < dims.width; cx += params.block) {
      if (cx - reach < 0 || cy - reach < 0 || cx + reach >= dims.width ||
          cy + reach >= dims.height)
        continue;
      const auto ref =
          prev.intensity.block(cy - half, cx - half, params.block, params.block).cast<double>();
      const double mean = ref.sum() / n;
      const double variance = (ref - mean).square().sum() / n;
      if (variance < params.min_texture) continue;

      double best = std::numeric_limits<double>::infinity();
      int best_dx = 0, best_dy = 0;
      for (int dy = -params.search; dy <= params.search; ++dy) {
        for (int dx = -params.search; dx <= params.search; ++dx) {
          const double ssd = (next.intensity
                                  .block(cy + dy - half, cx + dx - half, params.block, params.block)
                                  .cast<double>() -
                              ref)
                                 .square()
                                 .sum();
          const bool shorter = dx * dx + dy * dy < best_dx * best_dx + best_dy * best_dy;
          if (ssd < best || (ssd == best && shorter)) {
            best = ssd;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      flow.set({cx, cy}, best_dx, best_dy, true);
    }
  }
  return flow;
}

}  // namespace iflow
