#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "iflow/core.hpp"

namespace iflow {

/// A flow vector at a pixel where the estimator produced a value.
struct SparseFlowSample {
  PixelPos pos;
  Eigen::Vector2d vec;
};

/// Displacement for every pixel of a mask; column k belongs to pixels[k].
struct DenseFlow {
  std::vector<PixelPos> pixels;
  Eigen::Matrix2Xd vectors;
};

struct PredictedMask {
  int source_track = 0;
  PixelSet pixels;
  int frame = 0;
};

/// Samples at pixels that are both in the mask and flagged valid in the flow.
std::vector<SparseFlowSample> valid_instance_flow(const PixelSet& mask, const FlowField& flow);
inline std::vector<SparseFlowSample> valid_instance_flow(const InstanceMask& mask,
                                                         const FlowField& flow) {
  return valid_instance_flow(mask.pixels(), flow);
}

/// Densifies an instance's own flow samples over every pixel of the mask:
/// linear inside the samples' convex hull, nearest sample outside it.
/// Throws NoSamples when samples is empty.
DenseFlow interpolate_instance_flow(const PixelSet& mask, std::span<const SparseFlowSample> samples);
inline DenseFlow interpolate_instance_flow(const InstanceMask& mask,
                                           std::span<const SparseFlowSample> samples) {
  return interpolate_instance_flow(mask.pixels(), samples);
}

/// Moves each pixel by its displacement, rounding half away from zero.
/// Targets outside dims are dropped.
PredictedMask predict_mask(const DenseFlow& dense_flow, GridDims dims);

/// Binary closing (dilate, then erode) with a (2r+1)-square element clipped to
/// the grid. Radius 0 is the identity.
PixelSet close_mask(const PixelSet& pixels, int radius);

/// valid_instance_flow -> interpolate_instance_flow -> predict_mask -> close_mask.
/// Throws DimsMismatch and NoSamples.
PredictedMask dense_predict(const PixelSet& mask, const FlowField& flow, int radius);
inline PredictedMask dense_predict(const InstanceMask& mask, const FlowField& flow, int radius) {
  return dense_predict(mask.pixels(), flow, radius);
}

/// Prediction under identity motion: the closed mask itself.
PredictedMask identity_predict(const PixelSet& mask, int radius);

struct BlockMatchParams {
  int block = 9;              // odd block side; also the sampling stride
  int search = 8;             // displacement range [-search, search] per axis
  double min_texture = 1e-3;  // minimum intensity variance inside the block
};

/// Sum-of-squared-differences block matching on a stride grid. Only block
/// centers whose texture passes min_texture and whose whole search window
/// fits inside the image get a valid vector; every other pixel is invalid.
FlowField block_match_flow(const GrayImage& prev, const GrayImage& next,
                           const BlockMatchParams& params = {});

}  // namespace iflow
