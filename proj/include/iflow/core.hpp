#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "iflow/errors.hpp"

namespace iflow {

/// Row-major 2D array indexed (y, x). All per-pixel storage uses this layout.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Bitmap = Plane<bool>;

struct GridDims {
  int width = 0;
  int height = 0;

  std::size_t area() const { return std::size_t(width) * std::size_t(height); }
  bool valid() const { return width >= 1 && height >= 1; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// 0-based pixel position; x is the column, y the row.
struct PixelPos {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPos&, const PixelPos&) = default;
  // Row-major order, the order positions() enumerates in.
  friend std::strong_ordering operator<=>(const PixelPos& a, const PixelPos& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline bool in_bounds(const GridDims& dims, PixelPos p) {
  return p.x >= 0 && p.y >= 0 && p.x < dims.width && p.y < dims.height;
}

/// Axis-aligned box in pixels, inclusive of its first row/column.
struct Box {
  int left = 0;
  int top = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

/// A set of pixel positions on a fixed grid, stored as one bit per cell.
/// Membership is O(1); intersection counting is linear in the grid area.
class PixelSet {
public:
  PixelSet() = default;
  explicit PixelSet(GridDims dims);
  PixelSet(GridDims dims, Bitmap bits);

  static PixelSet from_positions(GridDims dims, std::span<const PixelPos> positions);

  GridDims dims() const { return dims_; }
  const Bitmap& bits() const { return bits_; }

  bool contains(PixelPos p) const { return in_bounds(dims_, p) && bits_(p.y, p.x); }
  void insert(PixelPos p);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Row-major sorted list of member positions.
  std::vector<PixelPos> positions() const;

  friend bool operator==(const PixelSet& a, const PixelSet& b) {
    return a.dims_ == b.dims_ && a.count_ == b.count_ && (a.bits_ == b.bits_).all();
  }

private:
  GridDims dims_{};
  Bitmap bits_;
  std::size_t count_ = 0;
};

/// #(a ∩ b). Throws DimsMismatch when the grids differ.
std::size_t intersection_count(const PixelSet& a, const PixelSet& b);

/// Tightest box containing every member. Throws EmptyMask on an empty set.
Box bbox_of(const PixelSet& pixels);

/// One segmented instance in one frame. Never empty.
class InstanceMask {
public:
  InstanceMask(PixelSet pixels, int frame, int instance, int category = 1);

  int frame() const { return frame_; }
  int instance() const { return instance_; }
  int category() const { return category_; }
  const PixelSet& pixels() const { return pixels_; }
  GridDims dims() const { return pixels_.dims(); }
  std::size_t area() const { return pixels_.size(); }

private:
  PixelSet pixels_;
  int frame_;
  int instance_;
  int category_;
};

/// Builds a mask from a position list, collapsing duplicates.
/// Throws EmptyMask for an empty list and OutOfBounds for positions off the grid.
InstanceMask mask_from_positions(std::span<const PixelPos> positions, GridDims dims, int frame,
                                 int instance, int category = 1);

inline Box bbox_of(const InstanceMask& mask) { return bbox_of(mask.pixels()); }

/// Dense displacement field with a per-pixel validity flag. Vectors are stored
/// as float, the native precision of the .flo format.
struct FlowField {
  GridDims dims;
  Plane<float> dx;
  Plane<float> dy;
  Bitmap valid;

  FlowField() = default;
  /// Zero displacement everywhere, all valid.
  explicit FlowField(GridDims dims);

  bool is_valid(PixelPos p) const { return valid(p.y, p.x); }
  Eigen::Vector2d at(PixelPos p) const { return {dx(p.y, p.x), dy(p.y, p.x)}; }
  void set(PixelPos p, double vx, double vy, bool ok = true) {
    dx(p.y, p.x) = float(vx);
    dy(p.y, p.x) = float(vy);
    valid(p.y, p.x) = ok;
  }
};

/// Single-channel intensity image in [0, 1].
template <typename Scalar = float>
struct GrayImageT {
  GridDims dims;
  Plane<Scalar> intensity;

  GrayImageT() = default;
  explicit GrayImageT(GridDims d) : dims(d), intensity(Plane<Scalar>::Zero(d.height, d.width)) {}
};

using GrayImage = GrayImageT<float>;

struct TrackerConfig {
  int md = 1;               // allowed consecutive missed detections
  int closing_radius = 1;   // square structuring element side 2r+1
  bool zero_flow = false;   // ablation: predict with identity motion
  bool emit_coasted = true;
  int min_mask_area = 1;    // smaller detections are dropped

  void validate() const;
};

struct Track {
  int id = 0;
  PixelSet mask;
  int missed = 0;
  int born = 0;
  int last_matched = 0;
};

struct TrackerState {
  std::vector<Track> tracks;
  int next_id = 1;
  int frame = 0;
  TrackerConfig config;
};

}  // namespace iflow
