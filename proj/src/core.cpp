#include "iflow/core.hpp"

#include <string>

namespace iflow {

namespace {

void require_dims(const GridDims& dims) {
  if (!dims.valid()) {
    throw InvalidArgument("grid dimensions must be positive, got " + std::to_string(dims.width) +
                          "x" + std::to_string(dims.height));
  }
}

std::string describe(PixelPos p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

}  // namespace

PixelSet::PixelSet(GridDims dims) : dims_(dims) {
  require_dims(dims);
  bits_ = Bitmap::Constant(dims.height, dims.width, false);
}

PixelSet::PixelSet(GridDims dims, Bitmap bits) : dims_(dims), bits_(std::move(bits)) {
  require_dims(dims);
  if (bits_.rows() != dims.height || bits_.cols() != dims.width) {
    throw DimsMismatch("bitmap shape does not match grid dimensions");
  }
  count_ = std::size_t(bits_.count());
}

PixelSet PixelSet::from_positions(GridDims dims, std::span<const PixelPos> positions) {
  PixelSet set(dims);
  for (const PixelPos& p : positions) set.insert(p);
  return set;
}

void PixelSet::insert(PixelPos p) {
  if (!in_bounds(dims_, p)) throw OutOfBounds("pixel " + describe(p) + " outside grid");
  bool& bit = bits_(p.y, p.x);
  if (!bit) {
    bit = true;
    ++count_;
  }
}

std::vector<PixelPos> PixelSet::positions() const {
  std::vector<PixelPos> out;
  out.reserve(count_);
  for (int y = 0; y < dims_.height; ++y)
    for (int x = 0; x < dims_.width; ++x)
      if (bits_(y, x)) out.push_back({x, y});
  return out;
}

std::size_t intersection_count(const PixelSet& a, const PixelSet& b) {
  if (a.dims() != b.dims()) throw DimsMismatch("pixel sets live on different grids");
  if (a.empty() || b.empty()) return 0;
  return std::size_t((a.bits() && b.bits()).count());
}

Box bbox_of(const PixelSet& pixels) {
  if (pixels.empty()) throw EmptyMask("bounding box of an empty pixel set");
  const Bitmap& bits = pixels.bits();
  const auto rows = bits.rowwise().any().eval();
  const auto cols = bits.colwise().any().eval();
  int top = 0, bottom = int(rows.size()) - 1, left = 0, right = int(cols.size()) - 1;
  while (!rows(top)) ++top;
  while (!rows(bottom)) --bottom;
  while (!cols(left)) ++left;
  while (!cols(right)) --right;
  return {left, top, right - left + 1, bottom - top + 1};
}

InstanceMask::InstanceMask(PixelSet pixels, int frame, int instance, int category)
    : pixels_(std::move(pixels)), frame_(frame), instance_(instance), category_(category) {
  if (pixels_.empty()) throw EmptyMask("instance mask must contain at least one pixel");
}

InstanceMask mask_from_positions(std::span<const PixelPos> positions, GridDims dims, int frame,
                                 int instance, int category) {
  if (positions.empty()) throw EmptyMask("no positions given for instance mask");
  return InstanceMask(PixelSet::from_positions(dims, positions), frame, instance, category);
}

FlowField::FlowField(GridDims d)
    : dims(d),
      dx(Plane<float>::Zero(d.height, d.width)),
      dy(Plane<float>::Zero(d.height, d.width)),
      valid(Bitmap::Constant(d.height, d.width, true)) {
  require_dims(d);
}

void TrackerConfig::validate() const {
  if (md < 0) throw InvalidArgument("md must be non-negative");
  if (closing_radius < 0) throw InvalidArgument("closing_radius must be non-negative");
  if (min_mask_area < 0) throw InvalidArgument("min_mask_area must be non-negative");
}

}  // namespace iflow
