#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "iflow/core.hpp"

namespace iflow {

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline std::int64_t orient2d(PixelPos a, PixelPos b, PixelPos c) {
  return std::int64_t(b.x - a.x) * (c.y - a.y) - std::int64_t(b.y - a.y) * (c.x - a.x);
}

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c). Exact for pixel coordinates.
__int128 incircle(PixelPos a, PixelPos b, PixelPos c, PixelPos d);

using TriangleIndices = std::array<int, 3>;

/// Delaunay triangulation of distinct integer points using a sweep-line
/// triangulation followed by Lawson edge flips. Triangles are counter-clockwise,
/// rotated so the smallest index comes first, and sorted lexicographically.
/// Returns an empty list when the points are fewer than three or collinear.
std::vector<TriangleIndices> delaunay(std::span<const PixelPos> points);

}  // namespace iflow
