#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "iflow/core.hpp"
#include "iflow/triangulation.hpp"

namespace iflow {

template <typename Scalar>
using VectorField2 = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

/// Piecewise-linear interpolation of 2-vectors given at integer sites.
///
/// Queries inside (or on the boundary of) the convex hull of the sites are
/// interpolated barycentrically over the Delaunay triangulation; a query on a
/// shared edge takes the first containing triangle in canonical order.
/// Queries outside the hull, or every query when the sites are collinear,
/// copy the value of the nearest site (ties go to the row-major smallest
/// site). Duplicate sites keep their first value. Column k of the result
/// belongs to queries[k].
template <typename Scalar>
VectorField2<Scalar> interpolate_scattered(std::span<const PixelPos> sites,
                                           const VectorField2<Scalar>& values,
                                           std::span<const PixelPos> queries) {
  if (sites.empty()) throw NoSamples("interpolation needs at least one site");
  if (Eigen::Index(sites.size()) != values.cols())
    throw InvalidArgument("site and value counts differ");

  // Unique sites in row-major order.
  std::vector<int> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sites[a] < sites[b]; });
  std::vector<PixelPos> pts;
  std::vector<int> source;
  for (int i : order) {
    if (!pts.empty() && pts.back() == sites[i]) continue;
    pts.push_back(sites[i]);
    source.push_back(i);
  }

  VectorField2<Scalar> out(2, Eigen::Index(queries.size()));
  std::vector<bool> done(queries.size(), false);
  if (queries.empty()) return out;

  int qx0 = queries[0].x, qx1 = qx0, qy0 = queries[0].y, qy1 = qy0;
  for (const PixelPos& q : queries) {
    qx0 = std::min(qx0, q.x);
    qx1 = std::max(qx1, q.x);
    qy0 = std::min(qy0, q.y);
    qy1 = std::max(qy1, q.y);
  }
  // Bucket queries by cell so each triangle only visits its own bounding box.
  Plane<int> head = Plane<int>::Constant(qy1 - qy0 + 1, qx1 - qx0 + 1, -1);
  std::vector<int> next(queries.size(), -1);
  for (int k = int(queries.size()) - 1; k >= 0; --k) {
    int& h = head(queries[k].y - qy0, queries[k].x - qx0);
    next[k] = h;
    h = k;
  }

  for (const TriangleIndices& t : delaunay(pts)) {
    const PixelPos a = pts[t[0]], b = pts[t[1]], c = pts[t[2]];
    const auto area = Scalar(orient2d(a, b, c));
    const int x0 = std::max(qx0, std::min({a.x, b.x, c.x}));
    const int x1 = std::min(qx1, std::max({a.x, b.x, c.x}));
    const int y0 = std::max(qy0, std::min({a.y, b.y, c.y}));
    const int y1 = std::min(qy1, std::max({a.y, b.y, c.y}));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        int k = head(y - qy0, x - qx0);
        if (k < 0 || done[k]) continue;
        const PixelPos p{x, y};
        const std::int64_t wa = orient2d(b, c, p), wb = orient2d(c, a, p), wc = orient2d(a, b, p);
        if (wa < 0 || wb < 0 || wc < 0) continue;
        const auto v = ((Scalar(wa) * values.col(source[t[0]]) + Scalar(wb) * values.col(source[t[1]]) +
                         Scalar(wc) * values.col(source[t[2]])) /
                        area)
                           .eval();
        for (; k >= 0; k = next[k]) {
          out.col(k) = v;
          done[k] = true;
        }
      }
    }
  }

  for (std::size_t k = 0; k < queries.size(); ++k) {
    if (done[k]) continue;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    int best_i = 0;
    for (int i = 0; i < int(pts.size()); ++i) {
      const std::int64_t ddx = pts[i].x - queries[k].x, ddy = pts[i].y - queries[k].y;
      const std::int64_t d2 = ddx * ddx + ddy * ddy;
      if (d2 < best) {
        best = d2;
        best_i = i;
      }
    }
    out.col(Eigen::Index(k)) = values.col(source[best_i]);
  }
  return out;
}

}  // namespace iflow
