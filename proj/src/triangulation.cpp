#include "iflow/triangulation.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace iflow {

__int128 incircle(PixelPos a, PixelPos b, PixelPos c, PixelPos d) {
  const __int128 adx = a.x - d.x, ady = a.y - d.y;
  const __int128 bdx = b.x - d.x, bdy = b.y - d.y;
  const __int128 cdx = c.x - d.x, cdy = c.y - d.y;
  const __int128 alift = adx * adx + ady * ady;
  const __int128 blift = bdx * bdx + bdy * bdy;
  const __int128 clift = cdx * cdx + cdy * cdy;
  return adx * (bdy * clift - blift * cdy) - ady * (bdx * clift - blift * cdx) +
         alift * (bdx * cdy - bdy * cdx);
}

namespace {

std::uint64_t edge_key(int a, int b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

int third_vertex(const TriangleIndices& t, int a, int b) {
  for (int i = 0; i < 3; ++i)
    if (t[i] == a && t[(i + 1) % 3] == b) return t[(i + 2) % 3];
  return -1;
}

TriangleIndices canonical(TriangleIndices t) {
  auto first = std::min_element(t.begin(), t.end());
  std::rotate(t.begin(), first, t.end());
  return t;
}

}  // namespace

std::vector<TriangleIndices> delaunay(std::span<const PixelPos> points) {
  const int n = int(points.size());
  if (n < 3) return {};

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const PixelPos &p = points[i], &q = points[j];
    return p.x != q.x ? p.x < q.x : p.y < q.y;
  });

  // Sweep in x: each new point sees a contiguous run of the current hull's
  // lower and upper chains, and every strictly visible edge spawns a triangle.
  // Collinear hull vertices stay on the chains so no T-junctions appear.
  std::vector<TriangleIndices> tris;
  std::vector<int> lower, upper;
  for (int idx : order) {
    const PixelPos p = points[idx];
    while (lower.size() >= 2) {
      const int a = lower[lower.size() - 2], b = lower.back();
      if (orient2d(points[a], points[b], p) >= 0) break;
      tris.push_back({a, idx, b});
      lower.pop_back();
    }
    lower.push_back(idx);
    while (upper.size() >= 2) {
      const int a = upper[upper.size() - 2], b = upper.back();
      if (orient2d(points[a], points[b], p) <= 0) break;
      tris.push_back({a, b, idx});
      upper.pop_back();
    }
    upper.push_back(idx);
  }
  if (tris.empty()) return {};

  std::unordered_map<std::uint64_t, int> owner;
  owner.reserve(tris.size() * 3);
  auto attach = [&](int t) {
    for (int i = 0; i < 3; ++i) owner[edge_key(tris[t][i], tris[t][(i + 1) % 3])] = t;
  };
  auto detach = [&](int t) {
    for (int i = 0; i < 3; ++i) owner.erase(edge_key(tris[t][i], tris[t][(i + 1) % 3]));
  };

  std::vector<std::pair<int, int>> pending;
  for (int t = 0; t < int(tris.size()); ++t) {
    attach(t);
    for (int i = 0; i < 3; ++i) pending.emplace_back(tris[t][i], tris[t][(i + 1) % 3]);
  }

  while (!pending.empty()) {
    const auto [a, b] = pending.back();
    pending.pop_back();
    const auto left = owner.find(edge_key(a, b));
    const auto right = owner.find(edge_key(b, a));
    if (left == owner.end() || right == owner.end()) continue;
    const int t1 = left->second, t2 = right->second;
    const int c = third_vertex(tris[t1], a, b);
    const int d = third_vertex(tris[t2], b, a);
    if (incircle(points[a], points[b], points[c], points[d]) <= 0) continue;

    detach(t1);
    detach(t2);
    tris[t1] = {a, d, c};
    tris[t2] = {d, b, c};
    attach(t1);
    attach(t2);
    pending.emplace_back(a, d);
    pending.emplace_back(d, b);
    pending.emplace_back(b, c);
    pending.emplace_back(c, a);
  }

  for (auto& t : tris) t = canonical(t);
  std::sort(tris.begin(), tris.end());
  return tris;
}

}  // namespace iflow
