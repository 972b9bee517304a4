#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "iflow/flowops.hpp"
#include "oracles.hpp"

using namespace iflow;

namespace {

PixelSet set_of(GridDims dims, std::initializer_list<PixelPos> pts) {
  return PixelSet::from_positions(dims, std::vector<PixelPos>(pts));
}

FlowField uniform_flow(GridDims dims, double vx, double vy) {
  FlowField f(dims);
  f.dx.setConstant(float(vx));
  f.dy.setConstant(float(vy));
  return f;
}

DenseFlow constant_dense(const PixelSet& mask, double vx, double vy) {
  DenseFlow d{mask.positions(), {}};
  d.vectors = Eigen::Matrix2Xd(2, Eigen::Index(d.pixels.size()));
  d.vectors.row(0).setConstant(vx);
  d.vectors.row(1).setConstant(vy);
  return d;
}

Bitmap random_bitmap(std::mt19937& rng, int h, int w, double density) {
  std::bernoulli_distribution on(density);
  Bitmap b(h, w);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = on(rng);
  return b;
}

}  // namespace

// ---------------------------------------------------------------- valid_instance_flow

TEST(ValidInstanceFlow, FullValidity) {
  const GridDims dims{3, 3};
  const auto mask = set_of(dims, {{0, 0}, {1, 0}});
  EXPECT_EQ(valid_instance_flow(mask, FlowField(dims)).size(), 2u);
}

TEST(ValidInstanceFlow, NoValidity) {
  const GridDims dims{3, 3};
  FlowField f(dims);
  f.valid.setConstant(false);
  EXPECT_TRUE(valid_instance_flow(set_of(dims, {{0, 0}, {1, 0}}), f).empty());
}

TEST(ValidInstanceFlow, Intersection) {
  const GridDims dims{3, 3};
  FlowField f(dims);
  f.valid.setConstant(false);
  f.set({1, 0}, 0.5, 0.25);
  const auto s = valid_instance_flow(set_of(dims, {{0, 0}, {1, 0}}), f);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].pos, (PixelPos{1, 0}));
  EXPECT_DOUBLE_EQ(s[0].vec.x(), 0.5);
}

TEST(ValidInstanceFlow, DimsMismatch) {
  EXPECT_THROW(valid_instance_flow(set_of({3, 3}, {{0, 0}}), FlowField({4, 3})), DimsMismatch);
}

// ---------------------------------------------------------------- interpolation

TEST(InterpolateInstanceFlow, ConstantFieldAtSquareCorners) {
  const GridDims dims{5, 5};
  PixelSet mask(dims);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) mask.insert({x, y});
  std::vector<SparseFlowSample> s;
  for (PixelPos p : {PixelPos{0, 0}, PixelPos{4, 0}, PixelPos{0, 4}, PixelPos{4, 4}})
    s.push_back({p, {2, 0}});
  const DenseFlow d = interpolate_instance_flow(mask, s);
  const auto it = std::find(d.pixels.begin(), d.pixels.end(), PixelPos{2, 2});
  const auto v = d.vectors.col(it - d.pixels.begin());
  EXPECT_NEAR(v.x(), 2.0, 1e-12);
  EXPECT_NEAR(v.y(), 0.0, 1e-12);
}

TEST(InterpolateInstanceFlow, ReproducesAffineField) {
  // Field (x/2, 0); at (2,1) the affine function evaluates to (1, 0).
  const GridDims dims{5, 5};
  const auto mask = set_of(dims, {{2, 1}});
  std::vector<SparseFlowSample> s{{{0, 0}, {0.0, 0}}, {{4, 0}, {2.0, 0}}, {{0, 4}, {0.0, 0}}};
  const DenseFlow d = interpolate_instance_flow(mask, s);
  EXPECT_NEAR(d.vectors(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(d.vectors(1, 0), 0.0, 1e-12);
}

TEST(InterpolateInstanceFlow, SingleSampleIsNearestEverywhere) {
  const GridDims dims{4, 4};
  const auto mask = set_of(dims, {{0, 0}, {3, 3}, {1, 2}});
  std::vector<SparseFlowSample> s{{{0, 0}, {3, -1}}};
  const DenseFlow d = interpolate_instance_flow(mask, s);
  for (Eigen::Index k = 0; k < d.vectors.cols(); ++k) {
    EXPECT_EQ(d.vectors(0, k), 3.0);
    EXPECT_EQ(d.vectors(1, k), -1.0);
  }
}

TEST(InterpolateInstanceFlow, NoSamplesThrows) {
  EXPECT_THROW(interpolate_instance_flow(set_of({3, 3}, {{1, 1}}), {}), NoSamples);
}

TEST(InterpolateInstanceFlow, CollinearSamplesFallBackToNearest) {
  const GridDims dims{8, 3};
  PixelSet mask(dims);
  for (int x = 0; x < 8; ++x) mask.insert({x, 1});
  std::vector<SparseFlowSample> s{{{0, 1}, {1, 0}}, {{4, 1}, {5, 0}}, {{7, 1}, {8, 0}}};
  const DenseFlow d = interpolate_instance_flow(mask, s);
  // x=1 is nearest to x=0, x=3 nearest to x=4, x=6 nearest to x=7.
  EXPECT_EQ(d.vectors(0, 1), 1.0);
  EXPECT_EQ(d.vectors(0, 3), 5.0);
  EXPECT_EQ(d.vectors(0, 6), 8.0);
}

// Inside the hull: convex combination of samples. Outside: exactly some nearest sample.
TEST(InterpolateInstanceFlowProperty, LocalityAndAffineExactness) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const GridDims dims{20, 20};
    PixelSet mask(dims);
    const Bitmap b = random_bitmap(rng, 20, 20, 0.5);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x)
        if (b(y, x)) mask.insert({x, y});
    const auto px = mask.positions();
    if (px.size() < 3) continue;
    const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng);
    const double b0 = coef(rng), b1 = coef(rng), b2 = coef(rng);
    std::vector<SparseFlowSample> s;
    std::vector<PixelPos> sites;
    for (const auto& p : px)
      if (rng() % 5 == 0) {
        s.push_back({p, {a0 + a1 * p.x + a2 * p.y, b0 + b1 * p.x + b2 * p.y}});
        sites.push_back(p);
      }
    if (s.empty()) continue;
    const auto hull = oracle::convex_hull(sites);
    const DenseFlow d = interpolate_instance_flow(mask, s);
    for (std::size_t k = 0; k < d.pixels.size(); ++k) {
      const PixelPos p = d.pixels[k];
      const Eigen::Vector2d v = d.vectors.col(Eigen::Index(k));
      if (oracle::in_hull(hull, p)) {
        EXPECT_NEAR(v.x(), a0 + a1 * p.x + a2 * p.y, 1e-9);
        EXPECT_NEAR(v.y(), b0 + b1 * p.x + b2 * p.y, 1e-9);
      } else {
        bool hit = false;
        for (int i : oracle::nearest_sites(sites, p)) hit = hit || v == s[i].vec;
        EXPECT_TRUE(hit);
      }
    }
  }
}

// ---------------------------------------------------------------- predict_mask

TEST(PredictMask, UnitShift) {
  const GridDims dims{5, 5};
  const auto m = set_of(dims, {{2, 2}});
  EXPECT_EQ(predict_mask(constant_dense(m, 1, -1), dims).pixels, set_of(dims, {{3, 1}}));
}

TEST(PredictMask, ZeroFlowIsIdentity) {
  const GridDims dims{6, 6};
  const auto m = set_of(dims, {{0, 0}, {2, 3}, {5, 5}});
  EXPECT_EQ(predict_mask(constant_dense(m, 0, 0), dims).pixels, m);
}

TEST(PredictMask, DropsTargetsOutsideGrid) {
  const GridDims dims{4, 4};
  EXPECT_TRUE(predict_mask(constant_dense(set_of(dims, {{3, 3}}), 2, 0), dims).pixels.empty());
}

TEST(PredictMask, RoundsHalfAwayFromZero) {
  const GridDims dims{4, 4};
  // (0.6, -0.4) rounds to (1, 0); (0.5, 1.5) to (1, 2); (-0.5) from x=1 to 0.5 -> 1.
  EXPECT_EQ(predict_mask(constant_dense(set_of(dims, {{0, 0}}), 0.6, -0.4), dims).pixels,
            set_of(dims, {{1, 0}}));
  EXPECT_EQ(predict_mask(constant_dense(set_of(dims, {{0, 0}}), 0.5, 1.5), dims).pixels,
            set_of(dims, {{1, 2}}));
  EXPECT_EQ(predict_mask(constant_dense(set_of(dims, {{1, 0}}), -0.5, 0), dims).pixels,
            set_of(dims, {{1, 0}}));
}

TEST(PredictMaskProperty, IntegerFlowEqualsClippedTranslation) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const GridDims dims{12, 9};
    const Bitmap b = random_bitmap(rng, 9, 12, 0.3);
    const PixelSet m(dims, b);
    const int dx = int(rng() % 9) - 4, dy = int(rng() % 9) - 4;
    PixelSet expect(dims);
    for (const PixelPos& p : m.positions())
      if (in_bounds(dims, {p.x + dx, p.y + dy})) expect.insert({p.x + dx, p.y + dy});
    EXPECT_EQ(predict_mask(constant_dense(m, dx, dy), dims).pixels, expect);
  }
}

// ---------------------------------------------------------------- close_mask

TEST(CloseMask, EmptyStaysEmpty) { EXPECT_TRUE(close_mask(PixelSet({5, 5}), 2).empty()); }

TEST(CloseMask, SolidSquareUnchanged) {
  const GridDims dims{9, 9};
  PixelSet sq(dims);
  for (int y = 2; y < 7; ++y)
    for (int x = 2; x < 7; ++x) sq.insert({x, y});
  EXPECT_EQ(PixelSet(dims, oracle::close(sq.bits(), 1)), sq);
  EXPECT_EQ(close_mask(sq, 1), sq);
}

TEST(CloseMask, FillsOnePixelGap) {
  const GridDims dims{3, 1};
  const auto gap = set_of(dims, {{0, 0}, {2, 0}});
  const auto filled = set_of(dims, {{0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(PixelSet(dims, oracle::close(gap.bits(), 1)), filled);
  EXPECT_EQ(close_mask(gap, 1), filled);
}

TEST(CloseMask, RadiusZeroIsIdentity) {
  const GridDims dims{5, 5};
  const auto m = set_of(dims, {{0, 0}, {2, 0}, {4, 4}});
  EXPECT_EQ(close_mask(m, 0), m);
}

TEST(CloseMask, NegativeRadiusThrows) {
  EXPECT_THROW(close_mask(PixelSet({3, 3}), -1), InvalidArgument);
}

TEST(CloseMaskProperty, MatchesOracleAndIsExtensiveIncreasingIdempotent) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 150; ++trial) {
    const int h = 1 + int(rng() % 32), w = 1 + int(rng() % 32), r = int(rng() % 4);
    const GridDims dims{w, h};
    const Bitmap a = random_bitmap(rng, h, w, 0.15 + 0.5 * (trial % 3) / 3.0);
    Bitmap b = a;
    const Bitmap extra = random_bitmap(rng, h, w, 0.1);
    b = b || extra;
    const PixelSet A(dims, a), B(dims, b);
    const PixelSet ca = close_mask(A, r);
    EXPECT_EQ(ca, PixelSet(dims, oracle::close(a, r)));
    EXPECT_TRUE((ca.bits() || !a).all());                      // extensive
    EXPECT_TRUE((close_mask(B, r).bits() || !ca.bits()).all()); // increasing
    EXPECT_EQ(close_mask(ca, r), ca);                           // idempotent
  }
}

// ---------------------------------------------------------------- dense_predict

TEST(DensePredict, RigidTranslation) {
  const GridDims dims{20, 12};
  PixelSet m(dims);
  for (int y = 3; y < 8; ++y)
    for (int x = 2; x < 9; ++x) m.insert({x, y});
  const PredictedMask p = dense_predict(m, uniform_flow(dims, 3, 0), 1);
  PixelSet expect(dims);
  for (const PixelPos& q : m.positions()) expect.insert({q.x + 3, q.y});
  EXPECT_EQ(p.pixels, expect);
  EXPECT_EQ(p.pixels.size(), m.size());
}

TEST(DensePredict, SparseRigidTranslation) {
  const GridDims dims{20, 12};
  PixelSet m(dims);
  for (int y = 3; y < 8; ++y)
    for (int x = 2; x < 9; ++x) m.insert({x, y});
  FlowField f = uniform_flow(dims, -2, 1);
  f.valid.setConstant(false);
  for (PixelPos p : {PixelPos{2, 3}, PixelPos{8, 3}, PixelPos{5, 7}}) f.valid(p.y, p.x) = true;
  PixelSet expect(dims);
  for (const PixelPos& q : m.positions()) expect.insert({q.x - 2, q.y + 1});
  EXPECT_EQ(dense_predict(m, f, 1).pixels, expect);
}

TEST(DensePredict, ZeroFlowIsClosingOfMask) {
  const GridDims dims{10, 10};
  const auto m = set_of(dims, {{3, 3}, {5, 3}, {4, 5}});
  EXPECT_EQ(dense_predict(m, FlowField(dims), 1).pixels, close_mask(m, 1));
}

TEST(DensePredict, LeavingFrameGivesEmpty) {
  const GridDims dims{10, 10};
  const auto m = set_of(dims, {{3, 3}, {4, 3}});
  EXPECT_TRUE(dense_predict(m, uniform_flow(dims, 20, 0), 1).pixels.empty());
}

TEST(DensePredict, NoValidFlowThrows) {
  const GridDims dims{10, 10};
  FlowField f(dims);
  f.valid.setConstant(false);
  EXPECT_THROW(dense_predict(set_of(dims, {{3, 3}}), f, 1), NoSamples);
}

// ---------------------------------------------------------------- block matching

namespace {

GrayImage textured(GridDims dims, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> level(0, 255);
  GrayImage img(dims);
  for (Eigen::Index i = 0; i < img.intensity.size(); ++i) img.intensity.data()[i] = level(rng) / 255.0f;
  return img;
}

GrayImage shifted(const GrayImage& src, int sx, int sy, unsigned seed) {
  GrayImage out = textured(src.dims, seed);  // fresh content where nothing maps in
  for (int y = 0; y < src.dims.height; ++y)
    for (int x = 0; x < src.dims.width; ++x)
      if (in_bounds(src.dims, {x - sx, y - sy})) out.intensity(y, x) = src.intensity(y - sy, x - sx);
  return out;
}

}  // namespace

TEST(BlockMatchFlow, RecoversShift) {
  const GridDims dims{64, 48};
  const GrayImage a = textured(dims, 1);
  const FlowField f = block_match_flow(a, shifted(a, 4, 1, 2), {7, 5, 1e-3});
  int valid = 0;
  for (int y = 0; y < dims.height; ++y)
    for (int x = 0; x < dims.width; ++x) {
      if (!f.valid(y, x)) continue;
      ++valid;
      EXPECT_EQ(f.dx(y, x), 4.0f);
      EXPECT_EQ(f.dy(y, x), 1.0f);
    }
  EXPECT_GT(valid, 0);
}

TEST(BlockMatchFlow, StaticPairGivesZero) {
  const GridDims dims{40, 40};
  const GrayImage a = textured(dims, 3);
  const FlowField f = block_match_flow(a, a, {5, 3, 1e-3});
  EXPECT_GT(f.valid.count(), 0);
  EXPECT_TRUE((f.valid == false || (f.dx == 0.0f && f.dy == 0.0f)).all());
}

TEST(BlockMatchFlow, UniformImageHasNoValidPixels) {
  GrayImage a({40, 40});
  a.intensity.setConstant(0.5f);
  EXPECT_EQ(block_match_flow(a, a, {5, 3, 1e-4}).valid.count(), 0);
}

TEST(BlockMatchFlow, RejectsBadArguments) {
  GrayImage a({10, 10}), b({11, 10});
  EXPECT_THROW(block_match_flow(a, b), DimsMismatch);
  EXPECT_THROW(block_match_flow(a, a, {4, 2, 0.0}), InvalidArgument);
  EXPECT_THROW(block_match_flow(a, a, {3, -1, 0.0}), InvalidArgument);
}
