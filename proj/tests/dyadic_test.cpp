#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "nonneg/dyadic.hpp"

namespace nonneg {
namespace {

/// All CZ cubes down to `depth` levels by enumeration: an OK cube none of whose ancestors up
/// to level 0 is OK.
std::set<DyadicCube> enumerate_cz(const PointSet& e, const DyadicRegion& region, int depth) {
  std::set<DyadicCube> out;
  const std::size_t n = region.lo.size();
  for (int level = 0; level >= -depth; --level) {
    const std::int64_t f = std::int64_t{1} << -level;
    std::vector<std::int64_t> i(n);
    for (std::size_t v = 0; v < n; ++v) i[v] = region.lo[v] * f;
    while (true) {
      DyadicCube q{level, i};
      bool cz = is_ok(q, e);
      for (DyadicCube a = q; cz && a.level < 0;) {
        a = a.parent();
        cz = !is_ok(a, e);
      }
      if (cz) out.insert(q);
      std::size_t v = 0;
      for (; v < n; ++v) {
        if (++i[v] < region.hi[v] * f) break;
        i[v] = region.lo[v] * f;
      }
      if (v == n) break;
    }
  }
  return out;
}

/// Exact integer bounds of the (65/64)-dilate, in units of 2^(floor - 8).
struct ScaledBox {
  std::vector<__int128> lo, hi;
};

ScaledBox dilate_6564(const DyadicCube& q, int floor) {
  ScaledBox b;
  const int s = q.level - floor;  // side = 256 * 2^s units
  const __int128 side = static_cast<__int128>(256) << s;
  const __int128 grow = static_cast<__int128>(2) << s;  // (1/128) side on each end
  for (auto c : q.corner) {
    b.lo.push_back(static_cast<__int128>(c) * side - grow);
    b.hi.push_back(static_cast<__int128>(c + 1) * side + grow);
  }
  return b;
}

bool intersect(const ScaledBox& a, const ScaledBox& b) {
  for (std::size_t v = 0; v < a.lo.size(); ++v) {
    if (a.hi[v] < b.lo[v] || b.hi[v] < a.lo[v]) return false;
  }
  return true;
}

int min_level(const CZDecomposition& dec) {
  int m = 0;
  for (const auto& q : dec.cubes) m = std::min(m, q.level);
  return m;
}

double volume(const CZDecomposition& dec) {
  double v = 0.0;
  for (const auto& q : dec.cubes) v += std::pow(q.side(), q.dim());
  return v;
}

PointSet random_points(std::mt19937_64& rng, int n, int count, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  PointSet e;
  for (int i = 0; i < count; ++i) {
    Point x(static_cast<std::size_t>(n));
    for (auto& c : x) c = u(rng);
    e.push_back(x);
  }
  return e;
}

/// Partition, good geometry and overlap, checked exactly. Returns the largest number of
/// dilates sharing a point.
int check_geometry(const CZDecomposition& dec) {
  const int floor = min_level(dec);
  std::vector<ScaledBox> boxes;
  for (const auto& q : dec.cubes) boxes.push_back(dilate_6564(q, floor));
  // interiors disjoint and total volume exact
  for (std::size_t a = 0; a < dec.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      EXPECT_FALSE(dec.cubes[a].inside(dec.cubes[b]) || dec.cubes[b].inside(dec.cubes[a]));
    }
  }
  double region_volume = 1.0;
  for (std::size_t v = 0; v < dec.region.lo.size(); ++v) region_volume *= static_cast<double>(dec.region.hi[v] - dec.region.lo[v]);
  EXPECT_EQ(volume(dec), region_volume);
  int worst = 0;
  for (std::size_t a = 0; a < dec.size(); ++a) {
    EXPECT_LE(dec.cubes[a].level, 0);
    std::vector<std::size_t> touching;
    for (std::size_t b = 0; b < dec.size(); ++b) {
      if (!intersect(boxes[a], boxes[b])) continue;
      touching.push_back(b);
      EXPECT_LE(std::abs(dec.cubes[a].level - dec.cubes[b].level), 1) << "good geometry";
    }
    // depth of the arrangement is attained at a point whose coordinates are lower bounds
    const std::size_t n = boxes[a].lo.size();
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<__int128> x(n);
      for (std::size_t v = 0; v < n; ++v) x[v] = boxes[touching[pick[v]]].lo[v];
      int depth = 0;
      for (std::size_t b : touching) {
        bool in = true;
        for (std::size_t v = 0; v < n; ++v) in = in && boxes[b].lo[v] <= x[v] && x[v] <= boxes[b].hi[v];
        depth += in;
      }
      worst = std::max(worst, depth);
      std::size_t v = 0;
      for (; v < n; ++v) {
        if (++pick[v] < touching.size()) break;
        pick[v] = 0;
      }
      if (v == n) break;
    }
  }
  return worst;
}

TEST(Dyadic, IsOkExamples) {
  const PointSet origin{{0.0}};
  EXPECT_TRUE(is_ok(DyadicCube{0, {0}}, origin));
  EXPECT_FALSE(is_ok(DyadicCube{1, {0}}, origin));
  EXPECT_FALSE(is_ok(DyadicCube{0, {0}}, PointSet{{0.0}, {0.1}}));
  // 5Q for [0,1) is [-2,3): half-open at the right
  EXPECT_FALSE(is_ok(DyadicCube{0, {0}}, PointSet{{-2.0}, {2.5}}));
  EXPECT_TRUE(is_ok(DyadicCube{0, {0}}, PointSet{{-2.0}, {3.0}}));
}

TEST(Dyadic, CubeBasics) {
  const DyadicCube q{-2, {-3, 5}};
  EXPECT_EQ(q.lower(0), -0.75);
  EXPECT_EQ(q.upper(1), 1.5);
  EXPECT_EQ(q.parent(), (DyadicCube{-1, {-2, 2}}));
  EXPECT_TRUE(q.inside(q.parent()));
  for (const auto& c : q.children()) {
    EXPECT_TRUE(c.inside(q));
    EXPECT_EQ(c.parent(), q);
  }
  EXPECT_EQ(q.center(), (Point{-0.625, 1.375}));
}

TEST(Dyadic, DecomposeExamples) {
  const DyadicRegion r1{{0}, {4}};
  auto dec = classify_and_anchor(cz_decompose({}, r1), {});
  ASSERT_EQ(dec.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(dec.cubes[i].level, 0);
    EXPECT_EQ(dec.types[i], CubeType::type3);
    EXPECT_FALSE(dec.anchors[i]);
  }
  const DyadicRegion r2{{0, 0}, {4, 4}};
  EXPECT_EQ(cz_decompose({}, r2).size(), 16u);

  const DyadicRegion line{{-2}, {2}};
  const PointSet one{{0.5}};
  dec = classify_and_anchor(cz_decompose(one, line), one);
  ASSERT_EQ(dec.size(), 4u);
  const auto at = dec.locate(std::vector<double>{0.5});
  ASSERT_TRUE(at);
  EXPECT_EQ(dec.cubes[*at], (DyadicCube{0, {0}}));
  EXPECT_EQ(dec.types[*at], CubeType::type1);
  EXPECT_EQ(*dec.anchors[*at], one[0]);

  const PointSet pair{{0.5}, {0.5 + std::ldexp(1.0, -6)}};
  dec = classify_and_anchor(cz_decompose(pair, line), pair);
  const auto oracle = enumerate_cz(pair, line, 10);
  EXPECT_EQ(std::set<DyadicCube>(dec.cubes.begin(), dec.cubes.end()), oracle);
  EXPECT_EQ(volume(dec), 4.0);
  // the pair must sit in different cubes whose 5-dilates hold one point each
  EXPECT_NE(*dec.locate(pair[0]), *dec.locate(pair[1]));
  for (std::size_t i = 0; i < dec.size(); ++i) {
    if (dec.types[i] == CubeType::type3) continue;
    ASSERT_TRUE(dec.anchors[i]);
  }
}

TEST(Dyadic, InputErrors) {
  const DyadicRegion line{{-2}, {2}};
  EXPECT_THROW(cz_decompose(PointSet{{2.0}}, line), InputError);
  EXPECT_THROW(cz_decompose(PointSet{{-2.0}}, line), InputError);
  EXPECT_THROW(cz_decompose(PointSet{{0.3}, {0.3}}, line), InputError);
  EXPECT_THROW(cz_decompose(PointSet{{0.3, 0.1}}, line), InputError);
}

TEST(Dyadic, MatchesEnumerationOracle) {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 2;
    const DyadicRegion r = n == 1 ? DyadicRegion{{-2}, {3}} : DyadicRegion{{-1, -1}, {2, 2}};
    // clustered points so that several levels appear, but none below the oracle depth
    PointSet e;
    const int count = 2 + trial % 4;
    std::uniform_real_distribution<double> c(0.1, 0.9), d(-1.0, 1.0);
    Point base(static_cast<std::size_t>(n));
    for (auto& v : base) v = c(rng);
    for (int k = 0; k < count; ++k) {
      Point x = base;
      for (auto& v : x) v += std::ldexp(d(rng), -(k % 4));
      for (auto& v : x) v = std::ldexp(std::round(std::ldexp(v, 12)), -12);
      if (!r.strictly_contains(x) || std::find(e.begin(), e.end(), x) != e.end()) continue;
      e.push_back(x);
    }
    const auto dec = cz_decompose(e, r);
    if (min_level(dec) < (n == 1 ? -10 : -6)) continue;
    const auto oracle = enumerate_cz(e, r, n == 1 ? 10 : 6);
    EXPECT_EQ(std::set<DyadicCube>(dec.cubes.begin(), dec.cubes.end()), oracle) << "trial " << trial;
    compared += min_level(dec) < 0;
  }
  EXPECT_GE(compared, 20);
}

TEST(Dyadic, GeometryAndOverlap) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 24; ++trial) {
    const int n = 1 + trial % 2;
    PointSet e = random_points(rng, n, 2 + trial % 6, 0.0, 3.0);
    if (trial % 3 == 0) {
      Point x = e[0];
      x[0] += 1e-3;
      e.push_back(x);
    }
    const DyadicRegion r = DyadicRegion::around(e, n, 2);
    const auto dec = classify_and_anchor(cz_decompose(e, r), e);
    const int depth = check_geometry(dec);
    EXPECT_LE(depth, 1 << (2 * n)) << "overlap of 65/64 dilates";
    // anchors of touching cubes are close: |x_Q - x_Q'| <= 18 sqrt(n) delta_Q
    const int floor = min_level(dec);
    for (std::size_t a = 0; a < dec.size(); ++a) {
      if (!dec.anchors[a]) continue;
      for (std::size_t b = 0; b < dec.size(); ++b) {
        if (!dec.anchors[b] || !intersect(dilate_6564(dec.cubes[a], floor), dilate_6564(dec.cubes[b], floor))) continue;
        double d = 0.0;
        for (int v = 0; v < n; ++v) d += std::pow((*dec.anchors[a])[static_cast<std::size_t>(v)] - (*dec.anchors[b])[static_cast<std::size_t>(v)], 2);
        EXPECT_LE(std::sqrt(d), 18.0 * std::sqrt(n) * dec.cubes[a].side());
      }
    }
  }
}

TEST(Dyadic, TypeTwoAnchorsAreInParentDilate) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 2;
    const PointSet e = random_points(rng, n, 6, 0.0, 1.5);
    const auto dec = classify_and_anchor(cz_decompose(e, DyadicRegion::around(e, n, 5)), e);
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const auto& q = dec.cubes[i];
      switch (dec.types[i]) {
        case CubeType::type1:
          EXPECT_TRUE(q.dilate_contains(*dec.anchors[i], 5));
          break;
        case CubeType::type2: {
          EXPECT_LT(q.level, 0);
          const auto up = q.parent();
          EXPECT_TRUE(up.dilate_contains(*dec.anchors[i], 5));
          int inside = 0;
          for (const auto& x : e) inside += up.dilate_contains(x, 5);
          EXPECT_GE(inside, 2);
          break;
        }
        case CubeType::type3:
          EXPECT_EQ(q.level, 0);
          EXPECT_FALSE(dec.anchors[i]);
          break;
      }
    }
  }
}

TEST(Dyadic, AddingPointsRefines) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 2;
    PointSet e = random_points(rng, n, 3, 0.0, 2.0);
    const DyadicRegion r = DyadicRegion::around(e, n, 3);
    const auto before = cz_decompose(e, r);
    e.push_back(random_points(rng, n, 1, 0.0, 2.0)[0]);
    const auto after = cz_decompose(e, r);
    for (const auto& q : after.cubes) {
      const auto owner = before.locate(q.center());
      ASSERT_TRUE(owner);
      EXPECT_TRUE(q.inside(before.cubes[*owner]));
    }
  }
}

TEST(Dyadic, OkIsInheritedBySmallerDilates) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> lvl(-5, 0), off(-40, 40), sub(0, 31);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 2;
    const PointSet e = random_points(rng, n, 4, -3.0, 3.0);
    DyadicCube big{lvl(rng), {}};
    for (int v = 0; v < n; ++v) big.corner.push_back(off(rng) >> (-big.level > 3 ? 0 : 2));
    // a cube inside big has its 5-dilate inside 5(big)
    const int drop = 1 + sub(rng) % 3;
    DyadicCube small{big.level - drop, {}};
    for (auto c : big.corner) small.corner.push_back((c << drop) + sub(rng) % (1 << drop));
    ASSERT_TRUE(small.inside(big));
    if (!is_ok(big, e)) continue;
    EXPECT_TRUE(is_ok(small, e));
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

}  // namespace
}  // namespace nonneg
