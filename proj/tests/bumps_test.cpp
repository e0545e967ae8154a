#include <gtest/gtest.h>

#include <map>
#include <random>

#include "nonneg/bumps.hpp"
#include "test_support.hpp"

namespace nonneg {
namespace {

using testing::fd_derivative_auto;
using testing::random_point;

MultiIndex along_first(int n, int k) {
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  e[0] = k;
  return MultiIndex(e);
}

/// Every partial derivative of order <= max_order at x against finite differences.
void expect_fd_match(const Function& f, std::span<const double> x, int max_order, double scale, double tol = 1e-5) {
  const Jet j = f.jet(x, max_order);
  auto value = [&f](std::span<const double> y) { return f(y); };
  for (std::size_t i = 1; i < j.size(); ++i) {
    const auto& beta = j.indices()[i];
    std::vector<int> b(beta.exponents().begin(), beta.exponents().end());
    const double fd = fd_derivative_auto(value, x, b, scale);
    // relative error, floored at the natural size scale^-|beta| of the derivative
    const double size = std::max({1.0, std::pow(scale, -static_cast<double>(beta.order())), std::abs(j[i])});
    EXPECT_LE(std::abs(fd - j[i]) / size, tol) << "beta=(" << beta.to_string() << ") at x=(" << x[0] << "," << x[x.size() - 1] << ") exact " << j[i] << " fd " << fd;
  }
}

TEST(Bumps, CutoffExamples) {
  for (int n : {1, 2}) {
    const Bumps b = build_bumps(3, n);
    const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
    EXPECT_EQ(b.chi(origin), 1.0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (double r : {0.5, 0.6, 1.0, 7.0}) {
      x[0] = r;
      EXPECT_EQ(b.chi(x), 0.0);
      // outside the support every derivative is exactly zero
      const Jet j = b.chi.jet(x, 3);
      for (std::size_t i = 0; i < j.size(); ++i) EXPECT_EQ(j[i], 0.0);
    }
    for (double r : {0.0, 0.1, 0.25}) {
      x[0] = r;
      EXPECT_EQ(b.chi(x), 1.0);
    }
    for (double r : {0.5, 1.0, 1.7, 2.0}) {
      x[0] = r;
      EXPECT_EQ(b.phi(x), 1.0);
    }
    for (double r : {0.0, 0.2, 0.25, 4.0, 5.0}) {
      x[0] = r;
      EXPECT_EQ(b.phi(x), 0.0);
    }
    // phi_3 = phi(8 x): 1 on 2^-4 <= |x| <= 2^-2
    const Function p3 = b.phi_k(3);
    for (double r : {0.0625, 0.1, 0.2, 0.25}) {
      x[0] = r;
      EXPECT_EQ(p3(x), 1.0);
    }
    x[0] = 0.3;
    std::vector<double> y = x;
    for (auto& v : y) v *= 8;
    EXPECT_EQ(p3(x), b.phi(y));
  }
}

TEST(Bumps, RangeAndDerivatives) {
  std::mt19937_64 rng(17);
  for (int n : {1, 2}) {
    for (int m : {1, 2, 4}) {
      const Bumps b = build_bumps(m, n);
      for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_point(rng, n, -4.5, 4.5);
        const double c = b.chi(x), p = b.phi(x);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
        // derivatives up to order m - 1 have a derivative of their own; compare those
        if (m == 1) continue;
        const auto y = random_point(rng, n, -1.0, 1.0);
        // step scaled to the 1/4-wide transition of the profiles
        expect_fd_match(b.chi, y, std::min(m - 1, 2), 0.25);
        expect_fd_match(b.phi, x, std::min(m - 1, 2), 0.25);
      }
    }
  }
}

TEST(Bumps, DyadicBumpScaling) {
  // sup |d^beta phi_k| 2^(-k |beta|) is the same for every k
  const int m = 3;
  const Bumps b = build_bumps(m, 1);
  std::vector<double> ratio(4, 0.0);
  for (int k = 0; k <= 10; ++k) {
    const Function pk = b.phi_k(k);
    std::vector<double> sup(m + 1, 0.0);
    for (int i = 0; i <= 4000; ++i) {
      const std::vector<double> x{std::ldexp(-4.0 + 8.0 * i / 4000, -k)};
      const Jet j = pk.jet(x, m);
      for (int o = 0; o <= m; ++o) sup[static_cast<std::size_t>(o)] = std::max(sup[static_cast<std::size_t>(o)], std::abs(j[static_cast<std::size_t>(o)]));
    }
    for (int o = 0; o <= m; ++o) {
      const double r = sup[static_cast<std::size_t>(o)] * std::ldexp(1.0, -m * k) * std::ldexp(1.0, (m - o) * k);
      if (k == 0) ratio[static_cast<std::size_t>(o)] = r;
      EXPECT_NEAR(r / ratio[static_cast<std::size_t>(o)], 1.0, 1e-9) << "k=" << k << " order " << o;
    }
  }
  // C^m norm of phi_k within C 2^(mk)
  for (int o = 0; o <= m; ++o) EXPECT_GT(ratio[static_cast<std::size_t>(o)], 0.0);
}

CZDecomposition sample_decomposition(std::mt19937_64& rng, int n, int points) {
  PointSet e;
  const auto base = random_point(rng, n, 0.5, 1.5);
  for (int i = 0; i < points; ++i) {
    auto x = base;
    for (auto& v : x) v += std::ldexp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng), -i);
    e.push_back(x);
  }
  return classify_and_anchor(cz_decompose(e, DyadicRegion::around(e, n, 2)), e);
}

TEST(WhitneyPartition, Examples) {
  // a single unit cube: theta = 1 on it
  CZDecomposition one = cz_decompose({}, DyadicRegion{{0}, {1}});
  const WhitneyPartition p(one, 2);
  ASSERT_EQ(p.size(), 1u);
  for (double x : {0.0, 0.3, 0.99}) EXPECT_EQ(p.theta(0)(std::vector<double>{x}), 1.0);

  // interior point away from neighbouring dilates
  CZDecomposition row = cz_decompose({}, DyadicRegion{{0, 0}, {3, 3}});
  const WhitneyPartition q(row, 3);
  const auto mid = row.locate(std::vector<double>{1.5, 1.5});
  ASSERT_TRUE(mid);
  const auto thetas = q.thetas();
  for (std::size_t i = 0; i < thetas.size(); ++i) EXPECT_EQ(thetas[i]({1.5, 1.5}), i == *mid ? 1.0 : 0.0);
}

TEST(WhitneyPartition, SumsToOneAndExactSupport) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 2;
    const auto dec = sample_decomposition(rng, n, 5);
    for (auto [dilation, plateau] : {std::pair{65.0 / 64.0, 1.0}, std::pair{1.5, 1.0}, std::pair{1.8, 0.25}}) {
      const WhitneyPartition p(dec, 3, dilation, plateau);
      const auto thetas = p.thetas();
      for (int s = 0; s < 1000; ++s) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (std::size_t v = 0; v < x.size(); ++v) {
          x[v] = std::uniform_real_distribution<double>(static_cast<double>(dec.region.lo[v]), static_cast<double>(dec.region.hi[v]))(rng);
        }
        double total = 0.0;
        for (const auto& [i, j] : p.jets(x, 0)) total += j[0];
        EXPECT_NEAR(total, 1.0, 1e-9);
        if (s % 20 != 0) continue;
        // the individual handles: nonnegative, exactly zero outside the closed dilate
        total = 0.0;
        for (std::size_t i = 0; i < thetas.size(); ++i) {
          const double t = thetas[i](x);
          EXPECT_GE(t, 0.0);
          // exact zero outside the closed dilate
          bool inside = true;
          for (std::size_t v = 0; v < x.size(); ++v) {
            const double w = 0.5 * (dilation - 1.0) * dec.cubes[i].side();
            inside = inside && x[v] >= dec.cubes[i].lower(v) - w && x[v] <= dec.cubes[i].upper(v) + w;
          }
          if (!inside) EXPECT_EQ(t, 0.0);
          total += t;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(WhitneyPartition, ReducedPlateau) {
  // psi_Q = 1 exactly on the concentric cube p Q and the transition spans (A - p) / 2 sidelengths
  const DyadicRegion region{{0}, {2}};
  const auto dec = classify_and_anchor(cz_decompose({}, region), {});
  const WhitneyPartition p(dec, 2, 1.8, 0.25);
  EXPECT_EQ(p.psi(0, std::vector<double>{0.5}, 0)[0], 1.0);
  EXPECT_EQ(p.psi(0, std::vector<double>{0.625}, 0)[0], 1.0);
  EXPECT_LT(p.psi(0, std::vector<double>{0.7}, 0)[0], 1.0);
  EXPECT_GT(p.psi(0, std::vector<double>{1.35}, 0)[0], 0.0);
  EXPECT_EQ(p.psi(0, std::vector<double>{1.4}, 0)[0], 0.0);
  EXPECT_THROW(WhitneyPartition(dec, 2, 1.5, 1.5), InputError);
  std::mt19937_64 rng(31);
  for (int s = 0; s < 50; ++s) {
    const std::vector<double> x{std::uniform_real_distribution<double>(0.3, 1.7)(rng)};
    expect_fd_match(p.theta(0), x, 1, 0.1);
  }
}

TEST(WhitneyPartition, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 1 + trial % 2;
    const auto dec = sample_decomposition(rng, n, 4);
    const WhitneyPartition p(dec, 4);
    int checked = 0;
    for (int s = 0; s < 100; ++s) {
      const std::size_t c = std::uniform_int_distribution<std::size_t>(0, dec.size() - 1)(rng);
      const auto& q = dec.cubes[c];
      const double w = q.side() / 128.0;
      std::vector<double> x(static_cast<std::size_t>(n));
      // points in the collar, where theta_Q varies
      for (std::size_t v = 0; v < x.size(); ++v) x[v] = q.upper(v) + std::uniform_real_distribution<double>(-w, w)(rng);
      expect_fd_match(p.theta(c), x, 2, w);
      ++checked;
    }
    EXPECT_EQ(checked, 100);
  }
}

TEST(WhitneyPartition, DerivativeSupsScaleWithSidelength) {
  // a point cluster forces levels 0 down to about -8
  PointSet e;
  for (int i = 0; i < 9; ++i) e.push_back({0.3 + std::ldexp(1.0, -i)});
  const auto dec = cz_decompose(e, DyadicRegion::around(e, 1, 2));
  const int m = 2;
  const WhitneyPartition p(dec, m);
  for (int order = 1; order <= m; ++order) {
    std::map<int, double> sup;  // level -> max over cubes of sup |d^order theta_Q|
    for (std::size_t c = 0; c < dec.size(); ++c) {
      const auto& q = dec.cubes[c];
      const double w = q.side() / 128.0;
      const Function th = p.theta(c);
      for (int i = 0; i <= 400; ++i) {
        for (double edge : {q.lower(0) - w, q.upper(0) - w}) {
          const std::vector<double> x{edge + 2.0 * w * i / 400};
          sup[q.level] = std::max(sup[q.level], std::abs(th.jet(x, order)[static_cast<std::size_t>(order)]));
        }
      }
    }
    // least squares slope of log sup against log delta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& [level, s] : sup) {
      const double lx = level * std::log(2.0), ly = std::log(s);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++k;
    }
    ASSERT_GE(k, 6);
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    EXPECT_NEAR(slope, -order, 0.1 * order) << "order " << order;
  }
}

TEST(WhitneyPartition, RejectsBadGeometry) {
  CZDecomposition dec;
  dec.region = DyadicRegion{{0}, {2}};
  dec.cubes.push_back(DyadicCube{0, {0}});
  for (std::int64_t i = 4; i < 8; ++i) dec.cubes.push_back(DyadicCube{-2, {i}});
  EXPECT_THROW(WhitneyPartition(dec, 2), ConstructionError);
}

TEST(UnitPartition, Properties) {
  std::mt19937_64 rng(31);
  for (int n : {1, 2}) {
    const DyadicRegion r = n == 1 ? DyadicRegion{{-2}, {3}} : DyadicRegion{{-1, 0}, {1, 2}};
    const UnitPartition u(r, 3);
    for (int s = 0; s < 1000; ++s) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (std::size_t v = 0; v < x.size(); ++v) {
        x[v] = std::uniform_real_distribution<double>(static_cast<double>(r.lo[v]), static_cast<double>(r.hi[v]))(rng);
      }
      const auto pieces = u.jets(x, 0);
      EXPECT_LE(pieces.size(), std::size_t{1} << n);
      double total = 0.0;
      for (const auto& [i, j] : pieces) {
        EXPECT_GE(j[0], 0.0);
        // support inside the half-size cube about the centre
        const Point c = u.center(i);
        for (std::size_t v = 0; v < x.size(); ++v) EXPECT_LT(std::abs(x[v] - c[v]), 0.25);
        total += j[0];
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
    // at a lattice centre the centred piece is 1
    for (std::size_t i = 0; i < u.size(); i += 7) {
      const Point c = u.center(i);
      bool inside = true;
      for (std::size_t v = 0; v < c.size(); ++v) inside = inside && c[v] >= r.lo[v] && c[v] <= r.hi[v];
      if (!inside) continue;
      const auto pieces = u.jets(c, 0);
      ASSERT_EQ(pieces.size(), 1u);
      EXPECT_EQ(pieces[0].first, i);
      EXPECT_EQ(pieces[0].second[0], 1.0);
    }
    // the C^m bound is the same for every piece (translates of one profile)
    std::vector<double> sup_a(4, 0.0), sup_b(4, 0.0);
    const std::size_t a = u.size() / 3, b = u.size() / 2;
    const Function fa = u.chi(a), fb = u.chi(b);
    const Point ca = u.center(a), cb = u.center(b);
    for (int i = 0; i <= 300; ++i) {
      std::vector<double> da(ca), db(cb);
      const double t = -0.25 + 0.5 * i / 300;
      da[0] += t;
      db[0] += t;
      const Jet ja = fa.jet(da, 3), jb = fb.jet(db, 3);
      for (std::size_t k = 0; k < 4 && k < ja.size(); ++k) {
        sup_a[k] = std::max(sup_a[k], std::abs(ja[ja.indices().position(along_first(n, static_cast<int>(k)))]));
        sup_b[k] = std::max(sup_b[k], std::abs(jb[jb.indices().position(along_first(n, static_cast<int>(k)))]));
      }
    }
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(sup_a[k], sup_b[k], 1e-9 * std::max(1.0, sup_a[k]));
    // derivatives against finite differences
    for (int s = 0; s < 100; ++s) {
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, u.size() - 1)(rng);
      auto x = u.center(i);
      for (auto& v : x) v += std::uniform_real_distribution<double>(-0.25, 0.25)(rng);
      expect_fd_match(u.chi(i), x, 2, 0.125);
    }
  }
}

}  // namespace
}  // namespace nonneg
