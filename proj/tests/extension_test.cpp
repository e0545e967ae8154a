#include <gtest/gtest.h>

#include <random>

#include "nonneg/extension.hpp"
#include "test_support.hpp"

namespace nonneg {
namespace {

using testing::fd_derivative_auto;

/// min of f on a uniform grid of `count` points over [lo, hi] (n = 1).
double grid_min_1d(const Function& f, double lo, double hi, int count) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) best = std::min(best, f({lo + (hi - lo) * i / (count - 1)}));
  return best;
}

/// Finite-difference jet of f at x (orders up to `degree`) against p, relative error. With
/// `kinked`, f may carry a |y - x|^m term.
double fd_jet_error(const Function& f, std::span<const double> x, const Jet& p, double scale = 1.0, bool kinked = false) {
  auto value = [&f](std::span<const double> y) { return f(y); };
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& beta = p.indices()[i];
    std::vector<int> b(beta.exponents().begin(), beta.exponents().end());
    const double fd = beta.order() == 0 ? f(x) : kinked ? testing::fd_derivative_kinked(value, x, b, scale) : fd_derivative_auto(value, x, b, scale);
    worst = std::max(worst, std::abs(fd - p[i]) / std::max(1.0, std::abs(p[i])));
  }
  return worst;
}

Jet jet1(std::vector<double> coef, double base = 0.0) {
  Jet p(std::vector<double>{base}, static_cast<int>(coef.size()) - 1);
  for (std::size_t i = 0; i < coef.size(); ++i) p[i] = coef[i];
  return p;
}

TEST(ExtendCm1, Examples) {
  // P = 0: F = chi(y - x) |y - x|^m, zero jet at x
  for (int m : {1, 2, 3}) {
    const Jet zero(std::vector<double>{0.7}, m - 1);
    const Function F = extend_jet_cm1(zero, std::vector<double>{0.7}, 1.0);
    const Jet j = F.jet(std::vector<double>{0.7}, m - 1);
    for (std::size_t i = 0; i < j.size(); ++i) EXPECT_EQ(j[i], 0.0);
    EXPECT_NEAR(F({0.9}), std::pow(0.2, m), 1e-15);
    EXPECT_EQ(F({1.7}), 0.0);
    EXPECT_EQ(F({-0.3}), 0.0);
  }
  // m = 1, constant c: F(y) = chi(y) (c + |y|)
  const Function F = extend_jet_cm1(jet1({0.4}), std::vector<double>{0.0}, 1.0);
  EXPECT_EQ(F({0.0}), 0.4);
  EXPECT_NEAR(F({0.3}), 0.7, 1e-15);
  EXPECT_NEAR(F({-0.45}), 0.85, 1e-15);
  EXPECT_GE(grid_min_1d(F, -2, 2, 10000), 0.0);
  // m = 3, P = y^2 / 2: nonnegative on a fine grid, jet reproduced
  const Jet p = jet1({0.0, 0.0, 1.0});
  const Function G = extend_jet_cm1(p, std::vector<double>{0.0}, 1.0);
  EXPECT_GE(grid_min_1d(G, -2, 2, 10000), 0.0);
  EXPECT_LE(fd_jet_error(G, std::vector<double>{0.0}, p, 1.0, true), 1e-6);
  // rejected jets
  EXPECT_THROW(extend_jet_cm1(jet1({-0.1}), std::vector<double>{0.0}, 1.0), PreconditionError);
  EXPECT_THROW(extend_jet_cm1(jet1({0.0, 1.0}), std::vector<double>{0.0}, 1.0), PreconditionError);
}

TEST(ExtendCm1, RandomAcceptedJets) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int accepted = 0;
  for (int trial = 0; trial < 400 && accepted < 40; ++trial) {
    const int n = 1 + trial % 2, m = 1 + trial % 3;
    const auto x = testing::random_point(rng, n, -1.0, 1.0);
    const double M = std::exp(u(rng));
    Jet p = testing::random_jet(rng, x, m - 1, 0.5 * M);
    p[0] = std::abs(p[0]) + 0.3 * M;  // bias towards membership
    if (!gamma_prime_member(p, x, M, std::nullopt).accepted()) continue;
    ++accepted;
    const Function F = extend_jet_cm1(p, x, M);
    double lo = std::numeric_limits<double>::infinity();
    const int g = n == 1 ? 10000 : 100;
    std::vector<double> y(x.size());
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < (n == 1 ? 1 : g); ++j) {
        y[0] = x[0] - 1.2 + 2.4 * i / (g - 1);
        if (n == 2) y[1] = x[1] - 1.2 + 2.4 * j / (g - 1);
        lo = std::min(lo, F(y));
      }
    }
    EXPECT_GE(lo, -1e-12 * M);
    EXPECT_LE(fd_jet_error(F, x, p, 0.5, true), 1e-5) << "trial " << trial;
  }
  EXPECT_GE(accepted, 20);
}

TEST(ExtendCm, Examples) {
  // P = 0 -> F = 0
  const Function zero = extend_jet_cm(Jet(std::vector<double>{0.0}, 2));
  for (double y : {-0.3, 0.0, 0.2}) EXPECT_EQ(zero({y}), 0.0);
  // P = y^2/2 with m = 2: all b_k = 0, F = chi y^2 / 2
  const Jet half = jet1({0.0, 0.0, 1.0});
  const Function F = extend_jet_cm(half);
  const Bumps b = build_bumps(2, 1);
  for (double y : {-0.6, -0.3, 0.0, 0.1, 0.45}) EXPECT_NEAR(F({y}), b.chi({y}) * y * y / 2, 1e-15);
  // P = J_0^+(1 - cos(y + 0.1)), m = 3
  const double s = std::sin(0.1), c = std::cos(0.1);
  const Jet p = jet1({1.0 - c, s, c, -s});
  const Function G = extend_jet_cm(p, 20);
  EXPECT_GE(grid_min_1d(G, -1, 1, 10000), -std::ldexp(1.0, -63));
  EXPECT_LE(fd_jet_error(G, std::vector<double>{0.0}, p), 1e-6);
  // rejected
  EXPECT_THROW(extend_jet_cm(jet1({0.0, 1.0, 0.0})), PreconditionError);
}

TEST(ExtendCm, ScaledNonnegativeSamples) {
  // J_0^+ of small nonnegative smooth functions lies in Gamma_0^+; the extension must be
  // nonnegative, keep the jet, and the b_k obey 0 <= b_k <= 2^(-mk)
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.05, 0.3);
  for (int trial = 0; trial < 12; ++trial) {
    const int m = 2 + trial % 2;
    const double a = pos(rng), shift = u(rng), w = 1.0 + pos(rng);
    // f(y) = a (1 - cos(w (y - shift))) / w^2 >= 0; derivatives bounded by a w^(k - 2)
    Jet p(std::vector<double>{0.0}, m);
    for (int k = 0; k <= m; ++k) {
      const double t = -w * shift;
      const double d = k == 0 ? 1.0 - std::cos(t) : -std::pow(w, k) * std::cos(t + k * std::numbers::pi / 2);
      p[static_cast<std::size_t>(k)] = a * d / (w * w);
    }
    ASSERT_EQ(gamma0plus_member(p).status, Membership::member) << "trial " << trial;
    const auto bk = bk_sequence(p, 20);
    for (int k = 0; k <= 20; ++k) {
      EXPECT_GE(bk[static_cast<std::size_t>(k)], 0.0);
      EXPECT_LE(bk[static_cast<std::size_t>(k)], std::ldexp(1.0, -m * k) * (1 + 1e-12));
    }
    const Function F = extend_jet_cm(p);
    EXPECT_GE(grid_min_1d(F, -1, 1, 10000), -1e-10);
    EXPECT_LE(fd_jet_error(F, std::vector<double>{0.0}, p, 0.1), 1e-5);
  }
}

/// Unit-free Q pair: Q1 = J cos(a + b t), Q2 = J sin(a + b t), so Q1 Q1 + Q2 Q2 = 1.
std::pair<Jet, Jet> rotation_pair(double x, int degree, double a, double b) {
  Jet q1(std::vector<double>{x}, degree), q2(std::vector<double>{x}, degree);
  for (int k = 0; k <= degree; ++k) {
    q1[static_cast<std::size_t>(k)] = std::pow(b, k) * std::cos(a + k * std::numbers::pi / 2);
    q2[static_cast<std::size_t>(k)] = std::pow(b, k) * std::sin(a + k * std::numbers::pi / 2);
  }
  return {q1, q2};
}

TEST(PatchPair, Examples) {
  const std::vector<double> x{0.2};
  const Jet p1 = jet1({0.5, 0.1}, 0.2), p2 = jet1({0.3, -0.2}, 0.2);
  const Function f1 = extend_jet_cm1(p1, x, 1.0), f2 = extend_jet_cm1(p2, x, 1.0);
  // Q1 = 1, Q2 = 0: F = F1
  const PatchResult r = patch_pair(f1, f2, p1, p2, jet1({1.0, 0.0}, 0.2), jet1({0.0, 0.0}, 0.2), x, 0.5, 1.0);
  for (double y : {-0.5, 0.0, 0.2, 0.25, 0.9}) EXPECT_EQ(r.F({y}), f1({y}));
  // F1 = F2: F = F1
  const auto [q1, q2] = rotation_pair(0.2, 1, 0.7, 0.8);
  const PatchResult same = patch_pair(f1, f1, p1, p1, q1, q2, x, 0.5, 1.0);
  for (double y : {-0.5, 0.0, 0.2, 0.25, 0.9}) EXPECT_NEAR(same.F({y}), f1({y}), 1e-15);
  // Q1 Q1 + Q2 Q2 != 1
  EXPECT_THROW(patch_pair(f1, f2, p1, p2, jet1({0.9, 0.0}, 0.2), jet1({0.0, 0.0}, 0.2), x, 0.5, 1.0), InputError);
  // derivative bound |Q'| <= 1/delta
  const auto [b1, b2] = rotation_pair(0.2, 1, 0.3, 5.0);
  EXPECT_THROW(patch_pair(f1, f2, p1, p2, b1, b2, x, 0.5, 1.0), InputError);
  // wrong jets for F_i
  EXPECT_THROW(patch_pair(f1, f2, p2, p1, q1, q2, x, 0.5, 1.0), PreconditionError);
}

TEST(PatchPair, RandomAdmissibleInputs) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 1.0);
  int done = 0;
  for (int trial = 0; trial < 200 && done < 40; ++trial) {
    const int m = 2;
    const std::vector<double> x{0.5 * u(rng)};
    const double M = 1.0, delta = pos(rng);
    Jet p1 = testing::random_jet(rng, x, m - 1, 0.5), p2 = testing::random_jet(rng, x, m - 1, 0.5);
    p1[0] = std::abs(p1[0]) + 0.3;
    p2[0] = std::abs(p2[0]) + 0.3;
    if (!gamma_prime_member(p1, x, M, std::nullopt).accepted() || !gamma_prime_member(p2, x, M, std::nullopt).accepted()) continue;
    const auto [q1, q2] = rotation_pair(x[0], m - 1, std::numbers::pi * u(rng), u(rng) / delta);
    const Function f1 = extend_jet_cm1(p1, x, M), f2 = extend_jet_cm1(p2, x, M);
    const PatchResult r = patch_pair(f1, f2, p1, p2, q1, q2, x, delta, M);
    const Jet expected = multiply(multiply(q1, q1), p1) + multiply(multiply(q2, q2), p2);
    EXPECT_LE(fd_jet_error(r.F, x, expected, 0.1 * r.c0 * delta, true), 1e-5) << "trial " << trial;
    EXPECT_LE(max_abs_difference(r.F.jet(x, m - 1), expected), 1e-12);
    EXPECT_GE(grid_min_1d(r.F, x[0] - 1.5, x[0] + 1.5, 3001), -1e-12);
    // locality: identical to F1 outside B(x, c0 delta)
    for (int i = 0; i <= 100; ++i) {
      const double y = x[0] - 2.0 + 4.0 * i / 100;
      if (std::abs(y - x[0]) < r.c0 * delta) continue;
      EXPECT_EQ(r.F({y}), (r.swapped ? f2 : f1)({y}));
    }
    ++done;
  }
  EXPECT_GE(done, 20);
}

}  // namespace
}  // namespace nonneg
