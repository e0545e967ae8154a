#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "nonneg/errors.hpp"
#include "nonneg/jet.hpp"

namespace nonneg {

/// A jet in monomial form, sum_alpha a_alpha h^alpha with h = y - base, for fast repeated
/// evaluation in the minimizers.
class MonomialPolynomial {
 public:
  MonomialPolynomial() = default;
  explicit MonomialPolynomial(const Jet& p) : n_(p.dim()), degree_(p.degree()) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double a = p.monomial(i);
      if (a == 0.0) continue;
      terms_.push_back({std::vector<int>(p.indices()[i].exponents().begin(), p.indices()[i].exponents().end()), a, p.indices().order(i)});
    }
  }

  int dim() const { return n_; }
  int degree() const { return degree_; }

  /// Value at h (already shifted to the base point).
  double operator()(std::span<const double> h) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double v = t.coef;
      for (int k = 0; k < n_; ++k) {
        for (int e = 0; e < t.exp[static_cast<std::size_t>(k)]; ++e) v *= h[static_cast<std::size_t>(k)];
      }
      s += v;
    }
    return s;
  }

  /// P_k(u) for k = 0..degree, P_k the homogeneous part of degree k.
  std::vector<double> homogeneous_parts(std::span<const double> u) const {
    std::vector<double> parts(static_cast<std::size_t>(degree_) + 1, 0.0);
    for (const auto& t : terms_) {
      double v = t.coef;
      for (int k = 0; k < n_; ++k) {
        for (int e = 0; e < t.exp[static_cast<std::size_t>(k)]; ++e) v *= u[static_cast<std::size_t>(k)];
      }
      parts[static_cast<std::size_t>(t.order)] += v;
    }
    return parts;
  }

  /// Sum of |a_alpha| over terms of the given order.
  double order_l1(int order) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      if (t.order == order) s += std::abs(t.coef);
    }
    return s;
  }

  /// Drops every coefficient with |a| <= threshold.
  MonomialPolynomial snapped(double threshold) const {
    MonomialPolynomial r = *this;
    std::erase_if(r.terms_, [threshold](const Term& t) { return std::abs(t.coef) <= threshold; });
    return r;
  }

 private:
  struct Term {
    std::vector<int> exp;
    double coef;
    int order;
  };
  int n_ = 0;
  int degree_ = 0;
  std::vector<Term> terms_;
};

struct MinimumResult {
  double value = 0.0;
  std::vector<double> point;
};

using ScalarField = std::function<double(std::span<const double>)>;

namespace detail {

inline void project_to_ball(std::vector<double>& y, std::span<const double> center, double radius) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r2 += (y[i] - center[i]) * (y[i] - center[i]);
  if (r2 <= radius * radius) return;
  const double s = radius / std::sqrt(r2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = center[i] + s * (y[i] - center[i]);
}

/// Compass search started at `start` with initial step `step`, confined to the ball.
inline MinimumResult polish(const ScalarField& f, std::vector<double> start, double value, double step, std::span<const double> center,
                            double radius) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(n, 0.0);
    d[i] = 1.0;
    dirs.push_back(d);
    d[i] = -1.0;
    dirs.push_back(d);
  }
  if (n == 2) {
    const double s = std::numbers::sqrt2 / 2;
    for (double a : {-s, s}) {
      for (double b : {-s, s}) dirs.push_back({a, b});
    }
  }
  const double floor = 1e-14 * std::max(1.0, radius);
  std::vector<double> trial(n);
  while (step > floor) {
    bool moved = false;
    for (const auto& d : dirs) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = start[i] + step * d[i];
      project_to_ball(trial, center, radius);
      const double v = f(trial);
      if (v < value) {
        value = v;
        start = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {value, start};
}

}  // namespace detail

/// min of f over the closed ball B(center, radius) in R^1 or R^2: dense grid over the
/// bounding box (points outside the ball skipped, boundary points added), then compass
/// search from the best few local grid minima.
inline MinimumResult minimize_on_ball(const ScalarField& f, std::span<const double> center, double radius, int grid_per_axis,
                                      int candidates = 8) {
  const std::size_t n = center.size();
  if (n < 1 || n > 2) throw InputError("ball minimisation supports n = 1 or 2");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InputError("ball radius must be finite and nonnegative");
  std::vector<double> c(center.begin(), center.end());
  if (radius == 0.0) return {f(c), c};
  const int g = std::max(grid_per_axis, 3);
  const double h = 2.0 * radius / (g - 1);
  struct Sample {
    double value;
    std::vector<double> point;
  };
  std::vector<Sample> samples;
  std::vector<double> y(n);
  if (n == 1) {
    for (int i = 0; i < g; ++i) {
      y[0] = c[0] - radius + i * h;
      samples.push_back({f(y), y});
    }
  } else {
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        y[0] = c[0] - radius + i * h;
        y[1] = c[1] - radius + j * h;
        const double dx = y[0] - c[0], dy = y[1] - c[1];
        if (dx * dx + dy * dy > radius * radius) continue;
        samples.push_back({f(y), y});
      }
    }
    const int boundary = 4 * g;
    for (int k = 0; k < boundary; ++k) {
      const double t = 2.0 * std::numbers::pi * k / boundary;
      y[0] = c[0] + radius * std::cos(t);
      y[1] = c[1] + radius * std::sin(t);
      samples.push_back({f(y), y});
    }
  }
  samples.push_back({f(c), c});
  std::partial_sort(samples.begin(), samples.begin() + std::min<std::size_t>(samples.size(), static_cast<std::size_t>(candidates) * 4),
                    samples.end(), [](const Sample& a, const Sample& b) { return a.value < b.value; });
  // polish the lowest samples that are not within a grid step of an earlier pick
  MinimumResult best{samples.front().value, samples.front().point};
  std::vector<std::vector<double>> seeds;
  for (const auto& s : samples) {
    if (static_cast<int>(seeds.size()) >= candidates) break;
    bool near = false;
    for (const auto& p : seeds) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(p[i] - s.point[i]));
      near = near || d <= 2.0 * h;
    }
    if (near) continue;
    seeds.push_back(s.point);
    MinimumResult r = detail::polish(f, s.point, s.value, h, center, radius);
    if (r.value < best.value) best = r;
  }
  return best;
}

/// min of f over the unit sphere: n = 1 checks +-1; n = 2 samples the circle and polishes
/// in the angle.
inline MinimumResult minimize_on_sphere(const ScalarField& f, int n, int samples = 3600) {
  if (n == 1) {
    const double a = f(std::vector<double>{1.0}), b = f(std::vector<double>{-1.0});
    return a <= b ? MinimumResult{a, {1.0}} : MinimumResult{b, {-1.0}};
  }
  if (n != 2) throw InputError("sphere minimisation supports n = 1 or 2");
  auto at = [&](double t) { return f(std::vector<double>{std::cos(t), std::sin(t)}); };
  double best_t = 0.0, best = at(0.0);
  const double step = 2.0 * std::numbers::pi / samples;
  for (int k = 1; k < samples; ++k) {
    const double v = at(k * step);
    if (v < best) {
      best = v;
      best_t = k * step;
    }
  }
  for (double s = step; s > 1e-15;) {
    bool moved = false;
    for (double t : {best_t - s, best_t + s}) {
      const double v = at(t);
      if (v < best) {
        best = v;
        best_t = t;
        moved = true;
      }
    }
    if (!moved) s *= 0.5;
  }
  return {best, {std::cos(best_t), std::sin(best_t)}};
}

}  // namespace nonneg
