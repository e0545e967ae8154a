#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "nonneg/dyadic.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/function.hpp"
#include "nonneg/jet.hpp"

namespace nonneg {

/// chi: 1 on |x| <= 1/4, 0 for |x| >= 1/2. phi: 1 on 1/2 <= |x| <= 2, 0 unless 1/4 < |x| < 4.
/// phi_k(x) = phi(2^k x). All are smoothsteps of |x|^2, hence C^m.
struct Bumps {
  int m = 1;
  int n = 1;
  Function chi;
  Function phi;

  Function phi_k(int k) const { return fn::affine(phi, std::ldexp(1.0, k), std::vector<double>(static_cast<std::size_t>(n), 0.0)); }
};

/// Step of |x|^2 from 0 at |x| = a to 1 at |x| = b.
inline Function radial_step(int m, int n, double a, double b) {
  const double a2 = a * a, b2 = b * b;
  return fn::compose(univariate::smoothstep(m).affine(1.0 / (b2 - a2), -a2 / (b2 - a2)), fn::radius_squared(n));
}

inline Bumps build_bumps(int m, int n) {
  if (m < 1) throw InputError("bumps need m >= 1");
  if (n < 1) throw InputError("dimension must be positive");
  Bumps b;
  b.m = m;
  b.n = n;
  const Function one = fn::constant(n, 1.0);
  b.chi = one - radial_step(m, n, 0.25, 0.5);
  b.phi = fn::product(radial_step(m, n, 0.25, 0.5), one - radial_step(m, n, 2.0, 4.0));
  return b;
}

namespace detail {

/// Derivatives 0..k of t -> S((t - a) / w) (1 - S((t - b) / w)): 1 on [a + w, b], 0 outside (a, b + w).
inline std::vector<double> plateau_derivs(const Univariate& step, double a, double b, double w, double t, int k) {
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  if (t <= a || t >= b + w) return out;
  std::vector<double> up = step.derivs((t - a) / w, k), down = step.derivs((t - b) / w, k);
  double s = 1.0;
  for (int i = 0; i <= k; ++i, s /= w) {
    up[static_cast<std::size_t>(i)] *= s;
    down[static_cast<std::size_t>(i)] *= -s;
  }
  down[0] += 1.0;
  // Leibniz
  for (int i = 0; i <= k; ++i) {
    double binom = 1.0;
    for (int j = 0; j <= i; ++j) {
      out[static_cast<std::size_t>(i)] += binom * up[static_cast<std::size_t>(j)] * down[static_cast<std::size_t>(i - j)];
      binom = binom * (i - j) / (j + 1);
    }
  }
  return out;
}

/// Jet at x of prod_v g_v(x_v), from per-axis derivative lists.
inline Jet tensor_jet(std::span<const double> x, int degree, const std::vector<std::vector<double>>& axis) {
  Jet r(to_vector(x), degree);
  const IndexSet& set = r.indices();
  for (std::size_t i = 0; i < r.size(); ++i) {
    double v = 1.0;
    for (std::size_t a = 0; a < axis.size(); ++a) v *= axis[a][static_cast<std::size_t>(set[i][a])];
    r[i] = v;
  }
  return r;
}

inline bool is_zero(const Jet& j) {
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] != 0.0) return false;
  }
  return true;
}

/// Normalizes psi_i by sum psi, as jets.
inline std::vector<std::pair<std::size_t, Jet>> normalize(std::vector<std::pair<std::size_t, Jet>> psi, std::span<const double> x, int degree) {
  if (psi.empty()) return psi;
  Jet total(to_vector(x), degree);
  for (const auto& [i, j] : psi) total += j;
  if (!(total[0] > 0.0)) throw EvaluationError("partition denominator vanishes");
  const Jet inv = compose_jet(univariate::reciprocal(), total);
  for (auto& [i, j] : psi) j = multiply(j, inv);
  return psi;
}

}  // namespace detail

/// theta_Q = psi_Q / sum psi_Q', psi_Q a tensor product of smoothsteps equal to 1 on the
/// concentric cube p Q (p = plateau, Q itself by default) and vanishing outside the dilate A Q.
class WhitneyPartition {
 public:
  WhitneyPartition(const CZDecomposition& dec, int m, double dilation = 65.0 / 64.0, double plateau = 1.0)
      : data_(std::make_shared<Data>(Data{CubeIndex(dec.cubes, dilation), univariate::smoothstep(m), dec.region.dim(), m, plateau})) {
    if (m < 1) throw InputError("partition needs m >= 1");
    if (!(dilation > 1.0)) throw InputError("partition dilation must exceed 1");
    if (!(plateau >= 0.0 && plateau < dilation)) throw InputError("partition plateau must lie in [0, A)");
    const auto nb = data_->index.touching();
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b : nb[a]) {
        if (std::abs(dec.cubes[a].level - dec.cubes[b].level) > 1)
          throw ConstructionError("decomposition violates good geometry for the partition dilation");
      }
    }
  }

  std::size_t size() const { return data_->index.size(); }
  int dim() const { return data_->n; }
  int m() const { return data_->m; }
  double dilation() const { return data_->index.dilation(); }
  double plateau() const { return data_->plateau; }
  const DyadicCube& cube(std::size_t i) const { return data_->index.cube(i); }

  /// psi_Q at x (zero jet outside the closed dilate).
  Jet psi(std::size_t q, std::span<const double> x, int degree) const { return data_->psi(q, x, degree); }

  /// Every (Q, theta_Q jet) with theta_Q not identically zero near x.
  std::vector<std::pair<std::size_t, Jet>> jets(std::span<const double> x, int degree) const { return data_->jets(x, degree); }

  Function theta(std::size_t q) const {
    auto d = data_;
    return fn::callback(d->n, [d, q](std::span<const double> x, int degree) {
      for (auto& [i, j] : d->jets(x, degree)) {
        if (i == q) return j;
      }
      return Jet(detail::to_vector(x), degree);
    });
  }
  std::vector<Function> thetas() const {
    std::vector<Function> out;
    for (std::size_t q = 0; q < size(); ++q) out.push_back(theta(q));
    return out;
  }

 private:
  struct Data {
    CubeIndex index;
    Univariate step;
    int n;
    int m;
    double plateau;

    Jet psi(std::size_t q, std::span<const double> x, int degree) const {
      if (!index.in_dilate(q, x)) return Jet(detail::to_vector(x), degree);
      const DyadicCube& c = index.cube(q);
      const double w = 0.5 * (index.dilation() - plateau) * c.side(), h = 0.5 * plateau * c.side();
      std::vector<std::vector<double>> axis;
      for (std::size_t v = 0; v < x.size(); ++v) {
        const double mid = 0.5 * (c.lower(v) + c.upper(v));
        axis.push_back(detail::plateau_derivs(step, mid - h - w, mid + h, w, x[v], degree));
      }
      return detail::tensor_jet(x, degree, axis);
    }

    std::vector<std::pair<std::size_t, Jet>> jets(std::span<const double> x, int degree) const {
      if (static_cast<int>(x.size()) != n) throw ContractViolation("evaluation point has wrong dimension");
      std::vector<std::pair<std::size_t, Jet>> out;
      for (std::size_t q : index.candidates(x)) {
        Jet j = psi(q, x, degree);
        if (!detail::is_zero(j)) out.emplace_back(q, std::move(j));
      }
      return detail::normalize(std::move(out), x, degree);
    }
  };
  std::shared_ptr<const Data> data_;
};

inline WhitneyPartition whitney_partition(const CZDecomposition& dec, int m, double dilation = 65.0 / 64.0, double plateau = 1.0) {
  return WhitneyPartition(dec, m, dilation, plateau);
}

/// Partition of unity on a region from unit cubes Q_v centred on the lattice (1/4) Z^n:
/// chi_v is supported in (1/2) Q_v and the plateaus (1/4) Q_v cover R^n, so at most 2^n
/// pieces are nonzero at any point.
class UnitPartition {
 public:
  UnitPartition(const DyadicRegion& region, int m) : data_(std::make_shared<Data>()) {
    if (m < 1) throw InputError("partition needs m >= 1");
    auto& d = *data_;
    d.n = region.dim();
    d.m = m;
    d.step = univariate::smoothstep(m);
    for (std::size_t v = 0; v < region.lo.size(); ++v) {
      d.first.push_back(4 * region.lo[v] - 1);
      d.count.push_back(4 * (region.hi[v] - region.lo[v]) + 3);
    }
    d.total = 1;
    for (auto c : d.count) d.total *= static_cast<std::size_t>(c);
  }

  std::size_t size() const { return data_->total; }
  int dim() const { return data_->n; }
  Point center(std::size_t i) const { return data_->center(i); }

  /// Every (v, chi_v jet) with chi_v not identically zero near x.
  std::vector<std::pair<std::size_t, Jet>> jets(std::span<const double> x, int degree) const { return data_->jets(x, degree); }

  Function chi(std::size_t i) const {
    auto d = data_;
    return fn::callback(d->n, [d, i](std::span<const double> x, int degree) {
      for (auto& [k, j] : d->jets(x, degree)) {
        if (k == i) return j;
      }
      return Jet(detail::to_vector(x), degree);
    });
  }

 private:
  struct Data {
    int n = 0, m = 0;
    Univariate step;
    std::vector<std::int64_t> first, count;
    std::size_t total = 0;

    Point center(std::size_t i) const {
      Point c(static_cast<std::size_t>(n));
      for (std::size_t v = 0; v < c.size(); ++v) {
        const auto cv = static_cast<std::size_t>(count[v]);
        c[v] = 0.25 * static_cast<double>(first[v] + static_cast<std::int64_t>(i % cv));
        i /= cv;
      }
      return c;
    }

    std::vector<std::pair<std::size_t, Jet>> jets(std::span<const double> x, int degree) const {
      if (static_cast<int>(x.size()) != n) throw ContractViolation("evaluation point has wrong dimension");
      const std::size_t nn = static_cast<std::size_t>(n);
      std::vector<std::int64_t> lo(nn), hi(nn);
      for (std::size_t v = 0; v < nn; ++v) {
        lo[v] = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(4.0 * x[v])) - 1, first[v]);
        hi[v] = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(4.0 * x[v])) + 1, first[v] + count[v] - 1);
        if (lo[v] > hi[v]) return {};
      }
      std::vector<std::pair<std::size_t, Jet>> out;
      std::vector<std::int64_t> j = lo;
      while (true) {
        std::vector<std::vector<double>> axis;
        std::size_t id = 0, stride = 1;
        for (std::size_t v = 0; v < nn; ++v) {
          const double c = 0.25 * static_cast<double>(j[v]);
          axis.push_back(detail::plateau_derivs(step, c - 0.25, c + 0.125, 0.125, x[v], degree));
          id += stride * static_cast<std::size_t>(j[v] - first[v]);
          stride *= static_cast<std::size_t>(count[v]);
        }
        Jet psi = detail::tensor_jet(x, degree, axis);
        if (!detail::is_zero(psi)) out.emplace_back(id, std::move(psi));
        std::size_t v = 0;
        for (; v < nn; ++v) {
          if (++j[v] <= hi[v]) break;
          j[v] = lo[v];
        }
        if (v == nn) break;
      }
      return detail::normalize(std::move(out), x, degree);
    }
  };
  std::shared_ptr<Data> data_;
};

inline UnitPartition unit_partition(const DyadicRegion& region, int m) { return UnitPartition(region, m); }

}  // namespace nonneg
