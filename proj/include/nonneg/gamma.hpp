#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nonneg/errors.hpp"
#include "nonneg/jet.hpp"
#include "nonneg/lp.hpp"
#include "nonneg/minimize.hpp"

namespace nonneg {

enum class Membership { member, nonmember, undetermined };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::member: return "member";
    case Membership::nonmember: return "nonmember";
    case Membership::undetermined: return "undetermined";
  }
  return "unknown";
}

/// Outcome of a numerical membership test. margin is the worst constraint slack; a
/// nonmember verdict names the violated constraint in `reason` and, where there is one,
/// the offending point (or the (epsilon, delta) pair for the small-scale condition).
struct MembershipVerdict {
  Membership status = Membership::member;
  double margin = std::numeric_limits<double>::infinity();
  std::optional<std::vector<double>> point;
  std::optional<std::pair<double, double>> eps_delta;
  std::string reason;

  bool accepted() const { return status == Membership::member; }
};

struct GammaConfig {
  int grid_per_axis = 0;  // 0: 2001 for n = 1, 301 for n = 2
  std::vector<double> eps_ladder{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tol = 1e-12;      // allowed negativity of nonnegativity margins
  double eq_tol = 1e-9;    // slice equality P(x) = f(x), relative to max(1, |f|)
  double r_cut_slack = 1.25;
  double r_cap = 1e4;      // search radius when the top-degree part gives no usable bound
  int scale_depth = 40;    // small-scale check runs down to |x| = 2^-scale_depth
  double snap = 1e-13;     // coefficients this small count as zero in the small-scale check

  int grid(int n) const {
    if (grid_per_axis > 0) return grid_per_axis;
    return n == 1 ? 2001 : 301;
  }
};

namespace detail {

inline void require_origin(const Jet& p) {
  for (double b : p.base()) {
    if (b != 0.0) throw ContractViolation("jet must be based at the origin");
  }
}

inline void require_finite(const Jet& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw InputError("jet has non-finite coefficients");
  }
}

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// |d^beta P(0)| <= 1 over every stored entry; the jet's own degree sets the range.
inline MembershipVerdict derivative_bounds(const Jet& p) {
  MembershipVerdict v;
  double worst = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i]) > worst) {
      worst = std::abs(p[i]);
      arg = i;
    }
  }
  v.margin = 1.0 - worst;
  if (worst > 1.0) {
    v.status = Membership::nonmember;
    v.reason = "derivative bound fails at alpha=(" + p.indices()[arg].to_string() + ")";
  }
  return v;
}

inline MembershipVerdict combine(MembershipVerdict a, const MembershipVerdict& b) {
  auto rank = [](Membership s) { return s == Membership::nonmember ? 2 : s == Membership::undetermined ? 1 : 0; };
  MembershipVerdict r = rank(b.status) > rank(a.status) ? b : a;
  r.margin = std::min(a.margin, b.margin);
  return r;
}

}  // namespace detail

/// P(x) + |x|^m >= 0 on all of R^n for P in monomial form at the origin.
///
/// With h = min_{|u|=1} (1 + P_m(u)) > 0 and L the l1 norm of the coefficients below degree m,
/// the function is positive for |x| > max(1, L/h), so the check reduces to a ball.
inline MembershipVerdict global_nonnegativity(const MonomialPolynomial& p, int m, const GammaConfig& cfg) {
  const int n = p.dim();
  MembershipVerdict v;
  double h = 1.0;
  std::vector<double> worst_dir;
  if (p.degree() >= m) {
    auto top = minimize_on_sphere([&](std::span<const double> u) { return 1.0 + p.homogeneous_parts(u)[static_cast<std::size_t>(m)]; }, n);
    h = top.value;
    worst_dir = top.point;
  }
  auto g = [&](std::span<const double> x) { return p(x) + std::pow(detail::norm(x), m); };
  if (h < -cfg.tol) {
    // |x|^m loses to the top-degree part along worst_dir
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double t = 1.0; t < 1e15; t *= 2.0) {
      for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = t * worst_dir[static_cast<std::size_t>(k)];
      const double gv = g(x);
      if (gv < -cfg.tol) {
        v.status = Membership::nonmember;
        v.margin = gv;
        v.point = x;
        v.reason = "P + |x|^m is negative";
        return v;
      }
    }
    v.status = Membership::undetermined;
    v.margin = h;
    v.reason = "top-degree part dominates |x|^m but no negative value was located";
    return v;
  }
  if (m == 1) {
    // P = c + linear with |grad . u| <= 1 in every direction: minimum is P(0)
    const double c = p.homogeneous_parts(std::vector<double>(static_cast<std::size_t>(n), 0.0))[0];
    v.margin = c;
    if (c < -cfg.tol) {
      v.status = Membership::nonmember;
      v.point = std::vector<double>(static_cast<std::size_t>(n), 0.0);
      v.reason = "P + |x|^m is negative";
    }
    return v;
  }
  double L = 0.0;
  for (int k = 0; k < m; ++k) L += p.order_l1(k);
  bool capped = false;
  double radius;
  if (h <= 1e-9) {
    radius = cfg.r_cap;
    capped = true;
  } else {
    radius = std::min(cfg.r_cap, std::max(1.0, L / h) * cfg.r_cut_slack);
    capped = radius == cfg.r_cap;
  }
  const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
  MinimumResult mn = minimize_on_ball(g, origin, radius, cfg.grid(n));
  v.margin = mn.value;
  if (mn.value < -cfg.tol) {
    v.status = Membership::nonmember;
    v.point = mn.point;
    v.reason = "P + |x|^m is negative";
  } else if (capped) {
    v.status = Membership::undetermined;
    v.reason = "no finite cutoff radius; search capped";
  }
  return v;
}

/// For every eps > 0 some delta > 0 has P(x) + eps |x|^m >= 0 on |x| <= delta.
///
/// Holds outright when P(0) > 0. Otherwise mu_j = min of P(x)/|x|^m over the annulus
/// 2^-j-1 <= |x| <= 2^-j is computed from the homogeneous parts down to j = scale_depth;
/// the tail of that sequence is compared against the eps ladder.
inline MembershipVerdict small_scale_condition(const MonomialPolynomial& p, int m, const GammaConfig& cfg) {
  const int n = p.dim();
  MembershipVerdict v;
  const double c0 = p.homogeneous_parts(std::vector<double>(static_cast<std::size_t>(n), 0.0))[0];
  if (c0 > cfg.snap) {
    v.margin = c0;
    return v;
  }
  const MonomialPolynomial q = p.snapped(cfg.snap);
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs = {{1.0}, {-1.0}};
  } else {
    const int count = 720;
    for (int k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * k / count;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  }
  std::vector<std::vector<double>> parts;
  for (const auto& u : dirs) parts.push_back(q.homogeneous_parts(u));
  auto quotient = [&](const std::vector<double>& pu, double r) {
    double s = 0.0;
    for (std::size_t k = 0; k < pu.size(); ++k) s += pu[k] * std::pow(r, static_cast<double>(k) - m);
    return s;
  };
  const int radial = 17;
  const int window = 8;
  double tail = std::numeric_limits<double>::infinity();
  std::vector<double> tail_point;
  double tail_delta = 0.0;
  for (int j = std::max(0, cfg.scale_depth - window + 1); j <= cfg.scale_depth; ++j) {
    const double delta = std::ldexp(1.0, -j);
    for (int i = 0; i < radial; ++i) {
      const double r = delta * std::pow(0.5, static_cast<double>(i) / (radial - 1));
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double val = quotient(parts[d], r);
        if (val < tail) {
          tail = val;
          tail_point = {dirs[d][0] * r};
          if (n == 2) tail_point.push_back(dirs[d][1] * r);
          tail_delta = delta;
        }
      }
    }
  }
  if (n == 2 && tail < 0.0) {
    // refine the angle at the worst radius
    const double r = detail::norm(tail_point);
    double theta = std::atan2(tail_point[1], tail_point[0]);
    for (double s = 2.0 * std::numbers::pi / 720; s > 1e-15;) {
      bool moved = false;
      for (double t : {theta - s, theta + s}) {
        const double val = quotient(q.homogeneous_parts(std::vector<double>{std::cos(t), std::sin(t)}), r);
        if (val < tail) {
          tail = val;
          theta = t;
          moved = true;
        }
      }
      if (!moved) s *= 0.5;
    }
    tail_point = {r * std::cos(theta), r * std::sin(theta)};
  }
  v.margin = tail;
  for (double eps : cfg.eps_ladder) {
    if (tail < -eps) {
      v.status = Membership::nonmember;
      v.point = tail_point;
      v.eps_delta = std::make_pair(eps, tail_delta);
      v.reason = "small-scale condition fails";
      return v;
    }
  }
  if (tail < -cfg.tol) {
    v.status = Membership::undetermined;
    v.point = tail_point;
    v.reason = "small-scale margin is negative below the smallest eps of the ladder";
  }
  return v;
}

/// P in Gamma_0^+: P an m-jet at 0 with |d^beta P(0)| <= 1 (|beta| <= m), P + |x|^m >= 0 on
/// R^n, and the small-scale condition.
inline MembershipVerdict gamma0plus_member(const Jet& p, const GammaConfig& cfg = {}) {
  detail::require_origin(p);
  detail::require_finite(p);
  const int m = p.degree();
  if (m < 1) throw InputError("Gamma_0^+ needs m >= 1");
  MembershipVerdict v = detail::derivative_bounds(p);
  if (v.status == Membership::nonmember) return v;
  const MonomialPolynomial mp(p);
  v = detail::combine(v, global_nonnegativity(mp, m, cfg));
  if (v.status == Membership::nonmember) return v;
  return detail::combine(v, small_scale_condition(mp, m, cfg));
}

/// b_k = max(0, -min{P(x) : |x| <= 2^-k}) for k = 0..K. Values found on smaller balls are
/// propagated to larger ones so the sequence is nonincreasing.
inline std::vector<double> bk_sequence(const Jet& p, int K, const GammaConfig& cfg = {}) {
  detail::require_origin(p);
  detail::require_finite(p);
  if (K < 0) throw InputError("K must be nonnegative");
  const MonomialPolynomial mp(p);
  const std::vector<double> origin(static_cast<std::size_t>(p.dim()), 0.0);
  std::vector<double> b(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    auto mn = minimize_on_ball(mp, origin, std::ldexp(1.0, -k), cfg.grid(p.dim()));
    b[static_cast<std::size_t>(k)] = std::max(0.0, -mn.value);
  }
  for (int k = K - 1; k >= 0; --k) b[static_cast<std::size_t>(k)] = std::max(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k) + 1]);
  return b;
}

/// Result of the completion search for the projected set.
struct CompletionResult {
  MembershipVerdict verdict;
  std::optional<Jet> completion;  // the m-jet P + T when one was certified
};

/// P in pi(Gamma_0^+): some homogeneous degree-m T with P + T in Gamma_0^+.
///
/// The nonnegativity constraints are linear in T's coefficients. They are sampled on a disc
/// and on geometrically shrinking radii, and the LP maximises a uniform slack s in
/// P + T + (1 - s)|x|^m >= 0. An infeasible LP (with s >= 0) proves nonmembership; an optimal
/// T is re-checked by gamma0plus_member, with failing points added as cuts.
inline CompletionResult gamma_tilde0_complete(const Jet& p, const GammaConfig& cfg = {}) {
  detail::require_origin(p);
  detail::require_finite(p);
  CompletionResult out;
  const int n = p.dim();
  const int m = p.degree() + 1;
  out.verdict = detail::derivative_bounds(p);
  if (out.verdict.status == Membership::nonmember) return out;

  Jet base = embed(p);
  const IndexSet& set = base.indices();
  const std::size_t top = set.order_begin(m);
  const std::size_t dt = set.size() - top;
  const std::size_t nv = dt + 1;  // T coefficients then s
  LinearProgram<double> lp(nv);
  for (std::size_t a = 0; a < dt; ++a) {
    std::vector<double> e(nv, 0.0);
    e[a] = 1.0;
    lp.add_le(e, 1.0, "top derivative bound");
    lp.add_ge(e, -1.0, "top derivative bound");
  }
  {
    std::vector<double> e(nv, 0.0);
    e[dt] = 1.0;
    lp.add_ge(e, 0.0, "slack");
    lp.add_le(e, 1.0, "slack");
  }
  const MonomialPolynomial mp(p);
  auto add_sample = [&](std::span<const double> x) {
    const double r = detail::norm(x);
    const double rm = std::pow(r, m);
    std::vector<double> row(nv, 0.0);
    for (std::size_t a = 0; a < dt; ++a) {
      double mono = 1.0 / set.factorial(top + a);
      for (int k = 0; k < n; ++k) mono *= std::pow(x[static_cast<std::size_t>(k)], set[top + a][static_cast<std::size_t>(k)]);
      row[a] = mono;
    }
    row[dt] = -rm;
    lp.add_ge(std::move(row), -mp(x) - rm, "nonnegativity sample");
  };
  const double R = 4.0;
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    for (int i = 0; i <= 400; ++i) add_sample(std::vector<double>{-R + 2.0 * R * i / 400});
    dirs = {{1.0}, {-1.0}};
  } else {
    const int g = 41;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        std::vector<double> x{-R + 2.0 * R * i / (g - 1), -R + 2.0 * R * j / (g - 1)};
        if (detail::norm(x) <= R) add_sample(x);
      }
    }
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 64;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  }
  for (int j = 1; j <= cfg.scale_depth; ++j) {
    const double r = std::ldexp(1.0, -j);
    for (const auto& u : dirs) {
      std::vector<double> x(u);
      for (auto& c : x) c *= r;
      add_sample(x);
    }
  }
  std::vector<double> objective(nv, 0.0);
  objective[dt] = -1.0;
  lp.set_objective(objective);

  for (int round = 0; round < 6; ++round) {
    auto sol = lp.solve();
    if (sol.status == LpStatus::infeasible) {
      out.verdict.status = Membership::nonmember;
      out.verdict.reason = "no degree-m completion satisfies the sampled nonnegativity constraints";
      return out;
    }
    if (sol.status != LpStatus::optimal) {
      out.verdict.status = Membership::undetermined;
      out.verdict.reason = std::string("completion LP ended with status ") + to_string(sol.status);
      return out;
    }
    Jet candidate = base;
    for (std::size_t a = 0; a < dt; ++a) candidate[top + a] = std::clamp(sol.x[a], -1.0, 1.0);
    MembershipVerdict check = gamma0plus_member(candidate, cfg);
    if (check.accepted()) {
      out.verdict = detail::combine(out.verdict, check);
      out.completion = candidate;
      return out;
    }
    if (check.status == Membership::nonmember && check.point && !check.eps_delta) {
      add_sample(*check.point);
      continue;
    }
    out.verdict.status = Membership::undetermined;
    out.verdict.margin = std::min(out.verdict.margin, check.margin);
    out.verdict.reason = "best completion fails re-verification: " + check.reason;
    return out;
  }
  out.verdict.status = Membership::undetermined;
  out.verdict.reason = "cutting-plane rounds exhausted";
  return out;
}

inline MembershipVerdict gamma_tilde0_member(const Jet& p, const GammaConfig& cfg = {}) { return gamma_tilde0_complete(p, cfg).verdict; }

/// M^-1 P(. + x) as a jet at the origin: the jet of P at x, rescaled.
inline Jet normalize_at(const Jet& p, std::span<const double> x, double M) {
  if (!(M > 0.0)) throw InputError("M must be positive");
  Jet q = std::equal(p.base().begin(), p.base().end(), x.begin(), x.end()) ? p : rebase(p, x);
  q = q.with_base(std::vector<double>(x.size(), 0.0));
  q *= 1.0 / M;
  return q;
}

namespace detail {

inline MembershipVerdict slice_check(const Jet& p, std::span<const double> x, std::optional<double> f_value, const GammaConfig& cfg) {
  MembershipVerdict v;
  if (!f_value) return v;
  const double at = std::equal(p.base().begin(), p.base().end(), x.begin(), x.end()) ? p[0] : p(x);
  const double err = std::abs(at - *f_value);
  const double allowed = cfg.eq_tol * std::max(1.0, std::abs(*f_value));
  v.margin = allowed - err;
  if (err > allowed) {
    v.status = Membership::nonmember;
    v.reason = "P(x) differs from f(x)";
  }
  return v;
}

}  // namespace detail

/// P in Gamma'_f(x, M) for the C^{m-1,1} flavor: the normalised jet M^-1 P(. + x) has
/// |d^beta| <= 1 for |beta| <= m-1 and P + |x|^m >= 0 globally; with f_value, also P(x) = f(x).
inline MembershipVerdict gamma_prime_member(const Jet& p, std::span<const double> x, double M, std::optional<double> f_value,
                                            const GammaConfig& cfg = {}) {
  detail::require_finite(p);
  const Jet q = normalize_at(p, x, M);
  MembershipVerdict v = detail::derivative_bounds(q);
  if (v.status == Membership::nonmember) return v;
  v = detail::combine(v, detail::slice_check(p, x, f_value, cfg));
  if (v.status == Membership::nonmember) return v;
  return detail::combine(v, global_nonnegativity(MonomialPolynomial(q), q.degree() + 1, cfg));
}

/// C^m flavor slice: M^-1 P(. + x) in pi(Gamma_0^+) and P(x) = f(x).
inline MembershipVerdict gamma_cm_member(const Jet& p, std::span<const double> x, double M, std::optional<double> f_value,
                                         const GammaConfig& cfg = {}) {
  detail::require_finite(p);
  MembershipVerdict v = detail::slice_check(p, x, f_value, cfg);
  if (v.status == Membership::nonmember) return v;
  return detail::combine(v, gamma_tilde0_member(normalize_at(p, x, M), cfg));
}

}  // namespace nonneg
