#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonneg/bumps.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/function.hpp"
#include "nonneg/gamma.hpp"
#include "nonneg/jet.hpp"

namespace nonneg {

namespace detail {

inline std::string point_text(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
  return s + ")";
}

/// chi(y / 2): 1 on |y| <= 1/2, 0 for |y| >= 1.
inline Function unit_cutoff(int m, int n) {
  return fn::affine(build_bumps(m, n).chi, 0.5, std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

}  // namespace detail

/// F(y) = M chi(y - x) (q(y - x) + |y - x|^m) with q = M^-1 P(. + x) and chi = 1 near 0,
/// supported in B(0, 1). F >= 0 and J_x F = P.
inline Function extend_jet_cm1(const Jet& p, std::span<const double> x, double M, const GammaConfig& cfg = {}) {
  const MembershipVerdict v = gamma_prime_member(p, x, M, std::nullopt, cfg);
  if (!v.accepted())
    throw PreconditionError("jet at " + detail::point_text(x) + " is not accepted at level M: " + std::string(to_string(v.status)) + ", " + v.reason);
  const int n = p.dim(), m = p.degree() + 1;
  const Jet q = normalize_at(p, x, M);
  const Function local = fn::product(detail::unit_cutoff(std::max(m, 1), n), fn::polynomial(q) + fn::norm_power(n, m));
  return M * fn::translate(local, detail::to_vector(x));
}

/// F = chi (P + sum_{k <= K} b_k phi_k) for an m-jet P in Gamma_0^+ based at 0.
inline Function extend_jet_cm(const Jet& p, int k_max = 20, const GammaConfig& cfg = {}) {
  if (k_max < 0) throw InputError("K_max must be nonnegative");
  const MembershipVerdict v = gamma0plus_member(p, cfg);
  if (!v.accepted()) throw PreconditionError("jet is not in Gamma_0^+: " + std::string(to_string(v.status)) + ", " + v.reason);
  const int n = p.dim(), m = p.degree();
  const Bumps bumps = build_bumps(m, n);
  const std::vector<double> b = bk_sequence(p, k_max, cfg);
  std::vector<Function> terms{fn::polynomial(p)};
  std::vector<double> weights{1.0};
  for (int k = 0; k <= k_max; ++k) {
    if (b[static_cast<std::size_t>(k)] == 0.0) continue;
    terms.push_back(bumps.phi_k(k));
    weights.push_back(b[static_cast<std::size_t>(k)]);
  }
  return fn::product(bumps.chi, fn::sum(std::move(terms), std::move(weights)));
}

/// C^m flavor at a point: completes the (m-1)-jet M^-1 P(. + x) to an m-jet in Gamma_0^+,
/// extends it, and moves the result back: F(y) = M G(y - x).
inline Function extend_jet_cm_at(const Jet& p, std::span<const double> x, double M, int k_max = 20, const GammaConfig& cfg = {}) {
  const CompletionResult c = gamma_tilde0_complete(normalize_at(p, x, M), cfg);
  if (!c.verdict.accepted() || !c.completion)
    throw PreconditionError("jet at " + detail::point_text(x) + " has no certified completion: " + std::string(to_string(c.verdict.status)) + ", " +
                            c.verdict.reason);
  return M * fn::translate(extend_jet_cm(*c.completion, k_max, cfg), detail::to_vector(x));
}

struct PatchResult {
  Function F;
  double c0 = 0.0;     // radius factor: theta_2 vanishes outside B(x, c0 delta)
  bool swapped = false;
};

struct PatchConfig {
  double tol = 1e-9;     // for Q1 Q1 + Q2 Q2 = 1 and the derivative bounds on Q_i
  int grid = 201;        // per axis, for the nonnegativity and c0 searches
  int max_halvings = 20;
};

/// F = theta_1^2 F_1 + theta_2^2 F_2 where theta_i = theta~_i (theta~_1^2 + theta~_2^2)^-1/2,
/// theta~_1 = chi Q_1 + 1 - chi, theta~_2 = chi Q_2, and chi = 1 near x, supported in B(x, c0 delta).
/// Then J_x F = Q_1 Q_1 P_1 + Q_2 Q_2 P_2 (jet products at x) and F = F_1 away from x.
inline PatchResult patch_pair(Function f1, Function f2, Jet p1, Jet p2, Jet q1, Jet q2, std::span<const double> x, double delta, double M,
                              const PatchConfig& cfg = {}) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (!(M > 0.0)) throw InputError("M must be positive");
  const std::vector<double> xv = detail::to_vector(x);
  for (const Jet* j : {&p1, &p2, &q1, &q2}) {
    if (!std::equal(j->base().begin(), j->base().end(), xv.begin(), xv.end())) throw ContractViolation("patch jets must be based at x");
  }
  const int n = p1.dim(), m = p1.degree() + 1;
  // |d^beta Q_i(x)| <= delta^-|beta|
  for (const Jet* q : {&q1, &q2}) {
    for (std::size_t i = 0; i < q->size(); ++i) {
      const double bound = std::pow(delta, -q->indices().order(i));
      if (std::abs((*q)[i]) > bound * (1.0 + cfg.tol)) throw InputError("Q_i violates the derivative bound delta^-|beta|");
    }
  }
  // Q1 Q1 + Q2 Q2 = 1
  Jet unity = multiply(q1, q1) + multiply(q2, q2);
  unity[0] -= 1.0;
  if (max_abs_coefficient(unity) > cfg.tol) throw InputError("Q1 Q1 + Q2 Q2 differs from 1");
  // J_x F_i = P_i and F_i >= 0 near x
  for (auto [f, p] : {std::pair{&f1, &p1}, std::pair{&f2, &p2}}) {
    const Jet j = f->jet(x, m - 1);
    if (max_abs_difference(j, *p) > cfg.tol * std::max(1.0, max_abs_coefficient(*p))) throw PreconditionError("J_x F_i differs from P_i");
  }
  PatchResult out;
  if (std::abs(q2[0]) > std::abs(q1[0])) {
    std::swap(f1, f2);
    std::swap(p1, p2);
    std::swap(q1, q2);
    out.swapped = true;
  }
  if (q1[0] < 0.0) q1 *= -1.0;

  const Function Q1 = fn::polynomial(q1), Q2 = fn::polynomial(q2);
  auto min_on_ball = [&](const Function& f, double r) {
    double best = std::numeric_limits<double>::infinity();
    const int g = n == 1 ? cfg.grid : std::max(21, cfg.grid / 5);
    std::vector<double> y(xv);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      double r2 = 0.0;
      for (std::size_t v = 0; v < y.size(); ++v) {
        const double t = -r + 2.0 * r * idx[v] / (g - 1);
        y[v] = xv[v] + t;
        r2 += t * t;
      }
      if (r2 <= r * r) best = std::min(best, f(y));
      std::size_t v = 0;
      for (; v < idx.size(); ++v) {
        if (++idx[v] < g) break;
        idx[v] = 0;
      }
      if (v == idx.size()) break;
    }
    return best;
  };
  for (const Function* f : {&f1, &f2}) {
    if (min_on_ball(*f, delta) < -cfg.tol) throw PreconditionError("F_i is negative near x");
  }
  double c0 = 0.5;
  int halvings = 0;
  while (min_on_ball(Q1, c0 * delta) < 0.1) {
    if (++halvings > cfg.max_halvings) throw ConstructionError("no radius found with Q1 >= 1/10");
    c0 *= 0.5;
  }
  out.c0 = c0;
  // chi(y) = chi0((y - x) / (2 c0 delta)), chi0 supported in B(0, 1/2)
  const Function chi = fn::affine(build_bumps(std::max(m, 1), n).chi, 1.0 / (2.0 * c0 * delta), xv);
  const Function one = fn::constant(n, 1.0);
  const Function t1 = chi * Q1 + (one - chi);
  const Function t2 = chi * Q2;
  const Function inv = fn::rsqrt(t1 * t1 + t2 * t2);
  const Function theta2 = t2 * inv;
  out.F = f1 + (theta2 * theta2) * (f2 - f1);
  return out;
}

}  // namespace nonneg
