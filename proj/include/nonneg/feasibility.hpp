#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nonneg/dyadic.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/gamma.hpp"
#include "nonneg/jet.hpp"
#include "nonneg/lp.hpp"
#include "nonneg/whitney.hpp"

namespace nonneg {

struct FeasibilityConfig {
  double eps = 2e-3;       // nonnegativity rows use (1 - eps) M |y - x|^m
  int radii_per_octave = 2;
  int verify_factor = 10;  // the verification sample is this much denser
  int depth = 30;          // sampled radii run from R_cut down to R_cut 2^-depth
  int directions = 16;     // per circle for n = 2; 8n quasi-random directions for n >= 3
  int rounds = 3;          // refinement rounds after the first solve
  double tol = 1e-6;       // witnesses are re-verified at level M (1 + tol)
  bool verify_witness = true;
  double rel_tol = 1e-3;   // min_norm bisection stopping rule
  int bisection_steps = 40;
  GammaConfig gamma;
  LpOptions lp;
};

enum class Feasibility { feasible, infeasible, undetermined };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::infeasible: return "infeasible";
    case Feasibility::undetermined: return "undetermined";
  }
  return "unknown";
}

namespace detail {

/// Offsets t with |t| = r for the nonnegativity rows of a jet in R^n.
inline std::vector<std::vector<double>> sphere_directions(int n, int count) {
  std::vector<std::vector<double>> out;
  if (n == 1) return {{1.0}, {-1.0}};
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  for (int v = 0; v < n; ++v) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> e(static_cast<std::size_t>(n), 0.0);
      e[static_cast<std::size_t>(v)] = s;
      out.push_back(e);
    }
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  while (static_cast<int>(out.size()) < count * n / 2) {
    std::vector<double> u(static_cast<std::size_t>(n));
    double s = 0.0;
    for (double& c : u) {
      c = g(rng);
      s += c * c;
    }
    for (double& c : u) c /= std::sqrt(s);
    out.push_back(u);
  }
  return out;
}

/// Radius beyond which sum_{k < m} (sqrt(n) r)^k / k! < (1 - eps) r^m: past it, any jet with
/// |d^alpha P| <= M satisfies P + (1 - eps) M |t|^m > 0.
inline double nonnegativity_radius(int n, int m, double eps) {
  auto lower = [&](double r) {
    double s = 0.0, term = 1.0;
    for (int k = 0; k < m; ++k) {
      s += term;
      term *= std::sqrt(static_cast<double>(n)) * r / (k + 1);
    }
    return s;
  };
  double r = 1.0;
  while (lower(r) >= (1.0 - eps) * std::pow(r, m)) r *= 2.0;
  return r;
}

}  // namespace detail

/// Linear program over the stacked jet coefficients (derivatives at the base point) of a
/// Whitney field on S: interpolation, derivative bounds, Taylor pair bounds and sampled
/// nonnegativity P^x(y) + (1 - eps) M |y - x|^m >= 0. With a fixed level the constraints have
/// constant right-hand sides; without one, M is an extra variable and the objective is M.
class JetLP {
 public:
  JetLP(PointSet s, std::vector<double> f, int m, std::optional<double> level, const FeasibilityConfig& cfg)
      : s_(std::move(s)), f_(std::move(f)), m_(m), level_(level), cfg_(cfg), lp_(0) {
    if (m < 1) throw InputError("m must be at least 1");
    if (s_.size() != f_.size()) throw InputError("S and f differ in size");
    if (level && !(*level > 0.0)) throw InputError("M must be positive");
    n_ = s_.empty() ? 1 : static_cast<int>(s_[0].size());
    if (!s_.empty()) detail::require_points(s_, n_);
    jet_ = IndexSet::get(n_, m - 1)->size();
    lp_ = LinearProgram<double>(s_.size() * jet_ + (level ? 0 : 1));
    radius_ = detail::nonnegativity_radius(n_, m, cfg.eps);
    build();
  }

  int dim() const { return n_; }
  int m() const { return m_; }
  std::size_t points() const { return s_.size(); }
  std::size_t jet_size() const { return jet_; }
  double radius() const { return radius_; }
  std::size_t var(std::size_t point, std::size_t coef) const { return point * jet_ + coef; }
  std::optional<std::size_t> level_var() const {
    if (level_) return std::nullopt;
    return s_.size() * jet_;
  }
  const LinearProgram<double>& lp() const { return lp_; }

  /// Nonnegativity offsets at the base or the verification density.
  std::vector<std::vector<double>> offsets(bool dense) const {
    const int per = cfg_.radii_per_octave * (dense ? cfg_.verify_factor : 1);
    const auto dirs = detail::sphere_directions(n_, cfg_.directions * (dense ? cfg_.verify_factor : 1));
    std::vector<std::vector<double>> out;
    for (int k = 0; k <= cfg_.depth * per; ++k) {
      const double r = radius_ * std::exp2(-static_cast<double>(k) / per);
      for (const auto& u : dirs) {
        std::vector<double> t(u);
        for (double& c : t) c *= r;
        out.push_back(std::move(t));
      }
    }
    return out;
  }

  /// Row: P^{x_i}(x_i + t) + (1 - eps) M |t|^m >= 0, divided by |t|, with the value
  /// coefficient replaced by f(x_i). Otherwise the value term dominates the row and the LP
  /// tolerance swamps the gradient terms at small radii.
  void add_nonnegativity(std::size_t i, std::span<const double> t) {
    std::vector<double> row(lp_.num_vars(), 0.0);
    const auto [coef, weight, r] = nonnegativity_terms(t);
    for (std::size_t a = 1; a < jet_; ++a) row[var(i, a)] = coef[a] / r;
    double rhs = -f_[i] / r;
    if (level_) {
      rhs -= weight * *level_ / r;
    } else {
      row[*level_var()] = weight / r;
    }
    lp_.add_ge(std::move(row), rhs, "nonnegativity x" + std::to_string(i));
  }

  /// Value of the nonnegativity row at a solution (>= 0 when satisfied), in the same scaling.
  double nonnegativity_value(std::size_t i, std::span<const double> t, const std::vector<double>& x) const {
    const auto [coef, weight, r] = nonnegativity_terms(t);
    double s = f_[i] + weight * (level_ ? *level_ : x[*level_var()]);
    for (std::size_t a = 1; a < jet_; ++a) s += coef[a] * x[var(i, a)];
    return s / r;
  }

  WhitneyField field(const std::vector<double>& x) const {
    std::vector<Jet> jets;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      Jet j(s_[i], m_ - 1);
      for (std::size_t a = 0; a < jet_; ++a) j[a] = x[var(i, a)];
      jets.push_back(std::move(j));
    }
    return WhitneyField(std::move(jets));
  }

 private:
  PointSet s_;
  std::vector<double> f_;
  int m_;
  int n_ = 1;
  std::optional<double> level_;
  FeasibilityConfig cfg_;
  LinearProgram<double> lp_;
  std::size_t jet_ = 1;
  double radius_ = 1.0;

  std::tuple<std::vector<double>, double, double> nonnegativity_terms(std::span<const double> t) const {
    Jet probe(std::vector<double>(static_cast<std::size_t>(n_), 0.0), m_ - 1);
    std::vector<double> p = probe.shifted_powers(t);
    for (std::size_t a = 0; a < jet_; ++a) p[a] /= probe.indices().factorial(a);
    double r2 = 0.0;
    for (double c : t) r2 += c * c;
    const double r = std::sqrt(r2);
    return {std::move(p), (1.0 - cfg_.eps) * std::pow(r, m_), r};
  }

  /// a.x + sign * M * scale >= 0 or <= 0 depending on the form, with M fixed or variable.
  void add_bound(std::vector<double> row, double scale, const std::string& tag) {
    // row.x <= M scale and row.x >= -M scale
    if (level_) {
      lp_.add_le(row, *level_ * scale, tag);
      lp_.add_ge(std::move(row), -*level_ * scale, tag);
    } else {
      std::vector<double> upper(row), lower(std::move(row));
      upper[*level_var()] = -scale;  // row.x - M scale <= 0
      lp_.add_le(std::move(upper), 0.0, tag);
      lower[*level_var()] = scale;  // row.x + M scale >= 0
      lp_.add_ge(std::move(lower), 0.0, tag);
    }
  }

  void build() {
    const std::size_t V = lp_.num_vars();
    const auto& set = *IndexSet::get(n_, m_ - 1);
    for (std::size_t i = 0; i < s_.size(); ++i) {
      std::vector<double> row(V, 0.0);
      row[var(i, 0)] = 1.0;
      lp_.add_eq(row, f_[i], "interpolation x" + std::to_string(i));
      for (std::size_t a = 0; a < jet_; ++a) {
        std::vector<double> b(V, 0.0);
        b[var(i, a)] = 1.0;
        add_bound(std::move(b), 1.0, "derivative-bound x" + std::to_string(i) + " beta=(" + set[a].to_string() + ")");
      }
    }
    // d^beta (P^{x_i} - P^{x_j})(x_i), the rebased coefficients of P^{x_j} being linear in its jet
    for (std::size_t i = 0; i < s_.size(); ++i) {
      for (std::size_t j = 0; j < s_.size(); ++j) {
        if (i == j) continue;
        double d2 = 0.0;
        for (std::size_t v = 0; v < s_[i].size(); ++v) d2 += (s_[i][v] - s_[j][v]) * (s_[i][v] - s_[j][v]);
        const double d = std::sqrt(d2);
        std::vector<std::vector<double>> column(jet_);
        for (std::size_t a = 0; a < jet_; ++a) {
          Jet unit(s_[j], m_ - 1);
          unit[a] = 1.0;
          const Jet moved = rebase(unit, s_[i]);
          column[a].assign(moved.coefficients().begin(), moved.coefficients().end());
        }
        for (std::size_t b = 0; b < jet_; ++b) {
          std::vector<double> row(V, 0.0);
          row[var(i, b)] = 1.0;
          for (std::size_t a = 0; a < jet_; ++a) row[var(j, a)] -= column[a][b];
          add_bound(std::move(row), std::pow(d, m_ - set.order(b)),
                    "taylor-pair x" + std::to_string(i) + " x" + std::to_string(j) + " beta=(" + set[b].to_string() + ")");
        }
      }
    }
    if (m_ >= 2) {
      const auto t = offsets(false);
      for (std::size_t i = 0; i < s_.size(); ++i) {
        for (const auto& o : t) add_nonnegativity(i, o);
      }
    }
    if (!level_) {
      std::vector<double> c(V, 0.0);
      c[*level_var()] = 1.0;
      lp_.set_objective(std::move(c));
      std::vector<double> pos(V, 0.0);
      pos[*level_var()] = 1.0;
      lp_.add_ge(std::move(pos), 0.0, "level");
    }
  }
};

struct FeasibilityResult {
  Feasibility verdict = Feasibility::undetermined;
  std::optional<WhitneyField> witness;
  double level = 0.0;                    // M (fixed, or the optimum of the direct LP)
  std::vector<std::string> certificate;  // tags of the rows in an infeasibility certificate
  int rounds = 0;
  std::string reason;
};

namespace detail {

/// Solves the LP, adding violated verification-density nonnegativity rows for up to cfg.rounds
/// further solves, then re-checks the witness independently of the LP.
inline FeasibilityResult solve_jet_lp(JetLP& lp, const FeasibilityConfig& cfg) {
  FeasibilityResult out;
  const auto dense = lp.m() >= 2 ? lp.offsets(true) : std::vector<std::vector<double>>{};
  for (int round = 0;; ++round) {
    out.rounds = round;
    const LpResult<double> r = lp.lp().solve(cfg.lp);
    if (r.status == LpStatus::infeasible) {
      out.verdict = Feasibility::infeasible;
      for (std::size_t row : r.certificate_rows) out.certificate.push_back(lp.lp().tag(row));
      std::sort(out.certificate.begin(), out.certificate.end());
      out.certificate.erase(std::unique(out.certificate.begin(), out.certificate.end()), out.certificate.end());
      return out;
    }
    if (r.status != LpStatus::optimal) {
      out.reason = std::string("LP ended with status ") + to_string(r.status);
      return out;
    }
    out.level = lp.level_var() ? r.x[*lp.level_var()] : 0.0;
    bool added = false;
    for (std::size_t i = 0; i < lp.points(); ++i) {
      for (const auto& t : dense) {
        if (lp.nonnegativity_value(i, t, r.x) < -1e-12 * std::max(1.0, out.level)) {
          lp.add_nonnegativity(i, t);
          added = true;
        }
      }
    }
    if (added && round < cfg.rounds) continue;
    out.witness = lp.field(r.x);
    out.verdict = Feasibility::feasible;
    if (added) {
      out.verdict = Feasibility::undetermined;
      out.reason = "sampled nonnegativity still violated after refinement";
    }
    return out;
  }
}

inline bool witness_ok(const WhitneyField& w, const PointSet& s, std::span<const double> f, double M, const FeasibilityConfig& cfg, std::string& why) {
  if (w.empty()) return true;
  const double level = std::max(M, std::numeric_limits<double>::min()) * (1.0 + cfg.tol);
  const CompatVerdict c = taylor_compat_check(w, level);
  if (!c.ok) {
    why = "witness fails Taylor compatibility: " + std::to_string(c.seminorm);
    return false;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const MembershipVerdict v = gamma_prime_member(w[i], s[i], level, f[i], cfg.gamma);
    if (!v.accepted()) {
      why = "witness jet " + std::to_string(i) + " rejected: " + v.reason;
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Is there a Whitney field on S at level M with every jet in its slice of Gamma'?
inline FeasibilityResult whitney_feasible(const PointSet& s, std::span<const double> f, int m, double M, const FeasibilityConfig& cfg = {}) {
  if (!(M > 0.0)) throw InputError("M must be positive");
  if (s.size() != f.size()) throw InputError("S and f differ in size");
  FeasibilityResult out;
  out.level = M;
  if (s.empty()) {
    out.verdict = Feasibility::feasible;
    out.witness = WhitneyField();
    return out;
  }
  JetLP lp(s, std::vector<double>(f.begin(), f.end()), m, M, cfg);
  out = detail::solve_jet_lp(lp, cfg);
  out.level = M;
  if (out.verdict == Feasibility::feasible && cfg.verify_witness && !detail::witness_ok(*out.witness, s, f, M, cfg, out.reason))
    out.verdict = Feasibility::undetermined;
  return out;
}

enum class MinNormMethod { direct, bisection };

struct MinNormResult {
  double M = 0.0;
  std::optional<WhitneyField> witness;
  Feasibility status = Feasibility::undetermined;
  int solves = 0;
};

/// Smallest M at which whitney_feasible succeeds. The direct method minimises M as an LP
/// variable; bisection brackets it over [1e-3 max f, a Lipschitz-type upper bound].
inline MinNormResult min_norm(const PointSet& s, std::span<const double> f, int m, MinNormMethod method = MinNormMethod::direct,
                              const FeasibilityConfig& cfg = {}) {
  if (s.empty()) throw InputError("S must be nonempty");
  if (s.size() != f.size()) throw InputError("S and f differ in size");
  MinNormResult out;
  double fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, v);
  if (method == MinNormMethod::direct) {
    JetLP lp(s, std::vector<double>(f.begin(), f.end()), m, std::nullopt, cfg);
    FeasibilityResult r = detail::solve_jet_lp(lp, cfg);
    out.solves = r.rounds + 1;
    out.status = r.verdict;
    if (r.verdict != Feasibility::feasible) return out;
    // f == 0 gives 0, the lower end of the search range: every M > 0 works with the zero field
    out.M = std::max(r.level, 0.0);
    out.witness = r.witness;
    if (cfg.verify_witness) {
      std::string why;
      if (!detail::witness_ok(*out.witness, s, f, out.M, cfg, why)) out.status = Feasibility::undetermined;
    }
    return out;
  }
  // upper bound: the larger of max f and the largest pairwise slope, grown until feasible
  double hi = std::max(fmax, 1e-300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d2 = 0.0;
      for (std::size_t v = 0; v < s[i].size(); ++v) d2 += (s[i][v] - s[j][v]) * (s[i][v] - s[j][v]);
      hi = std::max(hi, std::abs(f[i] - f[j]) / std::pow(std::sqrt(d2), m));
    }
  }
  double lo = 1e-3 * fmax;
  if (lo == 0.0) {
    out.M = 0.0;
    out.status = Feasibility::feasible;
    out.witness = whitney_feasible(s, f, m, 1.0, cfg).witness;
    return out;
  }
  FeasibilityResult best;
  for (int grow = 0;; ++grow) {
    best = whitney_feasible(s, f, m, hi, cfg);
    ++out.solves;
    if (best.verdict == Feasibility::feasible) break;
    if (grow == 20) throw ConstructionError("min_norm: no feasible level found below " + std::to_string(hi));
    hi *= 4.0;
  }
  const FeasibilityResult at_lo = whitney_feasible(s, f, m, lo, cfg);
  ++out.solves;
  if (at_lo.verdict == Feasibility::feasible) {
    best = at_lo;
    hi = lo;
  }
  for (int it = 0; it < cfg.bisection_steps && hi - lo > cfg.rel_tol * hi * 0.5; ++it) {
    const double mid = 0.5 * (lo + hi);
    FeasibilityResult r = whitney_feasible(s, f, m, mid, cfg);
    ++out.solves;
    if (r.verdict == Feasibility::feasible) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  out.M = hi;
  out.witness = best.witness;
  out.status = Feasibility::feasible;
  return out;
}

struct SubsetRecord {
  std::vector<std::size_t> points;
  double M = 0.0;
  Feasibility status = Feasibility::undetermined;
};

struct FinitenessResult {
  double M_subset = 0.0;
  double M_global = 0.0;
  double ratio = 0.0;
  int k_sharp = 0;
  std::vector<SubsetRecord> table;
};

/// 2 dim P for P the polynomials of degree <= m - 1 in n variables.
inline int default_k_sharp(int n, int m) { return 2 * static_cast<int>(IndexSet::get(n, m - 1)->size()); }

/// Number of subsets of size 1..k of an N-set, saturating at limit + 1.
inline std::uint64_t subset_count(std::size_t N, int k, std::uint64_t limit) {
  std::uint64_t total = 0, c = 1;
  for (int j = 1; j <= k && static_cast<std::size_t>(j) <= N; ++j) {
    c = c * (N - static_cast<std::size_t>(j) + 1) / static_cast<std::uint64_t>(j);
    total += c;
    if (total > limit) return limit + 1;
  }
  return total;
}

/// M_global / M_subset with M_subset the largest min_norm over subsets of size <= k_sharp.
/// Restricting a field to a subset keeps it feasible, so the maximum is attained on subsets of
/// size min(k_sharp, #E); only those are solved.
inline FinitenessResult finiteness_gap(const PointSet& e, std::span<const double> f, int m, int k_sharp, const FeasibilityConfig& cfg = {},
                                       std::uint64_t budget = 1000000, unsigned threads = 0) {
  if (e.empty()) throw InputError("E must be nonempty");
  if (k_sharp < 1) throw InputError("k_sharp must be positive");
  if (subset_count(e.size(), k_sharp, budget) > budget)
    throw BudgetError("subset enumeration exceeds the budget of " + std::to_string(budget) + " subsets; use a smaller E or k_sharp");
  FinitenessResult out;
  out.k_sharp = k_sharp;
  const std::size_t k = std::min(e.size(), static_cast<std::size_t>(k_sharp));
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    out.table.push_back({pick, 0.0, Feasibility::undetermined});
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == e.size() - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  // records are filled in place, so the max below does not depend on completion order
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < out.table.size(); r += stride) {
      PointSet s;
      std::vector<double> fs;
      for (std::size_t i : out.table[r].points) {
        s.push_back(e[i]);
        fs.push_back(f[i]);
      }
      const MinNormResult res = min_norm(s, fs, m, MinNormMethod::direct, cfg);
      out.table[r].M = res.M;
      out.table[r].status = res.status;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads ? threads : std::thread::hardware_concurrency(), 1, out.table.size());
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w, workers));
    for (auto& j : jobs) j.get();
  }
  for (const auto& r : out.table) out.M_subset = std::max(out.M_subset, r.M);
  out.M_global = min_norm(e, f, m, MinNormMethod::direct, cfg).M;
  out.ratio = out.M_subset > 0.0 ? out.M_global / out.M_subset : 1.0;
  return out;
}

/// A convex set { x : a_j . x >= b_j } in R^D.
struct Polyhedron {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
};

struct HellyResult {
  bool tuples_nonempty = true;  // every (D+1)-wise intersection is nonempty
  bool all_nonempty = true;     // the full intersection is nonempty
  std::size_t tuples_checked = 0;
  std::vector<std::size_t> empty_tuple;  // first empty tuple found
  bool consistent() const { return !tuples_nonempty || all_nonempty; }
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

inline bool intersection_nonempty(const std::vector<Polyhedron>& sets, std::span<const std::size_t> which, std::size_t D) {
  LinearProgram<Rational> lp(D);
  for (std::size_t k : which) {
    for (std::size_t j = 0; j < sets[k].a.size(); ++j) {
      std::vector<Rational> row(D);
      for (std::size_t v = 0; v < D; ++v) row[v] = Rational(sets[k].a[j][v]);
      lp.add_ge(std::move(row), Rational(sets[k].b[j]));
    }
  }
  return lp.solve().status != LpStatus::infeasible;
}

}  // namespace detail

/// Checks Helly's theorem on polyhedra in R^D with exact rational LPs: all (D+1)-wise
/// intersections nonempty must force a nonempty total intersection.
inline HellyResult helly_check(const std::vector<Polyhedron>& sets, std::size_t D, std::uint64_t budget = 1000000) {
  if (D < 1 || D > 20) throw InputError("Helly check needs 1 <= D <= 20");
  for (const auto& s : sets) {
    if (s.a.size() != s.b.size()) throw InputError("polyhedron rows and bounds differ in number");
    for (const auto& row : s.a) {
      if (row.size() != D) throw InputError("polyhedron row has wrong width");
    }
  }
  HellyResult out;
  const std::size_t N = sets.size();
  const std::size_t k = std::min(N, D + 1);
  std::uint64_t count = 1;
  for (std::size_t j = 1; j <= k; ++j) {
    count = count * (N - j + 1) / j;
    if (count > budget) throw BudgetError("Helly tuple enumeration exceeds the budget");
  }
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (k > 0) {
    ++out.tuples_checked;
    if (!detail::intersection_nonempty(sets, pick, D)) {
      out.tuples_nonempty = false;
      out.empty_tuple = pick;
      break;
    }
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == N - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  std::vector<std::size_t> all(N);
  for (std::size_t i = 0; i < N; ++i) all[i] = i;
  out.all_nonempty = detail::intersection_nonempty(sets, all, D);
  return out;
}

}  // namespace nonneg
