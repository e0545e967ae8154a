#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "nonneg/errors.hpp"

namespace nonneg {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<Scalar> x;
  Scalar objective{0};
  /// For infeasible problems: rows carrying positive weight in a Farkas certificate.
  std::vector<std::size_t> certificate_rows;
  long iterations = 0;
};

struct LpOptions {
  long max_iterations = 0;  // 0 = automatic
  double tolerance = 1e-9;  // ignored for exact scalars
};

/// minimize c.x subject to rows a_i.x >= b_i, x free.
///
/// Solved through the dual, max b.y s.t. A^T y = c, y >= 0, with a two-phase dense tableau
/// simplex: the dual has one equation per primal variable, so the tableau stays small when
/// there are many more rows than variables. The primal point is read off the simplex
/// multipliers and, in floating point, re-solved from the active rows.
template <typename Scalar>
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars) : n_(num_vars), objective_(num_vars, Scalar(0)) {}

  std::size_t num_vars() const { return n_; }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<Scalar>& row(std::size_t i) const { return rows_[i]; }
  const Scalar& rhs(std::size_t i) const { return rhs_[i]; }
  const std::string& tag(std::size_t i) const { return tags_[i]; }

  std::size_t add_ge(std::vector<Scalar> coef, Scalar rhs, std::string tag = {}) {
    if (coef.size() != n_) throw ContractViolation("LP row has wrong width");
    rows_.push_back(std::move(coef));
    rhs_.push_back(std::move(rhs));
    tags_.push_back(std::move(tag));
    return rows_.size() - 1;
  }
  std::size_t add_le(std::vector<Scalar> coef, Scalar rhs, std::string tag = {}) {
    for (auto& c : coef) c = -c;
    return add_ge(std::move(coef), -rhs, std::move(tag));
  }
  void add_eq(const std::vector<Scalar>& coef, const Scalar& rhs, const std::string& tag = {}) {
    add_ge(coef, rhs, tag);
    add_le(coef, rhs, tag);
  }

  void set_objective(std::vector<Scalar> c) {
    if (c.size() != n_) throw ContractViolation("LP objective has wrong width");
    objective_ = std::move(c);
  }

  /// Largest violation max_i (b_i - a_i.x)^+.
  Scalar max_violation(const std::vector<Scalar>& x) const {
    Scalar worst(0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      Scalar s(0);
      for (std::size_t j = 0; j < n_; ++j) s += rows_[i][j] * x[j];
      if (rhs_[i] - s > worst) worst = rhs_[i] - s;
    }
    return worst;
  }

  LpResult<Scalar> solve(const LpOptions& opt = {}) const;

 private:
  std::size_t n_;
  std::vector<std::vector<Scalar>> rows_;
  std::vector<Scalar> rhs_;
  std::vector<std::string> tags_;
  std::vector<Scalar> objective_;
};

namespace detail {

template <typename Scalar>
constexpr bool is_floating = std::is_floating_point_v<Scalar>;

template <typename Scalar>
Scalar abs_value(const Scalar& v) {
  return v < Scalar(0) ? Scalar(-v) : v;
}

/// Dense tableau for min cost.y, T y = rhs, y >= 0, with an explicit basis.
template <typename Scalar>
struct Tableau {
  std::size_t rows = 0, cols = 0;
  std::vector<Scalar> t;    // rows x cols
  std::vector<Scalar> rhs;  // rows
  std::vector<std::size_t> basis;
  std::vector<Scalar> reduced;  // cols
  Scalar value{0};              // -objective

  Scalar& at(std::size_t i, std::size_t j) { return t[i * cols + j]; }
  const Scalar& at(std::size_t i, std::size_t j) const { return t[i * cols + j]; }

  void price(const std::vector<Scalar>& cost) {
    reduced = cost;
    value = Scalar(0);
    for (std::size_t i = 0; i < rows; ++i) {
      const Scalar cb = cost[basis[i]];
      if (cb == Scalar(0)) continue;
      for (std::size_t j = 0; j < cols; ++j) reduced[j] -= cb * at(i, j);
      value -= cb * rhs[i];
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    const Scalar p = at(r, e);
    for (std::size_t j = 0; j < cols; ++j) at(r, j) /= p;
    rhs[r] /= p;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const Scalar f = at(i, e);
      if (f == Scalar(0)) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(r, j);
      rhs[i] -= f * rhs[r];
    }
    const Scalar f = reduced[e];
    if (f != Scalar(0)) {
      for (std::size_t j = 0; j < cols; ++j) reduced[j] -= f * at(r, j);
      value -= f * rhs[r];
    }
    basis[r] = e;
  }

  enum class Outcome { optimal, unbounded, limit };

  /// Primal simplex on the current basis. Dantzig pricing, switching to Bland's rule after
  /// a run of degenerate pivots.
  Outcome run(const std::vector<char>& may_enter, Scalar dtol, Scalar ptol, long& iterations, long limit,
              std::size_t& unbounded_column) {
    long degenerate = 0;
    while (true) {
      if (iterations >= limit) return Outcome::limit;
      const bool bland = degenerate > 50;
      std::size_t e = cols;
      Scalar best = -dtol;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!may_enter[j] || !(reduced[j] < best)) continue;
        e = j;
        if (bland) break;
        best = reduced[j];
      }
      if (e == cols) return Outcome::optimal;
      std::size_t r = rows;
      Scalar ratio(0);
      for (std::size_t i = 0; i < rows; ++i) {
        const Scalar a = at(i, e);
        if (!(a > ptol)) continue;
        const Scalar q = rhs[i] / a;
        if (r == rows || q < ratio) {
          r = i;
          ratio = q;
        } else if (q == ratio) {
          if (bland ? basis[i] < basis[r] : abs_value(a) > abs_value(at(r, e))) r = i;
        }
      }
      if (r == rows) {
        unbounded_column = e;
        return Outcome::unbounded;
      }
      if (ratio == Scalar(0)) {
        ++degenerate;
      } else {
        degenerate = 0;
      }
      pivot(r, e);
      ++iterations;
    }
  }
};

}  // namespace detail

template <typename Scalar>
LpResult<Scalar> LinearProgram<Scalar>::solve(const LpOptions& opt) const {
  using detail::abs_value;
  LpResult<Scalar> result;
  const std::size_t R = rows_.size();
  const Scalar tol = detail::is_floating<Scalar> ? Scalar(opt.tolerance) : Scalar(0);

  // Row scaling by max(|a_i|, |b_i|) (floating point only) and empty-row screening.
  std::vector<Scalar> scale(R, Scalar(1));
  for (std::size_t i = 0; i < R; ++i) {
    Scalar mx(0);
    for (const auto& v : rows_[i]) mx = std::max(mx, abs_value(v));
    if (mx == Scalar(0)) {
      if (rhs_[i] > tol) {
        result.status = LpStatus::infeasible;
        result.certificate_rows = {i};
        return result;
      }
      scale[i] = Scalar(0);  // drop
      continue;
    }
    if constexpr (detail::is_floating<Scalar>) scale[i] = Scalar(1) / std::max(mx, abs_value(rhs_[i]));
  }

  // Dual tableau: one row per primal variable, columns y_1..y_R then artificials.
  detail::Tableau<Scalar> tab;
  tab.rows = n_;
  tab.cols = R + n_;
  tab.t.assign(tab.rows * tab.cols, Scalar(0));
  tab.rhs.assign(n_, Scalar(0));
  tab.basis.resize(n_);
  std::vector<Scalar> sign(n_, Scalar(1));
  for (std::size_t j = 0; j < n_; ++j) {
    if (objective_[j] < Scalar(0)) sign[j] = Scalar(-1);
    tab.rhs[j] = sign[j] * objective_[j];
    for (std::size_t i = 0; i < R; ++i) {
      if (scale[i] != Scalar(0)) tab.at(j, i) = sign[j] * rows_[i][j] * scale[i];
    }
    tab.at(j, R + j) = Scalar(1);
    tab.basis[j] = R + j;
  }
  std::vector<char> structural(tab.cols, 0);
  for (std::size_t i = 0; i < R; ++i) structural[i] = scale[i] != Scalar(0);

  Scalar bmax(1);
  for (std::size_t i = 0; i < R; ++i) bmax = std::max(bmax, abs_value(Scalar(rhs_[i] * scale[i])));
  Scalar cmax(1);
  for (const auto& c : objective_) cmax = std::max(cmax, abs_value(c));
  const long limit = opt.max_iterations > 0 ? opt.max_iterations : 50 * static_cast<long>(tab.cols + 10);
  std::size_t unbounded_col = 0;

  // Phase 1: drive the artificials to zero.
  std::vector<Scalar> cost1(tab.cols, Scalar(0));
  for (std::size_t j = 0; j < n_; ++j) cost1[R + j] = Scalar(1);
  tab.price(cost1);
  auto out = tab.run(structural, tol, tol, result.iterations, limit, unbounded_col);
  if (out == detail::Tableau<Scalar>::Outcome::limit) return result;
  if (-tab.value > tol * cmax) {
    // the dual is infeasible, so the primal is unbounded or infeasible; with c = 0 this
    // cannot happen
    result.status = LpStatus::unbounded;
    return result;
  }
  // Pivot zero-level artificials out where possible; rows left behind are redundant.
  for (std::size_t r = 0; r < n_; ++r) {
    if (tab.basis[r] < R) continue;
    std::size_t best = tab.cols;
    Scalar mag = tol;
    for (std::size_t j = 0; j < R; ++j) {
      if (structural[j] && abs_value(tab.at(r, j)) > mag) {
        mag = abs_value(tab.at(r, j));
        best = j;
      }
    }
    if (best != tab.cols) tab.pivot(r, best);
  }

  // Phase 2: minimize -b.y.
  std::vector<Scalar> cost2(tab.cols, Scalar(0));
  for (std::size_t i = 0; i < R; ++i) cost2[i] = -rhs_[i] * scale[i];
  tab.price(cost2);
  out = tab.run(structural, tol * bmax, tol, result.iterations, limit, unbounded_col);
  if (out == detail::Tableau<Scalar>::Outcome::limit) return result;
  if (out == detail::Tableau<Scalar>::Outcome::unbounded) {
    // dual ray: y_e = 1, y_B = -T[:, e]; its support is a Farkas certificate
    result.status = LpStatus::infeasible;
    result.certificate_rows.push_back(unbounded_col);
    for (std::size_t r = 0; r < n_; ++r) {
      if (tab.basis[r] < R && tab.at(r, unbounded_col) < Scalar(0)) result.certificate_rows.push_back(tab.basis[r]);
    }
    std::sort(result.certificate_rows.begin(), result.certificate_rows.end());
    return result;
  }

  // Multipliers pi_j = -reduced(artificial j); x = -sign * pi.
  result.x.assign(n_, Scalar(0));
  for (std::size_t j = 0; j < n_; ++j) result.x[j] = sign[j] * tab.reduced[R + j];

  if constexpr (detail::is_floating<Scalar>) {
    // Complementary slackness: the basic dual columns are active primal rows.
    bool full = true;
    for (std::size_t r = 0; r < n_; ++r) full = full && tab.basis[r] < R;
    if (full && n_ > 0) {
      Eigen::MatrixXd A(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
      Eigen::VectorXd b(static_cast<Eigen::Index>(n_));
      for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t i = tab.basis[r];
        for (std::size_t j = 0; j < n_; ++j) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows_[i][j];
        b(static_cast<Eigen::Index>(r)) = rhs_[i];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.isInvertible()) {
        Eigen::VectorXd xs = lu.solve(b);
        std::vector<double> cand(xs.data(), xs.data() + xs.size());
        bool finite = true;
        for (double v : cand) finite = finite && std::isfinite(v);
        if (finite && max_violation(cand) <= max_violation(result.x)) result.x = std::move(cand);
      }
    }
  }
  result.objective = Scalar(0);
  for (std::size_t j = 0; j < n_; ++j) result.objective += objective_[j] * result.x[j];
  result.status = LpStatus::optimal;
  return result;
}

}  // namespace nonneg
