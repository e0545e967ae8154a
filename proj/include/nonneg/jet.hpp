#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "nonneg/errors.hpp"
#include "nonneg/multi_index.hpp"

namespace nonneg {

/// A polynomial of bounded degree stored as its derivatives at a base point:
///
///   P(y) = sum_{|alpha| <= degree} c_alpha / alpha! * (y - base)^alpha,   c_alpha = d^alpha P(base).
///
/// With degree m-1 this is an element of the jet space at `base`; degree m gives the
/// m-jets used for the C^m model set. Scalar is double on the main path; exact rationals
/// are used by the oracle tests.
template <typename Scalar>
class BasicJet {
 public:
  BasicJet() = default;

  BasicJet(std::vector<double> base, int degree)
      : base_(std::move(base)), set_(IndexSet::get(static_cast<int>(base_.size()), degree)), derivs_(set_->size(), Scalar(0)) {}

  static BasicJet constant(std::vector<double> base, int degree, Scalar c) {
    BasicJet j(std::move(base), degree);
    j.derivs_[0] = c;
    return j;
  }

  int dim() const { return static_cast<int>(base_.size()); }
  int degree() const { return set_->degree(); }
  std::size_t size() const { return derivs_.size(); }
  std::span<const double> base() const { return base_; }
  const IndexSet& indices() const { return *set_; }
  std::span<const Scalar> coefficients() const { return derivs_; }
  std::span<Scalar> coefficients() { return derivs_; }

  Scalar& operator[](std::size_t i) { return derivs_[i]; }
  const Scalar& operator[](std::size_t i) const { return derivs_[i]; }

  /// d^alpha P(base); zero when |alpha| exceeds the degree.
  Scalar deriv(const MultiIndex& alpha) const {
    const long p = set_->position(alpha);
    return p < 0 ? Scalar(0) : derivs_[static_cast<std::size_t>(p)];
  }
  void set(const MultiIndex& alpha, Scalar value) {
    const long p = set_->position(alpha);
    if (p < 0) throw ContractViolation("multi-index exceeds jet degree");
    derivs_[static_cast<std::size_t>(p)] = std::move(value);
  }

  /// Coefficient of (y - base)^alpha in the monomial expansion.
  Scalar monomial(std::size_t i) const { return derivs_[i] / Scalar(set_->factorial(i)); }

  /// P(y).
  Scalar operator()(std::span<const double> y) const {
    check_point(y);
    const std::vector<Scalar> powers = shifted_powers(y);
    Scalar sum(0);
    for (std::size_t i = 0; i < derivs_.size(); ++i) sum += derivs_[i] * powers[i] / Scalar(set_->factorial(i));
    return sum;
  }

  /// (y - base)^alpha for every alpha in the index set.
  std::vector<Scalar> shifted_powers(std::span<const double> y) const {
    const int n = dim();
    std::vector<Scalar> h(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) h[static_cast<std::size_t>(k)] = Scalar(y[static_cast<std::size_t>(k)]) - Scalar(base_[static_cast<std::size_t>(k)]);
    std::vector<Scalar> powers(derivs_.size(), Scalar(1));
    // Each index of order d >= 1 is some lower index times one coordinate.
    for (std::size_t i = 1; i < derivs_.size(); ++i) {
      const MultiIndex& a = (*set_)[i];
      int axis = 0;
      while (a[static_cast<std::size_t>(axis)] == 0) ++axis;
      const long lower = set_->position(a - MultiIndex::unit(n, axis));
      powers[i] = powers[static_cast<std::size_t>(lower)] * h[static_cast<std::size_t>(axis)];
    }
    return powers;
  }

  BasicJet& operator+=(const BasicJet& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < derivs_.size(); ++i) derivs_[i] += o.derivs_[i];
    return *this;
  }
  BasicJet& operator-=(const BasicJet& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < derivs_.size(); ++i) derivs_[i] -= o.derivs_[i];
    return *this;
  }
  BasicJet& operator*=(const Scalar& s) {
    for (auto& c : derivs_) c *= s;
    return *this;
  }
  friend BasicJet operator+(BasicJet a, const BasicJet& b) { return a += b; }
  friend BasicJet operator-(BasicJet a, const BasicJet& b) { return a -= b; }
  friend BasicJet operator*(BasicJet a, const Scalar& s) { return a *= s; }
  friend BasicJet operator*(const Scalar& s, BasicJet a) { return a *= s; }

  bool same_base(const BasicJet& o) const { return base_ == o.base_; }

  /// Same coefficient vector, reinterpreted at another base point: Q(y) = P(y - new_base + base).
  BasicJet with_base(std::vector<double> new_base) const {
    if (new_base.size() != base_.size()) throw ContractViolation("base dimension mismatch");
    BasicJet j = *this;
    j.base_ = std::move(new_base);
    return j;
  }

  void check_compatible(const BasicJet& o) const {
    if (dim() != o.dim()) throw ContractViolation("jet dimension mismatch");
    if (degree() != o.degree()) throw ContractViolation("jet degree mismatch");
    if (!same_base(o)) throw ContractViolation("jets are based at different points");
  }

 private:
  void check_point(std::span<const double> y) const {
    if (y.size() != base_.size()) throw ContractViolation("point dimension mismatch");
  }

  std::vector<double> base_;
  std::shared_ptr<const IndexSet> set_;
  std::vector<Scalar> derivs_;
};

using Jet = BasicJet<double>;

/// P (.)_x Q: the product truncated to the common degree, i.e. J_x(PQ).
template <typename Scalar>
BasicJet<Scalar> multiply(const BasicJet<Scalar>& p, const BasicJet<Scalar>& q) {
  if (p.dim() != q.dim()) throw ContractViolation("jet dimension mismatch");
  if (!p.same_base(q)) throw ContractViolation("jets are based at different points");
  if (p.degree() != q.degree()) throw ContractViolation("jet degree mismatch");
  BasicJet<Scalar> r(std::vector<double>(p.base().begin(), p.base().end()), p.degree());
  for (const auto& t : p.indices().product_table()) {
    r[t.result] += Scalar(t.weight) * p[t.left] * q[t.right];
  }
  return r;
}

/// d^beta P(y) for every beta in range: the same polynomial expressed at y.
template <typename Scalar>
BasicJet<Scalar> rebase(const BasicJet<Scalar>& p, std::span<const double> y) {
  if (static_cast<int>(y.size()) != p.dim()) throw ContractViolation("point dimension mismatch");
  BasicJet<Scalar> r(std::vector<double>(y.begin(), y.end()), p.degree());
  const IndexSet& set = p.indices();
  const std::vector<Scalar> powers = p.shifted_powers(y);
  for (std::size_t b = 0; b < set.size(); ++b) {
    Scalar sum(0);
    for (std::size_t a = 0; a < set.size(); ++a) {
      if (!set[b].divides(set[a])) continue;
      const long d = set.position(set[a] - set[b]);
      sum += p[a] * powers[static_cast<std::size_t>(d)] / Scalar(set.factorial(static_cast<std::size_t>(d)));
    }
    r[b] = sum;
  }
  return r;
}

/// d^beta P(y).
template <typename Scalar>
Scalar deriv_at(const BasicJet<Scalar>& p, const MultiIndex& beta, std::span<const double> y) {
  if (beta.order() > p.degree()) return Scalar(0);
  const IndexSet& set = p.indices();
  const std::vector<Scalar> powers = p.shifted_powers(y);
  Scalar sum(0);
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (!beta.divides(set[a])) continue;
    const long d = set.position(set[a] - beta);
    sum += p[a] * powers[static_cast<std::size_t>(d)] / Scalar(set.factorial(static_cast<std::size_t>(d)));
  }
  return sum;
}

/// Change the degree bound: drops entries above `degree`, zero-fills new ones.
template <typename Scalar>
BasicJet<Scalar> with_degree(const BasicJet<Scalar>& p, int degree) {
  BasicJet<Scalar> r(std::vector<double>(p.base().begin(), p.base().end()), degree);
  const IndexSet& set = r.indices();
  for (std::size_t i = 0; i < set.size(); ++i) r[i] = p.deriv(set[i]);
  return r;
}

/// m-jet -> (m-1)-jet: drops every |alpha| = degree entry.
template <typename Scalar>
BasicJet<Scalar> project(const BasicJet<Scalar>& p) {
  if (p.degree() == 0) throw ContractViolation("cannot project a degree-0 jet");
  return with_degree(p, p.degree() - 1);
}

/// (m-1)-jet -> m-jet with zero top-order part.
template <typename Scalar>
BasicJet<Scalar> embed(const BasicJet<Scalar>& p) {
  return with_degree(p, p.degree() + 1);
}

inline double max_abs_difference(const Jet& a, const Jet& b) {
  a.check_compatible(b);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs_coefficient(const Jet& a) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i]));
  return d;
}

}  // namespace nonneg
