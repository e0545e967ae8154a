#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonneg/errors.hpp"
#include "nonneg/jet.hpp"

namespace nonneg {

/// A scalar function of one variable with derivatives of every order on demand.
/// derivs(t, k) returns g(t), g'(t), ..., g^(k)(t).
class Univariate {
 public:
  using Evaluator = std::function<std::vector<double>(double, int)>;

  Univariate() = default;
  explicit Univariate(Evaluator eval) : eval_(std::move(eval)) {}

  std::vector<double> derivs(double t, int k) const { return eval_(t, k); }
  double operator()(double t) const { return eval_(t, 0)[0]; }

  /// t -> g(a t + b).
  Univariate affine(double a, double b) const {
    auto inner = eval_;
    return Univariate([inner, a, b](double t, int k) {
      std::vector<double> d = inner(a * t + b, k);
      double s = 1.0;
      for (int i = 0; i <= k; ++i, s *= a) d[static_cast<std::size_t>(i)] *= s;
      return d;
    });
  }

  /// t -> c0 + c1 g(t).
  Univariate linear(double c0, double c1) const {
    auto inner = eval_;
    return Univariate([inner, c0, c1](double t, int k) {
      std::vector<double> d = inner(t, k);
      for (auto& v : d) v *= c1;
      d[0] += c0;
      return d;
    });
  }

 private:
  Evaluator eval_;
};

namespace univariate {

/// Derivatives of the polynomial sum_k coef[k] t^k.
inline std::vector<double> polynomial_derivs(const std::vector<double>& coef, double t, int k) {
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  std::vector<double> c = coef;
  for (int order = 0; order <= k && !c.empty(); ++order) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
    out[static_cast<std::size_t>(order)] = v;
    std::vector<double> next;
    for (std::size_t i = 1; i < c.size(); ++i) next.push_back(c[i] * static_cast<double>(i));
    c = std::move(next);
  }
  return out;
}

/// Monomial coefficients of S_m(t) = int_0^t s^m (1-s)^m ds / int_0^1 s^m (1-s)^m ds.
inline std::vector<double> smoothstep_coefficients(int m) {
  std::vector<double> coef(static_cast<std::size_t>(2 * m + 2), 0.0);
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    coef[static_cast<std::size_t>(m + j + 1)] = (j % 2 ? -binom : binom) / (m + j + 1);
    binom = binom * (m - j) / (j + 1);
  }
  // int_0^1 s^m (1-s)^m ds = (m!)^2 / (2m+1)!
  double beta = 1.0;
  for (int i = 1; i <= m; ++i) beta *= static_cast<double>(i) / (m + i);
  beta /= (2 * m + 1);
  for (auto& c : coef) c /= beta;
  return coef;
}

/// C^m step: 0 for t <= 0, 1 for t >= 1, polynomial of degree 2m+1 in between.
inline Univariate smoothstep(int m) {
  auto coef = std::make_shared<const std::vector<double>>(smoothstep_coefficients(m));
  return Univariate([coef](double t, int k) {
    if (t <= 0.0) return std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0);
    if (t >= 1.0) {
      std::vector<double> d(static_cast<std::size_t>(k) + 1, 0.0);
      d[0] = 1.0;
      return d;
    }
    if (t <= 0.5) return polynomial_derivs(*coef, t, k);
    // S(t) = 1 - S(1 - t); evaluating near 0 avoids cancellation in the monomial form
    std::vector<double> d = polynomial_derivs(*coef, 1.0 - t, k);
    for (int i = 0; i <= k; ++i) d[static_cast<std::size_t>(i)] *= (i % 2 ? 1.0 : -1.0);
    d[0] += 1.0;
    return d;
  });
}

/// t^p for real p; t must be positive unless p is a nonnegative integer.
inline Univariate power(double p) {
  const bool integral = p >= 0.0 && std::floor(p) == p;
  return Univariate([p, integral](double t, int k) {
    if (!integral && t <= 0.0) throw EvaluationError("non-integer power of a non-positive argument");
    std::vector<double> d(static_cast<std::size_t>(k) + 1, 0.0);
    double coef = 1.0;
    for (int i = 0; i <= k; ++i) {
      const double e = p - i;
      if (integral && e < 0.0) break;
      d[static_cast<std::size_t>(i)] = coef * std::pow(t, e);
      coef *= e;
    }
    return d;
  });
}

inline Univariate reciprocal() { return power(-1.0); }
inline Univariate rsqrt() { return power(-0.5); }

inline Univariate exp() {
  return Univariate([](double t, int k) { return std::vector<double>(static_cast<std::size_t>(k) + 1, std::exp(t)); });
}

inline Univariate sin() {
  return Univariate([](double t, int k) {
    const double s = std::sin(t), c = std::cos(t);
    const double cycle[4] = {s, c, -s, -c};
    std::vector<double> d(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) d[static_cast<std::size_t>(i)] = cycle[i % 4];
    return d;
  });
}

inline Univariate cos() {
  return Univariate([](double t, int k) {
    const double s = std::sin(t), c = std::cos(t);
    const double cycle[4] = {c, -s, -c, s};
    std::vector<double> d(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) d[static_cast<std::size_t>(i)] = cycle[i % 4];
    return d;
  });
}

}  // namespace univariate

/// Node of a function expression tree. taylor(x, d) returns every partial derivative of
/// order <= d at x, as a jet based at x.
class FunctionNode {
 public:
  virtual ~FunctionNode() = default;
  virtual int dim() const = 0;
  virtual Jet taylor(std::span<const double> x, int degree) const = 0;
};

/// Immutable, shareable smooth function on R^n with exact partial derivatives.
class Function {
 public:
  Function() = default;
  explicit Function(std::shared_ptr<const FunctionNode> node) : node_(std::move(node)) {}

  bool valid() const { return static_cast<bool>(node_); }
  int dim() const { return node_->dim(); }

  Jet jet(std::span<const double> x, int degree) const {
    if (static_cast<int>(x.size()) != dim()) throw ContractViolation("evaluation point has wrong dimension");
    return node_->taylor(x, degree);
  }
  double operator()(std::span<const double> x) const { return jet(x, 0)[0]; }
  double operator()(std::initializer_list<double> x) const { return (*this)(std::span<const double>(x.begin(), x.size())); }

  double deriv(std::span<const double> x, const MultiIndex& beta) const { return jet(x, beta.order()).deriv(beta); }

  const FunctionNode& node() const { return *node_; }

 private:
  std::shared_ptr<const FunctionNode> node_;
};

/// The (m-1)-jet (plus = false) or m-jet (plus = true) of F at x.
inline Jet jet_taylor(const Function& f, std::span<const double> x, int m, bool plus) {
  const int degree = plus ? m : m - 1;
  Jet j = f.jet(x, degree);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!std::isfinite(j[i])) throw EvaluationError("function is not finite at the evaluation point");
  }
  return j;
}

namespace detail {

inline std::vector<double> to_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

/// g o u as a jet: sum_k g^(k)(u0)/k! (u - u0)^k, by Horner in the jet algebra.
inline Jet compose_jet(const Univariate& g, const Jet& u) {
  const int d = u.degree();
  const std::vector<double> gd = g.derivs(u[0], d);
  Jet h = u;
  h[0] = 0.0;
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  Jet r = Jet::constant(detail::to_vector(u.base()), d, gd[static_cast<std::size_t>(d)] / fact);
  for (int k = d - 1; k >= 0; --k) {
    fact /= (k + 1);
    r = multiply(r, h);
    r[0] += gd[static_cast<std::size_t>(k)] / fact;
  }
  return r;
}

class ConstantNode final : public FunctionNode {
 public:
  ConstantNode(int n, double c) : n_(n), c_(c) {}
  int dim() const override { return n_; }
  Jet taylor(std::span<const double> x, int degree) const override { return Jet::constant(to_vector(x), degree, c_); }

 private:
  int n_;
  double c_;
};

class PolynomialNode final : public FunctionNode {
 public:
  explicit PolynomialNode(Jet p) : p_(std::move(p)) {}
  int dim() const override { return p_.dim(); }
  Jet taylor(std::span<const double> x, int degree) const override { return with_degree(rebase(p_, x), degree); }

 private:
  Jet p_;
};

class SumNode final : public FunctionNode {
 public:
  SumNode(std::vector<Function> terms, std::vector<double> weights) : terms_(std::move(terms)), weights_(std::move(weights)) {}
  int dim() const override { return terms_.front().dim(); }
  Jet taylor(std::span<const double> x, int degree) const override {
    Jet r(to_vector(x), degree);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      Jet t = terms_[i].jet(x, degree);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] += weights_[i] * t[k];
    }
    return r;
  }

 private:
  std::vector<Function> terms_;
  std::vector<double> weights_;
};

class ProductNode final : public FunctionNode {
 public:
  ProductNode(Function a, Function b) : a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_.dim(); }
  Jet taylor(std::span<const double> x, int degree) const override {
    Jet ja = a_.jet(x, degree);
    // exact zeros short-circuit so supports stay exact even where b is undefined
    bool zero = true;
    for (std::size_t i = 0; i < ja.size() && zero; ++i) zero = ja[i] == 0.0;
    if (zero) return ja;
    return multiply(ja, b_.jet(x, degree));
  }

 private:
  Function a_, b_;
};

class ComposeNode final : public FunctionNode {
 public:
  ComposeNode(Univariate g, Function inner) : g_(std::move(g)), inner_(std::move(inner)) {}
  int dim() const override { return inner_.dim(); }
  Jet taylor(std::span<const double> x, int degree) const override { return compose_jet(g_, inner_.jet(x, degree)); }

 private:
  Univariate g_;
  Function inner_;
};

/// y -> F(s (y - c)).
class AffineNode final : public FunctionNode {
 public:
  AffineNode(Function f, double scale, std::vector<double> center) : f_(std::move(f)), s_(scale), c_(std::move(center)) {}
  int dim() const override { return f_.dim(); }
  Jet taylor(std::span<const double> x, int degree) const override {
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = s_ * (x[i] - c_[i]);
    Jet inner = f_.jet(z, degree);
    Jet r(to_vector(x), degree);
    const IndexSet& set = r.indices();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = inner[i] * std::pow(s_, set.order(i));
    return r;
  }

 private:
  Function f_;
  double s_;
  std::vector<double> c_;
};

/// |y|^m (Euclidean norm). For odd m the order-m derivatives at the origin are taken
/// from the direction +e_1, matching the one-sided limit; higher orders do not exist there.
class NormPowerNode final : public FunctionNode {
 public:
  NormPowerNode(int n, int m) : n_(n), m_(m) {
    Jet r2(std::vector<double>(static_cast<std::size_t>(n), 0.0), 2);
    for (int i = 0; i < n; ++i) r2.set(MultiIndex(MultiIndex::unit(n, i) + MultiIndex::unit(n, i)), 2.0);
    r2_ = Function(std::make_shared<PolynomialNode>(std::move(r2)));
  }
  int dim() const override { return n_; }
  Jet taylor(std::span<const double> x, int degree) const override {
    if (n_ == 1) return taylor_1d(x[0], degree);
    if (m_ % 2 == 0) return compose_jet(univariate::power(m_ / 2), r2_.jet(x, degree));
    bool origin = true;
    for (double v : x) origin = origin && v == 0.0;
    if (!origin) return compose_jet(univariate::power(0.5 * m_), r2_.jet(x, degree));
    if (degree > m_) throw EvaluationError("|x|^m has no derivatives above order m at the origin");
    Jet r(to_vector(x), degree);
    if (degree == m_) {
      std::vector<double> e1(static_cast<std::size_t>(n_), 0.0);
      e1[0] = 1.0;
      Jet at_e1 = taylor(e1, degree);
      for (std::size_t i = r.indices().order_begin(m_); i < r.size(); ++i) r[i] = at_e1[i];
    }
    return r;
  }

 private:
  Jet taylor_1d(double x, int degree) const {
    const double s = x >= 0.0 ? 1.0 : -1.0;
    Jet r(std::vector<double>{x}, degree);
    double coef = 1.0, sk = 1.0;
    for (int k = 0; k <= std::min(degree, m_); ++k) {
      r[static_cast<std::size_t>(k)] = coef * sk * std::pow(s * x, m_ - k);
      coef *= (m_ - k);
      sk *= s;
    }
    if (m_ % 2 == 1 && x == 0.0 && degree > m_) throw EvaluationError("|x|^m has no derivatives above order m at the origin");
    return r;
  }

  int n_, m_;
  Function r2_;
};

class CallbackNode final : public FunctionNode {
 public:
  using Callback = std::function<Jet(std::span<const double>, int)>;
  CallbackNode(int n, Callback cb) : n_(n), cb_(std::move(cb)) {}
  int dim() const override { return n_; }
  Jet taylor(std::span<const double> x, int degree) const override { return cb_(x, degree); }

 private:
  int n_;
  Callback cb_;
};

}  // namespace detail

/// Builders for function expression trees.
namespace fn {

inline Function constant(int n, double c) { return Function(std::make_shared<detail::ConstantNode>(n, c)); }

inline Function polynomial(Jet p) { return Function(std::make_shared<detail::PolynomialNode>(std::move(p))); }

inline Function coordinate(int n, int axis) {
  Jet p(std::vector<double>(static_cast<std::size_t>(n), 0.0), 1);
  p.set(MultiIndex::unit(n, axis), 1.0);
  return polynomial(std::move(p));
}

/// sum_i |y_i|^2.
inline Function radius_squared(int n) {
  Jet p(std::vector<double>(static_cast<std::size_t>(n), 0.0), 2);
  for (int i = 0; i < n; ++i) p.set(MultiIndex::unit(n, i) + MultiIndex::unit(n, i), 2.0);
  return polynomial(std::move(p));
}

inline Function norm_power(int n, int m) { return Function(std::make_shared<detail::NormPowerNode>(n, m)); }

inline Function compose(Univariate g, Function inner) {
  return Function(std::make_shared<detail::ComposeNode>(std::move(g), std::move(inner)));
}

inline Function sum(std::vector<Function> terms, std::vector<double> weights) {
  if (terms.empty()) throw ContractViolation("empty sum");
  if (weights.size() != terms.size()) throw ContractViolation("sum weights do not match terms");
  return Function(std::make_shared<detail::SumNode>(std::move(terms), std::move(weights)));
}

inline Function product(Function a, Function b) { return Function(std::make_shared<detail::ProductNode>(std::move(a), std::move(b))); }

/// y -> F(s (y - c)).
inline Function affine(Function f, double scale, std::vector<double> center) {
  return Function(std::make_shared<detail::AffineNode>(std::move(f), scale, std::move(center)));
}

/// y -> F(y - c).
inline Function translate(Function f, std::vector<double> center) { return affine(std::move(f), 1.0, std::move(center)); }

/// (positive combination)^(-1/2).
inline Function rsqrt(Function f) { return compose(univariate::rsqrt(), std::move(f)); }

inline Function reciprocal(Function f) { return compose(univariate::reciprocal(), std::move(f)); }

inline Function callback(int n, detail::CallbackNode::Callback cb) {
  return Function(std::make_shared<detail::CallbackNode>(n, std::move(cb)));
}

}  // namespace fn

inline Function operator+(const Function& a, const Function& b) { return fn::sum({a, b}, {1.0, 1.0}); }
inline Function operator-(const Function& a, const Function& b) { return fn::sum({a, b}, {1.0, -1.0}); }
inline Function operator*(const Function& a, const Function& b) { return fn::product(a, b); }
inline Function operator*(double s, const Function& a) { return fn::sum({a}, {s}); }

}  // namespace nonneg
