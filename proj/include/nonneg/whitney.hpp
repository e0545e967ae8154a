#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nonneg/errors.hpp"
#include "nonneg/jet.hpp"

namespace nonneg {

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// One jet per point of a finite set S; jet i is based at point i.
class WhitneyField {
 public:
  WhitneyField() = default;

  explicit WhitneyField(std::vector<Jet> jets) : jets_(std::move(jets)) {
    for (std::size_t i = 0; i < jets_.size(); ++i) {
      if (jets_[i].dim() != jets_[0].dim() || jets_[i].degree() != jets_[0].degree())
        throw InputError("Whitney field jets must share dimension and degree");
      for (std::size_t j = 0; j < i; ++j) {
        if (jets_[i].same_base(jets_[j])) throw InputError("Whitney field points must be distinct");
      }
    }
  }

  std::size_t size() const { return jets_.size(); }
  bool empty() const { return jets_.empty(); }
  const Jet& operator[](std::size_t i) const { return jets_[i]; }
  const std::vector<Jet>& jets() const { return jets_; }
  std::span<const double> point(std::size_t i) const { return jets_[i].base(); }
  /// Order of smoothness: jets have degree m - 1.
  int m() const { return jets_.empty() ? 0 : jets_[0].degree() + 1; }

 private:
  std::vector<Jet> jets_;
};

/// Maximising (x, y, beta) of the seminorm quotient.
struct CompatWitness {
  std::size_t x = 0;
  std::size_t y = 0;
  MultiIndex beta;
  double quotient = 0.0;
};

/// max over ordered pairs x != y and |beta| <= m-1 of |d^beta(P^x - P^y)(x)| / |x - y|^(m - |beta|).
/// Order-m terms vanish identically for degree m-1 jets and are skipped. Ties keep the first
/// triple in (x, y, beta) order.
inline std::optional<CompatWitness> seminorm_witness(const WhitneyField& w) {
  std::optional<CompatWitness> best;
  const int m = w.m();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (i == j) continue;
      const Jet other = rebase(w[j], w.point(i));
      const double d = distance(w.point(i), w.point(j));
      const IndexSet& set = w[i].indices();
      for (std::size_t a = 0; a < set.size(); ++a) {
        const double q = std::abs(w[i][a] - other[a]) / std::pow(d, m - set.order(a));
        if (!best || q > best->quotient) best = CompatWitness{i, j, set[a], q};
      }
    }
  }
  return best;
}

inline double seminorm(const WhitneyField& w) {
  auto best = seminorm_witness(w);
  return best ? best->quotient : 0.0;
}

struct CompatVerdict {
  bool ok = true;
  double seminorm = 0.0;
  std::optional<CompatWitness> witness;
};

/// Taylor compatibility at level M: |d^beta(P^x - P^y)(x)| <= M |x - y|^(m - |beta|) for all pairs.
inline CompatVerdict taylor_compat_check(const WhitneyField& w, double M) {
  if (!(M > 0.0)) throw InputError("compatibility level M must be positive");
  CompatVerdict v;
  v.witness = seminorm_witness(w);
  v.seminorm = v.witness ? v.witness->quotient : 0.0;
  v.ok = v.seminorm <= M;
  return v;
}

}  // namespace nonneg
