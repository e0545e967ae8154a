#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonneg/errors.hpp"

namespace nonneg {

/// Exponent vector alpha = (alpha_1, ..., alpha_n) with |alpha| = sum of entries.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    for (int e : exponents_) {
      if (e < 0) throw InputError("multi-index exponents must be nonnegative");
    }
  }
  MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }
  static MultiIndex unit(int n, int axis) {
    MultiIndex a = zero(n);
    a.exponents_[static_cast<std::size_t>(axis)] = 1;
    return a;
  }

  int dim() const { return static_cast<int>(exponents_.size()); }
  int order() const { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }
  int operator[](std::size_t i) const { return exponents_[i]; }
  std::span<const int> exponents() const { return exponents_; }

  /// alpha <= beta componentwise.
  bool divides(const MultiIndex& other) const {
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      if (exponents_[i] > other.exponents_[i]) return false;
    }
    return true;
  }

  MultiIndex operator+(const MultiIndex& other) const {
    std::vector<int> e(exponents_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exponents_[i];
    return MultiIndex(std::move(e));
  }
  MultiIndex operator-(const MultiIndex& other) const {
    std::vector<int> e(exponents_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= other.exponents_[i];
    return MultiIndex(std::move(e));
  }

  /// alpha! = prod alpha_i!
  double factorial() const {
    double f = 1.0;
    for (int e : exponents_) {
      for (int k = 2; k <= e; ++k) f *= k;
    }
    return f;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(exponents_[i]);
    }
    return s;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> exponents_;
};

/// Prod_i binom(gamma_i, alpha_i) for alpha <= gamma.
inline double multi_binomial(const MultiIndex& gamma, const MultiIndex& alpha) {
  double b = 1.0;
  for (int i = 0; i < gamma.dim(); ++i) {
    const int g = gamma[static_cast<std::size_t>(i)];
    const int a = alpha[static_cast<std::size_t>(i)];
    double c = 1.0;
    for (int k = 1; k <= a; ++k) c = c * (g - a + k) / k;
    b *= c;
  }
  return b;
}

/// All multi-indices of length n with |alpha| <= degree, in graded lexicographic order:
/// ascending total order, and within one order, descending lexicographic on the
/// exponent vector, e.g. (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
///
/// Instances are shared and immutable; obtain them with IndexSet::get.
class IndexSet {
 public:
  struct ProductTerm {
    std::uint32_t left;
    std::uint32_t right;
    std::uint32_t result;
    double weight;  // binom(result, left)
  };

  static std::shared_ptr<const IndexSet> get(int n, int degree) {
    if (n < 1) throw InputError("dimension must be at least 1");
    if (degree < 0) throw InputError("jet degree must be nonnegative");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const IndexSet>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, degree}];
    if (!slot) slot = std::shared_ptr<const IndexSet>(new IndexSet(n, degree));
    return slot;
  }

  int dim() const { return n_; }
  int degree() const { return degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  double factorial(std::size_t i) const { return factorials_[i]; }
  int order(std::size_t i) const { return orders_[i]; }

  /// Position of alpha, or -1 when |alpha| > degree.
  long position(const MultiIndex& alpha) const {
    if (alpha.dim() != n_) throw ContractViolation("multi-index dimension mismatch");
    if (alpha.order() > degree_) return -1;
    std::size_t code = 0;
    for (int i = n_ - 1; i >= 0; --i) code = code * static_cast<std::size_t>(degree_ + 1) + static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)]);
    return lookup_[code];
  }

  /// First position holding an index of the given order.
  std::size_t order_begin(int order) const { return order_offsets_[static_cast<std::size_t>(order)]; }

  /// Leibniz table: (PQ) at `result` collects weight * P[left] * Q[right].
  const std::vector<ProductTerm>& product_table() const { return products_; }

 private:
  IndexSet(int n, int degree) : n_(n), degree_(degree) {
    double table_size = 1.0;
    for (int i = 0; i < n; ++i) table_size *= degree + 1;
    if (table_size > double(1 << 22)) throw InputError("jet index range too large");
    for (int d = 0; d <= degree; ++d) {
      order_offsets_.push_back(indices_.size());
      std::vector<int> e(static_cast<std::size_t>(n), 0);
      append_order(e, 0, d);
    }
    order_offsets_.push_back(indices_.size());
    lookup_.assign(static_cast<std::size_t>(table_size), -1);
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      std::size_t code = 0;
      for (int k = n_ - 1; k >= 0; --k) code = code * static_cast<std::size_t>(degree_ + 1) + static_cast<std::size_t>(indices_[i][static_cast<std::size_t>(k)]);
      lookup_[code] = static_cast<long>(i);
      factorials_.push_back(indices_[i].factorial());
      orders_.push_back(indices_[i].order());
    }
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      for (std::size_t j = 0; j < indices_.size(); ++j) {
        if (orders_[i] + orders_[j] > degree_) continue;
        const MultiIndex sum = indices_[i] + indices_[j];
        products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(position(sum)), multi_binomial(sum, indices_[i])});
      }
    }
  }

  void append_order(std::vector<int>& e, std::size_t axis, int remaining) {
    if (axis + 1 == e.size()) {
      e[axis] = remaining;
      indices_.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[axis] = k;
      append_order(e, axis + 1, remaining - k);
    }
    e[axis] = 0;
  }

  int n_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::vector<double> factorials_;
  std::vector<int> orders_;
  std::vector<std::size_t> order_offsets_;
  std::vector<long> lookup_;
  std::vector<ProductTerm> products_;
};

}  // namespace nonneg
