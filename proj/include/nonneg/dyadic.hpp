#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonneg/errors.hpp"

namespace nonneg {

using Point = std::vector<double>;
using PointSet = std::vector<Point>;

/// Half-open dyadic cube prod [2^k i_v, 2^k (i_v + 1)).
struct DyadicCube {
  int level = 0;
  std::vector<std::int64_t> corner;

  int dim() const { return static_cast<int>(corner.size()); }
  double side() const { return std::ldexp(1.0, level); }
  double lower(std::size_t v) const { return std::ldexp(static_cast<double>(corner[v]), level); }
  double upper(std::size_t v) const { return std::ldexp(static_cast<double>(corner[v] + 1), level); }
  Point center() const {
    Point c(corner.size());
    for (std::size_t v = 0; v < corner.size(); ++v) c[v] = std::ldexp(static_cast<double>(corner[v]) + 0.5, level);
    return c;
  }

  /// x in AQ for odd integer A, half-open; comparisons are exact.
  bool dilate_contains(std::span<const double> x, int A = 1) const {
    const std::int64_t lo = (A - 1) / 2, hi = (A + 1) / 2;
    for (std::size_t v = 0; v < corner.size(); ++v) {
      if (x[v] < std::ldexp(static_cast<double>(corner[v] - lo), level)) return false;
      if (!(x[v] < std::ldexp(static_cast<double>(corner[v] + hi), level))) return false;
    }
    return true;
  }
  bool contains(std::span<const double> x) const { return dilate_contains(x, 1); }

  /// Q+, the dyadic cube of twice the sidelength containing Q.
  DyadicCube parent() const {
    DyadicCube p{level + 1, corner};
    for (auto& i : p.corner) i >>= 1;
    return p;
  }

  std::vector<DyadicCube> children() const {
    const std::size_t n = corner.size();
    std::vector<DyadicCube> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      DyadicCube c{level - 1, corner};
      for (std::size_t v = 0; v < n; ++v) c.corner[v] = 2 * corner[v] + static_cast<std::int64_t>((mask >> v) & 1U);
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Q is contained in (or equal to) other.
  bool inside(const DyadicCube& other) const {
    if (level > other.level) return false;
    const int s = other.level - level;
    for (std::size_t v = 0; v < corner.size(); ++v) {
      if ((corner[v] >> s) != other.corner[v]) return false;
    }
    return true;
  }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend auto operator<=>(const DyadicCube& a, const DyadicCube& b) {
    if (auto c = a.level <=> b.level; c != 0) return c;
    return a.corner <=> b.corner;
  }
};

/// #(E cap 5Q) <= 1 and delta_Q <= 1.
inline bool is_ok(const DyadicCube& q, const PointSet& e) {
  if (q.level > 0) return false;
  int count = 0;
  for (const auto& x : e) {
    if (q.dilate_contains(x, 5) && ++count > 1) return false;
  }
  return true;
}

/// Box prod [lo_v, hi_v) of unit cubes.
struct DyadicRegion {
  std::vector<std::int64_t> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool strictly_contains(std::span<const double> x) const {
    for (std::size_t v = 0; v < lo.size(); ++v) {
      if (!(x[v] > static_cast<double>(lo[v]) && x[v] < static_cast<double>(hi[v]))) return false;
    }
    return true;
  }
  /// Smallest box with every point at least `pad` units from the boundary.
  static DyadicRegion around(const PointSet& e, int dim, std::int64_t pad) {
    DyadicRegion r;
    r.lo.assign(static_cast<std::size_t>(dim), -pad);
    r.hi.assign(static_cast<std::size_t>(dim), pad);
    if (e.empty()) return r;
    for (std::size_t v = 0; v < static_cast<std::size_t>(dim); ++v) {
      double mn = e[0][v], mx = e[0][v];
      for (const auto& x : e) {
        mn = std::min(mn, x[v]);
        mx = std::max(mx, x[v]);
      }
      r.lo[v] = static_cast<std::int64_t>(std::floor(mn)) - pad;
      r.hi[v] = static_cast<std::int64_t>(std::floor(mx)) + 1 + pad;
    }
    return r;
  }
};

enum class CubeType { type1 = 1, type2 = 2, type3 = 3 };

struct CZDecomposition {
  DyadicRegion region;
  std::vector<DyadicCube> cubes;
  std::vector<CubeType> types;               // filled by classify_and_anchor
  std::vector<std::optional<Point>> anchors;  // x_Q

  std::size_t size() const { return cubes.size(); }
  /// Index of the cube containing x, if x is in the region.
  std::optional<std::size_t> locate(std::span<const double> x) const {
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      if (cubes[i].contains(x)) return i;
    }
    return std::nullopt;
  }
};

/// Buckets the closed A-dilates of a family of cubes by the unit cells they meet, so that
/// every cube whose dilate contains x is found among candidates(x).
class CubeIndex {
 public:
  CubeIndex() = default;
  CubeIndex(std::vector<DyadicCube> cubes, double dilation) : cubes_(std::move(cubes)), dilation_(dilation) {
    for (std::size_t c = 0; c < cubes_.size(); ++c) {
      const auto& q = cubes_[c];
      const std::size_t n = q.corner.size();
      std::vector<std::int64_t> lo(n), hi(n);
      for (std::size_t v = 0; v < n; ++v) {
        lo[v] = static_cast<std::int64_t>(std::floor(dilated_lower(q, v)));
        hi[v] = static_cast<std::int64_t>(std::floor(dilated_upper(q, v)));
      }
      std::vector<std::int64_t> cell = lo;
      while (true) {
        buckets_[cell].push_back(c);
        std::size_t v = 0;
        for (; v < n; ++v) {
          if (++cell[v] <= hi[v]) break;
          cell[v] = lo[v];
        }
        if (v == n) break;
      }
    }
  }

  double dilation() const { return dilation_; }
  std::size_t size() const { return cubes_.size(); }
  const DyadicCube& cube(std::size_t c) const { return cubes_[c]; }
  double dilated_lower(const DyadicCube& q, std::size_t v) const { return q.lower(v) - 0.5 * (dilation_ - 1.0) * q.side(); }
  double dilated_upper(const DyadicCube& q, std::size_t v) const { return q.upper(v) + 0.5 * (dilation_ - 1.0) * q.side(); }

  /// x in the closed A-dilate of cube c.
  bool in_dilate(std::size_t c, std::span<const double> x) const {
    const auto& q = cubes_[c];
    for (std::size_t v = 0; v < x.size(); ++v) {
      if (x[v] < dilated_lower(q, v) || x[v] > dilated_upper(q, v)) return false;
    }
    return true;
  }

  /// Superset of the cubes whose closed dilate contains x.
  const std::vector<std::size_t>& candidates(std::span<const double> x) const {
    static const std::vector<std::size_t> none;
    std::vector<std::int64_t> cell(x.size());
    for (std::size_t v = 0; v < x.size(); ++v) cell[v] = static_cast<std::int64_t>(std::floor(x[v]));
    auto it = buckets_.find(cell);
    return it == buckets_.end() ? none : it->second;
  }

  /// Pairs of cubes whose closed dilates intersect, as neighbor lists.
  std::vector<std::vector<std::size_t>> touching() const {
    std::vector<std::vector<std::size_t>> out(cubes_.size());
    for (const auto& [cell, list] : buckets_) {
      for (std::size_t a : list) {
        for (std::size_t b : list) {
          if (meet(a, b)) out[a].push_back(b);
        }
      }
    }
    for (auto& l : out) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    return out;
  }

 private:
  bool meet(std::size_t a, std::size_t b) const {
    const auto& p = cubes_[a];
    const auto& q = cubes_[b];
    for (std::size_t v = 0; v < p.corner.size(); ++v) {
      if (dilated_upper(p, v) < dilated_lower(q, v) || dilated_upper(q, v) < dilated_lower(p, v)) return false;
    }
    return true;
  }

  std::vector<DyadicCube> cubes_;
  double dilation_ = 1.0;
  std::map<std::vector<std::int64_t>, std::vector<std::size_t>> buckets_;
};

namespace detail {

inline void require_points(const PointSet& e, int n) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (static_cast<int>(e[i].size()) != n) throw InputError("point has wrong dimension");
    for (double c : e[i]) {
      if (!std::isfinite(c)) throw InputError("point has a non-finite coordinate");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (e[i] == e[j]) throw InputError("points of E must be distinct");
    }
  }
}

inline void subdivide(const DyadicCube& q, const PointSet& e, std::vector<DyadicCube>& out) {
  if (is_ok(q, e)) {
    out.push_back(q);
    return;
  }
  if (q.level < -1000) throw ConstructionError("subdivision did not terminate");
  // only points of 5Q can keep descendants from being OK
  PointSet near;
  for (const auto& x : e) {
    if (q.dilate_contains(x, 5)) near.push_back(x);
  }
  for (const auto& c : q.children()) subdivide(c, near, out);
}

}  // namespace detail

/// Stopping-time decomposition of the region: each unit cube is kept when OK, otherwise
/// split into 2^n children, recursively. Cubes are listed in depth-first order.
inline CZDecomposition cz_decompose(const PointSet& e, const DyadicRegion& region) {
  const int n = region.dim();
  if (n < 1 || region.hi.size() != region.lo.size()) throw InputError("region bounds malformed");
  for (std::size_t v = 0; v < region.lo.size(); ++v) {
    if (region.hi[v] <= region.lo[v]) throw InputError("region is empty");
  }
  detail::require_points(e, n);
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (region.strictly_contains(e[k])) continue;
    std::string at;
    for (double c : e[k]) at += (at.empty() ? "" : ", ") + std::to_string(c);
    throw InputError("E must lie strictly inside the region: point " + std::to_string(k) + " = (" + at + ")");
  }
  CZDecomposition dec;
  dec.region = region;
  std::vector<std::int64_t> i(region.lo);
  while (true) {
    detail::subdivide(DyadicCube{0, i}, e, dec.cubes);
    std::size_t v = 0;
    for (; v < i.size(); ++v) {
      if (++i[v] < region.hi[v]) break;
      i[v] = region.lo[v];
    }
    if (v == i.size()) break;
  }
  return dec;
}

/// Types: 1 when E meets 5Q (anchor the unique point), 2 when it does not and delta_Q < 1
/// (anchor the point of E cap 5Q+ closest to the center of Q, ties lexicographic), 3 otherwise.
inline CZDecomposition classify_and_anchor(CZDecomposition dec, const PointSet& e) {
  dec.types.assign(dec.cubes.size(), CubeType::type3);
  dec.anchors.assign(dec.cubes.size(), std::nullopt);
  for (std::size_t c = 0; c < dec.cubes.size(); ++c) {
    const DyadicCube& q = dec.cubes[c];
    const Point* hit = nullptr;
    for (const auto& x : e) {
      if (q.dilate_contains(x, 5)) {
        if (hit) throw ConstructionError("cube is not OK: 5Q holds two points");
        hit = &x;
      }
    }
    if (hit) {
      dec.types[c] = CubeType::type1;
      dec.anchors[c] = *hit;
      continue;
    }
    if (q.level == 0) continue;
    dec.types[c] = CubeType::type2;
    const DyadicCube up = q.parent();
    const Point mid = q.center();
    const Point* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& x : e) {
      if (!up.dilate_contains(x, 5)) continue;
      double d = 0.0;
      for (std::size_t v = 0; v < x.size(); ++v) d += (x[v] - mid[v]) * (x[v] - mid[v]);
      if (!best || d < best_d || (d == best_d && x < *best)) {
        best = &x;
        best_d = d;
      }
    }
    if (!best) throw ConstructionError("type-2 cube with E cap 5Q+ empty");
    dec.anchors[c] = *best;
  }
  return dec;
}

}  // namespace nonneg
