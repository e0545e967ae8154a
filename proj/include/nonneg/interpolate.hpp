#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonneg/bumps.hpp"
#include "nonneg/dyadic.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/extension.hpp"
#include "nonneg/function.hpp"
#include "nonneg/gamma.hpp"
#include "nonneg/jet.hpp"
#include "nonneg/whitney.hpp"

namespace nonneg {

enum class Flavor { cm, cm1 };

inline const char* to_string(Flavor f) { return f == Flavor::cm ? "cm" : "cm1"; }

/// F = sum_Q theta_Q F_Q. An invalid local (Type 3) contributes nothing.
inline Function glue_cz(const CZDecomposition& dec, const WhitneyPartition& partition, std::vector<Function> locals) {
  if (partition.size() != dec.size()) throw InputError("partition does not match the decomposition");
  if (locals.size() != dec.size()) throw InputError("one local function per cube is required");
  for (std::size_t q = 0; q < dec.size(); ++q) {
    if (!(partition.cube(q) == dec.cubes[q])) throw InputError("partition does not match the decomposition");
    if (locals[q].valid() && locals[q].dim() != partition.dim()) throw InputError("local function has wrong dimension");
  }
  return fn::callback(partition.dim(), [partition, locals = std::move(locals)](std::span<const double> x, int degree) {
    Jet out(detail::to_vector(x), degree);
    for (const auto& [q, theta] : partition.jets(x, degree)) {
      if (locals[q].valid()) out += multiply(theta, locals[q].jet(x, degree));
    }
    return out;
  });
}

/// sup |d^beta (F_a - F_b)| / (M delta^(m - |beta|)) over sample points of the overlap of two
/// touching dilates, delta the smaller sidelength.
struct DefectRecord {
  std::size_t a = 0, b = 0;
  int level_a = 0, level_b = 0;
  double ratio = 0.0;
};

inline std::vector<DefectRecord> measure_defects(const CZDecomposition& dec, const std::vector<Function>& locals, double dilation, int m, double M,
                                                 int samples = 3) {
  if (locals.size() != dec.size()) throw InputError("one local function per cube is required");
  const CubeIndex index(dec.cubes, dilation);
  const auto nb = index.touching();
  const std::size_t n = static_cast<std::size_t>(dec.region.dim());
  std::vector<DefectRecord> out;
  for (std::size_t a = 0; a < dec.size(); ++a) {
    for (std::size_t b : nb[a]) {
      if (b <= a || (!locals[a].valid() && !locals[b].valid())) continue;
      DefectRecord r{a, b, dec.cubes[a].level, dec.cubes[b].level, 0.0};
      const bool same = locals[a].valid() && locals[b].valid() && dec.anchors[a] == dec.anchors[b];
      if (!same) {
        const double delta = std::min(dec.cubes[a].side(), dec.cubes[b].side());
        std::vector<double> lo(n), hi(n);
        for (std::size_t v = 0; v < n; ++v) {
          lo[v] = std::max(index.dilated_lower(dec.cubes[a], v), index.dilated_lower(dec.cubes[b], v));
          hi[v] = std::min(index.dilated_upper(dec.cubes[a], v), index.dilated_upper(dec.cubes[b], v));
        }
        std::vector<int> idx(n, 0);
        std::vector<double> y(n);
        while (true) {
          for (std::size_t v = 0; v < n; ++v) y[v] = samples == 1 ? 0.5 * (lo[v] + hi[v]) : lo[v] + (hi[v] - lo[v]) * idx[v] / (samples - 1);
          Jet d(y, m);
          if (locals[a].valid()) d += locals[a].jet(y, m);
          if (locals[b].valid()) d -= locals[b].jet(y, m);
          for (std::size_t i = 0; i < d.size(); ++i)
            r.ratio = std::max(r.ratio, std::abs(d[i]) / (M * std::pow(delta, m - d.indices().order(i))));
          std::size_t v = 0;
          for (; v < n; ++v) {
            if (++idx[v] < samples) break;
            idx[v] = 0;
          }
          if (v == n) break;
        }
      }
      out.push_back(r);
    }
  }
  return out;
}

struct VerifyConfig {
  double M = 1.0;         // norm_ratio = max_beta sup |d^beta F| / M
  int order = 1;          // derivatives up to this order enter the norms
  int points = 10000;     // total grid points (per axis: points^(1/n), rounded up)
  double pad = 1.0;       // grid window: bounding box of E grown by pad
  double interp_tol = 1e-8;
  double nonneg_tol = 1e-10;
  std::optional<std::pair<Point, Point>> window;
};

struct VerifyReport {
  bool interp_ok = true;
  bool nonneg_ok = true;
  double max_interp_error = 0.0;
  std::optional<std::size_t> worst_point;  // index in E of the largest |F(x) - f(x)|
  double min_on_grid = std::numeric_limits<double>::infinity();
  Point argmin;
  std::vector<std::pair<MultiIndex, double>> norms;
  double norm_ratio = 0.0;

  bool ok() const { return interp_ok && nonneg_ok; }
};

inline VerifyReport verify_interpolant(const Function& F, const PointSet& e, std::span<const double> f, const VerifyConfig& cfg = {}) {
  if (e.size() != f.size()) throw InputError("E and f differ in size");
  if (cfg.order < 0 || cfg.points < 1) throw InputError("bad verification grid");
  const std::size_t n = static_cast<std::size_t>(F.dim());
  VerifyReport r;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].size() != n) throw InputError("data point has wrong dimension");
    const double err = std::abs(F(e[i]) - f[i]);
    if (!(err <= r.max_interp_error)) {
      r.max_interp_error = err;
      r.worst_point = i;
    }
  }
  r.interp_ok = r.max_interp_error <= cfg.interp_tol * std::max(1.0, r.worst_point ? std::abs(f[*r.worst_point]) : 0.0);

  Point lo(n, -1.0), hi(n, 1.0);
  if (cfg.window) {
    lo = cfg.window->first;
    hi = cfg.window->second;
  } else if (!e.empty()) {
    lo = hi = e[0];
    for (const auto& x : e) {
      for (std::size_t v = 0; v < n; ++v) {
        lo[v] = std::min(lo[v], x[v]);
        hi[v] = std::max(hi[v], x[v]);
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      lo[v] -= cfg.pad;
      hi[v] += cfg.pad;
    }
  }
  const int g = std::max(2, static_cast<int>(std::ceil(std::pow(static_cast<double>(cfg.points), 1.0 / static_cast<double>(n)) - 1e-9)));
  std::vector<double> sup;
  std::vector<int> idx(n, 0);
  Point y(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) y[v] = lo[v] + (hi[v] - lo[v]) * idx[v] / (g - 1);
    const Jet j = F.jet(y, cfg.order);
    if (sup.empty()) sup.assign(j.size(), 0.0);
    if (j[0] < r.min_on_grid) {
      r.min_on_grid = j[0];
      r.argmin = y;
    }
    for (std::size_t i = 0; i < j.size(); ++i) sup[i] = std::max(sup[i], std::abs(j[i]));
    std::size_t v = 0;
    for (; v < n; ++v) {
      if (++idx[v] < g) break;
      idx[v] = 0;
    }
    if (v == n) break;
  }
  const auto set = IndexSet::get(static_cast<int>(n), cfg.order);
  for (std::size_t i = 0; i < sup.size(); ++i) {
    r.norms.emplace_back((*set)[i], sup[i]);
    r.norm_ratio = std::max(r.norm_ratio, sup[i] / cfg.M);
  }
  r.nonneg_ok = r.min_on_grid >= -cfg.nonneg_tol;
  return r;
}

struct InterpolateConfig {
  double dilation = 1.8;  // Whitney partition dilation
  double plateau = 0.25;  // psi_Q = 1 on plateau * Q
  std::int64_t pad = 5;   // decomposition region: bounding box of E grown by pad unit cubes
  int k_max = 20;
  int defect_samples = 3;
  bool verify = true;
  VerifyConfig grid;  // M and order are set from the problem
  GammaConfig gamma;
};

struct InterpolationReport {
  Flavor flavor = Flavor::cm1;
  int m = 1;
  double M = 1.0;
  std::size_t unit_pieces = 0;  // local problems solved (1 without the unit-scale partition)
  std::size_t cubes = 0;
  std::array<std::size_t, 3> type_counts{};
  std::vector<DefectRecord> defects;
  double max_defect_ratio = 0.0;
  std::optional<VerifyReport> verification;
};

struct InterpolationResult {
  Function F;
  InterpolationReport report;
};

namespace detail {

struct LocalProblem {
  const PointSet& e;
  const WhitneyField& w;
  double M;
  Flavor flavor;
  const InterpolateConfig& cfg;
  std::map<std::size_t, Function>& extensions;
  InterpolationReport& report;

  Function extension(std::size_t i) {
    auto it = extensions.find(i);
    if (it != extensions.end()) return it->second;
    Function f = flavor == Flavor::cm1 ? extend_jet_cm1(w[i], e[i], M, cfg.gamma) : extend_jet_cm_at(w[i], e[i], M, cfg.k_max, cfg.gamma);
    extensions.emplace(i, f);
    return f;
  }

  /// Glued interpolant for the points e[subset].
  Function solve(const std::vector<std::size_t>& subset) {
    const int n = static_cast<int>(e[0].size()), m = w.m();
    PointSet pts;
    for (std::size_t i : subset) pts.push_back(e[i]);
    CZDecomposition dec = classify_and_anchor(cz_decompose(pts, DyadicRegion::around(pts, n, cfg.pad)), pts);
    std::vector<Function> locals(dec.size());
    for (std::size_t q = 0; q < dec.size(); ++q) {
      report.type_counts[static_cast<std::size_t>(dec.types[q]) - 1]++;
      if (dec.types[q] == CubeType::type3) continue;
      const auto at = std::find(pts.begin(), pts.end(), *dec.anchors[q]);
      locals[q] = extension(subset[static_cast<std::size_t>(at - pts.begin())]);
    }
    report.cubes += dec.size();
    report.unit_pieces++;
    auto defects = measure_defects(dec, locals, cfg.dilation, m, M, cfg.defect_samples);
    for (const auto& d : defects) report.max_defect_ratio = std::max(report.max_defect_ratio, d.ratio);
    report.defects.insert(report.defects.end(), defects.begin(), defects.end());
    const WhitneyPartition partition(dec, std::max(m, 1), cfg.dilation, cfg.plateau);
    return glue_cz(dec, partition, std::move(locals));
  }
};

}  // namespace detail

/// Nonnegative interpolant of a Whitney field W on E with P^x(x) = f(x): Calderon-Zygmund
/// gluing of local jet extensions, composed through a unit-scale partition when E does not
/// fit in a unit cube.
inline InterpolationResult interpolate_nonneg(const PointSet& e, std::span<const double> f, const WhitneyField& w, double M, Flavor flavor = Flavor::cm1,
                                              const InterpolateConfig& cfg = {}) {
  if (!(M > 0.0)) throw InputError("M must be positive");
  if (e.size() != f.size() || e.size() != w.size()) throw InputError("E, f and W differ in size");
  if (e.empty()) throw InputError("E must be nonempty");
  detail::require_points(e, static_cast<int>(e[0].size()));
  const int n = static_cast<int>(e[0].size()), m = w.m();
  if (w[0].dim() != n) throw InputError("W has wrong dimension");
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!std::equal(e[i].begin(), e[i].end(), w.point(i).begin(), w.point(i).end())) throw InputError("jet " + std::to_string(i) + " is not based at its point");
    if (!(f[i] >= 0.0)) throw InputError("f must be nonnegative at " + detail::point_text(e[i]));
  }
  const CompatVerdict compat = taylor_compat_check(w, M);
  if (!compat.ok) {
    throw PreconditionError("W is not Taylor compatible at level M: quotient " + std::to_string(compat.seminorm) + " at x = " +
                            detail::point_text(e[compat.witness->x]) + ", y = " + detail::point_text(e[compat.witness->y]) + ", beta = (" +
                            compat.witness->beta.to_string() + ")");
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    const MembershipVerdict v =
        flavor == Flavor::cm1 ? gamma_prime_member(w[i], e[i], M, f[i], cfg.gamma) : gamma_cm_member(w[i], e[i], M, f[i], cfg.gamma);
    if (!v.accepted())
      throw PreconditionError("jet at " + detail::point_text(e[i]) + " is not accepted: " + std::string(to_string(v.status)) + ", " + v.reason);
  }

  InterpolationResult out;
  out.report.flavor = flavor;
  out.report.m = m;
  out.report.M = M;
  std::map<std::size_t, Function> extensions;
  detail::LocalProblem local{e, w, M, flavor, cfg, extensions, out.report};

  bool fits = true;
  for (std::size_t v = 0; v < static_cast<std::size_t>(n); ++v) {
    double lo = e[0][v], hi = e[0][v];
    for (const auto& x : e) {
      lo = std::min(lo, x[v]);
      hi = std::max(hi, x[v]);
    }
    fits = fits && hi - lo <= 1.0;
  }
  std::vector<std::size_t> all(e.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (fits) {
    out.F = local.solve(all);
  } else {
    // F = sum_v chi_v F_v with F_v interpolating E cap (1/2) Q_v, Q_v the unit cube centred at
    // the lattice point v; supp chi_v lies in (1/2) Q_v, so near x in E only pieces with x in E_v
    // contribute.
    const UnitPartition unit(DyadicRegion::around(e, n, 1), std::max(m, 1));
    std::map<std::vector<std::size_t>, Function> cache;
    std::vector<Function> pieces(unit.size());
    for (std::size_t p = 0; p < unit.size(); ++p) {
      const Point c = unit.center(p);
      std::vector<std::size_t> subset;
      for (std::size_t i : all) {
        bool in = true;
        for (std::size_t v = 0; v < c.size(); ++v) in = in && e[i][v] >= c[v] - 0.25 && e[i][v] <= c[v] + 0.25;
        if (in) subset.push_back(i);
      }
      if (subset.empty()) continue;
      auto it = cache.find(subset);
      if (it == cache.end()) it = cache.emplace(subset, local.solve(subset)).first;
      pieces[p] = it->second;
    }
    out.F = fn::callback(n, [unit, pieces = std::move(pieces)](std::span<const double> x, int degree) {
      Jet r(detail::to_vector(x), degree);
      for (const auto& [p, chi] : unit.jets(x, degree)) {
        if (pieces[p].valid()) r += multiply(chi, pieces[p].jet(x, degree));
      }
      return r;
    });
  }
  if (cfg.verify) {
    VerifyConfig g = cfg.grid;
    g.M = M;
    g.order = m;
    out.report.verification = verify_interpolant(out.F, e, f, g);
  }
  return out;
}

}  // namespace nonneg
