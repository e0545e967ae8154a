#pragma once

// JSON and CSV boundary: datasets, jets, Whitney fields, decompositions, grids and reports.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nonneg/dyadic.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/feasibility.hpp"
#include "nonneg/function.hpp"
#include "nonneg/gamma.hpp"
#include "nonneg/interpolate.hpp"
#include "nonneg/jet.hpp"
#include "nonneg/whitney.hpp"

namespace nonneg::io {

using nlohmann::json;

struct Dataset {
  int n = 1;
  int m = 1;
  PointSet points;
  std::vector<double> f;
};

namespace detail {

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where + ": value is not finite");
  return v;
}

inline int integer(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer()) throw InputError(where + ": \"" + key + "\" must be an integer");
  return j[key].get<int>();
}

inline Point point(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of coordinates");
  if (j.size() != n) throw InputError(where + ": has " + std::to_string(j.size()) + " coordinates, expected n = " + std::to_string(n));
  Point x;
  for (std::size_t v = 0; v < j.size(); ++v) x.push_back(number(j[v], where + "[" + std::to_string(v) + "]"));
  return x;
}

inline json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": malformed JSON: " + e.what());
  }
}

}  // namespace detail

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return detail::parse(buf.str(), path);
}

/// {"n": int, "m": int, "points": [{"x": [..], "f": float}]} with f >= 0.
inline Dataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw InputError("dataset: expected an object");
  Dataset d;
  d.n = detail::integer(j, "n", "dataset");
  d.m = detail::integer(j, "m", "dataset");
  if (d.n < 1) throw InputError("dataset: n must be at least 1");
  if (d.m < 1) throw InputError("dataset: m must be at least 1");
  if (!j.contains("points") || !j["points"].is_array()) throw InputError("dataset: \"points\" must be an array");
  const auto& pts = j["points"];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string where = "points[" + std::to_string(i) + "]";
    if (!pts[i].is_object() || !pts[i].contains("x") || !pts[i].contains("f")) throw InputError(where + ": needs \"x\" and \"f\"");
    Point x = detail::point(pts[i]["x"], static_cast<std::size_t>(d.n), where + ".x");
    const double f = detail::number(pts[i]["f"], where + ".f");
    if (f < 0.0) throw InputError(where + ".f: must be nonnegative, got " + std::to_string(f));
    for (std::size_t k = 0; k < d.points.size(); ++k) {
      if (d.points[k] == x) throw InputError(where + ": repeats points[" + std::to_string(k) + "]");
    }
    d.points.push_back(std::move(x));
    d.f.push_back(f);
  }
  return d;
}

inline json to_json(const Dataset& d) {
  json pts = json::array();
  for (std::size_t i = 0; i < d.points.size(); ++i) pts.push_back({{"x", d.points[i]}, {"f", d.f[i]}});
  return {{"n", d.n}, {"m", d.m}, {"points", pts}};
}

/// {"base": [..], "m": int, "n": int, "derivs": [{"alpha": [..], "value": float}]}. "m" is
/// degree + 1 (an (m-1)-jet); "plus": true marks an m-jet, whose degree is m.
inline json to_json(const Jet& p, bool plus = false) {
  json derivs = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const MultiIndex& a = p.indices()[i];
    std::vector<int> alpha;
    for (int v = 0; v < p.dim(); ++v) alpha.push_back(a[static_cast<std::size_t>(v)]);
    derivs.push_back({{"alpha", alpha}, {"value", p[i]}});
  }
  json out = {{"base", std::vector<double>(p.base().begin(), p.base().end())},
              {"m", plus ? p.degree() : p.degree() + 1},
              {"n", p.dim()},
              {"derivs", derivs}};
  if (plus) out["plus"] = true;
  return out;
}

inline Jet jet_from_json(const json& j, const std::string& where = "jet") {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const int n = detail::integer(j, "n", where);
  const int m = detail::integer(j, "m", where);
  const bool plus = j.value("plus", false);
  if (n < 1 || m < 1) throw InputError(where + ": n and m must be positive");
  if (!j.contains("base")) throw InputError(where + ": missing \"base\"");
  Jet p(detail::point(j["base"], static_cast<std::size_t>(n), where + ".base"), plus ? m : m - 1);
  if (!j.contains("derivs") || !j["derivs"].is_array()) throw InputError(where + ": \"derivs\" must be an array");
  std::vector<bool> seen(p.size(), false);
  for (std::size_t k = 0; k < j["derivs"].size(); ++k) {
    const auto& d = j["derivs"][k];
    const std::string at = where + ".derivs[" + std::to_string(k) + "]";
    if (!d.is_object() || !d.contains("alpha") || !d["alpha"].is_array() || d["alpha"].size() != static_cast<std::size_t>(n))
      throw InputError(at + ": \"alpha\" must be an array of " + std::to_string(n) + " integers");
    std::vector<int> e;
    for (const auto& c : d["alpha"]) {
      if (!c.is_number_integer() || c.get<int>() < 0) throw InputError(at + ": alpha entries must be nonnegative integers");
      e.push_back(c.get<int>());
    }
    const MultiIndex alpha(e);
    const long pos = p.indices().position(alpha);
    if (pos < 0) throw InputError(at + ": |alpha| exceeds the jet degree");
    if (seen[static_cast<std::size_t>(pos)]) throw InputError(at + ": repeated multi-index");
    seen[static_cast<std::size_t>(pos)] = true;
    p[static_cast<std::size_t>(pos)] = detail::number(d.contains("value") ? d["value"] : json(), at + ".value");
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw InputError(where + ": missing derivative alpha=(" + p.indices()[i].to_string() + ")");
  }
  return p;
}

/// {"points": [[..]], "jets": [Jet]}.
inline json to_json(const WhitneyField& w) {
  json pts = json::array(), jets = json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    pts.push_back(std::vector<double>(w.point(i).begin(), w.point(i).end()));
    jets.push_back(to_json(w[i]));
  }
  return {{"points", pts}, {"jets", jets}};
}

inline WhitneyField field_from_json(const json& j) {
  if (!j.is_object() || !j.contains("jets") || !j["jets"].is_array()) throw InputError("field: \"jets\" must be an array");
  std::vector<Jet> jets;
  for (std::size_t i = 0; i < j["jets"].size(); ++i) jets.push_back(jet_from_json(j["jets"][i], "jets[" + std::to_string(i) + "]"));
  if (j.contains("points")) {
    if (!j["points"].is_array() || j["points"].size() != jets.size()) throw InputError("field: \"points\" and \"jets\" differ in length");
    for (std::size_t i = 0; i < jets.size(); ++i) {
      const Point x = detail::point(j["points"][i], static_cast<std::size_t>(jets[i].dim()), "points[" + std::to_string(i) + "]");
      if (!std::equal(x.begin(), x.end(), jets[i].base().begin())) throw InputError("points[" + std::to_string(i) + "]: differs from the jet base");
    }
  }
  return WhitneyField(std::move(jets));
}

/// {"grid_per_axis": int, "eps_ladder": [..], "tol": float, "r_cut_slack": float}; absent keys keep defaults.
inline GammaConfig gamma_config_from_json(const json& j) {
  GammaConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw InputError("cfg: expected an object");
  if (j.contains("grid_per_axis")) cfg.grid_per_axis = detail::integer(j, "grid_per_axis", "cfg");
  if (j.contains("eps_ladder")) {
    if (!j["eps_ladder"].is_array()) throw InputError("cfg.eps_ladder: expected an array");
    cfg.eps_ladder.clear();
    for (const auto& e : j["eps_ladder"]) cfg.eps_ladder.push_back(detail::number(e, "cfg.eps_ladder"));
  }
  if (j.contains("tol")) cfg.tol = detail::number(j["tol"], "cfg.tol");
  if (j.contains("r_cut_slack")) cfg.r_cut_slack = detail::number(j["r_cut_slack"], "cfg.r_cut_slack");
  return cfg;
}

inline json to_json(const GammaConfig& cfg) {
  return {{"grid_per_axis", cfg.grid_per_axis}, {"eps_ladder", cfg.eps_ladder}, {"tol", cfg.tol}, {"r_cut_slack", cfg.r_cut_slack}};
}

inline json to_json(const MembershipVerdict& v) {
  json out = {{"status", to_string(v.status)}, {"reason", v.reason}};
  out["margin"] = std::isfinite(v.margin) ? json(v.margin) : json(nullptr);
  if (v.point) out["point"] = *v.point;
  if (v.eps_delta) out["eps_delta"] = {v.eps_delta->first, v.eps_delta->second};
  return out;
}

/// [{"level": k, "corner": [..], "type": t, "anchor": [..] | null}].
inline json to_json(const CZDecomposition& dec) {
  json out = json::array();
  for (std::size_t i = 0; i < dec.size(); ++i) {
    json c = {{"level", dec.cubes[i].level}, {"corner", dec.cubes[i].corner}};
    c["type"] = i < dec.types.size() ? json(static_cast<int>(dec.types[i])) : json(nullptr);
    c["anchor"] = i < dec.anchors.size() && dec.anchors[i] ? json(*dec.anchors[i]) : json(nullptr);
    out.push_back(c);
  }
  return out;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace detail

/// One row per cube: level, side, lower corner and upper corner coordinates, type.
inline void write_cubes_csv(std::ostream& out, const CZDecomposition& dec) {
  const int n = dec.region.dim();
  out << "level,side";
  for (int v = 0; v < n; ++v) out << ",lo" << v + 1;
  for (int v = 0; v < n; ++v) out << ",hi" << v + 1;
  out << ",type\n";
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const auto& q = dec.cubes[i];
    out << q.level << ',' << detail::fmt(q.side());
    for (std::size_t v = 0; v < static_cast<std::size_t>(n); ++v) out << ',' << detail::fmt(q.lower(v));
    for (std::size_t v = 0; v < static_cast<std::size_t>(n); ++v) out << ',' << detail::fmt(q.upper(v));
    out << ',' << (i < dec.types.size() ? std::to_string(static_cast<int>(dec.types[i])) : std::string()) << '\n';
  }
}

/// x1..xn, F, then every derivative of order 1..order on a tensor grid of `per_axis` points.
inline void write_grid_csv(std::ostream& out, const Function& F, const Point& lo, const Point& hi, int per_axis, int order) {
  const std::size_t n = lo.size();
  if (hi.size() != n || static_cast<int>(n) != F.dim()) throw InputError("grid window has wrong dimension");
  if (per_axis < 2) throw InputError("grid needs at least 2 points per axis");
  const auto set = IndexSet::get(static_cast<int>(n), order);
  for (std::size_t v = 0; v < n; ++v) out << 'x' << v + 1 << ',';
  out << 'F';
  for (std::size_t i = 1; i < set->size(); ++i) out << ",d(" << (*set)[i].to_string() << ')';
  out << '\n';
  std::vector<int> k(n, 0);
  Point x(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) x[v] = lo[v] + (hi[v] - lo[v]) * k[v] / (per_axis - 1);
    const Jet j = F.jet(x, order);
    for (std::size_t v = 0; v < n; ++v) out << detail::fmt(x[v]) << ',';
    for (std::size_t i = 0; i < j.size(); ++i) out << (i ? "," : "") << detail::fmt(j[i]);
    out << '\n';
    std::size_t v = 0;
    for (; v < n; ++v) {
      if (++k[v] < per_axis) break;
      k[v] = 0;
    }
    if (v == n) break;
  }
}

/// {"interp_ok", "nonneg_ok", "max_interp_error", "min_on_grid", "argmin", "norms": {beta: sup}, "norm_ratio"}.
inline json to_json(const VerifyReport& r) {
  json norms = json::object();
  for (const auto& [beta, sup] : r.norms) norms["(" + beta.to_string() + ")"] = sup;
  return {{"interp_ok", r.interp_ok}, {"nonneg_ok", r.nonneg_ok},   {"max_interp_error", r.max_interp_error},
          {"min_on_grid", r.min_on_grid}, {"argmin", r.argmin}, {"norms", norms},
          {"norm_ratio", r.norm_ratio}};
}

inline json to_json(const InterpolationReport& r) {
  json defects = json::array();
  for (const auto& d : r.defects) defects.push_back({{"a", d.a}, {"b", d.b}, {"level_a", d.level_a}, {"level_b", d.level_b}, {"ratio", d.ratio}});
  json out = r.verification ? to_json(*r.verification) : json::object();
  out["flavor"] = to_string(r.flavor);
  out["m"] = r.m;
  out["M"] = r.M;
  out["unit_pieces"] = r.unit_pieces;
  out["cubes"] = r.cubes;
  out["type_counts"] = r.type_counts;
  out["defect_ratios"] = defects;
  out["max_defect_ratio"] = r.max_defect_ratio;
  return out;
}

/// subset id, size, M*, status; the subset itself as space-separated indices.
inline void write_finiteness_csv(std::ostream& out, const FinitenessResult& r) {
  out << "subset,size,M,status,points\n";
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    const auto& s = r.table[i];
    out << i << ',' << s.points.size() << ',' << detail::fmt(s.M) << ',' << to_string(s.status) << ',';
    for (std::size_t k = 0; k < s.points.size(); ++k) out << (k ? " " : "") << s.points[k];
    out << '\n';
  }
}

inline json to_json(const FinitenessResult& r) {
  return {{"M_subset", r.M_subset}, {"M_global", r.M_global}, {"ratio", r.ratio}, {"k_sharp", r.k_sharp}, {"subsets", r.table.size()}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

}  // namespace nonneg::io
