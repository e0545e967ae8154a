// nonneg: command-line driver for decompositions, membership checks, extensions,
// interpolation and the feasibility experiments.
//
// Exit status: 0 success, 1 verification failure, 2 input error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/version.hpp>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "CLI11.hpp"
#include "nonneg/nonneg.hpp"

namespace {

using namespace nonneg;
using io::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInputError = 2;
constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string dataset;
  std::optional<int> m, n;
  std::string flavor = "cm1";
  int grid = 0;  // 0: per-command default
  std::optional<int> k_sharp;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> region;
  std::string out = ".";
  std::optional<double> M;
  std::string manifest;
};

json options_json(const Options& o) {
  json j = {{"dataset", o.dataset}, {"flavor", o.flavor}, {"grid", o.grid}, {"tol", o.tol}, {"seed", o.seed}, {"region", o.region}};
  j["m"] = o.m ? json(*o.m) : json(nullptr);
  j["n"] = o.n ? json(*o.n) : json(nullptr);
  j["k_sharp"] = o.k_sharp ? json(*o.k_sharp) : json(nullptr);
  j["M"] = o.M ? json(*o.M) : json(nullptr);
  return j;
}

Options options_from_json(const json& j) {
  Options o;
  o.dataset = j.at("dataset").get<std::string>();
  o.flavor = j.at("flavor").get<std::string>();
  o.grid = j.at("grid").get<int>();
  o.tol = j.at("tol").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.region = j.at("region").get<std::vector<std::int64_t>>();
  if (!j.at("m").is_null()) o.m = j["m"].get<int>();
  if (!j.at("n").is_null()) o.n = j["n"].get<int>();
  if (!j.at("k_sharp").is_null()) o.k_sharp = j["k_sharp"].get<int>();
  if (!j.at("M").is_null()) o.M = j["M"].get<double>();
  return o;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Output collection for one command: files go to opt.out and are listed, with digests, in
/// manifest.json. With dry = true nothing is written (selftest replays).
class Run {
 public:
  Run(std::string command, Options opt, bool dry = false) : command_(std::move(command)), opt_(std::move(opt)), dry_(dry) {}

  const Options& opt() const { return opt_; }
  json& summary() { return summary_; }

  std::string input() {
    if (opt_.dataset.empty()) throw InputError("--dataset is required");
    std::string text = read_file(opt_.dataset);
    input_digest_ = sha256_hex(text);
    return text;
  }

  void write(const std::string& name, const std::string& text) {
    if (dry_) return;
    fs::create_directories(opt_.out);
    io::write_text((fs::path(opt_.out) / name).string(), text);
    outputs_.push_back({{"file", name}, {"sha256", sha256_hex(text)}});
  }

  void finish(double seconds) {
    if (dry_) return;
    json manifest = {{"command", command_},
                     {"config", options_json(opt_)},
                     {"versions",
                      {{"nonneg", kVersion},
                       {"boost", BOOST_LIB_VERSION},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                       {"openssl", OpenSSL_version(OPENSSL_VERSION)},
                       {"compiler", __VERSION__}}},
                     {"input", {{"path", opt_.dataset}, {"sha256", input_digest_}}},
                     {"outputs", outputs_},
                     {"timing_seconds", seconds},
                     {"summary", summary_}};
    fs::create_directories(opt_.out);
    io::write_text((fs::path(opt_.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  Options opt_;
  bool dry_;
  std::string input_digest_;
  json outputs_ = json::array();
  json summary_ = json::object();
};

json load_json(Run& run) {
  const json j = json::parse(run.input(), nullptr, false);
  if (j.is_discarded()) throw InputError(run.opt().dataset + ": malformed JSON");
  return j;
}

io::Dataset load_dataset(const Run& run, const json& j) {
  io::Dataset d = io::dataset_from_json(j);
  if (run.opt().n && *run.opt().n != d.n) throw InputError("--n " + std::to_string(*run.opt().n) + " is inconsistent with dataset n = " + std::to_string(d.n));
  if (run.opt().m && *run.opt().m != d.m) throw InputError("--m " + std::to_string(*run.opt().m) + " is inconsistent with dataset m = " + std::to_string(d.m));
  return d;
}

io::Dataset load_dataset(Run& run) { return load_dataset(run, load_json(run)); }

Flavor parse_flavor(const std::string& s) {
  if (s == "cm") return Flavor::cm;
  if (s == "cm1") return Flavor::cm1;
  throw InputError("--flavor must be cm or cm1");
}

DyadicRegion region_for(const Options& o, const PointSet& e, int n) {
  if (o.region.empty()) return DyadicRegion::around(e, n, 1);
  DyadicRegion r;
  if (o.region.size() == 2) {
    r.lo.assign(static_cast<std::size_t>(n), o.region[0]);
    r.hi.assign(static_cast<std::size_t>(n), o.region[1]);
  } else if (o.region.size() == 2 * static_cast<std::size_t>(n)) {
    for (int v = 0; v < n; ++v) {
      r.lo.push_back(o.region[2 * static_cast<std::size_t>(v)]);
      r.hi.push_back(o.region[2 * static_cast<std::size_t>(v) + 1]);
    }
  } else {
    throw InputError("--region takes lo hi, or lo1 hi1 ... lon hin");
  }
  return r;
}

int per_axis_grid(const Options& o, int n) {
  if (o.grid > 0) return o.grid;
  return n == 1 ? 2001 : 101;
}

int cmd_decompose(Run& run) {
  const io::Dataset d = load_dataset(run);
  const DyadicRegion region = region_for(run.opt(), d.points, d.n);
  const CZDecomposition dec = classify_and_anchor(cz_decompose(d.points, region), d.points);
  run.write("decomposition.json", io::to_json(dec).dump(1) + "\n");
  std::ostringstream csv;
  io::write_cubes_csv(csv, dec);
  run.write("cubes.csv", csv.str());
  std::array<std::size_t, 3> types{};
  int lowest = 0;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    types[static_cast<std::size_t>(dec.types[i]) - 1]++;
    lowest = std::min(lowest, dec.cubes[i].level);
  }
  run.summary() = {{"cubes", dec.size()}, {"type_counts", types}, {"min_level", lowest}};
  std::cout << "decompose: " << dec.size() << " cubes (types " << types[0] << '/' << types[1] << '/' << types[2] << "), finest level " << lowest << '\n';
  return kOk;
}

/// {"M": float, "cfg": {..}, "checks": [{"jet": Jet, "f": float?, "M": float?, "kind": "prime"|"cm"|"gamma0plus"|"tilde0"}]}.
int cmd_gamma_check(Run& run) {
  const json in = load_json(run);
  if (!in.is_object() || !in.contains("checks") || !in["checks"].is_array()) throw InputError("gamma-check input needs a \"checks\" array");
  const GammaConfig cfg = io::gamma_config_from_json(in.value("cfg", json()));
  const double default_M = run.opt().M.value_or(in.value("M", 1.0));
  json verdicts = json::array();
  std::size_t members = 0;
  for (std::size_t i = 0; i < in["checks"].size(); ++i) {
    const json& c = in["checks"][i];
    const std::string where = "checks[" + std::to_string(i) + "]";
    if (!c.is_object() || !c.contains("jet")) throw InputError(where + ": needs \"jet\"");
    const Jet p = io::jet_from_json(c["jet"], where + ".jet");
    const std::string kind = c.value("kind", "prime");
    const double M = c.value("M", default_M);
    if (!(M > 0.0)) throw InputError(where + ".M: must be positive");
    std::optional<double> f;
    if (c.contains("f") && !c["f"].is_null()) f = c["f"].get<double>();
    MembershipVerdict v;
    if (kind == "prime") {
      v = gamma_prime_member(p, p.base(), M, f, cfg);
    } else if (kind == "cm") {
      v = gamma_cm_member(p, p.base(), M, f, cfg);
    } else if (kind == "gamma0plus") {
      v = gamma0plus_member(p, cfg);
    } else if (kind == "tilde0") {
      v = gamma_tilde0_member(p, cfg);
    } else {
      throw InputError(where + ".kind: unknown membership test \"" + kind + "\"");
    }
    members += v.accepted();
    json r = io::to_json(v);
    r["index"] = i;
    r["kind"] = kind;
    verdicts.push_back(r);
  }
  run.write("verdicts.json", verdicts.dump(1) + "\n");
  run.summary() = {{"checks", verdicts.size()}, {"members", members}};
  std::cout << "gamma-check: " << members << " of " << verdicts.size() << " jets accepted\n";
  return kOk;
}

/// {"jet": Jet, "M": float}; the jet is based at the point it extends from.
int cmd_extend(Run& run) {
  const json in = load_json(run);
  if (!in.is_object() || !in.contains("jet")) throw InputError("extend input needs \"jet\"");
  const Jet p = io::jet_from_json(in["jet"]);
  const double M = run.opt().M.value_or(in.value("M", 1.0));
  if (!(M > 0.0)) throw InputError("M must be positive");
  const Flavor flavor = parse_flavor(run.opt().flavor);
  const int n = p.dim(), m = p.degree() + 1;
  const Point x(p.base().begin(), p.base().end());
  const Function F = flavor == Flavor::cm1 ? extend_jet_cm1(p, x, M) : extend_jet_cm_at(p, x, M);
  const Jet got = F.jet(x, p.degree());
  const double match = max_abs_difference(got, p) / std::max(1.0, max_abs_coefficient(p));
  Point lo(x), hi(x);
  for (int v = 0; v < n; ++v) {
    lo[static_cast<std::size_t>(v)] -= 2.0;
    hi[static_cast<std::size_t>(v)] += 2.0;
  }
  VerifyConfig g;
  g.M = M;
  g.order = m;
  g.nonneg_tol = run.opt().tol;
  g.points = 1;
  const int per = per_axis_grid(run.opt(), n);
  for (int v = 0; v < n; ++v) g.points *= per;
  g.window = std::make_pair(lo, hi);
  const VerifyReport rep = verify_interpolant(F, {x}, std::vector<double>{p[0]}, g);
  std::ostringstream csv;
  io::write_grid_csv(csv, F, lo, hi, per, m);
  run.write("extension.csv", csv.str());
  json report = io::to_json(rep);
  report["flavor"] = to_string(flavor);
  report["jet_match"] = match;
  run.write("report.json", report.dump(1) + "\n");
  const bool ok = rep.nonneg_ok && match <= 1e-9;
  run.summary() = {{"min_on_grid", rep.min_on_grid}, {"jet_match", match}, {"norm_ratio", rep.norm_ratio}, {"ok", ok}};
  std::cout << "extend: min on grid " << rep.min_on_grid << ", jet match " << match << ", norm ratio " << rep.norm_ratio << '\n';
  return ok ? kOk : kVerifyFailed;
}

/// Dataset plus optional "field" (Whitney field JSON) and "M". Without a field the witness of
/// the minimal-norm LP is used, at its level times 1 + 1e-6.
int cmd_interpolate(Run& run) {
  const json raw = load_json(run);
  const io::Dataset d = load_dataset(run, raw);
  if (d.points.empty()) throw InputError("dataset has no points");
  const Flavor flavor = parse_flavor(run.opt().flavor);
  std::optional<WhitneyField> w;
  std::optional<double> M = run.opt().M;
  if (!M && raw.contains("M")) M = raw["M"].get<double>();
  if (raw.contains("field")) {
    w = io::field_from_json(raw["field"]);
    if (w->m() != d.m) throw InputError("field: jets have m = " + std::to_string(w->m()) + ", dataset m = " + std::to_string(d.m));
    if (w->size() != d.points.size()) throw InputError("field: has " + std::to_string(w->size()) + " jets for " + std::to_string(d.points.size()) + " points");
  } else {
    const MinNormResult r = min_norm(d.points, d.f, d.m);
    if (r.status != Feasibility::feasible || !r.witness) {
      std::cerr << "interpolate: no certified jet field (" << to_string(r.status) << ")\n";
      return kVerifyFailed;
    }
    w = r.witness;
    if (!M) M = r.M > 0.0 ? r.M * (1.0 + 1e-6) : 1.0;
  }
  if (!M) throw InputError("dataset has a field but no \"M\"; pass --M");
  InterpolateConfig cfg;
  cfg.grid.nonneg_tol = run.opt().tol;
  const int per = per_axis_grid(run.opt(), d.n);
  cfg.grid.points = 1;
  for (int v = 0; v < d.n; ++v) cfg.grid.points *= per;
  const InterpolationResult res = interpolate_nonneg(d.points, d.f, *w, *M, flavor, cfg);
  const VerifyReport& rep = *res.report.verification;
  json report = io::to_json(res.report);
  report["field"] = io::to_json(*w);
  run.write("report.json", report.dump(1) + "\n");
  Point lo(d.points[0]), hi(d.points[0]);
  for (const auto& x : d.points) {
    for (std::size_t v = 0; v < x.size(); ++v) {
      lo[v] = std::min(lo[v], x[v]);
      hi[v] = std::max(hi[v], x[v]);
    }
  }
  for (std::size_t v = 0; v < lo.size(); ++v) {
    lo[v] -= cfg.grid.pad;
    hi[v] += cfg.grid.pad;
  }
  std::ostringstream csv;
  io::write_grid_csv(csv, res.F, lo, hi, per, d.m);
  run.write("grid.csv", csv.str());
  run.summary() = {{"interp_ok", rep.interp_ok},     {"nonneg_ok", rep.nonneg_ok},  {"min_on_grid", rep.min_on_grid},
                   {"norm_ratio", rep.norm_ratio},   {"M", *M},                     {"max_defect_ratio", res.report.max_defect_ratio}};
  std::cout << "interpolate: interp_ok=" << (rep.interp_ok ? "true" : "false") << " nonneg_ok=" << (rep.nonneg_ok ? "true" : "false")
            << " min_on_grid=" << rep.min_on_grid << " norm_ratio=" << rep.norm_ratio << '\n';
  return rep.ok() ? kOk : kVerifyFailed;
}

int cmd_feasibility(Run& run) {
  const io::Dataset d = load_dataset(run);
  if (d.points.empty()) throw InputError("dataset has no points");
  const int k = run.opt().k_sharp.value_or(default_k_sharp(d.n, d.m));
  const MinNormResult global = min_norm(d.points, d.f, d.m);
  const FinitenessResult gap = finiteness_gap(d.points, d.f, d.m, k);
  std::ostringstream csv;
  io::write_finiteness_csv(csv, gap);
  run.write("finiteness.csv", csv.str());
  json summary = io::to_json(gap);
  summary["min_norm"] = global.M;
  summary["min_norm_status"] = to_string(global.status);
  summary["label"] = "empirical, relaxation-dependent";
  run.write("summary.json", summary.dump(1) + "\n");
  run.summary() = {{"min_norm", global.M}, {"finiteness_ratio", gap.ratio}, {"M_subset", gap.M_subset}, {"M_global", gap.M_global}, {"k_sharp", k}};
  bool ok = global.status == Feasibility::feasible;
  for (const auto& s : gap.table) ok = ok && s.status == Feasibility::feasible;
  std::cout << "feasibility: min_norm=" << global.M << " M_subset=" << gap.M_subset << " ratio=" << gap.ratio << " (k_sharp " << k << ", "
            << gap.table.size() << " subsets)\n";
  return ok ? kOk : kVerifyFailed;
}

// ---- selftest --------------------------------------------------------------------------

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

Jet random_jet(std::mt19937_64& rng, int n, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point x(static_cast<std::size_t>(n));
  for (double& c : x) c = u(rng);
  Jet p(x, degree);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = u(rng);
  return p;
}

double binomial(const MultiIndex& b, const MultiIndex& g) { return b.factorial() / (g.factorial() * (b - g).factorial()); }

/// Jet products against the Leibniz rule, the unit, and commutativity.
Check check_jets(std::mt19937_64& rng) {
  Check c{"jet products obey the Leibniz rule"};
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 2, d = t % 4;
    const Jet p = random_jet(rng, n, d);
    Jet q(std::vector<double>(p.base().begin(), p.base().end()), d);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    const Jet r = multiply(p, q);
    const IndexSet& set = p.indices();
    for (std::size_t b = 0; b < set.size(); ++b) {
      double s = 0.0;
      for (std::size_t g = 0; g < set.size(); ++g) {
        if (set[g].divides(set[b])) s += binomial(set[b], set[g]) * p[g] * q[static_cast<std::size_t>(set.position(set[b] - set[g]))];
      }
      worst = std::max(worst, std::abs(s - r[b]));
    }
    worst = std::max(worst, max_abs_difference(r, multiply(q, p)));
    worst = std::max(worst, max_abs_difference(p, multiply(p, Jet::constant(std::vector<double>(p.base().begin(), p.base().end()), d, 1.0))));
  }
  c.ok = worst <= 1e-12;
  c.detail = "max error " + num(worst);
  return c;
}

PointSet random_points(std::mt19937_64& rng, int n, int count, double span) {
  std::uniform_real_distribution<double> u(0.0, span);
  PointSet e;
  while (static_cast<int>(e.size()) < count) {
    Point x(static_cast<std::size_t>(n));
    for (double& v : x) v = u(rng);
    if (std::find(e.begin(), e.end(), x) == e.end()) e.push_back(x);
  }
  return e;
}

/// OK / parent-not-OK, exact cover of the region, good geometry, and the partition of unity.
Check check_decompositions(std::mt19937_64& rng) {
  Check c{"CZ decompositions and their partitions of unity"};
  double worst_sum = 0.0;
  for (int t = 0; t < 20 && c.ok; ++t) {
    const int n = 1 + t % 2;
    const PointSet e = random_points(rng, n, 1 + t % 30, 3.0);
    const DyadicRegion region = DyadicRegion::around(e, n, 1);
    const CZDecomposition dec = classify_and_anchor(cz_decompose(e, region), e);
    double volume = 0.0, expected = 1.0;
    for (int v = 0; v < n; ++v) expected *= static_cast<double>(region.hi[static_cast<std::size_t>(v)] - region.lo[static_cast<std::size_t>(v)]);
    for (const auto& q : dec.cubes) {
      volume += std::pow(q.side(), n);
      if (!is_ok(q, e) || (q.level < 0 && is_ok(q.parent(), e))) {
        c.ok = false;
        c.detail = "cube at level " + std::to_string(q.level) + " is not a maximal OK cube";
      }
    }
    if (std::abs(volume - expected) > 1e-12 * expected) {
      c.ok = false;
      c.detail = "cubes do not tile the region";
    }
    const CubeIndex index(dec.cubes, 65.0 / 64.0);
    const auto touch = index.touching();
    for (std::size_t a = 0; a < touch.size(); ++a) {
      for (std::size_t b : touch[a]) {
        if (std::abs(dec.cubes[a].level - dec.cubes[b].level) > 1) {
          c.ok = false;
          c.detail = "touching cubes differ by more than one level";
        }
      }
    }
    const WhitneyPartition part(dec, 2);
    for (int s = 0; s < 100; ++s) {
      Point x(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v)
        x[static_cast<std::size_t>(v)] = std::uniform_real_distribution<double>(static_cast<double>(region.lo[static_cast<std::size_t>(v)]),
                                                                                static_cast<double>(region.hi[static_cast<std::size_t>(v)]))(rng);
      double sum = 0.0;
      for (const auto& [q, jet] : part.jets(x, 0)) {
        if (jet[0] < 0.0) c.ok = false;
        sum += jet[0];
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  if (worst_sum > 1e-9) c.ok = false;
  if (c.detail.empty()) c.detail = "max |sum theta - 1| " + num(worst_sum);
  return c;
}

/// Extensions of accepted (f, grad) jets: nonnegative on a grid, reproduce the jet.
Check check_extensions(std::mt19937_64& rng) {
  Check c{"C^{m-1,1} extensions are nonnegative and match their jets"};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double lowest = INFINITY, worst_match = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 2;
    Point x(static_cast<std::size_t>(n));
    for (double& v : x) v = 2.0 * u(rng) - 1.0;
    Jet p(x, 1);
    p[0] = u(rng);
    // |grad|^2 <= 0.9 * 4 f and every entry <= 1: accepted at M = 1
    const double r = std::min(1.0, std::sqrt(3.6 * p[0]));
    for (int v = 0; v < n; ++v) p[1 + static_cast<std::size_t>(v)] = (2.0 * u(rng) - 1.0) * r / std::sqrt(static_cast<double>(n));
    const Function F = extend_jet_cm1(p, x, 1.0);
    worst_match = std::max(worst_match, max_abs_difference(F.jet(x, 1), p));
    const int per = n == 1 ? 2001 : 81;
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    while (true) {
      Point y(x);
      for (int v = 0; v < n; ++v) y[static_cast<std::size_t>(v)] += -1.5 + 3.0 * k[static_cast<std::size_t>(v)] / (per - 1);
      lowest = std::min(lowest, F(y));
      int v = 0;
      for (; v < n; ++v) {
        if (++k[static_cast<std::size_t>(v)] < per) break;
        k[static_cast<std::size_t>(v)] = 0;
      }
      if (v == n) break;
    }
  }
  c.ok = lowest >= -1e-10 && worst_match <= 1e-12;
  c.detail = "min " + num(lowest) + ", jet error " + num(worst_match);
  return c;
}

/// min_norm against max(max f, max slope) for m = n = 1.
Check check_lipschitz(std::mt19937_64& rng) {
  Check c{"min_norm matches the 1D Lipschitz optimum"};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const PointSet e = random_points(rng, 1, 2 + t % 6, 2.0);
    std::vector<double> f;
    for (std::size_t i = 0; i < e.size(); ++i) f.push_back(u(rng));
    double exact = *std::max_element(f.begin(), f.end());
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) exact = std::max(exact, std::abs(f[i] - f[j]) / std::abs(e[i][0] - e[j][0]));
    }
    worst = std::max(worst, std::abs(min_norm(e, f, 1).M - exact) / exact);
  }
  c.ok = worst <= 5e-3;
  c.detail = "max relative error " + num(worst);
  return c;
}

Check check_helly() {
  Check c{"Helly: pairwise-but-not-triple counterexample in the plane"};
  const std::vector<Polyhedron> sets{{{{1.0, 0.0}}, {0.0}}, {{{0.0, 1.0}}, {0.0}}, {{{-1.0, -1.0}}, {1.0}}};
  const HellyResult r = helly_check(sets, 2);
  bool pairs = true;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) pairs = pairs && helly_check({sets[a], sets[b]}, 2).all_nonempty;
  }
  c.ok = pairs && !r.tuples_nonempty && !r.all_nonempty && r.consistent();
  c.detail = pairs ? "pairs meet, triple empty" : "a pair failed to meet";
  return c;
}

/// Replays the command recorded in a manifest and compares the numeric summary entries.
int replay_manifest(const std::string& path) {
  const json manifest = io::read_json(path);
  const std::string command = manifest.at("command").get<std::string>();
  Options opt = options_from_json(manifest.at("config"));
  if (fs::path(opt.dataset).is_relative() && !fs::exists(opt.dataset)) opt.dataset = (fs::path(path).parent_path() / opt.dataset).string();
  const std::string digest = sha256_hex(read_file(opt.dataset));
  if (digest != manifest.at("input").at("sha256").get<std::string>()) throw InputError(opt.dataset + ": input digest differs from the manifest");
  Run run(command, opt, true);
  if (command == "decompose") {
    cmd_decompose(run);
  } else if (command == "gamma-check") {
    cmd_gamma_check(run);
  } else if (command == "extend") {
    cmd_extend(run);
  } else if (command == "interpolate") {
    cmd_interpolate(run);
  } else if (command == "feasibility") {
    cmd_feasibility(run);
  } else {
    throw InputError("manifest: unknown command " + command);
  }
  const double rel = 1e-6;
  bool ok = true;
  for (const auto& [key, want] : manifest.at("summary").items()) {
    const json& got = run.summary()[key];
    bool same = got == want;
    if (!same && want.is_number() && got.is_number()) {
      const double a = want.get<double>(), b = got.get<double>();
      same = std::abs(a - b) <= rel * std::max(1.0, std::abs(a));
    }
    std::cout << "selftest manifest " << key << ": " << (same ? "pass" : "FAIL") << " (recorded " << want.dump() << ", now " << got.dump() << ")\n";
    ok = ok && same;
  }
  return ok ? kOk : kVerifyFailed;
}

int cmd_selftest(const Options& opt) {
  if (!opt.manifest.empty()) return replay_manifest(opt.manifest);
  std::mt19937_64 rng(opt.seed);
  std::vector<Check> checks;
  checks.push_back(check_jets(rng));
  checks.push_back(check_decompositions(rng));
  checks.push_back(check_extensions(rng));
  checks.push_back(check_lipschitz(rng));
  checks.push_back(check_helly());
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << "selftest " << c.name << ": " << (c.ok ? "pass" : "FAIL") << " (" << c.detail << ")\n";
    ok = ok && c.ok;
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative C^m interpolation: decompositions, jet extensions, feasibility LPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options opt;

  auto common = [&](CLI::App* s, bool needs_dataset = true) {
    auto* d = s->add_option("--dataset", opt.dataset, "input JSON file");
    if (needs_dataset) d->required();
    s->add_option("--out", opt.out, "output directory")->capture_default_str();
    s->add_option("--seed", opt.seed, "random seed")->capture_default_str();
  };
  auto* decompose = app.add_subcommand("decompose", "CZ decomposition dump and cube CSV");
  common(decompose);
  decompose->add_option("--region", opt.region, "integer box: lo hi (every axis) or lo1 hi1 ... lon hin");
  decompose->add_option("--n", opt.n, "expected dimension");
  decompose->add_option("--m", opt.m, "expected smoothness order");

  auto* gamma = app.add_subcommand("gamma-check", "membership verdicts for the jets in a file");
  common(gamma);
  gamma->add_option("--M", opt.M, "level for checks that do not set one");

  auto* extend = app.add_subcommand("extend", "nonnegative extension of one jet, with a grid CSV");
  common(extend);
  extend->add_option("--M", opt.M, "level");
  extend->add_option("--flavor", opt.flavor, "cm or cm1")->check(CLI::IsMember({"cm", "cm1"}))->capture_default_str();
  extend->add_option("--grid", opt.grid, "grid points per axis");
  extend->add_option("--tol", opt.tol, "allowed negativity on the grid")->capture_default_str();

  auto* interp = app.add_subcommand("interpolate", "full interpolation pipeline with report and grid CSV");
  common(interp);
  interp->add_option("--m", opt.m, "smoothness order (must match the dataset)");
  interp->add_option("--n", opt.n, "dimension (must match the dataset)");
  interp->add_option("--M", opt.M, "level (default: from the dataset, else the minimal-norm LP)");
  interp->add_option("--flavor", opt.flavor, "cm or cm1")->check(CLI::IsMember({"cm", "cm1"}))->capture_default_str();
  interp->add_option("--grid", opt.grid, "grid points per axis");
  interp->add_option("--tol", opt.tol, "allowed negativity on the grid")->capture_default_str();

  auto* feas = app.add_subcommand("feasibility", "min_norm and finiteness_gap experiment");
  common(feas);
  feas->add_option("--m", opt.m, "smoothness order (must match the dataset)");
  feas->add_option("--n", opt.n, "dimension (must match the dataset)");
  feas->add_option("--k-sharp", opt.k_sharp, "subset size (default 2 dim P)");

  auto* self = app.add_subcommand("selftest", "invariant checks, or replay of a manifest");
  self->add_option("--seed", opt.seed, "random seed")->capture_default_str();
  self->add_option("--manifest", opt.manifest, "manifest.json to reproduce");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*self) return cmd_selftest(opt);
    CLI::App* sub = app.get_subcommands().front();
    Run run(sub->get_name(), opt);
    int code = kOk;
    if (sub == decompose) code = cmd_decompose(run);
    if (sub == gamma) code = cmd_gamma_check(run);
    if (sub == extend) code = cmd_extend(run);
    if (sub == interp) code = cmd_interpolate(run);
    if (sub == feas) code = cmd_feasibility(run);
    run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return code;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const PreconditionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const BudgetError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
}
