#include "qham/cli.hpp"

#include "qham/surface.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace qham::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

int get_int(const json& j, const std::string& key, const std::string& path, std::optional<int> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    fail(path + "." + key, "missing");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
  return v.get<int>();
}

int positive(const json& j, const std::string& key, const std::string& path, std::optional<int> def = std::nullopt) {
  const int v = get_int(j, key, path, def);
  if (v < 1) fail(path + "." + key, "must be positive");
  return v;
}

double positive_real(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) fail(path + "." + key, "must be positive");
  return x;
}

std::string type_of(const json& spec, const std::string& path) {
  if (spec.is_string()) return spec.get<std::string>();
  if (spec.is_object() && spec.contains("type") && spec.at("type").is_string()) return spec.at("type").get<std::string>();
  fail(path, "expected a name or an object with a 'type'");
}

Automorphism matrix_aut(const json& spec, const MatrixGroup& G, const std::string& path) {
  const std::string t = type_of(spec, path);
  Automorphism k;
  if (t == "identity") {
    k = Automorphism::identity();
  } else if (t == "conjugation") {
    k = Automorphism::conjugation(2);
  } else if (t == "inner_diag") {
    const int d = spec.is_object() ? positive(spec, "order", path, 2) : 2;
    Mat w = Mat::Identity(G.n(), G.n());
    if (G.kind() == GroupKind::SO) {
      if (d != 2) fail(path + ".order", "real diagonal inner automorphisms have order 2");
      for (int i = 1; i < G.n(); i += 2) w(i, i) = -1.0;
    } else {
      for (int i = 0; i < G.n(); ++i) w(i, i) = std::polar(1.0, 2.0 * std::numbers::pi * i / d);
    }
    k = Automorphism::inner(w, d);
  } else if (t == "inner_random") {
    const int seed = spec.is_object() ? get_int(spec, "seed", path, 0) : 0;
    Rng rng(static_cast<std::uint64_t>(seed));
    k = Automorphism::inner(G.random_element(rng), 0);
  } else {
    fail(path, "unknown automorphism '" + t + "' (identity, conjugation, inner_diag, inner_random)");
  }
  std::string why;
  if (k.declared_order() > 0 && !validate_automorphism(G, k, 7, &why)) fail(path, "invalid automorphism: " + why);
  return k;
}

Perm finite_aut(const json& spec, const GroupConfig& g, const std::string& path) {
  const FiniteGroup& G = *g.table;
  const std::string t = type_of(spec, path);
  Perm p;
  if (t == "identity") {
    p = G.identity_aut();
  } else if (t == "inversion") {
    p = G.inversion_map();
  } else if (t == "inner") {
    const int e = get_int(spec, "element", path);
    if (e < 0 || e >= G.order()) fail(path + ".element", "no such group element");
    p = G.inner_aut(e);
  } else if (t == "table") {
    const int i = get_int(spec, "index", path, 0);
    if (i < 0 || i >= static_cast<int>(g.table_gamma_images.size())) fail(path + ".index", "no such gamma_images entry");
    p = g.table_gamma_images[i];
  } else {
    fail(path, "unknown automorphism '" + t + "' (identity, inversion, inner, table)");
  }
  if (!G.is_automorphism(p)) fail(path, "not an automorphism of the group");
  return p;
}

GroupConfig parse_group(const json& j, const std::string& base_dir) {
  GroupConfig g;
  const std::string kind = type_of(j.is_object() && j.contains("kind") ? j.at("kind") : j, "group.kind");
  auto load = [&](FiniteGroup G) { g.table = std::make_shared<FiniteGroup>(std::move(G)); };
  if (kind == "su" || kind == "so") {
    const int n = positive(j, "n", "group", 2);
    const double scale = positive_real(j, "scale", "group", 1.0);
    if (kind == "so" && n < 2) fail("group.n", "SO(n) needs n >= 2");
    g.matrix = kind == "su" ? MatrixGroup::su(n, scale) : MatrixGroup::so(n, scale);
  } else if (kind == "cyclic") {
    g.finite = true;
    load(FiniteGroup::cyclic(positive(j, "order", "group")));
  } else if (kind == "symmetric3") {
    g.finite = true;
    load(FiniteGroup::symmetric3());
  } else if (kind == "finite") {
    g.finite = true;
    const json& t = field(j, "table", "group");
    if (!t.is_string()) fail("group.table", "must be a file path");
    fs::path p = t.get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) fail("group.table", "file not found: " + p.string());
    try {
      load(FiniteGroup::from_json_file(p.string(), &g.table_gamma_images));
    } catch (const std::exception& e) {
      fail("group.table", e.what());
    }
  } else {
    fail("group.kind", "unknown group kind '" + kind + "' (su, so, cyclic, symmetric3, finite)");
  }
  return g;
}

GammaConfig parse_gamma(const json& j, const GroupConfig& g) {
  GammaConfig c;
  c.order = positive(j, "order", "gamma");
  const json spec = j.contains("automorphism") ? j.at("automorphism") : json("identity");
  if (g.finite) {
    c.perm = finite_aut(spec, g, "gamma.automorphism");
    if (c.order % FiniteGroup::order_of(c.perm) != 0)
      fail("gamma.order", "must be a multiple of the automorphism order");
  } else {
    c.kappa = matrix_aut(spec, *g.matrix, "gamma.automorphism");
    const int d = c.kappa.declared_order();
    if (d < 1) fail("gamma.automorphism", "needs a finite order");
    if (c.order % d != 0) fail("gamma.order", "must be a multiple of the automorphism order");
  }
  return c;
}

SurfaceData parse_surface(const json& j, const std::string& path) {
  SurfaceData S;
  S.genus = get_int(j, "genus", path, 0);
  if (S.genus < 0) fail(path + ".genus", "must be non-negative");
  const json& bp = field(j, "base_points", path);
  if (!bp.is_array() || bp.empty()) fail(path + ".base_points", "needs one count per boundary component");
  S.base_points.clear();
  for (std::size_t i = 0; i < bp.size(); ++i) {
    if (!bp[i].is_number_integer() || bp[i].get<int>() < 1)
      fail(path + ".base_points[" + std::to_string(i) + "]", "must be a positive integer");
    S.base_points.push_back(bp[i].get<int>());
  }
  return S;
}

// 256, 512, 1024 when m divides them, else the nearest multiples of m above.
std::vector<int> default_convergence_N(int m) {
  const int base = (256 + m - 1) / m * m;
  return {base, 2 * base, 4 * base};
}

const std::vector<std::string>& loop_suites() {
  static const std::vector<std::string> s{"loop_contraction", "loop_convergence", "loop_dvarpi",
                                          "loop_gauge_covariance", "loop_invariance"};
  return s;
}

void validate_construction(RunConfig& c) {
  const json& k = c.construction_json;
  const std::string p = "construction";
  const std::string& t = c.construction;
  const bool fin = c.group.finite;
  auto need_matrix = [&] {
    if (fin) fail(p + ".type", "'" + t + "' needs a matrix group");
  };
  auto no_gamma = [&] {
    if (c.gamma) fail("gamma", "not supported for construction '" + t + "'");
  };
  if (t == "double" || t == "fused_double") {
    if (fin && t == "fused_double") fail(p + ".type", "finite groups support 'double' only");
    if (k.contains("twists")) {
      const json& tw = k.at("twists");
      if (!tw.is_array() || tw.size() != 2) fail(p + ".twists", "needs two automorphisms");
      for (int i = 0; i < 2; ++i) {
        const std::string q = p + ".twists[" + std::to_string(i) + "]";
        if (fin) finite_aut(tw[i], c.group, q);
        else matrix_aut(tw[i], *c.group.matrix, q);
      }
    }
    if (k.value("fixed_locus", false) && !c.gamma) fail(p + ".fixed_locus", "needs a gamma section");
    if (k.contains("control")) {
      const std::string ctl = type_of(k.at("control"), p + ".control");
      if (ctl != "degenerate" && ctl != "nonequivariant_mu") fail(p + ".control", "unknown control '" + ctl + "'");
    }
    if (fin && !c.gamma) fail("gamma", "finite doubles are checked through their fixed points; add a gamma section");
  } else if (t == "generalized_double") {
    need_matrix();
    no_gamma();
    positive(k, "m_inf", p);
    positive(k, "m0", p);
  } else if (t == "surface") {
    need_matrix();
    no_gamma();
    parse_surface(k, p);
  } else if (t == "cover") {
    if (!fin) fail(p + ".type", "covers are enumerated over finite groups");
    if (!c.gamma) fail("gamma", "a cover needs the deck group order");
    const SurfaceData S = parse_surface(field(k, "base", p), p + ".base");
    const Quiver Q = build_quiver(S);
    const json& h = field(k, "hom", p);
    if (!h.is_array() || static_cast<int>(h.size()) != Q.stored)
      fail(p + ".hom", "needs one value per stored edge (" + std::to_string(Q.stored) + ")");
    for (const auto& x : h)
      if (!x.is_number_integer()) fail(p + ".hom", "values must be integers");
    if (k.contains("representatives")) {
      const json& r = k.at("representatives");
      if (!r.is_array() || r.size() != Q.vertices.size()) fail(p + ".representatives", "needs one sheet per base point");
    }
  } else if (t == "loop") {
    need_matrix();
    no_gamma();
    const int m = positive(k, "m", p);
    const int N = positive(k, "N", p);
    if (N % m != 0) fail(p + ".N", "must be divisible by m");
    if (k.contains("twist")) {
      const Automorphism kap = matrix_aut(k.at("twist"), *c.group.matrix, p + ".twist");
      if (kap.declared_order() < 1 || m % kap.declared_order() != 0)
        fail(p + ".twist", "its order must divide m");
    }
    if (k.contains("convergence_N")) {
      const json& ns = k.at("convergence_N");
      if (!ns.is_array() || ns.size() < 2) fail(p + ".convergence_N", "needs at least two grid sizes");
      for (const auto& n : ns)
        if (!n.is_number_integer() || n.get<int>() < 1 || n.get<int>() % m != 0)
          fail(p + ".convergence_N", "grid sizes must be positive multiples of m");
    }
  } else {
    fail(p + ".type", "unknown construction '" + t +
                          "' (double, fused_double, generalized_double, surface, cover, loop)");
  }
}

}  // namespace

std::vector<std::string> allowed_suites(const RunConfig& c) {
  std::vector<std::string> out;
  const std::string& t = c.construction;
  if (t == "loop") {
    out = loop_suites();
  } else if (t == "cover") {
    out = {"cover_bijection"};
  } else if (c.group.finite) {
    out = {"fixed_product_iso", "fusion_fixed_iso"};
  } else {
    out = suite_names();
    if ((t == "double" || t == "fused_double") && c.gamma) {
      out.push_back("fixed_product_iso");
      if (t == "double") out.push_back("fusion_fixed_iso");
      if (c.construction_json.value("fixed_locus", false)) out.push_back("fixed_degeneracy");
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) fail("config", "must be a JSON object");
  RunConfig c;
  c.echo = j;
  c.group = parse_group(field(j, "group", "config"), base_dir);
  if (j.contains("gamma")) c.gamma = parse_gamma(j.at("gamma"), c.group);
  const json& k = field(j, "construction", "config");
  c.construction = type_of(k, "construction");
  c.construction_json = k.is_object() ? k : json::object();
  validate_construction(c);

  c.options.samples = positive(j, "samples", "config", 50);
  const int seed = get_int(j, "seed", "config", 1);
  if (seed < 0) fail("config.seed", "must be non-negative");
  c.options.seed = static_cast<std::uint64_t>(seed);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) fail("tolerances", "must be an object");
    static const std::set<std::string> known{"fd_step", "qh1", "qh2", "rank", "exact", "invariance",
                                             "cartan_normalization", "loop", "loop_fd_step", "loop_hol_step"};
    for (auto it = t.begin(); it != t.end(); ++it)
      if (!known.count(it.key())) fail("tolerances." + it.key(), "unknown tolerance");
    auto& o = c.options;
    o.fd_step = positive_real(t, "fd_step", "tolerances", o.fd_step);
    o.qh1_tol = positive_real(t, "qh1", "tolerances", o.qh1_tol);
    o.qh2_tol = positive_real(t, "qh2", "tolerances", o.qh2_tol);
    o.rank_tol = positive_real(t, "rank", "tolerances", o.rank_tol);
    o.exact_tol = positive_real(t, "exact", "tolerances", o.exact_tol);
    o.invariance_tol = positive_real(t, "invariance", "tolerances", o.invariance_tol);
    o.cartan_normalization = positive_real(t, "cartan_normalization", "tolerances", o.cartan_normalization);
    c.loop.tol = positive_real(t, "loop", "tolerances", c.loop.tol);
    c.loop.fd_step = positive_real(t, "loop_fd_step", "tolerances", c.loop.fd_step);
    c.loop.hol_step = positive_real(t, "loop_hol_step", "tolerances", c.loop.hol_step);
  }
  if (j.contains("guard")) {
    const json& g = j.at("guard");
    if (!g.is_number_unsigned() || g.get<std::uint64_t>() == 0) fail("config.guard", "must be a positive integer");
    c.guard = g.get<std::uint64_t>();
  }

  const auto allowed = allowed_suites(c);
  const json suites = j.contains("suites") ? j.at("suites") : json("all");
  if (suites.is_string() && suites.get<std::string>() == "all") {
    c.suites = allowed;
  } else if (suites.is_array() && !suites.empty()) {
    std::set<std::string> s;
    for (std::size_t i = 0; i < suites.size(); ++i) {
      const std::string path = "suites[" + std::to_string(i) + "]";
      if (!suites[i].is_string()) fail(path, "must be a suite name");
      const std::string name = suites[i].get<std::string>();
      if (!std::binary_search(allowed.begin(), allowed.end(), name))
        fail(path, "unknown suite '" + name + "' for construction '" + c.construction + "'");
      s.insert(name);
    }
    c.suites.assign(s.begin(), s.end());
  } else {
    fail("suites", "must be \"all\" or a non-empty list of suite names");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j, fs::path(path).parent_path().string());
}

namespace {

MatBitorsor matrix_bitorsor(const RunConfig& c, int i) {
  const MatrixGroup& G = *c.group.matrix;
  const MatOps ops{G.n()};
  Twist<MatOps> tw = Twist<MatOps>::identity(1, ops);
  const json& k = c.construction_json;
  if (k.contains("twists")) tw = Twist<MatOps>::single(matrix_aut(k.at("twists")[i], G, "construction.twists"));
  std::optional<GammaAction<MatOps>> ga;
  if (c.gamma) ga = GammaAction<MatOps>{c.gamma->order, Monomial<MatOps>::diagonal(1, c.gamma->kappa)};
  return MatBitorsor(ops, tw, ga);
}

FinBitorsor finite_bitorsor(const RunConfig& c, int i) {
  const FiniteOps ops{c.group.table.get()};
  Twist<FiniteOps> tw = Twist<FiniteOps>::identity(1, ops);
  const json& k = c.construction_json;
  if (k.contains("twists")) tw = Twist<FiniteOps>::single(finite_aut(k.at("twists")[i], c.group, "construction.twists"));
  return FinBitorsor(ops, tw, GammaAction<FiniteOps>{c.gamma->order, Monomial<FiniteOps>::diagonal(1, c.gamma->perm)});
}

CoveringSpec cover_spec(const RunConfig& c, std::vector<int>* I) {
  const json& k = c.construction_json;
  CoveringSpec s;
  s.base = parse_surface(k.at("base"), "construction.base");
  s.order = c.gamma->order;
  s.hom = k.at("hom").get<std::vector<int>>();
  if (I && k.contains("representatives")) *I = k.at("representatives").get<std::vector<int>>();
  return s;
}

VerificationReport flag_report(const std::string& name, bool ok, std::uint64_t seed, int samples,
                               const std::string& detail) {
  VerificationReport r;
  r.check = name;
  r.seed = seed;
  r.samples = samples;
  r.tolerance = 0.0;
  record(r, ok ? 0.0 : 1.0, ok ? -1 : 0);
  finish(r);
  r.detail = detail;
  return r;
}

VerificationReport from_check(const std::string& name, const CheckResult& cr, std::uint64_t seed) {
  VerificationReport r;
  r.check = name;
  r.seed = seed;
  r.samples = cr.samples;
  r.tolerance = cr.tolerance;
  r.max_residual = cr.max_residual;
  r.pass = cr.pass;
  return r;
}

std::string bools(std::initializer_list<std::pair<const char*, bool>> kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += std::string(s.empty() ? "" : " ") + k + "=" + (v ? "yes" : "no");
  return s;
}

// Builds the work list; every task is self-contained and seeded from the options.
using Task = std::function<std::vector<VerificationReport>()>;

template <class F>
Task one(F f) {
  return [f] { return std::vector<VerificationReport>{f()}; };
}

std::vector<Task> tasks_for(const RunConfig& c) {
  std::vector<Task> tasks;
  const auto& o = c.options;
  const json& k = c.construction_json;
  const std::string& t = c.construction;

  if (t == "cover") {
    std::vector<int> I;
    const CoveringSpec spec = cover_spec(c, &I);
    const std::uint64_t guard = c.guard.value_or(kEnumerationGuard);
    tasks.push_back(one([=] {
      const auto rep = enumerate_finite(spec, *c.group.table, c.gamma->perm, I, guard);
      std::ostringstream d;
      d << "fixed=" << rep.fixed << " twisted=" << rep.twisted << " "
        << bools({{"injective", rep.injective}, {"surjective", rep.surjective}, {"roundtrip", rep.roundtrip},
                  {"homomorphism", rep.homomorphism}});
      return flag_report("cover_bijection", rep.bijection(), o.seed, static_cast<int>(rep.hom_x), d.str());
    }));
    return tasks;
  }

  if (t == "loop") {
    const MatrixGroup G = *c.group.matrix;
    const int m = k.at("m").get<int>();
    const int N = k.at("N").get<int>();
    std::optional<Automorphism> kap;
    if (k.contains("twist")) kap = matrix_aut(k.at("twist"), G, "construction.twist");
    const LoopOptions lo = c.loop;
    const std::set<std::string> want(c.suites.begin(), c.suites.end());
    bool props = false;
    for (const auto& s : want) props = props || s != "loop_convergence";
    if (props) {
      tasks.push_back([=] {
        const LoopData d = random_loop_data(G, m, o.seed, kap);
        const LoopGrid grid{m, N};
        auto reps = verify_loop_props(G, sample_connection(grid, d.A, kap), sample_connection(grid, d.u, kap),
                                      sample_connection(grid, d.v, kap), sample_connection(grid, d.w, kap),
                                      sample_algebra(grid, d.xi, kap), sample_gauge(G, grid, d.g, kap), lo);
        std::vector<VerificationReport> keep;
        for (auto& r : reps) {
          r.seed = o.seed;
          if (want.count(r.check)) keep.push_back(std::move(r));
        }
        return keep;
      });
    }
    if (want.count("loop_convergence")) {
      std::vector<int> Ns = default_convergence_N(m);
      if (k.contains("convergence_N")) Ns = k.at("convergence_N").get<std::vector<int>>();
      tasks.push_back(one([=] {
        VerificationReport r;
        r.check = "loop_convergence";
        r.seed = o.seed;
        r.tolerance = lo.tol;
        std::ostringstream d;
        double min_order = std::numeric_limits<double>::infinity();
        for (const auto& s : convergence_studies(G, m, Ns, o.seed)) {
          record(r, s.residual.back(), 0);
          min_order = std::min(min_order, s.order());
          d << s.quantity << ": order " << s.order() << "; ";
        }
        finish(r);
        r.samples = static_cast<int>(Ns.size());
        if (min_order < 1.9) r.pass = false;
        d << "required order >= 1.9";
        r.detail = d.str();
        return r;
      }));
    }
    return tasks;
  }

  if (c.group.finite) {
    const FinBitorsor B1 = finite_bitorsor(c, 0), B2 = finite_bitorsor(c, 1);
    for (const auto& s : c.suites) {
      if (s == "fixed_product_iso") {
        tasks.push_back(one([=] {
          const auto r = check_canonical_fixed_product_iso(B1, B2);
          return flag_report(s, r.well_defined && r.equivariant && r.bijective, o.seed, r.domain_pairs,
                             bools({{"well_defined", r.well_defined}, {"equivariant", r.equivariant},
                                    {"bijective", r.bijective}}));
        }));
      } else {
        tasks.push_back(one([=] {
          const auto r = check_fusion_fixed_iso(FiniteDouble{B1, B2}, FiniteDouble{B1, B2});
          return flag_report(s, r.fixed_sets_match && r.mu_match && r.equivariant, o.seed, r.fixed_points,
                             bools({{"fixed_sets_match", r.fixed_sets_match}, {"mu_match", r.mu_match},
                                    {"equivariant", r.equivariant}}));
        }));
      }
    }
    return tasks;
  }

  const MatrixGroup G = *c.group.matrix;
  SpacePtr M, ambient;
  MatBitorsor B1, B2;
  if (t == "double" || t == "fused_double") {
    B1 = matrix_bitorsor(c, 0);
    B2 = matrix_bitorsor(c, 1);
    M = t == "double" ? make_double(G, B1, B2) : make_fused_double(G, B1, B2);
    if (k.contains("control")) {
      const std::string ctl = type_of(k.at("control"), "construction.control");
      if (ctl == "degenerate") {
        M = make_degenerate(M);
      } else {
        Rng rng(o.seed + 99);
        Point shift;
        for (int i = 0; i < M->structure_size(); ++i) shift.push_back(G.random_element(rng));
        M = plant_nonequivariant_mu(M, shift);
      }
    }
    if (k.value("fixed_locus", false)) {
      ambient = M;
      M = fixed_locus(M, Point(M->factors(), G.identity()));
    }
  } else if (t == "generalized_double") {
    M = make_generalized_double(G, k.at("m_inf").get<int>(), k.at("m0").get<int>());
  } else {
    M = rep_space(parse_surface(k, "construction"), G, k.value("reversed_fusion", false));
  }
  for (const auto& s : c.suites) {
    if (s == "fixed_degeneracy") {
      tasks.push_back(one([=] { return verify_fixed_degeneracy(*ambient, *M, o); }));
    } else if (s == "fixed_product_iso") {
      tasks.push_back(one([=] { return from_check(s, check_canonical_fixed_product_iso(G, B1, B2, o.samples, o.seed), o.seed); }));
    } else if (s == "fusion_fixed_iso") {
      const SpacePtr D = make_double(G, B1, B2);
      tasks.push_back(one([=] {
        const Point p0(2, G.identity());
        return check_fusion_fixed_iso(D, D, p0, p0, o);
      }));
    } else {
      tasks.push_back(one([=] { return run_suite(*M, s, o); }));
    }
  }
  return tasks;
}

}  // namespace

int thread_budget() {
  if (const char* env = std::getenv("QHAM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ReportBundle run(const RunConfig& c, int threads) {
  const auto tasks = tasks_for(c);
  std::vector<std::vector<VerificationReport>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ReportBundle b;
  b.config = c.echo;
  b.config["samples"] = c.options.samples;
  b.config["seed"] = c.options.seed;
  b.construction = c.construction;
  for (auto& rs : results)
    for (auto& r : rs) b.reports.push_back(std::move(r));
  std::sort(b.reports.begin(), b.reports.end(),
            [](const VerificationReport& x, const VerificationReport& y) { return x.check < y.check; });
  b.pass = !b.reports.empty();
  for (const auto& r : b.reports) b.pass = b.pass && r.pass;
  return b;
}

json to_json(const ReportBundle& b) {
  json suites = json::array();
  for (const auto& r : b.reports) {
    json e = {{"check", r.check},         {"samples", r.samples}, {"max_residual", r.max_residual},
              {"tolerance", r.tolerance}, {"pass", r.pass},       {"seed", r.seed},
              {"worst_sample", r.worst},  {"detail", r.detail}};
    if (!std::isfinite(r.max_residual)) e["max_residual"] = "inf";
    suites.push_back(e);
  }
  return {{"tool", "qham"},
          {"environment", {{"version", kVersion},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"cxx_standard", static_cast<long>(__cplusplus)}}},
          {"config", b.config},
          {"construction", b.construction},
          {"pass", b.pass},
          {"suites", suites}};
}

std::string to_markdown(const ReportBundle& b) {
  std::ostringstream os;
  os << "# qham report\n\n";
  os << "- construction: `" << b.construction << "`\n";
  os << "- seed: " << b.config.value("seed", 0) << ", samples: " << b.config.value("samples", 0) << "\n";
  os << "- overall: **" << (b.pass ? "PASS" : "FAIL") << "**\n\n";
  os << "| check | samples | max residual | tolerance | result | worst sample | detail |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : b.reports) {
    os << "| " << r.check << " | " << r.samples << " | " << r.max_residual << " | " << r.tolerance << " | "
       << (r.pass ? "pass" : "FAIL") << " | " << r.worst << " | " << r.detail << " |\n";
  }
  return os.str();
}

EnumerationOutput enumerate(const RunConfig& c) {
  if (c.construction != "cover") throw ConfigError("construction.type: enumerate needs a 'cover' construction");
  std::vector<int> I;
  const CoveringSpec spec = cover_spec(c, &I);
  const LiftedQuiver X = build_cover(spec);
  const auto rep = enumerate_finite(spec, *c.group.table, c.gamma->perm, I, c.guard.value_or(kEnumerationGuard));
  EnumerationOutput out;
  out.bijection = rep.bijection();
  json lifts = json::array();
  for (const auto& b : boundary_lifts(X))
    lifts.push_back({{"component", b.component},
                     {"hom", b.hom},
                     {"circles", b.circles},
                     {"stabilizer", b.stabilizer},
                     {"points_per_circle", b.points_per_circle},
                     {"stabilizer_cyclic", b.stabilizer_cyclic},
                     {"orbit_stabilizer", b.orbit_stabilizer}});
  out.json = {{"tool", "qham"},
              {"environment", {{"version", kVersion}}},
              {"config", c.echo},
              {"group_order", c.group.table->order()},
              {"gamma_order", spec.order},
              {"cover_vertices", X.vertices()},
              {"cover_edges", X.edges()},
              {"base_stored_edges", X.base.stored},
              {"cover_connected", cover_connected(X)},
              {"deck_action_free", deck_action_free(X)},
              {"hom_X", rep.hom_x},
              {"hom_X_gamma", rep.fixed},
              {"hom_mon", rep.twisted},
              {"injective", rep.injective},
              {"surjective", rep.surjective},
              {"roundtrip", rep.roundtrip},
              {"homomorphism", rep.homomorphism},
              {"bijection", out.bijection},
              {"boundary_lifts", lifts}};
  std::ostringstream csv;
  csv << "quantity,value\n";
  csv << "hom_X," << rep.hom_x << "\n";
  csv << "hom_X_gamma," << rep.fixed << "\n";
  csv << "hom_mon," << rep.twisted << "\n";
  csv << "bijection," << (out.bijection ? "true" : "false") << "\n";
  out.csv = csv.str();
  return out;
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

RunConfig load_with_overrides(const std::string& path, std::optional<std::int64_t> seed,
                              std::optional<std::int64_t> samples) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: must be a JSON object");
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed: must be non-negative");
    j["seed"] = *seed;
  }
  if (samples) {
    if (*samples < 1) throw ConfigError("--samples: must be positive");
    j["samples"] = *samples;
  }
  return parse_config(j, fs::path(path).parent_path().string());
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Numerical and exact verification of quasi-Hamiltonian constructions"};
  app.require_subcommand(1);
  std::string config, out_dir = "qham_out";
  std::optional<std::int64_t> seed, samples;
  auto* run_cmd = app.add_subcommand("run", "Build a space and run verification suites");
  run_cmd->add_option("config", config, "JSON configuration")->required();
  run_cmd->add_option("--out", out_dir, "Directory for report.json and report.md");
  run_cmd->add_option("--seed", seed, "Override the configured seed");
  run_cmd->add_option("--samples", samples, "Override the configured sample count");
  auto* enum_cmd = app.add_subcommand("enumerate", "Exhaustive count of fixed and twisted representations");
  enum_cmd->add_option("config", config, "JSON configuration")->required();
  enum_cmd->add_option("--out", out_dir, "Directory for enumeration.json and enumeration.csv");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run_cmd) {
      const RunConfig c = load_with_overrides(config, seed, samples);
      const ReportBundle b = run(c, thread_budget());
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", to_json(b).dump(2) + "\n");
      write_file(fs::path(out_dir) / "report.md", to_markdown(b));
      for (const auto& r : b.reports) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << " max_residual=" << r.max_residual
                  << " tol=" << r.tolerance << "\n";
        if (!r.pass)
          std::cerr << "failed check '" << r.check << "': max residual " << r.max_residual << " (tolerance "
                    << r.tolerance << ") at sample " << r.worst << (r.detail.empty() ? "" : "; " + r.detail) << "\n";
      }
      std::cout << (b.pass ? "overall: PASS" : "overall: FAIL") << "\n";
      return b.pass ? kPass : kFail;
    }
    const RunConfig c = load_with_overrides(config, std::nullopt, std::nullopt);
    const EnumerationOutput e = enumerate(c);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "enumeration.json", e.json.dump(2) + "\n");
    write_file(fs::path(out_dir) / "enumeration.csv", e.csv);
    std::cout << e.csv;
    return e.bijection ? kPass : kFail;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const GuardExceeded& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kGuard;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}

}  // namespace qham::cli
