// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "qham/covering.hpp"
#include "qham/loopdisc.hpp"
#include "qham/surface.hpp"
#include "qham/verify.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qham;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

SuiteOptions opts(int samples, std::uint64_t seed) {
  SuiteOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

void require_report(Outcome& out, const std::string& label, const VerificationReport& r) {
  out.require(r.pass, label + " " + r.check + " residual " + fmt(r.max_residual) + " > " + fmt(r.tolerance));
}

void require_suite(Outcome& out, const Space& M, const std::vector<std::string>& names, const SuiteOptions& o) {
  for (const auto& n : names) require_report(out, M.name(), run_suite(M, n, o));
}

MatBitorsor trivial1() { return MatBitorsor::trivial(MatOps{2}, 1); }

Automorphism diag_involution() {
  Mat w = Mat::Zero(2, 2);
  w(0, 0) = cd(0, 1);
  w(1, 1) = cd(0, -1);
  return Automorphism::inner(w, 2);
}

MatBitorsor with_diag_gamma(const Automorphism& k) {
  MatOps ops{2};
  return MatBitorsor(ops, Twist<MatOps>::identity(1, ops), GammaAction<MatOps>{2, Monomial<MatOps>::diagonal(1, k)});
}

// ---- criteria ----

Outcome axioms_of_the_double() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  Rng rng(101);
  const MatBitorsor twisted(MatOps{2}, Twist<MatOps>::single(Automorphism::inner(G.random_element(rng))));
  const auto o = opts(100, 1);
  for (const auto& D : {make_double(G, trivial1(), trivial1()), make_double(G, twisted, trivial1())}) {
    require_suite(out, *D, {"qh1", "qh2"}, o);
    const auto r = verify_qh3(*D, o);
    out.require(r.pass && r.max_residual == 0.0, D->name() + " qh3 null dimension " + fmt(r.max_residual));
  }
  return out;
}

Outcome generalized_double() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  const auto D = make_double(G, trivial1(), trivial1());
  const auto M = make_generalized_double(G, 1, 1);
  Rng rng(102);
  double dw = 0.0, dmu = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Point p = D->sample_point(rng);
    const Tangent u = D->sample_tangent(p, rng), v = D->sample_tangent(p, rng);
    // (a, b) -> (C, h) = (a, b^-1 a^-1)
    const Point q{p[0], p[1].adjoint() * p[0].adjoint()};
    auto push = [&](const Tangent& t) { return Tangent{t[0], -G.Ad(p[0] * p[1], t[1]) - G.Ad(p[0], t[0])}; };
    dw = std::max(dw, std::abs(M->omega(q, push(u), push(v)) - D->omega(p, u, v)));
    const Point mq = M->mu_value(q), mp = D->mu_value(p);
    for (int i = 0; i < 2; ++i) dmu = std::max(dmu, mat_dist(mq[i], mp[i]));
  }
  out.require(dw <= 1e-10, "(1,1) omega differs by " + fmt(dw));
  out.require(dmu <= 1e-12, "(1,1) moment maps differ by " + fmt(dmu));
  require_suite(out, *make_generalized_double(G, 2, 3), suite_names(), opts(50, 2));
  if (out.pass) out.detail = "max |d omega| " + fmt(dw);
  return out;
}

Outcome fixed_locus_of_the_double() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  const auto B = with_diag_gamma(diag_involution());
  const auto D = make_double(G, B, B);
  const auto F = fixed_locus(D, Point(D->factors(), G.identity()));
  const auto o = opts(50, 3);
  require_suite(out, *F, {"qh1", "qh2", "qh3"}, o);
  require_report(out, "fixed", verify_fixed_degeneracy(*D, *F, o));
  return out;
}

Outcome canonical_maps() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  const auto B = with_diag_gamma(diag_involution());
  const auto Bs = example_cyclic_shift(G, 2, Automorphism::conjugation());
  double worst = 0.0;
  for (const auto& [B1, B2] : {std::pair{B, B}, std::pair{Bs, Bs}}) {
    const auto r = check_canonical_fixed_product_iso(G, B1, B2, 100, 4);
    out.require(r.pass && r.max_residual <= 1e-10, "fixed product iso residual " + fmt(r.max_residual));
    worst = std::max(worst, r.max_residual);
  }
  const auto D = make_double(G, B, B);
  const Point p0(D->factors(), G.identity());
  const auto fr = check_fusion_fixed_iso(D, D, p0, p0, opts(100, 5));
  out.require(fr.pass && fr.max_residual <= 1e-10, "fusion/fixed iso residual " + fmt(fr.max_residual));
  worst = std::max(worst, fr.max_residual);

  const auto S3 = FiniteGroup::symmetric3();
  FiniteOps ops{&S3};
  const Perm k = S3.inner_aut(1);
  const FinBitorsor FB(ops, Twist<FiniteOps>::identity(1, ops),
                       GammaAction<FiniteOps>{2, Monomial<FiniteOps>::diagonal(1, k)});
  const FinBitorsor FT(ops, Twist<FiniteOps>::single(k), GammaAction<FiniteOps>{2, Monomial<FiniteOps>::diagonal(1, k)});
  for (const auto& [B1, B2] : {std::pair{FB, FB}, std::pair{FB, FT}, std::pair{FT, FT}}) {
    const auto iso = check_canonical_fixed_product_iso(B1, B2);
    out.require(iso.well_defined && iso.equivariant && iso.bijective, "S3 fixed product iso not bijective");
  }
  const auto ff = check_fusion_fixed_iso(FiniteDouble{FB, FB}, FiniteDouble{FT, FT});
  out.require(ff.fixed_sets_match && ff.mu_match && ff.equivariant, "S3 fusion/fixed iso fails");
  if (out.pass) out.detail = "max residual " + fmt(worst);
  return out;
}

Outcome cover_bijection() {
  Outcome out;
  const auto Z3 = FiniteGroup::cyclic(3);
  const auto S3 = FiniteGroup::symmetric3();
  struct Instance {
    std::string label;
    CoveringSpec spec;
    const FiniteGroup* G;
    Perm kappa;
  };
  const CoveringSpec ann2{SurfaceData::annulus(1, 1), 2, {0, 1}}, ann3{SurfaceData::annulus(1, 1), 3, {0, 1}};
  const CoveringSpec tor2{{1, {1}}, 2, {1, 0}}, tor3{{1, {1}}, 3, {1, 0}};
  // Aut(Z/3) has no element of order 3, so Z/3 acts trivially on Z/3.
  const std::vector<Instance> panel{
      {"annulus Z/2 on Z/3", ann2, &Z3, Z3.inversion_map()}, {"annulus Z/3 on Z/3", ann3, &Z3, Z3.identity_aut()},
      {"annulus Z/2 on S3", ann2, &S3, S3.inner_aut(1)},     {"annulus Z/3 on S3", ann3, &S3, S3.inner_aut(4)},
      {"torus Z/2 on Z/3", tor2, &Z3, Z3.inversion_map()},   {"torus Z/3 on Z/3", tor3, &Z3, Z3.identity_aut()},
      {"torus Z/2 on S3", tor2, &S3, S3.inner_aut(1)},       {"torus Z/3 on S3", tor3, &S3, S3.inner_aut(4)}};
  double slowest = 0.0;
  for (const auto& in : panel) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = enumerate_finite(in.spec, *in.G, in.kappa);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    slowest = std::max(slowest, sec);
    out.require(r.fixed == r.twisted && r.injective && r.surjective && r.bijection(),
                in.label + ": " + std::to_string(r.fixed) + " fixed vs " + std::to_string(r.twisted) + " twisted");
    out.require(sec <= 60.0, in.label + " took " + fmt(sec) + " s");
  }
  if (out.pass) out.detail = std::to_string(panel.size()) + " instances, slowest " + fmt(slowest) + " s";
  return out;
}

Outcome surface_spaces() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  double dw = 0.0;
  for (auto [minf, m0] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{3, 2}, std::pair{2, 2}}) {
    const auto R = rep_space(SurfaceData::annulus(minf, m0), G);
    const auto M = make_generalized_double(G, minf, m0);
    Rng rng(106);
    for (int s = 0; s < 100; ++s) {
      const Point p = M->sample_point(rng);
      const Tangent u = M->sample_tangent(p, rng), v = M->sample_tangent(p, rng);
      dw = std::max(dw, std::abs(R->omega(p, u, v) - M->omega(p, u, v)));
    }
  }
  out.require(dw <= 1e-10, "annulus vs generalized double omega differs by " + fmt(dw));
  const std::vector<SurfaceData> panel{{0, {2, 2}}, {0, {3, 2}}, {0, {3, 3, 3}}, {1, {1}}, {1, {2}}};
  for (const auto& S : panel) require_suite(out, *rep_space(S, G), suite_names(), opts(20, 6));
  if (out.pass) out.detail = "max |d omega| " + fmt(dw) + ", " + std::to_string(panel.size()) + " surfaces";
  return out;
}

Outcome loop_formulas() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  double worst_order = 1e9;
  for (const auto& s : convergence_studies(G, 2, {256, 512, 1024}, 107)) {
    out.require(s.residual.back() <= 1e-4, s.quantity + " residual " + fmt(s.residual.back()) + " at N=1024");
    out.require(s.order() >= 1.9, s.quantity + " order " + fmt(s.order()));
    worst_order = std::min(worst_order, s.order());
  }
  const Automorphism kappa = diag_involution();
  for (auto [m, twist] : {std::pair{3, std::optional<Automorphism>{}}, std::pair{2, std::optional<Automorphism>{kappa}}}) {
    const LoopGrid grid{m, 1536};
    const auto d = random_loop_data(G, m, 108, twist);
    const auto reports = verify_loop_props(G, sample_connection(grid, d.A, twist), sample_connection(grid, d.u, twist),
                                           sample_connection(grid, d.v, twist), sample_connection(grid, d.w, twist),
                                           sample_algebra(grid, d.xi, twist), sample_gauge(G, grid, d.g, twist));
    for (const auto& r : reports) require_report(out, twist ? "twisted" : "untwisted", r);
  }
  if (out.pass) out.detail = "min order " + fmt(worst_order);
  return out;
}

Outcome negative_controls() {
  Outcome out;
  const auto G = MatrixGroup::su(2);
  const auto D = make_double(G, trivial1(), trivial1());
  const auto o = opts(20, 9);
  const auto r3 = verify_qh3(*make_degenerate(D), o);
  out.require(!r3.pass && r3.max_residual > 0, "degenerate form passed qh3");
  Rng rng(109);
  const auto Mn = plant_nonequivariant_mu(D, {G.random_element(rng), G.random_element(rng)});
  const auto rmu = verify_mu_equivariance(*Mn, o);
  out.require(!rmu.pass && rmu.max_residual > 1e3 * rmu.tolerance, "non-equivariant moment map passed");
  auto o6 = o;
  o6.cartan_normalization = 1.0 / 6.0;
  const auto r1 = verify_qh1(*D, o6);
  out.require(!r1.pass && r1.max_residual > 1e3 * r1.tolerance, "wrong Cartan normalization passed qh1");
  if (out.pass)
    out.detail = "null dim " + fmt(r3.max_residual) + ", mu " + fmt(rmu.max_residual) + ", qh1 " + fmt(r1.max_residual);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "qham_acceptance_determinism";
  fs::remove_all(root);
  for (const std::string cfg : {"double_twisted", "loop_twisted"}) {
    std::string first;
    for (const std::string threads : {"1", "4"}) {
      const fs::path dir = root / (cfg + "_" + threads);
      const std::string cmd = "QHAM_THREADS=" + threads + " '" + std::string(QHAM_BINARY) + "' run '" +
                              (fs::path(QHAM_SOURCE_DIR) / "configs" / (cfg + ".json")).string() + "' --out '" +
                              dir.string() + "' > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      out.require(WIFEXITED(st) && WEXITSTATUS(st) == 0, cfg + " run failed");
      const std::string text = slurp(dir / "report.json");
      out.require(!text.empty(), cfg + " wrote no report");
      if (first.empty())
        first = text;
      else
        out.require(text == first, cfg + " reports differ between runs");
    }
  }
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
    double budget;  // seconds, 0 = none
  };
  const std::vector<Criterion> criteria{
      {1, "axiom suite of the double", axioms_of_the_double, 30},
      {2, "generalized double", generalized_double, 0},
      {3, "fixed locus of the double", fixed_locus_of_the_double, 0},
      {4, "canonical maps", canonical_maps, 0},
      {5, "covering bijection", cover_bijection, 0},
      {6, "surface representation spaces", surface_spaces, 0},
      {7, "loop formulas", loop_formulas, 120},
      {8, "negative controls", negative_controls, 0},
      {9, "determinism", determinism, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0) o.require(sec <= c.budget, "over the " + fmt(c.budget) + " s budget");
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ") " << fmt(sec) << " s"
              << (o.detail.empty() ? "" : ": " + o.detail) << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
