#include "qham/verify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qham {

void record(VerificationReport& r, double residual, int sample) {
  ++r.samples;
  if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
  if (r.worst < 0 || residual > r.max_residual) {
    r.max_residual = residual;
    r.worst = sample;
  }
}

VerificationReport& finish(VerificationReport& r) {
  r.pass = r.max_residual <= r.tolerance;
  return r;
}

namespace {

VerificationReport start(const std::string& name, double tol, std::uint64_t seed) {
  VerificationReport r;
  r.check = name;
  r.tolerance = tol;
  r.seed = seed;
  return r;
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

double point_dist(const Point& a, const Point& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, mat_dist(a[i], b[i]));
  return d;
}

Eigen::VectorXd flatten(const MatrixGroup& G, const Tangent& t) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(t.size()) * G.dim());
  for (std::size_t i = 0; i < t.size(); ++i) out.segment(static_cast<Eigen::Index>(i) * G.dim(), G.dim()) = G.coords(t[i]);
  return out;
}

Tangent unflatten(const MatrixGroup& G, const Eigen::VectorXd& v) {
  Tangent t;
  for (Eigen::Index i = 0; i < v.size() / G.dim(); ++i) t.push_back(G.from_coords(v.segment(i * G.dim(), G.dim())));
  return t;
}

Point multiply(const Point& g, const Point& h) {
  Point out;
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g[i] * h[i]);
  return out;
}

}  // namespace

double cartan_three_form(const MatrixGroup& G, const MatBitorsor& target, const Point& x, const Tangent& u,
                         const Tangent& v, const Tangent& w, double normalization) {
  const auto tu = bitorsor_theta(target, make_jets(x, u));
  const auto tv = bitorsor_theta(target, make_jets(x, v));
  const auto tw = bitorsor_theta(target, make_jets(x, w));
  // Full antisymmetrization of (a,[b,c]) gives 6 (a,[b,c]) by invariance.
  double s = 0.0;
  for (std::size_t i = 0; i < tu.size(); ++i) s += G.inner(tu[i], MatrixGroup::bracket(tv[i], tw[i]));
  return normalization * 6.0 * s;
}

Mat dexp_left(const Mat& s, const Mat& X) {
  Mat term = X;
  Mat out = X;
  double fact = 1.0;
  for (int k = 1; k < 20; ++k) {
    term = -(s * term - term * s);
    fact *= (k + 1);
    out += term / fact;
    if (term.norm() / fact < 1e-18) break;
  }
  return out;
}

namespace {

double omega_chart(const Space& M, const Point& p, const Tangent& s, const Tangent& X, const Tangent& Y) {
  Point q;
  Tangent LX, LY;
  for (std::size_t i = 0; i < p.size(); ++i) {
    q.push_back(p[i] * M.group().exp(s[i]));
    LX.push_back(dexp_left(s[i], X[i]));
    LY.push_back(dexp_left(s[i], Y[i]));
  }
  return M.omega(q, LX, LY);
}

double directional(const Space& M, const Point& p, const Tangent& a, const Tangent& b, const Tangent& c, double h) {
  Tangent sp, sm;
  for (const auto& x : a) {
    sp.push_back(h * x);
    sm.push_back(-h * x);
  }
  return (omega_chart(M, p, sp, b, c) - omega_chart(M, p, sm, b, c)) / (2.0 * h);
}

}  // namespace

double exterior_derivative(const Space& M, const Point& p, const Tangent& u, const Tangent& v, const Tangent& w,
                           double h) {
  return directional(M, p, u, v, w, h) - directional(M, p, v, u, w, h) + directional(M, p, w, u, v, h);
}

double qh1_residual(const Space& M, const Point& p, const Tangent& u, const Tangent& v, const Tangent& w, double h,
                    double normalization) {
  const double lhs = exterior_derivative(M, p, u, v, w, h);
  const Point x = M.mu_value(p);
  const Tangent du = tangents(M.mu(make_jets(p, u)));
  const Tangent dv = tangents(M.mu(make_jets(p, v)));
  const Tangent dw = tangents(M.mu(make_jets(p, w)));
  const double rhs = cartan_three_form(M.group(), M.target(), x, du, dv, dw, normalization);
  return rel(lhs, rhs);
}

double qh2_residual(const Space& M, const Point& p, const Tangent& xi, const Tangent& v) {
  const double lhs = M.omega(p, M.generating_vector(xi, p), v);
  const auto mj = M.mu(make_jets(p, v));
  const MatBitorsor T = M.target();
  const auto th = bitorsor_theta(T, mj);
  const auto tb = bitorsor_theta_bar(T, mj);
  double rhs = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) rhs += 0.5 * M.group().inner(th[j] + tb[j], xi[j]);
  return rel(lhs, rhs);
}

int qh3_null_dimension(const Space& M, const Point& p, double rel_tol, double* min_ratio) {
  const auto basis = M.tangent_basis(p);
  const int n = static_cast<int>(basis.size());
  if (n == 0) {
    if (min_ratio) *min_ratio = 1.0;
    return 0;
  }
  const int K = M.structure_size() * M.group().dim();
  Eigen::MatrixXd A(n, n + K);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = M.omega(p, basis[i], basis[j]);
    A.row(i).tail(K) = flatten(M.group(), tangents(M.mu(make_jets(p, basis[i])))).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * smax) ++rank;
  if (min_ratio) *min_ratio = (smax > 0 && s.size() >= n) ? s(n - 1) / smax : 0.0;
  return n - rank;
}

VerificationReport verify_qh1(const Space& M, const SuiteOptions& o) {
  auto r = start("qh1", o.qh1_tol, o.seed);
  Rng rng(o.seed);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent u = M.sample_tangent(p, rng), v = M.sample_tangent(p, rng), w = M.sample_tangent(p, rng);
    record(r, qh1_residual(M, p, u, v, w, o.fd_step, o.cartan_normalization), k);
  }
  return finish(r);
}

VerificationReport verify_qh2(const Space& M, const SuiteOptions& o) {
  auto r = start("qh2", o.qh2_tol, o.seed);
  Rng rng(o.seed + 1);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent xi = M.sample_structure_algebra(rng);
    const Tangent v = M.sample_tangent(p, rng);
    record(r, qh2_residual(M, p, xi, v), k);
  }
  return finish(r);
}

VerificationReport verify_qh3(const Space& M, const SuiteOptions& o) {
  auto r = start("qh3", 0.0, o.seed);
  Rng rng(o.seed + 2);
  double worst_ratio = 1.0;
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    double ratio = 0.0;
    record(r, qh3_null_dimension(M, p, o.rank_tol, &ratio), k);
    worst_ratio = std::min(worst_ratio, ratio);
  }
  r.detail = "null dimension; smallest sigma/sigma_max = " + std::to_string(worst_ratio);
  return finish(r);
}

VerificationReport verify_antisymmetry(const Space& M, const SuiteOptions& o) {
  auto r = start("antisymmetry", o.exact_tol, o.seed);
  Rng rng(o.seed + 3);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent u = M.sample_tangent(p, rng), v = M.sample_tangent(p, rng);
    const double a = M.omega(p, u, v), b = M.omega(p, v, u), c = M.omega(p, u, u);
    record(r, std::max(std::abs(a + b), std::abs(c)) / (1.0 + std::abs(a)), k);
  }
  return finish(r);
}

VerificationReport verify_omega_invariance(const Space& M, const SuiteOptions& o) {
  auto r = start("omega_invariance", o.invariance_tol, o.seed);
  Rng rng(o.seed + 4);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent u = M.sample_tangent(p, rng), v = M.sample_tangent(p, rng);
    const Point g = M.sample_structure(rng);
    const double before = M.omega(p, u, v);
    const double after = M.omega(M.act_value(g, p), M.act_tangent(g, p, u), M.act_tangent(g, p, v));
    record(r, rel(after, before), k);
  }
  return finish(r);
}

VerificationReport verify_mu_equivariance(const Space& M, const SuiteOptions& o) {
  auto r = start("mu_equivariance", o.exact_tol, o.seed);
  Rng rng(o.seed + 5);
  const MatBitorsor T = M.target();
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Point g = M.sample_structure(rng);
    record(r, point_dist(M.mu_value(M.act_value(g, p)), T.conj_act(g, M.mu_value(p))), k);
  }
  return finish(r);
}

VerificationReport verify_action(const Space& M, const SuiteOptions& o) {
  auto r = start("action", o.exact_tol, o.seed);
  Rng rng(o.seed + 6);
  const Point e(M.structure_size(), M.group().identity());
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Point g = M.sample_structure(rng), h = M.sample_structure(rng);
    const double comp = point_dist(M.act_value(multiply(g, h), p), M.act_value(g, M.act_value(h, p)));
    const double unit = point_dist(M.act_value(e, p), p);
    record(r, std::max(comp, unit), k);
  }
  return finish(r);
}

Tangent generating_vector_fd(const Space& M, const Tangent& xi, const Point& p, double h) {
  auto moved = [&](double t) {
    Point g;
    for (const auto& x : xi) g.push_back(M.group().exp(-t * x));
    return M.act_value(g, p);
  };
  const Point qp = moved(h), qm = moved(-h);
  Tangent out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Mat lp = M.group().log_near_identity(p[i].adjoint() * qp[i]);
    const Mat lm = M.group().log_near_identity(p[i].adjoint() * qm[i]);
    out.push_back((lp - lm) / (2.0 * h));
  }
  return out;
}

VerificationReport verify_generating_vector(const Space& M, const SuiteOptions& o) {
  auto r = start("generating_vector", 1e-8, o.seed);
  Rng rng(o.seed + 7);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent xi = M.sample_structure_algebra(rng);
    const Tangent a = M.generating_vector(xi, p), b = generating_vector_fd(M, xi, p);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).norm());
    record(r, d, k);
  }
  return finish(r);
}

namespace {

VerificationReport no_gamma(const std::string& name, double tol, std::uint64_t seed) {
  auto r = start(name, tol, seed);
  r.detail = "no Gamma action; vacuous";
  return finish(r);
}

}  // namespace

VerificationReport verify_gamma_action(const Space& M, const SuiteOptions& o) {
  if (!M.has_gamma()) return no_gamma("gamma_action", o.exact_tol, o.seed);
  auto r = start("gamma_action", o.exact_tol, o.seed);
  Rng rng(o.seed + 8);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Point g = M.sample_structure(rng);
    double d = 0.0;
    for (int phi = 1; phi < M.gamma_order(); ++phi)
      d = std::max(d, point_dist(M.gamma_point(phi, M.act_value(g, p)),
                                 M.act_value(M.gamma_structure(phi, g), M.gamma_point(phi, p))));
    record(r, d, k);
  }
  return finish(r);
}

VerificationReport verify_gamma_omega(const Space& M, const SuiteOptions& o) {
  if (!M.has_gamma()) return no_gamma("gamma_omega", o.invariance_tol, o.seed);
  auto r = start("gamma_omega", o.invariance_tol, o.seed);
  Rng rng(o.seed + 9);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    const Tangent u = M.sample_tangent(p, rng), v = M.sample_tangent(p, rng);
    const double base = M.omega(p, u, v);
    double d = 0.0;
    for (int phi = 1; phi < M.gamma_order(); ++phi) {
      const JetPoint ju = M.gamma_point(phi, make_jets(p, u));
      const JetPoint jv = M.gamma_point(phi, make_jets(p, v));
      d = std::max(d, rel(M.omega(values(ju), tangents(ju), tangents(jv)), base));
    }
    record(r, d, k);
  }
  return finish(r);
}

VerificationReport verify_gamma_mu(const Space& M, const SuiteOptions& o) {
  if (!M.has_gamma()) return no_gamma("gamma_mu", o.exact_tol, o.seed);
  auto r = start("gamma_mu", o.exact_tol, o.seed);
  Rng rng(o.seed + 10);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = M.sample_point(rng);
    double d = 0.0;
    for (int phi = 1; phi < M.gamma_order(); ++phi)
      d = std::max(d, point_dist(M.mu_value(M.gamma_point(phi, p)), M.gamma_target(phi, M.mu_value(p))));
    record(r, d, k);
  }
  return finish(r);
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"action",       "antisymmetry", "gamma_action",      "gamma_mu",
                                              "gamma_omega",  "generating_vector", "mu_equivariance",
                                              "omega_invariance", "qh1",      "qh2",               "qh3"};
  return names;
}

bool is_suite_name(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

VerificationReport run_suite(const Space& M, const std::string& name, const SuiteOptions& o) {
  if (name == "action") return verify_action(M, o);
  if (name == "antisymmetry") return verify_antisymmetry(M, o);
  if (name == "gamma_action") return verify_gamma_action(M, o);
  if (name == "gamma_mu") return verify_gamma_mu(M, o);
  if (name == "gamma_omega") return verify_gamma_omega(M, o);
  if (name == "generating_vector") return verify_generating_vector(M, o);
  if (name == "mu_equivariance") return verify_mu_equivariance(M, o);
  if (name == "omega_invariance") return verify_omega_invariance(M, o);
  if (name == "qh1") return verify_qh1(M, o);
  if (name == "qh2") return verify_qh2(M, o);
  if (name == "qh3") return verify_qh3(M, o);
  throw std::invalid_argument("unknown suite: " + name);
}

Eigen::MatrixXd averaging_projector(const std::vector<Eigen::MatrixXd>& action) {
  if (action.empty()) throw std::invalid_argument("averaging: empty group");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(action[0].rows(), action[0].cols());
  for (const auto& A : action) P += A;
  return P / static_cast<double>(action.size());
}

Eigen::VectorXd average(const std::vector<Eigen::MatrixXd>& action, const Eigen::VectorXd& v) {
  return averaging_projector(action) * v;
}

std::vector<Eigen::MatrixXd> tangent_action_matrices(const Space& M, const Point& p) {
  const MatrixGroup& G = M.group();
  const int d = M.factors() * G.dim();
  std::vector<Eigen::MatrixXd> out;
  for (int phi = 0; phi < M.gamma_order(); ++phi) {
    Eigen::MatrixXd A(d, d);
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e(j) = 1.0;
      A.col(j) = flatten(G, tangents(M.gamma_point(phi, make_jets(p, unflatten(G, e)))));
    }
    out.push_back(A);
  }
  return out;
}

VerificationReport verify_fixed_degeneracy(const Space& ambient, const Space& fixed, const SuiteOptions& o) {
  auto r = start("fixed_degeneracy", o.invariance_tol, o.seed);
  Rng rng(o.seed + 11);
  const MatrixGroup& G = ambient.group();
  int max_kernel = 0;
  for (int k = 0; k < o.samples; ++k) {
    const Point p = fixed.sample_point(rng);
    const auto P = averaging_projector(tangent_action_matrices(ambient, p));
    const Tangent X = fixed.sample_tangent(p, rng);
    const Tangent Y = ambient.sample_tangent(p, rng);
    const Tangent aveY = unflatten(G, P * flatten(G, Y));
    double d = rel(ambient.omega(p, X, Y), ambient.omega(p, X, aveY));
    // Kernel of the restricted data, paired against the ambient standard basis.
    const auto basis = fixed.tangent_basis(p);
    const int n = static_cast<int>(basis.size());
    const int K = fixed.structure_size() * G.dim();
    Eigen::MatrixXd A(n, n + K);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = fixed.omega(p, basis[i], basis[j]);
      A.row(i).tail(K) = flatten(G, tangents(fixed.mu(make_jets(p, basis[i])))).transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    for (int i = 0; i < n; ++i) {
      if (i < s.size() && s(i) > o.rank_tol * s(0)) continue;
      ++max_kernel;
      Tangent v(ambient.factors(), G.zero());
      for (int j = 0; j < n; ++j)
        for (int f = 0; f < ambient.factors(); ++f) v[f] += svd.matrixU()(j, i) * basis[j][f];
      for (const auto& Z : ambient.tangent_basis(p)) d = std::max(d, std::abs(ambient.omega(p, v, Z)));
    }
    record(r, d, k);
  }
  r.detail = "restricted kernel vectors found: " + std::to_string(max_kernel);
  return finish(r);
}

VerificationReport check_fusion_fixed_iso(SpacePtr M1, SpacePtr M2, const Point& p1, const Point& p2,
                                          const SuiteOptions& o) {
  auto r = start("fusion_fixed_iso", o.invariance_tol, o.seed);
  const SpacePtr A = fuse(fixed_locus(M1, p1), fixed_locus(M2, p2));
  Point p0 = p1;
  p0.insert(p0.end(), p2.begin(), p2.end());
  const SpacePtr B = fixed_locus(fuse(M1, M2), p0);
  if (A->tangent_basis(p0).size() != B->tangent_basis(p0).size()) {
    r.detail = "fixed tangent dimensions differ";
    record(r, std::numeric_limits<double>::infinity(), 0);
    return finish(r);
  }
  Rng rng(o.seed + 12);
  for (int k = 0; k < o.samples; ++k) {
    const Point p = A->sample_point(rng);
    const Tangent u = A->sample_tangent(p, rng), v = A->sample_tangent(p, rng);
    double d = rel(A->omega(p, u, v), B->omega(p, u, v));
    d = std::max(d, point_dist(A->mu_value(p), B->mu_value(p)));
    // The point and tangents of the left side lie in the fixed locus of the right side.
    for (int phi = 1; phi < B->gamma_order(); ++phi) {
      const JetPoint q = B->gamma_point(phi, make_jets(p, u));
      d = std::max(d, point_dist(values(q), p));
      d = std::max(d, point_dist(tangents(q), u));
    }
    record(r, d, k);
  }
  return finish(r);
}

// ---- finite doubles ----

namespace {

using Ints = std::vector<int>;

Ints cat(Ints a, const Ints& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Ints part(const Ints& v, int off, int len) { return Ints(v.begin() + off, v.begin() + off + len); }

FinBitorsor concat(const FinBitorsor& X, const FinBitorsor& Y) {
  const FiniteOps& ops = X.ops();
  Twist<FiniteOps> t = X.twist();
  for (int i = 0; i < Y.size(); ++i) {
    t.sigma.push_back(Y.twist().sigma[i] + X.size());
    t.auts.push_back(Y.twist().auts[i]);
  }
  std::optional<GammaAction<FiniteOps>> g;
  if (X.gamma() || Y.gamma()) {
    const auto gx = X.gamma() ? X.gamma()->gen : Monomial<FiniteOps>::identity(X.size(), ops);
    const auto gy = Y.gamma() ? Y.gamma()->gen : Monomial<FiniteOps>::identity(Y.size(), ops);
    g = GammaAction<FiniteOps>{X.gamma() ? X.gamma()->order : Y.gamma()->order, gx.block_sum(ops, gy)};
  }
  return FinBitorsor(ops, t, g);
}

Ints inverse_all(const FiniteOps& ops, const Ints& g) {
  Ints out;
  for (int x : g) out.push_back(ops.inv(x));
  return out;
}

}  // namespace

std::vector<int> FiniteDouble::mu(const std::vector<int>& p) const {
  const int k = size();
  const Ints a = part(p, 0, k), b = part(p, k, k);
  return cat(product_carrier(B1, a, b), product_carrier(inverse(B1), inverse_carrier(B1, a), inverse_carrier(B2, b)));
}

std::vector<int> FiniteDouble::act(const std::vector<int>& g, const std::vector<int>& p) const {
  const int k = size();
  const FiniteOps& ops = B1.ops();
  const Ints g1 = part(g, 0, k), g2 = part(g, k, k);
  const Ints a = part(p, 0, k), b = part(p, k, k);
  return cat(B1.right_act(B1.left_act(g1, a), inverse_all(ops, g2)),
             B2.right_act(B2.left_act(g2, b), inverse_all(ops, g1)));
}

std::vector<int> FiniteDouble::gamma(int phi, const std::vector<int>& p) const {
  const int k = size();
  return cat(B1.gamma_act(phi, part(p, 0, k)), B2.gamma_act(phi, part(p, k, k)));
}

FinBitorsor FiniteDouble::target() const {
  return concat(product(B1, B2), product(inverse(B1), inverse(B2)));
}

FiniteFusionIsoReport check_fusion_fixed_iso(const FiniteDouble& M1, const FiniteDouble& M2) {
  FiniteFusionIsoReport rep;
  const FiniteOps& ops = M1.B1.ops();
  const int n = ops.G->order();
  const int k = M1.size();
  if (M2.size() != k) throw std::invalid_argument("finite fusion: component sizes differ");
  const int order = M1.B1.gamma_order();
  auto fixed = [&](const FiniteDouble& D, const Ints& p) {
    for (int phi = 1; phi < order; ++phi)
      if (D.gamma(phi, p) != p) return false;
    return true;
  };
  const auto points = enumerate_tuples(n, 2 * k);
  std::vector<Ints> F1, F2;
  for (const auto& p : points) {
    if (fixed(M1, p)) F1.push_back(p);
    if (fixed(M2, p)) F2.push_back(p);
  }
  // Fixed points of the fused space under the diagonal action, by enumeration of pairs.
  const FinBitorsor Bc1 = product(M1.B1, M1.B2);
  const FinBitorsor Bc2 = product(M2.B1, M2.B2);
  const FinBitorsor fusedc = product(Bc1, Bc2);
  const FinBitorsor fused_target = concat(concat(fusedc, product(inverse(M1.B1), inverse(M1.B2))),
                                          product(inverse(M2.B1), inverse(M2.B2)));
  auto fused_mu = [&](const Ints& p1, const Ints& p2) {
    const Ints m1 = M1.mu(p1), m2 = M2.mu(p2);
    return cat(cat(product_carrier(Bc1, part(m1, 0, k), part(m2, 0, k)), part(m1, k, k)), part(m2, k, k));
  };
  auto fused_act = [&](const Ints& g, const Ints& p1, const Ints& p2) {
    const Ints g1 = part(g, 0, 2 * k);
    const Ints g2 = cat(part(g, 0, k), part(g, 2 * k, k));
    return std::make_pair(M1.act(g1, p1), M2.act(g2, p2));
  };
  int pair_fixed = 0;
  bool sets = true;
  for (const auto& p1 : points) {
    for (const auto& p2 : points) {
      const bool both = fixed(M1, p1) && fixed(M2, p2);
      bool diag = true;
      for (int phi = 1; phi < order && diag; ++phi) diag = M1.gamma(phi, p1) == p1 && M2.gamma(phi, p2) == p2;
      if (diag != both) sets = false;
      if (diag) ++pair_fixed;
    }
  }
  rep.fixed_sets_match = sets && pair_fixed == static_cast<int>(F1.size() * F2.size());
  rep.fixed_points = pair_fixed;
  // Fixed structure group of the fused space.
  std::vector<Ints> H;
  for (const auto& g : enumerate_tuples(n, 3 * k)) {
    bool ok = true;
    for (int phi = 1; phi < order && ok; ++phi) ok = fused_target.gamma_act_group(phi, g) == g;
    if (ok) H.push_back(g);
  }
  rep.checked_group_elements = static_cast<int>(H.size());
  bool mu_ok = true, eq_ok = true;
  for (const auto& p1 : F1) {
    for (const auto& p2 : F2) {
      const Ints m = fused_mu(p1, p2);
      for (int phi = 1; phi < order; ++phi)
        if (fused_target.gamma_act(phi, m) != m) mu_ok = false;
      // On the left side the moment map is assembled from the fixed pieces.
      const Ints m1 = M1.mu(p1), m2 = M2.mu(p2);
      if (cat(product_carrier(Bc1, part(m1, 0, k), part(m2, 0, k)), cat(part(m1, k, k), part(m2, k, k))) != m)
        mu_ok = false;
      for (const auto& h : H) {
        const auto moved = fused_act(h, p1, p2);
        if (!fixed(M1, moved.first) || !fixed(M2, moved.second)) eq_ok = false;
        if (fused_mu(moved.first, moved.second) != fused_target.conj_act(h, m)) eq_ok = false;
      }
    }
  }
  rep.mu_match = mu_ok;
  rep.equivariant = eq_ok;
  return rep;
}

}  // namespace qham
