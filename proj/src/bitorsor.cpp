#include "qham/bitorsor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <set>

namespace qham {

std::vector<Mat> bitorsor_theta(const MatBitorsor& B, const std::vector<Jet>& x) {
  std::vector<Mat> out(B.size());
  for (int i = 0; i < B.size(); ++i) out[B.twist().sigma[i]] = B.twist().auts[i].inverse().apply(x[i].d);
  return out;
}

std::vector<Mat> bitorsor_theta_bar(const MatBitorsor& B, const std::vector<Jet>& x) {
  std::vector<Mat> out;
  for (int i = 0; i < B.size(); ++i) out.push_back(x[i].x * x[i].d * x[i].x.adjoint());
  return out;
}

std::vector<Mat> average_tangent(const MatOps& ops, const GammaAction<MatOps>& gamma, const std::vector<Mat>& v) {
  std::vector<Mat> acc(v.size(), Mat::Zero(v[0].rows(), v[0].cols()));
  for (int phi = 0; phi < gamma.order; ++phi) {
    const auto w = gamma.element(ops, phi).apply_tangent(ops, v);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w[i];
  }
  for (auto& a : acc) a /= static_cast<double>(gamma.order);
  return acc;
}

std::vector<std::vector<Mat>> fixed_tangent_basis(const MatrixGroup& G, const MatOps& ops,
                                                  const GammaAction<MatOps>& gamma, int k) {
  const int d = G.dim();
  const int N = k * d;
  Eigen::MatrixXd P(N, N);
  for (int col = 0; col < N; ++col) {
    std::vector<Mat> e(k, G.zero());
    e[col / d] = G.basis()[col % d];
    const auto a = average_tangent(ops, gamma, e);
    for (int i = 0; i < k; ++i) P.block(i * d, col, d, 1) = G.coords(a[i]);
  }
  // P is the orthogonal projector onto the fixed part; symmetrize against roundoff.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()));
  std::vector<std::vector<Mat>> out;
  for (int c = N - 1; c >= 0; --c) {
    if (es.eigenvalues()[c] < 0.5) continue;
    Vec col = es.eigenvectors().col(c);
    // Deterministic sign: largest-magnitude coordinate positive.
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0) col = -col;
    std::vector<Mat> v;
    for (int i = 0; i < k; ++i) v.push_back(G.from_coords(col.segment(i * d, d)));
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<Mat> rand_point(const MatrixGroup& G, int k, Rng& rng) {
  std::vector<Mat> out;
  for (int i = 0; i < k; ++i) out.push_back(G.random_element(rng));
  return out;
}

double dist(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, mat_dist(a[i], b[i]));
  return m;
}

std::vector<Mat> inv_all(const std::vector<Mat>& g) {
  std::vector<Mat> out;
  for (const auto& x : g) out.push_back(x.adjoint());
  return out;
}

CheckResult finish(CheckResult r) {
  r.pass = r.max_residual <= r.tolerance;
  return r;
}

}  // namespace

CheckResult check_bitorsor_axioms(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed) {
  CheckResult r{"bitorsor_axioms", samples, 0.0, 1e-12, false};
  Rng rng(seed);
  const int k = B.size();
  for (int s = 0; s < samples; ++s) {
    const auto x = rand_point(G, k, rng);
    const auto y = rand_point(G, k, rng);
    const auto g = rand_point(G, k, rng);
    const auto h = rand_point(G, k, rng);
    r.max_residual = std::max(r.max_residual, dist(B.right_act(B.left_act(g, x), h), B.left_act(g, B.right_act(x, h))));
    r.max_residual = std::max(r.max_residual, dist(B.left_act(B.solve_left(x, y), x), y));
    r.max_residual = std::max(r.max_residual, dist(B.right_act(x, B.solve_right(x, y)), y));
    if (B.gamma()) {
      for (int phi = 1; phi <= B.gamma_order(); ++phi) {
        r.max_residual = std::max(r.max_residual, dist(B.gamma_act(phi, B.left_act(g, x)),
                                                       B.left_act(B.gamma_act_group(phi, g), B.gamma_act(phi, x))));
        r.max_residual = std::max(r.max_residual, dist(B.gamma_act(phi, B.right_act(x, h)),
                                                       B.right_act(B.gamma_act(phi, x), B.gamma_act_group(phi, h))));
      }
      r.max_residual = std::max(r.max_residual, dist(B.gamma_act(B.gamma_order(), x), x));
    }
  }
  return finish(r);
}

std::vector<std::vector<int>> enumerate_tuples(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k, 0);
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && ++cur[i] == n) cur[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

CheckResult check_bitorsor_axioms(const FinBitorsor& B) {
  CheckResult r{"bitorsor_axioms_exhaustive", 0, 0.0, 0.0, false};
  const auto all = enumerate_tuples(B.ops().G->order(), B.size());
  for (const auto& x : all) {
    for (const auto& g : all) {
      for (const auto& h : all) {
        ++r.samples;
        if (B.right_act(B.left_act(g, x), h) != B.left_act(g, B.right_act(x, h))) r.max_residual = 1.0;
      }
      const auto y = g;
      if (B.left_act(B.solve_left(x, y), x) != y) r.max_residual = 1.0;
      if (B.right_act(x, B.solve_right(x, y)) != y) r.max_residual = 1.0;
      if (B.gamma()) {
        for (int phi = 1; phi <= B.gamma_order(); ++phi) {
          if (B.gamma_act(phi, B.left_act(g, x)) != B.left_act(B.gamma_act_group(phi, g), B.gamma_act(phi, x)))
            r.max_residual = 1.0;
          if (B.gamma_act(phi, B.right_act(x, g)) != B.right_act(B.gamma_act(phi, x), B.gamma_act_group(phi, g)))
            r.max_residual = 1.0;
        }
      }
    }
    // Left simple transitivity: exactly one g per target.
    std::set<std::vector<int>> images;
    for (const auto& g : all) images.insert(B.left_act(g, x));
    if (images.size() != all.size()) r.max_residual = 1.0;
    images.clear();
    for (const auto& g : all) images.insert(B.right_act(x, g));
    if (images.size() != all.size()) r.max_residual = 1.0;
  }
  return finish(r);
}

CheckResult check_product_relation(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2, int samples,
                                   std::uint64_t seed) {
  CheckResult r{"product_relation", samples, 0.0, 1e-12, false};
  const MatBitorsor P = product(B1, B2);
  Rng rng(seed);
  const int k = B1.size();
  for (int s = 0; s < samples; ++s) {
    const auto x = rand_point(G, k, rng);
    const auto y = rand_point(G, k, rng);
    const auto g = rand_point(G, k, rng);
    const auto h = rand_point(G, k, rng);
    const auto rxy = product_carrier(B1, x, y);
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, B1.right_act(x, g), y),
                                                   product_carrier(B1, x, B2.left_act(g, y))));
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, B1.left_act(g, x), y), P.left_act(g, rxy)));
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, x, B2.right_act(y, h)), P.right_act(rxy, h)));
    if (B1.gamma() && B2.gamma()) {
      for (int phi = 1; phi < B1.gamma_order(); ++phi)
        r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, B1.gamma_act(phi, x), B2.gamma_act(phi, y)),
                                                       P.gamma_act(phi, rxy)));
    }
  }
  return finish(r);
}

CheckResult check_inverse_relation(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed) {
  CheckResult r{"inverse_relation", samples, 0.0, 1e-12, false};
  const MatBitorsor Bi = inverse(B);
  Rng rng(seed);
  const int k = B.size();
  for (int s = 0; s < samples; ++s) {
    const auto x = rand_point(G, k, rng);
    const auto g = rand_point(G, k, rng);
    const auto h = rand_point(G, k, rng);
    const auto lhs = inverse_carrier(B, B.right_act(B.left_act(g, x), h));
    const auto rhs = Bi.right_act(Bi.left_act(inv_all(h), inverse_carrier(B, x)), inv_all(g));
    r.max_residual = std::max(r.max_residual, dist(lhs, rhs));
    r.max_residual = std::max(r.max_residual, dist(inverse_carrier_preimage(B, inverse_carrier(B, x)), x));
    if (B.gamma()) {
      for (int phi = 1; phi < B.gamma_order(); ++phi)
        r.max_residual = std::max(r.max_residual, dist(Bi.gamma_act(phi, inverse_carrier(B, x)),
                                                       inverse_carrier(B, B.gamma_act(phi, x))));
    }
  }
  return finish(r);
}

namespace {

double twist_distance(const MatrixGroup& G, const Twist<MatOps>& a, const Twist<MatOps>& b, Rng& rng) {
  if (a.sigma != b.sigma) return 1.0;
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    for (int s = 0; s < 8; ++s) {
      const Mat g = G.random_element(rng);
      m = std::max(m, mat_dist(a.auts[i].apply(g), b.auts[i].apply(g)));
    }
  }
  return m;
}

}  // namespace

CheckResult check_product_associativity(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2,
                                        const MatBitorsor& B3, int samples, std::uint64_t seed) {
  CheckResult r{"product_associativity", samples, 0.0, 1e-12, false};
  const MatBitorsor B12 = product(B1, B2);
  const MatBitorsor B23 = product(B2, B3);
  Rng rng(seed);
  r.max_residual = twist_distance(G, product(B12, B3).twist(), product(B1, B23).twist(), rng);
  const int k = B1.size();
  for (int s = 0; s < samples; ++s) {
    const auto x = rand_point(G, k, rng);
    const auto y = rand_point(G, k, rng);
    const auto z = rand_point(G, k, rng);
    const auto left = product_carrier(B12, product_carrier(B1, x, y), z);
    const auto right = product_carrier(B1, x, product_carrier(B2, y, z));
    r.max_residual = std::max(r.max_residual, dist(left, right));
  }
  return finish(r);
}

CheckResult check_inverse_cancels(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed) {
  CheckResult r{"inverse_cancels", samples, 0.0, 1e-12, false};
  const MatBitorsor P = product(B, inverse(B));
  Rng rng(seed);
  r.max_residual = twist_distance(G, P.twist(), Twist<MatOps>::identity(B.size(), B.ops()), rng);
  for (int s = 0; s < samples; ++s) {
    const auto x = rand_point(G, B.size(), rng);
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B, x, inverse_carrier(B, x)), B.identity_point()));
  }
  return finish(r);
}

FiniteFixedSubtorsor fixed_subtorsor(const FinBitorsor& B) {
  FiniteFixedSubtorsor out;
  const auto all = enumerate_tuples(B.ops().G->order(), B.size());
  for (const auto& x : all) {
    bool fixed = true;
    for (int phi = 1; phi < B.gamma_order() && fixed; ++phi) fixed = B.gamma_act(phi, x) == x;
    if (fixed) out.points.push_back(x);
    bool gfixed = true;
    for (int phi = 1; phi < B.gamma_order() && gfixed; ++phi) gfixed = B.gamma_act_group(phi, x) == x;
    if (gfixed) out.group.push_back(x);
  }
  out.nonempty = !out.points.empty();
  if (!out.nonempty) return out;
  out.left_simply_transitive = true;
  out.right_simply_transitive = true;
  for (const auto& x : out.points) {
    std::map<std::vector<int>, int> lcount;
    std::map<std::vector<int>, int> rcount;
    for (const auto& g : out.group) {
      ++lcount[B.left_act(g, x)];
      ++rcount[B.right_act(x, g)];
    }
    for (const auto& y : out.points) {
      if (lcount[y] != 1) out.left_simply_transitive = false;
      if (rcount[y] != 1) out.right_simply_transitive = false;
    }
    // Orbits must stay inside the fixed set.
    if (lcount.size() != out.points.size()) out.left_simply_transitive = false;
    if (rcount.size() != out.points.size()) out.right_simply_transitive = false;
  }
  return out;
}

std::vector<Mat> MatFixedSubtorsor::sample(const MatrixGroup& G, Rng& rng, double sigma) const {
  std::normal_distribution<double> nd(0.0, sigma);
  std::vector<Mat> X(base_point.size(), G.zero());
  for (const auto& b : fixed_algebra_basis) {
    const double c = nd(rng);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] += c * b[i];
  }
  std::vector<Mat> out;
  for (std::size_t i = 0; i < X.size(); ++i) out.push_back(base_point[i] * G.exp(X[i]));
  return out;
}

MatFixedSubtorsor fixed_subtorsor(const MatrixGroup& G, const MatBitorsor& B) {
  MatFixedSubtorsor out;
  out.base_point = B.identity_point();
  if (!B.gamma()) {
    out.nonempty = true;
    GammaAction<MatOps> triv{1, Monomial<MatOps>::identity(B.size(), B.ops())};
    out.fixed_algebra_basis = fixed_tangent_basis(G, B.ops(), triv, B.size());
    return out;
  }
  if (fixed_residual(B, out.base_point) > kNumTol) return out;
  out.nonempty = true;
  out.fixed_algebra_basis = fixed_tangent_basis(G, B.ops(), *B.gamma(), B.size());
  return out;
}

double fixed_residual(const MatBitorsor& B, const std::vector<Mat>& x) {
  double m = 0.0;
  for (int phi = 1; phi < B.gamma_order(); ++phi) m = std::max(m, dist(B.gamma_act(phi, x), x));
  return m;
}

CheckResult check_fixed_transitivity(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed) {
  CheckResult r{"fixed_transitivity", samples, 0.0, 1e-10, false};
  const auto F = fixed_subtorsor(G, B);
  if (!F.nonempty) {
    r.max_residual = 1.0;
    return finish(r);
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const auto x = F.sample(G, rng);
    const auto y = F.sample(G, rng);
    r.max_residual = std::max(r.max_residual, fixed_residual(B, x));
    const auto g = B.solve_left(x, y);
    const auto h = B.solve_right(x, y);
    for (int phi = 1; phi < B.gamma_order(); ++phi) {
      r.max_residual = std::max(r.max_residual, dist(B.gamma_act_group(phi, g), g));
      r.max_residual = std::max(r.max_residual, dist(B.gamma_act_group(phi, h), h));
    }
  }
  return finish(r);
}

CheckResult check_canonical_fixed_product_iso(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2,
                                              int samples, std::uint64_t seed) {
  CheckResult r{"canonical_fixed_product_iso", samples, 0.0, 1e-10, false};
  const auto F1 = fixed_subtorsor(G, B1);
  const auto F2 = fixed_subtorsor(G, B2);
  if (!F1.nonempty || !F2.nonempty) {
    r.max_residual = 1.0;
    return finish(r);
  }
  const MatBitorsor P = product(B1, B2);
  // G^Gamma through the same fixed algebra as the base point of B1.
  MatFixedSubtorsor H = F1;
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const auto x1 = F1.sample(G, rng);
    const auto x2 = F2.sample(G, rng);
    const auto g = H.sample(G, rng);
    const auto h = H.sample(G, rng);
    const auto z = product_carrier(B1, x1, x2);
    r.max_residual = std::max(r.max_residual, fixed_residual(P, z));
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, B1.left_act(g, x1), x2), P.left_act(g, z)));
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, x1, B2.right_act(x2, h)), P.right_act(z, h)));
    r.max_residual = std::max(r.max_residual, dist(product_carrier(B1, B1.right_act(x1, h), x2),
                                                   product_carrier(B1, x1, B2.left_act(h, x2))));
  }
  return finish(r);
}

FiniteIsoReport check_canonical_fixed_product_iso(const FinBitorsor& B1, const FinBitorsor& B2) {
  FiniteIsoReport rep;
  const auto F1 = fixed_subtorsor(B1);
  const auto F2 = fixed_subtorsor(B2);
  const FinBitorsor P = product(B1, B2);
  const auto F12 = fixed_subtorsor(P);
  rep.fixed_group_order = static_cast<int>(F1.group.size());
  rep.target_fixed = static_cast<int>(F12.points.size());
  rep.domain_pairs = static_cast<int>(F1.points.size() * F2.points.size());
  if (!F1.nonempty || !F2.nonempty) return rep;

  rep.well_defined = true;
  rep.equivariant = true;
  std::map<std::vector<int>, std::vector<std::pair<std::vector<int>, std::vector<int>>>> fibers;
  const std::set<std::vector<int>> target(F12.points.begin(), F12.points.end());
  for (const auto& x1 : F1.points) {
    for (const auto& x2 : F2.points) {
      const auto z = product_carrier(B1, x1, x2);
      if (!target.count(z)) rep.well_defined = false;
      fibers[z].push_back({x1, x2});
      for (const auto& h : F1.group) {
        if (product_carrier(B1, B1.right_act(x1, h), x2) != product_carrier(B1, x1, B2.left_act(h, x2)))
          rep.well_defined = false;
        if (product_carrier(B1, B1.left_act(h, x1), x2) != P.left_act(h, z)) rep.equivariant = false;
        if (product_carrier(B1, x1, B2.right_act(x2, h)) != P.right_act(z, h)) rep.equivariant = false;
      }
    }
  }
  // Bijective on the quotient by G^Gamma: every fixed target hit, each fiber one orbit.
  bool bij = fibers.size() == target.size();
  for (const auto& [z, pairs] : fibers) {
    const auto& [a1, a2] = pairs.front();
    std::set<std::pair<std::vector<int>, std::vector<int>>> orbit;
    for (const auto& h : F1.group) {
      std::vector<int> hinv;
      for (int v : h) hinv.push_back(B1.ops().inv(v));
      orbit.insert({B1.right_act(a1, h), B2.left_act(hinv, a2)});
    }
    for (const auto& p : pairs)
      if (!orbit.count(p)) bij = false;
    if (orbit.size() != pairs.size()) bij = false;
  }
  rep.bijective = bij;
  return rep;
}

MatBitorsor example_cyclic_shift(const MatrixGroup& G, int m, const Automorphism& phi1) {
  MatOps ops{G.n()};
  GammaAction<MatOps> ga;
  ga.order = m;
  for (int k = 0; k < m; ++k) {
    ga.gen.pi.push_back((k - 1 + m) % m);
    ga.gen.a.push_back(phi1);
  }
  return MatBitorsor(ops, Twist<MatOps>::identity(m, ops), ga);
}

std::vector<Mat> example_cyclic_shift_fixed(const Automorphism& phi1, int m, const Mat& g0) {
  std::vector<Mat> out{g0};
  for (int k = 1; k < m; ++k) out.push_back(phi1.apply(out.back()));
  return out;
}

}  // namespace qham
