#include "qham/covering.hpp"

#include <numeric>
#include <set>

namespace qham {

GroupoidWord LiftedQuiver::expand(const GroupoidWord& w) const {
  GroupoidWord out;
  for (const auto& s : w) {
    if (s.edge == base.derived_edge) {
      out = concat(out, s.exponent > 0 ? base.derived_word : inverse_word(base.derived_word));
    } else {
      out.push_back(s);
    }
  }
  return out;
}

int LiftedQuiver::hom_of(const GroupoidWord& w) const {
  int h = 0;
  for (const auto& s : expand(w)) h += s.exponent * hom[s.edge];
  return mod(h);
}

LiftedQuiver build_cover(const CoveringSpec& spec) {
  if (spec.order < 1) throw std::invalid_argument("cover: Gamma order must be positive");
  LiftedQuiver X;
  X.base = build_quiver(spec.base);
  X.m = spec.order;
  if (static_cast<int>(spec.hom.size()) != X.base.stored)
    throw std::invalid_argument("cover: classifying map needs one value per stored edge (" +
                                std::to_string(X.base.stored) + ")");
  for (int h : spec.hom) X.hom.push_back(X.mod(h));
  X.hom.push_back(0);
  X.hom.back() = X.hom_of(X.base.derived_word);
  return X;
}

bool cover_connected(const LiftedQuiver& X) {
  int g = X.m;
  for (int h : X.hom) g = std::gcd(g, h);
  return g == 1;
}

bool deck_action_free(const LiftedQuiver& X) {
  for (int phi = 1; phi < X.m; ++phi) {
    for (std::size_t v = 0; v < X.base.vertices.size(); ++v)
      for (int s = 0; s < X.m; ++s)
        if (X.vertex(static_cast<int>(v), s + phi) == X.vertex(static_cast<int>(v), s)) return false;
    for (int e = 0; e < X.base.stored; ++e)
      for (int s = 0; s < X.m; ++s)
        if (X.edge(e, s + phi) == X.edge(e, s)) return false;
  }
  return true;
}

std::vector<int> monodromy_rep(const LiftedQuiver& X, const std::vector<int>& I) {
  if (I.size() != X.base.vertices.size()) throw std::invalid_argument("representatives: one sheet per base point");
  std::vector<int> mon;
  for (std::size_t e = 0; e < X.base.edges.size(); ++e) {
    const auto& ed = X.base.edges[e];
    mon.push_back(X.mod(I[ed.source] + X.hom[e] - I[ed.target]));
  }
  return mon;
}

int monodromy_of(const LiftedQuiver& X, const std::vector<int>& I, const GroupoidWord& w) {
  if (w.empty()) return 0;
  return X.mod(I[X.base.source(w)] + X.hom_of(w) - I[X.base.target(w)]);
}

std::vector<BoundaryLift> boundary_lifts(const LiftedQuiver& X) {
  std::vector<BoundaryLift> out;
  const int comps = X.base.vertices.back().component + 1;
  for (int j = 0; j < comps; ++j) {
    BoundaryLift b;
    b.component = j;
    b.hom = X.hom_of(X.base.boundary_loop(j));
    // Outgoing lifted boundary edge at each lifted base point of Vj.
    std::vector<int> next(X.vertices(), -1);
    for (std::size_t e = 0; e < X.base.edges.size(); ++e) {
      const auto& ed = X.base.edges[e];
      if (ed.kind != EdgeKind::Boundary || ed.component != j) continue;
      for (int s = 0; s < X.m; ++s) next[X.vertex(ed.source, s)] = X.vertex(ed.target, s + X.hom[e]);
    }
    std::vector<int> circle(X.vertices(), -1);
    for (int v = 0; v < X.vertices(); ++v) {
      if (next[v] < 0 || circle[v] >= 0) continue;
      int len = 0;
      for (int w = v; circle[w] < 0; w = next[w]) {
        circle[w] = b.circles;
        ++len;
      }
      b.points_per_circle = len;
      ++b.circles;
    }
    const int start = X.base.vertex(j, 0);
    std::vector<int> stab;
    for (int phi = 0; phi < X.m; ++phi)
      if (circle[X.vertex(start, phi)] == circle[X.vertex(start, 0)]) stab.push_back(phi);
    b.stabilizer = static_cast<int>(stab.size());
    const int step = X.m / b.stabilizer;
    b.stabilizer_cyclic = X.m % b.stabilizer == 0;
    for (int i = 0; i < b.stabilizer && b.stabilizer_cyclic; ++i) b.stabilizer_cyclic = stab[i] == i * step;
    b.orbit_stabilizer = b.circles * b.stabilizer == X.m;
    out.push_back(b);
  }
  return out;
}

EnumerationReport enumerate_finite(const CoveringSpec& spec, const FiniteGroup& G, const Perm& kappa,
                                   const std::vector<int>& I_in, std::uint64_t guard) {
  const LiftedQuiver X = build_cover(spec);
  if (!kappa.empty() && !G.is_automorphism(kappa)) throw std::invalid_argument("enumerate: kappa is not an automorphism");
  if (!kappa.empty() && X.m % FiniteGroup::order_of(kappa) != 0)
    throw std::invalid_argument("enumerate: automorphism order does not divide the Gamma order");
  const std::vector<int> I = I_in.empty() ? std::vector<int>(X.base.vertices.size(), 0) : I_in;
  const FiniteOps ops{&G};
  const std::uint64_t n = static_cast<std::uint64_t>(G.order());
  const int N = X.edges();
  std::uint64_t total = 1;
  for (int i = 0; i < N; ++i) {
    total *= n;
    if (total > guard)
      throw GuardExceeded("enumeration needs |G|^" + std::to_string(N) + " assignments, above the guard of " +
                          std::to_string(guard));
  }
  EnumerationReport rep;
  rep.hom_x = total;
  rep.roundtrip = true;
  rep.homomorphism = true;
  std::set<std::vector<int>> image;
  std::vector<int> rho(N, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t r = idx;
    for (int i = 0; i < N; ++i) {
      rho[i] = static_cast<int>(r % n);
      r /= n;
    }
    if (fixed_residual(ops, X, kappa, rho) > 0.0) continue;
    ++rep.fixed;
    const auto t = push_fixed_rep(ops, X, kappa, I, rho);
    image.insert(t.g);
    if (lift_twisted_rep(ops, X, kappa, I, t) != rho) rep.roundtrip = false;
    if (push_hom_residual(ops, X, kappa, I, rho) > 0.0) rep.homomorphism = false;
  }
  rep.injective = image.size() == rep.fixed;
  // Twisted side: every assignment of G to the stored edges of Q_Y.
  const int E = X.base.stored;
  std::uint64_t twisted = 1;
  for (int i = 0; i < E; ++i) twisted *= n;
  rep.twisted = twisted;
  rep.surjective = true;
  const auto mon = monodromy_rep(X, I);
  TwistedRepresentation<FiniteOps> t;
  t.gamma_part.assign(mon.begin(), mon.begin() + E);
  t.g.assign(E, 0);
  for (std::uint64_t idx = 0; idx < twisted; ++idx) {
    std::uint64_t r = idx;
    for (int i = 0; i < E; ++i) {
      t.g[i] = static_cast<int>(r % n);
      r /= n;
    }
    if (!image.count(t.g)) rep.surjective = false;
    const auto lifted = lift_twisted_rep(ops, X, kappa, I, t);
    if (fixed_residual(ops, X, kappa, lifted) > 0.0) rep.roundtrip = false;
    else if (push_fixed_rep(ops, X, kappa, I, lifted).g != t.g) rep.roundtrip = false;
  }
  return rep;
}

}  // namespace qham
