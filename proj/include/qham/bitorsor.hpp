#pragma once

#include "qham/finite_group.hpp"
#include "qham/liegroup.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qham {

// Constants of the element type of a monomial map, lifted to whatever element
// type the map is applied to.
inline const Mat& lift_const(const Mat& c, const Mat&) { return c; }
inline Jet lift_const(const Mat& c, const Jet&) { return jet_const(c); }
inline int lift_const(int c, int) { return c; }

// Index bijection plus per-index automorphism.
template <class Ops>
struct Twist {
  std::vector<int> sigma;
  std::vector<typename Ops::Aut> auts;

  int size() const { return static_cast<int>(sigma.size()); }

  static Twist identity(int k, const Ops& ops) {
    Twist t;
    for (int i = 0; i < k; ++i) {
      t.sigma.push_back(i);
      t.auts.push_back(ops.id_aut());
    }
    return t;
  }
  // sigma(i) = i + 1 mod k, all automorphisms trivial.
  static Twist shift(int k, const Ops& ops) {
    Twist t = identity(k, ops);
    for (int i = 0; i < k; ++i) t.sigma[i] = (i + 1) % k;
    return t;
  }
  // Single index, right action x.g = x kappa(g).
  static Twist single(const typename Ops::Aut& a) {
    Twist t;
    t.sigma = {0};
    t.auts = {a};
    return t;
  }

  bool valid() const {
    if (auts.size() != sigma.size()) return false;
    std::vector<int> seen(sigma.size(), 0);
    for (int s : sigma) {
      if (s < 0 || s >= size() || seen[s]) return false;
      seen[s] = 1;
    }
    return true;
  }

  std::vector<int> sigma_inverse() const {
    std::vector<int> out(sigma.size());
    for (int i = 0; i < size(); ++i) out[sigma[i]] = i;
    return out;
  }
};

// (M x)_i = a_i(x_{pi(i)}) c_i, c optional.  Linear (c empty) maps are group
// automorphisms of G^I.
template <class Ops>
struct Monomial {
  using Aut = typename Ops::Aut;
  using Elem = typename Ops::Elem;

  std::vector<int> pi;
  std::vector<Aut> a;
  std::vector<Elem> c;

  int size() const { return static_cast<int>(pi.size()); }
  bool linear() const { return c.empty(); }

  static Monomial identity(int k, const Ops& ops) {
    Monomial m;
    for (int i = 0; i < k; ++i) {
      m.pi.push_back(i);
      m.a.push_back(ops.id_aut());
    }
    return m;
  }
  static Monomial diagonal(int k, const Aut& aut) {
    Monomial m;
    for (int i = 0; i < k; ++i) {
      m.pi.push_back(i);
      m.a.push_back(aut);
    }
    return m;
  }

  template <class E>
  std::vector<E> apply(const Ops& ops, const std::vector<E>& x) const {
    if (static_cast<int>(x.size()) != size()) throw std::invalid_argument("monomial map: size mismatch");
    std::vector<E> out;
    out.reserve(x.size());
    for (int i = 0; i < size(); ++i) {
      E y = ops.apply(a[i], x[pi[i]]);
      if (!c.empty()) y = ops.mul(y, lift_const(c[i], y));
      out.push_back(y);
    }
    return out;
  }

  // Action on left-trivialized tangents (linear part only).
  std::vector<Mat> apply_tangent(const Ops& ops, const std::vector<Mat>& v) const {
    std::vector<Mat> out;
    for (int i = 0; i < size(); ++i) out.push_back(ops.apply(a[i], v[pi[i]]));
    return out;
  }

  Monomial linear_part() const {
    Monomial m = *this;
    m.c.clear();
    return m;
  }

  // (*this) o inner
  Monomial after(const Ops& ops, const Monomial& inner) const {
    Monomial m;
    for (int i = 0; i < size(); ++i) {
      m.pi.push_back(inner.pi[pi[i]]);
      m.a.push_back(ops.compose(a[i], inner.a[pi[i]]));
    }
    if (!c.empty() || !inner.c.empty()) {
      for (int i = 0; i < size(); ++i) {
        Elem ci = inner.c.empty() ? ops.identity() : ops.apply(a[i], inner.c[pi[i]]);
        if (!c.empty()) ci = ops.mul(ci, c[i]);
        m.c.push_back(ci);
      }
    }
    return m;
  }

  Monomial power(const Ops& ops, int k) const {
    Monomial out = identity(size(), ops);
    for (int i = 0; i < k; ++i) out = after(ops, out);
    return out;
  }

  // Block sum: this on the first indices, other on the rest.
  Monomial block_sum(const Ops& ops, const Monomial& other) const {
    Monomial m = *this;
    const int off = size();
    for (int i = 0; i < other.size(); ++i) {
      m.pi.push_back(other.pi[i] + off);
      m.a.push_back(other.a[i]);
    }
    if (!c.empty() || !other.c.empty()) {
      if (m.c.empty())
        for (int i = 0; i < off; ++i) m.c.push_back(ops.identity());
      for (int i = 0; i < other.size(); ++i) m.c.push_back(other.c.empty() ? ops.identity() : other.c[i]);
    }
    return m;
  }
};

// Cyclic group Z/order acting through the generator 1.
template <class Ops>
struct GammaAction {
  int order = 1;
  Monomial<Ops> gen;

  Monomial<Ops> element(const Ops& ops, int phi) const {
    phi = ((phi % order) + order) % order;
    return gen.power(ops, phi);
  }
};

// Bitorsor over G^I in the canonical model: left g.x = (g_i x_i), right
// (x.g)_i = x_i aut_i(g_{sigma(i)}).
template <class Ops>
class Bitorsor {
 public:
  using Elem = typename Ops::Elem;
  using Aut = typename Ops::Aut;

  Bitorsor() = default;
  Bitorsor(Ops ops, Twist<Ops> twist, std::optional<GammaAction<Ops>> gamma = std::nullopt)
      : ops_(std::move(ops)), twist_(std::move(twist)), gamma_(std::move(gamma)) {
    if (!twist_.valid()) throw std::invalid_argument("bitorsor: invalid twist");
    if (gamma_ && gamma_->gen.size() != twist_.size())
      throw std::invalid_argument("bitorsor: Gamma action has wrong size");
  }

  static Bitorsor trivial(Ops ops, int k) {
    Twist<Ops> t = Twist<Ops>::identity(k, ops);
    return Bitorsor(ops, t);
  }

  const Ops& ops() const { return ops_; }
  const Twist<Ops>& twist() const { return twist_; }
  const std::optional<GammaAction<Ops>>& gamma() const { return gamma_; }
  Bitorsor with_gamma(std::optional<GammaAction<Ops>> g) const { return Bitorsor(ops_, twist_, std::move(g)); }
  int size() const { return twist_.size(); }

  std::vector<Elem> identity_point() const { return std::vector<Elem>(size(), ops_.identity()); }

  template <class E>
  std::vector<E> left_act(const std::vector<E>& g, const std::vector<E>& x) const {
    check(g);
    check(x);
    std::vector<E> out;
    for (int i = 0; i < size(); ++i) out.push_back(ops_.mul(g[i], x[i]));
    return out;
  }

  template <class E>
  std::vector<E> right_act(const std::vector<E>& x, const std::vector<E>& g) const {
    check(g);
    check(x);
    std::vector<E> out;
    for (int i = 0; i < size(); ++i)
      out.push_back(ops_.mul(x[i], ops_.apply(twist_.auts[i], g[twist_.sigma[i]])));
    return out;
  }

  // g.x.g^{-1}, the action of G^I on targets of moment maps.
  template <class E>
  std::vector<E> conj_act(const std::vector<E>& g, const std::vector<E>& x) const {
    std::vector<E> ginv;
    for (const E& gi : g) ginv.push_back(ops_.inv(gi));
    return right_act(left_act(g, x), ginv);
  }

  // Unique g with g.x = y.
  std::vector<Elem> solve_left(const std::vector<Elem>& x, const std::vector<Elem>& y) const {
    check(x);
    check(y);
    std::vector<Elem> g;
    for (int i = 0; i < size(); ++i) g.push_back(ops_.mul(y[i], ops_.inv(x[i])));
    return g;
  }

  // Unique h with x.h = y.
  std::vector<Elem> solve_right(const std::vector<Elem>& x, const std::vector<Elem>& y) const {
    check(x);
    check(y);
    std::vector<Elem> h(size());
    for (int i = 0; i < size(); ++i)
      h[twist_.sigma[i]] = ops_.apply(ops_.aut_inv(twist_.auts[i]), ops_.mul(ops_.inv(x[i]), y[i]));
    return h;
  }

  template <class E>
  std::vector<E> gamma_act(int phi, const std::vector<E>& x) const {
    if (!gamma_) return x;
    return gamma_->element(ops_, phi).apply(ops_, x);
  }
  // Gamma on the structure group G^I: the linear part of the point action.
  template <class E>
  std::vector<E> gamma_act_group(int phi, const std::vector<E>& g) const {
    if (!gamma_) return g;
    return gamma_->element(ops_, phi).linear_part().apply(ops_, g);
  }
  int gamma_order() const { return gamma_ ? gamma_->order : 1; }

 private:
  template <class E>
  void check(const std::vector<E>& v) const {
    if (static_cast<int>(v.size()) != size()) throw std::invalid_argument("bitorsor: index set mismatch");
  }

  Ops ops_;
  Twist<Ops> twist_;
  std::optional<GammaAction<Ops>> gamma_;
};

using MatBitorsor = Bitorsor<MatOps>;
using FinBitorsor = Bitorsor<FiniteOps>;

// Product B1.B2: sigma = sigma2 o sigma1, aut_i = aut1_i o aut2_{sigma1(i)},
// carrier r(x, y)_i = x_i aut1_i(y_{sigma1(i)}).  The Gamma action of B1 is used
// on the carrier; compatibility is a checked property, not assumed.
template <class Ops>
Bitorsor<Ops> product(const Bitorsor<Ops>& B1, const Bitorsor<Ops>& B2) {
  if (B1.size() != B2.size()) throw std::invalid_argument("bitorsor product: base mismatch");
  const Ops& ops = B1.ops();
  Twist<Ops> t;
  for (int i = 0; i < B1.size(); ++i) {
    const int s1 = B1.twist().sigma[i];
    t.sigma.push_back(B2.twist().sigma[s1]);
    t.auts.push_back(ops.compose(B1.twist().auts[i], B2.twist().auts[s1]));
  }
  return Bitorsor<Ops>(ops, t, B1.gamma());
}

template <class Ops, class E>
std::vector<E> product_carrier(const Bitorsor<Ops>& B1, const std::vector<E>& x, const std::vector<E>& y) {
  const Ops& ops = B1.ops();
  std::vector<E> out;
  for (int i = 0; i < B1.size(); ++i) {
    const int s1 = B1.twist().sigma[i];
    out.push_back(ops.mul(x[i], ops.apply(B1.twist().auts[i], y[s1])));
  }
  return out;
}

// Monomial part of the inverse carrier: iota(x) = M(x^{-1}) with
// (M y)_j = aut_{s(j)}^{-1}(y_{s(j)}), s = sigma^{-1}.
template <class Ops>
Monomial<Ops> inverse_monomial(const Bitorsor<Ops>& B) {
  const Ops& ops = B.ops();
  const auto sinv = B.twist().sigma_inverse();
  Monomial<Ops> m;
  for (int j = 0; j < B.size(); ++j) {
    m.pi.push_back(sinv[j]);
    m.a.push_back(ops.aut_inv(B.twist().auts[sinv[j]]));
  }
  return m;
}

// Inverse bitorsor: sigma' = sigma^{-1}, aut'_j = (aut_{sigma^{-1}(j)})^{-1},
// carrier iota(x)_{sigma(i)} = aut_i^{-1}(x_i^{-1}).  Gamma transported by
// phi.iota(x) = iota(phi.x).
template <class Ops>
Bitorsor<Ops> inverse(const Bitorsor<Ops>& B) {
  const Ops& ops = B.ops();
  const auto sinv = B.twist().sigma_inverse();
  Twist<Ops> t;
  for (int j = 0; j < B.size(); ++j) {
    t.sigma.push_back(sinv[j]);
    t.auts.push_back(ops.aut_inv(B.twist().auts[sinv[j]]));
  }
  std::optional<GammaAction<Ops>> g;
  if (B.gamma()) {
    if (!B.gamma()->gen.linear()) throw std::invalid_argument("bitorsor inverse: affine Gamma action not supported");
    const Monomial<Ops> M = inverse_monomial(B);
    // M^{-1}: (M^{-1} z)_i = aut_i(z_{sigma(i)}).
    Monomial<Ops> Minv;
    Minv.pi = B.twist().sigma;
    Minv.a = B.twist().auts;
    GammaAction<Ops> ga;
    ga.order = B.gamma()->order;
    ga.gen = M.after(ops, B.gamma()->gen.after(ops, Minv));
    g = ga;
  }
  return Bitorsor<Ops>(ops, t, g);
}

template <class Ops, class E>
std::vector<E> inverse_carrier(const Bitorsor<Ops>& B, const std::vector<E>& x) {
  const Ops& ops = B.ops();
  std::vector<E> out(B.size());
  for (int i = 0; i < B.size(); ++i)
    out[B.twist().sigma[i]] = ops.apply(ops.aut_inv(B.twist().auts[i]), ops.inv(x[i]));
  return out;
}

template <class Ops, class E>
std::vector<E> inverse_carrier_preimage(const Bitorsor<Ops>& B, const std::vector<E>& z) {
  const Ops& ops = B.ops();
  std::vector<E> out;
  for (int i = 0; i < B.size(); ++i)
    out.push_back(ops.inv(ops.apply(B.twist().auts[i], z[B.twist().sigma[i]])));
  return out;
}

// Left-trivialized Maurer-Cartan forms on a bitorsor point jet:
// theta_{sigma(i)} = aut_i^{-1}(x_i^{-1} dx_i), thetabar_i = dx_i x_i^{-1}.
std::vector<Mat> bitorsor_theta(const MatBitorsor& B, const std::vector<Jet>& x);
std::vector<Mat> bitorsor_theta_bar(const MatBitorsor& B, const std::vector<Jet>& x);

// Averaging over Gamma of a left-trivialized tangent of G^k.
std::vector<Mat> average_tangent(const MatOps& ops, const GammaAction<MatOps>& gamma, const std::vector<Mat>& v);
// Orthonormal basis (for the summed form) of the Gamma-fixed part of g^k.
std::vector<std::vector<Mat>> fixed_tangent_basis(const MatrixGroup& G, const MatOps& ops,
                                                  const GammaAction<MatOps>& gamma, int k);

// ---- checks ----

struct CheckResult {
  std::string name;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Commuting actions, simple transitivity through the closed-form solves, and
// (if present) the two compatibility axioms of a Gamma-compatible bitorsor.
CheckResult check_bitorsor_axioms(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed);
CheckResult check_bitorsor_axioms(const FinBitorsor& B);

// r(x.g, y) = r(x, g.y), equivariance of r, and compatibility of r with Gamma.
CheckResult check_product_relation(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2,
                                   int samples, std::uint64_t seed);
// iota swaps the actions: iota(g.x.h) = h^{-1}.iota(x).g^{-1}; Gamma transport.
CheckResult check_inverse_relation(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed);
// Associativity of the product up to the canonical identification of carriers.
CheckResult check_product_associativity(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2,
                                        const MatBitorsor& B3, int samples, std::uint64_t seed);
// B.B^{-1} is the trivial bitorsor up to carrier identification.
CheckResult check_inverse_cancels(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed);

// Fixed sub-bitorsor of a finite bitorsor, by exhaustive enumeration.
struct FiniteFixedSubtorsor {
  bool nonempty = false;
  std::vector<std::vector<int>> points;
  std::vector<std::vector<int>> group;  // G^Gamma
  bool left_simply_transitive = false;
  bool right_simply_transitive = false;
};
FiniteFixedSubtorsor fixed_subtorsor(const FinBitorsor& B);

// Fixed sub-bitorsor of a matrix bitorsor with linear Gamma action, through its
// base point (the identity) and the fixed Lie algebra.
struct MatFixedSubtorsor {
  bool nonempty = false;
  std::vector<Mat> base_point;
  std::vector<std::vector<Mat>> fixed_algebra_basis;  // orthonormal basis of (g^I)^Gamma
  // base_point . exp(X) for X in the fixed algebra
  std::vector<Mat> sample(const MatrixGroup& G, Rng& rng, double sigma = 1.0) const;
};
MatFixedSubtorsor fixed_subtorsor(const MatrixGroup& G, const MatBitorsor& B);
double fixed_residual(const MatBitorsor& B, const std::vector<Mat>& x);
// On fixed samples: solutions g of g.x = y and h of x.h = y are Gamma-fixed.
CheckResult check_fixed_transitivity(const MatrixGroup& G, const MatBitorsor& B, int samples, std::uint64_t seed);

// Fixed points of B1 and B2 multiply to fixed points of B1.B2 equivariantly.
CheckResult check_canonical_fixed_product_iso(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2,
                                              int samples, std::uint64_t seed);
struct FiniteIsoReport {
  bool well_defined = false;
  bool equivariant = false;
  bool bijective = false;
  int domain_pairs = 0;
  int fixed_group_order = 0;
  int target_fixed = 0;
};
FiniteIsoReport check_canonical_fixed_product_iso(const FinBitorsor& B1, const FinBitorsor& B2);

// Z/m acting on G^{Z/m} (the group as a bitorsor) by (l.g)(k) = phi(l) g(k - l).
MatBitorsor example_cyclic_shift(const MatrixGroup& G, int m, const Automorphism& phi1);
// Fixed points g(k) = phi1^k(g(0)).
std::vector<Mat> example_cyclic_shift_fixed(const Automorphism& phi1, int m, const Mat& g0);

std::vector<std::vector<int>> enumerate_tuples(int n, int k);

}  // namespace qham
