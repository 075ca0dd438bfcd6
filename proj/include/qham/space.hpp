#pragma once

#include "qham/bitorsor.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qham {

using Point = std::vector<Mat>;
using Tangent = std::vector<Mat>;
using JetPoint = std::vector<Jet>;

// One component of the structure group: G^size acting on the matching
// component of the target bitorsor.  A Gamma action on the target also fixes
// the Gamma action on this component of the structure group.
struct Block {
  int size = 1;
  MatBitorsor target;
  std::string label;
};

JetPoint make_jets(const Point& p, const Tangent& u);
JetPoint make_jets(const Point& p);
Point values(const JetPoint& j);
Tangent tangents(const JetPoint& j);

// Quasi-Hamiltonian space over a product of copies of one matrix group.
// Points are tuples in G^factors; tangents are left-trivialized.
class Space {
 public:
  Space(MatrixGroup G, int factors, std::vector<Block> blocks)
      : G_(std::move(G)), ops_{G_.n()}, factors_(factors), blocks_(std::move(blocks)) {}
  virtual ~Space() = default;

  const MatrixGroup& group() const { return G_; }
  const MatOps& ops() const { return ops_; }
  int factors() const { return factors_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  int structure_size() const;
  int block_offset(int b) const;
  // Concatenation of the block targets.
  MatBitorsor target() const;

  virtual std::string name() const = 0;

  // Moment map with its differential along the jet tangents.
  virtual JetPoint mu(const JetPoint& p) const = 0;
  virtual double omega(const Point& p, const Tangent& u, const Tangent& v) const = 0;
  // Structure group (jets) acting on points (jets).
  virtual JetPoint act(const JetPoint& g, const JetPoint& p) const = 0;

  Point mu_value(const Point& p) const { return values(mu(make_jets(p))); }
  Point act_value(const Point& g, const Point& p) const { return values(act(make_jets(g), make_jets(p))); }

  // Gamma data: action on points (monomial), order.  Structure group and
  // target actions come from the block targets.
  const std::optional<GammaAction<MatOps>>& point_gamma() const { return point_gamma_; }
  bool has_gamma() const { return point_gamma_.has_value(); }
  int gamma_order() const { return point_gamma_ ? point_gamma_->order : 1; }
  JetPoint gamma_point(int phi, const JetPoint& p) const;
  Point gamma_point(int phi, const Point& p) const;
  Tangent gamma_tangent(int phi, const Tangent& u) const;
  JetPoint gamma_structure(int phi, const JetPoint& g) const;
  Point gamma_structure(int phi, const Point& g) const;
  Point gamma_target(int phi, const Point& x) const;

  // Spanning set of the tangent space at p (default: the standard basis).
  virtual std::vector<Tangent> tangent_basis(const Point& p) const;
  // Basis of the structure Lie algebra (default: standard basis of g^K).
  virtual std::vector<Tangent> structure_basis() const;
  virtual Point sample_point(Rng& rng) const;
  // Random element of the structure group (exp of structure algebra samples).
  Point sample_structure(Rng& rng, double sigma = 1.0) const;
  Tangent sample_tangent(const Point& p, Rng& rng) const;
  Tangent sample_structure_algebra(Rng& rng) const;

  // Closed form: jets of t -> exp(-t xi) . p.
  Tangent generating_vector(const Tangent& xi, const Point& p) const;
  // Pushforward of u under p -> g.p.
  Tangent act_tangent(const Point& g, const Point& p, const Tangent& u) const;

 protected:
  void set_point_gamma(std::optional<GammaAction<MatOps>> g) { point_gamma_ = std::move(g); }

  MatrixGroup G_;
  MatOps ops_;
  int factors_;
  std::vector<Block> blocks_;
  std::optional<GammaAction<MatOps>> point_gamma_;
};

using SpacePtr = std::shared_ptr<const Space>;

// Wedge of two g-valued 1-forms given by their values on u and v:
// (alpha, beta)(u, v) = (alpha(u), beta(v)) - (alpha(v), beta(u)).
double wedge(const MatrixGroup& G, const std::vector<Mat>& au, const std::vector<Mat>& bu,
             const std::vector<Mat>& av, const std::vector<Mat>& bv);
double wedge(const MatrixGroup& G, const Mat& au, const Mat& bu, const Mat& av, const Mat& bv);

// ---- constructors ----

// D(B1, B2): points (a, b) in B1 x B2, structure G^I x G^I.
SpacePtr make_double(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2);
// Fusion over block c1 of M1 and block c2 of M2.  The fused block takes the
// place of c1; the remaining blocks of M2 follow those of M1.
SpacePtr fuse(SpacePtr M1, SpacePtr M2, int c1 = 0, int c2 = 0);
// Fusion of blocks c1 and c2 of one space; the fused block takes the place of c1.
SpacePtr internal_fuse(SpacePtr M, int c1, int c2);
// Internal fusion of the double.
SpacePtr make_fused_double(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2);
// Points (C, h_1..h_minf, h0_1..h0_{m0-1}); h0_{m0} solved from the relation.
SpacePtr make_generalized_double(const MatrixGroup& G, int m_inf, int m0);
// Replace an untwisted size-one block c by m base points: m-1 new factors
// h_1..h_{m-1}, h_m solved from h_m...h_1 = mu_c^{-1}.
SpacePtr refine(SpacePtr M, int c, int m);
// Restriction to the Gamma-fixed locus through the fixed point p0.
SpacePtr fixed_locus(SpacePtr M, const Point& p0, double tol = 1e-10);

// Negative controls.
SpacePtr make_degenerate(SpacePtr M);  // omega = 0, mu constant
SpacePtr plant_nonequivariant_mu(SpacePtr M, const Point& c);  // mu(p) replaced by mu(p).c

// Extra accessors on special constructors.
struct GeneralizedDoubleCoords {
  Mat C;
  std::vector<Mat> h;
  std::vector<Mat> h0;  // including the solved last factor
};
GeneralizedDoubleCoords generalized_double_coords(int m_inf, int m0, const Point& p);
// The relation C^{-1} h_minf..h_1 C h0_m0..h0_1 - 1 (Frobenius norm).
double generalized_double_relation(int m_inf, int m0, const Point& p);

// Dependent factor of a refined block: h_m = mu_c^{-1} (h_{m-1}..h_1)^{-1}.
JetPoint refined_segments(const MatOps& ops, const Jet& mu_c, const JetPoint& free_h);

}  // namespace qham
