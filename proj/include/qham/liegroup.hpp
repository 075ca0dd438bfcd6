#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qham {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

inline constexpr double kReprTol = 1e-12;
inline constexpr double kNumTol = 1e-10;

enum class GroupKind { SU, SO };

// Compact matrix group SU(n) or SO(n) with the invariant form
// (X, Y) = -scale * Re tr(XY) on its Lie algebra.
class MatrixGroup {
 public:
  MatrixGroup(GroupKind kind, int n, double scale = 1.0);
  static MatrixGroup su(int n, double scale = 1.0) { return {GroupKind::SU, n, scale}; }
  static MatrixGroup so(int n, double scale = 1.0) { return {GroupKind::SO, n, scale}; }

  GroupKind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  double scale() const { return scale_; }
  std::string name() const;

  Mat identity() const { return Mat::Identity(n_, n_); }
  Mat zero() const { return Mat::Zero(n_, n_); }

  // Orthonormal for inner().
  const std::vector<Mat>& basis() const { return basis_; }

  double inner(const Mat& X, const Mat& Y) const;
  Mat exp(const Mat& X) const;
  // Principal logarithm projected to the algebra; intended for U close to I.
  Mat log_near_identity(const Mat& U) const;
  Mat Ad(const Mat& g, const Mat& X) const { return g * X * g.adjoint(); }
  static Mat bracket(const Mat& X, const Mat& Y) { return X * Y - Y * X; }
  Mat project(const Mat& M) const;

  Vec coords(const Mat& X) const;
  Mat from_coords(const Vec& c) const;

  bool is_algebra(const Mat& X, double tol = kReprTol) const;
  bool is_element(const Mat& U, double tol = kReprTol) const;

  // Haar-distributed group element.
  Mat random_element(Rng& rng) const;
  // Standard Gaussian coordinates (times sigma) in the orthonormal basis.
  Mat random_algebra(Rng& rng, double sigma = 1.0) const;

  bool operator==(const MatrixGroup& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && scale_ == o.scale_;
  }

 private:
  GroupKind kind_;
  int n_;
  double scale_;
  std::vector<Mat> basis_;
};

// x -> w c(x) w^{-1}, c optional entrywise complex conjugation.  An empty w
// stands for the identity matrix of any size.
class Automorphism {
 public:
  Automorphism() = default;
  Automorphism(Mat w, bool conj, int declared_order = 0)
      : w_(std::move(w)), conj_(conj), order_(declared_order) {}

  static Automorphism identity() { return Automorphism(Mat(), false, 1); }
  static Automorphism inner(const Mat& w, int declared_order = 0) {
    return Automorphism(w, false, declared_order);
  }
  static Automorphism conjugation(int declared_order = 2) {
    return Automorphism(Mat(), true, declared_order);
  }

  Mat apply(const Mat& x) const;
  // (*this) o other
  Automorphism compose(const Automorphism& other) const;
  Automorphism inverse() const;
  Automorphism power(int k) const;

  bool conj() const { return conj_; }
  const Mat& by() const { return w_; }
  int declared_order() const { return order_; }
  bool trivial_form() const { return w_.size() == 0 && !conj_; }

 private:
  Mat w_;
  bool conj_ = false;
  int order_ = 0;
};

// Smallest k <= max_order with kappa^k = id on a seeded 64-sample panel, or 0.
int empirical_order(const MatrixGroup& G, const Automorphism& k, int max_order, std::uint64_t seed = 7);
// Declared order reached on the panel, homomorphism, and form preservation.
bool validate_automorphism(const MatrixGroup& G, const Automorphism& k, std::uint64_t seed = 7,
                           std::string* why = nullptr);

// Frobenius distance.
double mat_dist(const Mat& a, const Mat& b);

// Value with a left-trivialized first-order tangent: the curve x exp(t d).
struct Jet {
  Mat x;
  Mat d;
};

inline Jet jet_const(const Mat& x) { return {x, Mat::Zero(x.rows(), x.cols())}; }

// Element operations used by the generic bitorsor code.
struct MatOps {
  using Elem = Mat;
  using Aut = Automorphism;

  int n = 2;

  Mat identity() const { return Mat::Identity(n, n); }
  Mat mul(const Mat& a, const Mat& b) const { return a * b; }
  Mat inv(const Mat& a) const { return a.adjoint(); }
  Mat apply(const Aut& k, const Mat& a) const { return k.apply(a); }

  Jet mul(const Jet& a, const Jet& b) const {
    return {a.x * b.x, b.x.adjoint() * a.d * b.x + b.d};
  }
  Jet inv(const Jet& a) const { return {a.x.adjoint(), -(a.x * a.d * a.x.adjoint())}; }
  Jet apply(const Aut& k, const Jet& a) const { return {k.apply(a.x), k.apply(a.d)}; }

  Aut id_aut() const { return Automorphism::identity(); }
  Aut compose(const Aut& a, const Aut& b) const { return a.compose(b); }
  Aut aut_inv(const Aut& a) const { return a.inverse(); }

  double dist(const Mat& a, const Mat& b) const { return mat_dist(a, b); }
};

}  // namespace qham
