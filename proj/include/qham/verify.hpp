#pragma once

#include "qham/space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qham {

struct VerificationReport {
  std::string check;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  int worst = -1;  // sample index with the largest residual
  std::string detail;
};

// Fold one residual into a report; call finish() afterwards.
void record(VerificationReport& r, double residual, int sample);
VerificationReport& finish(VerificationReport& r);

struct SuiteOptions {
  int samples = 50;
  std::uint64_t seed = 1;
  double fd_step = 1e-4;
  double qh1_tol = 1e-6;
  double qh2_tol = 1e-6;
  double rank_tol = 1e-8;
  double exact_tol = 1e-12;
  double invariance_tol = 1e-10;
  double cartan_normalization = 1.0 / 12.0;
};

// (normalization)(theta,[theta,theta]) at x on left-trivialized tangents,
// totally antisymmetrized; 1/12 gives (1/2)(u,[v,w]) summed over components.
double cartan_three_form(const MatrixGroup& G, const MatBitorsor& target, const Point& x, const Tangent& u,
                         const Tangent& v, const Tangent& w, double normalization = 1.0 / 12.0);

// Left-trivialized differential of s -> p.exp(s) at s: sum_k (-ad_s)^k X / (k+1)!.
Mat dexp_left(const Mat& s, const Mat& X);

// dω(u,v,w) by central differences in the exponential chart at p.
double exterior_derivative(const Space& M, const Point& p, const Tangent& u, const Tangent& v, const Tangent& w,
                           double h);

// Single-point checks (residual only).
double qh1_residual(const Space& M, const Point& p, const Tangent& u, const Tangent& v, const Tangent& w, double h,
                    double normalization = 1.0 / 12.0);
double qh2_residual(const Space& M, const Point& p, const Tangent& xi, const Tangent& v);
// Null dimension of v -> (omega_p(v, .), dmu_p v); also the smallest relative singular value.
int qh3_null_dimension(const Space& M, const Point& p, double rel_tol, double* min_ratio = nullptr);

VerificationReport verify_qh1(const Space& M, const SuiteOptions& o);
VerificationReport verify_qh2(const Space& M, const SuiteOptions& o);
VerificationReport verify_qh3(const Space& M, const SuiteOptions& o);
VerificationReport verify_antisymmetry(const Space& M, const SuiteOptions& o);
VerificationReport verify_omega_invariance(const Space& M, const SuiteOptions& o);
VerificationReport verify_mu_equivariance(const Space& M, const SuiteOptions& o);
VerificationReport verify_action(const Space& M, const SuiteOptions& o);
VerificationReport verify_generating_vector(const Space& M, const SuiteOptions& o);
// Gamma-compatibility: (1) phi.(g.p) = (phi.g).(phi.p), (2) phi*omega = omega,
// (3) mu(phi.p) = phi.mu(p).
VerificationReport verify_gamma_action(const Space& M, const SuiteOptions& o);
VerificationReport verify_gamma_omega(const Space& M, const SuiteOptions& o);
VerificationReport verify_gamma_mu(const Space& M, const SuiteOptions& o);

// Suite names accepted by run_suite.
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);
VerificationReport run_suite(const Space& M, const std::string& name, const SuiteOptions& o);

// Central finite difference of t -> act(exp(-t xi), p), left-trivialized.
Tangent generating_vector_fd(const Space& M, const Tangent& xi, const Point& p, double h = 1e-5);

// Averaging over a finite group acting linearly on R^d.
Eigen::MatrixXd averaging_projector(const std::vector<Eigen::MatrixXd>& action);
Eigen::VectorXd average(const std::vector<Eigen::MatrixXd>& action, const Eigen::VectorXd& v);
// Matrices of the Gamma action on the tangent space of M at fixed p, in the
// coordinates of the standard basis.
std::vector<Eigen::MatrixXd> tangent_action_matrices(const Space& M, const Point& p);

// At fixed points p of the ambient space: omega(X, Y) = omega(X, ave Y) for X
// tangent to the fixed locus and Y ambient; and for X in the kernel of the
// restricted data, the ambient pairing vanishes.
VerificationReport verify_fixed_degeneracy(const Space& ambient, const Space& fixed, const SuiteOptions& o);

// Fusion of fixed loci vs fixed locus of the fusion at matched points and
// tangents.  p1, p2 are Gamma-fixed base points.
VerificationReport check_fusion_fixed_iso(SpacePtr M1, SpacePtr M2, const Point& p1, const Point& p2,
                                          const SuiteOptions& o);

// Double over a finite group: action and moment map on point sets.
struct FiniteDouble {
  FinBitorsor B1, B2;
  int size() const { return B1.size(); }
  std::vector<int> mu(const std::vector<int>& p) const;  // (r(a,b), r(iota a, iota b))
  std::vector<int> act(const std::vector<int>& g, const std::vector<int>& p) const;
  std::vector<int> gamma(int phi, const std::vector<int>& p) const;
  FinBitorsor target() const;  // product(B1,B2) then product(B1^-1, B2^-1), concatenated
};

struct FiniteFusionIsoReport {
  bool fixed_sets_match = false;     // (M1 x M2)^Gamma = M1^Gamma x M2^Gamma
  bool mu_match = false;             // fused moment map agrees pointwise
  bool equivariant = false;          // under the fixed structure group
  int fixed_points = 0;
  int checked_group_elements = 0;
};
FiniteFusionIsoReport check_fusion_fixed_iso(const FiniteDouble& M1, const FiniteDouble& M2);

}  // namespace qham
