#pragma once
#include <optional>

#include "willmore/quad.hpp"

namespace willmore {

struct NormalSpan {
  std::vector<Vec3> normals;       // n(p_1..p_m)
  Eigen::VectorXd singular_values;  // of the 3 x m normal matrix
  int d = 0;
};
NormalSpan normal_span(const MinimalImmersion& im, double rank_tol = 1e-8);
NormalSpan normal_span(const std::vector<Vec3>& normals, double rank_tol = 1e-8);

struct LogJacobiKernel {
  int N = 0;
  std::vector<Eigen::VectorXd> basis;  // orthonormal basis of {alpha : sum alpha_i n_i = 0}
};
LogJacobiKernel log_jacobi_kernel(const std::vector<Vec3>& normals, double rank_tol = 1e-8);

struct IndexReport {
  int m = 0;
  std::vector<Vec3> normals;
  Eigen::VectorXd singular_values;
  int d = 0;
  int index = 0;
  int N = 0;
  double rank_tol = 1e-8;
  std::optional<InvariantReport> energies;
};
IndexReport index_report(const MinimalImmersion& im, const QuadratureScheme& qs, bool with_energy = true,
                         double rank_tol = 1e-8);
// Round sphere, one end by convention: no ends to span, index 0.
IndexReport index_report_round_sphere();

// Localized term supported near one end, in its normalized chart zeta:
//   eta(|zeta|) * (v |X|^2 + Re(pole / zeta) + log_weight ln|zeta| + Re(sum poly_k zeta^k) + quad |zeta|^2).
// eta = 1 for |zeta| <= r1, 0 beyond r2. r2 <= 0 selects defaults inside the end chart.
struct LocalTerm {
  int end = 0;
  double v = 0.0;
  cd pole = 0.0;
  double log_weight = 0.0;
  std::vector<cd> poly;
  double quad = 0.0;
  double r1 = 0.0, r2 = 0.0;
};

// w = v |X|^2 + sum_i c_i ln|z - p_i| + Re(pole_inf z) + sum_i Re(pole_i / (z - p_i)) + constant
//     + jacobi.n + (translation.n_Psi) |X|^2 + localized terms,
// with n_Psi = n - 2 (X.n) X / |X|^2 the normal of the inverted surface, so the translation term
// moves Psi rigidly.
struct VariationField {
  double v = 0.0;
  std::vector<double> log_weights;  // one per finite end
  std::vector<cd> poles;            // size m: [0] multiplies z, [i] multiplies 1/(z - p_i)
  double constant = 0.0;
  Vec3 jacobi = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
  std::vector<LocalTerm> local;

  // Harmonic blocks plus a.n with a single v: L w1 = -2 K (harmonic part) in closed form.
  bool closed_form() const;
};

struct EndCoefficients {
  std::vector<double> v, beta;
  std::vector<cd> alpha;  // coefficient of 1/zeta in the normalized chart
};
EndCoefficients end_coefficients(const MinimalImmersion& im, const VariationField& f);

// Jet of w at a quadrature sample, in the sample's chart.
Jet field_jet(const MinimalImmersion& im, const VariationField& f, const SamplePoint& s);
// Jet of w in the normalized chart of an end at zeta.
Jet field_jet_at_end(const MinimalImmersion& im, const VariationField& f, int end, cd zeta);

enum class SecondVariationMode { Bulk, Boundary };
struct SecondVariationResult {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> eps, raw;  // boundary mode: epsilon sequence and B(eps)
  double rate = 0.0;             // fitted convergence exponent (boundary mode)
};
SecondVariationResult second_variation(const MinimalImmersion& im, const QuadratureScheme& qs,
                                       const VariationField& f, SecondVariationMode mode);

// Sampled W^{2,2} proxy of psi = w / |X|^2 on the inverted surface: integral of psi^2 + |grad psi|^2
// + (Delta psi)^2 in the inverted metric over the sphere minus eps-disks at the ends. Finite norms show
// as values that settle when eps shrinks; growth is the relative change over the last halving.
struct SobolevProxy {
  std::vector<double> eps, values;
  double growth = 0.0;
};
SobolevProxy sobolev_proxy(const MinimalImmersion& im, const QuadratureScheme& qs, const VariationField& f,
                           int levels = 5);

struct OptimalDirection {
  double v = 0.0, value = 0.0;
};
OptimalDirection optimal_direction(double beta, double c2);

// u and v are localized terms at the same end.
struct IbpResult {
  double numeric = 0.0, closed_form = 0.0, residual = 0.0, scale = 0.0;
};
IbpResult ibp_residual(const MinimalImmersion& im, const LocalTerm& u, const LocalTerm& v,
                       const QuadratureScheme& qs);

struct ExpansionTable {
  std::vector<double> eps, residual;
  double exponent = 0.0;
};
// End boundary expression minus 2 v^2 oint d_nu |X|^2 - 8 pi v beta, for a local term at one end.
ExpansionTable end_expansion_residual(const MinimalImmersion& im, const LocalTerm& field,
                                      const std::vector<double>& eps);
// 2 oint d_nu |X|^2 - 8 pi / eps^2 at one end.
ExpansionTable area_term_residual(const MinimalImmersion& im, int end, const std::vector<double>& eps);
double fit_exponent(const std::vector<double>& eps, const std::vector<double>& residual);

struct RamificationPoint {
  cd point;
  bool at_infinity = false;
  int order = 0;
};
std::vector<RamificationPoint> ramification_divisor(const MinimalImmersion& im, double cluster_tol = 1e-6);

// Chart map s(z) = Mobius(z), optionally composed with conjugation (applied first). S is an ambient
// orthogonal map.
struct ChartMap {
  cd m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
  bool conjugate = false;
  cd operator()(cd z) const;
};
struct SymmetryResidual {
  double immersion = 0.0;  // max |S Psi(p) - Psi(s(p))|
  double normals = 0.0;    // max |n(p_{i+1}) + S n(p_i)| over the end cycle
};
SymmetryResidual symmetry_residual(const MinimalImmersion& im, const Eigen::Matrix3d& S, const ChartMap& s,
                                   const std::vector<int>& end_cycle, int probes = 200);

// Ends ordered so that n(p_{c[k+1]}) = -S n(p_{c[k]}); empty when no such cycle exists.
std::vector<int> end_cycle_from_normals(const std::vector<Vec3>& normals, const Eigen::Matrix3d& S,
                                        double tol = 1e-6);
// Mobius or anti-Mobius map sending the ends along the cycle; nullopt when four-point matching fails.
std::optional<ChartMap> end_cycle_chart_map(const EndConfiguration& cfg, const std::vector<int>& cycle,
                                            bool conjugate);
// Kernel family: a = m11 v1 + m12 v2, b = m21 v1 + m22 v2 for a 2-dimensional kernel.
struct KernelPair {
  VecC ahat, bhat;
};

// Common phase of (a, b) and integration constant making X equivariant, S X(z) = X(s(z)).
// The base has no component along ker(S - I). defect = max |S X(z) - X(s z)| over probes.
struct EquivariantMember {
  KernelPair pair;
  Vec3 base = Vec3::Zero();
  double defect = 0.0;
};
EquivariantMember equivariant_member(const EndConfiguration& cfg, const KernelPair& kp, const Eigen::Matrix3d& S,
                                     const ChartMap& s);
KernelPair kernel_pair(const KernelBasis& kb, cd m11, cd m12, cd m21, cd m22);
// Member of the 4-end family whose end normals are the vertices of a regular tetrahedron.
KernelPair tetrahedral_member(const EndConfiguration& cfg, const KernelBasis& kb);

// Logarithmic Jacobi field u = sum alpha_i l_i - v with L u = 0.
struct LogJacobiOptions {
  int degree = 40;        // spherical harmonic degree
  double tolerance = 1e-4;
  double relaxed_tolerance = 1e-3;
};
struct LogJacobiSolution {
  Eigen::VectorXd alpha;       // input, per end
  Eigen::VectorXd beta;        // recovered log weights
  std::vector<cd> pole_coeffs;  // per end, normalized chart
  double residual = 0.0;       // weighted RMS of the discrete residual relative to the right-hand side
  int kernel_dimension = 0;    // numerically detected kernel of the discrete operator
  Eigen::VectorXd spectrum_tail;  // smallest singular values
  bool relaxed = false;
  int unknowns = 0, equations = 0;
};
LogJacobiSolution solve_log_jacobi(const MinimalImmersion& im, const Eigen::VectorXd& alpha,
                                   const LogJacobiOptions& opt = {});

}  // namespace willmore
