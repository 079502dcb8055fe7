#pragma once
#include <Eigen/Dense>
#include <array>

#include "willmore/ends.hpp"

namespace willmore {

using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;

// Pointwise geometry in a chart xi. phi = 2 d_xi X, dn = d_xi n, rho = area density dmu/dxdy.
struct Geo {
  cd z;                // global coordinate (meaningless at the point at infinity)
  Vec3 X = Vec3::Zero();
  Vec3c phi = Vec3c::Zero();
  Vec3c dphi = Vec3c::Zero();  // d_xi phi
  Vec3 n = Vec3::Zero();
  Vec3c dn = Vec3c::Zero();
  double rho = 0.0;
  double K = 0.0;
  cd J = 1.0;          // dz/dxi
};

// Reparametrize by xi -> eta with d xi / d eta = j and jp = dj / d eta.
Geo rescale(const Geo& g, cd j, cd jp = 0.0);

// Real scalar with complex derivatives d = d_xi f, d2 = d_xi^2 f and flat Laplacian in the same chart.
// d2 is NaN when the source cannot supply it.
struct Jet {
  double v = 0.0;
  cd d = 0.0;
  double lap = 0.0;
  cd d2 = 0.0;
};
Jet operator+(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet rescale(const Jet& f, cd j, cd jp = 0.0);
// L f = Delta_g f - 2 K f evaluated from a jet in the same chart as geo.
inline double jacobi(const Jet& f, const Geo& g) { return f.lap / g.rho - 2.0 * g.K * f.v; }

struct EndChart {
  int index = 0;          // 0 is the end at infinity
  bool at_infinity = false;
  cd p = 0.0;             // finite position
  double s = 1.0;         // z = p + s zeta, or w = 1/z = s zeta
  Vec3c a = Vec3c::Zero();  // primitive ~ a / zeta
  double isotropy = 0.0;  // |a.a|
};

class MinimalImmersion {
 public:
  explicit MinimalImmersion(WeierstrassSurface ws, Vec3 base = Vec3::Zero());

  const WeierstrassSurface& weierstrass() const { return ws_; }
  int m() const { return ws_.cfg.m(); }
  const std::array<PartialFractionForm, 3>& phi_pf() const { return phi_pf_; }
  const std::array<PartialFractionForm, 3>& primitive() const { return F_; }
  const Polynomial& wronskian() const { return W_; }
  const Vec3& base() const { return base_; }

  Geo at_z(cd z) const;
  Geo at_w(cd w) const;
  // z chart inside the unit disk, w chart outside; quantities converted to the z chart.
  Geo at(cd z) const;
  // Normalized end chart.
  Geo at_end(const EndChart& c, cd zeta) const;
  // Primitive minus its pole at the end, in the end chart.
  Vec3c regular_primitive(const EndChart& c, cd zeta) const;
  // d/dzeta of regular_primitive.
  Vec3c regular_primitive_derivative(const EndChart& c, cd zeta) const;
  const EndChart& end_chart(int i) const { return charts_.at(i); }
  // Holomorphic primitive F (X = Re F + base), z or w chart by |z|.
  Vec3c primitive_at(cd z) const;
  bool near_end(cd z, double tol) const;

 private:
  WeierstrassSurface ws_;
  Vec3 base_;
  std::array<PartialFractionForm, 3> phi_pf_, F_;
  Polynomial W_, Ar_, Br_, P1r_;
  std::vector<EndChart> charts_;
  Vec3c eval_F_z(cd z) const;
  Vec3c eval_F_w(cd w) const;
  Geo core(cd A, cd A1, cd B, cd B1, cd Phi, cd Phi1, double sign) const;
  EndChart make_chart(int i) const;
};

std::array<RationalFunction, 3> phi_components(const WeierstrassSurface& ws);
Vec3 immersion_point(const MinimalImmersion& im, cd z);

// Inverse stereographic projection (w + conj w, -i (w - conj w), |w|^2 - 1) / (1 + |w|^2).
Vec3 stereo_P(cd w);
Vec3 stereo_P_inf();
Vec3 gauss_map(const MinimalImmersion& im, cd z);
Vec3 gauss_map_at_end(const MinimalImmersion& im, int i);

struct MetricCurvature {
  double rho, K;
};
MetricCurvature metric_and_curvature(const MinimalImmersion& im, cd z);

EndChart normalize_end_chart(const MinimalImmersion& im, int i);

class InvertedSurface {
 public:
  explicit InvertedSurface(const MinimalImmersion& im) : im_(&im) {}
  Vec3 psi(cd z) const;
  double density(cd z) const;  // rho / |X|^4
  const MinimalImmersion& immersion() const { return *im_; }

 private:
  const MinimalImmersion* im_;
};

// Minimum |X| over a sphere sampling grid away from the ends.
double min_distance_to_origin(const MinimalImmersion& im, int grid = 64);
InvertedSurface invert(const MinimalImmersion& im);

// Y(a.n) in the z chart; equals a for every a.
Vec3 montiel_ros_Y(const MinimalImmersion& im, const Vec3& a, cd z);

// Sample point of the round sphere in the z chart: (|z|^2-1)/(|z|^2+1) = cos(theta), arg z = phi.
cd sphere_to_z(double theta, double phi);

}  // namespace willmore
