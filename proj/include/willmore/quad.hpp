#pragma once
#include <functional>

#include "willmore/surface.hpp"

namespace willmore {

struct QuadratureScheme {
  int radial_order = 12;   // Gauss-Legendre nodes per radial panel
  int angular_nodes = 96;  // trapezoid nodes per end ring
  int bg_panels = 40;      // radial panels per background disk
  int bg_angular = 192;
  int transition_panels = 6;
  int inner_rings = 30;    // geometric rings toward an end when nothing is cut out
  double chart_split = 1.0;  // scales the z-disk / w-disk partition radii
  double bump_fraction = 0.45;  // outer bump radius relative to the distance to the nearest other end
  double bump_ratio = 0.45;     // inner / outer bump radius
};

// Sample handed to integrands: geometry in the integration chart, end index (-1 for background)
// and the local coordinate (zeta for end pieces, z or w for background disks).
struct SamplePoint {
  const Geo& geo;
  int end;
  cd local;
  bool w_chart;
};
using Integrand = std::function<double(const SamplePoint&)>;

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
};

// Integral of f dmu_g over the sphere minus the normalized disks |zeta| < eps around every end.
IntegralResult integrate_surface(const MinimalImmersion& im, const Integrand& f, const QuadratureScheme& qs,
                                 double eps = 0.0);

// Smooth partition weights, exposed for tests.
double smooth_step(double t);  // 0 for t <= 0, 1 for t >= 1, C-infinity
struct Partition {
  std::vector<double> r_in, r_out;  // per end, in the end's own coordinate (z - p, or w)
  double R1, R2;                    // z-disk weight 1 below R1, 0 above R2
};
Partition make_partition(const MinimalImmersion& im, const QuadratureScheme& qs);
double end_weight(const Partition& P, int i, double r);
double zdisk_weight(const Partition& P, double r);

// Arclength integral over |zeta| = eps in the normalized chart of end i.
using CircleIntegrand = std::function<double(const Geo&, cd zeta)>;
double circle_integral(const MinimalImmersion& im, int end, double eps, const CircleIntegrand& f,
                       int nodes = 256);
// Bound on eps for circle integrals and cut-outs at end i.
double max_chart_radius(const MinimalImmersion& im, int end, const QuadratureScheme& qs = {});

struct InvariantReport {
  double total_curvature = 0.0, total_curvature_err = 0.0;
  double willmore = 0.0, willmore_err = 0.0;
  double cx2 = 0.0, cx2_err = 0.0;
};
InvariantReport geometric_invariants(const MinimalImmersion& im, const QuadratureScheme& qs);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace willmore
