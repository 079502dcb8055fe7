// Logarithmic Jacobi fields by least-squares collocation on the round sphere.
//
// With mu = rho (1 + |x|^2)^2 / 4 in a chart x (z or w = 1/z), mu L = Delta_S2 + q where
// q = -2 K mu is smooth. The smooth part is expanded in real spherical harmonics. The singular
// parts are global: chordal-distance logarithms ln|z - p| - ln(1 + |z|^2)/2, whose round
// Laplacian is -1/2 off p, and the harmonic poles Re(c / (z - p)), Re(c z). They differ from
// cut-off versions by smooth functions, so the solution space is the same.
#include <cmath>

#include "willmore/varindex.hpp"

namespace willmore {

namespace {

// Orthonormal real spherical harmonics up to degree L at one (theta, phi); index l*l + l + m.
void real_harmonics(int L, double theta, double phi, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  double x = std::cos(theta), s = std::sin(theta);
  // Normalized associated Legendre functions P̄_l^m with sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) folded in.
  std::vector<double> P((L + 1) * (L + 1), 0.0);
  auto at = [&](int l, int m) -> double& { return P[l * (L + 1) + m]; };
  at(0, 0) = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 1; m <= L; ++m) at(m, m) = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * at(m - 1, m - 1);
  for (int m = 0; m < L; ++m) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * at(m, m);
  for (int m = 0; m <= L; ++m)
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
    }
  const double r2 = std::sqrt(2.0);
  for (int l = 0; l <= L; ++l) {
    out(l * l + l) = at(l, 0);
    for (int m = 1; m <= l; ++m) {
      out(l * l + l + m) = r2 * at(l, m) * std::cos(m * phi);
      out(l * l + l - m) = r2 * at(l, m) * std::sin(m * phi);
    }
  }
}

struct Node {
  Geo geo;
  cd local;
  bool w_chart;
  double weight;  // round-sphere area weight
  double theta, phi;
  double conf;    // (1 + |x|^2)^2 / 4
};

// Chordal logarithm of end i and the harmonic pole with coefficient c, at a node.
double chordal_log(const MinimalImmersion& im, int i, const Node& n) {
  cd x = n.local;
  double h = -0.5 * std::log1p(std::norm(x));
  if (i == 0) return n.w_chart ? std::log(std::abs(x)) + h : h;
  cd p = im.end_chart(i).p;
  return n.w_chart ? std::log(std::abs(1.0 - p * x)) + h : std::log(std::abs(x - p)) + h;
}

double pole_value(const MinimalImmersion& im, int i, cd c, const Node& n) {
  cd x = n.local;
  if (i == 0) return n.w_chart ? (c / x).real() : (c * x).real();
  cd p = im.end_chart(i).p;
  return n.w_chart ? (c * x / (1.0 - p * x)).real() : (c / (x - p)).real();
}

// Smooth-part value at a global coordinate.
double smooth_value(int L, const Eigen::VectorXd& c, cd z) {
  double theta = 2.0 * std::atan(std::abs(z)), phi = std::arg(z);
  Eigen::RowVectorXd Y((L + 1) * (L + 1));
  real_harmonics(L, theta, phi, Y);
  return Y.dot(c.head(Y.size()));
}

}  // namespace

LogJacobiSolution solve_log_jacobi(const MinimalImmersion& im, const Eigen::VectorXd& alpha,
                                   const LogJacobiOptions& opt) {
  int m = im.m();
  if (alpha.size() != m) fail("alpha must have one entry per end");
  NormalSpan ns = normal_span(im);
  Vec3 An = Vec3::Zero();
  for (int i = 0; i < m; ++i) An += alpha(i) * ns.normals[i];
  if (An.norm() > 1e-8 * std::max(1.0, alpha.norm())) fail("alpha not in the kernel of A");

  const int L = opt.degree;
  const int nh = (L + 1) * (L + 1);
  const int ntheta = 2 * ((3 * L) / 4 + 2);  // even, so no node sits on the equator
  const int nphi = 2 * L + 3;
  std::vector<double> gx, gw;
  gauss_legendre(ntheta, gx, gw);
  std::vector<Node> nodes;
  for (int i = 0; i < ntheta; ++i) {
    double theta = std::acos(gx[i]);
    for (int j = 0; j < nphi; ++j) {
      double phi = 2.0 * kPi * (j + 0.5) / nphi;
      cd z = sphere_to_z(theta, phi);
      Node n{};
      n.theta = theta;
      n.phi = phi;
      n.weight = gw[i] * 2.0 * kPi / nphi;
      n.w_chart = std::abs(z) > 1.0;
      n.local = n.w_chart ? 1.0 / z : z;
      n.geo = n.w_chart ? im.at_w(n.local) : im.at_z(n.local);
      n.conf = std::pow(1.0 + std::norm(n.local), 2) / 4.0;
      nodes.push_back(n);
    }
  }
  const int neq = static_cast<int>(nodes.size());
  const int nun = nh + 2 * m;

  double asum = alpha.sum();
  Eigen::MatrixXd A(neq, nun);
  Eigen::VectorXd b(neq);
  for (int k = 0; k < neq; ++k) {
    const Node& n = nodes[k];
    double sw = std::sqrt(n.weight);
    real_harmonics(L, n.theta, n.phi, A.row(k).head(nh));
    double q = -2.0 * n.geo.K * n.geo.rho * n.conf;
    for (int l = 0; l <= L; ++l)
      for (int j = l * l; j < (l + 1) * (l + 1); ++j) A(k, j) *= (q - l * (l + 1.0)) * sw;
    for (int i = 0; i < m; ++i) {
      A(k, nh + 2 * i) = q * pole_value(im, i, 1.0, n) * sw;
      A(k, nh + 2 * i + 1) = q * pole_value(im, i, cd(0.0, 1.0), n) * sw;
    }
    double lsum = 0.0;
    for (int i = 0; i < m; ++i) lsum += alpha(i) * chordal_log(im, i, n);
    b(k) = (-0.5 * asum + q * lsum) * sw;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  double rmax = std::abs(qr.matrixR()(0, 0));
  qr.setThreshold(1e-9);
  Eigen::VectorXd x = qr.solve(b);

  LogJacobiSolution sol;
  sol.alpha = alpha;
  sol.unknowns = nun;
  sol.equations = neq;
  sol.kernel_dimension = nun - static_cast<int>(qr.rank());
  int tail = std::min(12, nun);
  sol.spectrum_tail.resize(tail);
  for (int i = 0; i < tail; ++i) sol.spectrum_tail(i) = std::abs(qr.matrixR()(nun - tail + i, nun - tail + i)) / rmax;
  double bn = b.norm();
  sol.residual = bn > 0.0 ? (A * x - b).norm() / bn : 0.0;

  Eigen::VectorXd cs = x.head(nh);
  // Pole coefficients in the normalized charts: Re(c / (z - p)) = Re((c / s) / zeta), likewise Re(c z) at infinity.
  for (int i = 0; i < m; ++i) sol.pole_coeffs.push_back(-cd(x(nh + 2 * i), x(nh + 2 * i + 1)) / im.end_chart(i).s);
  // Recovered log weights from circle averages of u at two small radii.
  auto u_at = [&](cd z) {
    Node n{};
    n.w_chart = std::abs(z) > 1.0;
    n.local = n.w_chart ? 1.0 / z : z;
    double u = -smooth_value(L, cs, z);
    for (int i = 0; i < m; ++i) {
      u += alpha(i) * chordal_log(im, i, n);
      u -= pole_value(im, i, cd(x(nh + 2 * i), x(nh + 2 * i + 1)), n);
    }
    return u;
  };
  sol.beta.resize(m);
  for (int i = 0; i < m; ++i) {
    const EndChart& ch = im.end_chart(i);
    const double ra = 1e-3, rb = 2e-3;
    double avg[2] = {0.0, 0.0};
    const int na = 64;
    for (int r = 0; r < 2; ++r) {
      double rad = r == 0 ? ra : rb;
      for (int j = 0; j < na; ++j) {
        cd zeta = std::polar(rad, 2.0 * kPi * (j + 0.5) / na);
        avg[r] += u_at(ch.at_infinity ? 1.0 / (ch.s * zeta) : ch.p + ch.s * zeta) / na;
      }
    }
    sol.beta(i) = (avg[1] - avg[0]) / std::log(rb / ra);
  }

  if (sol.residual > opt.tolerance) {
    if (sol.residual <= opt.relaxed_tolerance) {
      sol.relaxed = true;
    } else {
      std::string tailtxt;
      for (int i = 0; i < tail; ++i) tailtxt += " " + std::to_string(sol.spectrum_tail(i));
      throw Error(ErrorKind::NonConvergence, "log-Jacobi residual " + std::to_string(sol.residual) +
                                                 " above tolerance; smallest R diagonal ratios:" + tailtxt);
    }
  }
  return sol;
}

}  // namespace willmore
