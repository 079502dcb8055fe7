#include "willmore/varindex.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace willmore {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd normal_matrix(const std::vector<Vec3>& normals) {
  Eigen::MatrixXd N(3, normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i) N.col(i) = normals[i];
  return N;
}

}  // namespace

NormalSpan normal_span(const std::vector<Vec3>& normals, double rank_tol) {
  NormalSpan ns;
  ns.normals = normals;
  if (normals.empty()) return ns;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal_matrix(normals));
  ns.singular_values = svd.singularValues();
  for (int i = 0; i < ns.singular_values.size(); ++i)
    if (ns.singular_values(i) > rank_tol * ns.singular_values(0)) ++ns.d;
  return ns;
}

NormalSpan normal_span(const MinimalImmersion& im, double rank_tol) {
  std::vector<Vec3> n;
  for (int i = 0; i < im.m(); ++i) n.push_back(gauss_map_at_end(im, i));
  return normal_span(n, rank_tol);
}

LogJacobiKernel log_jacobi_kernel(const std::vector<Vec3>& normals, double rank_tol) {
  LogJacobiKernel k;
  int m = static_cast<int>(normals.size());
  if (m == 0) return k;
  Eigen::MatrixXd N = normal_matrix(normals);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(N, Eigen::ComputeFullV);
  auto s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * s(0)) ++rank;
  k.N = m - rank;
  for (int j = rank; j < m; ++j) {
    Eigen::VectorXd b = svd.matrixV().col(j);
    int imax = 0;
    b.cwiseAbs().maxCoeff(&imax);
    if (b(imax) < 0) b = -b;
    k.basis.push_back(b);
  }
  return k;
}

IndexReport index_report(const MinimalImmersion& im, const QuadratureScheme& qs, bool with_energy,
                         double rank_tol) {
  IndexReport r;
  r.m = im.m();
  r.rank_tol = rank_tol;
  NormalSpan ns = normal_span(im, rank_tol);
  r.normals = ns.normals;
  r.singular_values = ns.singular_values;
  r.d = ns.d;
  r.index = r.m - r.d;
  r.N = log_jacobi_kernel(ns.normals, rank_tol).N;
  if (with_energy) r.energies = geometric_invariants(im, qs);
  return r;
}

IndexReport index_report_round_sphere() {
  IndexReport r;
  r.m = 1;
  InvariantReport e;
  e.total_curvature = 4.0 * kPi;
  e.willmore = 4.0 * kPi;
  r.energies = e;
  return r;
}

// ---------------------------------------------------------------- fields

bool VariationField::closed_form() const { return local.empty() && translation.isZero(0.0); }

EndCoefficients end_coefficients(const MinimalImmersion& im, const VariationField& f) {
  int m = im.m();
  EndCoefficients c;
  c.v.assign(m, f.v);
  c.beta.assign(m, 0.0);
  c.alpha.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const EndChart& ch = im.end_chart(i);
    c.v[i] += f.translation.dot(gauss_map_at_end(im, i));
    if (i < static_cast<int>(f.poles.size())) c.alpha[i] += f.poles[i] / ch.s;
  }
  for (std::size_t j = 0; j < f.log_weights.size(); ++j) {
    c.beta[j + 1] += f.log_weights[j];
    c.beta[0] -= f.log_weights[j];
  }
  for (const auto& t : f.local) {
    c.v.at(t.end) += t.v;
    c.beta.at(t.end) += t.log_weight;
    c.alpha.at(t.end) += t.pole;
  }
  return c;
}

namespace {

// d^2 z / d xi^2 for the chart of a sample.
cd chart_jp(const MinimalImmersion& im, const SamplePoint& s) {
  if (!s.w_chart) return 0.0;
  if (s.end == 0) {
    double sc = im.end_chart(0).s;
    return 2.0 / (sc * s.local * s.local * s.local);
  }
  return 2.0 / (s.local * s.local * s.local);
}

Jet xsq_jet(const Geo& g) {
  Vec3c Xc = g.X.cast<cd>();
  return {g.X.squaredNorm(), Xc.dot(g.phi), 4.0 * g.rho, Xc.dot(g.dphi)};
}

Jet normal_jet(const Geo& g, const Vec3& a) {
  double an = a.dot(g.n);
  return {an, a.cast<cd>().dot(g.dn), 2.0 * g.K * g.rho * an, cd(kNaN, kNaN)};
}

// Jet of f(|zeta|) for the cutoff 1 - smooth_step((r - r1) / (r2 - r1)).
Jet cutoff_jet(cd zeta, double r1, double r2) {
  double r = std::abs(zeta);
  if (r <= r1) return {1.0, 0.0, 0.0, 0.0};
  if (r >= r2) return {0.0, 0.0, 0.0, 0.0};
  double h = r2 - r1, t = (r - r1) / h;
  double S = smooth_step(t);
  double q = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
  double qp = -2.0 / (t * t * t) + 2.0 / std::pow(1.0 - t, 3);
  double S1 = S * (1.0 - S) * q;
  double S2 = S1 * (1.0 - 2.0 * S) * q + S * (1.0 - S) * qp;
  double f1 = -S1 / h, f2 = -S2 / (h * h);
  cd zb = std::conj(zeta);
  return {1.0 - S, f1 * zb / (2.0 * r), f2 + f1 / r, zb * zb * (f2 / (4.0 * r * r) - f1 / (4.0 * r * r * r))};
}

// Local expansion h(zeta) without the |X|^2 part, in the zeta chart.
Jet local_h_jet(const LocalTerm& t, cd zeta) {
  Jet j;
  double r = std::abs(zeta);
  cd z2 = zeta * zeta;
  j.v = (t.pole / zeta).real() + t.log_weight * std::log(r) + t.quad * r * r;
  j.d = -t.pole / (2.0 * z2) + t.log_weight / (2.0 * zeta) + t.quad * std::conj(zeta);
  j.d2 = t.pole / (z2 * zeta) - t.log_weight / (2.0 * z2);
  j.lap = 4.0 * t.quad;
  // Horner for the polynomial and its first two derivatives.
  cd val = 0.0, d = 0.0, d2 = 0.0;
  for (auto it = t.poly.rbegin(); it != t.poly.rend(); ++it) {
    d2 = d2 * zeta + 2.0 * d;
    d = d * zeta + val;
    val = val * zeta + *it;
  }
  j.v += val.real();
  j.d += 0.5 * d;
  j.d2 += 0.5 * d2;
  return j;
}

struct Resolved {
  std::vector<LocalTerm> local;
};

Resolved resolve(const MinimalImmersion& im, const VariationField& f) {
  Resolved r;
  for (auto t : f.local) {
    if (t.end < 0 || t.end >= im.m()) fail("local term end index out of range");
    if (t.r2 <= 0.0) {
      t.r2 = 0.9 * max_chart_radius(im, t.end);
      t.r1 = 0.5 * t.r2;
    }
    if (!(t.r1 > 0.0 && t.r1 < t.r2)) fail("invalid cutoff radii");
    r.local.push_back(t);
  }
  return r;
}

// Global harmonic blocks in the sample chart.
Jet harmonic_jet(const MinimalImmersion& im, const VariationField& f, const SamplePoint& s, cd jp) {
  const auto& fin = im.weierstrass().cfg.finite;
  const Geo& g = s.geo;
  cd J = g.J;
  Jet out{f.constant, 0.0, 0.0, 0.0};
  auto add_z = [&](double v, cd dz, cd d2z) {
    out.v += v;
    out.d += dz * J;
    out.d2 += d2z * J * J + dz * jp;
  };
  for (std::size_t i = 0; i < fin.size(); ++i) {
    double c = i < f.log_weights.size() ? f.log_weights[i] : 0.0;
    cd pc = i + 1 < f.poles.size() ? f.poles[i + 1] : cd(0.0);
    if (c == 0.0 && pc == cd(0.0)) continue;
    const EndChart& ch = im.end_chart(static_cast<int>(i) + 1);
    cd u = s.end == ch.index ? ch.s * s.local : g.z - fin[i];
    if (c != 0.0) add_z(c * std::log(std::abs(u)), c / (2.0 * u), -c / (2.0 * u * u));
    if (pc != cd(0.0)) add_z((pc / u).real(), -pc / (2.0 * u * u), pc / (u * u * u));
  }
  if (!f.poles.empty() && f.poles[0] != cd(0.0)) add_z((f.poles[0] * g.z).real(), f.poles[0] / 2.0, 0.0);
  return out;
}

Jet local_jet(const MinimalImmersion& im, const LocalTerm& t, const SamplePoint& s, cd jp) {
  const EndChart& ch = im.end_chart(t.end);
  cd zeta, j = 1.0, jj = 0.0;
  if (s.end == t.end) {
    zeta = s.local;
  } else {
    cd z = s.geo.z, J = s.geo.J;
    if (ch.at_infinity) {
      zeta = 1.0 / (ch.s * z);
      j = -J / (ch.s * z * z);
      jj = 2.0 * J * J / (ch.s * z * z * z) - jp / (ch.s * z * z);
    } else {
      zeta = (z - ch.p) / ch.s;
      j = J / ch.s;
      jj = jp / ch.s;
    }
  }
  if (std::abs(zeta) >= t.r2) return {};
  Jet eta = rescale(cutoff_jet(zeta, t.r1, t.r2), j, jj);
  Jet h = rescale(local_h_jet(t, zeta), j, jj);
  if (t.v != 0.0) h = h + t.v * xsq_jet(s.geo);
  return eta * h;
}

Jet eval_field(const MinimalImmersion& im, const VariationField& f, const Resolved& r, const SamplePoint& s) {
  cd jp = chart_jp(im, s);
  Jet w = harmonic_jet(im, f, s, jp);
  if (f.v != 0.0) w = w + f.v * xsq_jet(s.geo);
  if (!f.jacobi.isZero(0.0)) w = w + normal_jet(s.geo, f.jacobi);
  if (!f.translation.isZero(0.0)) {
    // (t.n_Psi)|X|^2 with n_Psi = n - 2 (X.n) X / |X|^2.
    const Geo& g = s.geo;
    const Vec3& t = f.translation;
    double xn = g.X.dot(g.n);
    Jet support{xn, g.X.cast<cd>().dot(g.dn), 2.0 * g.K * g.rho * xn, cd(kNaN, kNaN)};
    Jet tx{t.dot(g.X), 0.5 * t.cast<cd>().dot(g.phi), 0.0, 0.5 * t.cast<cd>().dot(g.dphi)};
    w = w + normal_jet(g, t) * xsq_jet(g) + (-2.0) * (support * tx);
  }
  for (const auto& t : r.local) w = w + local_jet(im, t, s, jp);
  return w;
}

}  // namespace

Jet field_jet(const MinimalImmersion& im, const VariationField& f, const SamplePoint& s) {
  return eval_field(im, f, resolve(im, f), s);
}

Jet field_jet_at_end(const MinimalImmersion& im, const VariationField& f, int end, cd zeta) {
  const EndChart& ch = im.end_chart(end);
  Geo g = im.at_end(ch, zeta);
  return field_jet(im, f, SamplePoint{g, end, zeta, ch.at_infinity});
}

// ---------------------------------------------------------------- second variation

namespace {

// oint d_nu |X|^2 over |zeta| = eps, nu pointing into the disk.
double area_flux(const MinimalImmersion& im, int end, double eps) {
  return circle_integral(im, end, eps, [](const Geo& g, cd zeta) {
    cd e = zeta / std::abs(zeta);
    return -2.0 * (e * g.X.cast<cd>().dot(g.phi)).real();
  });
}

double min_chart_radius(const MinimalImmersion& im) {
  double r = 1e300;
  for (int i = 0; i < im.m(); ++i) r = std::min(r, max_chart_radius(im, i));
  return r;
}

}  // namespace

SecondVariationResult second_variation(const MinimalImmersion& im, const QuadratureScheme& qs,
                                       const VariationField& f, SecondVariationMode mode) {
  SecondVariationResult res;
  EndCoefficients ec = end_coefficients(im, f);
  Resolved rf = resolve(im, f);
  if (mode == SecondVariationMode::Bulk) {
    if (!f.closed_form()) fail("field outside the closed-form class for bulk mode");
    VariationField harm = f;
    harm.v = 0.0;
    harm.jacobi = Vec3::Zero();
    double v = f.v;
    auto integrand = [&](const SamplePoint& s) {
      double h = harmonic_jet(im, harm, s, 0.0).v;
      double K = s.geo.K, x2 = s.geo.X.squaredNorm();
      double Lw1 = -2.0 * K * h;
      return 0.5 * Lw1 * Lw1 + 2.0 * v * Lw1 * (2.0 - K * x2) + 2.0 * v * v * (K * K * x2 * x2 - 4.0 * K * x2);
    };
    IntegralResult I = integrate_surface(im, integrand, qs);
    double sb = std::accumulate(ec.beta.begin(), ec.beta.end(), 0.0);
    res.value = I.value + 8.0 * kPi * v * sb;
    res.error = I.error;
    return res;
  }

  double eps0 = 0.5 * min_chart_radius(im);
  const int levels = 6;
  double beta_term = 0.0;
  for (int i = 0; i < im.m(); ++i) beta_term += 8.0 * kPi * ec.v[i] * ec.beta[i];
  double qerr = 0.0;
  for (int k = 0; k < levels; ++k) {
    double eps = eps0 * std::pow(0.5, k);
    IntegralResult I = integrate_surface(
        im,
        [&](const SamplePoint& s) {
          double Lw = jacobi(eval_field(im, f, rf, s), s.geo);
          return 0.5 * Lw * Lw;
        },
        qs, eps);
    double flux = 0.0;
    for (int i = 0; i < im.m(); ++i)
      if (ec.v[i] != 0.0) flux += 2.0 * ec.v[i] * ec.v[i] * area_flux(im, i, eps);
    res.eps.push_back(eps);
    res.raw.push_back(I.value - flux + beta_term);
    qerr = std::max(qerr, I.error);
  }
  // Richardson with the observed rate from the last three levels.
  const auto& B = res.raw;
  double d1 = B[levels - 2] - B[levels - 3], d2 = B[levels - 1] - B[levels - 2];
  double scale = std::max({1.0, std::abs(B.back())});
  double noise = 1e-12 * scale + qerr;
  if (std::abs(d2) <= noise) {
    res.value = B.back();
    res.error = std::abs(d2) + qerr;
    res.rate = std::numeric_limits<double>::infinity();
    return res;
  }
  double ratio = d1 / d2;
  if (!(ratio > 1.2)) {
    throw Error(ErrorKind::NonConvergence,
                "boundary-mode extrapolation did not converge (successive differences " + std::to_string(d1) +
                    ", " + std::to_string(d2) + ")");
  }
  res.rate = std::log2(ratio);
  double corr = d2 / (ratio - 1.0);
  res.value = B.back() + corr;
  // Previous-level extrapolation as a consistency estimate.
  double d0 = B[levels - 3] - B[levels - 4];
  double prev = B[levels - 2] + d1 / (d0 / d1 - 1.0);
  res.error = std::abs(res.value - prev) + qerr;
  return res;
}

SobolevProxy sobolev_proxy(const MinimalImmersion& im, const QuadratureScheme& qs, const VariationField& f,
                           int levels) {
  SobolevProxy res;
  Resolved rf = resolve(im, f);
  double eps0 = 0.5 * min_chart_radius(im);
  for (int k = 0; k < levels; ++k) {
    double eps = eps0 * std::pow(0.5, k);
    IntegralResult I = integrate_surface(
        im,
        [&](const SamplePoint& s) {
          Jet x2 = xsq_jet(s.geo);
          double sv = x2.v;
          Jet inv{1.0 / sv, -x2.d / (sv * sv), -x2.lap / (sv * sv) + 8.0 * std::norm(x2.d) / (sv * sv * sv),
                  cd(kNaN, kNaN)};
          Jet psi = eval_field(im, f, rf, s) * inv;
          double rho = s.geo.rho;
          return psi.v * psi.v / (sv * sv) + 4.0 * std::norm(psi.d) / rho + psi.lap * psi.lap * sv * sv / (rho * rho);
        },
        qs, eps);
    res.eps.push_back(eps);
    res.values.push_back(I.value);
  }
  double a = res.values[levels - 2], b = res.values[levels - 1];
  res.growth = std::abs(b - a) / std::max(std::abs(b), 1e-300);
  return res;
}

OptimalDirection optimal_direction(double beta, double c2) {
  if (!(c2 > 0.0)) fail("c_X^2 must be positive");
  return {-2.0 * kPi * beta / c2, -8.0 * kPi * kPi * beta * beta / c2};
}

// ---------------------------------------------------------------- verification

IbpResult ibp_residual(const MinimalImmersion& im, const LocalTerm& u, const LocalTerm& v,
                       const QuadratureScheme& qs) {
  if (u.end != v.end) fail("integration by parts needs both terms at the same end");
  if (u.v != 0.0 || v.v != 0.0) fail("integration by parts terms must not carry |X|^2");
  VariationField fu, fv;
  fu.local = {u};
  fv.local = {v};
  Resolved ru = resolve(im, fu), rv = resolve(im, fv);
  IntegralResult I = integrate_surface(
      im,
      [&](const SamplePoint& s) {
        Jet a = eval_field(im, fu, ru, s), b = eval_field(im, fv, rv, s);
        return (a.lap * b.v - a.v * b.lap) / s.geo.rho;
      },
      qs);
  auto c0 = [](const LocalTerm& t) { return t.poly.empty() ? 0.0 : t.poly[0].real(); };
  auto c1 = [](const LocalTerm& t) { return t.poly.size() < 2 ? cd(0.0) : 0.5 * t.poly[1]; };
  double t1 = -2.0 * kPi * (u.log_weight * c0(v) - c0(u) * v.log_weight);
  double t2 = 4.0 * kPi * (u.pole * c1(v) - c1(u) * v.pole).real();
  IbpResult r;
  r.numeric = I.value;
  r.closed_form = t1 + t2;
  r.residual = std::abs(r.numeric - r.closed_form);
  r.scale = std::max({1.0, std::abs(t1), std::abs(t2)});
  return r;
}

double fit_exponent(const std::vector<double>& eps, const std::vector<double>& residual) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < eps.size(); ++k)
    if (std::abs(residual[k]) > 1e-14) {
      x.push_back(std::log(eps[k]));
      y.push_back(std::log(std::abs(residual[k])));
    }
  if (x.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  double p = sxy / sxx;
  if (!std::isfinite(p) || p < 0.0) fail_convergence("divergent fit of end expansion residual");
  return p;
}

ExpansionTable end_expansion_residual(const MinimalImmersion& im, const LocalTerm& t,
                                      const std::vector<double>& eps) {
  ExpansionTable tab;
  for (double e : eps) {
    double val = circle_integral(im, t.end, e, [&](const Geo& g, cd zeta) {
      cd dir = zeta / std::abs(zeta);
      Jet w = local_h_jet(t, zeta);
      Jet x2 = xsq_jet(g);
      if (t.v != 0.0) w = w + t.v * x2;
      double rho = g.rho;
      double dnu_w = -2.0 * (dir * w.d).real();
      cd drho = 0.0;
      for (int k = 0; k < 3; ++k) drho += 0.5 * g.dphi(k) * std::conj(g.phi(k));
      double dd = std::norm(w.d);
      cd dq = 4.0 * ((w.d2 * std::conj(w.d) + w.d * w.lap / 4.0) / rho - dd * drho / (rho * rho));
      double dnu_grad = -2.0 * (dir * dq).real();
      double lhs = (w.lap / rho) * dnu_w - 0.5 * dnu_grad + 2.0 * g.K * dnu_w;
      double area = -2.0 * (dir * x2.d).real();
      return lhs - 2.0 * t.v * t.v * area;
    });
    tab.eps.push_back(e);
    tab.residual.push_back(val + 8.0 * kPi * t.v * t.log_weight);
  }
  tab.exponent = fit_exponent(tab.eps, tab.residual);
  return tab;
}

ExpansionTable area_term_residual(const MinimalImmersion& im, int end, const std::vector<double>& eps) {
  ExpansionTable tab;
  const EndChart& ch = im.end_chart(end);
  for (double e : eps) {
    // |X|^2 - 1/r^2 = 2 Re(a/zeta).Q + |Q|^2 with Q the real part of the regular primitive.
    double val = circle_integral(im, end, e, [&](const Geo&, cd zeta) {
      cd dir = zeta / std::abs(zeta);
      Vec3c G = im.regular_primitive(ch, zeta);
      Vec3c G1 = im.regular_primitive_derivative(ch, zeta);
      Vec3 Q = G.real() + im.base();
      Vec3 R = (ch.a / zeta).real();
      Vec3c Qc = Q.cast<cd>();
      cd df = -Qc.dot(ch.a) / (zeta * zeta) + R.cast<cd>().dot(G1) + Qc.dot(G1);
      return 2.0 * (-2.0 * (dir * df).real());
    });
    tab.eps.push_back(e);
    tab.residual.push_back(val);
  }
  tab.exponent = fit_exponent(tab.eps, tab.residual);
  return tab;
}

std::vector<RamificationPoint> ramification_divisor(const MinimalImmersion& im, double cluster_tol) {
  std::vector<RamificationPoint> out;
  const Polynomial& W = im.wronskian();
  int nominal = 2 * im.m() - 4;
  if (W.degree() >= 1)
    for (const auto& c : cluster_roots(poly_roots(W), cluster_tol)) out.push_back({c.point, false, c.multiplicity});
  int at_inf = nominal - std::max(W.degree(), 0);
  if (at_inf > 0) out.push_back({0.0, true, at_inf});
  return out;
}

// ---------------------------------------------------------------- symmetry

cd ChartMap::operator()(cd z) const {
  if (!std::isfinite(std::abs(z))) return m21 == cd(0.0) ? cd(INFINITY, 0.0) : m11 / m21;
  cd x = conjugate ? std::conj(z) : z;
  cd den = m21 * x + m22;
  if (den == cd(0.0)) return cd(INFINITY, 0.0);
  return (m11 * x + m12) / den;
}

SymmetryResidual symmetry_residual(const MinimalImmersion& im, const Eigen::Matrix3d& S, const ChartMap& s,
                                   const std::vector<int>& end_cycle, int probes) {
  SymmetryResidual r;
  InvertedSurface inv(im);
  int grid = std::max(4, static_cast<int>(std::sqrt(probes / 2.0)));
  int used = 0;
  for (int i = 1; i < grid && used < probes; ++i)
    for (int j = 0; j < 2 * grid && used < probes; ++j) {
      cd z = sphere_to_z(kPi * (i + 0.37) / (grid + 0.5), kPi * (j + 0.21) / grid);
      cd sz = s(z);
      if (!std::isfinite(std::abs(sz)) || im.near_end(z, 1e-2) || im.near_end(sz, 1e-2)) continue;
      Vec3 a = S * inv.psi(z), b = inv.psi(sz);
      r.immersion = std::max(r.immersion, (a - b).norm());
      ++used;
    }
  int n = static_cast<int>(end_cycle.size());
  for (int k = 0; k < n; ++k) {
    Vec3 ni = gauss_map_at_end(im, end_cycle[k]), nj = gauss_map_at_end(im, end_cycle[(k + 1) % n]);
    r.normals = std::max(r.normals, (nj + S * ni).norm());
  }
  return r;
}

std::vector<int> end_cycle_from_normals(const std::vector<Vec3>& normals, const Eigen::Matrix3d& S, double tol) {
  int m = static_cast<int>(normals.size());
  if (m == 0) return {};
  std::vector<int> cyc = {0};
  std::vector<bool> seen(m, false);
  seen[0] = true;
  for (int k = 1; k <= m; ++k) {
    Vec3 target = -(S * normals[cyc.back()]);
    int hit = -1;
    for (int j = 0; j < m; ++j)
      if ((normals[j] - target).norm() < tol) hit = j;
    if (hit < 0) return {};
    if (k == m) return hit == 0 ? cyc : std::vector<int>{};
    if (seen[hit]) return {};
    seen[hit] = true;
    cyc.push_back(hit);
  }
  return {};
}

namespace {

using H = std::array<cd, 2>;  // homogeneous point, infinity = (1, 0)
H hom(cd z) { return std::isfinite(std::abs(z)) ? H{z, 1.0} : H{1.0, 0.0}; }
cd hdet(const H& u, const H& v) { return u[0] * v[1] - u[1] * v[0]; }
using M2 = Eigen::Matrix2cd;

// Mobius sending z1, z2, z3 to 0, 1, infinity.
M2 to_standard(const H& z1, const H& z2, const H& z3) {
  cd c1 = hdet(z2, z3), c2 = hdet(z2, z1);
  M2 M;
  M << c1 * z1[1], -c1 * z1[0], c2 * z3[1], -c2 * z3[0];
  return M;
}

H mob_apply(const M2& M, const H& z) { return {M(0, 0) * z[0] + M(0, 1) * z[1], M(1, 0) * z[0] + M(1, 1) * z[1]}; }

double hmismatch(const H& u, const H& v) {
  double nu = std::hypot(std::abs(u[0]), std::abs(u[1])), nv = std::hypot(std::abs(v[0]), std::abs(v[1]));
  return std::abs(hdet(u, v)) / (nu * nv);
}

// Mobius M with M(src_k) = dst_k, k = 0..3, if the fourth point matches.
std::optional<M2> mobius_4(const std::array<H, 4>& src, const std::array<H, 4>& dst, double tol) {
  M2 A = to_standard(src[0], src[1], src[2]), B = to_standard(dst[0], dst[1], dst[2]);
  M2 M = B.inverse() * A;
  if (hmismatch(mob_apply(M, src[3]), dst[3]) > tol) return std::nullopt;
  return M / std::sqrt(M.determinant());
}

std::vector<H> end_points(const EndConfiguration& cfg) {
  std::vector<H> p = {H{1.0, 0.0}};
  for (cd z : cfg.finite) p.push_back(hom(z));
  return p;
}

}  // namespace

std::optional<ChartMap> end_cycle_chart_map(const EndConfiguration& cfg, const std::vector<int>& cycle,
                                            bool conjugate) {
  if (cycle.size() != 4) fail("end cycle chart map needs four ends");
  auto P = end_points(cfg);
  std::array<H, 4> src, dst;
  for (int k = 0; k < 4; ++k) {
    H a = P.at(cycle[k]);
    if (conjugate) a = {std::conj(a[0]), std::conj(a[1])};
    src[k] = a;
    dst[k] = P.at(cycle[(k + 1) % 4]);
  }
  auto M = mobius_4(src, dst, 1e-8);
  if (!M) return std::nullopt;
  return ChartMap{(*M)(0, 0), (*M)(0, 1), (*M)(1, 0), (*M)(1, 1), conjugate};
}

namespace {

std::vector<cd> symmetry_probes(const MinimalImmersion& im, const ChartMap& s) {
  std::vector<cd> z;
  for (int i = 1; i < 8; ++i)
    for (int j = 0; j < 16; ++j) {
      cd p = sphere_to_z(kPi * (i + 0.3) / 8.5, kPi * (j + 0.4) / 8.0);
      cd q = s(p);
      if (!std::isfinite(std::abs(q)) || im.near_end(p, 1e-2) || im.near_end(q, 1e-2)) continue;
      z.push_back(p);
    }
  return z;
}

}  // namespace

EquivariantMember equivariant_member(const EndConfiguration& cfg, const KernelPair& kp, const Eigen::Matrix3d& S,
                                     const ChartMap& s) {
  MinimalImmersion im0(assemble_weierstrass(cfg, kp.ahat, kp.bhat));
  auto z = symmetry_probes(im0, s);
  int n = static_cast<int>(z.size());
  if (n < 4) fail("too few symmetry probes");
  // Re(e^{it} F): columns for cos t and sin t of F(s z) - S F(z), centered over probes.
  Eigen::MatrixXd U(3 * n, 2);
  for (int k = 0; k < n; ++k) {
    Vec3c d = im0.primitive_at(s(z[k])) - S.cast<cd>() * im0.primitive_at(z[k]);
    U.block<3, 1>(3 * k, 0) = d.real();
    U.block<3, 1>(3 * k, 1) = -d.imag();
  }
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 3; ++r) {
      double mean = 0.0;
      for (int k = 0; k < n; ++k) mean += U(3 * k + r, c);
      mean /= n;
      for (int k = 0; k < n; ++k) U(3 * k + r, c) -= mean;
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeFullV);
  Eigen::Vector2d cs = svd.matrixV().col(1);
  double t = std::atan2(cs(1), cs(0));
  cd lam = std::polar(1.0, 0.5 * t);
  EquivariantMember out;
  out.pair = {kp.ahat * lam, kp.bhat * lam};
  MinimalImmersion im1(assemble_weierstrass(cfg, out.pair.ahat, out.pair.bhat));
  // S (X0 + b) = X0(s z) + b  =>  (S - I) b = X0(s z) - S X0(z).
  Vec3 acc = Vec3::Zero();
  for (cd p : z) acc += im1.at(s(p)).X - S * im1.at(p).X;
  acc /= n;
  out.base = (S - Eigen::Matrix3d::Identity()).completeOrthogonalDecomposition().solve(acc);
  for (cd p : z) out.defect = std::max(out.defect, (S * (im1.at(p).X + out.base) - im1.at(s(p)).X - out.base).norm());
  return out;
}

// ---------------------------------------------------------------- kernel family

KernelPair kernel_pair(const KernelBasis& kb, cd m11, cd m12, cd m21, cd m22) {
  if (kb.vectors.size() != 2) fail("kernel family needs a 2-dimensional kernel");
  return {m11 * kb.vectors[0] + m12 * kb.vectors[1], m21 * kb.vectors[0] + m22 * kb.vectors[1]};
}

KernelPair tetrahedral_member(const EndConfiguration& cfg, const KernelBasis& kb) {
  if (cfg.m() != 4 || kb.vectors.size() != 2) fail("tetrahedral member needs 4 ends and a 2-dimensional kernel");
  // h = P_{v1} / P_{v2} at the ends: leading coefficients at infinity, coordinates at finite ends.
  std::array<H, 4> h;
  for (int i = 0; i < 4; ++i) h[i] = {kb.vectors[0](i), kb.vectors[1](i)};
  const double r3 = 1.0 / std::sqrt(3.0);
  std::array<Vec3, 4> verts = {Vec3(1, 1, 1) * r3, Vec3(1, -1, -1) * r3, Vec3(-1, -1, 1) * r3,
                               Vec3(-1, 1, -1) * r3};
  std::array<int, 4> perm = {0, 1, 2, 3};
  do {
    std::array<H, 4> g;
    for (int i = 0; i < 4; ++i) {
      const Vec3& v = verts[perm[i]];
      g[i] = {cd(v.x(), v.y()), 1.0 - v.z()};
    }
    auto M = mobius_4(h, g, 1e-8);
    if (M) {
      KernelPair kp = kernel_pair(kb, (*M)(0, 0), (*M)(0, 1), (*M)(1, 0), (*M)(1, 1));
      double sc = std::max(kp.ahat.cwiseAbs().maxCoeff(), kp.bhat.cwiseAbs().maxCoeff());
      kp.ahat /= sc;
      kp.bhat /= sc;
      return kp;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  fail("no tetrahedral member in the kernel family");
}

}  // namespace willmore
