#include "willmore/surface.hpp"

#include <cmath>

namespace willmore {

Geo rescale(const Geo& g, cd j, cd jp) {
  Geo h = g;
  h.dphi = g.dphi * (j * j) + g.phi * jp;
  h.phi *= j;
  h.dn *= j;
  h.rho *= std::norm(j);
  h.J *= j;
  return h;
}

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.lap + b.lap, a.d2 + b.d2}; }
Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d, s * a.lap, s * a.d2}; }
Jet operator*(const Jet& a, const Jet& b) {
  // grad f . grad h = 4 Re(d f conj(d h)) for real f, h
  return {a.v * b.v, a.v * b.d + b.v * a.d, a.v * b.lap + b.v * a.lap + 8.0 * (a.d * std::conj(b.d)).real(),
          a.v * b.d2 + b.v * a.d2 + 2.0 * a.d * b.d};
}
Jet rescale(const Jet& f, cd j, cd jp) { return {f.v, f.d * j, f.lap * std::norm(j), f.d2 * j * j + f.d * jp}; }

std::array<RationalFunction, 3> phi_components(const WeierstrassSurface& ws) {
  std::vector<Pole> poles;
  for (cd p : ws.cfg.finite) poles.push_back({p, 2});
  Polynomial a2 = ws.a * ws.a, b2 = ws.b * ws.b;
  return {RationalFunction((b2 - a2) * cd(0.5), 1.0, poles),
          RationalFunction((b2 + a2) * cd(0.0, 0.5), 1.0, poles),
          RationalFunction(ws.a * ws.b, 1.0, poles)};
}

MinimalImmersion::MinimalImmersion(WeierstrassSurface ws, Vec3 base) : ws_(std::move(ws)), base_(base) {
  auto comps = phi_components(ws_);
  for (int k = 0; k < 3; ++k) {
    phi_pf_[k] = partial_fractions(comps[k]);
    F_[k] = antiderivative_pf(phi_pf_[k]);
  }
  int d = m() - 1;
  W_ = (ws_.a.derivative() * ws_.b - ws_.a * ws_.b.derivative()).trimmed(1e-12);
  Ar_ = ws_.a.reversed(d);
  Br_ = ws_.b.reversed(d);
  P1r_ = ws_.phi[0].reversed(d);
  for (int i = 0; i < m(); ++i) charts_.push_back(make_chart(i));
}

Vec3c MinimalImmersion::eval_F_z(cd z) const {
  return Vec3c(F_[0](z), F_[1](z), F_[2](z));
}

Vec3c MinimalImmersion::eval_F_w(cd w) const {
  Vec3c out;
  for (int k = 0; k < 3; ++k) {
    const auto& pf = F_[k];
    cd s = 0.0;
    const auto& c = pf.poly.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s / w + *it;
    for (const auto& part : pf.parts) {
      cd u = w / (1.0 - part.location * w);
      cd acc = 0.0;
      for (auto it = part.coeffs.rbegin(); it != part.coeffs.rend(); ++it) acc = (acc + *it) * u;
      s += acc;
    }
    out(k) = s;
  }
  return out;
}

Vec3c MinimalImmersion::primitive_at(cd z) const { return std::abs(z) <= 1.0 ? eval_F_z(z) : eval_F_w(1.0 / z); }

Geo MinimalImmersion::core(cd A, cd A1, cd B, cd B1, cd Phi, cd Phi1, double sign) const {
  Geo g;
  double D = std::norm(A) + std::norm(B);
  cd P2 = Phi * Phi;
  g.phi = Vec3c((B * B - A * A) / (2.0 * P2), cd(0.0, 1.0) * (B * B + A * A) / (2.0 * P2), A * B / P2) * sign;
  cd q = 2.0 * Phi1 / Phi;
  g.dphi = Vec3c((B * B1 - A * A1) / P2, cd(0.0, 1.0) * (B * B1 + A * A1) / P2, (A1 * B + A * B1) / P2) * sign -
           g.phi * q;
  g.rho = D * D / (4.0 * std::norm(P2));
  cd W = A1 * B - A * B1;
  g.K = -16.0 * std::norm(W) * std::norm(P2) / (D * D * D * D);
  cd ab = A * std::conj(B);
  g.n = Vec3(2.0 * ab.real(), 2.0 * ab.imag(), std::norm(A) - std::norm(B)) / D;
  Vec3c dN(A1 * std::conj(B) + std::conj(A) * B1, (A1 * std::conj(B) - std::conj(A) * B1) / cd(0.0, 1.0),
           A1 * std::conj(A) - B1 * std::conj(B));
  cd dD = A1 * std::conj(A) + B1 * std::conj(B);
  g.dn = (dN - g.n.cast<cd>() * dD) / D;
  return g;
}

Geo MinimalImmersion::at_z(cd z) const {
  auto a = poly_eval_and_derivative(ws_.a, z, 1);
  auto b = poly_eval_and_derivative(ws_.b, z, 1);
  auto f = poly_eval_and_derivative(ws_.phi[0], z, 1);
  Geo g = core(a[0], a[1], b[0], b[1], f[0], f[1], 1.0);
  g.z = z;
  g.X = eval_F_z(z).real() + base_;
  g.J = 1.0;
  return g;
}

Geo MinimalImmersion::at_w(cd w) const {
  auto A = poly_eval_and_derivative(Ar_, w, 1);
  auto B = poly_eval_and_derivative(Br_, w, 1);
  auto P = poly_eval_and_derivative(P1r_, w, 1);
  Geo g = core(A[0], A[1], B[0], B[1], w * P[0], P[0] + w * P[1], -1.0);
  g.z = 1.0 / w;
  g.X = eval_F_w(w).real() + base_;
  g.J = -1.0 / (w * w);
  return g;
}

Geo MinimalImmersion::at(cd z) const {
  if (std::abs(z) <= 1.0) return at_z(z);
  return rescale(at_w(1.0 / z), -1.0 / (z * z), 2.0 / (z * z * z));
}

Geo MinimalImmersion::at_end(const EndChart& c, cd zeta) const {
  if (c.at_infinity) return rescale(at_w(c.s * zeta), c.s);
  return rescale(at_z(c.p + c.s * zeta), c.s);
}

Vec3c MinimalImmersion::regular_primitive(const EndChart& c, cd zeta) const {
  Vec3c out;
  if (c.at_infinity) {
    cd w = c.s * zeta;
    for (int k = 0; k < 3; ++k) {
      const auto& pf = F_[k];
      cd s = pf.poly.coeff(0);
      for (int j = 2; j <= pf.poly.degree(); ++j) s += pf.poly.coeff(j) * std::pow(1.0 / w, j);
      for (const auto& part : pf.parts) {
        cd u = w / (1.0 - part.location * w);
        cd acc = 0.0;
        for (auto it = part.coeffs.rbegin(); it != part.coeffs.rend(); ++it) acc = (acc + *it) * u;
        s += acc;
      }
      out(k) = s;
    }
  } else {
    cd z = c.p + c.s * zeta;
    for (int k = 0; k < 3; ++k) out(k) = F_[k].regular_part(z, c.index - 1);
  }
  return out;
}

Vec3c MinimalImmersion::regular_primitive_derivative(const EndChart& c, cd zeta) const {
  Vec3c out;
  if (c.at_infinity) {
    cd w = c.s * zeta;
    for (int k = 0; k < 3; ++k) {
      cd s = 0.0;
      for (const auto& part : F_[k].parts) {
        cd den = 1.0 - part.location * w;
        cd u = w / den, du = 1.0 / (den * den);
        cd acc = 0.0;
        for (std::size_t j = part.coeffs.size(); j >= 1; --j) acc = acc * u + static_cast<double>(j) * part.coeffs[j - 1];
        s += acc * du;
      }
      out(k) = s * c.s;
    }
  } else {
    cd z = c.p + c.s * zeta;
    for (int k = 0; k < 3; ++k) out(k) = phi_pf_[k].regular_part(z, c.index - 1) * c.s;
  }
  return out;
}

EndChart MinimalImmersion::make_chart(int i) const {
  EndChart c;
  c.index = i;
  Vec3c C;
  if (i == 0) {
    c.at_infinity = true;
    for (int k = 0; k < 3; ++k) {
      if (F_[k].poly.degree() > 1) fail("non-planar end");
      C(k) = F_[k].poly.coeff(1);
    }
  } else {
    c.p = ws_.cfg.finite[i - 1];
    for (int k = 0; k < 3; ++k) {
      const auto& part = F_[k].parts.at(i - 1);
      if (part.coeffs.size() > 1) fail("non-planar end");
      C(k) = part.coeffs.empty() ? cd(0.0) : part.coeffs[0];
    }
  }
  double nC = C.norm();
  if (nC == 0.0) fail("non-planar end");
  c.s = nC / std::sqrt(2.0);
  c.a = C / c.s;
  c.isotropy = std::abs(c.a(0) * c.a(0) + c.a(1) * c.a(1) + c.a(2) * c.a(2));
  return c;
}

bool MinimalImmersion::near_end(cd z, double tol) const {
  for (cd p : ws_.cfg.finite)
    if (std::abs(z - p) < tol) return true;
  return std::abs(z) > 1.0 / tol;
}

Vec3 immersion_point(const MinimalImmersion& im, cd z) {
  if (im.near_end(z, 1e-9)) fail("evaluation at an end");
  return im.at(z).X;
}

Vec3 stereo_P(cd w) {
  double q = std::norm(w);
  return Vec3(2.0 * w.real(), 2.0 * w.imag(), q - 1.0) / (1.0 + q);
}
Vec3 stereo_P_inf() { return Vec3(0.0, 0.0, 1.0); }

Vec3 gauss_map(const MinimalImmersion& im, cd z) {
  cd a = im.weierstrass().a(z), b = im.weierstrass().b(z);
  if (b == cd(0.0)) return stereo_P_inf();
  return stereo_P(a / b);
}

Vec3 gauss_map_at_end(const MinimalImmersion& im, int i) {
  const auto& ws = im.weierstrass();
  if (i == 0) return stereo_P(ws.a.leading() / ws.b.leading());
  return gauss_map(im, ws.cfg.finite[i - 1]);
}

MetricCurvature metric_and_curvature(const MinimalImmersion& im, cd z) {
  if (im.near_end(z, 1e-9)) fail("evaluation at an end");
  Geo g = im.at(z);
  return {g.rho, g.K};
}

EndChart normalize_end_chart(const MinimalImmersion& im, int i) {
  if (i < 0 || i >= im.m()) fail("end index out of range");
  return im.end_chart(i);
}

Vec3 InvertedSurface::psi(cd z) const {
  if (im_->near_end(z, 1e-12)) return Vec3::Zero();
  Vec3 X = im_->at(z).X;
  return X / X.squaredNorm();
}

double InvertedSurface::density(cd z) const {
  Geo g = im_->at(z);
  return g.rho / std::pow(g.X.squaredNorm(), 2);
}

cd sphere_to_z(double theta, double phi) {
  // cos(theta) = (r^2 - 1)/(r^2 + 1)  =>  r = cot((pi - theta)/2)
  double r = std::tan(0.5 * theta);
  return std::polar(r, phi);
}

double min_distance_to_origin(const MinimalImmersion& im, int grid) {
  double best = 1e300;
  for (int i = 1; i < grid; ++i)
    for (int j = 0; j < 2 * grid; ++j) {
      cd z = sphere_to_z(kPi * i / grid, kPi * (j + 0.5) / grid);
      if (im.near_end(z, 1e-6)) continue;
      best = std::min(best, im.at(z).X.norm());
    }
  return best;
}

InvertedSurface invert(const MinimalImmersion& im) {
  if (min_distance_to_origin(im) < 1e-6) fail("inversion center on surface");
  return InvertedSurface(im);
}

Vec3 montiel_ros_Y(const MinimalImmersion& im, const Vec3& a, cd z) {
  Geo g = im.at(z);
  double q = g.dn.squaredNorm();
  if (q < 1e-20) fail("ramification point");
  double u = a.dot(g.n);
  cd du = a.cast<cd>().dot(g.dn);  // dot() conjugates its first argument; a is real
  Vec3c t = std::conj(du) * g.dn;
  return u * g.n + 2.0 * t.real() / q;
}

}  // namespace willmore
