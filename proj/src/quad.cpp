#include "willmore/quad.hpp"

#include <cmath>

namespace willmore {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

Partition make_partition(const MinimalImmersion& im, const QuadratureScheme& qs) {
  const auto& fin = im.weierstrass().cfg.finite;
  Partition P;
  int m = im.m();
  P.r_in.assign(m, 0.0);
  P.r_out.assign(m, 0.0);
  double Rf = 0.0;
  for (std::size_t i = 0; i < fin.size(); ++i) {
    double d = 1.0 + std::abs(fin[i]);
    for (std::size_t j = 0; j < fin.size(); ++j)
      if (j != i) d = std::min(d, std::abs(fin[i] - fin[j]));
    P.r_out[i + 1] = qs.bump_fraction * d;
    P.r_in[i + 1] = qs.bump_ratio * P.r_out[i + 1];
    Rf = std::max(Rf, std::abs(fin[i]) + P.r_out[i + 1]);
  }
  P.r_out[0] = 1.0 / (1.5 * Rf);
  P.r_in[0] = qs.bump_ratio * P.r_out[0];
  P.R1 = 1.2 * qs.chart_split * Rf;
  P.R2 = 2.0 * P.R1;
  return P;
}

double end_weight(const Partition& P, int i, double r) {
  return 1.0 - smooth_step((r - P.r_in[i]) / (P.r_out[i] - P.r_in[i]));
}

double zdisk_weight(const Partition& P, double r) { return 1.0 - smooth_step((r - P.R1) / (P.R2 - P.R1)); }

double max_chart_radius(const MinimalImmersion& im, int end, const QuadratureScheme& qs) {
  Partition P = make_partition(im, qs);
  return P.r_in.at(end) / im.end_chart(end).s;
}

namespace {

double background_weight(const MinimalImmersion& im, const Partition& P, cd z, double winv) {
  const auto& fin = im.weierstrass().cfg.finite;
  double s = end_weight(P, 0, winv);
  for (std::size_t i = 0; i < fin.size(); ++i) s += end_weight(P, static_cast<int>(i) + 1, std::abs(z - fin[i]));
  return 1.0 - s;
}

struct Panel {
  double a, b;
};

// Radial panels for end pieces, outermost first.
std::vector<Panel> end_panels(double r_in, double r_out, double eps, const QuadratureScheme& qs) {
  std::vector<Panel> p;
  for (int k = 0; k < qs.transition_panels; ++k) {
    double a = r_out - (r_out - r_in) * (k + 1) / qs.transition_panels;
    double b = r_out - (r_out - r_in) * k / qs.transition_panels;
    p.push_back({a, b});
  }
  double b = r_in;
  if (eps > 0.0) {
    if (eps >= r_in) fail("cut-out radius exceeds the end chart");
    while (b / 2.0 > eps * 1.0000001) {
      p.push_back({b / 2.0, b});
      b /= 2.0;
    }
    p.push_back({eps, b});
  } else {
    for (int k = 0; k < qs.inner_rings; ++k) {
      p.push_back({b / 2.0, b});
      b /= 2.0;
    }
    p.push_back({0.0, b});
  }
  return p;
}

struct LevelResult {
  double total;
  std::vector<std::vector<double>> ring_contrib;  // per end, per panel
};

LevelResult integrate_level(const MinimalImmersion& im, const Integrand& f, const QuadratureScheme& qs,
                            const Partition& P, double eps, int order, int nang, int nbg) {
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  std::vector<double> pieces;
  LevelResult res;
  int m = im.m();
  res.ring_contrib.assign(m, {});
  for (int i = 0; i < m; ++i) {
    const EndChart& ch = im.end_chart(i);
    auto panels = end_panels(P.r_in[i] / ch.s, P.r_out[i] / ch.s, eps, qs);
    for (const auto& pn : panels) {
      std::vector<double> acc;
      for (int k = 0; k < order; ++k) {
        double r = 0.5 * (pn.a + pn.b) + 0.5 * (pn.b - pn.a) * gx[k];
        double wr = 0.5 * (pn.b - pn.a) * gw[k] * r;
        double psi = end_weight(P, i, ch.s * r);
        if (psi == 0.0) continue;
        for (int j = 0; j < nang; ++j) {
          cd zeta = std::polar(r, 2.0 * kPi * (j + 0.5) / nang);
          Geo g = im.at_end(ch, zeta);
          double val = f(SamplePoint{g, i, zeta, ch.at_infinity});
          acc.push_back(val * g.rho * psi * wr * 2.0 * kPi / nang);
        }
      }
      double c = pairwise_sum(acc);
      res.ring_contrib[i].push_back(c);
      pieces.push_back(c);
    }
  }
  // Background: z-disk and w-disk.
  for (int chart = 0; chart < 2; ++chart) {
    double R = chart == 0 ? P.R2 : 1.0 / P.R1;
    std::vector<double> acc;
    for (int pnl = 0; pnl < qs.bg_panels; ++pnl) {
      double a = R * pnl / qs.bg_panels, b = R * (pnl + 1) / qs.bg_panels;
      for (int k = 0; k < order; ++k) {
        double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
        double wr = 0.5 * (b - a) * gw[k] * r;
        double rz = chart == 0 ? r : 1.0 / r;
        double chi = zdisk_weight(P, rz);
        if (chart == 1) chi = 1.0 - chi;
        if (chi == 0.0) continue;
        for (int j = 0; j < nbg; ++j) {
          cd loc = std::polar(r, 2.0 * kPi * (j + 0.5) / nbg);
          cd z = chart == 0 ? loc : 1.0 / loc;
          double wt = chi * background_weight(im, P, z, 1.0 / std::abs(z));
          if (wt <= 0.0) continue;
          Geo g = chart == 0 ? im.at_z(loc) : im.at_w(loc);
          double val = f(SamplePoint{g, -1, loc, chart == 1});
          acc.push_back(val * g.rho * wt * wr * 2.0 * kPi / nbg);
        }
      }
    }
    pieces.push_back(pairwise_sum(acc));
  }
  res.total = pairwise_sum(pieces);
  return res;
}

}  // namespace

IntegralResult integrate_surface(const MinimalImmersion& im, const Integrand& f, const QuadratureScheme& qs,
                                 double eps) {
  Partition P = make_partition(im, qs);
  LevelResult lo = integrate_level(im, f, qs, P, eps, qs.radial_order, qs.angular_nodes, qs.bg_angular);
  LevelResult hi = integrate_level(im, f, qs, P, eps, 2 * qs.radial_order, 2 * qs.angular_nodes, 2 * qs.bg_angular);
  if (eps == 0.0) {
    for (int i = 0; i < im.m(); ++i) {
      const auto& c = hi.ring_contrib[i];
      std::size_t n = c.size();
      if (n < 3) continue;
      double inner = std::abs(c[n - 2]), prev = std::abs(c[n - 3]);
      double scale = std::max(std::abs(hi.total), 1e-300);
      if (inner > 1e-8 * scale && inner > 0.9 * prev) {
        double expo = std::log2(std::max(prev, 1e-300) / inner);
        fail("non-integrable tail at end " + std::to_string(i) + " (ring decay exponent " +
             std::to_string(expo) + ")");
      }
    }
  }
  return {hi.total, std::abs(hi.total - lo.total)};
}

double circle_integral(const MinimalImmersion& im, int end, double eps, const CircleIntegrand& f, int nodes) {
  if (nodes < 256) nodes = 256;
  if (eps <= 0.0 || eps >= max_chart_radius(im, end)) fail("circle radius outside the end chart");
  const EndChart& ch = im.end_chart(end);
  std::vector<double> v(nodes);
  for (int j = 0; j < nodes; ++j) {
    cd zeta = std::polar(eps, 2.0 * kPi * j / nodes);
    v[j] = f(im.at_end(ch, zeta), zeta) * eps * 2.0 * kPi / nodes;
  }
  return pairwise_sum(v);
}

InvariantReport geometric_invariants(const MinimalImmersion& im, const QuadratureScheme& qs) {
  InvariantReport r;
  auto K = integrate_surface(im, [](const SamplePoint& s) { return s.geo.K; }, qs);
  r.total_curvature = K.value;
  r.total_curvature_err = K.error;
  r.willmore = 4.0 * kPi - K.value;
  r.willmore_err = K.error;
  auto c = integrate_surface(
      im,
      [](const SamplePoint& s) {
        double x2 = s.geo.X.squaredNorm();
        return s.geo.K * s.geo.K * x2 * x2 - 4.0 * s.geo.K * x2;
      },
      qs);
  r.cx2 = c.value;
  r.cx2_err = c.error;
  return r;
}

}  // namespace willmore
