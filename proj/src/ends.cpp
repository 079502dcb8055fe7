#include "willmore/ends.hpp"

#include <algorithm>
#include <cmath>

namespace willmore {

void EndConfiguration::validate(double separation) const {
  if (finite.empty()) fail("at least two ends required");
  for (cd p : finite)
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) fail("non-finite end position");
  for (std::size_t i = 0; i < finite.size(); ++i)
    for (std::size_t j = i + 1; j < finite.size(); ++j)
      if (std::abs(finite[i] - finite[j]) <= separation) fail("duplicate ends");
}

EndConfiguration EndConfiguration::normalized() const {
  validate();
  if (finite.size() < 2) return *this;
  cd p2 = finite[0], d = finite[1] - finite[0];
  EndConfiguration out;
  for (cd p : finite) out.finite.push_back((p - p2) / d);
  return out;
}

std::vector<Polynomial> phi_basis(const EndConfiguration& cfg) {
  cfg.validate();
  std::vector<Polynomial> phi;
  phi.push_back(Polynomial::from_roots(cfg.finite));
  for (std::size_t i = 0; i < cfg.finite.size(); ++i) {
    std::vector<cd> r;
    for (std::size_t j = 0; j < cfg.finite.size(); ++j)
      if (j != i) r.push_back(cfg.finite[j]);
    phi.push_back(Polynomial::from_roots(r));
  }
  return phi;
}

MatC build_end_matrix(const EndConfiguration& cfg) {
  cfg.validate();
  int m = cfg.m();
  MatC M = MatC::Zero(m, m);
  for (int j = 1; j < m; ++j) {
    M(0, j) = -1.0;
    M(j, 0) = 1.0;
  }
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < m; ++j)
      if (i != j) M(i, j) = 1.0 / (cfg.finite[i - 1] - cfg.finite[j - 1]);
  return M;
}

cd pfaffian(const MatC& M0) {
  int n = static_cast<int>(M0.rows());
  if (n % 2 != 0) fail("Pfaffian undefined");
  if (n == 0) return 1.0;
  MatC A = M0;
  cd pf = 1.0;
  for (int k = 0; k < n - 1; k += 2) {
    int kp = k + 1;
    double best = std::abs(A(k + 1, k));
    for (int i = k + 2; i < n; ++i)
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        kp = i;
      }
    if (kp != k + 1) {
      A.row(k + 1).swap(A.row(kp));
      A.col(k + 1).swap(A.col(kp));
      pf = -pf;
    }
    if (A(k + 1, k) == cd(0.0)) return 0.0;
    pf *= A(k, k + 1);
    if (k + 2 < n) {
      Eigen::VectorXcd tau = A.row(k).segment(k + 2, n - k - 2).transpose() / A(k, k + 1);
      Eigen::VectorXcd col = A.col(k + 1).segment(k + 2, n - k - 2);
      A.block(k + 2, k + 2, n - k - 2, n - k - 2) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

namespace {

// Rows of N (m x k) where the k x k minor is best conditioned; prefers the trailing rows.
std::vector<int> choose_pivots(const MatC& N) {
  int m = static_cast<int>(N.rows()), k = static_cast<int>(N.cols());
  std::vector<int> tail;
  for (int i = m - k; i < m; ++i) tail.push_back(i);
  MatC T = N.bottomRows(k);
  Eigen::JacobiSVD<MatC> svd(T);
  auto s = svd.singularValues();
  if (k > 0 && s(k - 1) > 1e-3 * s(0)) return tail;
  Eigen::ColPivHouseholderQR<MatC> qr(N.transpose());
  std::vector<int> piv;
  for (int i = 0; i < k; ++i) piv.push_back(qr.colsPermutation().indices()(i));
  std::sort(piv.begin(), piv.end());
  return piv;
}

MatC block_normalize(const MatC& N, const std::vector<int>& piv) {
  int k = static_cast<int>(N.cols());
  MatC S(k, k);
  for (int i = 0; i < k; ++i) S.row(i) = N.row(piv[i]);
  return N * S.inverse();
}

}  // namespace

KernelBasis kernel_basis(const MatC& M, double rank_tol) {
  KernelBasis kb;
  int m = static_cast<int>(M.rows());
  Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullV);
  kb.singular_values = svd.singularValues();
  double smax = m > 0 ? kb.singular_values(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < m; ++i)
    if (kb.singular_values(i) > rank_tol * smax) ++rank;
  kb.dimension = m - rank;
  if (kb.dimension == 0) return kb;
  MatC N = svd.matrixV().rightCols(kb.dimension);
  kb.pivots = choose_pivots(N);
  MatC B = block_normalize(N, kb.pivots);
  kb.block_form = true;
  for (int l = 0; l < kb.dimension; ++l) kb.vectors.push_back(B.col(l));

  // Cross-check against the closed block formula with the pivot coordinates moved last.
  int k = kb.dimension;
  std::vector<int> rest;
  for (int i = 0; i < m; ++i)
    if (std::find(kb.pivots.begin(), kb.pivots.end(), i) == kb.pivots.end()) rest.push_back(i);
  int r = static_cast<int>(rest.size());
  if (r > 0) {
    MatC A(r, r), C(r, k);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) A(i, j) = M(rest[i], rest[j]);
      for (int j = 0; j < k; ++j) C(i, j) = M(rest[i], kb.pivots[j]);
    }
    Eigen::JacobiSVD<MatC> sa(A);
    auto s = sa.singularValues();
    if (s(r - 1) > 1e-8 * s(0)) {
      kb.block_formula_available = true;
      MatC X = -A.fullPivLu().solve(C);
      double err = 0.0;
      for (int l = 0; l < k; ++l)
        for (int i = 0; i < r; ++i) err = std::max(err, std::abs(X(i, l) - B(rest[i], l)));
      kb.block_crosscheck = err;
    }
  } else {
    kb.block_formula_available = true;
  }
  return kb;
}

namespace {

double poly_scale_at(const Polynomial& p, cd z) {
  double s = 0.0, zk = 1.0;
  for (int k = 0; k <= p.degree(); ++k, zk *= std::abs(z)) s += std::abs(p.coeff(k)) * zk;
  return s;
}

}  // namespace

WeierstrassSurface assemble_weierstrass(const EndConfiguration& cfg, const VecC& ahat, const VecC& bhat,
                                        double tol) {
  cfg.validate();
  int m = cfg.m();
  if (ahat.size() != m || bhat.size() != m) fail("coefficient vectors must have length m");
  MatC M = build_end_matrix(cfg);
  double mnorm = M.cwiseAbs().maxCoeff();
  WeierstrassSurface ws;
  ws.cfg = cfg;
  ws.ahat = ahat;
  ws.bhat = bhat;
  double ra = (M * ahat).norm() / std::max(mnorm * ahat.norm(), 1e-300);
  double rb = (M * bhat).norm() / std::max(mnorm * bhat.norm(), 1e-300);
  ws.kernel_residual = std::max(ra, rb);
  if (ahat.norm() == 0.0 || bhat.norm() == 0.0 || ws.kernel_residual > 1e-10) fail("not in kernel");

  ws.phi = phi_basis(cfg);
  ws.a = ws.phi[0] * ahat(0);
  ws.b = ws.phi[0] * bhat(0);
  for (int i = 1; i < m; ++i) {
    ws.a = ws.a + ws.phi[i] * ahat(i);
    ws.b = ws.b + ws.phi[i] * bhat(i);
  }

  // Non-vanishing at every end, with the leading coefficient playing the role at infinity.
  double min_rel = std::min(std::abs(ahat(0)) / ahat.norm(), std::abs(bhat(0)) / bhat.norm());
  for (int i = 1; i < m; ++i) {
    cd p = cfg.finite[i - 1];
    min_rel = std::min(min_rel, std::abs(ws.a(p)) / poly_scale_at(ws.a, p));
    min_rel = std::min(min_rel, std::abs(ws.b(p)) / poly_scale_at(ws.b, p));
  }
  ws.min_end_value = min_rel;
  if (min_rel <= tol) fail("end degeneracy: a or b vanishes at an end");

  ws.coprime_measure = sylvester_conditioning(ws.a, ws.b);
  if (ws.coprime_measure <= tol) fail("common zero of a and b (non-immersed point)");

  // (a^2 / phi_i^2)'(p_i) = 0 reduces to a'(p_i) phi_i(p_i) - a(p_i) phi_i'(p_i) = 0.
  double cond = 0.0;
  for (int i = 1; i < m; ++i) {
    cd p = cfg.finite[i - 1];
    auto fi = poly_eval_and_derivative(ws.phi[i], p, 1);
    for (const Polynomial* q : {&ws.a, &ws.b}) {
      auto v = poly_eval_and_derivative(*q, p, 1);
      double scale = std::abs(v[1] * fi[0]) + std::abs(v[0] * fi[1]);
      cond = std::max(cond, std::abs(v[1] * fi[0] - v[0] * fi[1]) / std::max(scale, 1e-300));
    }
  }
  ws.max_planar_condition = cond;

  std::vector<Pole> poles;
  for (cd p : cfg.finite) poles.push_back({p, 2});
  Polynomial a2 = ws.a * ws.a, b2 = ws.b * ws.b;
  std::vector<Polynomial> nums = {(b2 - a2) * cd(0.5), (b2 + a2) * cd(0.0, 0.5), ws.a * ws.b};
  double res = 0.0;
  for (const auto& num : nums) {
    auto pf = partial_fractions(RationalFunction(num, 1.0, poles));
    // Scale over the whole component: a principal part may vanish entirely.
    double sc = 0.0;
    for (const auto& part : pf.parts)
      for (cd c : part.coeffs) sc = std::max(sc, std::abs(c));
    for (const auto& part : pf.parts) res = std::max(res, std::abs(part.residue()) / std::max(sc, 1e-300));
  }
  ws.max_residue = res;
  if (cond > tol || res > tol) fail("nonzero residue");
  return ws;
}

ObstructionVerdict equal_modulus_obstruction(const std::vector<VecC>& kernel, double grid_step) {
  ObstructionVerdict v;
  int k = static_cast<int>(kernel.size());
  if (k == 0) fail("kernel dimension 0");
  if (k == 1) {
    v.obstructed = true;
    v.method = "dimension";
    return v;
  }
  if (k > 2) fail("kernel dimension above 2 not supported");
  int m = static_cast<int>(kernel[0].size());
  MatC N(m, 2);
  N.col(0) = kernel[0];
  N.col(1) = kernel[1];
  auto piv = choose_pivots(N);
  MatC B = block_normalize(N, piv);
  // On the pivot rows |a_j| = |b_j| forces equal moduli of the coefficients, so with
  // a = v1 + r e^{i th} v2, b = v1 + r e^{i ps} v2 the remaining rows reduce to
  // Re(w_j (e^{i th} - e^{i ps})) = 0 independently of r.
  std::vector<cd> w;
  double sc = 0.0;
  for (int j = 0; j < m; ++j) {
    cd c = std::conj(B(j, 0)) * B(j, 1);
    if (j == piv[0] || j == piv[1]) c = 0.0;
    w.push_back(c);
    sc = std::max(sc, std::abs(c));
  }
  v.classes = w;
  auto objective = [&](cd delta) {
    double g = 0.0;
    for (cd c : w) g = std::max(g, std::abs((c * delta).real()));
    return sc > 0.0 ? g / (std::abs(delta) * sc) : 0.0;
  };
  auto finish_witness = [&](double th, double ps) {
    v.obstructed = false;
    v.witness_a = B.col(0) + std::polar(1.0, th) * B.col(1);
    v.witness_b = B.col(0) + std::polar(1.0, ps) * B.col(1);
    double d = 0.0;
    for (int j = 0; j < m; ++j) d = std::max(d, std::abs(std::abs(v.witness_a(j)) - std::abs(v.witness_b(j))));
    v.witness_defect = d;
  };

  if (sc > 0.0) {
    bool has_real = false, has_imag = false;
    for (cd c : w) {
      if (std::abs(c) <= 1e-9 * sc) continue;
      if (std::abs(c.imag()) <= 1e-12 * sc) has_real = true;
      if (std::abs(c.real()) <= 1e-12 * sc) has_imag = true;
    }
    if (has_real && has_imag) {
      v.obstructed = true;
      v.method = "criterion";
      v.min_objective = 1.0;
      return v;
    }
  }

  v.method = "torus-search";
  int n = static_cast<int>(std::ceil(2.0 * kPi / grid_step));
  std::vector<cd> e(n);
  for (int i = 0; i < n; ++i) e[i] = std::polar(1.0, 2.0 * kPi * i / n);
  double best = 1e300, best_sep = 0.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd d = e[i] - e[j];
      double sep = std::abs(d);
      if (sep < 1e-3) continue;
      double g = objective(d);
      if (g < best - 1e-14 || (g <= best + 1e-14 && sep > best_sep + 1e-12)) {
        best = g;
        best_sep = sep;
        bi = i;
        bj = j;
      }
    }
  // Golden-section refinement over the direction of e^{i th} - e^{i ps}.
  double dir = std::arg(e[bi] - e[bj]);
  double lo = dir - 2.0 * kPi / n, hi = dir + 2.0 * kPi / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    if (objective(std::polar(1.0, x1)) < objective(std::polar(1.0, x2)))
      hi = x2;
    else
      lo = x1;
  }
  double dref = 0.5 * (lo + hi);
  double gref = objective(std::polar(1.0, dref));
  v.min_objective = std::min(best, gref);
  if (v.min_objective <= 1e-9) {
    if (gref < best)
      finish_witness(dref, dref - kPi);
    else
      finish_witness(2.0 * kPi * bi / n, 2.0 * kPi * bj / n);
  } else {
    v.obstructed = true;
  }
  return v;
}

}  // namespace willmore
