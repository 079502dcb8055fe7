#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace willmore;

namespace {

std::vector<double> eps_ladder(const MinimalImmersion& im, int end) {
  double e0 = max_chart_radius(im, end);
  std::vector<double> eps;
  for (int k = 3; k <= 8; ++k) eps.push_back(e0 * std::pow(2.0, -k));
  return eps;
}

const InvariantReport& tetra_invariants() {
  static const InvariantReport r = geometric_invariants(fixtures::tetra(), {});
  return r;
}

}  // namespace

TEST(NormalSpan, RankAndIndex) {
  const auto& im = fixtures::tetra();
  NormalSpan ns = normal_span(im);
  EXPECT_EQ(ns.d, 3);
  std::vector<Vec3> col = {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  EXPECT_EQ(normal_span(col).d, 1);
  IndexReport r = index_report(im, {}, false);
  EXPECT_EQ(r.index, 1);
  EXPECT_EQ(r.index, r.m - r.d);
  EXPECT_EQ(r.N, r.m - r.d);
  IndexReport s = index_report_round_sphere();
  EXPECT_EQ(s.index, 0);
}

TEST(NormalSpan, IndexOneAcrossKernelFamily) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    MinimalImmersion im(fixtures::random_member(rng));
    NormalSpan ns = normal_span(im);
    EXPECT_GE(ns.d, 2);
    EXPECT_EQ(ns.d, 3);
    EXPECT_EQ(log_jacobi_kernel(ns.normals).N, 4 - ns.d);
  }
}

TEST(NormalSpan, SymmetricMemberIsTetrahedral) {
  MinimalImmersion im = build_immersion(fixtures::symmetric());
  NormalSpan ns = normal_span(im);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) EXPECT_NEAR(ns.normals[i].dot(ns.normals[j]), -1.0 / 3.0, 1e-6);
  Vec3 sum = Vec3::Zero();
  for (const Vec3& n : ns.normals) sum += n;
  EXPECT_LT(sum.norm(), 1e-6);
}

TEST(LogJacobiKernel, Basis) {
  NormalSpan ns = normal_span(fixtures::tetra());
  LogJacobiKernel k = log_jacobi_kernel(ns.normals);
  ASSERT_EQ(k.N, 1);
  Eigen::VectorXd b = k.basis[0];
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(b(i), b(0), 1e-6);
  EXPECT_NEAR(b.norm(), 1.0, 1e-12);
  // Null-space oracle: the normals annihilate the basis vector.
  Vec3 s = Vec3::Zero();
  for (int i = 0; i < 4; ++i) s += b(i) * ns.normals[i];
  EXPECT_LT(s.norm(), 1e-10);
  std::vector<Vec3> e = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  EXPECT_EQ(log_jacobi_kernel(e).N, 0);
}

TEST(OptimalDirection, ClosedForm) {
  OptimalDirection z = optimal_direction(0.0, 2.0);
  EXPECT_EQ(z.v, 0.0);
  EXPECT_EQ(z.value, 0.0);
  double c2 = 3.7;
  OptimalDirection o = optimal_direction(4.0, c2);
  EXPECT_NEAR(o.v, -8.0 * kPi / c2, 1e-14);
  EXPECT_NEAR(o.value, -128.0 * kPi * kPi / c2, 1e-12);
  for (double b : {-2.0, 0.1, 5.0}) EXPECT_LT(optimal_direction(b, c2).value, 0.0);
  EXPECT_THROW(optimal_direction(1.0, 0.0), Error);
  EXPECT_THROW(optimal_direction(1.0, -1.0), Error);
}

TEST(SecondVariation, ReducesToAreaTermWithoutHarmonicPart) {
  const auto& im = fixtures::tetra();
  double c2 = tetra_invariants().cx2;
  VariationField f;
  f.v = 0.6;
  auto r = second_variation(im, {}, f, SecondVariationMode::Bulk);
  EXPECT_LE(fixtures::rel(r.value, 2.0 * 0.36 * c2), 1e-8);
  f.jacobi = Vec3(0.3, -0.7, 0.2);  // bounded Jacobi field, L(a.n) = 0
  auto j = second_variation(im, {}, f, SecondVariationMode::Bulk);
  EXPECT_LE(fixtures::rel(j.value, 2.0 * 0.36 * c2), 1e-8);
}

TEST(SecondVariation, BulkMatchesBoundary) {
  const auto& im = fixtures::tetra();
  VariationField f;
  f.v = 0.7;
  f.log_weights = {0.5, -0.3, 0.2};
  f.poles = {cd(0.1, 0.2), cd(0.3, -0.1), 0.0, cd(-0.2, 0.4)};
  f.constant = 0.3;
  f.jacobi = Vec3(0.2, 0.1, -0.4);
  auto b = second_variation(im, {}, f, SecondVariationMode::Bulk);
  auto c = second_variation(im, {}, f, SecondVariationMode::Boundary);
  EXPECT_LE(std::abs(b.value - c.value), 1e-4 * std::abs(b.value) + 1e-8);
  VariationField g = f;
  g.local.push_back(LocalTerm{1});
  g.local.back().poly = {0.2};
  EXPECT_THROW(second_variation(im, {}, g, SecondVariationMode::Bulk), Error);
}

TEST(SecondVariation, TranslationInsensitivity) {
  const auto& im = fixtures::tetra();
  VariationField tr;
  tr.translation = Vec3(0.3, -0.5, 0.8);
  double scale = 2.0 * tr.translation.squaredNorm() * tetra_invariants().cx2;
  auto t = second_variation(im, {}, tr, SecondVariationMode::Boundary);
  EXPECT_LE(std::abs(t.value), 1e-2 * scale);

  VariationField f;
  f.v = 0.4;
  f.log_weights = {0.2, 0.1, -0.3};
  VariationField g = f;
  g.translation = tr.translation;
  auto a = second_variation(im, {}, f, SecondVariationMode::Boundary);
  auto b = second_variation(im, {}, g, SecondVariationMode::Boundary);
  EXPECT_LE(std::abs(a.value - b.value), 1e-2 * std::max(1.0, std::abs(a.value)));
}

TEST(Ibp, AntisymmetryAndClosedForm) {
  const auto& im = fixtures::tetra();
  LocalTerm u{2}, v{2};
  u.pole = cd(-0.3, 0.8);
  u.log_weight = 0.6;
  u.poly = {cd(0.2, 0.0), cd(0.1, 0.3)};
  v.pole = cd(0.5, 0.1);
  v.log_weight = -0.9;
  v.poly = {cd(-0.4, 0.0), cd(0.6, -0.2), cd(0.1, 0.7)};
  v.quad = -0.3;
  IbpResult same = ibp_residual(im, u, u, {});
  EXPECT_EQ(same.numeric, 0.0);
  IbpResult uv = ibp_residual(im, u, v, {}), vu = ibp_residual(im, v, u, {});
  EXPECT_LE(uv.residual, 1e-6 * uv.scale);
  EXPECT_NEAR(uv.numeric, -vu.numeric, 1e-9 * uv.scale);

  // Pure logarithm against a constant c: magnitude 2 pi c.
  LocalTerm l{1}, c{1};
  l.log_weight = 1.0;
  c.poly = {0.7};
  IbpResult lc = ibp_residual(im, l, c, {});
  EXPECT_LE(lc.residual, 1e-6 * lc.scale);
  EXPECT_NEAR(std::abs(lc.numeric), 2.0 * kPi * 0.7, 1e-6);
}

TEST(EndExpansion, DecayRates) {
  const auto& im = fixtures::tetra();
  for (int e : {0, 3}) {
    auto a = area_term_residual(im, e, eps_ladder(im, e));
    EXPECT_GE(a.exponent, 0.9);
    LocalTerm f{e};
    f.v = 1.0;
    f.log_weight = 1.0;
    EXPECT_GE(end_expansion_residual(im, f, eps_ladder(im, e)).exponent, 0.9);
    LocalTerm s{e};
    s.poly = {0.5, cd(0.2, 0.1)};
    auto t = end_expansion_residual(im, s, eps_ladder(im, e));
    // A purely smooth term leaves only the O(eps^4) tail.
    EXPECT_GE(t.exponent, 3.5);
    EXPECT_LE(std::abs(t.residual.back()), 1e-8);
  }
  EXPECT_THROW(fit_exponent({0.1, 0.05, 0.025}, {1.0, 2.0, 4.0}), Error);
  EXPECT_NEAR(fit_exponent({0.1, 0.05, 0.025}, {1e-2, 2.5e-3, 6.25e-4}), 2.0, 1e-12);
}

TEST(Ramification, EndsAreTheRamificationSet) {
  const auto& im = fixtures::tetra();
  auto R = ramification_divisor(im);
  int total = 0;
  bool inf = false;
  for (const auto& r : R) {
    total += r.order;
    if (r.at_infinity) {
      inf = true;
      continue;
    }
    double best = 1e300;
    for (cd p : im.weierstrass().cfg.finite) best = std::min(best, std::abs(p - r.point));
    EXPECT_LT(best, 1e-8);
  }
  EXPECT_EQ(total, 4);
  EXPECT_TRUE(inf);
  EXPECT_EQ(R.size(), 4u);
}

TEST(Symmetry, Residuals) {
  const SurfaceRecord& rec = fixtures::symmetric();
  ASSERT_TRUE(rec.symmetry.has_value());
  const SymmetryData& sd = *rec.symmetry;
  EXPECT_LE(sd.residual.immersion, 1e-8);
  EXPECT_LE(sd.residual.normals, 1e-8);
  MinimalImmersion im = build_immersion(rec);
  SymmetryResidual id = symmetry_residual(im, Eigen::Matrix3d::Identity(), ChartMap{}, {});
  EXPECT_EQ(id.immersion, 0.0);
  // The shifted tetrahedral member is not quarter-turn symmetric.
  SymmetryResidual gen = symmetry_residual(fixtures::tetra(), sd.S, sd.map, sd.cycle);
  EXPECT_GT(gen.immersion, 1e-2);
}

TEST(LogJacobi, RecoversWeights) {
  const auto& im = fixtures::tetra();
  Eigen::VectorXd a = Eigen::VectorXd::Ones(4);
  LogJacobiOptions o;
  o.degree = 24;
  o.tolerance = 1e-3;
  LogJacobiSolution s = solve_log_jacobi(im, a, o);
  EXPECT_LE(s.residual, 1e-3);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s.beta(i), 1.0, 1e-4);
  Eigen::VectorXd bad(4);
  bad << 1.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(solve_log_jacobi(im, bad, o), Error);
}

TEST(Sobolev, ProxySettles) {
  VariationField f;
  f.v = 1.0;
  f.log_weights = {1.0, -0.5, 0.5};
  SobolevProxy p = sobolev_proxy(fixtures::tetra(), {}, f);
  EXPECT_LE(p.growth, 0.01);
  for (double v : p.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Invariance, AmbientRotation) {
  // SU(2) acting on (a, b) rotates the Gauss map and phi; ends and all invariants stay put.
  const auto& ws = fixtures::tetra().weierstrass();
  cd al = std::polar(std::cos(0.4), 0.3), be = std::polar(std::sin(0.4), -1.1);
  VecC a2 = al * ws.ahat + be * ws.bhat, b2 = -std::conj(be) * ws.ahat + std::conj(al) * ws.bhat;
  MinimalImmersion im1(ws), im2(assemble_weierstrass(ws.cfg, a2, b2));
  NormalSpan n1 = normal_span(im1), n2 = normal_span(im2);
  EXPECT_EQ(n1.d, n2.d);
  EXPECT_EQ(log_jacobi_kernel(n1.normals).N, log_jacobi_kernel(n2.normals).N);
  for (int i = 0; i < 3; ++i) EXPECT_LE(fixtures::rel(n2.singular_values(i), n1.singular_values(i)), 1e-8);
  for (cd z : {cd(0.3, 0.2), cd(-1.2, 0.7), cd(2.0, -1.5)})
    EXPECT_LE(fixtures::rel(im2.at(z).X.norm(), im1.at(z).X.norm()), 1e-10);
  InvariantReport r1 = geometric_invariants(im1, {}), r2 = geometric_invariants(im2, {});
  EXPECT_LE(fixtures::rel(r2.total_curvature, r1.total_curvature), 1e-8);
  EXPECT_LE(fixtures::rel(r2.willmore, r1.willmore), 1e-8);
  EXPECT_LE(fixtures::rel(r2.cx2, r1.cx2), 1e-8);
}
