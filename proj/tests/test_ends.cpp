#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace willmore;
using fixtures::tau;

namespace {

MatC m4(cd t) { return build_end_matrix(EndConfiguration{{0.0, 1.0, t}}); }

cd pf_formula(cd t) { return 1.0 - 1.0 / t - 1.0 / (1.0 - t); }

EndConfiguration random_config(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> g;
  EndConfiguration c;
  for (int i = 1; i < m; ++i) c.finite.push_back({g(rng), g(rng)});
  return c;
}

// Largest principal angle between two subspaces given by column bases.
double subspace_angle(const MatC& A, const MatC& B) {
  Eigen::HouseholderQR<MatC> qa(A), qb(B);
  MatC Qa = qa.householderQ() * MatC::Identity(A.rows(), A.cols());
  MatC Qb = qb.householderQ() * MatC::Identity(B.rows(), B.cols());
  // Sine of the largest principal angle; acos of the cosine loses half the digits.
  MatC R = Qa - Qb * (Qb.adjoint() * Qa);
  return Eigen::JacobiSVD<MatC>(R).singularValues()(0);
}

}  // namespace

TEST(Ends, PhiBasis) {
  auto p2 = phi_basis(EndConfiguration{{0.0}});
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_EQ(p2[0].degree(), 1);
  EXPECT_EQ(p2[0].coeff(1), cd(1.0));
  EXPECT_EQ(p2[0].coeff(0), cd(0.0));
  EXPECT_EQ(p2[1].degree(), 0);
  EXPECT_EQ(p2[1].coeff(0), cd(1.0));

  auto p4 = phi_basis(fixtures::equianharmonic());
  Polynomial expect = Polynomial::from_roots({1.0, tau()});
  for (int k = 0; k <= 2; ++k) EXPECT_LT(std::abs(p4[1].coeff(k) - expect.coeff(k)), 1e-15);

  std::mt19937_64 rng(7);
  for (int m : {3, 5, 7}) {
    EndConfiguration c = random_config(rng, m);
    auto ph = phi_basis(c);
    Polynomial d1 = ph[0].derivative();
    for (int i = 1; i < m; ++i) {
      cd p = c.finite[i - 1];
      EXPECT_LT(std::abs(d1(p) - ph[i](p)), 1e-12 * (1 + std::abs(ph[i](p))));
    }
  }
}

TEST(Ends, DuplicateEndsRejected) {
  EXPECT_THROW(phi_basis(EndConfiguration{{0.0, 1.0, 1.0}}), Error);
  try {
    EndConfiguration{{0.0, 0.0}}.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "duplicate ends");
  }
}

TEST(Ends, EndMatrix) {
  MatC M2 = build_end_matrix(EndConfiguration{{0.0}});
  EXPECT_EQ(M2(0, 1), cd(-1.0));
  EXPECT_EQ(M2(1, 0), cd(1.0));
  EXPECT_EQ(M2(0, 0), cd(0.0));

  cd t(0.3, 1.7);
  MatC M = m4(t);
  // Displayed matrix: first row -1, entries 1/(p_i - p_j).
  for (int j = 1; j < 4; ++j) EXPECT_EQ(M(0, j), cd(-1.0));
  EXPECT_LT(std::abs(M(1, 2) - (-1.0)), 1e-15);
  EXPECT_LT(std::abs(M(1, 3) - (-1.0 / t)), 1e-15);
  EXPECT_LT(std::abs(M(2, 3) - 1.0 / (1.0 - t)), 1e-15);

  std::mt19937_64 rng(8);
  for (int m = 2; m <= 9; ++m) {
    MatC A = build_end_matrix(random_config(rng, m));
    EXPECT_EQ((A + A.transpose()).norm(), 0.0);
  }
}

TEST(Ends, Pfaffian) {
  MatC M2 = build_end_matrix(EndConfiguration{{0.0}});
  EXPECT_LT(std::abs(pfaffian(M2) - (-1.0)), 1e-15);
  EXPECT_LT(std::abs(pfaffian(m4(2.0)) - 1.5), 1e-14);
  EXPECT_LE(std::abs(pfaffian(m4(tau()))), 1e-12);
  EXPECT_LE(std::abs(pfaffian(m4(std::conj(tau())))), 1e-12);
  try {
    pfaffian(build_end_matrix(EndConfiguration{{0.0, 1.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "Pfaffian undefined");
  }
}

TEST(Ends, PfaffianSquaredIsDeterminant) {
  std::mt19937_64 rng(9);
  for (int m = 2; m <= 10; m += 2)
    for (int k = 0; k < 5; ++k) {
      MatC M = build_end_matrix(random_config(rng, m));
      cd pf = pfaffian(M), det = M.determinant();
      EXPECT_LE(std::abs(pf * pf - det), 1e-9 * std::abs(det)) << "m=" << m;
    }
}

TEST(Ends, KernelAtEquianharmonicPoint) {
  cd t = tau();
  KernelBasis kb = kernel_basis(m4(t));
  ASSERT_EQ(kb.dimension, 2);
  MatC K(4, 2), E(4, 2);
  K.col(0) = kb.vectors[0];
  K.col(1) = kb.vectors[1];
  E.col(0) << 1.0, -1.0, 1.0, 0.0;
  E.col(1) << 1.0 / t, -1.0, 0.0, 1.0;
  EXPECT_LT(subspace_angle(K, E), 1e-8);
  MatC M = m4(t);
  for (const auto& v : kb.vectors) EXPECT_LE((M * v).norm(), 1e-10 * M.norm() * v.norm());
  // Direct multiplication with the displayed vectors.
  EXPECT_LT((M * E.col(0)).norm(), 1e-14);
  EXPECT_LT((M * E.col(1)).norm(), 1e-14);
}

TEST(Ends, GenericKernelIsEmpty) {
  EXPECT_EQ(kernel_basis(m4(2.0)).dimension, 0);
  EXPECT_TRUE(kernel_basis(m4(cd(0.2, 0.9))).vectors.empty());
}

TEST(Ends, KernelDimensionIsNullity) {
  std::mt19937_64 rng(10);
  for (int m = 3; m <= 9; m += 2) {
    MatC M = build_end_matrix(random_config(rng, m));
    KernelBasis kb = kernel_basis(M);
    EXPECT_EQ(kb.dimension, 1) << "odd m has a kernel";
    for (const auto& v : kb.vectors) EXPECT_LE((M * v).norm(), 1e-10 * M.norm() * v.norm());
  }
}

TEST(Ends, AssemblyOfKernelMembers) {
  std::mt19937_64 rng(11);
  WeierstrassSurface ws = fixtures::random_member(rng);
  EXPECT_LE(ws.kernel_residual, 1e-10);
  // Planar-end derivative conditions a' phi_i - a phi_i' = 0 at each finite end.
  for (int i = 1; i < ws.cfg.m(); ++i) {
    cd p = ws.cfg.finite[i - 1];
    for (const Polynomial* q : {&ws.a, &ws.b}) {
      cd c = q->derivative()(p) * ws.phi[i](p) - (*q)(p) * ws.phi[i].derivative()(p);
      EXPECT_LE(std::abs(c), 1e-9 * std::max(1.0, q->norm()));
    }
    EXPECT_GT(std::abs(ws.a(p)), 0.0);
    EXPECT_GT(std::abs(ws.b(p)), 0.0);
  }
  EXPECT_EQ(ws.a.degree(), 3);
  EXPECT_EQ(ws.b.degree(), 3);
}

TEST(Ends, AssemblyRejectsNonKernelVectors) {
  EndConfiguration cfg = fixtures::equianharmonic();
  VecC a(4), b(4);
  a << 1.0, 0.0, 0.0, 0.0;
  b << 0.0, 1.0, 0.0, 0.0;
  try {
    assemble_weierstrass(cfg, a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "not in kernel");
  }
}

TEST(Ends, AssemblyRejectsProportionalPair) {
  EndConfiguration cfg = fixtures::equianharmonic();
  KernelBasis kb = kernel_basis(build_end_matrix(cfg));
  VecC a = kb.vectors[0] + kb.vectors[1];
  EXPECT_THROW(assemble_weierstrass(cfg, a, cd(2.0, 1.0) * a), Error);
}

TEST(Ends, ObstructionVerdicts) {
  VecC v(3);
  v << 1.0, cd(0.0, 2.0), -1.0;
  EXPECT_TRUE(equal_modulus_obstruction({v}).obstructed);

  KernelBasis kb = kernel_basis(m4(tau()));
  ObstructionVerdict ov = equal_modulus_obstruction(kb.vectors);
  EXPECT_TRUE(ov.obstructed);

  VecC e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  ObstructionVerdict w = equal_modulus_obstruction({e1, e2});
  EXPECT_FALSE(w.obstructed);
  EXPECT_LE(w.witness_defect, 1e-8);
  // Witness pair is independent and has equal moduli.
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(w.witness_a(j)), std::abs(w.witness_b(j)), 1e-8);
  MatC P(2, 2);
  P.col(0) = w.witness_a;
  P.col(1) = w.witness_b;
  EXPECT_GT(std::abs(P.determinant()), 1e-3);
  EXPECT_THROW(equal_modulus_obstruction({}), Error);
}
