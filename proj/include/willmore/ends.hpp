#pragma once
#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "willmore/algebra.hpp"

namespace willmore {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// Ends p_1 = infinity, p_2..p_m finite.
struct EndConfiguration {
  std::vector<cd> finite;
  int m() const { return static_cast<int>(finite.size()) + 1; }
  void validate(double separation = 1e-8) const;  // throws "duplicate ends"
  // Affine map z -> (z - p2) / (p3 - p2) so that p2 = 0, p3 = 1.
  EndConfiguration normalized() const;
};

// phi[0] = prod_{j>=2}(z - p_j); phi[i] omits the factor (z - p_{i+1}).
std::vector<Polynomial> phi_basis(const EndConfiguration& cfg);

MatC build_end_matrix(const EndConfiguration& cfg);

// Skew-symmetric LTL^T elimination with pivoting.
cd pfaffian(const MatC& M);

struct KernelBasis {
  std::vector<VecC> vectors;       // block-normalized when block_form is true
  Eigen::VectorXd singular_values;  // of M, descending
  int dimension = 0;
  bool block_form = false;
  std::vector<int> pivots;         // coordinates where the basis equals the identity
  double block_crosscheck = 0.0;   // residual of the (-A^{-1} C e_l, e_l) formula, when A is invertible
  bool block_formula_available = false;
};

KernelBasis kernel_basis(const MatC& M, double rank_tol = 1e-8);

struct WeierstrassSurface {
  EndConfiguration cfg;
  VecC ahat, bhat;
  Polynomial a, b;
  std::vector<Polynomial> phi;  // basis
  // Diagnostics gathered during assembly.
  double kernel_residual = 0.0;
  double max_planar_condition = 0.0;
  double max_residue = 0.0;
  double coprime_measure = 0.0;
  double min_end_value = 0.0;
};

WeierstrassSurface assemble_weierstrass(const EndConfiguration& cfg, const VecC& ahat, const VecC& bhat,
                                        double tol = 1e-9);

struct ObstructionVerdict {
  bool obstructed = false;
  std::string method;  // "dimension", "criterion", "torus-search"
  std::vector<cd> classes;  // conj(v1_j) v2_j after block normalization
  double min_objective = 0.0;
  VecC witness_a, witness_b;
  double witness_defect = 0.0;  // max_j ||a_j| - |b_j||
};

ObstructionVerdict equal_modulus_obstruction(const std::vector<VecC>& kernel, double grid_step = 1e-3);

}  // namespace willmore
