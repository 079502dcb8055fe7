#pragma once
#include <utility>
#include <vector>

#include "willmore/common.hpp"

namespace willmore {

// Complex polynomial, ascending coefficients. Exact zeros at the top are trimmed.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cd> coeffs);
  static Polynomial constant(cd c) { return Polynomial({c}); }
  static Polynomial monomial(int k, cd c = 1.0);
  static Polynomial from_roots(const std::vector<cd>& roots, cd lead = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cd>& coeffs() const { return c_; }
  cd coeff(int k) const { return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cd(0.0); }
  cd leading() const { return c_.empty() ? cd(0.0) : c_.back(); }
  double norm() const;  // max |coefficient|

  cd operator()(cd z) const;
  Polynomial derivative() const;
  Polynomial antiderivative() const;  // zero constant term
  // Coefficients of z^k p(1/z) padded to degree k (k >= degree).
  Polynomial reversed(int k) const;
  // Drops leading coefficients below rel_tol * norm().
  Polynomial trimmed(double rel_tol) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(cd s) const;

 private:
  std::vector<cd> c_;
};

// p(z), p'(z), ..., p^(order)(z).
std::vector<cd> poly_eval_and_derivative(const Polynomial& p, cd z, int order);

// Companion-matrix eigenvalues with one Newton polish step; multiplicities by repetition.
std::vector<cd> poly_roots(const Polynomial& p);

struct RootCluster {
  cd point;
  int multiplicity;
};
std::vector<RootCluster> cluster_roots(const std::vector<cd>& roots, double tol);

// Quotient and remainder of p / q.
std::pair<Polynomial, Polynomial> poly_divmod(const Polynomial& p, const Polynomial& q);

// Ratio of smallest to largest singular value of the Sylvester matrix.
double sylvester_conditioning(const Polynomial& p, const Polynomial& q);
bool poly_coprime(const Polynomial& p, const Polynomial& q, double tol = 1e-10);

struct Pole {
  cd location;
  int order;
};

class RationalFunction {
 public:
  RationalFunction() = default;
  // Poles found from the roots of den.
  RationalFunction(Polynomial num, Polynomial den);
  // Denominator equals den_lead * prod (z - p)^order.
  RationalFunction(Polynomial num, cd den_lead, std::vector<Pole> poles);

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }
  const std::vector<Pole>& poles() const { return poles_; }
  cd den_lead() const { return lead_; }
  cd operator()(cd z) const { return num_(z) / den_(z); }

 private:
  Polynomial num_, den_;
  cd lead_ = 1.0;
  std::vector<Pole> poles_;
};

struct PrincipalPart {
  cd location;
  std::vector<cd> coeffs;  // coeffs[k-1] multiplies (z - location)^{-k}
  cd residue() const { return coeffs.empty() ? cd(0.0) : coeffs[0]; }
};

struct PartialFractionForm {
  Polynomial poly;
  std::vector<PrincipalPart> parts;

  cd operator()(cd z) const;
  // Value without the principal part at index skip.
  cd regular_part(cd z, int skip) const;
  PartialFractionForm derivative() const;
};

PartialFractionForm partial_fractions(const RationalFunction& r, double separation_tol = 1e-8);

// Primitive with zero constant term. Residues must vanish relative to the largest principal-part coefficient.
PartialFractionForm antiderivative_pf(const PartialFractionForm& pf, double residue_tol = 1e-9);
RationalFunction to_rational(const PartialFractionForm& pf);
RationalFunction rational_antiderivative(const PartialFractionForm& pf, double residue_tol = 1e-9);

}  // namespace willmore
