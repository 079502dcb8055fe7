#include "willmore/algebra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace willmore {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

Polynomial::Polynomial(std::vector<cd> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == cd(0.0)) c_.pop_back();
}

Polynomial Polynomial::monomial(int k, cd c) {
  std::vector<cd> v(k + 1, 0.0);
  v[k] = c;
  return Polynomial(v);
}

Polynomial Polynomial::from_roots(const std::vector<cd>& roots, cd lead) {
  std::vector<cd> v{lead};
  for (cd r : roots) {
    std::vector<cd> w(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      w[i + 1] += v[i];
      w[i] -= r * v[i];
    }
    v = std::move(w);
  }
  return Polynomial(v);
}

double Polynomial::norm() const {
  double n = 0.0;
  for (cd c : c_) n = std::max(n, std::abs(c));
  return n;
}

cd Polynomial::operator()(cd z) const {
  cd s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * z + *it;
  return s;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial();
  std::vector<cd> v(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) v[k - 1] = c_[k] * static_cast<double>(k);
  return Polynomial(v);
}

Polynomial Polynomial::antiderivative() const {
  std::vector<cd> v(c_.size() + 1, 0.0);
  for (std::size_t k = 0; k < c_.size(); ++k) v[k + 1] = c_[k] / static_cast<double>(k + 1);
  return Polynomial(v);
}

Polynomial Polynomial::reversed(int k) const {
  std::vector<cd> v(k + 1, 0.0);
  for (int i = 0; i <= degree(); ++i) v[k - i] = c_[i];
  return Polynomial(v);
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  std::vector<cd> v = c_;
  double n = norm();
  while (!v.empty() && std::abs(v.back()) <= rel_tol * n) v.pop_back();
  return Polynomial(v);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<cd> v(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) v[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) v[i] += o.c_[i];
  return Polynomial(v);
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * cd(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return Polynomial();
  std::vector<cd> v(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) v[i + j] += c_[i] * o.c_[j];
  return Polynomial(v);
}

Polynomial Polynomial::operator*(cd s) const {
  std::vector<cd> v = c_;
  for (cd& c : v) c *= s;
  return Polynomial(v);
}

std::vector<cd> poly_eval_and_derivative(const Polynomial& p, cd z, int order) {
  if (order < 0) fail("order must be non-negative");
  // Repeated synthetic division yields Taylor coefficients at z.
  std::vector<cd> a = p.coeffs();
  int n = static_cast<int>(a.size());
  std::vector<cd> out(order + 1, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= order && n > 0; ++k) {
    for (int i = n - 2; i >= 0; --i) a[i] += z * a[i + 1];
    if (k > 0) fact *= k;
    out[k] = a[0] * fact;
    a.erase(a.begin());
    --n;
  }
  return out;
}

namespace {

// Coefficients of p(a + x) in powers of x.
std::vector<cd> taylor_shift(const Polynomial& p, cd a) {
  std::vector<cd> c = p.coeffs();
  int n = static_cast<int>(c.size());
  for (int k = 0; k < n; ++k)
    for (int i = n - 2; i >= k; --i) c[i] += a * c[i + 1];
  return c;
}

}  // namespace

std::vector<cd> poly_roots(const Polynomial& p) {
  int n = p.degree();
  if (n < 1) fail("no roots");
  if (n == 1) return {-p.coeff(0) / p.coeff(1)};
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -p.coeff(i) / p.coeff(n);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  std::vector<cd> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
  Polynomial dp = p.derivative();
  for (cd& z : r) {
    cd f = p(z), d = dp(z);
    if (std::abs(d) == 0.0) continue;
    cd znew = z - f / d;
    if (std::abs(p(znew)) < std::abs(f)) z = znew;
  }
  std::sort(r.begin(), r.end(), [](cd x, cd y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return r;
}

std::vector<RootCluster> cluster_roots(const std::vector<cd>& roots, double tol) {
  std::vector<RootCluster> out;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    cd sum = roots[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!used[j] && std::abs(roots[j] - roots[i]) <= tol) {
        used[j] = true;
        sum += roots[j];
        ++count;
      }
    }
    out.push_back({sum / static_cast<double>(count), count});
  }
  return out;
}

std::pair<Polynomial, Polynomial> poly_divmod(const Polynomial& p, const Polynomial& q) {
  if (q.is_zero()) fail("division by zero polynomial");
  std::vector<cd> r = p.coeffs();
  int dq = q.degree();
  if (p.degree() < dq) return {Polynomial(), p};
  std::vector<cd> quo(p.degree() - dq + 1, 0.0);
  for (int k = p.degree() - dq; k >= 0; --k) {
    cd c = r[k + dq] / q.leading();
    quo[k] = c;
    for (int j = 0; j <= dq; ++j) r[k + j] -= c * q.coeff(j);
    r[k + dq] = 0.0;
  }
  r.resize(dq);
  return {Polynomial(quo), Polynomial(r)};
}

double sylvester_conditioning(const Polynomial& p, const Polynomial& q) {
  if (p.is_zero() || q.is_zero()) fail("zero polynomial");
  int m = p.degree(), n = q.degree();
  if (m + n == 0) return 1.0;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m + n, m + n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= m; ++j) S(i, i + j) = p.coeff(m - j) / p.norm();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= n; ++j) S(n + i, i + j) = q.coeff(n - j) / q.norm();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
  auto s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

bool poly_coprime(const Polynomial& p, const Polynomial& q, double tol) {
  return sylvester_conditioning(p, q) > tol;
}

RationalFunction::RationalFunction(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) fail("denominator identically zero");
  lead_ = den_.leading();
  if (den_.degree() >= 1) {
    double tol = 1e-6 * std::max(1.0, den_.norm() / std::abs(lead_));
    for (const auto& c : cluster_roots(poly_roots(den_), tol)) poles_.push_back({c.point, c.multiplicity});
  }
}

RationalFunction::RationalFunction(Polynomial num, cd den_lead, std::vector<Pole> poles)
    : num_(std::move(num)), lead_(den_lead), poles_(std::move(poles)) {
  std::vector<cd> roots;
  for (const auto& p : poles_)
    for (int k = 0; k < p.order; ++k) roots.push_back(p.location);
  den_ = Polynomial::from_roots(roots, den_lead);
}

cd PartialFractionForm::operator()(cd z) const { return regular_part(z, -1); }

cd PartialFractionForm::regular_part(cd z, int skip) const {
  cd s = poly(z);
  for (int i = 0; i < static_cast<int>(parts.size()); ++i) {
    if (i == skip) continue;
    cd u = 1.0 / (z - parts[i].location);
    cd acc = 0.0;
    for (auto it = parts[i].coeffs.rbegin(); it != parts[i].coeffs.rend(); ++it) acc = (acc + *it) * u;
    s += acc;
  }
  return s;
}

PartialFractionForm PartialFractionForm::derivative() const {
  PartialFractionForm d;
  d.poly = poly.derivative();
  for (const auto& pp : parts) {
    PrincipalPart q{pp.location, std::vector<cd>(pp.coeffs.size() + 1, 0.0)};
    for (std::size_t k = 1; k <= pp.coeffs.size(); ++k) q.coeffs[k] = -static_cast<double>(k) * pp.coeffs[k - 1];
    d.parts.push_back(q);
  }
  return d;
}

PartialFractionForm partial_fractions(const RationalFunction& r, double separation_tol) {
  const auto& poles = r.poles();
  double scale = 1.0;
  for (const auto& p : poles) scale = std::max(scale, std::abs(p.location));
  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j)
      if (std::abs(poles[i].location - poles[j].location) < separation_tol * scale) fail("ill-conditioned poles");

  PartialFractionForm pf;
  pf.poly = poly_divmod(r.numerator(), r.denominator()).first;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    std::vector<cd> others;
    for (std::size_t j = 0; j < poles.size(); ++j)
      if (j != i)
        for (int k = 0; k < poles[j].order; ++k) others.push_back(poles[j].location);
    Polynomial q = Polynomial::from_roots(others, r.den_lead());
    int k = poles[i].order;
    cd p = poles[i].location;
    std::vector<cd> t = taylor_shift(r.numerator(), p), u = taylor_shift(q, p);
    t.resize(std::max<std::size_t>(t.size(), k), 0.0);
    u.resize(std::max<std::size_t>(u.size(), k), 0.0);
    std::vector<cd> h(k, 0.0);
    for (int j = 0; j < k; ++j) {
      cd acc = t[j];
      for (int l = 1; l <= j; ++l) acc -= u[l] * h[j - l];
      h[j] = acc / u[0];
    }
    PrincipalPart part{p, std::vector<cd>(k)};
    for (int j = 0; j < k; ++j) part.coeffs[k - 1 - j] = h[j];
    pf.parts.push_back(part);
  }
  return pf;
}

PartialFractionForm antiderivative_pf(const PartialFractionForm& pf, double residue_tol) {
  PartialFractionForm out;
  out.poly = pf.poly.antiderivative();
  double scale = 0.0;
  for (const auto& pp : pf.parts)
    for (cd c : pp.coeffs) scale = std::max(scale, std::abs(c));
  for (const auto& pp : pf.parts) {
    if (std::abs(pp.residue()) > residue_tol * std::max(scale, 1e-300))
      fail("logarithmic primitive required");
    if (pp.coeffs.size() <= 1) continue;
    PrincipalPart q{pp.location, std::vector<cd>(pp.coeffs.size() - 1)};
    for (std::size_t k = 2; k <= pp.coeffs.size(); ++k)
      q.coeffs[k - 2] = -pp.coeffs[k - 1] / static_cast<double>(k - 1);
    out.parts.push_back(q);
  }
  return out;
}

RationalFunction to_rational(const PartialFractionForm& pf) {
  std::vector<Pole> poles;
  for (const auto& pp : pf.parts) poles.push_back({pp.location, static_cast<int>(pp.coeffs.size())});
  std::vector<cd> all;
  for (const auto& p : poles)
    for (int k = 0; k < p.order; ++k) all.push_back(p.location);
  Polynomial den = Polynomial::from_roots(all);
  Polynomial num = pf.poly * den;
  for (std::size_t i = 0; i < pf.parts.size(); ++i) {
    std::vector<cd> others;
    for (std::size_t j = 0; j < poles.size(); ++j)
      if (j != i)
        for (int k = 0; k < poles[j].order; ++k) others.push_back(poles[j].location);
    int K = poles[i].order;
    for (int k = 1; k <= K; ++k) {
      std::vector<cd> roots = others;
      for (int l = 0; l < K - k; ++l) roots.push_back(poles[i].location);
      num = num + Polynomial::from_roots(roots, pf.parts[i].coeffs[k - 1]);
    }
  }
  return RationalFunction(num, 1.0, poles);
}

RationalFunction rational_antiderivative(const PartialFractionForm& pf, double residue_tol) {
  return to_rational(antiderivative_pf(pf, residue_tol));
}

}  // namespace willmore
