#pragma once
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace willmore {

using cd = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind { Io = 1, Validation = 2, NonConvergence = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(ErrorKind::Validation, msg); }
[[noreturn]] inline void fail_convergence(const std::string& msg) {
  throw Error(ErrorKind::NonConvergence, msg);
}

// Pairwise summation keeps reductions independent of accumulation length.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace willmore
