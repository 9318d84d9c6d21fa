#pragma once

// Dense LU kernel for the Newton solver. Pixel circuits produce systems with
// about a dozen unknowns, so everything is dense and row-major.

#include <cstddef>
#include <span>
#include <vector>

namespace pixsim::numeric {

inline constexpr double kDefaultPivotTol = 1e-13;

class DenseMatrix {
public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  double& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  void fill(double v);
  std::span<const double> data() const noexcept { return a_; }

  std::vector<double> multiply(std::span<const double> x) const;

private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// Packed factors: strictly-lower part holds L (unit diagonal implied), upper
// part holds U. perm[i] is the row of the original matrix placed at row i.
struct LuFactors {
  std::size_t n = 0;
  std::vector<double> lu;
  std::vector<std::size_t> perm;

  double l(std::size_t r, std::size_t c) const;
  double u(std::size_t r, std::size_t c) const;
};

// Throws Error{Singular} when a pivot magnitude is <= pivot_tol; the message
// names the offending column so callers can map it back to a node.
LuFactors lu_factor(DenseMatrix a, double pivot_tol = kDefaultPivotTol);

std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b);

double norm_inf(std::span<const double> v);
double norm_inf(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

}  // namespace pixsim::numeric
