#include "pixsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pixsim/error.hpp"

namespace pixsim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::StateOutOfRange: return "StateOutOfRange";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::UnknownDevicePrefix: return "UnknownDevicePrefix";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NoKnee: return "NoKnee";
    case ErrorCode::NoSensitiveRegion: return "NoSensitiveRegion";
    case ErrorCode::MissingGeometry: return "MissingGeometry";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

namespace numeric {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double v) { std::fill(a_.begin(), a_.end(), v); }

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) {
    throw Error(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
  }
  std::vector<double> y(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n_; ++c) s += a_[r * n_ + c] * x[c];
    y[r] = s;
  }
  return y;
}

double LuFactors::l(std::size_t r, std::size_t c) const {
  if (r == c) return 1.0;
  return r > c ? lu[r * n + c] : 0.0;
}

double LuFactors::u(std::size_t r, std::size_t c) const {
  return r <= c ? lu[r * n + c] : 0.0;
}

LuFactors lu_factor(DenseMatrix a, double pivot_tol) {
  const std::size_t n = a.size();
  for (double v : a.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
    }
  }

  LuFactors f;
  f.n = n;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(a(r, k));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best <= pivot_tol) {
      throw Error(ErrorCode::Singular,
                  "singular matrix: pivot " + std::to_string(best) + " at column " +
                      std::to_string(k),
                  0, static_cast<int>(k));
    }
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(p, c));
      std::swap(f.perm[k], f.perm[p]);
    }
    const double inv = 1.0 / a(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double m = a(r, k) * inv;
      a(r, k) = m;
      if (m == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= m * a(k, c);
    }
  }

  f.lu.assign(a.data().begin(), a.data().end());
  return f;
}

std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b) {
  const std::size_t n = f.n;
  if (b.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "rhs length " + std::to_string(b.size()) + " != " + std::to_string(n));
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  // Forward substitution with unit-diagonal L.
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t c = 0; c < i; ++c) s -= f.lu[i * n + c] * x[c];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t c = ii + 1; c < n; ++c) s -= f.lu[ii * n + c] * x[c];
    x[ii] = s / f.lu[ii * n + ii];
  }
  return x;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_inf(const DenseMatrix& a) {
  double m = 0.0;
  const std::size_t n = a.size();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += std::abs(a(r, c));
    m = std::max(m, s);
  }
  return m;
}

double max_abs(const DenseMatrix& a) { return norm_inf(a.data()); }

}  // namespace numeric
}  // namespace pixsim
