#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace espkit::linalg {

/// Minimal dense symmetric matrix support for the discriminant and ridge
/// models: Cholesky factorization, triangular solves, log-determinant.
/// Kept in-tree so numerical results do not depend on an external BLAS.
struct cholesky {
  std::vector<double> l;  // lower triangle, row-major d x d
  std::size_t d = 0;

  /// Factor a symmetric positive definite matrix (row-major). Returns
  /// nullopt when a pivot is not strictly positive.
  static std::optional<cholesky> factor(const std::vector<double>& a,
                                        std::size_t d) {
    cholesky ch;
    ch.d = d;
    ch.l.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = a[i * d + j];
        for (std::size_t k = 0; k < j; ++k)
          sum -= ch.l[i * d + k] * ch.l[j * d + k];
        if (i == j) {
          if (!(sum > 0.0)) return std::nullopt;
          ch.l[i * d + i] = std::sqrt(sum);
        } else {
          ch.l[i * d + j] = sum / ch.l[j * d + j];
        }
      }
    }
    return ch;
  }

  /// Solve A x = b via the factorization.
  std::vector<double> solve(const std::vector<double>& b) const {
    std::vector<double> y(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * y[k];
      y[i] = s / l[i * d + i];
    }
    std::vector<double> x(d, 0.0);
    for (std::size_t ii = d; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < d; ++k) s -= l[k * d + ii] * x[k];
      x[ii] = s / l[ii * d + ii];
    }
    return x;
  }

  double log_det() const {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += std::log(l[i * d + i]);
    return 2.0 * s;
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace espkit::linalg
