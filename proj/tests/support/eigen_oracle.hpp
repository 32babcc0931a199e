#ifndef CFKIT_TESTS_EIGEN_ORACLE_HPP_
#define CFKIT_TESTS_EIGEN_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfkit/dense.hpp"

// Singular values via eigenvalues of A^T A, computed with a classic two-sided
// Jacobi eigensolver on the symmetric Gram matrix. A different algorithm and
// a different code path from the library's one-sided SVD, so it can serve as
// an oracle for it.
namespace cfkit::testsupport {

inline std::vector<double> singular_values_by_gram(const DenseMatrix& a) {
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
      g(i, j) = s;
    }

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += g(p, q) * g(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (g(p, q) == 0.0) continue;
        double theta = (g(q, q) - g(p, p)) / (2.0 * g(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double gkp = g(k, p), gkq = g(k, q);
          g(k, p) = c * gkp - s * gkq;
          g(k, q) = s * gkp + c * gkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double gpk = g(p, k), gqk = g(q, k);
          g(p, k) = c * gpk - s * gqk;
          g(q, k) = s * gpk + c * gqk;
        }
      }
    }
  }

  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, g(i, i)));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

inline double frobenius_gap(const DenseMatrix& a, const DenseMatrix& b) {
  double s = 0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double d = a(r, c) - b(r, c);
      s += d * d;
    }
  return std::sqrt(s);
}

}  // namespace cfkit::testsupport

#endif  // CFKIT_TESTS_EIGEN_ORACLE_HPP_
