#ifndef CFKIT_LINALG_HPP_
#define CFKIT_LINALG_HPP_

#include <vector>

#include "cfkit/dense.hpp"

namespace cfkit {

/// Thin singular value decomposition A = U * diag(sigma) * V^T with
/// r = min(rows, cols) columns in U and V and sigma non-increasing.
struct SvdResult {
  DenseMatrix u;              // rows x r
  std::vector<double> sigma;  // length r, non-increasing, >= 0
  DenseMatrix v;              // cols x r
};

/// One-sided Jacobi SVD. Column pairs are swept in a round-robin order whose
/// rounds touch disjoint pairs, so rounds can rotate in parallel and the
/// result is bit-identical for any worker count. Sign convention: the
/// largest-magnitude entry of each left singular vector is positive.
SvdResult jacobi_svd(DenseMatrix a);

}  // namespace cfkit

#endif  // CFKIT_LINALG_HPP_
