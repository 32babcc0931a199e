#ifndef CFKIT_SVD_HPP_
#define CFKIT_SVD_HPP_

#include <cstddef>
#include <vector>

#include "cfkit/dense.hpp"
#include "cfkit/linalg.hpp"
#include "cfkit/ratings.hpp"

namespace cfkit {

/// Truncated SVD factor model. user_factors and item_factors carry the
/// sqrt(singular value) weighting, so a prediction is one dot product plus
/// the normalization offset.
struct SvdModel {
  DenseMatrix user_factors;           // m x k
  DenseMatrix item_factors;           // k x n
  std::vector<double> singular_values;  // length k, non-increasing
  std::size_t k = 0;
  NormalizationState normalization;
};

/// Top-k singular triplets of an already-dense matrix. k must not exceed
/// min(rows, cols). Deterministic for a fixed input.
SvdModel truncated_svd(const DenseMatrix& dense, std::size_t k);

/// Full pipeline: center by user mean, fill missing cells with the centered
/// item means, factor, truncate to k, keep the sqrt-weighted products.
SvdModel svd_fit(const RatingsMatrix& train, std::size_t k);

/// Reconstructed rating, un-centered and clamped to [1,5].
double svd_predict(const SvdModel& model, std::size_t u, std::size_t i);

/// Reconstruction without clamping; used by property checks.
double svd_reconstruct(const SvdModel& model, std::size_t u, std::size_t i);

}  // namespace cfkit

#endif  // CFKIT_SVD_HPP_
