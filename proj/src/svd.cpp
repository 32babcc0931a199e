#include "cfkit/svd.hpp"

#include <algorithm>
#include <cmath>

#include "cfkit/errors.hpp"

namespace cfkit {

SvdModel truncated_svd(const DenseMatrix& dense, std::size_t k) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (k > std::min(dense.rows(), dense.cols()))
    throw DomainError("k exceeds min(rows, cols)");

  SvdResult svd = jacobi_svd(dense);
  SvdModel model;
  model.k = k;
  model.singular_values.assign(svd.sigma.begin(), svd.sigma.begin() + k);
  model.user_factors = DenseMatrix(dense.rows(), k);
  model.item_factors = DenseMatrix(k, dense.cols());
  for (std::size_t j = 0; j < k; ++j) {
    double root = std::sqrt(svd.sigma[j]);
    for (std::size_t r = 0; r < dense.rows(); ++r)
      model.user_factors(r, j) = svd.u(r, j) * root;
    for (std::size_t c = 0; c < dense.cols(); ++c)
      model.item_factors(j, c) = root * svd.v(c, j);
  }
  return model;
}

SvdModel svd_fit(const RatingsMatrix& train, std::size_t k) {
  auto [centered, state] = center_by_user(train);
  DenseMatrix filled = impute_item_means(centered);
  SvdModel model = truncated_svd(filled, k);
  model.normalization = std::move(state);
  return model;
}

double svd_reconstruct(const SvdModel& model, std::size_t u, std::size_t i) {
  if (u >= model.user_factors.rows()) throw DomainError("user index out of range");
  if (i >= model.item_factors.cols()) throw DomainError("item index out of range");
  double s = 0.0;
  for (std::size_t j = 0; j < model.k; ++j)
    s += model.user_factors(u, j) * model.item_factors(j, i);
  return s;
}

double svd_predict(const SvdModel& model, std::size_t u, std::size_t i) {
  double raw = svd_reconstruct(model, u, i) + model.normalization.offset(u);
  return std::min(5.0, std::max(1.0, raw));
}

}  // namespace cfkit
