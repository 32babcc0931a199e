#ifndef CFKIT_FACTORIZATION_HPP_
#define CFKIT_FACTORIZATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfkit/dense.hpp"
#include "cfkit/ratings.hpp"
#include "cfkit/similarity.hpp"

namespace cfkit {

enum class FactorKind { mf, nmf, emf };

std::string to_string(FactorKind kind);
FactorKind factor_kind_from_string(const std::string& name);

/// Latent factor model: P rows are user factors, Q rows are item factors.
struct FactorModel {
  DenseMatrix p;  // m x k
  DenseMatrix q;  // n x k
  std::size_t k = 0;
  NormalizationState normalization;
  FactorKind kind = FactorKind::mf;
};

/// Learning-rate/regularizer bundle. lambda_p == lambda_q recovers the
/// single-lambda regularized form; beta and lambda_expl only matter for the
/// explainable model.
struct TrainConfig {
  double alpha = 0.01;
  double lambda_p = 0.02;
  double lambda_q = 0.02;
  double beta = 0.02;
  double lambda_expl = 0.1;
  int epochs = 10;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  int k = 10;

  void validate() const;
};

/// Sparse per-(user,item) explainability scores above the threshold theta.
/// A stored score is the expected neighborhood rating, in (theta, 5].
class ExplainabilityWeights {
 public:
  double theta = 0.0;
  int neighbor_k = 0;

  double value(std::size_t u, std::size_t i) const;  // 0 when unstored
  std::size_t stored_count() const;

  std::vector<std::vector<Cell>> rows_;  // per user, sorted by item index
};

/// Expected rating of item i inside u's truncated neighborhood (user style),
/// or of user u's ratings across i's similar items (item style), thresholded
/// at theta. Entities with an empty neighborhood score 0 and store nothing.
ExplainabilityWeights explainability_scores(const RatingsMatrix& train,
                                            const SimilarityModel& sims,
                                            Orientation style, double theta,
                                            int neighbor_k);

// Per-example update kernels. Both read the old factor values, compute the
// signed error e = r - q.p and step both rows at once; training loops and the
// gradient checks share them.
void mf_step(std::span<double> user_row, std::span<double> item_row, double rating,
             const TrainConfig& cfg);
void emf_step(std::span<double> user_row, std::span<double> item_row, double rating,
              double expl_weight, const TrainConfig& cfg);

/// One multiplicative update pass: every user row against fixed item factors,
/// then every item row against the updated user factors. Rows are mutually
/// independent within a pass, so they update in parallel.
void nmf_epoch(const RatingsMatrix& train, DenseMatrix& p, DenseMatrix& q,
               double lambda_p, double lambda_q);

/// Regularized-SVD style SGD training (one seeded shuffle of the known
/// ratings per epoch, per-example updates from old values). normalize
/// trains on user-centered ratings.
FactorModel train_mf(const RatingsMatrix& train, const TrainConfig& cfg, bool normalize);

/// Multiplicative-update training; requires raw non-negative ratings and
/// keeps P and Q non-negative. One user sweep then one item sweep per epoch,
/// with predictions recomputed between the sweeps.
FactorModel train_nmf(const RatingsMatrix& train, const TrainConfig& cfg);

/// SGD on the explainability-regularized objective. A zero weight matrix
/// makes this bitwise identical to train_mf with lambda_p = lambda_q = beta.
FactorModel train_emf(const RatingsMatrix& train, const TrainConfig& cfg,
                      const ExplainabilityWeights& weights, bool normalize);

/// Dot product plus normalization offset, clamped to [1,5].
double predict_factor(const FactorModel& model, std::size_t u, std::size_t i);

/// Unclamped dot product plus offset; used by tests and metrics internals.
double predict_factor_raw(const FactorModel& model, std::size_t u, std::size_t i);

}  // namespace cfkit

#endif  // CFKIT_FACTORIZATION_HPP_
