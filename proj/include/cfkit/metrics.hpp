#ifndef CFKIT_METRICS_HPP_
#define CFKIT_METRICS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cfkit/neighborhood.hpp"
#include "cfkit/ratings.hpp"
#include "cfkit/similarity.hpp"

namespace cfkit {

/// Thresholds and cutoffs shared by the evaluation metrics.
struct EvalConfig {
  double relevance_theta = 4.0;  // item relevant when its held-out rating >= theta
  int list_size = 10;            // n recommendations per user
  double halflife_alpha = 5.0;   // must be >= 2
  double halflife_d = 0.0;       // default rating for unrated list positions
  int dcg_k = 10;

  void validate() const;
};

/// Held-out ratings indexed by dense (user, item); ids resolved against the
/// train matrix, which the split guard keeps complete.
class TestRatings {
 public:
  static TestRatings from_interactions(const RatingsMatrix& train,
                                       const std::vector<Interaction>& test);

  std::optional<double> rating(std::size_t u, std::size_t i) const;
  const std::vector<Cell>& row(std::size_t u) const { return rows_[u]; }
  std::size_t user_count() const { return rows_.size(); }
  std::size_t total() const { return total_; }

 private:
  std::vector<std::vector<Cell>> rows_;
  std::size_t total_ = 0;
};

struct PredictedRating {
  std::uint32_t user;
  std::uint32_t item;
  double actual;
  double predicted;
};

/// Metric plus the user population it was averaged over; skipped users are
/// the ones a metric's own rule excluded.
struct MetricValue {
  double value = 0.0;
  std::size_t users_used = 0;
  std::size_t users_skipped = 0;
};

/// Macro MAE: per-user mean absolute error, averaged over users.
MetricValue mae(std::span<const PredictedRating> records);

/// Per-user root mean squared error, averaged over users (the root sits
/// inside the user average).
MetricValue rmse(std::span<const PredictedRating> records);

/// Percentage of a user's unrated items covered by at least one of their
/// k nearest neighbors, averaged over the given users (all users by default);
/// users with nothing unrated are skipped and counted.
MetricValue coverage(const RatingsMatrix& train, const SimilarityModel& sims);
MetricValue coverage(const RatingsMatrix& train, const SimilarityModel& sims,
                     std::span<const std::uint32_t> users);

struct PrfResult {
  MetricValue precision;  // averaged over all users with lists; divides by n
  MetricValue recall;     // averaged over users with >= 1 relevant held-out item
  double f1 = 0.0;        // from the two aggregates
};

PrfResult precision_recall_f1(const std::vector<RecommendationList>& recommendations,
                              const TestRatings& test, const EvalConfig& cfg);

/// AP@n per user (sum of precision-at-hit over the user's total relevant
/// held-out count), averaged over users with at least one relevant item.
MetricValue mean_average_precision(const std::vector<RecommendationList>& recommendations,
                                   const TestRatings& test, const EvalConfig& cfg);

/// Exponential-decay utility; positions the user never rated use the default
/// rating d and so contribute nothing.
MetricValue half_life(const std::vector<RecommendationList>& recommendations,
                      const TestRatings& test, const EvalConfig& cfg);

/// Log-decay gain with the printed-form weights (rank 2 divides by log2(2)=1).
/// Unrated positions contribute 0.
MetricValue dcg(const std::vector<RecommendationList>& recommendations,
                const TestRatings& test, const EvalConfig& cfg);

/// Item-item similarity used by novelty/diversity; nullopt means undefined
/// and is treated as similarity 0 (maximally novel).
using ItemSimFn = std::function<std::optional<double>(std::size_t, std::size_t)>;

struct NoveltyResult {
  std::vector<double> per_item;  // aligned with the list
  double mean = 0.0;
};

/// Mean pairwise dissimilarity of each recommended item against the rest of
/// the list. Lists shorter than 2 are undefined.
std::optional<NoveltyResult> novelty(const RecommendationList& list, const ItemSimFn& sim);

/// Mean pairwise dissimilarity over ordered pairs of the list; equals the
/// mean of the per-item novelties.
std::optional<double> diversity(const RecommendationList& list, const ItemSimFn& sim);

/// Memoizing item-item similarity lookup over a ratings matrix.
ItemSimFn make_item_sim(const RatingsMatrix& train, SimMetric metric, int min_overlap);

}  // namespace cfkit

#endif  // CFKIT_METRICS_HPP_
