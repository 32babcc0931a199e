#ifndef CFKIT_NEIGHBORHOOD_HPP_
#define CFKIT_NEIGHBORHOOD_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cfkit/ratings.hpp"
#include "cfkit/similarity.hpp"

namespace cfkit {

struct Prediction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double score = 0.0;     // clamped to [1,5]
  int support = 0;        // neighbors that contributed
  bool fallback_used = false;
};

struct ScoredItem {
  std::uint32_t item;
  double score;

  bool operator==(const ScoredItem&) const = default;
};

/// Items the user has not rated in train, scores non-increasing, ties by
/// ascending item index.
struct RecommendationList {
  std::uint32_t user = 0;
  std::vector<ScoredItem> items;
};

/// Mean of v's train ratings over the items v co-rated with u. The deviation
/// baseline of the user-based predictor uses this pairwise mean, not v's
/// full-row mean.
double corated_mean(const RatingsMatrix& train, std::size_t v, std::size_t u);

/// Deviation-weighted average over the k-nearest users of u who rated i,
/// re-centered on u's mean. Falls back to u's mean when no neighbor rated i
/// or the weight mass is zero.
Prediction predict_user_based(const RatingsMatrix& train, const SimilarityModel& sims,
                              std::size_t u, std::size_t i);

/// Weighted average of u's ratings over the similar items of i that u rated.
/// Falls back to the item mean (global mean for unrated items).
Prediction predict_item_based(const RatingsMatrix& train, const SimilarityModel& sims,
                              std::size_t u, std::size_t i);

/// Scores every item the neighbors rated and the user did not.
RecommendationList topn_user_based(const RatingsMatrix& train,
                                   const SimilarityModel& sims, std::size_t u, int n);

/// Candidate items = union of the knn lists of the user's items, minus the
/// user's items; candidate score = sum of its weights over those lists.
RecommendationList topn_item_based(const RatingsMatrix& train,
                                   const SimilarityModel& sims, std::size_t u, int n);

/// Batch prediction over (user,item) pairs, dispatched on sims.orientation.
/// Pairs are independent, so this runs parallel; output order matches input.
std::vector<Prediction> predict_batch(
    const RatingsMatrix& train, const SimilarityModel& sims,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

}  // namespace cfkit

#endif  // CFKIT_NEIGHBORHOOD_HPP_
