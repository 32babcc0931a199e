#include "cfkit/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cfkit/errors.hpp"

namespace cfkit {

namespace {

double clamp_rating(double x) { return std::min(5.0, std::max(1.0, x)); }

void check_indices(const RatingsMatrix& train, std::size_t u, std::size_t i) {
  if (u >= train.user_count()) throw DomainError("user index out of range");
  if (i >= train.item_count()) throw DomainError("item index out of range");
}

bool sorted_contains(const std::vector<Cell>& cells, std::uint32_t index,
                     double* value = nullptr) {
  auto it = std::lower_bound(cells.begin(), cells.end(), index,
                             [](const Cell& c, std::uint32_t k) { return c.index < k; });
  if (it != cells.end() && it->index == index) {
    if (value) *value = it->value;
    return true;
  }
  return false;
}

bool scored_before(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

}  // namespace

double corated_mean(const RatingsMatrix& train, std::size_t v, std::size_t u) {
  const auto& rv = train.row(v);
  const auto& ru = train.row(u);
  double sum = 0.0;
  std::size_t count = 0, a = 0, b = 0;
  while (a < rv.size() && b < ru.size()) {
    if (rv[a].index < ru[b].index) {
      ++a;
    } else if (ru[b].index < rv[a].index) {
      ++b;
    } else {
      sum += rv[a].value;
      ++count;
      ++a;
      ++b;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : train.user_mean(v);
}

Prediction predict_user_based(const RatingsMatrix& train, const SimilarityModel& sims,
                              std::size_t u, std::size_t i) {
  if (sims.orientation != Orientation::user_user)
    throw DomainError("user-based prediction needs a user_user similarity model");
  check_indices(train, u, i);

  Prediction p;
  p.user = static_cast<std::uint32_t>(u);
  p.item = static_cast<std::uint32_t>(i);
  double num = 0.0, den = 0.0;
  int support = 0;
  for (const Neighbor& nb : sims.neighbors(u)) {
    double r_vi;
    if (!sorted_contains(train.row(nb.index), static_cast<std::uint32_t>(i), &r_vi))
      continue;
    double baseline = corated_mean(train, nb.index, u);
    num += (r_vi - baseline) * nb.weight;
    den += std::abs(nb.weight);
    ++support;
  }
  if (support == 0 || den == 0.0) {
    // fallback chain: user mean, then item mean, then global mean
    double fb = !train.row(u).empty()
                    ? train.user_mean(u)
                    : (!train.col(i).empty() ? train.item_mean(i) : train.global_mean());
    p.score = clamp_rating(fb);
    p.support = 0;
    p.fallback_used = true;
    return p;
  }
  p.score = clamp_rating(train.user_mean(u) + num / den);
  p.support = support;
  p.fallback_used = false;
  return p;
}

Prediction predict_item_based(const RatingsMatrix& train, const SimilarityModel& sims,
                              std::size_t u, std::size_t i) {
  if (sims.orientation != Orientation::item_item)
    throw DomainError("item-based prediction needs an item_item similarity model");
  check_indices(train, u, i);

  Prediction p;
  p.user = static_cast<std::uint32_t>(u);
  p.item = static_cast<std::uint32_t>(i);
  double num = 0.0, den = 0.0;
  int support = 0;
  for (const Neighbor& nb : sims.neighbors(i)) {
    double r_uj;
    if (!sorted_contains(train.row(u), nb.index, &r_uj)) continue;
    num += r_uj * nb.weight;
    den += std::abs(nb.weight);
    ++support;
  }
  if (support == 0 || den == 0.0) {
    double fb = train.col(i).empty() ? train.global_mean() : train.item_mean(i);
    p.score = clamp_rating(fb);
    p.support = 0;
    p.fallback_used = true;
    return p;
  }
  p.score = clamp_rating(num / den);
  p.support = support;
  p.fallback_used = false;
  return p;
}

RecommendationList topn_user_based(const RatingsMatrix& train,
                                   const SimilarityModel& sims, std::size_t u, int n) {
  if (n < 1) throw DomainError("n must be at least 1");
  if (sims.orientation != Orientation::user_user)
    throw DomainError("user-based top-N needs a user_user similarity model");
  check_indices(train, u, 0);

  // Accumulating per item over the neighbors in knn order reproduces the
  // per-cell predictor sums exactly while touching each neighbor row once.
  std::vector<double> num(train.item_count(), 0.0);
  std::vector<double> den(train.item_count(), 0.0);
  std::vector<char> candidate(train.item_count(), 0);
  for (const Neighbor& nb : sims.neighbors(u)) {
    const double baseline = corated_mean(train, nb.index, u);
    for (const Cell& c : train.row(nb.index)) {
      if (sorted_contains(train.row(u), c.index)) continue;
      num[c.index] += (c.value - baseline) * nb.weight;
      den[c.index] += std::abs(nb.weight);
      candidate[c.index] = 1;
    }
  }
  RecommendationList list;
  list.user = static_cast<std::uint32_t>(u);
  const double base = train.user_mean(u);
  for (std::size_t i = 0; i < train.item_count(); ++i) {
    if (!candidate[i]) continue;
    double score = den[i] == 0.0 ? base : base + num[i] / den[i];
    list.items.push_back({static_cast<std::uint32_t>(i), clamp_rating(score)});
  }
  std::sort(list.items.begin(), list.items.end(), scored_before);
  if (list.items.size() > static_cast<std::size_t>(n)) list.items.resize(n);
  return list;
}

RecommendationList topn_item_based(const RatingsMatrix& train,
                                   const SimilarityModel& sims, std::size_t u, int n) {
  if (n < 1) throw DomainError("n must be at least 1");
  if (sims.orientation != Orientation::item_item)
    throw DomainError("item-based top-N needs an item_item similarity model");
  check_indices(train, u, 0);

  std::unordered_map<std::uint32_t, double> scores;
  for (const Cell& owned : train.row(u)) {
    for (const Neighbor& nb : sims.neighbors(owned.index)) {
      if (sorted_contains(train.row(u), nb.index)) continue;
      scores[nb.index] += nb.weight;
    }
  }
  RecommendationList list;
  list.user = static_cast<std::uint32_t>(u);
  list.items.reserve(scores.size());
  for (const auto& [item, score] : scores) list.items.push_back({item, score});
  std::sort(list.items.begin(), list.items.end(), scored_before);
  if (list.items.size() > static_cast<std::size_t>(n)) list.items.resize(n);
  return list;
}

std::vector<Prediction> predict_batch(
    const RatingsMatrix& train, const SimilarityModel& sims,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
  std::vector<Prediction> out(pairs.size());
  const bool user_based = sims.orientation == Orientation::user_user;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
  for (std::size_t t = 0; t < pairs.size(); ++t) {  // NOLINT: OpenMP index
    out[t] = user_based
                 ? predict_user_based(train, sims, pairs[t].first, pairs[t].second)
                 : predict_item_based(train, sims, pairs[t].first, pairs[t].second);
  }
  return out;
}

}  // namespace cfkit
