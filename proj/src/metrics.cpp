#include "cfkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>

#include "cfkit/errors.hpp"

namespace cfkit {

void EvalConfig::validate() const {
  if (list_size < 1) throw DomainError("list_size must be >= 1");
  if (halflife_alpha < 2.0) throw DomainError("halflife_alpha must be >= 2");
  if (dcg_k < 1) throw DomainError("dcg_k must be >= 1");
}

TestRatings TestRatings::from_interactions(const RatingsMatrix& train,
                                           const std::vector<Interaction>& test) {
  TestRatings t;
  t.rows_.assign(train.user_count(), {});
  for (const Interaction& it : test) {
    std::size_t u = train.user_index(it.user);
    std::size_t i = train.item_index(it.item);
    t.rows_[u].push_back({static_cast<std::uint32_t>(i), it.rating});
    ++t.total_;
  }
  for (auto& row : t.rows_)
    std::sort(row.begin(), row.end(),
              [](const Cell& a, const Cell& b) { return a.index < b.index; });
  return t;
}

std::optional<double> TestRatings::rating(std::size_t u, std::size_t i) const {
  if (u >= rows_.size()) return std::nullopt;
  const auto& row = rows_[u];
  auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(i),
                             [](const Cell& c, std::uint32_t k) { return c.index < k; });
  if (it != row.end() && it->index == i) return it->value;
  return std::nullopt;
}

namespace {

struct PerUserAccum {
  double sum = 0.0;
  std::size_t count = 0;
};

MetricValue macro_error(std::span<const PredictedRating> records, bool squared) {
  std::map<std::uint32_t, PerUserAccum> per_user;
  for (const PredictedRating& r : records) {
    double e = r.predicted - r.actual;
    auto& acc = per_user[r.user];
    acc.sum += squared ? e * e : std::abs(e);
    acc.count += 1;
  }
  if (per_user.empty())
    throw MetricError("no evaluable user: every user had an empty prediction set");
  double total = 0.0;
  for (const auto& [u, acc] : per_user) {
    double mean = acc.sum / static_cast<double>(acc.count);
    total += squared ? std::sqrt(mean) : mean;
  }
  return {total / static_cast<double>(per_user.size()), per_user.size(), 0};
}

}  // namespace

MetricValue mae(std::span<const PredictedRating> records) {
  return macro_error(records, false);
}

MetricValue rmse(std::span<const PredictedRating> records) {
  return macro_error(records, true);
}

MetricValue coverage(const RatingsMatrix& train, const SimilarityModel& sims,
                     std::span<const std::uint32_t> users) {
  if (sims.orientation != Orientation::user_user)
    throw DomainError("coverage needs a user_user similarity model");
  const std::size_t n = train.item_count();
  for (std::uint32_t u : users)
    if (u >= train.user_count()) throw DomainError("user index out of range");
  std::vector<double> per_user(users.size(), -1.0);  // -1 marks skipped
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
  for (std::size_t t = 0; t < users.size(); ++t) {  // NOLINT: OpenMP index
    const std::size_t u = users[t];
    const std::size_t unrated = n - train.row(u).size();
    if (unrated == 0) continue;
    std::vector<char> covered(n, 0);
    for (const Neighbor& nb : sims.neighbors(u))
      for (const Cell& c : train.row(nb.index)) covered[c.index] = 1;
    for (const Cell& c : train.row(u)) covered[c.index] = 0;  // only unrated count
    std::size_t hit = 0;
    for (char f : covered) hit += f;
    per_user[t] = 100.0 * static_cast<double>(hit) / static_cast<double>(unrated);
  }
  double total = 0.0;
  std::size_t used = 0, skipped = 0;
  for (double v : per_user) {
    if (v < 0.0) {
      ++skipped;
    } else {
      total += v;
      ++used;
    }
  }
  return {used > 0 ? total / static_cast<double>(used) : 0.0, used, skipped};
}

MetricValue coverage(const RatingsMatrix& train, const SimilarityModel& sims) {
  std::vector<std::uint32_t> all(train.user_count());
  for (std::size_t u = 0; u < all.size(); ++u) all[u] = static_cast<std::uint32_t>(u);
  return coverage(train, sims, all);
}

PrfResult precision_recall_f1(const std::vector<RecommendationList>& recommendations,
                              const TestRatings& test, const EvalConfig& cfg) {
  cfg.validate();
  if (recommendations.empty())
    throw MetricError("precision undefined: no user received recommendations");
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t recall_users = 0, recall_skipped = 0;
  for (const RecommendationList& list : recommendations) {
    std::size_t hits = 0;
    for (const ScoredItem& s : list.items) {
      auto r = test.rating(list.user, s.item);
      if (r && *r >= cfg.relevance_theta) ++hits;
    }
    precision_sum += static_cast<double>(hits) / static_cast<double>(cfg.list_size);
    std::size_t relevant_total = 0;
    for (const Cell& c : test.row(list.user))
      if (c.value >= cfg.relevance_theta) ++relevant_total;
    if (relevant_total == 0) {
      ++recall_skipped;
    } else {
      recall_sum += static_cast<double>(hits) / static_cast<double>(relevant_total);
      ++recall_users;
    }
  }
  PrfResult out;
  out.precision = {precision_sum / static_cast<double>(recommendations.size()),
                   recommendations.size(), 0};
  out.recall = {recall_users > 0 ? recall_sum / static_cast<double>(recall_users) : 0.0,
                recall_users, recall_skipped};
  double p = out.precision.value, r = out.recall.value;
  out.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return out;
}

MetricValue mean_average_precision(const std::vector<RecommendationList>& recommendations,
                                   const TestRatings& test, const EvalConfig& cfg) {
  cfg.validate();
  double sum = 0.0;
  std::size_t used = 0, skipped = 0;
  for (const RecommendationList& list : recommendations) {
    std::size_t relevant_total = 0;
    for (const Cell& c : test.row(list.user))
      if (c.value >= cfg.relevance_theta) ++relevant_total;
    if (relevant_total == 0) {
      ++skipped;
      continue;
    }
    double ap = 0.0;
    std::size_t hits = 0;
    const std::size_t depth =
        std::min<std::size_t>(list.items.size(), static_cast<std::size_t>(cfg.list_size));
    for (std::size_t rank = 1; rank <= depth; ++rank) {
      auto r = test.rating(list.user, list.items[rank - 1].item);
      if (r && *r >= cfg.relevance_theta) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(rank);
      }
    }
    sum += ap / static_cast<double>(relevant_total);
    ++used;
  }
  return {used > 0 ? sum / static_cast<double>(used) : 0.0, used, skipped};
}

MetricValue half_life(const std::vector<RecommendationList>& recommendations,
                      const TestRatings& test, const EvalConfig& cfg) {
  cfg.validate();
  if (recommendations.empty()) return {0.0, 0, 0};
  double sum = 0.0;
  for (const RecommendationList& list : recommendations) {
    double hl = 0.0;
    for (std::size_t rank = 1; rank <= list.items.size(); ++rank) {
      double rating =
          test.rating(list.user, list.items[rank - 1].item).value_or(cfg.halflife_d);
      double gain = std::max(rating - cfg.halflife_d, 0.0);
      if (gain > 0.0)
        hl += gain / std::pow(2.0, static_cast<double>(rank - 1) /
                                       (cfg.halflife_alpha - 1.0));
    }
    sum += hl;
  }
  return {sum / static_cast<double>(recommendations.size()), recommendations.size(), 0};
}

MetricValue dcg(const std::vector<RecommendationList>& recommendations,
                const TestRatings& test, const EvalConfig& cfg) {
  cfg.validate();
  if (recommendations.empty()) return {0.0, 0, 0};
  double sum = 0.0;
  for (const RecommendationList& list : recommendations) {
    double g = 0.0;
    const std::size_t depth =
        std::min<std::size_t>(list.items.size(), static_cast<std::size_t>(cfg.dcg_k));
    for (std::size_t rank = 1; rank <= depth; ++rank) {
      double rating = test.rating(list.user, list.items[rank - 1].item).value_or(0.0);
      if (rank == 1)
        g += rating;
      else
        g += rating / std::log2(static_cast<double>(rank));
    }
    sum += g;
  }
  return {sum / static_cast<double>(recommendations.size()), recommendations.size(), 0};
}

std::optional<NoveltyResult> novelty(const RecommendationList& list, const ItemSimFn& sim) {
  const std::size_t z = list.items.size();
  if (z < 2) return std::nullopt;
  NoveltyResult out;
  out.per_item.resize(z, 0.0);
  for (std::size_t a = 0; a < z; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < z; ++b) {
      if (a == b) continue;
      double w = sim(list.items[a].item, list.items[b].item).value_or(0.0);
      s += 1.0 - w;
    }
    out.per_item[a] = s / static_cast<double>(z - 1);
    out.mean += out.per_item[a];
  }
  out.mean /= static_cast<double>(z);
  return out;
}

std::optional<double> diversity(const RecommendationList& list, const ItemSimFn& sim) {
  const std::size_t z = list.items.size();
  if (z < 2) return std::nullopt;
  double s = 0.0;
  for (std::size_t a = 0; a < z; ++a)
    for (std::size_t b = 0; b < z; ++b) {
      if (a == b) continue;
      s += 1.0 - sim(list.items[a].item, list.items[b].item).value_or(0.0);
    }
  return s / static_cast<double>(z * (z - 1));
}

ItemSimFn make_item_sim(const RatingsMatrix& train, SimMetric metric, int min_overlap) {
  auto cache = std::make_shared<std::unordered_map<std::uint64_t, std::optional<double>>>();
  const RatingsMatrix* m = &train;
  return [m, metric, min_overlap, cache](std::size_t i,
                                         std::size_t j) -> std::optional<double> {
    if (i == j) return 1.0;
    std::uint64_t key = (static_cast<std::uint64_t>(std::min(i, j)) << 32) |
                        static_cast<std::uint64_t>(std::max(i, j));
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    auto w = pair_similarity(*m, Orientation::item_item, metric, i, j, min_overlap);
    (*cache)[key] = w;
    return w;
  };
}

}  // namespace cfkit
