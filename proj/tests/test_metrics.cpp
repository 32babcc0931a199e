#include <cmath>
#include <map>

#include "cfkit/errors.hpp"
#include "cfkit/metrics.hpp"
#include "doctest.h"
#include "support/synth.hpp"
#include "support/table2.hpp"

using namespace cfkit;
using namespace cfkit::testsupport;

namespace {

TestRatings make_test(const RatingsMatrix& train,
                      const std::vector<Interaction>& held_out) {
  return TestRatings::from_interactions(train, held_out);
}

RecommendationList make_list(std::uint32_t user,
                             std::initializer_list<ScoredItem> items) {
  RecommendationList l;
  l.user = user;
  l.items = items;
  return l;
}

ItemSimFn fixed_sims(std::map<std::pair<std::size_t, std::size_t>, double> table) {
  return [table = std::move(table)](std::size_t i,
                                    std::size_t j) -> std::optional<double> {
    auto it = table.find({std::min(i, j), std::max(i, j)});
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("mae is the macro average") {
  std::vector<PredictedRating> recs = {
      {0, 0, 3.0, 4.0},  // user A, |e|=1
      {0, 1, 2.0, 1.0},  // user A, |e|=1
      {1, 0, 4.0, 4.0},  // user B, |e|=0
  };
  MetricValue v = mae(recs);
  CHECK(v.value == doctest::Approx(0.5).epsilon(1e-12));  // macro, not 2/3
  CHECK(v.users_used == 2);

  std::vector<PredictedRating> single = {{0, 0, 3.0, 3.5}, {0, 1, 1.0, 2.5}};
  CHECK(mae(single).value == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<PredictedRating> perfect = {{0, 0, 3.0, 3.0}, {1, 1, 2.0, 2.0}};
  CHECK(mae(perfect).value == 0.0);

  CHECK_THROWS_AS(mae({}), MetricError);
}

TEST_CASE("rmse roots inside the user average") {
  std::vector<PredictedRating> recs = {
      {0, 0, 3.0, 4.0},  // user A squared errors 1,1 -> per-user 1
      {0, 1, 2.0, 1.0},
      {1, 0, 4.0, 6.0},  // user B squared error 4 -> per-user 2
  };
  CHECK(rmse(recs).value == doctest::Approx(1.5).epsilon(1e-12));
  std::vector<PredictedRating> single = {{0, 0, 1.0, 3.0}};
  CHECK(rmse(single).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("per-user rmse dominates per-user mae") {
  auto interactions = synth_interactions(10, 12, 0.5, 808);
  RatingsMatrix m = RatingsMatrix::build(interactions);
  Rng rng(5);
  std::vector<PredictedRating> recs;
  for (const auto& [u, i, r] : m.entries())
    recs.push_back({u, i, r, 1.0 + 4.0 * unit_real(rng)});
  // macro-averages of pointwise-dominating terms keep the order
  CHECK(rmse(recs).value >= mae(recs).value - 1e-12);
}

TEST_CASE("coverage on the worked example") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel sims =
      build_similarity_model(m, Orientation::user_user, SimMetric::pearson, 2, 2);
  MetricValue c = coverage(m, sims);
  // u1: unrated {i3,i6}, u3 rated both -> 100
  // u2: unrated {i3}, neighbors u3 (w=.189) and u4/u1... top-2 by weight
  CHECK(c.users_used == 4);
  CHECK(c.value >= 0.0);
  CHECK(c.value <= 100.0);

  // direct check of the u1 term via a model restricted to u1's neighborhood
  std::vector<char> covered(m.item_count(), 0);
  for (const Neighbor& nb : sims.neighbors(U1))
    for (const Cell& cell : m.row(nb.index)) covered[cell.index] = 1;
  std::size_t hits = 0, unrated = 0;
  for (std::size_t i = 0; i < m.item_count(); ++i) {
    if (m.rating(U1, i)) continue;
    ++unrated;
    hits += covered[i];
  }
  CHECK(unrated == 2);
  CHECK(hits == 2);  // c_u1 = 100
}

TEST_CASE("coverage with empty neighborhoods is zero") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel sims;
  sims.orientation = Orientation::user_user;
  sims.knn_.assign(m.user_count(), {});
  MetricValue c = coverage(m, sims);
  CHECK(c.value == 0.0);
  CHECK(c.users_used == 4);
}

TEST_CASE("coverage over a user subset") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel sims =
      build_similarity_model(m, Orientation::user_user, SimMetric::pearson, 2, 2);
  std::vector<std::uint32_t> only_u1{static_cast<std::uint32_t>(U1)};
  MetricValue c = coverage(m, sims, only_u1);
  CHECK(c.users_used == 1);
  CHECK(c.value == doctest::Approx(100.0).epsilon(1e-12));  // u3 covers i3 and i6
}

TEST_CASE("precision, recall and f1 on a worked list") {
  RatingsMatrix train = table2_matrix();
  // three relevant held-out items for the user (ratings >= 4)
  std::vector<Interaction> held = {{1, 3, 5.0, 0}, {1, 6, 4.0, 0}, {1, 5, 4.0, 0}};
  TestRatings test = make_test(train, held);
  EvalConfig cfg;
  cfg.list_size = 2;
  // the 2-list holds one relevant item and one irrelevant one
  std::vector<RecommendationList> recs = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I1), 0.5}})};
  PrfResult r = precision_recall_f1(recs, test, cfg);
  CHECK(r.precision.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.recall.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("prf hand example with three relevant items") {
  RatingsMatrix train = table2_matrix();
  std::vector<Interaction> held = {
      {1, 3, 5.0, 0}, {1, 6, 4.0, 0}, {2, 6, 4.0, 0}, {2, 3, 2.0, 0}};
  // user u1 has 2 relevant held-out items; treat i3 as the only hit
  TestRatings test = make_test(train, held);
  EvalConfig cfg;
  cfg.list_size = 2;
  std::vector<RecommendationList> recs = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I5), 0.9}}),
      make_list(U2, {{static_cast<std::uint32_t>(I3), 0.7},
                     {static_cast<std::uint32_t>(I6), 0.6}})};
  PrfResult r = precision_recall_f1(recs, test, cfg);
  // u1: 1 hit / n=2; u2: 1 hit (i6) / n=2
  CHECK(r.precision.value == doctest::Approx(0.5).epsilon(1e-12));
  // u1 recall 1/2, u2 recall 1/1
  CHECK(r.recall.value == doctest::Approx(0.75).epsilon(1e-12));
  double f1 = 2 * 0.5 * 0.75 / (0.5 + 0.75);
  CHECK(r.f1 == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("prf degenerate cases") {
  RatingsMatrix train = table2_matrix();
  TestRatings test = make_test(train, {{1, 3, 5.0, 0}});
  EvalConfig cfg;
  cfg.list_size = 3;
  std::vector<RecommendationList> all_relevant = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0}})};
  // fewer retrieved than n still divides by n
  PrfResult r = precision_recall_f1(all_relevant, test, cfg);
  CHECK(r.precision.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  std::vector<RecommendationList> nothing = {
      make_list(U2, {{static_cast<std::uint32_t>(I5), 1.0}})};
  PrfResult z = precision_recall_f1(nothing, test, cfg);
  CHECK(z.precision.value == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(z.recall.users_skipped == 1);  // u2 has no relevant held-out item

  CHECK_THROWS_AS(precision_recall_f1({}, test, cfg), MetricError);
}

TEST_CASE("average precision worked values") {
  RatingsMatrix train = table2_matrix();
  TestRatings test = make_test(train, {{1, 3, 5.0, 0}, {1, 6, 4.0, 0}});
  EvalConfig cfg;
  cfg.list_size = 3;
  // relevant at ranks 1 and 3 of a 3-list, 2 relevant total -> (1 + 2/3)/2
  std::vector<RecommendationList> recs = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I5), 0.9},
                     {static_cast<std::uint32_t>(I6), 0.8}})};
  CHECK(mean_average_precision(recs, test, cfg).value ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  cfg.list_size = 1;
  std::vector<RecommendationList> top1 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0}})};
  CHECK(mean_average_precision(top1, test, cfg).value ==
        doctest::Approx(0.5).epsilon(1e-12));  // one of two relevant retrieved

  // nothing relevant in the list
  std::vector<RecommendationList> miss = {
      make_list(U1, {{static_cast<std::uint32_t>(I5), 1.0}})};
  CHECK(mean_average_precision(miss, test, cfg).value == 0.0);
}

TEST_CASE("half-life worked values") {
  RatingsMatrix train = table2_matrix();
  EvalConfig cfg;

  // single item, rating 4, rank 1, d=0 -> 4
  TestRatings t1 = make_test(train, {{1, 3, 4.0, 0}});
  cfg.halflife_alpha = 2.0;
  cfg.halflife_d = 0.0;
  std::vector<RecommendationList> r1 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0}})};
  CHECK(half_life(r1, t1, cfg).value == doctest::Approx(4.0).epsilon(1e-12));

  // same item at rank 2 with alpha=2 -> 4/2
  std::vector<RecommendationList> r2 = {
      make_list(U1, {{static_cast<std::uint32_t>(I5), 1.0},
                     {static_cast<std::uint32_t>(I3), 0.9}})};
  CHECK(half_life(r2, t1, cfg).value == doctest::Approx(2.0).epsilon(1e-12));

  // ranks 1..3 with ratings 5,3,1, d=2, alpha=3
  TestRatings t3 = make_test(train, {{1, 3, 5.0, 0}, {1, 6, 3.0, 0}, {1, 5, 1.0, 0}});
  cfg.halflife_alpha = 3.0;
  cfg.halflife_d = 2.0;
  std::vector<RecommendationList> r3 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I6), 0.9},
                     {static_cast<std::uint32_t>(I5), 0.8}})};
  double expect = 3.0 + 1.0 / std::sqrt(2.0);
  CHECK(half_life(r3, t3, cfg).value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("dcg worked values") {
  RatingsMatrix train = table2_matrix();
  EvalConfig cfg;

  TestRatings t1 = make_test(train, {{1, 3, 3.5, 0}});
  std::vector<RecommendationList> r1 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0}})};
  CHECK(dcg(r1, t1, cfg).value == doctest::Approx(3.5).epsilon(1e-12));

  // ratings (3,3): rank 2 keeps its full weight under the printed form
  TestRatings t2 = make_test(train, {{1, 3, 3.0, 0}, {1, 6, 3.0, 0}});
  std::vector<RecommendationList> r2 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I6), 0.9}})};
  CHECK(dcg(r2, t2, cfg).value == doctest::Approx(6.0).epsilon(1e-12));

  // ratings (5,4,3) -> 5 + 4 + 3/log2(3)
  TestRatings t3 = make_test(train, {{1, 3, 5.0, 0}, {1, 6, 4.0, 0}, {1, 5, 3.0, 0}});
  std::vector<RecommendationList> r3 = {
      make_list(U1, {{static_cast<std::uint32_t>(I3), 1.0},
                     {static_cast<std::uint32_t>(I6), 0.9},
                     {static_cast<std::uint32_t>(I5), 0.8}})};
  double expect = 5.0 + 4.0 + 3.0 / std::log2(3.0);
  CHECK(dcg(r3, t3, cfg).value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("novelty worked values") {
  auto sims = fixed_sims({{{0, 1}, 0.5}, {{0, 2}, 0.25}});
  RecommendationList list = make_list(0, {{0, 1.0}, {1, 0.9}, {2, 0.8}});
  auto nv = novelty(list, sims);
  REQUIRE(nv.has_value());
  // item 0 against 1 and 2: ((1-0.5)+(1-0.25))/2
  CHECK(nv->per_item[0] == doctest::Approx(0.625).epsilon(1e-12));
  // pair (1,2) is undefined -> treated as similarity 0
  CHECK(nv->per_item[1] == doctest::Approx((0.5 + 1.0) / 2.0).epsilon(1e-12));

  auto all_same = fixed_sims({{{0, 1}, 1.0}});
  RecommendationList pair = make_list(0, {{0, 1.0}, {1, 0.9}});
  CHECK(novelty(pair, all_same)->mean == doctest::Approx(0.0).epsilon(1e-12));
  auto all_diff = fixed_sims({{{0, 1}, 0.0}});
  CHECK(novelty(pair, all_diff)->mean == doctest::Approx(1.0).epsilon(1e-12));

  RecommendationList tiny = make_list(0, {{0, 1.0}});
  CHECK_FALSE(novelty(tiny, all_same).has_value());
}

TEST_CASE("diversity worked values and the mean-novelty identity") {
  auto sims = fixed_sims({{{0, 1}, 0.4}});
  RecommendationList pair = make_list(0, {{0, 1.0}, {1, 0.9}});
  CHECK(*diversity(pair, sims) == doctest::Approx(0.6).epsilon(1e-12));

  auto rich = fixed_sims({{{0, 1}, 0.5}, {{0, 2}, 0.25}, {{1, 2}, -0.2}});
  RecommendationList list = make_list(0, {{0, 1.0}, {1, 0.9}, {2, 0.8}});
  auto nv = novelty(list, rich);
  CHECK(*diversity(list, rich) == doctest::Approx(nv->mean).epsilon(1e-12));
  CHECK_FALSE(diversity(make_list(0, {{0, 1.0}}), rich).has_value());
}

TEST_CASE("set and rank metrics match a naive enumeration on random fixtures") {
  RatingsMatrix train = RatingsMatrix::build(synth_interactions(10, 14, 0.45, 33));
  Split split = split_holdout(train, 0.3, 5);
  TestRatings test = TestRatings::from_interactions(split.train, split.test);
  EvalConfig cfg;
  cfg.list_size = 4;
  cfg.dcg_k = 4;

  // arbitrary but deterministic recommendation lists over unrated items
  Rng rng(2042);
  std::vector<RecommendationList> recs;
  for (std::uint32_t u = 0; u < split.train.user_count(); ++u) {
    RecommendationList list;
    list.user = u;
    double score = 2.0;
    for (std::uint32_t i = 0; i < split.train.item_count() && list.items.size() < 4; ++i)
      if (!split.train.rating(u, i) && unit_real(rng) < 0.5)
        list.items.push_back({i, score -= 0.1});
    recs.push_back(list);
  }

  // naive re-derivations
  double prec = 0, rec_sum = 0, ap_sum = 0;
  std::size_t rec_users = 0, ap_users = 0;
  for (const auto& list : recs) {
    std::size_t hits = 0;
    double ap = 0;
    std::size_t seen_hits = 0;
    for (std::size_t rank = 1; rank <= list.items.size(); ++rank) {
      auto r = test.rating(list.user, list.items[rank - 1].item);
      bool rel = r && *r >= cfg.relevance_theta;
      if (rel) {
        ++hits;
        ++seen_hits;
        ap += static_cast<double>(seen_hits) / static_cast<double>(rank);
      }
    }
    prec += static_cast<double>(hits) / cfg.list_size;
    std::size_t total_rel = 0;
    for (const Cell& c : test.row(list.user))
      if (c.value >= cfg.relevance_theta) ++total_rel;
    if (total_rel > 0) {
      rec_sum += static_cast<double>(hits) / static_cast<double>(total_rel);
      ++rec_users;
      ap_sum += ap / static_cast<double>(total_rel);
      ++ap_users;
    }
  }
  PrfResult got = precision_recall_f1(recs, test, cfg);
  CHECK(got.precision.value == doctest::Approx(prec / recs.size()).epsilon(1e-10));
  if (rec_users)
    CHECK(got.recall.value == doctest::Approx(rec_sum / rec_users).epsilon(1e-10));
  CHECK(mean_average_precision(recs, test, cfg).value ==
        doctest::Approx(ap_users ? ap_sum / ap_users : 0.0).epsilon(1e-10));

  // novelty/diversity bounds under the cosine default
  ItemSimFn sim = make_item_sim(split.train, SimMetric::cosine, 1);
  for (const auto& list : recs) {
    auto d = diversity(list, sim);
    if (!d) continue;
    CHECK(*d >= -1e-12);
    CHECK(*d <= 1.0 + 1e-12);
    CHECK(*d == doctest::Approx(novelty(list, sim)->mean).epsilon(1e-10));
  }
}

TEST_CASE("eval config bounds are enforced") {
  EvalConfig cfg;
  cfg.halflife_alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  EvalConfig cfg2;
  cfg2.list_size = 0;
  CHECK_THROWS_AS(cfg2.validate(), DomainError);
}

TEST_SUITE_END();
