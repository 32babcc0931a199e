#include <cmath>
#include <sstream>

#include "cfkit/errors.hpp"
#include "cfkit/random.hpp"
#include "cfkit/similarity.hpp"
#include "doctest.h"
#include "support/reference.hpp"
#include "support/synth.hpp"
#include "support/table2.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cfkit;
using namespace cfkit::testsupport;

TEST_SUITE_BEGIN("similarity");

TEST_CASE("pearson worked values") {
  RatingsMatrix m = table2_matrix();
  CHECK(*pearson(m, Orientation::user_user, U1, U2, 2) ==
        doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(*pearson(m, Orientation::user_user, U1, U3, 2) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*pearson(m, Orientation::user_user, U1, U4, 2) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pearson is undefined for a constant overlap vector") {
  RatingsMatrix m = RatingsMatrix::build({
      {1, 1, 4, 0}, {1, 2, 4, 0}, {1, 3, 4, 0},
      {2, 1, 1, 0}, {2, 2, 5, 0}, {2, 3, 3, 0},
  });
  CHECK_FALSE(pearson(m, Orientation::user_user, 0, 1, 2).has_value());
}

TEST_CASE("pearson respects min_overlap") {
  RatingsMatrix m = table2_matrix();
  CHECK(pearson(m, Orientation::user_user, U1, U3, 2).has_value());  // 2 co-rated
  CHECK_FALSE(pearson(m, Orientation::user_user, U1, U3, 3).has_value());
}

TEST_CASE("cosine worked value and identity") {
  RatingsMatrix m = table2_matrix();
  CHECK(*cosine(m, Orientation::user_user, U1, U2, 1) ==
        doctest::Approx(28.0 / 46.0).epsilon(1e-12));
  // identical co-rated vectors
  RatingsMatrix id = RatingsMatrix::build(
      {{1, 1, 2, 0}, {1, 2, 3, 0}, {2, 1, 2, 0}, {2, 2, 3, 0}});
  CHECK(*cosine(id, Orientation::user_user, 0, 1, 1) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine of orthogonal restricted vectors is zero") {
  // zero-valued entries (as after centering) are stored co-rated cells
  RatingsMatrix base = RatingsMatrix::build(
      {{1, 1, 1, 0}, {1, 2, 1, 0}, {2, 1, 1, 0}, {2, 2, 1, 0}});
  RatingsMatrix m = RatingsMatrix::with_same_ids(
      base, {{0, 0, 1.0}, {0, 1, 0.0}, {1, 0, 0.0}, {1, 1, 1.0}});
  CHECK(*cosine(m, Orientation::user_user, 0, 1, 1) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("adjusted cosine worked value") {
  RatingsMatrix m = table2_matrix();
  CHECK(*adjusted_cosine(m, I1, I2, 1) ==
        doctest::Approx(-0.937896649808835).epsilon(1e-9));
}

TEST_CASE("adjusted cosine undefined when all deviations vanish") {
  // both users rate both items at exactly their own mean
  RatingsMatrix m = RatingsMatrix::build(
      {{1, 1, 3, 0}, {1, 2, 3, 0}, {2, 1, 4, 0}, {2, 2, 4, 0}});
  CHECK_FALSE(adjusted_cosine(m, 0, 1, 1).has_value());
}

TEST_CASE("self similarity is a domain error") {
  RatingsMatrix m = table2_matrix();
  CHECK_THROWS_AS(adjusted_cosine(m, I1, I1, 1), DomainError);
  CHECK_THROWS_AS(pearson(m, Orientation::user_user, U1, U1, 1), DomainError);
  CHECK_THROWS_AS(cosine(m, Orientation::user_user, 0, 99, 1), DomainError);
}

TEST_CASE("euclidean worked values") {
  RatingsMatrix m = table2_matrix();
  CHECK(*euclidean_similarity(m, Orientation::user_user, U1, U2, 1) ==
        doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  RatingsMatrix id = RatingsMatrix::build(
      {{1, 1, 2, 0}, {1, 2, 3, 0}, {2, 1, 2, 0}, {2, 2, 3, 0}});
  CHECK(*euclidean_similarity(id, Orientation::user_user, 0, 1, 1) == 1.0);
  CHECK_FALSE(euclidean_similarity(m, Orientation::user_user, U1, U2, 5).has_value());
}

TEST_CASE("knn lists from the worked example") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel model =
      build_similarity_model(m, Orientation::user_user, SimMetric::pearson, 2, 2);
  const auto& nn = model.neighbors(U1);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].index == U3);
  CHECK(nn[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nn[1].index == U4);
  CHECK(nn[1].weight == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("k larger than the population just shortens lists") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel model =
      build_similarity_model(m, Orientation::user_user, SimMetric::cosine, 50, 1);
  CHECK(model.neighbors(U1).size() == 3);
}

TEST_CASE("disjoint users have empty knn lists") {
  RatingsMatrix m = RatingsMatrix::build(
      {{1, 1, 3, 0}, {1, 2, 4, 0}, {2, 3, 2, 0}, {2, 4, 5, 0}});
  SimilarityModel model =
      build_similarity_model(m, Orientation::user_user, SimMetric::cosine, 3, 1);
  CHECK(model.neighbors(0).empty());
  CHECK(model.neighbors(1).empty());
  CHECK(model.stored_pair_count() == 0);
}

TEST_CASE("weights are symmetric and in range on random matrices") {
  auto interactions = synth_interactions(6, 6, 0.5, 314);
  RatingsMatrix m = RatingsMatrix::build(interactions);
  for (SimMetric metric : {SimMetric::pearson, SimMetric::cosine,
                           SimMetric::adjusted_cosine, SimMetric::euclidean}) {
    Orientation o =
        metric == SimMetric::adjusted_cosine ? Orientation::item_item : Orientation::user_user;
    std::size_t count = o == Orientation::user_user ? m.user_count() : m.item_count();
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = a + 1; b < count; ++b) {
        auto ab = pair_similarity(m, o, metric, a, b, 1);
        auto ba = pair_similarity(m, o, metric, b, a, 1);
        CHECK(ab.has_value() == ba.has_value());
        if (!ab) continue;
        CHECK(*ab == doctest::Approx(*ba).epsilon(1e-12));
        if (metric == SimMetric::euclidean) {
          CHECK(*ab > 0.0);
          CHECK(*ab <= 1.0);
        } else {
          CHECK(*ab >= -1.0 - 1e-12);
          CHECK(*ab <= 1.0 + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("metrics match the naive double-loop reference") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    RatingsMatrix m = RatingsMatrix::build(synth_interactions(6, 6, 0.5, seed));
    for (SimMetric metric : {SimMetric::pearson, SimMetric::cosine,
                             SimMetric::adjusted_cosine, SimMetric::euclidean}) {
      Orientation o = metric == SimMetric::adjusted_cosine ? Orientation::item_item
                                                           : Orientation::user_user;
      std::size_t count = o == Orientation::user_user ? m.user_count() : m.item_count();
      int min_overlap = default_min_overlap(metric);
      for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a + 1; b < count; ++b) {
          auto got = pair_similarity(m, o, metric, a, b, min_overlap);
          auto want = ref_similarity(m, o, metric, a, b, min_overlap);
          REQUIRE(got.has_value() == want.has_value());
          if (got) CHECK(*got == doctest::Approx(*want).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("pearson ignores constant shifts and cosine ignores positive scaling") {
  RatingsMatrix m = RatingsMatrix::build(synth_interactions(5, 8, 0.7, 77));
  // shift user 0's ratings by +1 (staying within bounds is irrelevant here)
  auto entries = m.entries();
  auto shifted = entries;
  for (auto& [u, i, r] : shifted)
    if (u == 0) r += 1.0;
  RatingsMatrix ms = RatingsMatrix::with_same_ids(m, shifted);
  auto scaled = entries;
  for (auto& [u, i, r] : scaled)
    if (u == 0) r *= 2.5;
  RatingsMatrix mc = RatingsMatrix::with_same_ids(m, scaled);
  for (std::size_t b = 1; b < m.user_count(); ++b) {
    auto p0 = pearson(m, Orientation::user_user, 0, b, 2);
    auto p1 = pearson(ms, Orientation::user_user, 0, b, 2);
    REQUIRE(p0.has_value() == p1.has_value());
    if (p0) CHECK(*p0 == doctest::Approx(*p1).epsilon(1e-10));
    auto c0 = cosine(m, Orientation::user_user, 0, b, 1);
    auto c1 = cosine(mc, Orientation::user_user, 0, b, 1);
    REQUIRE(c0.has_value() == c1.has_value());
    if (c0) CHECK(*c0 == doctest::Approx(*c1).epsilon(1e-10));
  }
}

TEST_CASE("build results do not depend on the worker count") {
#ifdef _OPENMP
  RatingsMatrix m = RatingsMatrix::build(synth_interactions(30, 40, 0.3, 555));
  int before = omp_get_max_threads();
  omp_set_num_threads(1);
  SimilarityModel serial =
      build_similarity_model(m, Orientation::item_item, SimMetric::pearson, 5, 2);
  omp_set_num_threads(before > 1 ? before : 2);
  SimilarityModel parallel =
      build_similarity_model(m, Orientation::item_item, SimMetric::pearson, 5, 2);
  omp_set_num_threads(before);
  REQUIRE(serial.knn_.size() == parallel.knn_.size());
  CHECK(serial.knn_ == parallel.knn_);
  CHECK(serial.pairs_ == parallel.pairs_);
#endif
}

TEST_CASE("build parameter bounds") {
  RatingsMatrix m = table2_matrix();
  CHECK_THROWS_AS(
      build_similarity_model(m, Orientation::user_user, SimMetric::cosine, 0, 1),
      DomainError);
  CHECK_THROWS_AS(
      build_similarity_model(m, Orientation::user_user, SimMetric::cosine, 2, 0),
      DomainError);
  CHECK_THROWS_AS(
      build_similarity_model(m, Orientation::user_user, SimMetric::adjusted_cosine, 2, 1),
      DomainError);
}

TEST_CASE("model text round-trip preserves weights and knn") {
  RatingsMatrix m = table2_matrix();
  SimilarityModel model =
      build_similarity_model(m, Orientation::item_item, SimMetric::cosine, 2, 1);
  std::stringstream io;
  model.save(io);
  SimilarityModel back = SimilarityModel::load(io);
  CHECK(back.orientation == model.orientation);
  CHECK(back.metric == model.metric);
  CHECK(back.k == model.k);
  CHECK(back.pairs_ == model.pairs_);
  CHECK(back.knn_ == model.knn_);
}

TEST_CASE("loading a future version fails") {
  std::istringstream in("simmodel v9 user_user cosine 10\n");
  CHECK_THROWS_AS(SimilarityModel::load(in), VersionError);
}

TEST_SUITE_END();
