// Times the parallel kernels against a single-threaded run of the same code
// and checks that both produce identical results. Usage:
//   kernel_bench [--users N] [--items N] [--density X] [--seed N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "cfkit/factorization.hpp"
#include "cfkit/linalg.hpp"
#include "cfkit/neighborhood.hpp"
#include "cfkit/random.hpp"
#include "cfkit/ratings.hpp"
#include "cfkit/similarity.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cfkit;

namespace {

std::vector<Interaction> synthetic_ratings(std::size_t m, std::size_t n, double density,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> out;
  for (std::size_t u = 0; u < m; ++u) {
    double bias = unit_real(rng) * 2.0;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (unit_real(rng) >= density) continue;
      double r = std::min(5.0, std::max(1.0, std::floor(1.0 + 2.5 * unit_real(rng) +
                                                        bias + 0.5)));
      out.push_back({static_cast<std::int64_t>(u + 1),
                     static_cast<std::int64_t>(i + 1), r, 0});
      any = true;
    }
    if (!any)
      out.push_back({static_cast<std::int64_t>(u + 1),
                     static_cast<std::int64_t>(1 + bounded(rng, n)), 3.0, 0});
  }
  return out;
}

double time_once(const std::function<void()>& fn) {
  auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

struct Row {
  const char* kernel;
  double serial_sec;
  double parallel_sec;
  bool identical;
};

void print_rows(const std::vector<Row>& rows, int threads) {
  std::printf("%-28s %12s %12s %9s %10s\n", "kernel", "serial (s)",
              ("x" + std::to_string(threads) + " (s)").c_str(), "speedup", "identical");
  for (const Row& r : rows) {
    std::printf("%-28s %12.3f %12.3f %8.2fx %10s\n", r.kernel, r.serial_sec,
                r.parallel_sec, r.serial_sec / std::max(r.parallel_sec, 1e-9),
                r.identical ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t users = 700, items = 900;
  double density = 0.06;
  std::uint64_t seed = 42;
  for (int a = 1; a + 1 < argc; ++a) {
    if (!std::strcmp(argv[a], "--users")) users = std::strtoull(argv[a + 1], nullptr, 10);
    if (!std::strcmp(argv[a], "--items")) items = std::strtoull(argv[a + 1], nullptr, 10);
    if (!std::strcmp(argv[a], "--density")) density = std::strtod(argv[a + 1], nullptr);
    if (!std::strcmp(argv[a], "--seed")) seed = std::strtoull(argv[a + 1], nullptr, 10);
  }

  const int threads = max_threads();
  std::printf("corpus: %zu users x %zu items, density %.3f, seed %llu\n", users, items,
              density, static_cast<unsigned long long>(seed));
#ifndef _OPENMP
  std::printf("built without OpenMP; both columns run serial code\n");
#endif

  RatingsMatrix m = RatingsMatrix::build(synthetic_ratings(users, items, density, seed));
  std::vector<Row> rows;

  {
    SimilarityModel s1, s2;
    set_threads(1);
    double t1 = time_once([&] {
      s1 = build_similarity_model(m, Orientation::user_user, SimMetric::pearson, 40, 2);
    });
    set_threads(threads);
    double t2 = time_once([&] {
      s2 = build_similarity_model(m, Orientation::user_user, SimMetric::pearson, 40, 2);
    });
    rows.push_back({"user-user pearson build", t1, t2,
                    s1.knn_ == s2.knn_ && s1.pairs_ == s2.pairs_});
  }

  {
    SimilarityModel s1, s2;
    set_threads(1);
    double t1 = time_once([&] {
      s1 = build_similarity_model(m, Orientation::item_item, SimMetric::cosine, 40, 1);
    });
    set_threads(threads);
    double t2 = time_once([&] {
      s2 = build_similarity_model(m, Orientation::item_item, SimMetric::cosine, 40, 1);
    });
    rows.push_back({"item-item cosine build", t1, t2,
                    s1.knn_ == s2.knn_ && s1.pairs_ == s2.pairs_});

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    Rng rng(seed + 1);
    for (int t = 0; t < 20000; ++t)
      pairs.push_back({static_cast<std::uint32_t>(bounded(rng, m.user_count())),
                       static_cast<std::uint32_t>(bounded(rng, m.item_count()))});
    std::vector<Prediction> p1, p2;
    set_threads(1);
    double t3 = time_once([&] { p1 = predict_batch(m, s2, pairs); });
    set_threads(threads);
    double t4 = time_once([&] { p2 = predict_batch(m, s2, pairs); });
    bool same = p1.size() == p2.size();
    for (std::size_t t = 0; same && t < p1.size(); ++t)
      same = p1[t].score == p2[t].score;
    rows.push_back({"item-based batch predict", t3, t4, same});
  }

  {
    DenseMatrix p1(m.user_count(), 16), q1(m.item_count(), 16);
    Rng rng(seed + 2);
    for (double& x : p1.data()) x = 1.0 - unit_real(rng);
    for (double& x : q1.data()) x = 1.0 - unit_real(rng);
    DenseMatrix p2 = p1, q2 = q1;
    set_threads(1);
    double t1 = time_once([&] {
      for (int e = 0; e < 5; ++e) nmf_epoch(m, p1, q1, 0.02, 0.02);
    });
    set_threads(threads);
    double t2 = time_once([&] {
      for (int e = 0; e < 5; ++e) nmf_epoch(m, p2, q2, 0.02, 0.02);
    });
    rows.push_back({"nmf epochs (k=16, 5x)", t1, t2,
                    p1.data() == p2.data() && q1.data() == q2.data()});
  }

  {
    DenseMatrix a(300, 200);
    Rng rng(seed + 3);
    for (double& x : a.data()) x = 2.0 * unit_real(rng) - 1.0;
    SvdResult r1, r2;
    set_threads(1);
    double t1 = time_once([&] { r1 = jacobi_svd(a); });
    set_threads(threads);
    double t2 = time_once([&] { r2 = jacobi_svd(a); });
    rows.push_back({"jacobi svd 300x200", t1, t2,
                    r1.sigma == r2.sigma && r1.u.data() == r2.u.data() &&
                        r1.v.data() == r2.v.data()});
  }

  set_threads(threads);
  print_rows(rows, threads);
  bool all_same = true;
  for (const Row& r : rows) all_same = all_same && r.identical;
  return all_same ? 0 : 1;
}
