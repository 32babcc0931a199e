#ifndef CFKIT_SIMILARITY_HPP_
#define CFKIT_SIMILARITY_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfkit/ratings.hpp"

namespace cfkit {

enum class Orientation { user_user, item_item };
enum class SimMetric { pearson, cosine, adjusted_cosine, euclidean };

std::string to_string(Orientation o);
std::string to_string(SimMetric m);
Orientation orientation_from_string(const std::string& name);
SimMetric sim_metric_from_string(const std::string& name);

/// min_overlap convention: pearson needs two co-rated points, the rest one.
int default_min_overlap(SimMetric metric);

// Pairwise weights. "undefined" (not enough overlap, or a zero deviation /
// zero norm) is a distinct non-error outcome reported as nullopt; an index
// out of range or a == b is a DomainError. All four metrics are symmetric.
std::optional<double> pearson(const RatingsMatrix& matrix, Orientation orientation,
                              std::size_t a, std::size_t b, int min_overlap);
std::optional<double> cosine(const RatingsMatrix& matrix, Orientation orientation,
                             std::size_t a, std::size_t b, int min_overlap);
std::optional<double> adjusted_cosine(const RatingsMatrix& matrix, std::size_t i,
                                      std::size_t j, int min_overlap);
std::optional<double> euclidean_similarity(const RatingsMatrix& matrix,
                                           Orientation orientation, std::size_t a,
                                           std::size_t b, int min_overlap);
std::optional<double> pair_similarity(const RatingsMatrix& matrix,
                                      Orientation orientation, SimMetric metric,
                                      std::size_t a, std::size_t b, int min_overlap);

struct Neighbor {
  std::uint32_t index;
  double weight;

  bool operator==(const Neighbor&) const = default;
};

/// Precomputed pairwise weights plus per-entity k-nearest-neighbor lists.
/// knn lists are sorted by weight descending, ties by ascending index, and
/// never contain undefined weights. Immutable once built.
class SimilarityModel {
 public:
  Orientation orientation = Orientation::user_user;
  SimMetric metric = SimMetric::pearson;
  int k = 0;
  int min_overlap = 1;

  std::size_t entity_count() const { return knn_.size(); }
  /// knn list of an entity. Entities past the stored range (possible after
  /// load, when trailing entities had no defined pairs) have no neighbors.
  const std::vector<Neighbor>& neighbors(std::size_t e) const;

  bool has_pairs() const { return has_pairs_; }
  std::size_t stored_pair_count() const { return pairs_.size(); }
  /// Symmetric lookup over the stored pair set. Requires has_pairs().
  std::optional<double> weight(std::size_t a, std::size_t b) const;

  /// Line-oriented text format:
  ///   simmodel v1 <orientation> <metric> <k>
  ///   <a> <b> <weight>          (one per stored pair, 17 significant digits)
  void save(std::ostream& out) const;
  static SimilarityModel load(std::istream& in);

  std::vector<std::vector<Neighbor>> knn_;
  std::vector<std::pair<std::uint64_t, double>> pairs_;  // key a*2^32+b, a<b; sorted
  bool has_pairs_ = false;
};

struct SimilarityOptions {
  /// Retain the full weight map (needed for save() and weight()); knn lists
  /// are always built. Turn off to bound memory on large datasets.
  bool store_pairs = true;
};

/// Computes weights for every pair with enough overlap and keeps the top-k
/// neighbors per entity. Pair computations run in parallel; results do not
/// depend on the worker count.
SimilarityModel build_similarity_model(const RatingsMatrix& matrix,
                                       Orientation orientation, SimMetric metric, int k,
                                       int min_overlap,
                                       const SimilarityOptions& options = {});

}  // namespace cfkit

#endif  // CFKIT_SIMILARITY_HPP_
