#ifndef CFKIT_RATINGS_HPP_
#define CFKIT_RATINGS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cfkit/dense.hpp"

namespace cfkit {

/// One parsed rating event. Raw identifiers are whatever the source file
/// used; dense indices exist only inside RatingsMatrix.
struct Interaction {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;  // retained, unused by the algorithms

  bool operator==(const Interaction&) const = default;
};

enum class DatasetFormat { ml100k, ml1m };

std::string to_string(DatasetFormat format);
DatasetFormat dataset_format_from_string(const std::string& name);

/// Parses TAB-separated (ml100k) or "::"-separated (ml1m) rating rows.
/// Rejects malformed rows, ratings outside [1,5] and duplicate (user,item)
/// pairs. Order of valid rows is preserved. CRLF endings are accepted.
std::vector<Interaction> parse_interactions(std::istream& in, DatasetFormat format);

/// Sparse matrix cell as seen from a row (index = item) or a column
/// (index = user). Lists are kept sorted by index.
struct Cell {
  std::uint32_t index;
  double value;

  bool operator==(const Cell&) const = default;
};

/// Sparse user x item ratings with row and column access, raw<->dense id
/// maps and cached means. Immutable once built; safe to share across threads.
class RatingsMatrix {
 public:
  RatingsMatrix() = default;  // empty; fill via build or with_same_ids

  static RatingsMatrix build(const std::vector<Interaction>& interactions);

  std::size_t user_count() const { return rows_.size(); }
  std::size_t item_count() const { return cols_.size(); }
  std::size_t rating_count() const { return count_; }

  const std::vector<Cell>& row(std::size_t u) const { return rows_[u]; }
  const std::vector<Cell>& col(std::size_t i) const { return cols_[i]; }

  double user_mean(std::size_t u) const { return user_means_[u]; }
  double item_mean(std::size_t i) const { return item_means_[i]; }
  double global_mean() const { return global_mean_; }

  /// Stored rating, or nullopt for a missing cell. Indices must be valid.
  std::optional<double> rating(std::size_t u, std::size_t i) const;

  // Raw id boundary. Unknown identifiers are a DomainError: cold entities
  // never reach the recommenders.
  std::size_t user_index(std::int64_t raw) const;
  std::size_t item_index(std::int64_t raw) const;
  bool knows_user(std::int64_t raw) const { return user_idx_.count(raw) != 0; }
  bool knows_item(std::int64_t raw) const { return item_idx_.count(raw) != 0; }
  std::int64_t user_raw(std::size_t u) const { return user_raw_[u]; }
  std::int64_t item_raw(std::size_t i) const { return item_raw_[i]; }

  /// All entries as (user, item, rating) in row-major (u asc, i asc) order.
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> entries() const;

  /// Rebuilds a matrix over the same id universe from a new entry set.
  /// Entry list must be duplicate-free; empty rows/cols are allowed.
  static RatingsMatrix with_same_ids(
      const RatingsMatrix& like,
      const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& entries);

 private:
  void index_entries(
      const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& entries);

  std::vector<std::vector<Cell>> rows_;
  std::vector<std::vector<Cell>> cols_;
  std::vector<double> user_means_;
  std::vector<double> item_means_;  // empty column falls back to global mean
  double global_mean_ = 0.0;
  std::size_t count_ = 0;
  std::vector<std::int64_t> user_raw_;
  std::vector<std::int64_t> item_raw_;
  std::unordered_map<std::int64_t, std::uint32_t> user_idx_;
  std::unordered_map<std::int64_t, std::uint32_t> item_idx_;
};

/// Seeded per-entry holdout. Train and test partition the input entry set
/// exactly; a keep-one guard makes sure no train user row or item column
/// goes empty. Same (matrix, ratio, seed) reproduces the same split.
struct Split {
  RatingsMatrix train;
  std::vector<Interaction> test;  // raw ids, original ratings
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

Split split_holdout(const RatingsMatrix& matrix, double ratio, std::uint64_t seed);

enum class Normalization { none, user_mean_center };

std::string to_string(Normalization kind);
Normalization normalization_from_string(const std::string& name);

/// Offsets captured when a transform was fitted, so predictions can undo it.
struct NormalizationState {
  Normalization kind = Normalization::none;
  std::vector<double> user_means;

  double offset(std::size_t u) const {
    return kind == Normalization::user_mean_center ? user_means[u] : 0.0;
  }
};

/// Subtracts each user's mean from their ratings. Inverting the transform
/// restores every rating to within 1e-12.
std::pair<RatingsMatrix, NormalizationState> center_by_user(const RatingsMatrix& matrix);

/// Dense copy where missing cells hold the item mean (global mean for items
/// nobody rated). Observed cells keep their value.
DenseMatrix impute_item_means(const RatingsMatrix& matrix);

}  // namespace cfkit

#endif  // CFKIT_RATINGS_HPP_
