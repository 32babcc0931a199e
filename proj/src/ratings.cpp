#include "cfkit/ratings.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <set>
#include <tuple>

#include "cfkit/errors.hpp"
#include "cfkit/random.hpp"

namespace cfkit {

std::string to_string(DatasetFormat format) {
  return format == DatasetFormat::ml100k ? "ml100k" : "ml1m";
}

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "ml100k") return DatasetFormat::ml100k;
  if (name == "ml1m") return DatasetFormat::ml1m;
  throw DomainError("unknown dataset format: " + name);
}

std::string to_string(Normalization kind) {
  return kind == Normalization::none ? "none" : "user_mean_center";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "user_mean_center") return Normalization::user_mean_center;
  throw DomainError("unknown normalization kind: " + name);
}

namespace {

std::vector<std::string> split_fields(const std::string& line, DatasetFormat format) {
  std::vector<std::string> out;
  if (format == DatasetFormat::ml100k) {
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        out.push_back(line.substr(start));
        break;
      }
      out.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  } else {
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find("::", start);
      if (pos == std::string::npos) {
        out.push_back(line.substr(start));
        break;
      }
      out.push_back(line.substr(start, pos - start));
      start = pos + 2;
    }
  }
  return out;
}

std::int64_t parse_int(const std::string& field, std::size_t line_no, const char* what) {
  if (field.empty()) throw ParseError(std::string("empty ") + what + " field", line_no);
  char* end = nullptr;
  long long v = std::strtoll(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size())
    throw ParseError(std::string("bad ") + what + " field '" + field + "'", line_no);
  return v;
}

double parse_real(const std::string& field, std::size_t line_no, const char* what) {
  if (field.empty()) throw ParseError(std::string("empty ") + what + " field", line_no);
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    throw ParseError(std::string("bad ") + what + " field '" + field + "'", line_no);
  return v;
}

}  // namespace

std::vector<Interaction> parse_interactions(std::istream& in, DatasetFormat format) {
  std::vector<Interaction> out;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line, format);
    if (fields.size() != 4)
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
    Interaction it;
    it.user = parse_int(fields[0], line_no, "user");
    it.item = parse_int(fields[1], line_no, "item");
    it.rating = parse_real(fields[2], line_no, "rating");
    it.timestamp = parse_int(fields[3], line_no, "timestamp");
    if (it.rating < 1.0 || it.rating > 5.0)
      throw DomainError("rating " + fields[2] + " outside [1,5] at line " +
                        std::to_string(line_no));
    if (!seen.insert({it.user, it.item}).second)
      throw DuplicateError("duplicate (user,item) pair (" + std::to_string(it.user) +
                           "," + std::to_string(it.item) + ") at line " +
                           std::to_string(line_no));
    out.push_back(it);
  }
  return out;
}

void RatingsMatrix::index_entries(
    const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& entries) {
  const std::size_t m = user_raw_.size();
  const std::size_t n = item_raw_.size();
  rows_.assign(m, {});
  cols_.assign(n, {});
  count_ = entries.size();
  double total = 0.0;
  for (const auto& [u, i, r] : entries) {
    rows_[u].push_back({i, r});
    cols_[i].push_back({u, r});
    total += r;
  }
  for (auto& row : rows_)
    std::sort(row.begin(), row.end(),
              [](const Cell& a, const Cell& b) { return a.index < b.index; });
  for (auto& col : cols_)
    std::sort(col.begin(), col.end(),
              [](const Cell& a, const Cell& b) { return a.index < b.index; });
  global_mean_ = count_ > 0 ? total / static_cast<double>(count_) : 0.0;
  user_means_.assign(m, 0.0);
  for (std::size_t u = 0; u < m; ++u) {
    double s = 0.0;
    for (const Cell& c : rows_[u]) s += c.value;
    user_means_[u] = rows_[u].empty() ? 0.0 : s / static_cast<double>(rows_[u].size());
  }
  item_means_.assign(n, global_mean_);
  for (std::size_t i = 0; i < n; ++i) {
    if (cols_[i].empty()) continue;
    double s = 0.0;
    for (const Cell& c : cols_[i]) s += c.value;
    item_means_[i] = s / static_cast<double>(cols_[i].size());
  }
}

RatingsMatrix RatingsMatrix::build(const std::vector<Interaction>& interactions) {
  if (interactions.empty()) throw EmptyDatasetError("no interactions to build from");
  RatingsMatrix m;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> entries;
  entries.reserve(interactions.size());
  for (const Interaction& it : interactions) {
    auto [uit, unew] =
        m.user_idx_.try_emplace(it.user, static_cast<std::uint32_t>(m.user_raw_.size()));
    if (unew) m.user_raw_.push_back(it.user);
    auto [iit, inew] =
        m.item_idx_.try_emplace(it.item, static_cast<std::uint32_t>(m.item_raw_.size()));
    if (inew) m.item_raw_.push_back(it.item);
    entries.emplace_back(uit->second, iit->second, it.rating);
  }
  m.index_entries(entries);
  return m;
}

RatingsMatrix RatingsMatrix::with_same_ids(
    const RatingsMatrix& like,
    const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& entries) {
  RatingsMatrix m;
  m.user_raw_ = like.user_raw_;
  m.item_raw_ = like.item_raw_;
  m.user_idx_ = like.user_idx_;
  m.item_idx_ = like.item_idx_;
  m.index_entries(entries);
  return m;
}

std::optional<double> RatingsMatrix::rating(std::size_t u, std::size_t i) const {
  if (u >= user_count()) throw DomainError("user index out of range");
  if (i >= item_count()) throw DomainError("item index out of range");
  const auto& row = rows_[u];
  auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(i),
                             [](const Cell& c, std::uint32_t key) { return c.index < key; });
  if (it != row.end() && it->index == i) return it->value;
  return std::nullopt;
}

std::size_t RatingsMatrix::user_index(std::int64_t raw) const {
  auto it = user_idx_.find(raw);
  if (it == user_idx_.end())
    throw DomainError("unknown user id " + std::to_string(raw));
  return it->second;
}

std::size_t RatingsMatrix::item_index(std::int64_t raw) const {
  auto it = item_idx_.find(raw);
  if (it == item_idx_.end())
    throw DomainError("unknown item id " + std::to_string(raw));
  return it->second;
}

std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> RatingsMatrix::entries()
    const {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> out;
  out.reserve(count_);
  for (std::size_t u = 0; u < rows_.size(); ++u)
    for (const Cell& c : rows_[u])
      out.emplace_back(static_cast<std::uint32_t>(u), c.index, c.value);
  return out;
}

Split split_holdout(const RatingsMatrix& matrix, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DomainError("holdout ratio must be in (0,1)");
  auto entries = matrix.entries();
  std::vector<char> in_test(entries.size(), 0);
  Rng rng(seed);
  for (std::size_t e = 0; e < entries.size(); ++e)
    in_test[e] = unit_real(rng) < ratio ? 1 : 0;

  // Keep-one guard: a user row (then an item column) may not lose all of its
  // train ratings. Entries are in (u asc, i asc) order, so "first" is stable.
  std::vector<std::vector<std::size_t>> per_user(matrix.user_count());
  std::vector<std::vector<std::size_t>> per_item(matrix.item_count());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    per_user[std::get<0>(entries[e])].push_back(e);
    per_item[std::get<1>(entries[e])].push_back(e);
  }
  for (const auto& list : per_user) {
    if (list.empty()) continue;
    bool any_train = false;
    for (std::size_t e : list) any_train = any_train || !in_test[e];
    if (!any_train) in_test[list.front()] = 0;
  }
  for (const auto& list : per_item) {
    if (list.empty()) continue;
    bool any_train = false;
    for (std::size_t e : list) any_train = any_train || !in_test[e];
    if (!any_train) in_test[list.front()] = 0;
  }

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> train_entries;
  std::vector<Interaction> test;
  train_entries.reserve(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& [u, i, r] = entries[e];
    if (in_test[e]) {
      test.push_back({matrix.user_raw(u), matrix.item_raw(i), r, 0});
    } else {
      train_entries.push_back(entries[e]);
    }
  }
  Split s;
  s.train = RatingsMatrix::with_same_ids(matrix, train_entries);
  s.test = std::move(test);
  s.ratio = ratio;
  s.seed = seed;
  return s;
}

std::pair<RatingsMatrix, NormalizationState> center_by_user(const RatingsMatrix& matrix) {
  NormalizationState state;
  state.kind = Normalization::user_mean_center;
  state.user_means.resize(matrix.user_count());
  for (std::size_t u = 0; u < matrix.user_count(); ++u)
    state.user_means[u] = matrix.user_mean(u);
  auto entries = matrix.entries();
  for (auto& [u, i, r] : entries) r -= state.user_means[u];
  return {RatingsMatrix::with_same_ids(matrix, entries), state};
}

DenseMatrix impute_item_means(const RatingsMatrix& matrix) {
  DenseMatrix dense(matrix.user_count(), matrix.item_count());
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    auto row = dense.row(u);
    for (std::size_t i = 0; i < matrix.item_count(); ++i) row[i] = matrix.item_mean(i);
    for (const Cell& c : matrix.row(u)) row[c.index] = c.value;
  }
  return dense;
}

}  // namespace cfkit
