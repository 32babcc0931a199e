#include "cfkit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cfkit/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfkit {

std::string to_string(Orientation o) {
  return o == Orientation::user_user ? "user_user" : "item_item";
}

std::string to_string(SimMetric m) {
  switch (m) {
    case SimMetric::pearson: return "pearson";
    case SimMetric::cosine: return "cosine";
    case SimMetric::adjusted_cosine: return "adjusted_cosine";
    case SimMetric::euclidean: return "euclidean";
  }
  return "?";
}

Orientation orientation_from_string(const std::string& name) {
  if (name == "user_user") return Orientation::user_user;
  if (name == "item_item") return Orientation::item_item;
  throw DomainError("unknown orientation: " + name);
}

SimMetric sim_metric_from_string(const std::string& name) {
  if (name == "pearson") return SimMetric::pearson;
  if (name == "cosine") return SimMetric::cosine;
  if (name == "adjusted_cosine") return SimMetric::adjusted_cosine;
  if (name == "euclidean") return SimMetric::euclidean;
  throw DomainError("unknown similarity metric: " + name);
}

int default_min_overlap(SimMetric metric) {
  return metric == SimMetric::pearson ? 2 : 1;
}

namespace {

std::size_t axis_count(const RatingsMatrix& m, Orientation o) {
  return o == Orientation::user_user ? m.user_count() : m.item_count();
}

const std::vector<Cell>& axis_vector(const RatingsMatrix& m, Orientation o,
                                     std::size_t e) {
  return o == Orientation::user_user ? m.row(e) : m.col(e);
}

void check_pair(const RatingsMatrix& m, Orientation o, std::size_t a, std::size_t b) {
  std::size_t count = axis_count(m, o);
  if (a >= count || b >= count) throw DomainError("similarity index out of range");
  if (a == b) throw DomainError("similarity of an entity with itself is not defined");
}

/// Co-observed values of two sorted sparse vectors.
void gather_overlap(const std::vector<Cell>& va, const std::vector<Cell>& vb,
                    std::vector<double>& xs, std::vector<double>& ys,
                    std::vector<std::uint32_t>* where = nullptr) {
  xs.clear();
  ys.clear();
  if (where) where->clear();
  std::size_t i = 0, j = 0;
  while (i < va.size() && j < vb.size()) {
    if (va[i].index < vb[j].index) {
      ++i;
    } else if (vb[j].index < va[i].index) {
      ++j;
    } else {
      xs.push_back(va[i].value);
      ys.push_back(vb[j].value);
      if (where) where->push_back(va[i].index);
      ++i;
      ++j;
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Deviation-form correlation. Exact zero deviation norms (constant vectors)
// come out as exact zeros here, which is what the undefined test needs.
std::optional<double> correlate(const std::vector<double>& xs,
                                const std::vector<double>& ys, double mx, double my) {
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    double a = xs[t] - mx;
    double b = ys[t] - my;
    num += a * b;
    dx += a * a;
    dy += b * b;
  }
  if (dx == 0.0 || dy == 0.0) return std::nullopt;
  return num / (std::sqrt(dx) * std::sqrt(dy));
}

struct PairBuffers {
  std::vector<double> xs, ys;
  std::vector<std::uint32_t> keys;
};

std::optional<double> pair_weight(const RatingsMatrix& m, Orientation o, SimMetric metric,
                                  std::size_t a, std::size_t b, int min_overlap,
                                  PairBuffers& buf) {
  const auto& va = axis_vector(m, o, a);
  const auto& vb = axis_vector(m, o, b);
  switch (metric) {
    case SimMetric::pearson: {
      gather_overlap(va, vb, buf.xs, buf.ys);
      if (buf.xs.size() < static_cast<std::size_t>(min_overlap) || buf.xs.empty())
        return std::nullopt;
      return correlate(buf.xs, buf.ys, mean_of(buf.xs), mean_of(buf.ys));
    }
    case SimMetric::cosine: {
      gather_overlap(va, vb, buf.xs, buf.ys);
      if (buf.xs.size() < static_cast<std::size_t>(min_overlap) || buf.xs.empty())
        return std::nullopt;
      double num = 0.0, dx = 0.0, dy = 0.0;
      for (std::size_t t = 0; t < buf.xs.size(); ++t) {
        num += buf.xs[t] * buf.ys[t];
        dx += buf.xs[t] * buf.xs[t];
        dy += buf.ys[t] * buf.ys[t];
      }
      if (dx == 0.0 || dy == 0.0) return std::nullopt;
      return num / (std::sqrt(dx) * std::sqrt(dy));
    }
    case SimMetric::adjusted_cosine: {
      // Item orientation only; deviations use each co-rater's full-row mean.
      gather_overlap(va, vb, buf.xs, buf.ys, &buf.keys);
      if (buf.xs.size() < static_cast<std::size_t>(min_overlap) || buf.xs.empty())
        return std::nullopt;
      double num = 0.0, dx = 0.0, dy = 0.0;
      for (std::size_t t = 0; t < buf.xs.size(); ++t) {
        double mu = m.user_mean(buf.keys[t]);
        double da = buf.xs[t] - mu;
        double db = buf.ys[t] - mu;
        num += da * db;
        dx += da * da;
        dy += db * db;
      }
      if (dx == 0.0 || dy == 0.0) return std::nullopt;
      return num / (std::sqrt(dx) * std::sqrt(dy));
    }
    case SimMetric::euclidean: {
      gather_overlap(va, vb, buf.xs, buf.ys);
      if (buf.xs.size() < static_cast<std::size_t>(min_overlap) || buf.xs.empty())
        return std::nullopt;
      double d2 = 0.0;
      for (std::size_t t = 0; t < buf.xs.size(); ++t) {
        double d = buf.xs[t] - buf.ys[t];
        d2 += d * d;
      }
      return 1.0 / (1.0 + std::sqrt(d2));
    }
  }
  return std::nullopt;
}

bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.index < b.index;
}

void topk_insert(std::vector<Neighbor>& list, Neighbor n, std::size_t k) {
  if (list.size() == k && !neighbor_before(n, list.back())) return;
  auto pos = std::upper_bound(list.begin(), list.end(), n, neighbor_before);
  list.insert(pos, n);
  if (list.size() > k) list.pop_back();
}

}  // namespace

std::optional<double> pearson(const RatingsMatrix& m, Orientation o, std::size_t a,
                              std::size_t b, int min_overlap) {
  check_pair(m, o, a, b);
  PairBuffers buf;
  return pair_weight(m, o, SimMetric::pearson, a, b, min_overlap, buf);
}

std::optional<double> cosine(const RatingsMatrix& m, Orientation o, std::size_t a,
                             std::size_t b, int min_overlap) {
  check_pair(m, o, a, b);
  PairBuffers buf;
  return pair_weight(m, o, SimMetric::cosine, a, b, min_overlap, buf);
}

std::optional<double> adjusted_cosine(const RatingsMatrix& m, std::size_t i,
                                      std::size_t j, int min_overlap) {
  check_pair(m, Orientation::item_item, i, j);
  PairBuffers buf;
  return pair_weight(m, Orientation::item_item, SimMetric::adjusted_cosine, i, j,
                     min_overlap, buf);
}

std::optional<double> euclidean_similarity(const RatingsMatrix& m, Orientation o,
                                           std::size_t a, std::size_t b,
                                           int min_overlap) {
  check_pair(m, o, a, b);
  PairBuffers buf;
  return pair_weight(m, o, SimMetric::euclidean, a, b, min_overlap, buf);
}

std::optional<double> pair_similarity(const RatingsMatrix& m, Orientation o,
                                      SimMetric metric, std::size_t a, std::size_t b,
                                      int min_overlap) {
  if (metric == SimMetric::adjusted_cosine && o != Orientation::item_item)
    throw DomainError("adjusted cosine is defined for item pairs only");
  check_pair(m, o, a, b);
  PairBuffers buf;
  return pair_weight(m, o, metric, a, b, min_overlap, buf);
}

const std::vector<Neighbor>& SimilarityModel::neighbors(std::size_t e) const {
  static const std::vector<Neighbor> empty;
  return e < knn_.size() ? knn_[e] : empty;
}

std::optional<double> SimilarityModel::weight(std::size_t a, std::size_t b) const {
  if (!has_pairs_) throw DomainError("similarity model was built without stored pairs");
  if (a == b) throw DomainError("similarity of an entity with itself is not defined");
  std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
  std::uint64_t key = (lo << 32) | hi;
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                             [](const auto& p, std::uint64_t k) { return p.first < k; });
  if (it != pairs_.end() && it->first == key) return it->second;
  return std::nullopt;
}

SimilarityModel build_similarity_model(const RatingsMatrix& matrix,
                                       Orientation orientation, SimMetric metric, int k,
                                       int min_overlap, const SimilarityOptions& options) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (min_overlap < 1) throw DomainError("min_overlap must be at least 1");
  if (metric == SimMetric::adjusted_cosine && orientation != Orientation::item_item)
    throw DomainError("adjusted cosine is defined for item pairs only");

  const std::size_t n = axis_count(matrix, orientation);
  SimilarityModel model;
  model.orientation = orientation;
  model.metric = metric;
  model.k = k;
  model.min_overlap = min_overlap;
  model.knn_.assign(n, {});
  model.has_pairs_ = options.store_pairs;

  // Pair weights are computed a chunk of rows at a time so the transient
  // (a,b,w) lists stay small; the serial scatter that follows each chunk
  // keeps knn contents independent of the worker count.
  const std::size_t chunk = 256;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> lists(
      std::min(chunk, n == 0 ? std::size_t{0} : n));
  for (std::size_t base = 0; base < n; base += chunk) {
    const std::size_t end = std::min(base + chunk, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
    for (std::size_t a = base; a < end; ++a) {  // NOLINT: OpenMP index
      PairBuffers buf;
      auto& list = lists[a - base];
      list.clear();
      if (axis_vector(matrix, orientation, a).empty()) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        auto w = pair_weight(matrix, orientation, metric, a, b, min_overlap, buf);
        if (w) list.emplace_back(static_cast<std::uint32_t>(b), *w);
      }
    }
    for (std::size_t a = base; a < end; ++a) {
      const auto& list = lists[a - base];
      for (const auto& [b, w] : list) {
        topk_insert(model.knn_[a], {b, w}, static_cast<std::size_t>(k));
        topk_insert(model.knn_[b], {static_cast<std::uint32_t>(a), w},
                    static_cast<std::size_t>(k));
        if (options.store_pairs)
          model.pairs_.emplace_back((static_cast<std::uint64_t>(a) << 32) | b, w);
      }
    }
  }
  return model;
}

void SimilarityModel::save(std::ostream& out) const {
  if (!has_pairs_)
    throw DomainError("similarity model was built without stored pairs; cannot save");
  out << "simmodel v1 " << to_string(orientation) << ' ' << to_string(metric) << ' ' << k
      << '\n';
  char buf[64];
  for (const auto& [key, w] : pairs_) {
    std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t b = static_cast<std::uint32_t>(key & 0xffffffffu);
    std::snprintf(buf, sizeof buf, "%u %u %.17g\n", a, b, w);
    out << buf;
  }
}

SimilarityModel SimilarityModel::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw CorruptModelError("empty similarity model file", 0);
  std::istringstream hs(header);
  std::string magic, version, orientation_name, metric_name;
  int k = 0;
  if (!(hs >> magic >> version >> orientation_name >> metric_name >> k) ||
      magic != "simmodel")
    throw CorruptModelError("bad similarity model header", 0);
  if (version != "v1") throw VersionError("unsupported simmodel version " + version);

  SimilarityModel model;
  model.orientation = orientation_from_string(orientation_name);
  model.metric = sim_metric_from_string(metric_name);
  model.k = k;
  model.min_overlap = 1;  // not part of the format; pairs were filtered at build
  model.has_pairs_ = true;

  std::size_t offset = header.size() + 1;
  std::string line;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      offset += line.size() + 1;
      continue;
    }
    std::istringstream ls(line);
    std::uint64_t a = 0, b = 0;
    double w = 0.0;
    if (!(ls >> a >> b >> w) || a >= b)
      throw CorruptModelError("bad similarity pair line", offset);
    model.pairs_.emplace_back((a << 32) | b, w);
    max_index = std::max(max_index, static_cast<std::size_t>(b));
    offset += line.size() + 1;
  }
  if (!model.pairs_.empty() &&
      !std::is_sorted(model.pairs_.begin(), model.pairs_.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; }))
    throw CorruptModelError("similarity pairs out of order", offset);

  model.knn_.assign(model.pairs_.empty() ? 0 : max_index + 1, {});
  for (const auto& [key, w] : model.pairs_) {
    std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t b = static_cast<std::uint32_t>(key & 0xffffffffu);
    topk_insert(model.knn_[a], {b, w}, static_cast<std::size_t>(model.k));
    topk_insert(model.knn_[b], {a, w}, static_cast<std::size_t>(model.k));
  }
  return model;
}

}  // namespace cfkit
