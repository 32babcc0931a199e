#include "cfkit/factorization.hpp"

#include <algorithm>
#include <cmath>

#include "cfkit/errors.hpp"
#include "cfkit/random.hpp"

namespace cfkit {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::mf: return "mf";
    case FactorKind::nmf: return "nmf";
    case FactorKind::emf: return "emf";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& name) {
  if (name == "mf") return FactorKind::mf;
  if (name == "nmf") return FactorKind::nmf;
  if (name == "emf") return FactorKind::emf;
  throw DomainError("unknown factor model kind: " + name);
}

void TrainConfig::validate() const {
  if (alpha < 0.0 || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
  if (lambda_p < 0.0 || lambda_q < 0.0 || beta < 0.0 || lambda_expl < 0.0)
    throw DomainError("regularization coefficients must be >= 0");
  if (!std::isfinite(lambda_p) || !std::isfinite(lambda_q) || !std::isfinite(beta) ||
      !std::isfinite(lambda_expl) || !std::isfinite(init_scale))
    throw DomainError("training coefficients must be finite");
  if (epochs < 1) throw DomainError("epochs must be >= 1");
  if (k < 1) throw DomainError("k must be >= 1");
}

double ExplainabilityWeights::value(std::size_t u, std::size_t i) const {
  if (u >= rows_.size()) return 0.0;
  const auto& row = rows_[u];
  auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(i),
                             [](const Cell& c, std::uint32_t k) { return c.index < k; });
  if (it != row.end() && it->index == i) return it->value;
  return 0.0;
}

std::size_t ExplainabilityWeights::stored_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

ExplainabilityWeights explainability_scores(const RatingsMatrix& train,
                                            const SimilarityModel& sims,
                                            Orientation style, double theta,
                                            int neighbor_k) {
  if (sims.orientation != style)
    throw DomainError("similarity model orientation does not match the requested style");
  if (theta < 0.0) throw DomainError("theta must be >= 0");
  if (neighbor_k < 1) throw DomainError("neighbor_k must be >= 1");

  ExplainabilityWeights w;
  w.theta = theta;
  w.neighbor_k = neighbor_k;
  w.rows_.assign(train.user_count(), {});

  if (style == Orientation::user_user) {
    // Expl(u,i) = sum of neighbor ratings of i, divided by |N_u|.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::size_t u = 0; u < train.user_count(); ++u) {  // NOLINT: OpenMP index
      const auto& nbs = sims.neighbors(u);
      const std::size_t used = std::min<std::size_t>(nbs.size(), neighbor_k);
      if (used == 0) continue;
      std::vector<double> acc(train.item_count(), 0.0);
      for (std::size_t t = 0; t < used; ++t)
        for (const Cell& c : train.row(nbs[t].index)) acc[c.index] += c.value;
      auto& row = w.rows_[u];
      for (std::size_t i = 0; i < acc.size(); ++i) {
        double expl = acc[i] / static_cast<double>(used);
        if (expl > theta) row.push_back({static_cast<std::uint32_t>(i), expl});
      }
    }
  } else {
    // Expl(u,i) = sum of u's ratings across i's similar items, over |N_i|.
    std::vector<std::vector<Cell>> neighbor_lists(train.item_count());
    for (std::size_t i = 0; i < train.item_count(); ++i) {
      const auto& nbs = sims.neighbors(i);
      const std::size_t used = std::min<std::size_t>(nbs.size(), neighbor_k);
      auto& list = neighbor_lists[i];
      for (std::size_t t = 0; t < used; ++t) list.push_back({nbs[t].index, 0.0});
      std::sort(list.begin(), list.end(),
                [](const Cell& a, const Cell& b) { return a.index < b.index; });
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::size_t u = 0; u < train.user_count(); ++u) {  // NOLINT: OpenMP index
      const auto& ru = train.row(u);
      auto& row = w.rows_[u];
      for (std::size_t i = 0; i < train.item_count(); ++i) {
        const auto& list = neighbor_lists[i];
        if (list.empty()) continue;
        double sum = 0.0;
        std::size_t a = 0, b = 0;
        while (a < list.size() && b < ru.size()) {
          if (list[a].index < ru[b].index) {
            ++a;
          } else if (ru[b].index < list[a].index) {
            ++b;
          } else {
            sum += ru[b].value;
            ++a;
            ++b;
          }
        }
        double expl = sum / static_cast<double>(list.size());
        if (expl > theta) row.push_back({static_cast<std::uint32_t>(i), expl});
      }
    }
  }
  return w;
}

void mf_step(std::span<double> user_row, std::span<double> item_row, double rating,
             const TrainConfig& cfg) {
  const double e = rating - dot(item_row, user_row);
  for (std::size_t l = 0; l < user_row.size(); ++l) {
    const double pu = user_row[l];
    const double qi = item_row[l];
    user_row[l] = pu + cfg.alpha * (e * qi - cfg.lambda_p * pu);
    item_row[l] = qi + cfg.alpha * (e * pu - cfg.lambda_q * qi);
  }
}

void emf_step(std::span<double> user_row, std::span<double> item_row, double rating,
              double expl_weight, const TrainConfig& cfg) {
  const double e = rating - dot(item_row, user_row);
  if (expl_weight != 0.0) {
    for (std::size_t l = 0; l < user_row.size(); ++l) {
      const double pu = user_row[l];
      const double qi = item_row[l];
      const double pull = cfg.lambda_expl * (pu - qi) * expl_weight;
      user_row[l] = pu + cfg.alpha * (e * qi - cfg.beta * pu - pull);
      item_row[l] = qi + cfg.alpha * (e * pu - cfg.beta * qi + pull);
    }
  } else {
    for (std::size_t l = 0; l < user_row.size(); ++l) {
      const double pu = user_row[l];
      const double qi = item_row[l];
      user_row[l] = pu + cfg.alpha * (e * qi - cfg.beta * pu);
      item_row[l] = qi + cfg.alpha * (e * pu - cfg.beta * qi);
    }
  }
}

namespace {

struct SgdState {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> entries;
  DenseMatrix p, q;
  Rng rng;
};

SgdState sgd_setup(const RatingsMatrix& shape, const TrainConfig& cfg,
                   const RatingsMatrix& effective) {
  SgdState s{effective.entries(), {}, {}, Rng(cfg.seed)};
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  s.p = DenseMatrix(shape.user_count(), k);
  s.q = DenseMatrix(shape.item_count(), k);
  for (double& x : s.p.data()) x = cfg.init_scale * unit_real(s.rng);
  for (double& x : s.q.data()) x = cfg.init_scale * unit_real(s.rng);
  return s;
}

void check_finite(const DenseMatrix& m, const char* what, int epoch) {
  for (double x : m.data())
    if (!std::isfinite(x))
      throw TrainingError(std::string(what) + " factors diverged", epoch);
}

}  // namespace

FactorModel train_mf(const RatingsMatrix& train, const TrainConfig& cfg, bool normalize) {
  cfg.validate();
  RatingsMatrix centered;
  NormalizationState state;
  if (normalize) std::tie(centered, state) = center_by_user(train);
  const RatingsMatrix& effective = normalize ? centered : train;

  SgdState s = sgd_setup(train, cfg, effective);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    seeded_shuffle(s.entries, s.rng);
    for (const auto& [u, i, r] : s.entries) mf_step(s.p.row(u), s.q.row(i), r, cfg);
    check_finite(s.p, "user", epoch + 1);
    check_finite(s.q, "item", epoch + 1);
  }

  FactorModel model;
  model.p = std::move(s.p);
  model.q = std::move(s.q);
  model.k = static_cast<std::size_t>(cfg.k);
  model.kind = FactorKind::mf;
  model.normalization = std::move(state);
  return model;
}

FactorModel train_emf(const RatingsMatrix& train, const TrainConfig& cfg,
                      const ExplainabilityWeights& weights, bool normalize) {
  cfg.validate();
  RatingsMatrix centered;
  NormalizationState state;
  if (normalize) std::tie(centered, state) = center_by_user(train);
  const RatingsMatrix& effective = normalize ? centered : train;

  SgdState s = sgd_setup(train, cfg, effective);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    seeded_shuffle(s.entries, s.rng);
    for (const auto& [u, i, r] : s.entries)
      emf_step(s.p.row(u), s.q.row(i), r, weights.value(u, i), cfg);
    check_finite(s.p, "user", epoch + 1);
    check_finite(s.q, "item", epoch + 1);
  }

  FactorModel model;
  model.p = std::move(s.p);
  model.q = std::move(s.q);
  model.k = static_cast<std::size_t>(cfg.k);
  model.kind = FactorKind::emf;
  model.normalization = std::move(state);
  return model;
}

void nmf_epoch(const RatingsMatrix& train, DenseMatrix& p, DenseMatrix& q,
               double lambda_p, double lambda_q) {
  constexpr double kEps = 1e-12;  // denominator guard
  const std::size_t k = p.cols();
  const std::size_t m = train.user_count();
  const std::size_t n = train.item_count();
  std::vector<double> numer(k), denom(k);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) firstprivate(numer, denom)
#endif
  for (std::size_t u = 0; u < m; ++u) {  // NOLINT: OpenMP index
    const auto& row = train.row(u);
    if (row.empty()) continue;
    auto prow = p.row(u);
    std::fill(numer.begin(), numer.end(), 0.0);
    std::fill(denom.begin(), denom.end(), 0.0);
    for (const Cell& c : row) {
      auto qrow = q.row(c.index);
      double pred = dot(prow, qrow);
      for (std::size_t l = 0; l < k; ++l) {
        numer[l] += qrow[l] * c.value;
        denom[l] += qrow[l] * pred;
      }
    }
    const double reg = lambda_p * static_cast<double>(row.size());
    for (std::size_t l = 0; l < k; ++l)
      prow[l] = prow[l] * numer[l] / (denom[l] + reg * prow[l] + kEps);
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) firstprivate(numer, denom)
#endif
  for (std::size_t i = 0; i < n; ++i) {  // NOLINT: OpenMP index
    const auto& col = train.col(i);
    if (col.empty()) continue;
    auto qrow = q.row(i);
    std::fill(numer.begin(), numer.end(), 0.0);
    std::fill(denom.begin(), denom.end(), 0.0);
    for (const Cell& c : col) {
      auto prow = p.row(c.index);
      double pred = dot(prow, qrow);
      for (std::size_t l = 0; l < k; ++l) {
        numer[l] += prow[l] * c.value;
        denom[l] += prow[l] * pred;
      }
    }
    const double reg = lambda_q * static_cast<double>(col.size());
    for (std::size_t l = 0; l < k; ++l)
      qrow[l] = qrow[l] * numer[l] / (denom[l] + reg * qrow[l] + kEps);
  }
}

FactorModel train_nmf(const RatingsMatrix& train, const TrainConfig& cfg) {
  cfg.validate();
  for (std::size_t u = 0; u < train.user_count(); ++u)
    for (const Cell& c : train.row(u))
      if (c.value < 0.0)
        throw DomainError("non-negative factorization needs non-negative ratings");

  const std::size_t k = static_cast<std::size_t>(cfg.k);
  Rng rng(cfg.seed);
  DenseMatrix p(train.user_count(), k), q(train.item_count(), k);
  for (double& x : p.data()) x = 1.0 - unit_real(rng);  // (0, 1]
  for (double& x : q.data()) x = 1.0 - unit_real(rng);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    nmf_epoch(train, p, q, cfg.lambda_p, cfg.lambda_q);
    check_finite(p, "user", epoch + 1);
    check_finite(q, "item", epoch + 1);
  }

  FactorModel model;
  model.p = std::move(p);
  model.q = std::move(q);
  model.k = k;
  model.kind = FactorKind::nmf;
  return model;
}

double predict_factor_raw(const FactorModel& model, std::size_t u, std::size_t i) {
  if (u >= model.p.rows()) throw DomainError("user index out of range");
  if (i >= model.q.rows()) throw DomainError("item index out of range");
  return dot(model.p.row(u), model.q.row(i)) + model.normalization.offset(u);
}

double predict_factor(const FactorModel& model, std::size_t u, std::size_t i) {
  return std::min(5.0, std::max(1.0, predict_factor_raw(model, u, i)));
}

}  // namespace cfkit
