#include "cfkit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "cfkit/errors.hpp"
#include "cfkit/metrics.hpp"
#include "cfkit/neighborhood.hpp"
#include "cfkit/report.hpp"

namespace cfkit {

namespace {

constexpr const char* kDownloadHint =
    "download the MovieLens archive from "
    "https://files.grouplens.org/datasets/movielens/ and point the plan's "
    "data key at the ratings file (u.data for ml100k, ratings.dat for ml1m)";

struct ReferenceCell {
  double value;
  double tol;
};

ReferenceCell memory_reference(DatasetFormat dataset, Orientation o, SimMetric m) {
  const bool user = o == Orientation::user_user;
  const bool cos = m == SimMetric::cosine;
  if (dataset == DatasetFormat::ml100k) {
    if (user && !cos) return {0.81, 0.05};
    if (user && cos) return {0.75, 0.05};
    if (!user && !cos) return {0.83, 0.05};
    return {0.51, 0.15};
  }
  if (user && !cos) return {0.81, 0.05};
  if (user && cos) return {0.73, 0.05};
  if (!user && !cos) return {0.82, 0.05};
  return {0.42, 0.15};
}

ReferenceCell factor_reference(DatasetFormat dataset, FactorKind kind, bool normalize) {
  if (dataset == DatasetFormat::ml100k) {
    switch (kind) {
      case FactorKind::mf: return normalize ? ReferenceCell{0.828, 0.08}
                                            : ReferenceCell{1.497, 0.15};
      case FactorKind::nmf: return {0.951, 0.10};
      case FactorKind::emf: return normalize ? ReferenceCell{0.783, 0.08}
                                             : ReferenceCell{0.797, 0.08};
    }
  }
  switch (kind) {
    case FactorKind::mf: return normalize ? ReferenceCell{0.825, 0.08}
                                          : ReferenceCell{1.482, 0.15};
    case FactorKind::nmf: return {0.9567, 0.10};
    case FactorKind::emf: return normalize ? ReferenceCell{0.758, 0.08}
                                           : ReferenceCell{0.76, 0.08};
  }
  return {0.0, 0.0};
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<MemoryArm> reference_memory_arms(DatasetFormat dataset, int k,
                                             int min_overlap) {
  std::vector<MemoryArm> arms;
  const struct {
    const char* name;
    Orientation o;
    SimMetric m;
  } grid[] = {
      {"user-euclidean", Orientation::user_user, SimMetric::euclidean},
      {"user-cosine", Orientation::user_user, SimMetric::cosine},
      {"item-euclidean", Orientation::item_item, SimMetric::euclidean},
      {"item-cosine", Orientation::item_item, SimMetric::cosine},
  };
  for (const auto& g : grid) {
    MemoryArm arm;
    arm.name = g.name;
    arm.orientation = g.o;
    arm.metric = g.m;
    arm.k = k;
    arm.min_overlap = min_overlap;
    ReferenceCell ref = memory_reference(dataset, g.o, g.m);
    arm.target = ref.value;
    arm.target_tol = ref.tol;
    arms.push_back(arm);
  }
  return arms;
}

std::vector<FactorArm> reference_factor_arms(DatasetFormat dataset,
                                             const FactorGridOptions& options) {
  std::vector<FactorArm> arms;
  const struct {
    FactorKind kind;
    bool normalize;
  } grid[] = {
      {FactorKind::mf, false},  {FactorKind::nmf, false},  {FactorKind::emf, false},
      {FactorKind::mf, true},   {FactorKind::nmf, true},   {FactorKind::emf, true},
  };
  for (const auto& g : grid) {
    FactorArm arm;
    arm.kind = g.kind;
    arm.normalize = g.normalize;
    arm.name = to_string(g.kind) + (g.normalize ? "-normalized" : "-raw");
    arm.cfg = options.base;
    arm.expl_theta = options.expl_theta;
    arm.expl_neighbor_k = options.expl_neighbor_k;
    if (g.kind == FactorKind::mf) {
      if (options.mf_alpha) arm.cfg.alpha = *options.mf_alpha;
      if (options.mf_init_scale) arm.cfg.init_scale = *options.mf_init_scale;
    }
    if (g.kind == FactorKind::emf) {
      if (options.emf_alpha) arm.cfg.alpha = *options.emf_alpha;
      if (options.emf_init_scale) arm.cfg.init_scale = *options.emf_init_scale;
    }
    if (g.kind == FactorKind::nmf && g.normalize) {
      arm.not_applicable = true;  // centered ratings go negative
    } else {
      ReferenceCell ref = factor_reference(dataset, g.kind, g.normalize);
      arm.target = ref.value;
      arm.target_tol = ref.tol;
    }
    arms.push_back(arm);
  }
  return arms;
}

RatingsMatrix load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("dataset file " + path + " is missing; " + kDownloadHint);
  return RatingsMatrix::build(parse_interactions(in, format));
}

namespace {

double macro_mae_over_test(const RatingsMatrix& train,
                           const std::vector<Interaction>& test,
                           const std::vector<double>& predictions) {
  std::vector<PredictedRating> records(test.size());
  for (std::size_t t = 0; t < test.size(); ++t) {
    records[t].user = static_cast<std::uint32_t>(train.user_index(test[t].user));
    records[t].item = static_cast<std::uint32_t>(train.item_index(test[t].item));
    records[t].actual = test[t].rating;
    records[t].predicted = predictions[t];
  }
  return mae(records).value;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> dense_pairs(
    const RatingsMatrix& train, const std::vector<Interaction>& test) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(test.size());
  for (std::size_t t = 0; t < test.size(); ++t)
    pairs[t] = {static_cast<std::uint32_t>(train.user_index(test[t].user)),
                static_cast<std::uint32_t>(train.item_index(test[t].item))};
  return pairs;
}

void annotate_target(BenchRow& row, const std::optional<double>& target, double tol) {
  if (!target) return;
  double dev = std::abs(row.value - *target);
  if (dev <= tol) {
    row.note = "within " + format_fixed(tol, 2) + " of reference " + format_fixed(*target);
  } else {
    row.note = "DEVIATES from reference " + format_fixed(*target) + " by " +
               format_fixed(dev) +
               " (> " + format_fixed(tol, 2) +
               "); the reference run's split/neighborhood protocol is unstated, "
               "see the benchmarks section of the README";
  }
}

}  // namespace

BenchTable run_memory_benchmark(const BenchmarkPlan& plan) {
  BenchTable table;
  if (plan.memory_arms.empty()) return table;
  RatingsMatrix full = load_dataset(plan.data_path, plan.dataset);
  for (const MemoryArm& arm : plan.memory_arms) {
    auto start = std::chrono::steady_clock::now();
    BenchRow row;
    row.dataset = to_string(plan.dataset);
    row.model = arm.orientation == Orientation::user_user ? "user-knn" : "item-knn";
    row.config = "metric=" + to_string(arm.metric) + " k=" + std::to_string(arm.k) +
                 " min_overlap=" + std::to_string(arm.min_overlap) +
                 " ratio=" + format_fixed(plan.ratio, 2);
    row.seed = plan.seed;
    row.pivot_row = to_string(arm.metric);
    row.pivot_col = arm.orientation == Orientation::user_user ? "user" : "item";
    for (int r = 0; r < plan.repeats; ++r) {
      Split split = split_holdout(full, plan.ratio, plan.seed + static_cast<std::uint64_t>(r));
      SimilarityOptions opts;
      opts.store_pairs = false;
      SimilarityModel sims = build_similarity_model(split.train, arm.orientation,
                                                    arm.metric, arm.k, arm.min_overlap,
                                                    opts);
      auto pairs = dense_pairs(split.train, split.test);
      std::vector<Prediction> preds = predict_batch(split.train, sims, pairs);
      std::vector<double> scores(preds.size());
      for (std::size_t t = 0; t < preds.size(); ++t) scores[t] = preds[t].score;
      row.samples.push_back(macro_mae_over_test(split.train, split.test, scores));
    }
    row.value = mean_of(row.samples);
    row.elapsed_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    annotate_target(row, arm.target, arm.target_tol);
    table.rows.push_back(std::move(row));
  }
  return table;
}

BenchTable run_factor_benchmark(const BenchmarkPlan& plan) {
  BenchTable table;
  if (plan.factor_arms.empty()) return table;
  RatingsMatrix full = load_dataset(plan.data_path, plan.dataset);
  for (const FactorArm& arm : plan.factor_arms) {
    auto start = std::chrono::steady_clock::now();
    BenchRow row;
    row.dataset = to_string(plan.dataset);
    row.model = to_string(arm.kind);
    row.config = (arm.normalize ? std::string("normalized") : std::string("raw")) +
                 " k=" + std::to_string(arm.cfg.k) +
                 " epochs=" + std::to_string(arm.cfg.epochs) +
                 " alpha=" + format_fixed(arm.cfg.alpha, 3) +
                 " init_scale=" + format_fixed(arm.cfg.init_scale, 2) +
                 " ratio=" + format_fixed(plan.ratio, 2);
    row.seed = plan.seed;
    row.pivot_row = arm.normalize ? "normalized" : "raw";
    row.pivot_col = to_string(arm.kind);
    if (arm.not_applicable) {
      row.not_applicable = true;
      row.value = std::numeric_limits<double>::quiet_NaN();
      row.note = "not applicable: centered ratings go negative, which the "
                 "non-negative factorization cannot train on";
      table.rows.push_back(std::move(row));
      continue;
    }
    for (int r = 0; r < plan.repeats; ++r) {
      std::uint64_t seed = plan.seed + static_cast<std::uint64_t>(r);
      Split split = split_holdout(full, plan.ratio, seed);
      TrainConfig cfg = arm.cfg;
      cfg.seed = seed;
      FactorModel model;
      switch (arm.kind) {
        case FactorKind::mf:
          model = train_mf(split.train, cfg, arm.normalize);
          break;
        case FactorKind::nmf:
          model = train_nmf(split.train, cfg);
          break;
        case FactorKind::emf: {
          SimilarityOptions opts;
          opts.store_pairs = false;
          SimilarityModel sims =
              build_similarity_model(split.train, Orientation::user_user,
                                     SimMetric::cosine, arm.expl_neighbor_k, 1, opts);
          ExplainabilityWeights w =
              explainability_scores(split.train, sims, Orientation::user_user,
                                    arm.expl_theta, arm.expl_neighbor_k);
          model = train_emf(split.train, cfg, w, arm.normalize);
          break;
        }
      }
      auto pairs = dense_pairs(split.train, split.test);
      std::vector<double> scores(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (std::size_t t = 0; t < pairs.size(); ++t)  // NOLINT: OpenMP index
        scores[t] = predict_factor(model, pairs[t].first, pairs[t].second);
      row.samples.push_back(macro_mae_over_test(split.train, split.test, scores));
    }
    row.value = mean_of(row.samples);
    row.elapsed_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    annotate_target(row, arm.target, arm.target_tol);
    table.rows.push_back(std::move(row));
  }
  return table;
}

TTestResult two_sample_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DomainError("each sample needs at least 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double va = 0.0, vb = 0.0;
  for (double x : a) va += (x - ma) * (x - ma);
  for (double x : b) vb += (x - mb) * (x - mb);
  TTestResult res;
  res.dof = static_cast<int>(a.size() + b.size()) - 2;
  const double pooled = (va + vb) / static_cast<double>(res.dof);
  if (pooled == 0.0) {
    if (ma == mb) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = ma > mb ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
      res.zero_variance_unequal_means = true;
    }
    return res;
  }
  res.t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  const double dof = static_cast<double>(res.dof);
  res.p = regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + res.t * res.t));
  return res;
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3.0e-16;
  constexpr double kTiny = 1.0e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "text") return ReportFormat::text;
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown") return ReportFormat::markdown;
  throw DomainError("unknown report format: " + name);
}

namespace {

void emit_csv(const BenchTable& table, std::ostream& out) {
  out << "dataset,model,config,value,seed,note,samples\r\n";
  for (const BenchRow& row : table.rows) {
    out << csv_escape(row.dataset) << ',' << csv_escape(row.model) << ','
        << csv_escape(row.config) << ','
        << (row.not_applicable ? "---" : format_full(row.value)) << ',' << row.seed
        << ',' << csv_escape(row.note) << ',';
    std::string samples;
    for (std::size_t i = 0; i < row.samples.size(); ++i) {
      if (i) samples += ' ';
      samples += format_full(row.samples[i]);
    }
    out << csv_escape(samples) << "\r\n";
  }
}

void emit_text(const BenchTable& table, std::ostream& out) {
  out << "dataset  model     value    seed  elapsed_sec  config | note\n";
  for (const BenchRow& row : table.rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-9s %-8s %-5llu %-12.2f %s | %s\n",
                  row.dataset.c_str(), row.model.c_str(),
                  row.not_applicable ? "---" : format_fixed(row.value).c_str(),
                  static_cast<unsigned long long>(row.seed), row.elapsed_sec,
                  row.config.c_str(), row.note.c_str());
    out << line;
  }
}

void emit_markdown(const BenchTable& table, std::ostream& out) {
  out << "| dataset | model | config | value | seed | elapsed (s) | note |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const BenchRow& row : table.rows) {
    out << "| " << row.dataset << " | " << row.model << " | " << row.config << " | "
        << (row.not_applicable ? "---" : format_fixed(row.value)) << " | " << row.seed
        << " | " << format_fixed(row.elapsed_sec, 2) << " | " << row.note << " |\n";
  }

  bool pivotable = !table.rows.empty();
  for (const BenchRow& row : table.rows)
    pivotable = pivotable && !row.pivot_row.empty() && !row.pivot_col.empty();
  if (!pivotable) return;

  // Grid view, rows x columns in first-appearance order.
  std::vector<std::string> row_keys, col_keys;
  for (const BenchRow& row : table.rows) {
    if (std::find(row_keys.begin(), row_keys.end(), row.pivot_row) == row_keys.end())
      row_keys.push_back(row.pivot_row);
    if (std::find(col_keys.begin(), col_keys.end(), row.pivot_col) == col_keys.end())
      col_keys.push_back(row.pivot_col);
  }
  out << "\n|  | dataset |";
  for (const auto& c : col_keys) out << ' ' << c << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < col_keys.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& r : row_keys) {
    std::string dataset;
    for (const BenchRow& row : table.rows)
      if (row.pivot_row == r) dataset = row.dataset;
    out << "| " << r << " | " << dataset << " |";
    for (const auto& c : col_keys) {
      const BenchRow* hit = nullptr;
      for (const BenchRow& row : table.rows)
        if (row.pivot_row == r && row.pivot_col == c) hit = &row;
      if (!hit)
        out << "  |";
      else if (hit->not_applicable)
        out << " --- |";
      else
        out << ' ' << format_fixed(hit->value) << " |";
    }
    out << '\n';
  }
}

}  // namespace

void emit_report(const BenchTable& table, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::text: emit_text(table, out); break;
    case ReportFormat::csv: emit_csv(table, out); break;
    case ReportFormat::markdown: emit_markdown(table, out); break;
  }
}

BenchmarkPlan load_plan(std::istream& in) {
  BenchmarkPlan plan;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto ltrim = line.find_first_not_of(" \t");
    if (ltrim == std::string::npos) continue;
    auto rtrim = line.find_last_not_of(" \t");
    line = line.substr(ltrim, rtrim - ltrim + 1);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("plan line has no '='", line_no);
    auto trim = [](std::string s) {
      auto l = s.find_first_not_of(" \t");
      if (l == std::string::npos) return std::string();
      auto r = s.find_last_not_of(" \t");
      return s.substr(l, r - l + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("plan line has an empty key", line_no);
    if (kv.count(key)) throw ParseError("duplicate plan key " + key, line_no);
    kv[key] = value;
  }

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_real = [&](const char* key) -> std::optional<double> {
    auto v = take(key);
    if (!v) return std::nullopt;
    return std::stod(*v);
  };
  auto take_int = [&](const char* key) -> std::optional<long long> {
    auto v = take(key);
    if (!v) return std::nullopt;
    return std::stoll(*v);
  };

  if (auto v = take("dataset")) plan.dataset = dataset_format_from_string(*v);
  if (auto v = take("data")) plan.data_path = *v;
  if (auto v = take_real("ratio")) plan.ratio = *v;
  if (auto v = take_int("seed")) plan.seed = static_cast<std::uint64_t>(*v);
  if (auto v = take_int("repeats")) plan.repeats = static_cast<int>(*v);
  if (plan.repeats < 1) throw DomainError("repeats must be >= 1");

  std::string suite = take("suite").value_or("both");
  if (suite != "memory" && suite != "factor" && suite != "both")
    throw DomainError("suite must be memory, factor or both");

  int knn_k = static_cast<int>(take_int("knn_k").value_or(40));
  int min_overlap = static_cast<int>(take_int("min_overlap").value_or(1));

  FactorGridOptions grid;
  grid.base.k = static_cast<int>(take_int("factors_k").value_or(10));
  grid.base.epochs = static_cast<int>(take_int("epochs").value_or(10));
  grid.base.alpha = take_real("alpha").value_or(grid.base.alpha);
  if (auto v = take_real("lambda")) {
    grid.base.lambda_p = *v;
    grid.base.lambda_q = *v;
    grid.base.beta = *v;
  }
  grid.base.lambda_p = take_real("lambda_p").value_or(grid.base.lambda_p);
  grid.base.lambda_q = take_real("lambda_q").value_or(grid.base.lambda_q);
  grid.base.beta = take_real("beta").value_or(grid.base.beta);
  grid.base.lambda_expl = take_real("lambda_expl").value_or(grid.base.lambda_expl);
  grid.base.init_scale = take_real("init_scale").value_or(grid.base.init_scale);
  grid.expl_theta = take_real("expl_theta").value_or(grid.expl_theta);
  grid.expl_neighbor_k =
      static_cast<int>(take_int("expl_neighbors").value_or(grid.expl_neighbor_k));
  grid.mf_alpha = take_real("mf_alpha");
  grid.mf_init_scale = take_real("mf_init_scale");
  grid.emf_alpha = take_real("emf_alpha");
  grid.emf_init_scale = take_real("emf_init_scale");

  if (suite == "memory" || suite == "both")
    plan.memory_arms = reference_memory_arms(plan.dataset, knn_k, min_overlap);
  if (suite == "factor" || suite == "both")
    plan.factor_arms = reference_factor_arms(plan.dataset, grid);

  auto ta = take("ttest_a");
  auto tb = take("ttest_b");
  if (ta.has_value() != tb.has_value())
    throw DomainError("ttest_a and ttest_b must be given together");
  if (ta) plan.ttest_arms = {{*ta, *tb}};
  if (plan.ttest_arms && plan.repeats < 2)
    throw DomainError("a t-test needs repeats >= 2");

  if (!kv.empty()) throw DomainError("unknown plan key: " + kv.begin()->first);
  if (plan.data_path.empty()) throw DomainError("plan is missing the data key");
  if (!(plan.ratio > 0.0 && plan.ratio < 1.0))
    throw DomainError("ratio must be in (0,1)");
  return plan;
}

}  // namespace cfkit
