// cfkit command line: ingest, train, evaluate, recommend, benchmark.
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "cfkit/bench.hpp"
#include "cfkit/errors.hpp"
#include "cfkit/metrics.hpp"
#include "cfkit/model_io.hpp"
#include "cfkit/neighborhood.hpp"
#include "cfkit/report.hpp"
#include "cfkit/svd.hpp"

using namespace cfkit;

namespace {

struct DataFlags {
  std::string path;
  std::string format = "ml100k";
  double ratio = 0.2;  // 0 trains on everything
  std::uint64_t seed = 42;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool with_split = true) {
  cmd->add_option("--data", flags.path, "ratings file")->required();
  cmd->add_option("--format", flags.format, "dataset format (ml100k|ml1m)")
      ->check(CLI::IsMember({"ml100k", "ml1m"}))
      ->capture_default_str();
  if (with_split) {
    cmd->add_option("--ratio", flags.ratio,
                    "held-out fraction; 0 uses every rating for training")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "split and training seed")
        ->capture_default_str();
  }
}

struct LoadedData {
  RatingsMatrix train;
  std::vector<Interaction> test;
};

LoadedData load_split(const DataFlags& flags) {
  RatingsMatrix full = load_dataset(flags.path, dataset_format_from_string(flags.format));
  if (flags.ratio == 0.0) return {std::move(full), {}};
  Split split = split_holdout(full, flags.ratio, flags.seed);
  return {std::move(split.train), std::move(split.test)};
}

double model_predict(const LoadedModel& model, const RatingsMatrix& train, std::size_t u,
                     std::size_t i) {
  if (const auto* fm = std::get_if<FactorModel>(&model)) return predict_factor(*fm, u, i);
  if (const auto* sm = std::get_if<SvdModel>(&model)) return svd_predict(*sm, u, i);
  const auto& sims = std::get<SimilarityModel>(model);
  return sims.orientation == Orientation::user_user
             ? predict_user_based(train, sims, u, i).score
             : predict_item_based(train, sims, u, i).score;
}

std::string model_kind_name(const LoadedModel& model) {
  if (const auto* fm = std::get_if<FactorModel>(&model)) return to_string(fm->kind);
  if (std::holds_alternative<SvdModel>(model)) return "svd";
  const auto& sims = std::get<SimilarityModel>(model);
  return sims.orientation == Orientation::user_user ? "user-knn" : "item-knn";
}

int run_ingest(const DataFlags& flags) {
  RatingsMatrix m = load_dataset(flags.path, dataset_format_from_string(flags.format));
  double density = static_cast<double>(m.rating_count()) /
                   (static_cast<double>(m.user_count()) * m.item_count());
  std::cout << "users = " << m.user_count() << '\n'
            << "items = " << m.item_count() << '\n'
            << "ratings = " << m.rating_count() << '\n'
            << "density = " << density << '\n'
            << "global_mean = " << m.global_mean() << '\n';
  return 0;
}

struct TrainFlags {
  DataFlags data;
  std::string model;
  std::string out;
  std::string metric = "cosine";
  int k = -1;  // -1 picks the per-model default
  int min_overlap = -1;
  int epochs = 10;
  double alpha = 0.01;
  double lambda = 0.02;
  double beta = 0.02;
  double lambda_expl = 0.1;
  double theta = 0.01;
  int expl_neighbors = 50;
  double init_scale = 0.1;
  bool normalize = false;
};

double training_mae(const RatingsMatrix& train,
                    const std::function<double(std::size_t, std::size_t)>& predict) {
  double sum = 0.0;
  for (const auto& [u, i, r] : train.entries()) sum += std::abs(r - predict(u, i));
  return sum / static_cast<double>(train.rating_count());
}

int run_train(const TrainFlags& flags) {
  LoadedData data = load_split(flags.data);
  const RatingsMatrix& train = data.train;

  if (flags.model == "user-knn" || flags.model == "item-knn") {
    Orientation o = flags.model == "user-knn" ? Orientation::user_user
                                              : Orientation::item_item;
    SimMetric metric = sim_metric_from_string(flags.metric);
    int k = flags.k > 0 ? flags.k : 40;
    int overlap = flags.min_overlap > 0 ? flags.min_overlap : default_min_overlap(metric);
    SimilarityModel sims = build_similarity_model(train, o, metric, k, overlap);
    save_model(sims, flags.out);
    auto predict = [&](std::size_t u, std::size_t i) {
      return o == Orientation::user_user ? predict_user_based(train, sims, u, i).score
                                         : predict_item_based(train, sims, u, i).score;
    };
    std::cout << "trained " << flags.model << " metric=" << flags.metric << " k=" << k
              << " pairs=" << sims.stored_pair_count()
              << " train_mae=" << training_mae(train, predict) << '\n';
    return 0;
  }

  if (flags.model == "svd") {
    std::size_t k = flags.k > 0 ? static_cast<std::size_t>(flags.k) : 10;
    SvdModel model = svd_fit(train, k);
    save_model(model, flags.out);
    std::cout << "trained svd k=" << k << " train_mae="
              << training_mae(train,
                              [&](std::size_t u, std::size_t i) {
                                return svd_predict(model, u, i);
                              })
              << '\n';
    return 0;
  }

  TrainConfig cfg;
  cfg.k = flags.k > 0 ? flags.k : 10;
  cfg.epochs = flags.epochs;
  cfg.alpha = flags.alpha;
  cfg.lambda_p = flags.lambda;
  cfg.lambda_q = flags.lambda;
  cfg.beta = flags.beta;
  cfg.lambda_expl = flags.lambda_expl;
  cfg.init_scale = flags.init_scale;
  cfg.seed = flags.data.seed;

  FactorModel model;
  if (flags.model == "mf") {
    model = train_mf(train, cfg, flags.normalize);
  } else if (flags.model == "nmf") {
    if (flags.normalize)
      throw DomainError(
          "nmf cannot train on normalized ratings: centering makes them negative");
    model = train_nmf(train, cfg);
  } else {
    SimilarityOptions opts;
    opts.store_pairs = false;
    SimilarityModel sims = build_similarity_model(
        train, Orientation::user_user, SimMetric::cosine, flags.expl_neighbors, 1, opts);
    ExplainabilityWeights w = explainability_scores(
        train, sims, Orientation::user_user, flags.theta, flags.expl_neighbors);
    model = train_emf(train, cfg, w, flags.normalize);
  }
  save_model(model, flags.out);
  std::cout << "trained " << flags.model << " k=" << cfg.k << " epochs=" << cfg.epochs
            << (flags.normalize ? " normalized" : " raw") << " train_mae="
            << training_mae(train,
                            [&](std::size_t u, std::size_t i) {
                              return predict_factor(model, u, i);
                            })
            << '\n';
  return 0;
}

struct EvalFlags {
  DataFlags data;
  std::string model_path;
  int n = 10;
  double relevance_theta = 4.0;
  double halflife_alpha = 5.0;
  double halflife_d = 0.0;
  int dcg_k = 10;
  bool accuracy_only = false;
  bool csv = false;
};

RecommendationList factor_style_topn(const LoadedModel& model, const RatingsMatrix& train,
                                     std::size_t u, int n) {
  RecommendationList list;
  list.user = static_cast<std::uint32_t>(u);
  for (std::size_t i = 0; i < train.item_count(); ++i) {
    if (train.rating(u, i)) continue;
    list.items.push_back(
        {static_cast<std::uint32_t>(i), model_predict(model, train, u, i)});
  }
  std::sort(list.items.begin(), list.items.end(),
            [](const ScoredItem& a, const ScoredItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  if (list.items.size() > static_cast<std::size_t>(n)) list.items.resize(n);
  return list;
}

int run_evaluate(const EvalFlags& flags) {
  if (flags.data.ratio == 0.0)
    throw DomainError("evaluate needs a held-out split; pass --ratio in (0,1)");
  LoadedData data = load_split(flags.data);
  const RatingsMatrix& train = data.train;
  LoadedModel model = load_model(flags.model_path);
  TestRatings test = TestRatings::from_interactions(train, data.test);

  EvalConfig cfg;
  cfg.list_size = flags.n;
  cfg.relevance_theta = flags.relevance_theta;
  cfg.halflife_alpha = flags.halflife_alpha;
  cfg.halflife_d = flags.halflife_d;
  cfg.dcg_k = flags.dcg_k;
  cfg.validate();

  EvaluationReport report;
  report.set_info("model", model_kind_name(model));
  report.set_info("model_file", flags.model_path);
  report.set_info("dataset", flags.data.path);
  report.set_info("format", flags.data.format);
  report.set_info("split", "ratio=" + std::to_string(flags.data.ratio) +
                               " seed=" + std::to_string(flags.data.seed));
  report.set_info("config",
                  "n=" + std::to_string(flags.n) +
                      " relevance_theta=" + std::to_string(cfg.relevance_theta) +
                      " halflife_alpha=" + std::to_string(cfg.halflife_alpha) +
                      " halflife_d=" + std::to_string(cfg.halflife_d) +
                      " dcg_k=" + std::to_string(cfg.dcg_k));

  std::vector<PredictedRating> records;
  records.reserve(data.test.size());
  for (const Interaction& t : data.test) {
    std::uint32_t u = static_cast<std::uint32_t>(train.user_index(t.user));
    std::uint32_t i = static_cast<std::uint32_t>(train.item_index(t.item));
    records.push_back({u, i, t.rating, model_predict(model, train, u, i)});
  }
  MetricValue m = mae(records);
  MetricValue r = rmse(records);
  report.set_value("mae", m.value);
  report.set_value("mae_users", static_cast<double>(m.users_used));
  report.set_value("rmse", r.value);

  if (const auto* sims = std::get_if<SimilarityModel>(&model);
      sims && sims->orientation == Orientation::user_user) {
    MetricValue c = coverage(train, *sims);
    report.set_value("coverage", c.value);
    report.set_value("coverage_users_skipped", static_cast<double>(c.users_skipped));
  }

  if (!flags.accuracy_only) {
    std::vector<RecommendationList> recs;
    recs.reserve(train.user_count());
    for (std::size_t u = 0; u < train.user_count(); ++u) {
      if (const auto* sims = std::get_if<SimilarityModel>(&model)) {
        recs.push_back(sims->orientation == Orientation::user_user
                           ? topn_user_based(train, *sims, u, flags.n)
                           : topn_item_based(train, *sims, u, flags.n));
      } else {
        recs.push_back(factor_style_topn(model, train, u, flags.n));
      }
    }
    PrfResult prf = precision_recall_f1(recs, test, cfg);
    report.set_value("precision", prf.precision.value);
    report.set_value("recall", prf.recall.value);
    report.set_value("recall_users_skipped",
                     static_cast<double>(prf.recall.users_skipped));
    report.set_value("f1", prf.f1);
    MetricValue map = mean_average_precision(recs, test, cfg);
    report.set_info("map_note",
                    "average precision at n over each user's relevant held-out count");
    report.set_value("map", map.value);
    report.set_value("map_users_skipped", static_cast<double>(map.users_skipped));
    report.set_value("half_life", half_life(recs, test, cfg).value);
    report.set_value("dcg", dcg(recs, test, cfg).value);

    ItemSimFn sim = make_item_sim(train, SimMetric::cosine, 1);
    double diversity_sum = 0.0;
    std::size_t diversity_users = 0, diversity_skipped = 0;
    for (const RecommendationList& list : recs) {
      auto d = diversity(list, sim);
      if (!d) {
        ++diversity_skipped;
        continue;
      }
      diversity_sum += *d;
      ++diversity_users;
    }
    report.set_value("diversity",
                     diversity_users ? diversity_sum / diversity_users : 0.0);
    report.set_value("diversity_users_skipped",
                     static_cast<double>(diversity_skipped));
    // a list's mean per-item novelty equals its diversity; report the average
    report.set_value("novelty", diversity_users ? diversity_sum / diversity_users : 0.0);
  }

  if (flags.csv) {
    report.write_csv_header(std::cout);
    report.write_csv_row(std::cout);
  } else {
    report.write_kv(std::cout);
  }
  return 0;
}

struct RecommendFlags {
  DataFlags data;
  std::string model_path;
  std::vector<std::int64_t> users;
  int n = 10;
};

int run_recommend(const RecommendFlags& flags) {
  LoadedData data = load_split(flags.data);
  const RatingsMatrix& train = data.train;
  LoadedModel model = load_model(flags.model_path);
  for (std::int64_t raw : flags.users) {
    std::size_t u = train.user_index(raw);
    RecommendationList list;
    if (const auto* sims = std::get_if<SimilarityModel>(&model)) {
      list = sims->orientation == Orientation::user_user
                 ? topn_user_based(train, *sims, u, flags.n)
                 : topn_item_based(train, *sims, u, flags.n);
    } else {
      list = factor_style_topn(model, train, u, flags.n);
    }
    if (flags.users.size() > 1) std::cout << "user " << raw << '\n';
    for (std::size_t rank = 1; rank <= list.items.size(); ++rank)
      std::cout << rank << ' ' << train.item_raw(list.items[rank - 1].item) << ' '
                << list.items[rank - 1].score << '\n';
  }
  return 0;
}

struct BenchFlags {
  std::string plan_path;
  std::string format = "markdown";
  std::string out;
};

int run_benchmark(const BenchFlags& flags) {
  std::ifstream in(flags.plan_path);
  if (!in) throw IoError("cannot open plan file " + flags.plan_path);
  BenchmarkPlan plan = load_plan(in);

  BenchTable memory = run_memory_benchmark(plan);
  BenchTable factor = run_factor_benchmark(plan);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!flags.out.empty()) {
    file.open(flags.out, std::ios::binary);
    if (!file) throw IoError("cannot open " + flags.out + " for writing");
    out = &file;
  }
  ReportFormat format = report_format_from_string(flags.format);
  if (!memory.rows.empty()) emit_report(memory, format, *out);
  if (!memory.rows.empty() && !factor.rows.empty()) *out << '\n';
  if (!factor.rows.empty()) emit_report(factor, format, *out);
  if (memory.rows.empty() && factor.rows.empty()) emit_report(memory, format, *out);

  if (plan.ttest_arms) {
    BenchTable table = std::move(memory);
    table.rows.insert(table.rows.end(), factor.rows.begin(), factor.rows.end());
    const BenchRow* a = nullptr;
    const BenchRow* b = nullptr;
    auto matches = [](const BenchRow& row, const std::string& name) {
      return name == row.model + "-" + row.pivot_row;
    };
    for (const BenchRow& row : table.rows) {
      if (matches(row, plan.ttest_arms->first)) a = &row;
      if (matches(row, plan.ttest_arms->second)) b = &row;
    }
    if (!a || !b)
      throw DomainError("t-test arms not found in the executed plan: " +
                        plan.ttest_arms->first + " vs " + plan.ttest_arms->second);
    TTestResult t = two_sample_ttest(a->samples, b->samples);
    *out << "\nttest " << plan.ttest_arms->first << " vs " << plan.ttest_arms->second
         << ": t=" << t.t << " dof=" << t.dof << " p=" << t.p
         << (t.zero_variance_unequal_means ? " (zero variance, unequal means)" : "")
         << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfkit: collaborative filtering toolkit"};
  app.require_subcommand(1);

  DataFlags ingest_flags;
  CLI::App* ingest = app.add_subcommand("ingest", "validate and summarize a dataset");
  add_data_flags(ingest, ingest_flags, false);

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "fit a model and save it");
  add_data_flags(train, train_flags.data);
  train->add_option("--model", train_flags.model, "model kind")
      ->check(CLI::IsMember({"user-knn", "item-knn", "svd", "mf", "nmf", "emf"}))
      ->required();
  train->add_option("--out", train_flags.out, "output model file")->required();
  train->add_option("--metric", train_flags.metric,
                    "similarity metric for knn models "
                    "(pearson|cosine|adjusted_cosine|euclidean)")
      ->capture_default_str();
  train->add_option("--k", train_flags.k,
                    "neighbors for knn, latent dimension otherwise "
                    "(default 40 for knn, 10 for factor models)");
  train->add_option("--min-overlap", train_flags.min_overlap,
                    "minimum co-rating count (default 2 for pearson, else 1)");
  train->add_option("--epochs", train_flags.epochs, "training epochs")
      ->capture_default_str();
  train->add_option("--alpha", train_flags.alpha, "sgd learning rate")
      ->capture_default_str();
  train->add_option("--lambda", train_flags.lambda, "L2 regularization")
      ->capture_default_str();
  train->add_option("--beta", train_flags.beta, "emf L2 coefficient")
      ->capture_default_str();
  train->add_option("--lambda-expl", train_flags.lambda_expl,
                    "emf explainability coefficient")
      ->capture_default_str();
  train->add_option("--theta", train_flags.theta, "explainability threshold")
      ->capture_default_str();
  train->add_option("--expl-neighbors", train_flags.expl_neighbors,
                    "emf neighborhood size")
      ->capture_default_str();
  train->add_option("--init-scale", train_flags.init_scale,
                    "factor initialization scale")
      ->capture_default_str();
  train->add_flag("--normalize", train_flags.normalize,
                  "train on user-mean-centered ratings");

  EvalFlags eval_flags;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a model on a held-out split");
  add_data_flags(evaluate, eval_flags.data);
  evaluate->add_option("--model", eval_flags.model_path, "model file")->required();
  evaluate->add_option("--n", eval_flags.n, "recommendation list size")
      ->capture_default_str();
  evaluate->add_option("--relevance-theta", eval_flags.relevance_theta,
                       "relevance threshold")
      ->capture_default_str();
  evaluate->add_option("--halflife-alpha", eval_flags.halflife_alpha, "half-life alpha")
      ->capture_default_str();
  evaluate->add_option("--halflife-d", eval_flags.halflife_d,
                       "half-life default rating")
      ->capture_default_str();
  evaluate->add_option("--dcg-k", eval_flags.dcg_k, "dcg cutoff")->capture_default_str();
  evaluate->add_flag("--accuracy-only", eval_flags.accuracy_only,
                     "skip list-based metrics");
  evaluate->add_flag("--csv", eval_flags.csv, "emit a csv row instead of key=value");

  RecommendFlags rec_flags;
  CLI::App* recommend = app.add_subcommand("recommend", "print top-N items for users");
  add_data_flags(recommend, rec_flags.data);
  recommend->add_option("--model", rec_flags.model_path, "model file")->required();
  recommend->add_option("--user", rec_flags.users, "raw user id (repeatable)")
      ->required();
  recommend->add_option("--n", rec_flags.n, "list size")->capture_default_str();

  BenchFlags bench_flags;
  CLI::App* benchmark = app.add_subcommand("benchmark", "run a benchmark plan file");
  benchmark->add_option("--plan", bench_flags.plan_path, "key=value plan file")
      ->required();
  benchmark->add_option("--format", bench_flags.format, "text|csv|markdown")
      ->check(CLI::IsMember({"text", "csv", "markdown"}))
      ->capture_default_str();
  benchmark->add_option("--out", bench_flags.out, "write the report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return run_ingest(ingest_flags);
    if (*train) return run_train(train_flags);
    if (*evaluate) return run_evaluate(eval_flags);
    if (*recommend) return run_recommend(rec_flags);
    if (*benchmark) return run_benchmark(bench_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
