// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <numeric>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "metric_oracle.hpp"
#include "senticf/experiment.hpp"
#include "test_support.hpp"

using namespace senticf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle_equivalence() {
  constexpr int kInstances = 1000;
  constexpr double kTolerance = 1e-12;
  constexpr double kBudgetSeconds = 10.0;
  const auto start = Clock::now();
  std::mt19937_64 gen(20240601);
  double worst = 0.0;
  for (int n = 0; n < kInstances; ++n) {
    const int users = 1 + gen() % 6, items = 1 + gen() % 8, k = 1 + gen() % 10;
    RankedRecommendations recs(users);
    GroundTruth truth(users);
    oracle::Instance x;
    std::vector<Index> pool(items);
    for (int u = 0; u < users; ++u) {
      std::iota(pool.begin(), pool.end(), 0);
      std::shuffle(pool.begin(), pool.end(), gen);
      const int q = gen() % (items + 1);
      std::vector<int> r;
      for (int j = 0; j < q; ++j) {
        recs[u].push_back({pool[j], static_cast<double>(q - j)});
        r.push_back(pool[j]);
      }
      std::shuffle(pool.begin(), pool.end(), gen);
      const int m = gen() % (std::min(5, items) + 1);
      truth[u].assign(pool.begin(), pool.begin() + m);
      std::sort(truth[u].begin(), truth[u].end());
      x.ranked.push_back(r);
      x.relevant.emplace_back(truth[u].begin(), truth[u].end());
    }
    worst = std::max({worst, std::abs(precision_at_k(recs, truth, k) - oracle::p_at_k(x, k)),
                      std::abs(mean_average_precision(recs, truth) - oracle::map(x)),
                      std::abs(ndcg_at_k(recs, truth, k) - oracle::ndcg_at_k(x, k))});
  }
  const double elapsed = seconds_since(start);
  return {worst <= kTolerance && elapsed < kBudgetSeconds,
          fmt("%d instances, max |diff| %.3g (tol %.0e), %.3f s (budget %.0f s)", kInstances, worst,
              kTolerance, elapsed, kBudgetSeconds)};
}

Outcome hand_computed_metrics() {
  const Index a = 0, b = 1, c = 2;
  const RankedRecommendations recs{{{a, 3}, {c, 2}, {b, 1}}};
  const GroundTruth truth{{a, b}};
  const double p = precision_at_k(recs, truth, 3);
  const double map = mean_average_precision(recs, truth);
  const double ndcg = ndcg_at_k(recs, truth, 3);
  const bool pass = std::abs(p - 2.0 / 3.0) < 1e-12 && std::abs(map - 2.0 / 3.0) < 1e-12 &&
                    std::abs(ndcg - 0.9198) <= 1e-4;
  return {pass, fmt("P@3 %.6f, MAP %.6f, NDCG@3 %.6f (expect 0.666667, 0.666667, 0.9198 +/- 1e-4)", p, map,
                    ndcg)};
}

Outcome table_arithmetic() {
  const MetricTriple sparse{0.4598, 0.4906, 0.0304, 30};
  const std::vector<std::pair<std::string, MetricTriple>> published{
      {"SPARSE", sparse},
      {"SENT-BERT", {0.4854, 0.5409, 0.0518, 30}},
      {"SENT-ROBERTA", {0.5999, 0.6403, 0.0399, 30}},
      {"SENT-PROMPT-BERT", {0.5832, 0.6258, 0.0392, 30}},
      {"SENT-PROMPT-ROBERTA", {0.5770, 0.6196, 0.0389, 30}},
  };
  const double expected[] = {28.74, 30.74, 27.78, 26.58};
  const auto report = build_report(published, "SPARSE");
  bool pass = !report.rows[0].avg_improvement.has_value();
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const double got = *report.rows[i + 1].avg_improvement;
    pass = pass && std::abs(got - expected[i]) <= 0.01;
    detail += fmt("%s%.3f", i ? ", " : "", got);
  }
  return {pass, "Avg. Imp% " + detail + " (expect 28.74, 30.74, 27.78, 26.58 +/- 0.01)"};
}

Outcome als_recovery() {
  constexpr double kRmseBound = 0.05;
  constexpr double kBudgetSeconds = 5.0;
  const auto start = Clock::now();
  // Unquantized so every observed rating is the generator's inner product.
  SynthSpec spec{50, 40, 2, 0.0, 1.0, 7};
  spec.quantize = false;
  const auto synth = synth_lowrank(spec);
  const Eigen::MatrixXd target = synth.scores();

  als::AlsConfig config;
  config.rank = 2;
  config.reg_lambda = 0.01;
  config.iterations = 20;
  config.seed = 1;
  const auto model = als::train(synth.dataset, config);
  double sq = 0.0;
  for (const auto& e : synth.dataset.cells()) {
    const double err = als::predict(model, e.user, e.item) - target(e.user, e.item);
    sq += err * err;
  }
  const double rmse = std::sqrt(sq / static_cast<double>(synth.dataset.size()));
  const double elapsed = seconds_since(start);
  return {rmse < kRmseBound && elapsed < kBudgetSeconds,
          fmt("RMSE vs generator %.3g after 20 iterations (bound %.2f), %.3f s (budget %.0f s)", rmse, kRmseBound,
              elapsed, kBudgetSeconds)};
}

Outcome monotone_objective() {
  constexpr int kConfigs = 100;
  constexpr double kRelTol = 1e-9;
  std::mt19937_64 gen(99);
  int violations = 0;
  double worst = 0.0;
  for (int n = 0; n < kConfigs; ++n) {
    SynthSpec spec;
    spec.num_users = 5 + gen() % 40;
    spec.num_items = 5 + gen() % 40;
    spec.rank = 1 + gen() % 4;
    spec.noise_sd = (gen() % 100) / 100.0;
    spec.density = 0.05 + (gen() % 95) / 100.0;
    spec.seed = gen();
    spec.quantize = gen() % 2;
    const auto data = sparsify(synth_lowrank(spec).dataset, (gen() % 60) / 100.0, gen());
    als::AlsConfig config;
    config.rank = 1 + gen() % 8;
    config.reg_lambda = std::pow(10.0, -3.0 + (gen() % 400) / 100.0);
    config.iterations = 1 + gen() % 12;
    config.init_scale = 0.01 + (gen() % 100) / 50.0;
    config.seed = gen();
    config.threads = 1 + gen() % 3;
    als::TrainingTrace trace;
    als::train(data, config, &trace);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
      const double rise = (trace.objective[i] - trace.objective[i - 1]) / trace.objective[i - 1];
      worst = std::max(worst, rise);
      if (rise > kRelTol) ++violations;
    }
  }
  return {violations == 0,
          fmt("%d configurations, %d half-sweep increases, largest relative change %+.3g (tol %.0e)", kConfigs,
              violations, worst, kRelTol)};
}

Outcome oracle_imputation_equivalence() {
  constexpr double kTolerance = 1e-12;
  const auto full = synth_lowrank(SynthSpec{120, 80, 3, 0.5, 0.25, 31});
  const auto [train, validation] = split(full.dataset, {0.4, 0.2, 5});
  const auto sparse = sparsify(train, 0.4, 6);
  SentimentRatingsFile truth;
  for (const auto& e : sparse.cells())
    if (e.cell.provenance == Provenance::Dropped)
      truth.rows.push_back({sparse.user_id(e.user), sparse.item_id(e.item), *train.find(e.user, e.item)->rating,
                            "ORACLE"});
  const auto imputed = impute(sparse, truth, ImputePolicy::Strict).dataset;

  als::AlsConfig config;
  config.seed = 77;
  const auto a = evaluate_dataset(train, validation, config, kDefaultK);
  const auto b = evaluate_dataset(imputed, validation, config, kDefaultK);
  const double diff =
      std::max({std::abs(a.map - b.map), std::abs(a.ndcg_at_k - b.ndcg_at_k), std::abs(a.p_at_k - b.p_at_k)});
  return {diff <= kTolerance,
          fmt("%zu cells imputed; MAP %.6f vs %.6f, NDCG@30 %.6f vs %.6f, P@30 %.6f vs %.6f; max |diff| %.3g",
              truth.rows.size(), a.map, b.map, a.ndcg_at_k, b.ndcg_at_k, a.p_at_k, b.p_at_k, diff)};
}

Outcome sparsity_hurts() {
  // Users rate items they tend to like (exposure bias), as in review data.
  constexpr int kSeeds = 5;
  double full_map = 0, full_ndcg = 0, sparse_map = 0, sparse_ndcg = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    SynthSpec spec{200, 150, 3, 0.5, 0.2, static_cast<std::uint64_t>(seed)};
    spec.exposure_bias = 2.0;
    const auto full = synth_lowrank(spec).dataset;
    const auto [train, validation] = split(full, {0.4, 0.2, static_cast<std::uint64_t>(seed)});
    const auto sparse = sparsify(train, 0.4, derive_seed(seed, 1));
    als::AlsConfig config;
    config.rank = 3;
    config.reg_lambda = 1.0;
    config.seed = derive_seed(seed, 2);
    const auto f = evaluate_dataset(train, validation, config, kDefaultK);
    const auto s = evaluate_dataset(sparse, validation, config, kDefaultK);
    full_map += f.map / kSeeds;
    full_ndcg += f.ndcg_at_k / kSeeds;
    sparse_map += s.map / kSeeds;
    sparse_ndcg += s.ndcg_at_k / kSeeds;
  }
  return {sparse_map <= full_map && sparse_ndcg <= full_ndcg,
          fmt("mean over %d seeds: SPARSE MAP %.4f / NDCG@30 %.4f, full MAP %.4f / NDCG@30 %.4f", kSeeds,
              sparse_map, sparse_ndcg, full_map, full_ndcg)};
}

std::string run_pipeline(const fs::path& dir) {
  testing_support::write_file(dir / "exp.cfg",
                              "seed = 2024\n"
                              "synth.users = 120\nsynth.items = 90\nsynth.rank = 3\n"
                              "synth.noise_sd = 0.5\nsynth.density = 0.25\nsynth.exposure_bias = 1.5\n"
                              "out_dir = run\n"
                              "als.rank = 5\nals.iterations = 10\nals.threads = 4\n"
                              "baseline = SPARSE\n"
                              "dataset.SPARSE = run/sparse.tsv\n"
                              "dataset.SENT-LEX = run/sent-lex.tsv\n"
                              "dataset.FULL = run/train.tsv\n");
  std::ostringstream log;
  const auto config = load_config(dir / "exp.cfg");
  cmd_prepare(config, log);
  cmd_score(dir / "run/sparse.tsv", dir / "run/lex.tsv", default_lexicon(), "LEX", log);
  cmd_impute(dir / "run/sparse.tsv", dir / "run/lex.tsv", dir / "run/sent-lex.tsv", ImputePolicy::Strict, log);
  cmd_evaluate(config, dir / "run/report", log);
  return testing_support::slurp(dir / "run/report.txt") + testing_support::slurp(dir / "run/report.tsv");
}

Outcome end_to_end_determinism() {
  testing_support::TempDir first, second;
  const auto a = run_pipeline(first.path());
  const auto b = run_pipeline(second.path());
  return {!a.empty() && a == b, fmt("two runs, %zu report bytes each, %s", a.size(),
                                    a == b ? "byte-identical" : "reports differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracle_equivalence},
      {"hand-computed metric values", hand_computed_metrics},
      {"published-table improvement arithmetic", table_arithmetic},
      {"ALS low-rank recovery", als_recovery},
      {"monotone ALS objective", monotone_objective},
      {"oracle-imputation equivalence", oracle_imputation_equivalence},
      {"sparsity hurts ranking quality", sparsity_hurts},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name << ": " << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}
