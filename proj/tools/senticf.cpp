// Command-line front end for the sentiment-imputation recommender experiments.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "senticf/experiment.hpp"

namespace fs = std::filesystem;
using namespace senticf;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

Lexicon lexicon_from(const std::string& positive, const std::string& negative) {
  if (positive.empty() != negative.empty())
    throw UserError("--positive and --negative lexicon files must be given together");
  if (positive.empty()) return default_lexicon();
  return load_lexicon(positive, negative);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment-imputed ALS recommender experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Experiment config file (key = value)")->required();
    cmd->add_option("--set", overrides, "Override a config key, e.g. --set als.rank=20");
  };

  auto* prepare = app.add_subcommand("prepare", "Split and sparsify a review table");
  add_config(prepare);

  std::string dataset, out, sentiments, positive, negative, tag = "LEX", policy = "strict";
  auto* score = app.add_subcommand("score", "Lexicon-score the DROPPED cells of a snapshot");
  score->add_option("-d,--dataset", dataset, "Sparse snapshot")->required();
  score->add_option("-o,--out", out, "Sentiment ratings file to write")->required();
  score->add_option("--positive", positive, "Positive lexicon file (one term per line)");
  score->add_option("--negative", negative, "Negative lexicon file (one term per line)");
  score->add_option("--tag", tag, "Scorer tag")->capture_default_str();
  score->add_option("-c,--config", config_path, "Config supplying lexicon.positive/lexicon.negative");
  score->add_option("--set", overrides, "Override a config key");

  auto* imp = app.add_subcommand("impute", "Fill DROPPED cells from a sentiment ratings file");
  imp->add_option("-d,--dataset", dataset, "Sparse snapshot")->required();
  imp->add_option("-s,--sentiments", sentiments, "Sentiment ratings file")->required();
  imp->add_option("-o,--out", out, "Imputed snapshot to write")->required();
  imp->add_option("--policy", policy, "strict or lenient")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "Train an ALS model on a snapshot");
  train->add_option("-d,--dataset", dataset, "Snapshot to train on")->required();
  train->add_option("-o,--out", out, "Model file to write")->required();
  add_config(train);

  std::string out_prefix;
  auto* evaluate = app.add_subcommand("evaluate", "Train and evaluate every configured dataset");
  add_config(evaluate);
  evaluate->add_option("-o,--out", out_prefix, "Report path prefix (default <out_dir>/report)");

  std::vector<std::string> inputs;
  std::string rebaseline;
  auto* report = app.add_subcommand("report", "Merge metric rows from earlier evaluate runs");
  report->add_option("inputs", inputs, "Report .tsv files")->required();
  report->add_option("--baseline", rebaseline, "Recompute improvements against this label");
  report->add_option("-o,--out", out_prefix, "Write merged <prefix>.txt and <prefix>.tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUser;
  }

  try {
    if (*prepare) {
      cmd_prepare(load_config(config_path, overrides), std::cerr);
    } else if (*score) {
      if (positive.empty() && negative.empty() && !config_path.empty()) {
        const auto config = load_config(config_path, overrides);
        positive = config.lexicon_positive.string();
        negative = config.lexicon_negative.string();
      }
      cmd_score(dataset, out, lexicon_from(positive, negative), tag, std::cerr);
    } else if (*imp) {
      cmd_impute(dataset, sentiments, out, policy == "strict" ? ImputePolicy::Strict : ImputePolicy::Lenient,
                 std::cerr);
    } else if (*train) {
      cmd_train(dataset, load_config(config_path, overrides).als_config(), out, std::cerr);
    } else if (*evaluate) {
      const auto config = load_config(config_path, overrides);
      const fs::path prefix = out_prefix.empty() ? config.out_dir / "report" : fs::path(out_prefix);
      std::cout << render_table(cmd_evaluate(config, prefix, std::cerr));
    } else if (*report) {
      std::vector<fs::path> paths(inputs.begin(), inputs.end());
      std::optional<std::string> base;
      if (!rebaseline.empty()) base = rebaseline;
      std::cout << render_table(cmd_report(paths, base, out_prefix, std::cerr));
    }
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
