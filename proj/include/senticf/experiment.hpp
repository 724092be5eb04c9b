#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senticf/als.hpp"
#include "senticf/dataset.hpp"
#include "senticf/ingest.hpp"
#include "senticf/lexsent.hpp"
#include "senticf/metrics.hpp"
#include "senticf/synth.hpp"

namespace senticf {

struct DatasetRef {
  std::string label;
  std::filesystem::path path;
};

/// One comparison run. Every random stream is derived from `seed`.
struct ExperimentConfig {
  std::filesystem::path input;
  std::optional<SynthSpec> synth;  // used instead of `input` when set
  ColumnSchema schema;
  bool strict = false;

  std::uint64_t seed = 42;
  double drop_fraction = 0.4;
  double validation_fraction = 0.2;

  als::AlsConfig als;
  int k = kDefaultK;

  std::filesystem::path out_dir = ".";
  std::filesystem::path validation;  // defaults to out_dir/validation.tsv
  std::string baseline = "SPARSE";
  std::vector<DatasetRef> datasets;  // defaults to SPARSE -> out_dir/sparse.tsv

  std::filesystem::path lexicon_positive;
  std::filesystem::path lexicon_negative;

  SplitSpec split_spec() const { return {drop_fraction, validation_fraction, seed}; }
  std::uint64_t sparsify_seed() const { return derive_seed(seed, 1); }
  std::uint64_t als_seed() const { return derive_seed(seed, 2); }
  std::uint64_t synth_seed() const { return derive_seed(seed, 3); }

  /// AlsConfig with the seed derived from `seed`.
  als::AlsConfig als_config() const;
  std::filesystem::path validation_path() const;
  std::vector<DatasetRef> dataset_refs() const;

  /// Throws UserError on out-of-range values, duplicate labels or paths, or a
  /// baseline label that is not among the datasets.
  void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Relative paths resolve
/// against `base_dir`. `overrides` are extra `key=value` strings applied
/// after the file, replacing a key of the same name.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides = {});

/// Opens a file for reading, throwing UserError naming the path if it is
/// missing or unreadable.
std::ifstream open_input(const std::filesystem::path& path);

struct ReportRow {
  std::string label;
  MetricTriple metrics;
  std::optional<double> avg_improvement;  // empty for the baseline row

  bool operator==(const ReportRow&) const = default;
};

struct EvalReport {
  int k = kDefaultK;
  std::string baseline;
  std::vector<ReportRow> rows;

  bool operator==(const EvalReport&) const = default;
};

/// Rows in input order; every row other than `baseline` gets its average
/// improvement over the baseline row. All triples must share one k.
EvalReport build_report(const std::vector<std::pair<std::string, MetricTriple>>& results,
                        const std::string& baseline);

/// Machine-readable rows: a `# k=<k>\tbaseline=<label>` line, a header, then
/// one tab-separated row per dataset with shortest round-trip numbers and
/// `-` for a missing improvement.
void write_report_rows(std::ostream& out, const EvalReport& report);
EvalReport read_report_rows(std::istream& in);

/// Aligned text table. The best value in each column is marked with '*'.
std::string render_table(const EvalReport& report);

/// Concatenates reports (all with the same k, else UserError) and sorts the
/// rows by average improvement, descending, rows without one last. With
/// `rebaseline`, improvements are first recomputed against that row.
EvalReport merge_reports(const std::vector<EvalReport>& reports,
                         const std::optional<std::string>& rebaseline = std::nullopt);

/// Trains on `train` and scores top-k recommendations against `validation`.
MetricTriple evaluate_dataset(const RatingsDataset& train, const RatingsDataset& validation,
                              const als::AlsConfig& config, int k);

struct PrepareSummary {
  std::filesystem::path train;
  std::filesystem::path validation;
  std::filesystem::path sparse;
  std::filesystem::path manifest;
  InternStats intern;
  std::size_t rejected = 0;
  std::size_t train_cells = 0;
  std::size_t validation_cells = 0;
  std::size_t dropped_cells = 0;
};

// Subcommands. Each writes its files and progress lines to `log`, and throws
// UserError for problems with the input or configuration.

/// Reads (or synthesizes) the full dataset, holds out validation, sparsifies
/// the rest; writes train/validation/sparse snapshots and a manifest to
/// out_dir.
PrepareSummary cmd_prepare(const ExperimentConfig& config, std::ostream& log);

/// Lexicon-scores the DROPPED cells of a snapshot into a sentiment file.
SentimentRatingsFile cmd_score(const std::filesystem::path& dataset,
                               const std::filesystem::path& out, const Lexicon& lexicon,
                               std::string_view scorer, std::ostream& log);

ImputeResult cmd_impute(const std::filesystem::path& dataset,
                        const std::filesystem::path& sentiments,
                        const std::filesystem::path& out, ImputePolicy policy,
                        std::ostream& log);

als::FactorModel<double> cmd_train(const std::filesystem::path& dataset,
                                   const als::AlsConfig& config,
                                   const std::filesystem::path& model_out, std::ostream& log);

/// Loads every configured dataset (aborting before any training if one is
/// missing), trains each with the same ALS configuration, and evaluates on the
/// shared validation set. Writes <out_prefix>.txt and <out_prefix>.tsv.
EvalReport cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& out_prefix,
                        std::ostream& log);

EvalReport cmd_report(const std::vector<std::filesystem::path>& inputs,
                      const std::optional<std::string>& rebaseline,
                      const std::filesystem::path& out_prefix, std::ostream& log);

}  // namespace senticf
