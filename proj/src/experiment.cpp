#include "senticf/experiment.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace senticf {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

als::AlsConfig ExperimentConfig::als_config() const {
  als::AlsConfig c = als;
  c.seed = als_seed();
  return c;
}

fs::path ExperimentConfig::validation_path() const {
  return validation.empty() ? out_dir / "validation.tsv" : validation;
}

std::vector<DatasetRef> ExperimentConfig::dataset_refs() const {
  if (!datasets.empty()) return datasets;
  return {{"SPARSE", out_dir / "sparse.tsv"}};
}

void ExperimentConfig::validate() const {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw UserError("drop_fraction must lie in [0, 1)");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw UserError("validation_fraction must lie in (0, 1)");
  if (k < 1) throw UserError("k must be at least 1");
  als.validate();

  const auto refs = dataset_refs();
  std::set<std::string> labels;
  std::set<fs::path> paths{validation_path().lexically_normal()};
  for (const auto& ref : refs) {
    if (ref.label.empty()) throw UserError("empty dataset label");
    if (!labels.insert(ref.label).second) throw UserError("duplicate dataset label " + ref.label);
    if (!paths.insert(ref.path.lexically_normal()).second)
      throw UserError("path " + ref.path.string() + " referenced more than once");
  }
  if (!labels.contains(baseline)) throw UserError("baseline " + baseline + " is not a configured dataset");
}

namespace {

template <typename T>
T number(std::string_view key, std::string_view value) {
  T out{};
  if (!text::parse_number(value, out))
    throw UserError("config key " + std::string(key) + ": bad number '" + std::string(value) + "'");
  return out;
}

bool boolean(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UserError("config key " + std::string(key) + ": expected true or false");
}

char delimiter(std::string_view value) {
  if (value == "tab" || value == "\\t") return '\t';
  if (value == "comma") return ',';
  if (value.size() == 1) return value.front();
  throw UserError("config key delimiter: expected tab, comma, or a single character");
}

std::pair<std::string, std::string> split_setting(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw UserError("config line without '=': " + std::string(line));
  return {std::string(text::trim(line.substr(0, eq))), std::string(text::trim(line.substr(eq + 1)))};
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value, const fs::path& base) {
  auto path = [&base](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base / v; };
  auto synth = [&c]() -> SynthSpec& {
    if (!c.synth) c.synth = SynthSpec{};
    return *c.synth;
  };
  if (key == "input") c.input = path(value);
  else if (key == "delimiter") c.schema.delimiter = delimiter(value);
  else if (key == "strict") c.strict = boolean(key, value);
  else if (key == "seed") c.seed = number<std::uint64_t>(key, value);
  else if (key == "drop_fraction") c.drop_fraction = number<double>(key, value);
  else if (key == "validation_fraction") c.validation_fraction = number<double>(key, value);
  else if (key == "k") c.k = number<int>(key, value);
  else if (key == "out_dir") c.out_dir = path(value);
  else if (key == "validation") c.validation = path(value);
  else if (key == "baseline") c.baseline = value;
  else if (key == "lexicon.positive") c.lexicon_positive = path(value);
  else if (key == "lexicon.negative") c.lexicon_negative = path(value);
  else if (key == "column.customer_id") c.schema.customer_id = value;
  else if (key == "column.product_id") c.schema.product_id = value;
  else if (key == "column.star_rating") c.schema.star_rating = value;
  else if (key == "column.review_headline") c.schema.review_headline = value;
  else if (key == "als.rank") c.als.rank = number<Index>(key, value);
  else if (key == "als.lambda") c.als.reg_lambda = number<double>(key, value);
  else if (key == "als.iterations") c.als.iterations = number<int>(key, value);
  else if (key == "als.init_scale") c.als.init_scale = number<double>(key, value);
  else if (key == "als.threads") c.als.threads = number<int>(key, value);
  else if (key == "synth.users") synth().num_users = number<Index>(key, value);
  else if (key == "synth.items") synth().num_items = number<Index>(key, value);
  else if (key == "synth.rank") synth().rank = number<Index>(key, value);
  else if (key == "synth.noise_sd") synth().noise_sd = number<double>(key, value);
  else if (key == "synth.density") synth().density = number<double>(key, value);
  else if (key == "synth.exposure_bias") synth().exposure_bias = number<double>(key, value);
  else if (key.starts_with("dataset.")) {
    const auto label = key.substr(8);
    auto it = std::find_if(c.datasets.begin(), c.datasets.end(), [&](const auto& d) { return d.label == label; });
    if (it != c.datasets.end()) it->path = path(value);
    else c.datasets.push_back({label, path(value)});
  } else {
    throw UserError("unknown config key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const fs::path& base_dir,
                              const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> settings;
  auto put = [&settings](std::pair<std::string, std::string> kv) {
    auto it = std::find_if(settings.begin(), settings.end(), [&](const auto& s) { return s.first == kv.first; });
    if (it != settings.end()) it->second = std::move(kv.second);
    else settings.push_back(std::move(kv));
  };
  std::string line;
  while (text::read_line(in, line)) {
    const auto hash = line.find('#');
    const auto body = text::trim(std::string_view(line).substr(0, hash));
    if (!body.empty()) put(split_setting(body));
  }
  for (const auto& o : overrides) put(split_setting(o));

  ExperimentConfig config;
  for (const auto& [key, value] : settings) apply(config, key, value, base_dir);
  if (config.synth) config.synth->seed = config.synth_seed();
  config.validate();
  return config;
}

ExperimentConfig load_config(const fs::path& file, const std::vector<std::string>& overrides) {
  auto in = open_input(file);
  return parse_config(in, file.parent_path(), overrides);
}

std::ifstream open_input(const fs::path& path) {
  if (!fs::exists(path)) throw UserError("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  return in;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write " + path.string());
  return out;
}

RatingsDataset load_snapshot(const fs::path& path, std::string name,
                             const IdInterner* users = nullptr, const IdInterner* items = nullptr) {
  auto in = open_input(path);
  try {
    return read_snapshot(in, std::move(name), users, items);
  } catch (const UserError& e) {
    throw UserError(path.string() + ": " + e.what());
  }
}

void save_snapshot(const fs::path& path, const RatingsDataset& data) {
  auto out = open_output(path);
  write_snapshot(out, data);
}

}  // namespace

// ---------------------------------------------------------------------------
// Reports

EvalReport build_report(const std::vector<std::pair<std::string, MetricTriple>>& results,
                        const std::string& baseline) {
  EvalReport report;
  report.baseline = baseline;
  if (results.empty()) return report;
  report.k = results.front().second.k;
  const MetricTriple* base = nullptr;
  for (const auto& [label, m] : results) {
    if (m.k != report.k) throw UserError("results computed with different K");
    if (label == baseline) base = &m;
  }
  if (!base) throw UserError("baseline " + baseline + " missing from results");
  for (const auto& [label, m] : results) {
    ReportRow row{label, m, std::nullopt};
    if (label != baseline) row.avg_improvement = avg_improvement(m, *base);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_rows(std::ostream& out, const EvalReport& report) {
  out << "# k=" << report.k << "\tbaseline=" << report.baseline << '\n';
  out << "label\tmap\tndcg_at_k\tp_at_k\tavg_imp_pct\n";
  for (const auto& row : report.rows) {
    out << row.label << '\t' << text::shortest(row.metrics.map) << '\t'
        << text::shortest(row.metrics.ndcg_at_k) << '\t' << text::shortest(row.metrics.p_at_k) << '\t'
        << (row.avg_improvement ? text::shortest(*row.avg_improvement) : "-") << '\n';
  }
}

EvalReport read_report_rows(std::istream& in) {
  EvalReport report;
  std::string line;
  if (!text::read_line(in, line) || !line.starts_with("# k="))
    throw SchemaError("report rows: missing '# k=' line");
  const auto meta = text::split(std::string_view(line).substr(2), '\t');
  if (meta.size() != 2 || !meta[1].starts_with("baseline="))
    throw SchemaError("report rows: bad metadata line");
  report.k = number<int>("k", meta[0].substr(2));
  report.baseline = std::string(meta[1].substr(9));
  if (!text::read_line(in, line) || line != "label\tmap\tndcg_at_k\tp_at_k\tavg_imp_pct")
    throw SchemaError("report rows: bad header");
  while (text::read_line(in, line)) {
    if (line.empty()) continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 5) throw UserError("report rows: expected 5 fields in '" + line + "'");
    ReportRow row;
    row.label = std::string(f[0]);
    row.metrics = {number<double>("map", f[1]), number<double>("ndcg_at_k", f[2]),
                   number<double>("p_at_k", f[3]), report.k};
    if (f[4] != "-") row.avg_improvement = number<double>("avg_imp_pct", f[4]);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string render_table(const EvalReport& report) {
  const auto& rows = report.rows;
  auto best = [&rows](auto get) {
    std::optional<double> b;
    for (const auto& r : rows)
      if (auto v = get(r); v && (!b || *v > *b)) b = v;
    return b;
  };
  using Getter = std::optional<double> (*)(const ReportRow&);
  const Getter getters[] = {
      [](const ReportRow& r) -> std::optional<double> { return r.metrics.map; },
      [](const ReportRow& r) -> std::optional<double> { return r.metrics.ndcg_at_k; },
      [](const ReportRow& r) -> std::optional<double> { return r.metrics.p_at_k; },
      [](const ReportRow& r) { return r.avg_improvement; },
  };
  std::optional<double> bests[4];
  // A best value only gets a marker when more than one row competes.
  for (int c = 0; c < 4; ++c)
    if (rows.size() > 1) bests[c] = best(getters[c]);

  const std::string k = std::to_string(report.k);
  std::vector<std::vector<std::string>> cells{{"RecSys", "MAP", "NDCG@" + k, "P@" + k, "Avg. Imp%"}};
  for (const auto& r : rows) {
    std::vector<std::string> line{r.label};
    for (int c = 0; c < 4; ++c) {
      const auto v = getters[c](r);
      if (!v) {
        line.push_back("---");
        continue;
      }
      std::string s = c == 3 ? text::fixed(*v, 2) + "%" : text::fixed(*v, 4);
      if (bests[c] && *v == *bests[c]) s += "*";
      line.push_back(std::move(s));
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(5, 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << line[c];
      if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

EvalReport merge_reports(const std::vector<EvalReport>& reports,
                         const std::optional<std::string>& rebaseline) {
  if (reports.empty()) throw UserError("nothing to merge");
  EvalReport merged;
  merged.k = reports.front().k;
  merged.baseline = reports.front().baseline;
  for (const auto& r : reports) {
    if (r.k != merged.k)
      throw UserError("incompatible K across reports: " + std::to_string(merged.k) + " vs " +
                      std::to_string(r.k));
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
  }
  if (rebaseline) {
    std::vector<std::pair<std::string, MetricTriple>> results;
    for (const auto& row : merged.rows) results.emplace_back(row.label, row.metrics);
    merged = build_report(results, *rebaseline);
  }
  std::stable_sort(merged.rows.begin(), merged.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.avg_improvement && b.avg_improvement) return *a.avg_improvement > *b.avg_improvement;
    return a.avg_improvement.has_value() && !b.avg_improvement.has_value();
  });
  return merged;
}

MetricTriple evaluate_dataset(const RatingsDataset& train, const RatingsDataset& validation,
                              const als::AlsConfig& config, int k) {
  if (train.user_ids() != validation.user_ids() || train.item_ids() != validation.item_ids())
    throw UserError("train and validation must share id tables");
  const auto model = als::train(train, config);
  return evaluate(als::recommend_top_k(model, train, k), ground_truth(validation), k);
}

// ---------------------------------------------------------------------------
// Subcommands

PrepareSummary cmd_prepare(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  PrepareSummary summary;
  RatingsDataset full;
  if (config.synth) {
    full = synth_lowrank(*config.synth).dataset;
    summary.intern = {full.size(), 0, full.num_users(), full.num_items(), full.size()};
  } else {
    if (config.input.empty()) throw UserError("config sets neither input nor synth.*");
    auto in = open_input(config.input);
    ParseResult parsed;
    try {
      parsed = parse_reviews(in, config.schema, config.strict);
    } catch (const UserError& e) {
      throw UserError(config.input.string() + ": " + e.what());
    }
    for (const auto& r : parsed.rejects) log << "rejected line " << r.line << ": " << r.reason << '\n';
    summary.rejected = parsed.rejects.size();
    full = intern(parsed.records, "FULL", &summary.intern);
  }

  auto [train, validation] = split(full, config.split_spec());
  const auto sparse = sparsify(train, config.drop_fraction, config.sparsify_seed());
  summary.train_cells = train.size();
  summary.validation_cells = validation.size();
  summary.dropped_cells = sparse.count(Provenance::Dropped);

  summary.train = config.out_dir / "train.tsv";
  summary.validation = config.validation_path();
  summary.sparse = config.out_dir / "sparse.tsv";
  summary.manifest = config.out_dir / "manifest.txt";
  save_snapshot(summary.train, train);
  save_snapshot(summary.validation, validation);
  save_snapshot(summary.sparse, sparse);

  auto manifest = open_output(summary.manifest);
  const double dropped_pct =
      train.empty() ? 0.0 : 100.0 * static_cast<double>(summary.dropped_cells) / static_cast<double>(train.size());
  manifest << "seed = " << config.seed << '\n'
           << "drop_fraction = " << text::shortest(config.drop_fraction) << '\n'
           << "validation_fraction = " << text::shortest(config.validation_fraction) << '\n'
           << "records = " << summary.intern.records << '\n'
           << "rejected = " << summary.rejected << '\n'
           << "duplicates = " << summary.intern.duplicates << '\n'
           << "users = " << summary.intern.users << '\n'
           << "items = " << summary.intern.items << '\n'
           << "interactions = " << summary.intern.interactions << '\n'
           << "train_cells = " << summary.train_cells << '\n'
           << "validation_cells = " << summary.validation_cells << '\n'
           << "dropped_cells = " << summary.dropped_cells << '\n'
           << "dropped_percent = " << text::fixed(dropped_pct, 2) << '\n';
  log << "prepared " << summary.intern.users << " users, " << summary.intern.items << " items: "
      << summary.train_cells << " train (" << summary.dropped_cells << " dropped), "
      << summary.validation_cells << " validation\n";
  return summary;
}

SentimentRatingsFile cmd_score(const fs::path& dataset, const fs::path& out, const Lexicon& lexicon,
                               std::string_view scorer, std::ostream& log) {
  const auto data = load_snapshot(dataset, "INPUT");
  auto file = score_dataset(data, lexicon, scorer);
  if (file.rows.empty()) log << "warning: " << dataset.string() << " has no DROPPED cells\n";
  auto os = open_output(out);
  write_sentiments(os, file);
  log << "scored " << file.rows.size() << " dropped cells -> " << out.string() << '\n';
  return file;
}

ImputeResult cmd_impute(const fs::path& dataset, const fs::path& sentiments, const fs::path& out,
                        ImputePolicy policy, std::ostream& log) {
  const auto data = load_snapshot(dataset, "INPUT");
  auto in = open_input(sentiments);
  SentimentRatingsFile file;
  try {
    file = read_sentiments(in);
  } catch (const UserError& e) {
    throw UserError(sentiments.string() + ": " + e.what());
  }
  auto result = impute(data, file, policy);
  for (const auto& w : result.warnings) log << "warning: " << w << '\n';
  save_snapshot(out, result.dataset);
  log << "imputed " << result.imputed << " cells -> " << out.string() << " (" << result.dataset.name()
      << ")\n";
  return result;
}

als::FactorModel<double> cmd_train(const fs::path& dataset, const als::AlsConfig& config,
                                   const fs::path& model_out, std::ostream& log) {
  const auto data = load_snapshot(dataset, "INPUT");
  als::TrainingTrace trace;
  auto model = als::train(data, config, &trace);
  auto out = open_output(model_out);
  als::save_model(out, model);
  log << "trained rank-" << config.rank << " model on " << data.count_usable()
      << " ratings, final rmse " << text::fixed(trace.rmse.back(), 6) << " -> " << model_out.string() << '\n';
  return model;
}

EvalReport cmd_evaluate(const ExperimentConfig& config, const fs::path& out_prefix, std::ostream& log) {
  config.validate();
  const auto refs = config.dataset_refs();
  for (const auto& ref : refs)
    if (!fs::exists(ref.path)) throw UserError("dataset " + ref.label + " missing: " + ref.path.string());
  if (!fs::exists(config.validation_path()))
    throw UserError("validation set missing: " + config.validation_path().string());

  // Every train snapshot holds the same cells in the same order, so interning
  // each one and then the validation rows yields identical id tables.
  struct Loaded {
    std::string label;
    RatingsDataset train;
    RatingsDataset validation;
  };
  std::vector<Loaded> loaded;
  for (const auto& ref : refs) {
    auto train = load_snapshot(ref.path, ref.label);
    auto validation = load_snapshot(config.validation_path(), "VALIDATION", train.user_ids().get(),
                                    train.item_ids().get());
    train = train.with_ids(validation.user_ids(), validation.item_ids());
    loaded.push_back({ref.label, std::move(train), std::move(validation)});
  }

  const auto als = config.als_config();
  std::vector<std::pair<std::string, MetricTriple>> results;
  for (const auto& d : loaded) {
    const auto m = evaluate_dataset(d.train, d.validation, als, config.k);
    log << "evaluated " << d.label << ": MAP " << text::fixed(m.map, 4) << ", NDCG@" << config.k << ' '
        << text::fixed(m.ndcg_at_k, 4) << ", P@" << config.k << ' ' << text::fixed(m.p_at_k, 4) << '\n';
    results.emplace_back(d.label, m);
  }
  auto report = build_report(results, config.baseline);

  {
    auto txt = open_output(fs::path(out_prefix.string() + ".txt"));
    txt << render_table(report);
    auto tsv = open_output(fs::path(out_prefix.string() + ".tsv"));
    write_report_rows(tsv, report);
  }
  return report;
}

EvalReport cmd_report(const std::vector<fs::path>& inputs, const std::optional<std::string>& rebaseline,
                      const fs::path& out_prefix, std::ostream& log) {
  if (inputs.empty()) throw UserError("report needs at least one metrics file");
  std::vector<EvalReport> reports;
  for (const auto& path : inputs) {
    auto in = open_input(path);
    try {
      reports.push_back(read_report_rows(in));
    } catch (const UserError& e) {
      throw UserError(path.string() + ": " + e.what());
    }
  }
  auto merged = merge_reports(reports, rebaseline);
  if (!out_prefix.empty()) {
    auto txt = open_output(fs::path(out_prefix.string() + ".txt"));
    txt << render_table(merged);
    auto tsv = open_output(fs::path(out_prefix.string() + ".tsv"));
    write_report_rows(tsv, merged);
  }
  log << "merged " << merged.rows.size() << " rows from " << inputs.size() << " files\n";
  return merged;
}

}  // namespace senticf
