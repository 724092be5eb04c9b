#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "senticf/common.hpp"
#include "senticf/ingest.hpp"

namespace senticf {

struct SentimentRatingsFile;

enum class Provenance : std::uint8_t { True, Imputed, Dropped };

const char* to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

/// One user-item interaction. A DROPPED cell keeps its review text but has
/// no rating; TRUE and IMPUTED cells always carry a rating in [1, 5].
struct Cell {
  std::optional<double> rating;
  std::string review_text;
  Provenance provenance = Provenance::True;

  bool usable() const { return rating.has_value(); }
  bool operator==(const Cell&) const = default;
};

struct CellEntry {
  Index user = 0;
  Index item = 0;
  Cell cell;

  bool operator==(const CellEntry&) const = default;
};

/// Immutable sparse user x item table. Cells are stored sorted by
/// (user, item); the id tables are shared between datasets derived from one
/// another so indices stay comparable.
class RatingsDataset {
 public:
  using Ids = std::shared_ptr<const IdInterner>;

  RatingsDataset() = default;
  /// Validates every cell and sorts by (user, item). Duplicate coordinates,
  /// out-of-range indices, and rating/provenance mismatches throw.
  RatingsDataset(std::string name, Ids users, Ids items, std::vector<CellEntry> cells);

  const std::string& name() const { return name_; }
  Index num_users() const { return users_ ? users_->size() : 0; }
  Index num_items() const { return items_ ? items_->size() : 0; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  std::span<const CellEntry> cells() const { return cells_; }
  const Cell* find(Index user, Index item) const;
  std::size_t count(Provenance p) const;
  std::size_t count_usable() const { return size() - count(Provenance::Dropped); }

  const Ids& user_ids() const { return users_; }
  const Ids& item_ids() const { return items_; }
  const std::string& user_id(Index u) const { return users_->lookup(u); }
  const std::string& item_id(Index i) const { return items_->lookup(i); }

  RatingsDataset renamed(std::string name) const;
  /// Same cells over larger id tables. Each new table must extend the old one.
  RatingsDataset with_ids(Ids users, Ids items) const;

 private:
  std::string name_;
  Ids users_;
  Ids items_;
  std::vector<CellEntry> cells_;
};

/// Validation is held out first (per user), then `drop_fraction` of the
/// remaining cells is dropped.
struct SplitSpec {
  double drop_fraction = 0.4;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitResult {
  RatingsDataset train;
  RatingsDataset validation;
};

/// Per user with n usable ratings, floor(validation_fraction * n) of them
/// (at least one when n >= 2, none when n == 1) move to validation.
SplitResult split(const RatingsDataset& full, const SplitSpec& spec);

/// Marks exactly round_half_up(drop_fraction * |TRUE cells|) TRUE cells,
/// chosen uniformly at random, as DROPPED. The result is named "SPARSE".
RatingsDataset sparsify(const RatingsDataset& train, double drop_fraction,
                        std::uint64_t seed);

/// Number of cells sparsify drops out of `candidates`.
std::size_t drop_count(std::size_t candidates, double drop_fraction);

enum class ImputePolicy { Strict, Lenient };

struct ImputeResult {
  RatingsDataset dataset;
  std::size_t imputed = 0;
  std::vector<std::string> warnings;
};

/// Fills DROPPED cells from sentiment rows, never touching TRUE or IMPUTED
/// cells. Strict mode throws on any unmatched DROPPED cell or any row that
/// does not target a DROPPED cell; lenient mode records a warning and skips.
/// The result is named after the scorer tag (prefixed "SENT-" if needed).
ImputeResult impute(const RatingsDataset& sparse, const SentimentRatingsFile& sentiments,
                    ImputePolicy policy);

/// Dataset label for a scorer tag: "LEX" -> "SENT-LEX", "SENT-BERT" unchanged.
std::string label_for_scorer(std::string_view tag);

// Snapshot format: the ingest header plus a `provenance` column. Ratings are
// written in shortest round-trip form and left empty for DROPPED cells.
void write_snapshot(std::ostream& out, const RatingsDataset& data,
                    const ColumnSchema& schema = {});

/// Reads a snapshot. Ids are interned in first-seen order, starting from
/// copies of `base_users` / `base_items` when given.
RatingsDataset read_snapshot(std::istream& in, std::string name,
                             const IdInterner* base_users = nullptr,
                             const IdInterner* base_items = nullptr,
                             const ColumnSchema& schema = {});

}  // namespace senticf
