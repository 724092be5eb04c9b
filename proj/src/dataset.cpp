#include "senticf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <utility>

#include "senticf/lexsent.hpp"
#include "senticf/random.hpp"
#include "text_util.hpp"

namespace senticf {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::True: return "TRUE";
    case Provenance::Imputed: return "IMPUTED";
    case Provenance::Dropped: return "DROPPED";
  }
  return "?";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "TRUE") return Provenance::True;
  if (text == "IMPUTED") return Provenance::Imputed;
  if (text == "DROPPED") return Provenance::Dropped;
  throw UserError("unknown provenance '" + std::string(text) + "'");
}

namespace {

bool by_coordinate(const CellEntry& a, const CellEntry& b) {
  return a.user != b.user ? a.user < b.user : a.item < b.item;
}

void check_cell(const CellEntry& e, Index users, Index items) {
  if (e.user < 0 || e.user >= users || e.item < 0 || e.item >= items)
    throw UserError("cell index out of range");
  const bool dropped = e.cell.provenance == Provenance::Dropped;
  if (dropped == e.cell.rating.has_value())
    throw UserError("cell rating presence does not match provenance " +
                    std::string(to_string(e.cell.provenance)));
  if (e.cell.rating && !(*e.cell.rating >= 1.0 && *e.cell.rating <= 5.0))
    throw UserError("rating " + text::shortest(*e.cell.rating) + " outside [1, 5]");
}

}  // namespace

RatingsDataset::RatingsDataset(std::string name, Ids users, Ids items, std::vector<CellEntry> cells)
    : name_(std::move(name)), users_(std::move(users)), items_(std::move(items)), cells_(std::move(cells)) {
  if (!users_ || !items_) throw std::invalid_argument("dataset needs id tables");
  for (const auto& e : cells_) check_cell(e, num_users(), num_items());
  if (!std::is_sorted(cells_.begin(), cells_.end(), by_coordinate))
    std::sort(cells_.begin(), cells_.end(), by_coordinate);
  const auto dup = std::adjacent_find(cells_.begin(), cells_.end(), [](const auto& a, const auto& b) {
    return a.user == b.user && a.item == b.item;
  });
  if (dup != cells_.end()) throw UserError("duplicate cell (" + user_id(dup->user) + ", " + item_id(dup->item) + ")");
}

const Cell* RatingsDataset::find(Index user, Index item) const {
  const CellEntry probe{user, item, {}};
  auto it = std::lower_bound(cells_.begin(), cells_.end(), probe, by_coordinate);
  if (it == cells_.end() || it->user != user || it->item != item) return nullptr;
  return &it->cell;
}

std::size_t RatingsDataset::count(Provenance p) const {
  return static_cast<std::size_t>(std::count_if(
      cells_.begin(), cells_.end(), [p](const CellEntry& e) { return e.cell.provenance == p; }));
}

RatingsDataset RatingsDataset::renamed(std::string name) const {
  RatingsDataset copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

RatingsDataset RatingsDataset::with_ids(Ids users, Ids items) const {
  if (!users_->is_prefix_of(*users) || !items_->is_prefix_of(*items))
    throw UserError("replacement id tables do not extend the dataset's tables");
  RatingsDataset copy = *this;
  copy.users_ = std::move(users);
  copy.items_ = std::move(items);
  return copy;
}

SplitResult split(const RatingsDataset& full, const SplitSpec& spec) {
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
    throw UserError("validation_fraction must lie in (0, 1)");

  Rng rng(spec.seed);
  std::vector<bool> held_out(full.size(), false);
  const auto cells = full.cells();
  std::vector<std::size_t> usable;
  for (std::size_t begin = 0; begin < cells.size();) {
    std::size_t end = begin;
    usable.clear();
    for (; end < cells.size() && cells[end].user == cells[begin].user; ++end)
      if (cells[end].cell.usable()) usable.push_back(end);
    const std::size_t n = usable.size();
    // The epsilon keeps products like 0.29 * 100 from flooring to 28.
    auto take = static_cast<std::size_t>(std::floor(spec.validation_fraction * static_cast<double>(n) + 1e-9));
    if (n >= 2) take = std::clamp<std::size_t>(take, 1, n - 1);
    else take = 0;
    rng.partial_shuffle(usable.begin(), usable.end(), take);
    for (std::size_t i = 0; i < take; ++i) held_out[usable[i]] = true;
    begin = end;
  }

  std::vector<CellEntry> train, validation;
  for (std::size_t i = 0; i < cells.size(); ++i)
    (held_out[i] ? validation : train).push_back(cells[i]);
  return {RatingsDataset("TRAIN", full.user_ids(), full.item_ids(), std::move(train)),
          RatingsDataset("VALIDATION", full.user_ids(), full.item_ids(), std::move(validation))};
}

std::size_t drop_count(std::size_t candidates, double drop_fraction) {
  return static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(candidates) + 0.5));
}

RatingsDataset sparsify(const RatingsDataset& train, double drop_fraction, std::uint64_t seed) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0))
    throw UserError("drop_fraction must lie in [0, 1)");
  std::vector<CellEntry> cells(train.cells().begin(), train.cells().end());
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].cell.provenance == Provenance::True) candidates.push_back(i);
  const auto drop = drop_count(candidates.size(), drop_fraction);
  Rng rng(seed);
  rng.partial_shuffle(candidates.begin(), candidates.end(), drop);
  for (std::size_t i = 0; i < drop; ++i) {
    auto& cell = cells[candidates[i]].cell;
    cell.rating.reset();
    cell.provenance = Provenance::Dropped;
  }
  return RatingsDataset("SPARSE", train.user_ids(), train.item_ids(), std::move(cells));
}

std::string label_for_scorer(std::string_view tag) {
  if (tag.starts_with("SENT-")) return std::string(tag);
  return "SENT-" + std::string(tag);
}

ImputeResult impute(const RatingsDataset& sparse, const SentimentRatingsFile& sentiments,
                    ImputePolicy policy) {
  ImputeResult result;
  auto problem = [&](std::string message) {
    if (policy == ImputePolicy::Strict) throw UserError(message);
    result.warnings.push_back(std::move(message));
  };

  std::map<std::pair<Index, Index>, double> fills;
  std::vector<std::string> tags;
  for (const auto& row : sentiments.rows) {
    if (std::find(tags.begin(), tags.end(), row.scorer) == tags.end()) tags.push_back(row.scorer);
    const auto user = sparse.user_ids()->find(row.customer_id);
    const auto item = sparse.item_ids()->find(row.product_id);
    const std::string where = "(" + row.customer_id + ", " + row.product_id + ")";
    if (!user || !item) {
      problem("sentiment row for unknown pair " + where);
      continue;
    }
    const Cell* cell = sparse.find(*user, *item);
    if (!cell) {
      problem("sentiment row for absent cell " + where);
      continue;
    }
    if (cell->provenance != Provenance::Dropped) {
      problem("sentiment row targets " + std::string(to_string(cell->provenance)) + " cell " + where);
      continue;
    }
    fills[{*user, *item}] = row.rating;
  }

  std::vector<CellEntry> cells(sparse.cells().begin(), sparse.cells().end());
  for (auto& e : cells) {
    if (e.cell.provenance != Provenance::Dropped) continue;
    auto it = fills.find({e.user, e.item});
    if (it == fills.end()) {
      problem("no sentiment rating for dropped cell (" + sparse.user_id(e.user) + ", " +
              sparse.item_id(e.item) + ")");
      continue;
    }
    e.cell.rating = it->second;
    e.cell.provenance = Provenance::Imputed;
    ++result.imputed;
  }

  std::string name;
  for (const auto& tag : tags) name += (name.empty() ? "" : "+") + tag;
  result.dataset = RatingsDataset(name.empty() ? sparse.name() : label_for_scorer(name),
                                  sparse.user_ids(), sparse.item_ids(), std::move(cells));
  return result;
}

void write_snapshot(std::ostream& out, const RatingsDataset& data, const ColumnSchema& schema) {
  const char d = schema.delimiter;
  out << schema.customer_id << d << schema.product_id << d << schema.star_rating << d
      << schema.review_headline << d << "provenance\n";
  for (const auto& e : data.cells()) {
    if (e.cell.review_text.find_first_of(std::string{d, '\n', '\r'}) != std::string::npos)
      throw UserError("review text contains the delimiter or a line break");
    out << data.user_id(e.user) << d << data.item_id(e.item) << d;
    if (e.cell.rating) out << text::shortest(*e.cell.rating);
    out << d << e.cell.review_text << d << to_string(e.cell.provenance) << '\n';
  }
}

RatingsDataset read_snapshot(std::istream& in, std::string name, const IdInterner* base_users,
                             const IdInterner* base_items, const ColumnSchema& schema) {
  std::string line;
  if (!text::read_line(in, line)) throw SchemaError("empty snapshot");
  const auto header = text::split(line, schema.delimiter);
  const std::vector<std::string_view> expected{schema.customer_id, schema.product_id,
                                               schema.star_rating, schema.review_headline,
                                               "provenance"};
  if (header != expected) throw SchemaError("snapshot header mismatch: '" + line + "'");

  auto users = std::make_shared<IdInterner>(base_users ? *base_users : IdInterner{});
  auto items = std::make_shared<IdInterner>(base_items ? *base_items : IdInterner{});
  std::vector<CellEntry> cells;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split(line, schema.delimiter);
    const std::string at = "snapshot line " + std::to_string(line_no) + ": ";
    if (f.size() != 5) throw UserError(at + "expected 5 fields");
    if (f[0].empty() || f[1].empty()) throw UserError(at + "empty id");
    CellEntry e;
    e.user = users->intern(f[0]);
    e.item = items->intern(f[1]);
    e.cell.provenance = parse_provenance(f[4]);
    e.cell.review_text = std::string(f[3]);
    if (!f[2].empty()) {
      double r = 0;
      if (!text::parse_number(f[2], r)) throw UserError(at + "bad rating '" + std::string(f[2]) + "'");
      e.cell.rating = r;
    }
    try {
      check_cell(e, users->size(), items->size());
    } catch (const UserError& err) {
      throw UserError(at + err.what());
    }
    cells.push_back(std::move(e));
  }
  return RatingsDataset(std::move(name), std::move(users), std::move(items), std::move(cells));
}

}  // namespace senticf
