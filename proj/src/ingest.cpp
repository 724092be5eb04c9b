#include "senticf/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <utility>

#include "senticf/dataset.hpp"
#include "text_util.hpp"

namespace senticf {

namespace {

struct ColumnPositions {
  std::size_t customer = 0;
  std::size_t product = 0;
  std::size_t rating = 0;
  std::size_t headline = 0;
  std::size_t needed = 0;  // minimum field count of a data row
};

ColumnPositions locate_columns(std::string_view header, const ColumnSchema& schema) {
  const auto fields = text::split(header, schema.delimiter);
  auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (text::trim(fields[i]) == name) return i;
    throw SchemaError("missing column '" + name + "' in header");
  };
  ColumnPositions pos;
  pos.customer = find(schema.customer_id);
  pos.product = find(schema.product_id);
  pos.rating = find(schema.star_rating);
  pos.headline = find(schema.review_headline);
  pos.needed = std::max({pos.customer, pos.product, pos.rating, pos.headline}) + 1;
  return pos;
}

}  // namespace

ParseResult parse_reviews(std::istream& in, const ColumnSchema& schema, bool strict) {
  std::string line;
  if (!text::read_line(in, line)) throw SchemaError("empty input: no header row");
  const auto pos = locate_columns(line, schema);

  ParseResult result;
  std::size_t line_no = 1;
  auto reject = [&](std::string reason) {
    if (strict) throw UserError("line " + std::to_string(line_no) + ": " + reason);
    result.rejects.push_back({line_no, std::move(reason)});
  };
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = text::split(line, schema.delimiter);
    if (fields.size() < pos.needed) {
      reject("expected at least " + std::to_string(pos.needed) + " fields, got " +
             std::to_string(fields.size()));
      continue;
    }
    ReviewRecord rec;
    rec.customer_id = std::string(fields[pos.customer]);
    rec.product_id = std::string(fields[pos.product]);
    rec.review_headline = std::string(fields[pos.headline]);
    if (rec.customer_id.empty() || rec.product_id.empty()) {
      reject("empty customer or product id");
      continue;
    }
    const auto rating = fields[pos.rating];
    if (!text::parse_number(rating, rec.star_rating)) {
      reject("unparseable star_rating '" + std::string(rating) + "'");
      continue;
    }
    if (rec.star_rating < 1 || rec.star_rating > 5) {
      reject("star_rating '" + std::string(rating) + "' outside 1-5");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_reviews(std::ostream& out, const std::vector<ReviewRecord>& records,
                   const ColumnSchema& schema) {
  const char d = schema.delimiter;
  auto check = [d](const std::string& field) -> const std::string& {
    if (field.find_first_of(std::string{d, '\n', '\r'}) != std::string::npos)
      throw UserError("field contains the delimiter or a line break: '" + field + "'");
    return field;
  };
  out << schema.customer_id << d << schema.product_id << d << schema.star_rating << d
      << schema.review_headline << '\n';
  for (const auto& r : records)
    out << check(r.customer_id) << d << check(r.product_id) << d << r.star_rating << d
        << check(r.review_headline) << '\n';
}

Index IdInterner::intern(std::string_view id) {
  if (auto it = forward_.find(id); it != forward_.end()) return it->second;
  const auto index = static_cast<Index>(ids_.size());
  ids_.emplace_back(id);
  forward_.emplace(ids_.back(), index);
  return index;
}

std::optional<Index> IdInterner::find(std::string_view id) const {
  if (auto it = forward_.find(id); it != forward_.end()) return it->second;
  return std::nullopt;
}

const std::string& IdInterner::lookup(Index index) const {
  if (index < 0 || index >= size())
    throw std::out_of_range("id index " + std::to_string(index) + " out of range");
  return ids_[static_cast<std::size_t>(index)];
}

bool IdInterner::is_prefix_of(const IdInterner& other) const {
  if (other.ids_.size() < ids_.size()) return false;
  return std::equal(ids_.begin(), ids_.end(), other.ids_.begin());
}

RatingsDataset intern(const std::vector<ReviewRecord>& records, std::string name,
                      InternStats* stats) {
  if (records.empty()) throw UserError("empty dataset");
  auto users = std::make_shared<IdInterner>();
  auto items = std::make_shared<IdInterner>();
  std::map<std::pair<Index, Index>, const ReviewRecord*> latest;
  std::size_t duplicates = 0;
  for (const auto& r : records) {
    const auto key = std::make_pair(users->intern(r.customer_id), items->intern(r.product_id));
    auto [it, inserted] = latest.insert_or_assign(key, &r);
    if (!inserted) ++duplicates;
  }
  std::vector<CellEntry> cells;
  cells.reserve(latest.size());
  for (const auto& [key, rec] : latest)
    cells.push_back({key.first, key.second,
                     Cell{static_cast<double>(rec->star_rating), rec->review_headline,
                          Provenance::True}});
  if (stats) *stats = {records.size(), duplicates, users->size(), items->size(), cells.size()};
  return RatingsDataset(std::move(name), std::move(users), std::move(items), std::move(cells));
}

}  // namespace senticf
