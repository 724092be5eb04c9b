#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "senticf/common.hpp"

namespace senticf {

class RatingsDataset;

struct ReviewRecord {
  std::string customer_id;
  std::string product_id;
  int star_rating = 0;
  std::string review_headline;

  bool operator==(const ReviewRecord&) const = default;
};

/// Column names and delimiter of a review table. Defaults follow the
/// tab-separated Amazon reviews dump.
struct ColumnSchema {
  std::string customer_id = "customer_id";
  std::string product_id = "product_id";
  std::string star_rating = "star_rating";
  std::string review_headline = "review_headline";
  char delimiter = '\t';
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct ParseResult {
  std::vector<ReviewRecord> records;
  std::vector<RejectedRow> rejects;
};

/// Reads a delimited table with a header row. Rows that fail validation are
/// collected in `rejects`; with `strict` the first bad row throws instead.
/// Fields are not quoted: a field runs to the next delimiter. A trailing
/// '\r' is stripped from every line.
ParseResult parse_reviews(std::istream& in, const ColumnSchema& schema = {},
                          bool strict = false);

/// Writes records in the four-column layout of `schema`. Throws if a field
/// contains the delimiter or a line break (it could not be read back).
void write_reviews(std::ostream& out, const std::vector<ReviewRecord>& records,
                   const ColumnSchema& schema = {});

/// External string id <-> dense index, indices assigned from 0 in first-seen
/// order.
class IdInterner {
 public:
  Index intern(std::string_view id);
  std::optional<Index> find(std::string_view id) const;
  const std::string& lookup(Index index) const;
  Index size() const { return static_cast<Index>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }

  /// True if `other` assigns every id of `*this` the same index.
  bool is_prefix_of(const IdInterner& other) const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, Index, Hash, std::equal_to<>> forward_;
  std::vector<std::string> ids_;
};

struct InternStats {
  std::size_t records = 0;
  std::size_t duplicates = 0;  // (user, item) pairs overwritten by a later row
  Index users = 0;
  Index items = 0;
  std::size_t interactions = 0;
};

/// Builds a dataset of TRUE cells. A repeated (user, item) pair keeps the
/// last occurrence. Throws UserError("empty dataset") on empty input.
RatingsDataset intern(const std::vector<ReviewRecord>& records, std::string name,
                      InternStats* stats = nullptr);

}  // namespace senticf
