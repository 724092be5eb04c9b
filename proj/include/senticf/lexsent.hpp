#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "senticf/common.hpp"

namespace senticf {

class RatingsDataset;

/// Positive and negative term sets, lowercase. Construction rejects a term
/// listed under both polarities.
class Lexicon {
 public:
  Lexicon(std::set<std::string> positive, std::set<std::string> negative);

  const std::set<std::string>& positive() const { return positive_; }
  const std::set<std::string>& negative() const { return negative_; }

  /// Same terms with the polarities swapped.
  Lexicon swapped() const { return Lexicon(negative_, positive_); }

 private:
  std::set<std::string> positive_;
  std::set<std::string> negative_;
};

/// The built-in lexicon (about fifty terms per polarity).
const Lexicon& default_lexicon();

/// Reads one term per line from each file; blank lines and lines starting
/// with '#' are skipped, terms are lowercased.
Lexicon load_lexicon(const std::filesystem::path& positive_file,
                     const std::filesystem::path& negative_file);

/// Splits on non-alphanumeric ASCII bytes and lowercases ASCII letters.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// With p positive and q negative token hits: 3 if p + q == 0, otherwise
/// 3 + 2 (p - q) / (p + q). Always in [1, 5].
double score_text(std::string_view text, const Lexicon& lexicon);

struct SentimentRow {
  std::string customer_id;
  std::string product_id;
  double rating = 3.0;
  std::string scorer;

  bool operator==(const SentimentRow&) const = default;
};

/// Exchange format between sentiment scorers and imputation. On disk it is
/// tab-separated with the header `customer_id product_id rating scorer` and
/// ratings printed with four decimals.
struct SentimentRatingsFile {
  std::vector<SentimentRow> rows;

  bool operator==(const SentimentRatingsFile&) const = default;
};

inline constexpr int kSentimentDecimals = 4;

/// Rounds to the file's printed precision, so a written value reads back
/// as the identical double.
double quantize_rating(double rating);

void write_sentiments(std::ostream& out, const SentimentRatingsFile& file);

/// Throws UserError naming the line for a bad header, a wrong field count,
/// a rating outside [1, 5], or a repeated (customer_id, product_id) pair.
SentimentRatingsFile read_sentiments(std::istream& in);

/// One row per DROPPED cell, in (user, item) order, rating from score_text
/// on the cell's review text. TRUE and IMPUTED cells are never scored.
SentimentRatingsFile score_dataset(const RatingsDataset& data, const Lexicon& lexicon,
                                   std::string_view scorer = "LEX");

}  // namespace senticf
