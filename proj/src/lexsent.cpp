#include "senticf/lexsent.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "senticf/dataset.hpp"
#include "text_util.hpp"

namespace senticf {

Lexicon::Lexicon(std::set<std::string> positive, std::set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {
  for (const auto& term : positive_)
    if (negative_.contains(term)) throw UserError("term '" + term + "' listed as both positive and negative");
}

const Lexicon& default_lexicon() {
  static const Lexicon lexicon(
      {"amazing",    "awesome",     "beautiful", "best",      "brilliant", "captivating",
       "charming",   "classic",     "delight",   "delightful", "enjoy",    "enjoyable",
       "enjoyed",    "entertaining", "excellent", "exceptional", "fabulous", "fantastic",
       "favorite",   "fine",        "fun",       "funny",     "gem",       "good",
       "gorgeous",   "great",       "happy",     "hilarious", "impressive", "incredible",
       "inspiring",  "love",        "loved",     "lovely",    "masterpiece", "memorable",
       "nice",       "outstanding", "perfect",   "pleasant",  "powerful",  "recommend",
       "recommended", "remarkable", "solid",     "stunning",  "superb",    "terrific",
       "touching",   "wonderful"},
      {"annoying",   "awful",       "bad",       "boring",    "broken",    "cheap",
       "confusing",  "defective",   "disappoint", "disappointed", "disappointing", "dreadful",
       "dull",       "garbage",     "hate",      "hated",     "horrible",  "junk",
       "lame",       "mediocre",    "mess",      "messy",     "overrated", "pathetic",
       "poor",       "poorly",      "predictable", "ridiculous", "rubbish", "sad",
       "scratched",  "silly",       "slow",      "stupid",    "tedious",   "terrible",
       "tiresome",   "trash",       "ugly",      "unwatchable", "useless", "waste",
       "wasted",     "weak",        "worse",     "worst",     "worthless", "wrong",
       "bland",      "painful"});
  return lexicon;
}

namespace {

std::set<std::string> read_terms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open lexicon file " + path.string());
  std::set<std::string> terms;
  std::string line;
  while (text::read_line(in, line)) {
    const auto term = text::trim(line);
    if (term.empty() || term.front() == '#') continue;
    for (auto& t : tokenize(term)) terms.insert(std::move(t));
  }
  return terms;
}

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& positive_file,
                     const std::filesystem::path& negative_file) {
  return Lexicon(read_terms(positive_file), read_terms(negative_file));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double score_text(std::string_view text, const Lexicon& lexicon) {
  int positive = 0, negative = 0;
  for (const auto& token : tokenize(text)) {
    if (lexicon.positive().contains(token)) ++positive;
    else if (lexicon.negative().contains(token)) ++negative;
  }
  if (positive + negative == 0) return 3.0;
  return 3.0 + 2.0 * (positive - negative) / static_cast<double>(positive + negative);
}

double quantize_rating(double rating) {
  constexpr double scale = 1e4;
  static_assert(kSentimentDecimals == 4);
  return std::round(rating * scale) / scale;
}

void write_sentiments(std::ostream& out, const SentimentRatingsFile& file) {
  out << "customer_id\tproduct_id\trating\tscorer\n";
  for (const auto& row : file.rows)
    out << row.customer_id << '\t' << row.product_id << '\t'
        << text::fixed(row.rating, kSentimentDecimals) << '\t' << row.scorer << '\n';
}

SentimentRatingsFile read_sentiments(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || line != "customer_id\tproduct_id\trating\tscorer")
    throw SchemaError("sentiment file: bad header");
  SentimentRatingsFile file;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string at = "sentiment file line " + std::to_string(line_no) + ": ";
    const auto f = text::split(line, '\t');
    if (f.size() != 4) throw UserError(at + "expected 4 fields");
    SentimentRow row{std::string(f[0]), std::string(f[1]), 0.0, std::string(f[3])};
    if (row.customer_id.empty() || row.product_id.empty()) throw UserError(at + "empty id");
    if (!text::parse_number(f[2], row.rating) || !(row.rating >= 1.0 && row.rating <= 5.0))
      throw UserError(at + "rating '" + std::string(f[2]) + "' not a number in [1, 5]");
    if (!seen.emplace(row.customer_id, row.product_id).second)
      throw UserError(at + "duplicate pair (" + row.customer_id + ", " + row.product_id + ")");
    file.rows.push_back(std::move(row));
  }
  return file;
}

SentimentRatingsFile score_dataset(const RatingsDataset& data, const Lexicon& lexicon,
                                   std::string_view scorer) {
  SentimentRatingsFile file;
  for (const auto& e : data.cells()) {
    if (e.cell.provenance != Provenance::Dropped) continue;
    file.rows.push_back({data.user_id(e.user), data.item_id(e.item),
                         quantize_rating(score_text(e.cell.review_text, lexicon)),
                         std::string(scorer)});
  }
  return file;
}

}  // namespace senticf
