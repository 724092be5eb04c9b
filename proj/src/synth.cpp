#include "senticf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "senticf/lexsent.hpp"
#include "senticf/random.hpp"

namespace senticf {

namespace {

std::string make_id(char prefix, Index index, Index count) {
  const int width = static_cast<int>(std::to_string(std::max<Index>(count - 1, 0)).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, index);
  return buf;
}

// Band 5 reads fully positive, band 1 fully negative; the lexicon score of the
// generated text increases with the band.
std::string review_for(int band, Rng& rng, const std::vector<std::string>& pos,
                       const std::vector<std::string>& neg) {
  static const char* const fillers[] = {"movie", "film", "story", "video", "watch", "plot"};
  auto pick = [&rng](const auto& pool) -> const std::string& { return pool[rng.below(pool.size())]; };
  const std::string filler = fillers[rng.below(std::size(fillers))];
  switch (band) {
    case 5: return pick(pos) + " " + pick(pos) + " " + filler;
    case 4: return pick(pos) + " " + filler + " " + pick(pos) + " but " + pick(neg);
    case 3: return pick(pos) + " " + filler + " but " + pick(neg);
    case 2: return pick(neg) + " " + filler + " " + pick(neg) + " though " + pick(pos);
    default: return pick(neg) + " " + pick(neg) + " " + filler;
  }
}

}  // namespace

SynthResult synth_lowrank(const SynthSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1) throw UserError("synth: dimensions must be positive");
  if (spec.rank < 1 || spec.rank > std::min(spec.num_users, spec.num_items))
    throw UserError("synth: rank must lie in [1, min(users, items)]");
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw UserError("synth: density must lie in (0, 1]");
  if (!(spec.noise_sd >= 0.0)) throw UserError("synth: noise_sd must be non-negative");
  if (!(spec.exposure_bias >= 0.0)) throw UserError("synth: exposure_bias must be non-negative");

  Rng rng(spec.seed);
  const double lo = std::sqrt(1.0 / spec.rank);
  const double hi = std::sqrt(5.0 / spec.rank);
  SynthResult out;
  out.user_factors.resize(spec.num_users, spec.rank);
  out.item_factors.resize(spec.num_items, spec.rank);
  for (Index u = 0; u < spec.num_users; ++u)
    for (Index c = 0; c < spec.rank; ++c) out.user_factors(u, c) = rng.uniform(lo, hi);
  for (Index i = 0; i < spec.num_items; ++i)
    for (Index c = 0; c < spec.rank; ++c) out.item_factors(i, c) = rng.uniform(lo, hi);
  const Eigen::MatrixXd scores = out.scores();

  auto users = std::make_shared<IdInterner>();
  auto items = std::make_shared<IdInterner>();
  for (Index u = 0; u < spec.num_users; ++u) users->intern(make_id('u', u, spec.num_users));
  for (Index i = 0; i < spec.num_items; ++i) items->intern(make_id('p', i, spec.num_items));

  const auto& lex = default_lexicon();
  const std::vector<std::string> pos(lex.positive().begin(), lex.positive().end());
  const std::vector<std::string> neg(lex.negative().begin(), lex.negative().end());

  const auto per_user = std::clamp<Index>(
      static_cast<Index>(std::floor(spec.density * spec.num_items + 0.5)), 1, spec.num_items);
  std::vector<CellEntry> cells;
  cells.reserve(static_cast<std::size_t>(per_user) * spec.num_users);
  std::vector<Index> order(spec.num_items);
  std::vector<double> keys(spec.num_items);
  for (Index u = 0; u < spec.num_users; ++u) {
    std::iota(order.begin(), order.end(), 0);
    if (spec.exposure_bias > 0.0) {
      // Weighted sampling without replacement: keep the largest u^(1/w).
      for (Index i = 0; i < spec.num_items; ++i) {
        double r = rng.uniform01();
        while (r <= 0.0) r = rng.uniform01();
        keys[i] = std::log(r) / std::exp(spec.exposure_bias * (scores(u, i) - 3.0));
      }
      std::partial_sort(order.begin(), order.begin() + per_user, order.end(),
                        [&](Index a, Index b) { return keys[a] != keys[b] ? keys[a] > keys[b] : a < b; });
    } else {
      rng.partial_shuffle(order.begin(), order.end(), static_cast<std::size_t>(per_user));
    }
    for (Index n = 0; n < per_user; ++n) {
      const Index i = order[n];
      double rating = scores(u, i);
      if (spec.noise_sd > 0.0) rating += spec.noise_sd * rng.normal();
      if (spec.quantize) rating = std::round(rating);
      rating = std::clamp(rating, 1.0, 5.0);
      const int band = static_cast<int>(std::clamp(std::round(rating), 1.0, 5.0));
      cells.push_back({u, i, Cell{rating, review_for(band, rng, pos, neg), Provenance::True}});
    }
  }
  out.dataset = RatingsDataset("SYNTH", std::move(users), std::move(items), std::move(cells));
  return out;
}

}  // namespace senticf
