#include "senticf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "senticf/dataset.hpp"

namespace senticf {

namespace {

void check_k(int k) {
  if (k < 1) throw UserError("K must be at least 1");
}

const RankedList& list_for(const RankedRecommendations& recs, std::size_t user) {
  static const RankedList empty;
  return user < recs.size() ? recs[user] : empty;
}

double discount(std::size_t position) { return 1.0 / std::log2(static_cast<double>(position) + 1.0); }

// Averages per_user(list, relevant) over users with a non-empty ground truth,
// summing in user order.
template <typename PerUser>
double average_over_users(const RankedRecommendations& recs, const GroundTruth& truth,
                          PerUser&& per_user) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t u = 0; u < truth.size(); ++u) {
    if (truth[u].empty()) continue;
    sum += per_user(list_for(recs, u), std::span<const Index>(truth[u]));
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

}  // namespace

GroundTruth ground_truth(const RatingsDataset& validation) {
  GroundTruth truth(static_cast<std::size_t>(validation.num_users()));
  for (const auto& e : validation.cells())
    if (e.cell.usable()) truth[e.user].push_back(e.item);  // cells arrive sorted by item
  return truth;
}

int relevance(std::span<const Index> relevant, Index item) {
  return std::binary_search(relevant.begin(), relevant.end(), item) ? 1 : 0;
}

double idcg(std::size_t num_relevant, int k) {
  check_k(k);
  const auto n = std::min(num_relevant, static_cast<std::size_t>(k));
  double sum = 0.0;
  for (std::size_t j = 1; j <= n; ++j) sum += discount(j);
  return sum;
}

double precision_at_k(const RankedRecommendations& recs, const GroundTruth& truth, int k) {
  check_k(k);
  return average_over_users(recs, truth, [k](const RankedList& list, std::span<const Index> d) {
    const auto n = std::min(list.size(), static_cast<std::size_t>(k));
    int hits = 0;
    for (std::size_t j = 0; j < n; ++j) hits += relevance(d, list[j].item);
    return static_cast<double>(hits) / k;
  });
}

double mean_average_precision(const RankedRecommendations& recs, const GroundTruth& truth,
                              MapVariant variant) {
  return average_over_users(recs, truth, [variant](const RankedList& list, std::span<const Index> d) {
    double sum = 0.0;
    int hits = 0;
    for (std::size_t j = 1; j <= list.size(); ++j) {
      const int rel = relevance(d, list[j - 1].item);
      hits += rel;
      const double gain = variant == MapVariant::Literal ? rel : rel * hits;
      sum += gain / static_cast<double>(j);
    }
    return sum / static_cast<double>(d.size());
  });
}

double ndcg_at_k(const RankedRecommendations& recs, const GroundTruth& truth, int k) {
  check_k(k);
  return average_over_users(recs, truth, [k](const RankedList& list, std::span<const Index> d) {
    const auto n = std::min(std::max(list.size(), d.size()), static_cast<std::size_t>(k));
    const auto reachable = std::min(n, list.size());
    double dcg = 0.0;
    for (std::size_t j = 1; j <= reachable; ++j) dcg += relevance(d, list[j - 1].item) * discount(j);
    return dcg / idcg(d.size(), k);
  });
}

MetricTriple evaluate(const RankedRecommendations& recs, const GroundTruth& truth, int k) {
  return {mean_average_precision(recs, truth), ndcg_at_k(recs, truth, k),
          precision_at_k(recs, truth, k), k};
}

double avg_improvement(const MetricTriple& enhanced, const MetricTriple& baseline) {
  if (!(baseline.map > 0.0 && baseline.ndcg_at_k > 0.0 && baseline.p_at_k > 0.0))
    throw UserError("baseline metrics must all be positive to compute an improvement");
  const double gain = (enhanced.map - baseline.map) / baseline.map +
                      (enhanced.ndcg_at_k - baseline.ndcg_at_k) / baseline.ndcg_at_k +
                      (enhanced.p_at_k - baseline.p_at_k) / baseline.p_at_k;
  return 100.0 * gain / 3.0;
}

}  // namespace senticf
