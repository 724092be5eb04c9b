#pragma once

#include <span>
#include <vector>

#include "senticf/common.hpp"

namespace senticf {

class RatingsDataset;

struct ScoredItem {
  Index item = 0;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

/// Per user (indexed by user), the recommended items in rank order.
using RankedList = std::vector<ScoredItem>;
using RankedRecommendations = std::vector<RankedList>;

/// Per user, the sorted set of relevant item indices. Users with an empty
/// set are left out of every average.
using GroundTruth = std::vector<std::vector<Index>>;

/// Ground truth from a held-out dataset: every cell with a rating counts as
/// relevant to its user.
GroundTruth ground_truth(const RatingsDataset& validation);

struct MetricTriple {
  double map = 0.0;
  double ndcg_at_k = 0.0;
  double p_at_k = 0.0;
  int k = 30;

  bool operator==(const MetricTriple&) const = default;
};

inline constexpr int kDefaultK = 30;

/// 1 if `item` is in the sorted set `relevant`, else 0.
int relevance(std::span<const Index> relevant, Index item);

/// sum_{j=1}^{min(|D|, K)} 1 / log2(j + 1)
double idcg(std::size_t num_relevant, int k);
inline double idcg(std::span<const Index> relevant, int k) { return idcg(relevant.size(), k); }

/// (1/M) sum_i (1/K) sum_{j <= min(Q_i, K)} rel(R_i(j))
double precision_at_k(const RankedRecommendations& recs, const GroundTruth& truth, int k);

enum class MapVariant {
  /// (1/N_i) sum_j rel(R_i(j)) / j over the whole list, as printed. A
  /// perfect ranking of two relevant items scores 0.75, not 1.
  Literal,
  /// Textbook average precision: (1/N_i) sum_j rel(R_i(j)) * hits(j) / j.
  CumulativeHits,
};

double mean_average_precision(const RankedRecommendations& recs, const GroundTruth& truth,
                              MapVariant variant = MapVariant::Literal);

/// (1/M) sum_i DCG_i / IDCG(D_i, K) with DCG_i summed over positions
/// j <= min(max(Q_i, N_i), K); positions past Q_i contribute nothing.
double ndcg_at_k(const RankedRecommendations& recs, const GroundTruth& truth, int k);

MetricTriple evaluate(const RankedRecommendations& recs, const GroundTruth& truth,
                      int k = kDefaultK);

/// Mean over (MAP, NDCG@K, P@K) of 100 * (enhanced - baseline) / baseline.
/// Throws UserError if any baseline metric is not positive.
double avg_improvement(const MetricTriple& enhanced, const MetricTriple& baseline);

}  // namespace senticf
