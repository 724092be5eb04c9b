#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "senticf/dataset.hpp"

namespace senticf {

struct SynthSpec {
  Index num_users = 0;
  Index num_items = 0;
  Index rank = 1;
  double noise_sd = 0.0;
  double density = 1.0;  // fraction of items each user rates, in (0, 1]
  std::uint64_t seed = 0;
  /// Round ratings to whole stars. When false (and noise_sd == 0) each
  /// rating equals the generator's inner product exactly.
  bool quantize = true;
  /// 0 picks each user's rated items uniformly. Larger values make users
  /// more likely to rate items they score highly.
  double exposure_bias = 0.0;
};

struct SynthResult {
  RatingsDataset dataset;
  Eigen::MatrixXd user_factors;  // num_users x rank
  Eigen::MatrixXd item_factors;  // num_items x rank

  /// Unclipped generator scores, user_factors * item_factors^T.
  Eigen::MatrixXd scores() const { return user_factors * item_factors.transpose(); }
};

/// Seeded low-rank rating generator. Factor entries are drawn from
/// [sqrt(1/rank), sqrt(5/rank)] so every generator score already lies in
/// [1, 5]; noise is added before rounding and clipping. Review text is
/// synthesized from the default lexicon according to the rating band.
SynthResult synth_lowrank(const SynthSpec& spec);

inline RatingsDataset synth_lowrank(Index num_users, Index num_items, Index rank,
                                    double noise_sd, double density, std::uint64_t seed) {
  return synth_lowrank(SynthSpec{num_users, num_items, rank, noise_sd, density, seed}).dataset;
}

}  // namespace senticf
