#include "senticf/als.hpp"

namespace senticf::als {

void AlsConfig::validate() const {
  if (rank < 1) throw UserError("als rank must be at least 1");
  if (!(reg_lambda > 0.0)) throw UserError("als reg_lambda must be positive");
  if (iterations < 1) throw UserError("als iterations must be at least 1");
  if (!(init_scale > 0.0)) throw UserError("als init_scale must be positive");
  if (threads < 1) throw UserError("als threads must be at least 1");
}

FactorModel<double> train(const RatingsDataset& data, const AlsConfig& config, TrainingTrace* trace) {
  return train(rating_matrix<double>(data), config, trace);
}

template FactorModel<double> train(const RatingMatrix<double>&, const AlsConfig&, TrainingTrace*);
template FactorModel<float> train(const RatingMatrix<float>&, const AlsConfig&, TrainingTrace*);

}  // namespace senticf::als
