#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "senticf/common.hpp"
#include "senticf/dataset.hpp"
#include "senticf/metrics.hpp"
#include "senticf/random.hpp"

namespace senticf::als {

struct AlsConfig {
  Index rank = 10;
  double reg_lambda = 0.1;
  int iterations = 15;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  /// Worker threads per half-sweep. Results do not depend on it.
  int threads = 1;

  /// Throws UserError if any bound is violated.
  void validate() const;

  bool operator==(const AlsConfig&) const = default;
};

template <typename Scalar>
using RatingMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

template <typename Scalar>
using FactorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar = double>
struct FactorModel {
  FactorMatrix<Scalar> user_factors;  // num_users x rank
  FactorMatrix<Scalar> item_factors;  // num_items x rank
  AlsConfig config;

  Index num_users() const { return static_cast<Index>(user_factors.rows()); }
  Index num_items() const { return static_cast<Index>(item_factors.rows()); }
  Index rank() const { return static_cast<Index>(user_factors.cols()); }
};

/// Users x items matrix of the usable (TRUE or IMPUTED) ratings.
template <typename Scalar = double>
RatingMatrix<Scalar> rating_matrix(const RatingsDataset& data) {
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(data.count_usable());
  for (const auto& e : data.cells())
    if (e.cell.usable()) triplets.emplace_back(e.user, e.item, static_cast<Scalar>(*e.cell.rating));
  RatingMatrix<Scalar> m(data.num_users(), data.num_items());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

namespace detail {

/// Runs fn(begin, end) over contiguous chunks of [0, n).
template <typename Fn>
void parallel_rows(Index n, int threads, Fn&& fn) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
  if (workers == 1) {
    fn(Index{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const Index chunk = (n + workers - 1) / workers;
    for (Index w = 0; w < workers; ++w) {
      const Index begin = std::min(n, w * chunk);
      const Index end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename Scalar>
void write_scalar(std::ostream& out, Scalar v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

}  // namespace detail

/// Solves every row of `solved` against the fixed factors:
///   x_i = (sum_{j in row i} f_j f_j^T + lambda I)^{-1} sum_{j in row i} r_ij f_j
/// where f_j is row j of `fixed`. A row with no observations becomes zero.
template <typename Scalar>
void half_sweep(const RatingMatrix<Scalar>& ratings, const FactorMatrix<Scalar>& fixed,
                FactorMatrix<Scalar>& solved, Scalar lambda, int threads = 1) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index rank = static_cast<Index>(fixed.cols());
  solved.resize(ratings.rows(), rank);
  detail::parallel_rows(static_cast<Index>(ratings.rows()), threads, [&](Index begin, Index end) {
    Dense gram(rank, rank);
    Vector rhs(rank);
    Eigen::LLT<Dense> llt(rank);
    for (Index row = begin; row < end; ++row) {
      gram.setZero();
      gram.diagonal().setConstant(lambda);
      rhs.setZero();
      for (typename RatingMatrix<Scalar>::InnerIterator it(ratings, row); it; ++it) {
        const auto f = fixed.row(it.col()).transpose();
        gram.template selfadjointView<Eigen::Lower>().rankUpdate(f);
        rhs.noalias() += it.value() * f;
      }
      llt.compute(gram);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("singular normal equations at row " + std::to_string(row));
      solved.row(row) = llt.solve(rhs).transpose();
    }
  });
}

/// sum over observed (i, j) of (r_ij - u_i . v_j)^2 + lambda (|U|_F^2 + |V|_F^2)
template <typename Scalar>
double objective(const FactorModel<Scalar>& model, const RatingMatrix<Scalar>& ratings) {
  double loss = 0.0;
  for (Index row = 0; row < ratings.outerSize(); ++row)
    for (typename RatingMatrix<Scalar>::InnerIterator it(ratings, row); it; ++it) {
      const double err = static_cast<double>(it.value()) -
                         static_cast<double>(model.user_factors.row(row).dot(model.item_factors.row(it.col())));
      loss += err * err;
    }
  const double penalty = static_cast<double>(model.user_factors.squaredNorm()) +
                         static_cast<double>(model.item_factors.squaredNorm());
  return loss + model.config.reg_lambda * penalty;
}

/// Root mean squared error of the model over the observed cells.
template <typename Scalar>
double rmse(const FactorModel<Scalar>& model, const RatingMatrix<Scalar>& ratings) {
  if (ratings.nonZeros() == 0) return 0.0;
  double sum = 0.0;
  for (Index row = 0; row < ratings.outerSize(); ++row)
    for (typename RatingMatrix<Scalar>::InnerIterator it(ratings, row); it; ++it) {
      const double err = static_cast<double>(it.value()) -
                         static_cast<double>(model.user_factors.row(row).dot(model.item_factors.row(it.col())));
      sum += err * err;
    }
  return std::sqrt(sum / static_cast<double>(ratings.nonZeros()));
}

struct TrainingTrace {
  /// Objective after initialization, then after every half-sweep.
  std::vector<double> objective;
  /// Observed-cell RMSE after every full iteration.
  std::vector<double> rmse;
};

template <typename Scalar>
FactorMatrix<Scalar> random_factors(Rng& rng, Index rows, Index rank, double scale) {
  FactorMatrix<Scalar> m(rows, rank);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < rank; ++c) m(r, c) = static_cast<Scalar>(rng.uniform(-scale, scale));
  return m;
}

/// Alternating least squares on the observed entries of `ratings`: user rows
/// are solved against fixed item factors, then item rows against the new
/// user factors, `config.iterations` times.
template <typename Scalar>
FactorModel<Scalar> train(const RatingMatrix<Scalar>& ratings, const AlsConfig& config,
                          TrainingTrace* trace = nullptr) {
  config.validate();
  if (ratings.nonZeros() == 0) throw UserError("no usable ratings to train on");

  FactorModel<Scalar> model;
  model.config = config;
  Rng rng(config.seed);
  const auto users = static_cast<Index>(ratings.rows());
  const auto items = static_cast<Index>(ratings.cols());
  model.user_factors = random_factors<Scalar>(rng, users, config.rank, config.init_scale);
  model.item_factors = random_factors<Scalar>(rng, items, config.rank, config.init_scale);

  const RatingMatrix<Scalar> by_item = ratings.transpose();
  const auto lambda = static_cast<Scalar>(config.reg_lambda);
  if (trace) trace->objective.push_back(objective(model, ratings));
  for (int iter = 0; iter < config.iterations; ++iter) {
    half_sweep(ratings, model.item_factors, model.user_factors, lambda, config.threads);
    if (trace) trace->objective.push_back(objective(model, ratings));
    half_sweep(by_item, model.user_factors, model.item_factors, lambda, config.threads);
    if (trace) {
      trace->objective.push_back(objective(model, ratings));
      trace->rmse.push_back(rmse(model, ratings));
    }
    if (!model.user_factors.allFinite() || !model.item_factors.allFinite())
      throw std::runtime_error("non-finite factors after iteration " + std::to_string(iter + 1));
  }
  return model;
}

/// Trains on the usable cells of `data`; DROPPED cells are ignored.
FactorModel<double> train(const RatingsDataset& data, const AlsConfig& config,
                          TrainingTrace* trace = nullptr);

/// Inner product of the user and item rows; no clipping.
template <typename Scalar>
Scalar predict(const FactorModel<Scalar>& model, Index user, Index item) {
  if (user < 0 || user >= model.num_users())
    throw std::out_of_range("user index " + std::to_string(user) + " out of range");
  if (item < 0 || item >= model.num_items())
    throw std::out_of_range("item index " + std::to_string(item) + " out of range");
  return model.user_factors.row(user).dot(model.item_factors.row(item));
}

/// Full users x items score matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> score_matrix(const FactorModel<Scalar>& model) {
  return model.user_factors * model.item_factors.transpose();
}

/// Top-k unseen items per user: items the user has a usable rating for in
/// `data` are excluded, the rest sorted by descending score with ties going
/// to the lower item index.
template <typename Scalar>
RankedRecommendations recommend_top_k(const FactorModel<Scalar>& model, const RatingsDataset& data,
                                      int k) {
  if (k < 1) throw UserError("k must be at least 1");
  if (data.num_users() != model.num_users() || data.num_items() != model.num_items())
    throw UserError("dataset shape does not match the model");

  const Index users = model.num_users();
  const Index items = model.num_items();
  std::vector<std::vector<Index>> seen(users);
  for (const auto& e : data.cells())
    if (e.cell.usable()) seen[e.user].push_back(e.item);  // cells are sorted by item

  RankedRecommendations out(users);
  detail::parallel_rows(users, model.config.threads, [&](Index begin, Index end) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scores(items);
    for (Index u = begin; u < end; ++u) {
      scores.noalias() = model.item_factors * model.user_factors.row(u).transpose();
      RankedList candidates;
      candidates.reserve(items);
      auto next_seen = seen[u].begin();
      for (Index i = 0; i < items; ++i) {
        if (next_seen != seen[u].end() && *next_seen == i) {
          ++next_seen;
          continue;
        }
        candidates.push_back({i, static_cast<double>(scores(i))});
      }
      const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
      std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                        [](const ScoredItem& a, const ScoredItem& b) {
                          return a.score != b.score ? a.score > b.score : a.item < b.item;
                        });
      candidates.resize(keep);
      out[u] = std::move(candidates);
    }
  });
  return out;
}

// Text dump:
//   als-factor-model 1
//   rank <r> reg_lambda <l> iterations <n> seed <s> init_scale <c>
//   user_factors <rows> <cols>
//   <row values separated by spaces, one row per line>
//   item_factors <rows> <cols>
//   ...
// Values use shortest round-trip formatting, so load(save(m)) == m exactly.
template <typename Scalar>
void save_model(std::ostream& out, const FactorModel<Scalar>& model) {
  const auto& c = model.config;
  out << "als-factor-model 1\n";
  out << "rank " << c.rank << " reg_lambda ";
  detail::write_scalar(out, c.reg_lambda);
  out << " iterations " << c.iterations << " seed " << c.seed << " init_scale ";
  detail::write_scalar(out, c.init_scale);
  out << '\n';
  auto dump = [&out](const char* tag, const FactorMatrix<Scalar>& m) {
    out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index col = 0; col < m.cols(); ++col) {
        if (col) out << ' ';
        detail::write_scalar(out, m(r, col));
      }
      out << '\n';
    }
  };
  dump("user_factors", model.user_factors);
  dump("item_factors", model.item_factors);
}

template <typename Scalar = double>
FactorModel<Scalar> load_model(std::istream& in) {
  auto expect = [&in](const char* word) {
    std::string token;
    if (!(in >> token) || token != word)
      throw UserError(std::string("model file: expected '") + word + "'");
  };
  auto read_value = [&in]<typename T>(T& v) {
    std::string token;
    if (!(in >> token)) throw UserError("model file: truncated");
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size())
      throw UserError("model file: bad number '" + token + "'");
  };
  FactorModel<Scalar> model;
  auto& c = model.config;
  int version = 0;
  expect("als-factor-model");
  read_value(version);
  if (version != 1) throw UserError("model file: unsupported version");
  expect("rank");
  read_value(c.rank);
  expect("reg_lambda");
  read_value(c.reg_lambda);
  expect("iterations");
  read_value(c.iterations);
  expect("seed");
  read_value(c.seed);
  expect("init_scale");
  read_value(c.init_scale);
  auto load = [&](const char* tag, FactorMatrix<Scalar>& m) {
    expect(tag);
    Eigen::Index rows = 0, cols = 0;
    read_value(rows);
    read_value(cols);
    if (rows < 0 || cols != c.rank) throw UserError(std::string("model file: bad shape for ") + tag);
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index col = 0; col < cols; ++col) read_value(m(r, col));
  };
  load("user_factors", model.user_factors);
  load("item_factors", model.item_factors);
  return model;
}

}  // namespace senticf::als
