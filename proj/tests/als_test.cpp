#include "senticf/als.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "senticf/synth.hpp"
#include "test_support.hpp"

using namespace senticf;
using testing_support::make_dataset;

namespace {

als::FactorModel<double> model_from(std::initializer_list<std::initializer_list<double>> users,
                                    std::initializer_list<std::initializer_list<double>> items) {
  auto fill = [](auto rows) {
    const auto cols = rows.begin()->size();
    als::FactorMatrix<double> m(rows.size(), cols);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
      Eigen::Index c = 0;
      for (double v : row) m(r, c++) = v;
      ++r;
    }
    return m;
  };
  als::FactorModel<double> m;
  m.user_factors = fill(users);
  m.item_factors = fill(items);
  m.config.rank = static_cast<Index>(m.user_factors.cols());
  return m;
}

}  // namespace

TEST(AlsConfig, Validation) {
  als::AlsConfig c;
  EXPECT_NO_THROW(c.validate());
  c.reg_lambda = 0.0;
  EXPECT_THROW(c.validate(), UserError);
  c = {};
  c.rank = 0;
  EXPECT_THROW(c.validate(), UserError);
  c = {};
  c.iterations = 0;
  EXPECT_THROW(c.validate(), UserError);
}

TEST(Predict, InnerProduct) {
  const auto m = model_from({{1, 2}}, {{3, 4}});
  EXPECT_DOUBLE_EQ(als::predict(m, 0, 0), 11.0);
  EXPECT_THROW(als::predict(m, 1, 0), std::out_of_range);
  EXPECT_THROW(als::predict(m, 0, -1), std::out_of_range);
}

TEST(Predict, ZeroUserRow) {
  const auto m = model_from({{0, 0}}, {{3, 4}, {-1, 7}, {2, 2}});
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(als::predict(m, 0, i), 0.0);
}

TEST(Predict, MatchesBruteForceProduct) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  als::FactorModel<double> m;
  m.user_factors.resize(5, 3);
  m.item_factors.resize(5, 3);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 3; ++c) m.user_factors(r, c) = u(gen), m.item_factors(r, c) = u(gen);
  const auto scores = als::score_matrix(m);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double direct = 0;
      for (int c = 0; c < 3; ++c) direct += m.user_factors(i, c) * m.item_factors(j, c);
      EXPECT_NEAR(als::predict(m, i, j), direct, 1e-15);
      EXPECT_NEAR(scores(i, j), direct, 1e-15);
    }
}

TEST(HalfSweep, RowsAreExactRidgeMinimizers) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-2, 2), rating(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int rank = 1 + gen() % 3;
    const double lambda = 0.01 + (gen() % 100) / 50.0;
    std::vector<Eigen::Triplet<double, Index>> t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (gen() % 3) t.emplace_back(i, j, rating(gen));
    als::RatingMatrix<double> r(3, 3);
    r.setFromTriplets(t.begin(), t.end());
    als::FactorMatrix<double> fixed(3, rank);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < rank; ++c) fixed(i, c) = u(gen);
    als::FactorMatrix<double> solved;
    als::half_sweep(r, fixed, solved, lambda);

    const Eigen::MatrixXd dense = Eigen::MatrixXd(r);
    for (int i = 0; i < 3; ++i) {
      std::vector<int> obs;
      for (int j = 0; j < 3; ++j)
        if (r.coeff(i, j) != 0.0) obs.push_back(j);
      Eigen::MatrixXd a(obs.size(), rank);
      Eigen::VectorXd y(obs.size());
      for (std::size_t n = 0; n < obs.size(); ++n) a.row(n) = fixed.row(obs[n]), y(n) = dense(i, obs[n]);
      const Eigen::MatrixXd normal = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(rank, rank);
      const Eigen::VectorXd x = normal.fullPivLu().solve(a.transpose() * y);
      for (int c = 0; c < rank; ++c) EXPECT_NEAR(solved(i, c), x(c), 1e-10);
    }
  }
}

TEST(Train, SingleCellFitsItsRating) {
  const auto d = make_dataset(1, 1, {{0, 0, 4.0}});
  als::AlsConfig c;
  c.rank = 1;
  c.reg_lambda = 1e-6;
  c.iterations = 30;
  c.seed = 3;
  const auto m = als::train(d, c);
  EXPECT_NEAR(als::predict(m, 0, 0), 4.0, 1e-3);
}

TEST(Train, DeterministicAndIndependentOfThreads) {
  const auto d = synth_lowrank(60, 45, 3, 0.3, 0.4, 2);
  als::AlsConfig c;
  c.rank = 4;
  c.seed = 9;
  const auto a = als::train(d, c);
  const auto b = als::train(d, c);
  EXPECT_TRUE(a.user_factors == b.user_factors);
  EXPECT_TRUE(a.item_factors == b.item_factors);
  for (int threads : {2, 3, 8}) {
    c.threads = threads;
    const auto p = als::train(d, c);
    EXPECT_TRUE(p.user_factors == a.user_factors) << threads;
    EXPECT_TRUE(p.item_factors == a.item_factors) << threads;
  }
}

TEST(Train, IgnoresDroppedCells) {
  const auto full = synth_lowrank(20, 15, 2, 0.0, 0.6, 4);
  const auto sparse = sparsify(full, 0.4, 1);
  std::vector<CellEntry> kept;
  for (const auto& e : sparse.cells())
    if (e.cell.usable()) kept.push_back(e);
  const RatingsDataset only_true("T", sparse.user_ids(), sparse.item_ids(), kept);
  als::AlsConfig c;
  c.rank = 2;
  const auto a = als::train(sparse, c), b = als::train(only_true, c);
  EXPECT_TRUE(a.user_factors == b.user_factors);
}

TEST(Train, ObjectiveNonIncreasingAndFinite) {
  const auto d = synth_lowrank(40, 30, 3, 0.5, 0.3, 8);
  als::AlsConfig c;
  c.rank = 5;
  c.iterations = 25;
  als::TrainingTrace trace;
  const auto m = als::train(d, c, &trace);
  ASSERT_EQ(trace.objective.size(), 51u);
  for (std::size_t i = 1; i < trace.objective.size(); ++i)
    EXPECT_LE(trace.objective[i], trace.objective[i - 1] * (1 + 1e-9));
  EXPECT_TRUE(m.user_factors.allFinite());
  EXPECT_LT(trace.rmse.back(), 0.6);
}

TEST(Train, NoUsableRatingsIsError) {
  const auto d = sparsify(make_dataset(1, 1, {{0, 0, 4.0}}), 0.9, 1);
  EXPECT_THROW(als::train(d, als::AlsConfig{}), UserError);
}

TEST(Train, FloatScalarRuns) {
  const auto d = synth_lowrank(20, 20, 2, 0.0, 1.0, 1);
  als::AlsConfig c;
  c.rank = 2;
  c.reg_lambda = 0.01;
  const auto m = als::train(als::rating_matrix<float>(d), c);
  EXPECT_LT(als::rmse(m, als::rating_matrix<float>(d)), 0.5);
}

TEST(RecommendTopK, ExcludesTrainingItems) {
  const auto d = make_dataset(1, 3, {{0, 0, 5.0}});
  const auto m = model_from({{1.0}}, {{10.0}, {2.0}, {3.0}});
  const auto recs = als::recommend_top_k(m, d, 3);
  ASSERT_EQ(recs[0].size(), 2u);
  EXPECT_EQ(recs[0][0].item, 2);
  EXPECT_EQ(recs[0][1].item, 1);
}

TEST(RecommendTopK, DroppedCellsStayCandidates) {
  const auto d = sparsify(make_dataset(1, 3, {{0, 0, 5.0}, {0, 1, 4.0}}), 0.5, 0);
  const auto m = model_from({{1.0}}, {{1.0}, {1.0}, {1.0}});
  EXPECT_EQ(als::recommend_top_k(m, d, 3)[0].size(), 2u);
}

TEST(RecommendTopK, TiesByLowerIndex) {
  const auto d = make_dataset(1, 4, {});
  const auto m = model_from({{1.0}}, {{1.0}, {2.0}, {2.0}, {2.0}});
  const auto recs = als::recommend_top_k(m, d, 2);
  ASSERT_EQ(recs[0].size(), 2u);
  EXPECT_EQ(recs[0][0].item, 1);
  EXPECT_EQ(recs[0][1].item, 2);
}

TEST(RecommendTopK, TruncatesToCatalog) {
  const auto d = make_dataset(1, 4, {{0, 1, 3.0}});
  const auto m = model_from({{1.0}}, {{1.0}, {2.0}, {3.0}, {4.0}});
  EXPECT_EQ(als::recommend_top_k(m, d, 30)[0].size(), 3u);
  EXPECT_THROW(als::recommend_top_k(m, d, 0), UserError);
}

TEST(RecommendTopK, NeverRecommendsUsableTrainingCells) {
  const auto d = sparsify(synth_lowrank(30, 25, 2, 0.5, 0.5, 3), 0.4, 2);
  als::AlsConfig c;
  c.rank = 3;
  const auto m = als::train(d, c);
  const auto recs = als::recommend_top_k(m, d, 30);
  for (Index u = 0; u < d.num_users(); ++u) {
    std::set<Index> seen;
    for (std::size_t j = 0; j < recs[u].size(); ++j) {
      const auto& s = recs[u][j];
      const Cell* cell = d.find(u, s.item);
      EXPECT_TRUE(cell == nullptr || !cell->usable());
      EXPECT_TRUE(seen.insert(s.item).second);
      if (j) EXPECT_GE(recs[u][j - 1].score, s.score);
    }
  }
}

TEST(ModelIo, SaveLoadRoundTripIsExact) {
  const auto d = synth_lowrank(15, 10, 2, 0.4, 0.7, 3);
  als::AlsConfig c;
  c.rank = 3;
  c.reg_lambda = 0.07;
  c.seed = 123456789012345ULL;
  const auto m = als::train(d, c);
  std::stringstream ss;
  als::save_model(ss, m);
  const auto back = als::load_model(ss);
  EXPECT_TRUE(back.user_factors == m.user_factors);
  EXPECT_TRUE(back.item_factors == m.item_factors);
  EXPECT_EQ(back.config, m.config);
}

TEST(ModelIo, RejectsGarbage) {
  std::istringstream bad("als-factor-model 2\n");
  EXPECT_THROW(als::load_model(bad), UserError);
  std::istringstream truncated("als-factor-model 1\nrank 1 reg_lambda 0.1 iterations 1 seed 0 init_scale 0.1\n"
                               "user_factors 2 1\n0.5\n");
  EXPECT_THROW(als::load_model(truncated), UserError);
}
