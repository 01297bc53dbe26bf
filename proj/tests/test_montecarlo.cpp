#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "ptngarch/montecarlo.hpp"
#include "test_util.hpp"

using namespace ptngarch;
using ptngarch::testing::kStationary;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.ladder = {{100, 6}};
  cfg.true_params = kStationary;
  cfg.m_reps = 6;
  cfg.base_seed = 77;
  cfg.burn_in = 200;
  cfg.fit_opts.r_min = 2;
  cfg.fit_opts.r_max = 4;
  return cfg;
}

}  // namespace

TEST(Experiment, SingleReplicationRmseIsAbsoluteError) {
  auto cfg = small_config();
  cfg.m_reps = 1;
  cfg.threads = 1;
  const auto rep = run_experiment(cfg);
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& row = rep.rows[0];
  ASSERT_EQ(row.successes, 1);
  const Theta truth = cfg.true_params.theta();
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(row.rmse[k], std::abs(row.replications[0].theta[k] - truth[k]));
    EXPECT_TRUE(row.cp[k] == 0.0 || row.cp[k] == 1.0);
  }
  EXPECT_EQ(row.mean_r_hat, static_cast<double>(row.replications[0].r_hat));
}

TEST(Experiment, IndependentOfThreadCount) {
  auto cfg = small_config();
  cfg.threads = 1;
  const auto serial = run_experiment(cfg);
  cfg.threads = 4;
  const auto pooled = run_experiment(cfg);
  const auto& a = serial.rows[0];
  const auto& b = pooled.rows[0];
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.cp, b.cp);
  EXPECT_EQ(a.mean_r_hat, b.mean_r_hat);
  for (std::size_t m = 0; m < a.replications.size(); ++m) {
    EXPECT_EQ(a.replications[m].m, m);
    EXPECT_EQ(a.replications[m].theta, b.replications[m].theta);
  }
}

TEST(Experiment, ReplicationIsAPureFunctionOfItsIndex) {
  auto cfg = small_config();
  cfg.threads = 1;
  const auto report = run_experiment(cfg);
  const Network net = make_network(cfg.network, 6, derive_seed(cfg.base_seed, {0, detail::kNetworkStream}));
  const auto alone = run_replication(cfg, 0, net, 4);
  EXPECT_EQ(alone.theta, report.rows[0].replications[4].theta);
  EXPECT_EQ(alone.r_hat, report.rows[0].replications[4].r_hat);
}

TEST(Experiment, RowsAlignWithLadderAndStayInRange) {
  auto cfg = small_config();
  cfg.ladder = {{80, 5}, {120, 7}};
  cfg.network.kind = NetKind::random;
  cfg.m_reps = 4;
  const auto rep = run_experiment(cfg);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (std::size_t li = 0; li < 2; ++li) {
    EXPECT_EQ(rep.rows[li].point.t_len, cfg.ladder[li].t_len);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_GE(rep.rows[li].rmse[k], 0.0);
      EXPECT_GE(rep.rows[li].cp[k], 0.0);
      EXPECT_LE(rep.rows[li].cp[k], 1.0);
    }
  }
}

TEST(Experiment, TooManyFailuresInvalidateTheRow) {
  std::vector<Replication> reps(10);
  for (std::size_t m = 0; m < 10; ++m) {
    reps[m].m = m;
    reps[m].ok = m >= 2;
  }
  const auto row = summarize({100, 5}, kStationary.theta(), reps);
  EXPECT_EQ(row.failures, 2);
  EXPECT_EQ(row.successes, 8);
  EXPECT_FALSE(row.valid);
  reps[1].ok = true;
  EXPECT_TRUE(summarize({100, 5}, kStationary.theta(), reps).valid);
}

TEST(Experiment, RejectsBadConfig) {
  auto cfg = small_config();
  cfg.m_reps = 0;
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  cfg = small_config();
  cfg.ladder.clear();
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  EXPECT_THROW(parse_net_kind("ring"), ValidationError);
}

TEST(Experiment, RmseShrinksAlongTheLadder) {
  ExperimentConfig cfg;
  cfg.ladder = {{200, 14}, {2000, 44}};
  cfg.true_params = kStationary;
  cfg.m_reps = 20;
  cfg.base_seed = 5;
  cfg.fit_opts.r_min = cfg.fit_opts.r_max = kStationary.r;
  const auto rep = run_experiment(cfg);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_LT(rep.rows[1].rmse[k], rep.rows[0].rmse[k]) << kCoefNames[k];
  }
}

TEST(QQ, NormalQuantilesAreAFixedPoint) {
  const std::size_t m = 50;
  std::vector<Theta> est(m);
  for (std::size_t j = 0; j < m; ++j) {
    est[j].fill(normal_quantile((static_cast<double>(j) + 0.5) / m));
  }
  const auto series = qq_data(est, Theta{}, {}, QQStandardize::none);
  for (const auto& s : series) {
    for (std::size_t j = 0; j < m; ++j) EXPECT_LT(std::abs(s.theoretical[j] - s.empirical[j]), 1e-9);
  }
}

TEST(QQ, TwoSymmetricPoints) {
  const std::vector<Theta> est = {Theta{-1, -1, -1, -1, -1}, Theta{1, 1, 1, 1, 1}};
  const auto series = qq_data(est, Theta{}, {});
  for (const auto& s : series) {
    ASSERT_EQ(s.empirical.size(), 2u);
    EXPECT_DOUBLE_EQ(s.empirical[0], -1.0);
    EXPECT_DOUBLE_EQ(s.empirical[1], 1.0);
    EXPECT_NEAR(s.theoretical[0], -0.6745, 1e-4);
    EXPECT_NEAR(s.theoretical[1], 0.6745, 1e-4);
  }
}

TEST(QQ, ZeroSpreadIsDiagnosed) {
  std::vector<Theta> est(25, Theta{1, 2, 3, 4, 5});
  est[3][kOmega] = 1.5;
  const auto series = qq_data(est, Theta{}, {});
  EXPECT_TRUE(series[kOmega].diagnostic.empty());
  EXPECT_FALSE(series[kBeta].diagnostic.empty());
  EXPECT_TRUE(series[kBeta].empirical.empty());
}

TEST(QQ, ReferenceModeNeedsStandardErrors) {
  std::vector<Theta> est(3, Theta{1, 2, 3, 4, 5});
  EXPECT_THROW(qq_data(est, Theta{}, {}, QQStandardize::reference), ValidationError);
  EXPECT_THROW(qq_data({}, Theta{}, {}), ValidationError);
}

TEST(QQ, KolmogorovDistanceOfExactQuantiles) {
  std::vector<double> z(400);
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = normal_quantile((j + 0.5) / 400.0);
  EXPECT_NEAR(ks_distance_normal(z), 0.5 / 400.0, 1e-12);
}

namespace {

void check_standardized_normality(std::size_t t_len, std::size_t n_nodes, int m_reps, double bound) {
  ExperimentConfig cfg;
  cfg.ladder = {{t_len, n_nodes}};
  cfg.true_params = kStationary;
  cfg.m_reps = m_reps;
  cfg.base_seed = 11;
  cfg.fit_opts.r_min = cfg.fit_opts.r_max = kStationary.r;
  const auto rep = run_experiment(cfg);
  std::vector<Theta> est;
  for (const auto& r : rep.rows[0].replications) {
    if (r.ok) est.push_back(r.theta);
  }
  ASSERT_GE(est.size(), 20u);
  for (const auto& s : qq_data(est, kStationary.theta(), {})) {
    EXPECT_LT(ks_distance_normal(s.empirical), bound) << s.coefficient;
  }
}

}  // namespace

TEST(QQ, StandardizedEstimatesLookNormal) {
  // 1% critical value of the one-sample KS statistic is about 1.63/sqrt(M)
  check_standardized_normality(500, 22, 200, 1.63 / std::sqrt(200.0));
}

TEST(QQ, StandardizedEstimatesLookNormalFullScale) {
  if (std::getenv("PTNGARCH_SLOW_TESTS") == nullptr) GTEST_SKIP() << "set PTNGARCH_SLOW_TESTS=1";
  check_standardized_normality(2000, 44, 500, 0.08);
}
