#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace scca;

TEST(Population, NullModelHasNoCrossCovariance) {
  const Population pop = build_population({ModelKind::kNull, 12, 9, 0.0, 100});
  EXPECT_EQ(pop.sigma_xy.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(pop.tau_full, 0.0);
  EXPECT_EQ(population_tau_max(pop, 3, 3).tau_max, 0.0);
}

TEST(Population, BandedCovarianceStructure) {
  const Eigen::MatrixXd s = banded_covariance(110);
  EXPECT_TRUE((s.diagonal().array() == 1.0).all());
  EXPECT_DOUBLE_EQ(s(3, 5), 0.25);
  EXPECT_DOUBLE_EQ(s(99, 98), 0.5);
  EXPECT_EQ(s(100, 99), 0.0);
  EXPECT_EQ(s(105, 104), 0.0);
  EXPECT_EQ(s, s.transpose());
}

TEST(Population, SingleFactorModelHasRequestedStrength) {
  for (double tau : {0.3, 0.4, 0.8}) {
    const Population pop = build_population({ModelKind::kA1, 10, 10, tau, 500});
    EXPECT_NEAR(pop.tau_full, tau, 1e-12);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(pop.lambda);
    EXPECT_NEAR(svd.singularValues()(0), tau, 1e-12);
    EXPECT_NEAR(svd.singularValues()(1), 0.0, 1e-12);
    const PopulationTarget t = population_tau_max(pop, 3, 3);
    EXPECT_NEAR(t.tau_max, tau, 1e-12);
    EXPECT_TRUE(t.exact);
  }
}

TEST(Population, ThreeFactorModelCorrelations) {
  const Population pop = build_population({ModelKind::kA2, 10, 10, 0.4, 500});
  ASSERT_EQ(pop.rho.size(), 3);
  EXPECT_NEAR(pop.rho.squaredNorm(), 0.16, 1e-15);
  EXPECT_NEAR(pop.rho(2) / pop.rho(0), 3.0, 1e-14);
}

TEST(Population, SubsetTargetMatchesBruteForce) {
  const Population pop = build_population({ModelKind::kA1, 6, 5, 0.6, 500});
  const PopulationTarget t = population_tau_max(pop, 1, 2);
  double best = 0.0;
  for (Eigen::Index k = 0; k < 6; ++k)
    for (Eigen::Index a = 0; a < 5; ++a)
      for (Eigen::Index b = a + 1; b < 5; ++b) {
        const std::vector<Eigen::Index> ks{k}, js{a, b};
        const Eigen::MatrixXd sx = submatrix(pop.sigma_x, ks, ks);
        const Eigen::MatrixXd sy = submatrix(pop.sigma_y, js, js);
        const Eigen::MatrixXd sxy = submatrix(pop.sigma_xy, ks, js);
        best = std::max(best, (sx.inverse() * sxy * sy.inverse() * sxy.transpose()).trace());
      }
  EXPECT_NEAR(t.tau_max, std::sqrt(best), 1e-12);
  EXPECT_LE(t.tau_max, pop.tau_full + 1e-12);
}

TEST(Population, RejectsInvalidDesigns) {
  auto kind = [](const ModelSpec& s) {
    try {
      build_population(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInternal;
  };
  EXPECT_EQ(kind({ModelKind::kNull, 1500, 600, 0.0, 100}), ErrorKind::kValidation);
  EXPECT_EQ(kind({ModelKind::kA1, 2, 10, 0.4, 100}), ErrorKind::kValidation);
  EXPECT_EQ(kind({ModelKind::kA1, 10, 10, -0.1, 100}), ErrorKind::kValidation);
  EXPECT_EQ(kind({ModelKind::kA1, 10, 10, 1.5, 100}), ErrorKind::kNumerical);
  EXPECT_EQ(kind({ModelKind::kA2, 10, 10, 2.0, 100}), ErrorKind::kNumerical);
  EXPECT_EQ(parse_model("A2"), ModelKind::kA2);
  EXPECT_THROW(parse_model("B"), Error);
}

TEST(Sampling, SeedDeterminism) {
  const Population pop = build_population({ModelKind::kA2, 8, 7, 0.5, 50});
  EXPECT_TRUE(sample(pop, 50, 9) == sample(pop, 50, 9));
  EXPECT_FALSE(sample(pop, 50, 9) == sample(pop, 50, 10));
}

TEST(Sampling, EmpiricalCovarianceConverges) {
  const Population pop = build_population({ModelKind::kA1, 5, 5, 0.7, 100000});
  const PairedDataset d = sample(pop, 100000, 1);
  Eigen::MatrixXd z(d.n(), 10);
  z << d.x(), d.y();
  const Eigen::MatrixXd zc = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd emp = zc.transpose() * zc / static_cast<double>(d.n());
  Eigen::MatrixXd joint(10, 10);
  joint << pop.sigma_x, pop.sigma_xy, pop.sigma_xy.transpose(), pop.sigma_y;
  EXPECT_LT((emp - joint).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Harness, CellIsReproducibleAndThreadInvariant) {
  StreamConfig c;
  c.reorderings = 1;
  c.shuffle = false;
  const ModelSpec spec{ModelKind::kA1, 10, 10, 0.4, 200};
  const CellSummary a = run_cell(spec, 2, 12, c, 5, 1);
  const CellSummary b = run_cell(spec, 2, 12, c, 5, 3);
  ASSERT_EQ(a.reps.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(a.reps[i].tau_hat, b.reps[i].tau_hat);
    EXPECT_EQ(a.reps[i].seed, derive_seed(5, i, 2));
  }
  EXPECT_EQ(a.reject_rate, b.reject_rate);
  EXPECT_EQ(a.failures, 0);
  EXPECT_EQ(a.truth, population_tau_max(build_population(spec), 2, 2).tau_max);
  EXPECT_LT(a.truth, 0.4);
  EXPECT_LE(a.q05, a.median);
  EXPECT_LE(a.median, a.q95);
}

TEST(Harness, SummaryStatisticsMatchReplications) {
  StreamConfig c;
  c.reorderings = 1;
  c.shuffle = false;
  const CellSummary cell = run_cell({ModelKind::kNull, 6, 6, 0.0, 120}, 1, 15, c, 8);
  double sum = 0, rej = 0;
  std::vector<double> v;
  for (const auto& r : cell.reps) {
    ASSERT_TRUE(r.ok) << r.error;
    sum += r.tau_hat;
    rej += r.reject;
    v.push_back(r.tau_hat);
    EXPECT_EQ(r.covered, r.ci_lo <= 0.0 && 0.0 <= r.ci_hi);
  }
  EXPECT_NEAR(cell.mean_tau_hat, sum / 15, 1e-14);
  EXPECT_NEAR(cell.reject_rate, rej / 15, 1e-14);
  double ss = 0;
  for (double x : v) ss += (x - sum / 15) * (x - sum / 15);
  EXPECT_NEAR(cell.sd_tau_hat, std::sqrt(ss / 14), 1e-12);
  std::sort(v.begin(), v.end());
  EXPECT_NEAR(cell.median, v[7], 1e-15);
}

TEST(Harness, HistogramStudyProducesBothTargets) {
  StreamConfig c;
  c.reorderings = 1;
  c.shuffle = false;
  const auto cells =
      histogram_study({{ModelKind::kA1, 8, 8, 0.5, 150}, {ModelKind::kNull, 8, 8, 0.0, 150}}, 2,
                      10, c, 3, 5);
  ASSERT_EQ(cells.size(), 2u);
  for (const auto& h : cells) {
    EXPECT_EQ(h.root_estimates.size() + static_cast<std::size_t>(h.failures), 10u);
    EXPECT_EQ(h.square_estimates.size(), h.root_estimates.size());
    Eigen::Index total = 0;
    for (auto n : h.root_hist.counts) total += n;
    EXPECT_EQ(total, static_cast<Eigen::Index>(h.root_estimates.size()));
    EXPECT_EQ(h.square_hist.counts.size(), 5u);
  }
}

TEST(Harness, MakeHistogramEdges) {
  const Histogram h = make_histogram({0.0, 0.5, 1.0, 1.0}, 2);
  EXPECT_EQ(h.counts, (std::vector<Eigen::Index>{1, 3}));
  const Histogram flat = make_histogram({2.0, 2.0}, 3);
  EXPECT_EQ(flat.counts[0], 2);
}

TEST(LatentFactor, ShapeAndDeterminism) {
  const PairedDataset a = latent_factor_sample(30, 12, 9, 2, 0.3, 4);
  EXPECT_EQ(a.n(), 30);
  EXPECT_EQ(a.p(), 12);
  EXPECT_EQ(a.q(), 9);
  EXPECT_TRUE(a == latent_factor_sample(30, 12, 9, 2, 0.3, 4));
}
