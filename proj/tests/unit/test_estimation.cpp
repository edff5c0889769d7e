#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/registration.hpp"

using namespace wassbary;

namespace {

TEST(Warp, ZeroAmplitudeIsIdentity) {
  WarpParams p;
  p.amplitude = 0.0;
  std::vector<int> j{2};
  auto w = make_warp(Compactum::unit(1), j, p);
  for (double x : {0.0, 0.2, 0.5, 1.0}) EXPECT_NEAR(w.forward(Vector::Constant(1, x))[0], x, 1e-15);
}

TEST(Warp, IncreasingAndFixesEnds) {
  for (int j : {-3, -1, 1, 2, 3}) {
    std::vector<int> f{j};
    auto w = make_warp(Compactum::unit(1), f, WarpParams{});
    EXPECT_NEAR(w.forward(Vector::Constant(1, 0.0))[0], 0.0, 1e-12);
    EXPECT_NEAR(w.forward(Vector::Constant(1, 1.0))[0], 1.0, 1e-12);
    double prev = -1.0;
    for (int k = 0; k <= 200; ++k) {
      double y = w.forward(Vector::Constant(1, k / 200.0))[0];
      EXPECT_GE(y, prev);
      prev = y;
      EXPECT_NEAR(w.inverse(Vector::Constant(1, y))[0], k / 200.0, 1e-5);
    }
  }
}

TEST(Warp, AmplitudeAboveOneRejected) {
  WarpParams p;
  p.amplitude = 1.5;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Warp, MeanIsIdentity) {
  const int draws = 10000;
  Compactum w = Compactum::unit(1);
  std::vector<double> probes{0.1, 0.25, 0.4, 0.6, 0.9};
  std::vector<double> sum(probes.size()), sumsq(probes.size());
  for (int s = 0; s < draws; ++s) {
    auto wm = sample_warp(w, WarpParams{}, static_cast<std::uint64_t>(s));
    for (std::size_t k = 0; k < probes.size(); ++k) {
      double y = wm.forward(Vector::Constant(1, probes[k]))[0] - probes[k];
      sum[k] += y;
      sumsq[k] += y * y;
    }
  }
  for (std::size_t k = 0; k < probes.size(); ++k) {
    double mean = sum[k] / draws;
    double sd = std::sqrt(sumsq[k] / draws - mean * mean);
    EXPECT_LT(std::abs(mean), 4.0 * sd / std::sqrt(static_cast<double>(draws))) << probes[k];
  }
}

TEST(Poisson, ZeroIntensityEmpty) {
  Compactum w = Compactum::unit(1);
  GridDensity u = GridDensity::uniform(w, {8});
  EXPECT_TRUE(sample_poisson(u, 0.0, w, 1).empty());
}

TEST(Poisson, CountWithinTailBound) {
  Compactum w = Compactum::unit(1);
  GridDensity u = GridDensity::uniform(w, {8});
  int inside = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    double c = static_cast<double>(sample_poisson(u, 1000.0, w, s).size());
    if (std::abs(c - 1000.0) <= 4.0 * std::sqrt(1000.0)) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(Kernel, EmptyPatternUniform) {
  PointPattern e(Compactum::unit(1), Matrix(0, 1));
  std::vector<int> cells{16};
  auto g = kernel_estimate(e, KernelSpec{}, cells);
  for (double v : g.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Kernel, CentredPointSymmetricAndNormalised) {
  PointPattern p(Compactum::unit(1), Matrix::Constant(1, 1, 0.5));
  KernelSpec s;
  s.bandwidth = 0.05;
  std::vector<int> cells{128};
  auto g = kernel_estimate(p, s, cells);
  double total = 0.0;
  for (std::size_t k = 0; k < g.num_cells(); ++k) total += g.mass(k);
  EXPECT_NEAR(total, 1.0, 1e-6);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(g.values()[k], g.values()[127 - k], 1e-9);
}

TEST(Kernel, SmoothingConstantOnUnitInterval) {
  EXPECT_NEAR(smoothing_constant(KernelSpec{}, Compactum::unit(1)), 4.1327, 1e-4);
}

TEST(Kernel, UnitVarianceProfile) {
  // int_0^inf r^2 psi_1(r) dr * 2 = 1 in d = 1
  double s = 0.0, h = 1e-3;
  for (double r = h / 2; r < 10.0; r += h) s += 2.0 * r * r * kernel_profile(KernelSpec{}, 1, r) * h;
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(Bandwidth, DefaultRule) {
  EXPECT_NEAR(default_bandwidth(100.0, 1), std::pow(100.0, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(default_bandwidth(400.0, 2), std::pow(400.0, -0.25), 1e-15);
  EXPECT_EQ(default_bandwidth(0.5, 1), 1.0);
}

TEST(Population, SinglePatternIsItsSmoothing) {
  Compactum w = Compactum::unit(1);
  PointPattern p(w, Matrix{{0.2}, {0.3}, {0.8}});
  std::vector<PointPattern> ps{p};
  KernelSpec s;
  std::vector<int> cells{64};
  auto est = estimate_population(ps, s, cells);
  auto single = kernel_estimate(p, s, cells);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(est.lambda_hat.values()[k], single.values()[k], 1e-9);
}

TEST(Experiment, DegenerateDesignOneRow) {
  ExperimentDesign d;
  d.n_grid = {3};
  d.tau_grid = {50};
  d.replicates = 1;
  d.truth_cells = 128;
  auto rows = run_consistency_experiment(d);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_GT(rows[0].d_lambda, 0.0);
}

TEST(Experiment, DesignMustIncreaseTauOverLogN) {
  ExperimentDesign d;
  d.n_grid = {5, 1000};
  d.tau_grid = {100, 101};
  EXPECT_THROW(d.validate(), Error);
}

}  // namespace
