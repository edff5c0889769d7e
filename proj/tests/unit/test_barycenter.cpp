#include <gtest/gtest.h>

#include <random>

#include "wassbary/barycenter.hpp"
#include "wassbary/error.hpp"
#include "wassbary/scenarios.hpp"

using namespace wassbary;

namespace {

Measure gauss1(double var) { return GaussianMeasure(Matrix::Constant(1, 1, var)); }

std::vector<Measure> random_1d(std::mt19937_64& rng, int n, std::size_t m = 256) {
  std::vector<Measure> out;
  for (int i = 0; i < n; ++i) out.emplace_back(scenarios::sample_bimodal(rng).tabulate(m));
  return out;
}

TEST(Objective, SingleInputAtItself) {
  std::vector<Measure> in{gauss1(2.0)};
  EXPECT_NEAR(frechet_objective(in[0], in), 0.0, 1e-15);
}

TEST(Objective, PointMasses) {
  std::vector<Measure> in{Measure1D::point_mass(0.0), Measure1D::point_mass(2.0)};
  EXPECT_NEAR(frechet_objective(Measure1D::point_mass(1.0), in), 0.5, 1e-14);
}

TEST(Objective, Gaussians) {
  std::vector<Measure> in{gauss1(1.0), gauss1(9.0)};
  EXPECT_NEAR(frechet_objective(gauss1(4.0), in), 0.5, 1e-14);
}

TEST(Gradient, VanishesAtInputsAllEqual) {
  std::vector<Measure> in{gauss1(3.0), gauss1(3.0)};
  EXPECT_NEAR(frechet_gradient_norm_sq(in[0], in), 0.0, 1e-20);
}

TEST(Gradient, SymmetricPointMasses) {
  std::vector<Measure> in{Measure1D::point_mass(0.0), Measure1D::point_mass(2.0)};
  EXPECT_NEAR(frechet_gradient_norm_sq(Measure1D::point_mass(1.0), in), 0.0, 1e-24);
}

TEST(Karcher, PositiveAtOneOfTwoInputs) {
  std::vector<Measure> in{gauss1(1.0), gauss1(9.0)};
  EXPECT_GT(karcher_residual(in[0], in), 0.5);
}

TEST(ProcrustesStep, FixedPointAndZeroStep) {
  std::mt19937_64 rng(1);
  auto in = random_1d(rng, 3);
  Measure same = procrustes_step(in[0], std::span<const Measure>(in.data(), 1), 1.0);
  EXPECT_EQ(same.as<Measure1D>().values(), in[0].as<Measure1D>().values());
  Measure still = procrustes_step(in[0], in, 0.0);
  EXPECT_EQ(still.as<Measure1D>().values(), in[0].as<Measure1D>().values());
}

TEST(ProcrustesStep, GaussianAveragedMap) {
  std::vector<Measure> in{gauss1(1.0), gauss1(9.0)};
  Measure next = procrustes_step(gauss1(4.0), in, 1.0);
  EXPECT_NEAR(next.as<GaussianMeasure>().covariance()(0, 0), 4.0, 1e-12);
}

TEST(Barycenter, SingleInputReturnsIt) {
  std::mt19937_64 rng(2);
  auto in = random_1d(rng, 1);
  auto r = barycenter(in);
  EXPECT_EQ(r.barycenter.as<Measure1D>().values(), in[0].as<Measure1D>().values());
  EXPECT_EQ(r.trace.records.size(), 1u);
  EXPECT_TRUE(r.trace.converged);
}

TEST(Barycenter, OneDimensionalOneStep) {
  std::mt19937_64 rng(3);
  auto in = random_1d(rng, 4);
  auto r = barycenter(in);
  EXPECT_EQ(r.trace.iterations_used, 1);
  EXPECT_TRUE(r.trace.converged);
  const auto& v = r.barycenter.as<Measure1D>().values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    double s = 0.0;
    for (const auto& m : in) s += m.as<Measure1D>().values()[k];
    EXPECT_EQ(v[k], s / 4.0);
  }
}

TEST(Barycenter, MixedFamiliesRejected) {
  std::vector<Measure> in{gauss1(1.0), Measure1D::point_mass(0.0)};
  try {
    barycenter(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Representation);
  }
}

TEST(Barycenter, EmptyInputRejected) {
  std::vector<Measure> in;
  EXPECT_THROW(barycenter(in), Error);
}

TEST(Barycenter, NonConvergenceIsReported) {
  std::mt19937_64 rng(4);
  std::vector<GaussianMeasure> in;
  for (int i = 0; i < 4; ++i) in.emplace_back(scenarios::sample_wishart(rng, 2, 2));
  DescentConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-14;
  cfg.initial = Measure(GaussianMeasure(Matrix::Identity(2, 2)));
  auto r = gaussian_barycenter(in, cfg);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_EQ(r.trace.stop, StopReason::MaxIterations);
}

TEST(GaussianBarycenter, AllEqual) {
  Matrix s{{2.0, 0.4}, {0.4, 1.0}};
  std::vector<GaussianMeasure> in{GaussianMeasure(s), GaussianMeasure(s), GaussianMeasure(s)};
  auto r = gaussian_barycenter(in);
  EXPECT_TRUE(r.barycenter.covariance().isApprox(s, 1e-12));
  EXPECT_EQ(r.trace.iterations_used, 0);
}

TEST(GaussianBarycenter, CommutingDiagonals) {
  std::vector<GaussianMeasure> in{GaussianMeasure(Matrix::Identity(2, 2)), GaussianMeasure(9.0 * Matrix::Identity(2, 2))};
  auto r = gaussian_barycenter(in);
  EXPECT_TRUE(r.barycenter.covariance().isApprox(4.0 * Matrix::Identity(2, 2), 1e-9));
}

TEST(GaussianBarycenter, Scalar) {
  std::vector<GaussianMeasure> in{GaussianMeasure(Matrix::Constant(1, 1, 1.0)), GaussianMeasure(Matrix::Constant(1, 1, 9.0))};
  auto r = gaussian_barycenter(in);
  EXPECT_NEAR(r.barycenter.covariance()(0, 0), 4.0, 1e-9);
}

TEST(GaussianBarycenter, WishartFromIdentityConverges) {
  std::mt19937_64 rng(6);
  std::vector<GaussianMeasure> in;
  for (int i = 0; i < 4; ++i) in.emplace_back(scenarios::sample_wishart(rng, 2, 2));
  DescentConfig cfg;
  cfg.initial = Measure(GaussianMeasure(Matrix::Identity(2, 2)));
  auto r = gaussian_barycenter(in, cfg);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LE(r.trace.iterations_used, 50);
  std::vector<Measure> as(in.begin(), in.end());
  EXPECT_LT(karcher_residual(r.barycenter, as), 1e-6);
}

TEST(Discrete, TraceMarksFormalGradient) {
  std::vector<Measure> in{DiscreteMeasure(Matrix{{0.0, 0.0}, {1.0, 0.0}}), DiscreteMeasure(Matrix{{0.0, 1.0}, {1.0, 1.0}})};
  auto r = barycenter(in);
  EXPECT_TRUE(r.trace.formal_gradient);
  EXPECT_TRUE(r.barycenter.as<DiscreteMeasure>().points().isApprox(Matrix{{0.0, 0.5}, {1.0, 0.5}}));
}

TEST(Observer, SeesEveryIterate) {
  std::vector<Measure> in{gauss1(1.0), gauss1(9.0)};
  DescentConfig cfg;
  std::vector<int> seen;
  cfg.observer = [&](int j, const Measure&) { seen.push_back(j); };
  auto r = barycenter(in, cfg);
  ASSERT_EQ(seen.size(), r.trace.records.size());
  for (std::size_t j = 0; j < seen.size(); ++j) EXPECT_EQ(seen[j], static_cast<int>(j));
}

TEST(DensityBound, FormulaCases) {
  auto w = Compactum::unit(1);
  GridDensity a = GridDensity::uniform(w, {4});
  EXPECT_NEAR(density_bound(std::vector<GridDensity>{a}), 1.0, 1e-15);
  // sup norms 1 and 4 on [0, 1]
  GridDensity g3(w, {4}, {4.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(density_bound(std::vector<GridDensity>{a, g3}), 2.0, 1e-14);
  auto w2 = Compactum::unit(2);
  GridDensity u2 = GridDensity::uniform(w2, {3, 3});
  // min{3 * 1, 9 * 1}
  EXPECT_NEAR(density_bound(std::vector<GridDensity>{u2, u2, u2}), 3.0, 1e-13);
  EXPECT_THROW(density_bound(std::vector<GridDensity>{}), Error);
}

TEST(Config, Validation) {
  DescentConfig cfg;
  cfg.step = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.step = 1.0;
  cfg.tolerance = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
