#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "wassbary/error.hpp"
#include "wassbary/measures.hpp"

using namespace wassbary;

namespace {

std::vector<double> uniform_grid(std::size_t m, double a = 0.0, double b = 1.0) {
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = a + (b - a) * Measure1D::level(i, m);
  return v;
}

template <class F>
void expect_error(F&& f, ErrorKind kind) {
  try {
    f();
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

TEST(Quantile, UniformMedian) {
  EXPECT_DOUBLE_EQ(quantile(Measure1D::from_quantile_grid(uniform_grid(1024)), 0.5), 0.5);
}

TEST(Quantile, PointMass) {
  auto m = Measure1D::point_mass(3.0);
  for (double q : {0.01, 0.3, 0.99}) EXPECT_EQ(quantile(m, q), 3.0);
}

TEST(Quantile, TwoAtomMixture) {
  auto m = Measure1D::from_sample({0.0, 1.0});
  EXPECT_EQ(quantile(m, 0.25), 0.0);
  EXPECT_EQ(quantile(m, 0.75), 1.0);
}

TEST(Quantile, LevelOutsideUnitIntervalIsDomainError) {
  auto m = Measure1D::point_mass(0.0);
  expect_error([&] { quantile(m, 0.0); }, ErrorKind::Domain);
  expect_error([&] { quantile(m, 1.5); }, ErrorKind::Domain);
}

TEST(Wasserstein, IdenticalMeasuresZero) {
  Measure m = Measure1D::from_quantile_grid(uniform_grid(64));
  EXPECT_EQ(wasserstein2(m, m), 0.0);
  Measure g = GaussianMeasure(Matrix{{2.0, 0.5}, {0.5, 1.0}});
  EXPECT_NEAR(wasserstein2(g, g), 0.0, 1e-7);
}

TEST(Wasserstein, PointMasses) {
  EXPECT_NEAR(wasserstein2(Measure1D::point_mass(0.0), Measure1D::point_mass(-2.5)), 2.5, 1e-12);
}

TEST(Wasserstein, OneDimensionalGaussians) {
  Measure a = GaussianMeasure(Matrix::Constant(1, 1, 1.0));
  Measure b = GaussianMeasure(Matrix::Constant(1, 1, 4.0));
  EXPECT_NEAR(wasserstein2(a, b), 1.0, 1e-12);
  // The same pair through quantile grids.
  boost::math::normal_distribution<> z;
  auto qa = Measure1D::tabulate([&](double q) { return boost::math::quantile(z, q); }, 20000);
  auto qb = Measure1D::tabulate([&](double q) { return 2.0 * boost::math::quantile(z, q); }, 20000);
  EXPECT_NEAR(wasserstein2(qa, qb), 1.0, 1e-3);
}

TEST(Wasserstein, CrossFamilyIsRepresentationError) {
  Measure a = Measure1D::point_mass(0.0);
  Measure b = GaussianMeasure(Matrix::Constant(1, 1, 1.0));
  expect_error([&] { wasserstein2(a, b); }, ErrorKind::Representation);
}

TEST(Wasserstein, DimensionMismatchIsShapeError) {
  Measure a = GaussianMeasure(Matrix::Identity(2, 2));
  Measure b = GaussianMeasure(Matrix::Identity(3, 3));
  expect_error([&] { wasserstein2(a, b); }, ErrorKind::Shape);
}

TEST(Wasserstein, GaussianClosedFormMatchesDiscretisation) {
  Measure a = GaussianMeasure(Matrix{{1.0, 0.3}, {0.3, 2.0}});
  Measure b = GaussianMeasure(Matrix{{0.5, -0.2}, {-0.2, 1.5}});
  double exact = wasserstein2(a, b);
  double approx = wasserstein2_via_discrete(a, b, 400);
  EXPECT_NEAR(exact, approx, 0.05);
}

TEST(Wasserstein, ProductIsSumOfFactors) {
  Measure u = Measure1D::from_quantile_grid(uniform_grid(128));
  Measure v = Measure1D::from_quantile_grid(uniform_grid(128, 1.0, 3.0));
  Measure g1 = GaussianMeasure(Matrix::Constant(1, 1, 1.0));
  Measure g4 = GaussianMeasure(Matrix::Constant(1, 1, 4.0));
  Measure p = ProductMeasure({u, g1}), q = ProductMeasure({v, g4});
  EXPECT_NEAR(wasserstein2_squared(p, q), wasserstein2_squared(u, v) + 1.0, 1e-12);
}

TEST(Wasserstein, DiscreteTwoPoints) {
  Measure a = DiscreteMeasure(Matrix{{0.0}, {1.0}});
  Measure b = DiscreteMeasure(Matrix{{0.1}, {0.9}});
  EXPECT_NEAR(wasserstein2_squared(a, b), 0.01, 1e-15);
}

TEST(Measure1D, TabulateUsesMidpointLevels) {
  auto m = Measure1D::tabulate([](double q) { return q; }, 4);
  EXPECT_EQ(m.values(), (std::vector<double>{0.125, 0.375, 0.625, 0.875}));
}

TEST(Measure1D, RejectsDecreasingGrid) {
  expect_error([] { Measure1D::from_quantile_grid({1.0, 0.0}); }, ErrorKind::Domain);
}

TEST(Gaussian, SingularCovarianceReportsEigenvalue) {
  try {
    GaussianMeasure(Matrix{{1.0, 1.0}, {1.0, 1.0}});
    FAIL();
  } catch (const ConditioningError& e) {
    EXPECT_NEAR(e.smallest_eigenvalue(), 0.0, 1e-12);
  }
}

TEST(Discrete, MergedAddsWeights) {
  Matrix pts{{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}};
  auto m = DiscreteMeasure::merged(pts, Vector::Constant(3, 1.0 / 3.0));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m.weights()[0], 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(m.uniform());
}

TEST(Discrete, RejectsDuplicatesAndBadWeights) {
  expect_error([] { DiscreteMeasure(Matrix{{0.0}, {0.0}}); }, ErrorKind::Domain);
  expect_error([] { DiscreteMeasure(Matrix{{0.0}, {1.0}}, Vector{{0.7, 0.7}}); }, ErrorKind::Domain);
}

TEST(Grid, LocateAndMass) {
  auto g = GridDensity::uniform(Compactum::unit(2), {4, 5});
  EXPECT_NEAR(g.mass(0), 1.0 / 20.0, 1e-15);
  EXPECT_EQ(g.locate(Vector{{0.99, 0.01}}), g.flat_index(std::vector<int>{3, 0}));
  EXPECT_EQ(g.locate(Vector{{5.0, 5.0}}), g.num_cells() - 1);
}

TEST(Grid, ToMeasure1DAndBack) {
  std::vector<double> masses{0.1, 0.0, 0.5, 0.4};
  auto g = GridDensity::from_masses(Compactum::unit(1), {4}, masses);
  auto m = to_measure1d(g);
  auto back = to_grid(m, Compactum::unit(1), 4);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(back.mass(k), masses[k], 1e-14);
  EXPECT_NEAR(quantile(m, 0.05), 0.125, 1e-14);
}

TEST(Sampling, EmptyAndPointMass) {
  Measure pm = Measure1D::point_mass(3.0);
  EXPECT_TRUE(sample(pm, 0, 1).empty());
  auto p = sample(pm, 5, 1);
  ASSERT_EQ(p.size(), 5u);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(p.points()(i, 0), 3.0);
}

TEST(Sampling, UniformBoxMeanWithinClt) {
  Measure box = GridDensity::uniform(Compactum(Vector{{0.0, -1.0}}, Vector{{2.0, 1.0}}), {3, 3});
  const std::size_t n = 10000;
  auto p = sample(box, n, 17);
  Vector mean = p.points().colwise().mean().transpose();
  // Each coordinate is uniform on an interval of width 2: sd = 2 / sqrt(12).
  double tol = 4.0 * (2.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(mean[0], 1.0, tol);
  EXPECT_NEAR(mean[1], 0.0, tol);
}

TEST(Sampling, Reproducible) {
  Measure g = GaussianMeasure(Matrix{{1.0, 0.2}, {0.2, 0.5}});
  EXPECT_EQ(sample(g, 100, 9).points(), sample(g, 100, 9).points());
  EXPECT_NE(sample(g, 100, 9).points(), sample(g, 100, 10).points());
}

TEST(PointPattern, RejectsOutsidePoints) {
  expect_error([] { PointPattern(Compactum::unit(1), Matrix{{1.5}}); }, ErrorKind::Domain);
}

TEST(Conversions, SecondMoment) {
  EXPECT_NEAR(second_moment(GaussianMeasure(Matrix{{2.0, 0.0}, {0.0, 3.0}})), 5.0, 1e-14);
  EXPECT_NEAR(second_moment(DiscreteMeasure(Matrix{{1.0}, {3.0}})), 5.0, 1e-14);
}

}  // namespace
