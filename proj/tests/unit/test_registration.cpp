#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/registration.hpp"
#include "wassbary/scenarios.hpp"

using namespace wassbary;

namespace {

TEST(Multicoupling, IdenticalInputsCostNothing) {
  Measure g = GaussianMeasure(Matrix{{1.0, 0.2}, {0.2, 2.0}});
  std::vector<Measure> in{g, g, g};
  auto mc = multicoupling(in);
  EXPECT_NEAR(mc.pairwise_cost, 0.0, 1e-12);
}

TEST(Multicoupling, TwoPointMasses) {
  std::vector<Measure> in{Measure1D::point_mass(0.0), Measure1D::point_mass(2.0)};
  auto mc = multicoupling(in);
  EXPECT_NEAR(mc.pairwise_cost, 4.0, 1e-12);
  EXPECT_NEAR(mc.mean_spread, mc.objective, 1e-12);
}

TEST(Multicoupling, SmallDiscreteMatchesOracles) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 120; ++trial) {
    int m = 1 + trial % 4;
    std::vector<Measure> in;
    std::vector<Matrix> pts;
    std::vector<Vector> w;
    for (int i = 0; i < 3; ++i) {
      pts.push_back(oracle::random_points(rng, m, 2));
      w.push_back(Vector::Constant(m, 1.0 / m));
      in.emplace_back(DiscreteMeasure(pts.back()));
    }
    auto mc = multicoupling(in);
    double lp = oracle::lp_multicoupling_cost(pts, w);
    EXPECT_NEAR(mc.pairwise_cost, lp, 1e-9) << trial;
    EXPECT_LE(lp, oracle::permutation_multicoupling_cost(pts) + 1e-9);
  }
}

TEST(Multicoupling, GaussianSpreadEqualsObjective) {
  std::mt19937_64 rng(22);
  std::vector<Measure> in;
  for (int i = 0; i < 4; ++i) in.emplace_back(GaussianMeasure(scenarios::sample_wishart(rng, 2, 2)));
  DescentConfig cfg;
  cfg.tolerance = 1e-10;
  auto mc = multicoupling(in, cfg);
  EXPECT_NEAR(mc.mean_spread, mc.objective, 1e-8);
}

TEST(InvertMap, Cases) {
  auto id = invert_map(TransportMap(Monotone1D::identity()));
  EXPECT_NEAR(id(Vector::Constant(1, 0.3))[0], 0.3, 1e-15);
  auto lin = invert_map(TransportMap(LinearMap(Matrix{{2.0, 0.0}, {0.0, 0.5}})));
  EXPECT_TRUE(lin.as<LinearMap>().matrix().isApprox(Matrix{{0.5, 0.0}, {0.0, 2.0}}));
  auto aff = invert_map(TransportMap(Monotone1D::affine(1.0, 2.0)));
  for (double y : {1.0, 2.0, 3.0}) EXPECT_NEAR(aff(Vector::Constant(1, y))[0], (y - 1.0) / 2.0, 1e-14);
}

TEST(InvertMap, SingularAndNonBijective) {
  EXPECT_THROW(invert_map(TransportMap(LinearMap::general(Matrix{{1.0, 1.0}, {1.0, 1.0}}))), ConditioningError);
  try {
    invert_map(TransportMap(Assignment(Matrix{{0.0}, {1.0}}, Matrix{{2.0}, {2.0}})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(RegisterPattern, IdentityAndEmpty) {
  PointPattern p(Compactum::unit(1), Matrix{{0.2}, {0.7}});
  EXPECT_EQ(register_pattern(p, TransportMap(Monotone1D::identity())).points(), p.points());
  PointPattern e(Compactum::unit(1), Matrix(0, 1));
  EXPECT_TRUE(register_pattern(e, TransportMap(Monotone1D::identity())).empty());
}

TEST(RegisterPattern, ExactInverseRecoversIntensity) {
  Compactum w = Compactum::unit(1);
  GridDensity lambda = reference_intensity(w, 256);
  WarpMap warp = sample_warp(w, WarpParams{}, 5);
  const std::size_t n = 2000;
  PointPattern base = sample(lambda, n, 6);
  PointPattern warped = register_pattern(base, warp.forward);
  PointPattern back = register_pattern(warped, warp.inverse);
  std::vector<double> x(back.points().data(), back.points().data() + back.size());
  PointPattern ref = sample(lambda, n, 7);
  std::vector<double> y(ref.points().data(), ref.points().data() + ref.size());
  double d = wasserstein2(Measure1D::from_sample(x), Measure1D::from_sample(y));
  // two independent samples: W2 shrinks like n^{-1/2} in 1D
  EXPECT_LT(d, 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_LT((back.points() - base.points()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RegistrationError, ShiftAndEquality) {
  Matrix probes = probe_grid(Compactum::unit(2), 5);
  TransportMap id = LinearMap(Matrix::Identity(2, 2));
  EXPECT_EQ(registration_error(id, id, probes), 0.0);
  TransportMap shift = ProductMap({TransportMap(Monotone1D::affine(0.3, 1.0)), TransportMap(Monotone1D::affine(0.4, 1.0))});
  TransportMap ident = ProductMap({TransportMap(Monotone1D::identity()), TransportMap(Monotone1D::identity())});
  EXPECT_NEAR(registration_error(shift, ident, probes), 0.5, 1e-12);
}

TEST(ProbeGrid, ShrunkWindowWithEndpoints) {
  Matrix p = probe_grid(Compactum::unit(1), 5, 0.1);
  ASSERT_EQ(p.rows(), 5);
  EXPECT_NEAR(p(0, 0), 0.1, 1e-15);
  EXPECT_NEAR(p(4, 0), 0.9, 1e-15);
  EXPECT_EQ(probe_grid(Compactum::unit(2), 4).rows(), 16);
}

}  // namespace
