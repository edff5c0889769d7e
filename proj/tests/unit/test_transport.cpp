#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "wassbary/error.hpp"
#include "wassbary/transport.hpp"

using namespace wassbary;

namespace {

Measure1D uniform(double a, double b, std::size_t m = 512) {
  return Measure1D::tabulate([=](double q) { return a + (b - a) * q; }, m);
}

Measure1D normal(double sd, std::size_t m = 2048) {
  boost::math::normal_distribution<> z;
  return Measure1D::tabulate([=](double q) { return sd * boost::math::quantile(z, q); }, m);
}

TEST(OptimalMap1D, SameMeasureIsIdentityOnSupport) {
  auto u = uniform(0, 1);
  auto t = optimal_map_1d(u, u);
  for (double x : u.values()) EXPECT_EQ(t(x), x);
}

TEST(OptimalMap1D, UniformToUniformIsAffine) {
  auto t = optimal_map_1d(uniform(0, 1), uniform(1, 3));
  for (double x : {0.01, 0.25, 0.5, 0.77, 0.99}) EXPECT_NEAR(t(x), 1.0 + 2.0 * x, 1e-12);
}

TEST(OptimalMap1D, GaussianScaling) {
  auto src = normal(1.0), dst = normal(2.0);
  auto t = optimal_map_1d(src, dst);
  for (std::size_t k = 1; k + 1 < src.size(); ++k) EXPECT_NEAR(t(src.values()[k]), 2.0 * src.values()[k], 1e-6);
}

TEST(OptimalMap1D, PiecewiseLinearSource) {
  // uniform on [0, 1/2] to uniform on [0, 1]
  auto src = Measure1D::from_quantile_function(QuantileFunction({0.0, 1.0}, {0.0}, {0.5}));
  auto dst = Measure1D::from_quantile_function(QuantileFunction({0.0, 1.0}, {0.0}, {1.0}));
  auto t = optimal_map_1d(src, dst);
  for (double x : {0.0, 0.1, 0.25, 0.5}) EXPECT_NEAR(t(x), 2.0 * x, 1e-14);
}

TEST(OptimalMapGaussian, Identity) {
  GaussianMeasure s(Matrix{{2.0, 0.3}, {0.3, 1.0}});
  EXPECT_TRUE(optimal_map_gaussian(s, s).matrix().isApprox(Matrix::Identity(2, 2), 1e-12));
}

TEST(OptimalMapGaussian, Scalar) {
  auto t = optimal_map_gaussian(GaussianMeasure(Matrix::Constant(1, 1, 1.0)), GaussianMeasure(Matrix::Constant(1, 1, 4.0)));
  EXPECT_NEAR(t.matrix()(0, 0), 2.0, 1e-14);
}

TEST(OptimalMapGaussian, CommutingDiagonal) {
  auto t = optimal_map_gaussian(GaussianMeasure(Matrix{{1.0, 0.0}, {0.0, 4.0}}), GaussianMeasure(Matrix{{9.0, 0.0}, {0.0, 1.0}}));
  EXPECT_TRUE(t.matrix().isApprox(Matrix{{3.0, 0.0}, {0.0, 0.5}}, 1e-12));
}

TEST(OptimalMapGaussian, PushesSourceOntoTarget) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a(3, 3), b(3, 3);
    for (int i = 0; i < 9; ++i) {
      a.data()[i] = z(rng);
      b.data()[i] = z(rng);
    }
    GaussianMeasure src(a * a.transpose() + 0.1 * Matrix::Identity(3, 3));
    GaussianMeasure dst(b * b.transpose() + 0.1 * Matrix::Identity(3, 3));
    auto t = optimal_map_gaussian(src, dst);
    Matrix pushed = t.matrix() * src.covariance() * t.matrix().transpose();
    EXPECT_TRUE(pushed.isApprox(dst.covariance(), 1e-9));
    EXPECT_TRUE(t.matrix().isApprox(t.matrix().transpose(), 1e-12));
  }
}

TEST(OptimalMapProduct, Factorwise) {
  ProductMeasure src({Measure(uniform(0, 1)), Measure(GaussianMeasure(Matrix::Constant(1, 1, 1.0)))});
  ProductMeasure dst({Measure(uniform(1, 3)), Measure(GaussianMeasure(Matrix::Constant(1, 1, 4.0)))});
  auto t = optimal_map_product(src, dst);
  Vector y = TransportMap(t)(Vector{{0.5, 1.5}});
  EXPECT_NEAR(y[0], 2.0, 1e-12);
  EXPECT_NEAR(y[1], 3.0, 1e-12);
}

TEST(OptimalMapProduct, MisalignedFactorsRejected) {
  ProductMeasure src({Measure(uniform(0, 1)), Measure(GaussianMeasure(Matrix::Identity(2, 2)))});
  ProductMeasure dst({Measure(GaussianMeasure(Matrix::Identity(2, 2))), Measure(uniform(0, 1))});
  try {
    optimal_map_product(src, dst);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Representation);
  }
}

TEST(Coupling, IdenticalIsDiagonal) {
  DiscreteMeasure m(Matrix{{0.0, 1.0}, {2.0, 3.0}, {-1.0, 0.5}});
  auto c = optimal_coupling_discrete(m, m);
  EXPECT_EQ(c.cost, 0.0);
  for (const auto& e : c.plan) EXPECT_EQ(e.source, e.target);
}

TEST(Coupling, TwoPointMonotone) {
  DiscreteMeasure a(Matrix{{0.0}, {1.0}}), b(Matrix{{0.1}, {0.9}});
  auto c = optimal_coupling_discrete(a, b);
  EXPECT_NEAR(c.cost, 0.01, 1e-15);
  auto proj = barycentric_projection(c);
  EXPECT_EQ(proj.target_index(), (std::vector<int>{0, 1}));
}

TEST(Coupling, CapacityError) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Matrix p(10, 2);
  for (int i = 0; i < 20; ++i) p.data()[i] = z(rng);
  DiscreteSolverOptions opt;
  opt.max_points = 5;
  try {
    optimal_coupling_discrete(DiscreteMeasure(p), DiscreteMeasure(p), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Capacity);
  }
}

TEST(Coupling, MarginalsRespected) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix a(7, 2), b(5, 2);
  for (int i = 0; i < 14; ++i) a.data()[i] = z(rng);
  for (int i = 0; i < 10; ++i) b.data()[i] = z(rng);
  Vector wa(7), wb(5);
  for (int i = 0; i < 7; ++i) wa[i] = u(rng);
  for (int i = 0; i < 5; ++i) wb[i] = u(rng);
  wa /= wa.sum();
  wb /= wb.sum();
  auto c = optimal_coupling_discrete(DiscreteMeasure(a, wa), DiscreteMeasure(b, wb));
  EXPECT_LT(c.marginal_error(), 1e-12);
}

TEST(MapAverage, TargetsEqualGammaLeaveItUnchanged) {
  DiscreteMeasure g(Matrix{{0.0}, {1.0}, {5.0}});
  std::vector<DiscreteMeasure> t{g, g};
  auto r = discrete_map_average(g, t);
  EXPECT_EQ(r.measure.points(), g.points());
}

TEST(MapAverage, SinglePoint) {
  DiscreteMeasure g(Matrix{{0.0, 0.0}});
  std::vector<DiscreteMeasure> t{DiscreteMeasure(Matrix{{1.0, 2.0}}), DiscreteMeasure(Matrix{{3.0, 0.0}})};
  auto r = discrete_map_average(g, t);
  EXPECT_TRUE(r.measure.points().isApprox(Matrix{{2.0, 1.0}}));
}

TEST(MapAverage, TwoPointsOnLine) {
  DiscreteMeasure g(Matrix{{0.0}, {1.0}});
  std::vector<DiscreteMeasure> t{DiscreteMeasure(Matrix{{0.0}, {2.0}}), DiscreteMeasure(Matrix{{0.0}, {4.0}})};
  auto r = discrete_map_average(g, t);
  EXPECT_TRUE(r.measure.points().isApprox(Matrix{{0.0}, {3.0}}));
}

TEST(MapAverage, CollisionsMerged) {
  DiscreteMeasure g(Matrix{{0.0}, {1.0}});
  std::vector<DiscreteMeasure> t{DiscreteMeasure(Matrix{{5.0}})};
  auto r = discrete_map_average(g, t);
  EXPECT_EQ(r.measure.size(), 1u);
  EXPECT_EQ(r.collisions, 1u);
}

TEST(MatrixSqrt, Cases) {
  EXPECT_TRUE(matrix_sqrt_spd(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  EXPECT_TRUE(matrix_sqrt_spd(Matrix{{4.0, 0.0}, {0.0, 9.0}}).isApprox(Matrix{{2.0, 0.0}, {0.0, 3.0}}));
  Matrix s{{2.0, 0.7}, {0.7, 1.0}};
  Matrix r = matrix_sqrt_spd(s);
  EXPECT_TRUE((r * r).isApprox(s, 1e-13));
  EXPECT_THROW(matrix_inv_sqrt_spd(Matrix{{1.0, 0.0}, {0.0, -1.0}}), ConditioningError);
}

TEST(Monotonicity, Cases) {
  std::vector<std::pair<Vector, Vector>> probes{{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)}};
  auto id = check_monotone(TransportMap(Monotone1D::identity()), probes);
  EXPECT_TRUE(id.monotone);
  EXPECT_NEAR(id.worst, 1.0, 1e-15);
  auto flip = check_monotone(TransportMap(LinearMap::general(Matrix::Constant(1, 1, -1.0))), probes);
  EXPECT_FALSE(flip.monotone);
  EXPECT_NEAR(flip.worst, -1.0, 1e-15);
  std::vector<std::pair<Vector, Vector>> p2{{Vector{{1.0, -2.0}}, Vector{{0.3, 0.4}}}};
  EXPECT_TRUE(check_monotone(TransportMap(LinearMap(Matrix{{2.0, 0.5}, {0.5, 1.0}})), p2).monotone);
}

TEST(PushForward, Identity) {
  Measure u = uniform(0, 1);
  Measure out = push_forward(TransportMap(Monotone1D::identity()), u);
  EXPECT_EQ(out.as<Measure1D>().values(), u.as<Measure1D>().values());
}

TEST(PushForward, LinearOnGaussian) {
  Measure g = GaussianMeasure(Matrix::Identity(2, 2));
  Measure out = push_forward(TransportMap(LinearMap(2.0 * Matrix::Identity(2, 2))), g);
  EXPECT_TRUE(out.as<GaussianMeasure>().covariance().isApprox(4.0 * Matrix::Identity(2, 2)));
}

TEST(PushForward, ShiftUniform) {
  auto u = uniform(0, 1, 100);
  Measure out = push_forward(TransportMap(Monotone1D::affine(1.0, 1.0)), u);
  const auto& v = out.as<Measure1D>().values();
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], 1.0 + u.values()[i], 1e-15);
}

TEST(PushForward, IncompatibleRepresentation) {
  try {
    push_forward(TransportMap(Monotone1D::identity()), Measure(GaussianMeasure(Matrix::Identity(2, 2))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Representation);
  }
}

TEST(Compose, CyclicConsistency1D) {
  auto a = uniform(0, 1), b = normal(1.0), c = uniform(-2, 5);
  TransportMap ab = optimal_map_1d(a, b), bc = optimal_map_1d(b, c), ac = optimal_map_1d(a, c);
  TransportMap composed = compose(bc, ab);
  for (std::size_t k = 10; k + 10 < a.size(); k += 7) {
    Vector x = Vector::Constant(1, a.values()[k]);
    EXPECT_NEAR(composed(x)[0], ac(x)[0], 2e-2);
  }
}

TEST(Compose, Linear) {
  TransportMap a = LinearMap::general(Matrix{{1.0, 2.0}, {0.0, 1.0}});
  TransportMap b = LinearMap(Matrix{{2.0, 0.0}, {0.0, 3.0}});
  EXPECT_TRUE(compose(a, b).as<LinearMap>().matrix().isApprox(Matrix{{2.0, 6.0}, {0.0, 3.0}}));
}

TEST(Monotone1D, RejectsDecreasing) {
  EXPECT_THROW(Monotone1D({0.0, 1.0}, {1.0, 0.0}), Error);
}

TEST(GridMap, ExactAtCentresMonotoneBetween) {
  GridMap g(Compactum::unit(1), {2}, Matrix{{0.0}, {1.0}});
  EXPECT_EQ(g.displacement_at(Vector::Constant(1, 0.25))[0], 0.0);
  EXPECT_EQ(g.displacement_at(Vector::Constant(1, 0.75))[0], 1.0);
  TransportMap t(g);
  double prev = -INFINITY;
  for (double x = -0.5; x <= 1.5; x += 0.01) {
    const double y = t(Vector::Constant(1, x))[0];
    EXPECT_TRUE(std::abs(y - 0.25) < 1e-12 || std::abs(y - 1.75) < 1e-12) << x;
    EXPECT_GE(y, prev - 1e-12);
    prev = y;
  }
}

TEST(GridMap, FillsUnknownCellsMonotonically) {
  // a rotation-free shear sampled on a 6x6 grid with a hole in the middle
  Compactum w = Compactum::unit(2);
  Matrix disp(36, 2);
  std::vector<bool> known(36, true);
  for (int k = 0; k < 36; ++k) {
    const double x = (k / 6 + 0.5) / 6.0, y = (k % 6 + 0.5) / 6.0;
    disp.row(k) << 0.5 * x + 0.2 * y, 0.2 * x + 0.3 * y;
  }
  for (int k : {14, 15, 20, 21}) {
    known[static_cast<std::size_t>(k)] = false;
    disp.row(k).setZero();
  }
  TransportMap t(GridMap(w, {6, 6}, disp, known));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.1, 1.1);
  std::vector<std::pair<Vector, Vector>> probes;
  for (int k = 0; k < 2000; ++k) probes.emplace_back(Vector{{u(rng), u(rng)}}, Vector{{u(rng), u(rng)}});
  EXPECT_TRUE(check_monotone(t, probes).monotone);
  EXPECT_GT(t.as<GridMap>().displacement().row(14).norm(), 0.0);
}

}  // namespace
