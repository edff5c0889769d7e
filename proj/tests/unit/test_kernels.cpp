#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wassbary/barycenter.hpp"
#include "wassbary/kernels.hpp"

namespace k = wassbary::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 10.0) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    avx = k::avx2_table();
    if (!avx) GTEST_SKIP() << "AVX2 not available";
  }
  const k::KernelTable& scalar = k::scalar_table();
  const k::KernelTable* avx = nullptr;
};

TEST_P(KernelEquivalence, MeanRowsBitwise) {
  std::mt19937_64 rng(GetParam());
  const std::size_t len = GetParam();
  for (std::size_t nrows : {1, 2, 3, 7}) {
    std::vector<std::vector<double>> rows;
    std::vector<const double*> ptrs;
    for (std::size_t i = 0; i < nrows; ++i) rows.push_back(random_vector(rng, len));
    for (const auto& r : rows) ptrs.push_back(r.data());
    std::vector<double> a(len), b(len);
    scalar.mean_rows(ptrs.data(), nrows, len, a.data());
    avx->mean_rows(ptrs.data(), nrows, len, b.data());
    EXPECT_EQ(a, b);
  }
}

TEST_P(KernelEquivalence, BlendBitwise) {
  std::mt19937_64 rng(GetParam() + 1);
  const std::size_t len = GetParam();
  auto x = random_vector(rng, len), y = random_vector(rng, len);
  for (double tau : {0.0, 0.3, 0.5, 1.0}) {
    std::vector<double> a(len), b(len);
    scalar.blend(x.data(), y.data(), tau, len, a.data());
    avx->blend(x.data(), y.data(), tau, len, b.data());
    EXPECT_EQ(a, b);
  }
}

TEST_P(KernelEquivalence, SquaredDistanceRelative) {
  std::mt19937_64 rng(GetParam() + 2);
  const std::size_t len = GetParam();
  auto x = random_vector(rng, len), y = random_vector(rng, len);
  double a = scalar.squared_distance(x.data(), y.data(), len);
  double b = avx->squared_distance(x.data(), y.data(), len);
  EXPECT_NEAR(a, b, 1e-13 * std::max(1.0, a));
}

TEST_P(KernelEquivalence, GaussianProfileRelative) {
  std::mt19937_64 rng(GetParam() + 3);
  const std::size_t len = GetParam();
  auto c = random_vector(rng, len, 1.0);
  for (double inv : {0.5, 50.0, 5000.0}) {
    std::vector<double> a(len), b(len);
    scalar.gaussian_profile(c.data(), len, 0.1, inv, a.data());
    avx->gaussian_profile(c.data(), len, 0.1, inv, b.data());
    for (std::size_t i = 0; i < len; ++i) EXPECT_NEAR(a[i], b[i], 1e-14 + 1e-13 * a[i]) << i;
  }
}

TEST_P(KernelEquivalence, SquaredEuclideanRowBitwise) {
  std::mt19937_64 rng(GetParam() + 4);
  const std::size_t len = GetParam();
  for (std::size_t dim : {1, 2, 3}) {
    std::vector<std::vector<double>> axes;
    std::vector<const double*> ptrs;
    for (std::size_t a = 0; a < dim; ++a) axes.push_back(random_vector(rng, len));
    for (const auto& ax : axes) ptrs.push_back(ax.data());
    auto x = random_vector(rng, dim);
    std::vector<double> a(len), b(len);
    scalar.squared_euclidean_row(ptrs.data(), dim, len, x.data(), a.data());
    avx->squared_euclidean_row(ptrs.data(), dim, len, x.data(), b.data());
    EXPECT_EQ(a, b);
  }
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence, ::testing::Values(0, 1, 3, 4, 5, 8, 17, 64, 1023));

TEST(KernelSelection, ScalarAlwaysSelectable) {
  const k::Isa before = k::active().isa;
  EXPECT_TRUE(k::select(k::Isa::Scalar));
  EXPECT_EQ(k::active().isa, k::Isa::Scalar);
  k::select(before);
}

// Barycenter of 1D quantile grids agrees across kernel tables.
TEST(KernelSelection, BarycenterSameUnderBothTables) {
  if (!k::avx2_table()) GTEST_SKIP();
  std::mt19937_64 rng(5);
  std::vector<wassbary::Measure> in;
  for (int i = 0; i < 3; ++i) {
    auto v = random_vector(rng, 257);
    std::sort(v.begin(), v.end());
    in.emplace_back(wassbary::Measure1D::from_quantile_grid(v));
  }
  const k::Isa before = k::active().isa;
  k::select(k::Isa::Scalar);
  auto a = wassbary::barycenter(in).barycenter.as<wassbary::Measure1D>().values();
  k::select(k::Isa::Avx2);
  auto b = wassbary::barycenter(in).barycenter.as<wassbary::Measure1D>().values();
  k::select(before);
  EXPECT_EQ(a, b);
}

}  // namespace
