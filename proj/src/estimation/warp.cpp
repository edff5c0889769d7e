#include <cmath>
#include <numbers>
#include <random>

#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/registration.hpp"

namespace wassbary {

void WarpParams::validate() const {
  require(max_frequency >= 1, ErrorKind::Domain, "warp frequency bound must be at least 1");
  require(amplitude >= 0.0 && amplitude <= 1.0, ErrorKind::Domain, "warp amplitude must lie in [0, 1]");
  require(knots >= 2, ErrorKind::Domain, "warp needs at least two knots per axis");
}

double warp_profile(double u, int frequency, double amplitude) {
  if (frequency == 0 || amplitude == 0.0) return u;
  const double j = static_cast<double>(frequency);
  return u - amplitude * std::sin(std::numbers::pi * j * u) / (std::numbers::pi * std::abs(j));
}

WarpMap make_warp(const Compactum& window, std::span<const int> frequencies, const WarpParams& params) {
  params.validate();
  require(static_cast<int>(frequencies.size()) == window.dim(), ErrorKind::Shape, "one warp frequency per axis required");
  std::vector<TransportMap> fwd, inv;
  const auto k = static_cast<std::size_t>(params.knots);
  for (int a = 0; a < window.dim(); ++a) {
    const double lo = window.lower()[a], hi = window.upper()[a], w = hi - lo;
    std::vector<double> x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(k - 1);
      x[i] = lo + w * u;
      y[i] = std::clamp(lo + w * warp_profile(u, frequencies[static_cast<std::size_t>(a)], params.amplitude), lo, hi);
      if (i > 0) y[i] = std::max(y[i], y[i - 1]);
    }
    x.back() = y.back() = hi;
    x.front() = y.front() = lo;
    Monotone1D f(x, y);
    fwd.emplace_back(f);
    inv.push_back(invert_map(f));
  }
  WarpMap out{fwd.front(), inv.front(), params, std::vector<int>(frequencies.begin(), frequencies.end())};
  if (window.dim() > 1) {
    out.forward = ProductMap(std::move(fwd));
    out.inverse = ProductMap(std::move(inv));
  }
  return out;
}

WarpMap sample_warp(const Compactum& window, const WarpParams& params, std::uint64_t seed) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> magnitude(1, params.max_frequency);
  std::bernoulli_distribution negative(0.5);
  std::vector<int> j(static_cast<std::size_t>(window.dim()));
  for (auto& f : j) {
    f = magnitude(rng);
    if (negative(rng)) f = -f;
  }
  return make_warp(window, j, params);
}

PointPattern sample_poisson(const Measure& intensity, double tau, const Compactum& window, std::uint64_t seed) {
  require(tau >= 0.0 && std::isfinite(tau), ErrorKind::Domain, "intensity must be nonnegative");
  require(intensity.dim() == window.dim(), ErrorKind::Shape, "intensity and window differ in dimension");
  std::size_t count = 0;
  if (tau > 0.0) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<long long> poisson(tau);
    count = static_cast<std::size_t>(poisson(rng));
  }
  if (count == 0) return PointPattern(window, Matrix(0, window.dim()));
  PointPattern draws = sample(intensity, count, derive_seed(seed, 1));
  return PointPattern(window, draws.points());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(base ^ mix(k + 0x632be59bd9b4e019ULL));
}

}  // namespace wassbary
