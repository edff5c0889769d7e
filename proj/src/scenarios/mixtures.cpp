#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "wassbary/error.hpp"
#include "wassbary/scenarios.hpp"

namespace wassbary::scenarios {

namespace bm = boost::math;

Mixture1D::Mixture1D(std::vector<Component> components) : components_(std::move(components)) {
  require(!components_.empty(), ErrorKind::Domain, "mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    require(c.weight > 0.0 && c.scale > 0.0, ErrorKind::Domain, "mixture weights and scales must be positive");
    require(!c.gamma || c.shape > 0.0, ErrorKind::Domain, "gamma shape must be positive");
    total += c.weight;
  }
  require(std::abs(total - 1.0) < 1e-12, ErrorKind::Domain, "mixture weights must sum to 1");
}

double Mixture1D::pdf(double x) const {
  double f = 0.0;
  for (const auto& c : components_) {
    if (c.gamma) {
      if (x > c.location) f += c.weight * bm::pdf(bm::gamma_distribution<>(c.shape, 1.0 / c.scale), x - c.location);
    } else {
      f += c.weight * bm::pdf(bm::normal_distribution<>(c.location, c.scale), x);
    }
  }
  return f;
}

double Mixture1D::cdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) {
    if (c.gamma) {
      if (x > c.location) p += c.weight * bm::cdf(bm::gamma_distribution<>(c.shape, 1.0 / c.scale), x - c.location);
    } else {
      p += c.weight * bm::cdf(bm::normal_distribution<>(c.location, c.scale), x);
    }
  }
  return std::min(p, 1.0);
}

double Mixture1D::quantile(double q) const {
  require(q > 0.0 && q < 1.0, ErrorKind::Domain, "quantile level must lie in (0, 1)");
  // Component quantiles at q bracket the mixture quantile.
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : components_) {
    double v = c.gamma ? c.location + bm::quantile(bm::gamma_distribution<>(c.shape, 1.0 / c.scale), q)
                       : bm::quantile(bm::normal_distribution<>(c.location, c.scale), q);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-300) return lo;
  auto f = [&](double x) { return cdf(x) - q; };
  double flo = f(lo), fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  std::uintmax_t iters = 200;
  auto r = bm::tools::toms748_solve(f, lo, hi, flo, fhi, bm::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

Measure1D Mixture1D::tabulate(std::size_t m) const {
  return Measure1D::tabulate([this](double q) { return quantile(q); }, m);
}

namespace {

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// shape k, rate r
double gamma_draw(std::mt19937_64& rng, double k, double r) {
  return std::gamma_distribution<double>(k, 1.0 / r)(rng);
}

}  // namespace

Mixture1D sample_bimodal(std::mt19937_64& rng) {
  double m1 = uniform(rng, -13.0, -3.0);
  double m2 = uniform(rng, 3.0, 13.0);
  double s1 = gamma_draw(rng, 4.0, 4.0);
  double s2 = gamma_draw(rng, 4.0, 4.0);
  return Mixture1D({{0.5, false, m1, s1, 0.0}, {0.5, false, m2, s2, 0.0}});
}

Mixture1D sample_gamma_gauss(std::mt19937_64& rng) {
  double beta = gamma_draw(rng, 4.0, 1.0);
  double m3 = uniform(rng, 1.0, 4.0);
  double m4 = uniform(rng, -4.0, -1.0);
  return Mixture1D({{0.6, true, m3, beta, 3.0}, {0.4, false, m4, 1.0, 0.0}});
}

Matrix sample_wishart(std::mt19937_64& rng, int dim, int dof) {
  require(dim >= 1 && dof >= 1, ErrorKind::Domain, "Wishart needs positive dimension and degrees of freedom");
  std::normal_distribution<double> z;
  Matrix s = Matrix::Zero(dim, dim);
  for (int k = 0; k < dof; ++k) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = z(rng);
    s += v * v.transpose();
  }
  return s;
}

Matrix sample_orthogonal(std::mt19937_64& rng, int dim) {
  require(dim >= 1, ErrorKind::Domain, "dimension must be positive");
  std::normal_distribution<double> z;
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = z(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

double frank_density(double u, double v, double theta) {
  require(theta != 0.0, ErrorKind::Domain, "Frank parameter must be nonzero");
  double a = -std::expm1(-theta);  // 1 - e^{-theta}
  double num = theta * a * std::exp(-theta * (u + v));
  double den = a - std::expm1(-theta * u) * std::expm1(-theta * v);
  return num / (den * den);
}

double frank_conditional_inverse(double u, double w, double theta) {
  require(theta != 0.0, ErrorKind::Domain, "Frank parameter must be nonzero");
  double t = w * std::expm1(-theta) / (w + (1.0 - w) * std::exp(-theta * u));
  return std::clamp(-std::log1p(t) / theta, 0.0, 1.0);
}

BarycenterDensity1D::BarycenterDensity1D(const std::vector<const Mixture1D*>& inputs, std::size_t levels) {
  require(!inputs.empty() && levels >= 2, ErrorKind::Domain, "need inputs and at least two levels");
  for (const auto* m : inputs) inputs_.push_back(*m);
  q_.resize(levels);
  x_.assign(levels, 0.0);
  f_.assign(levels, 0.0);
  const double n = static_cast<double>(inputs_.size());
  for (std::size_t k = 0; k < levels; ++k) {
    q_[k] = Measure1D::level(k, levels);
    for (const auto& m : inputs_) x_[k] += m.quantile(q_[k]) / n;
    f_[k] = density_at_level(q_[k]);
  }
}

double BarycenterDensity1D::density_at_level(double q) const {
  const double n = static_cast<double>(inputs_.size());
  double inv = 0.0;
  for (const auto& m : inputs_) inv += 1.0 / m.pdf(m.quantile(q)) / n;
  return 1.0 / inv;
}

double BarycenterDensity1D::level_of(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto j = static_cast<std::size_t>(it - x_.begin());
  if (x == x_[j - 1]) return q_[j - 1];
  const double n = static_cast<double>(inputs_.size());
  auto g = [&](double q) {
    double s = 0.0;
    for (const auto& m : inputs_) s += m.quantile(q) / n;
    return s - x;
  };
  std::uintmax_t iters = 100;
  auto r = boost::math::tools::toms748_solve(g, q_[j - 1], q_[j], x_[j - 1] - x, x_[j] - x,
                                             boost::math::tools::eps_tolerance<double>(45), iters);
  return 0.5 * (r.first + r.second);
}

double BarycenterDensity1D::pdf(double x) const {
  if (!(x >= x_.front() && x < x_.back())) return 0.0;
  return density_at_level(level_of(x));
}

double BarycenterDensity1D::cdf(double x) const {
  if (x < x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  return level_of(x);
}

}  // namespace wassbary::scenarios
