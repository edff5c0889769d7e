#include <algorithm>
#include <cmath>
#include <random>

#include "wassbary/error.hpp"
#include "wassbary/measures.hpp"

namespace wassbary {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return std::generate_canonical<double, 53>(rng); }

// Draws from measures on R^d, written into consecutive columns of `out`.
void draw(const Measure& m, std::uint64_t seed, Matrix& out, Eigen::Index col);

void draw_1d(const Measure1D& m, std::mt19937_64& rng, Matrix& out, Eigen::Index col) {
  const auto& v = m.values();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double u = uniform01(rng);
    if (m.kind() == Measure1D::Kind::PiecewiseLinear) {
      out(i, col) = m.quantile_function()(std::clamp(u, 1e-300, 1.0 - 1e-16));
    } else {
      auto k = std::min(static_cast<std::size_t>(u * static_cast<double>(v.size())), v.size() - 1);
      out(i, col) = v[k];
    }
  }
}

void draw_gaussian(const GaussianMeasure& g, std::mt19937_64& rng, Matrix& out, Eigen::Index col) {
  std::normal_distribution<double> normal;
  Eigen::LLT<Matrix> llt(g.covariance());
  Matrix l = llt.matrixL();
  Vector z(g.dim());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (int a = 0; a < g.dim(); ++a) z[a] = normal(rng);
    out.block(i, col, 1, g.dim()) = (l * z).transpose();
  }
}

std::size_t categorical(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

void draw_discrete(const DiscreteMeasure& d, std::mt19937_64& rng, Matrix& out, Eigen::Index col) {
  std::vector<double> cum(d.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) cum[k] = acc += d.weights()[static_cast<Eigen::Index>(k)];
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto k = static_cast<Eigen::Index>(categorical(cum, uniform01(rng)));
    out.block(i, col, 1, d.dim()) = d.points().row(k);
  }
}

void draw_grid(const GridDensity& g, std::mt19937_64& rng, Matrix& out, Eigen::Index col) {
  std::vector<double> cum(g.num_cells());
  double acc = 0.0;
  for (std::size_t k = 0; k < cum.size(); ++k) cum[k] = acc += g.values()[k];
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    std::size_t cell = categorical(cum, uniform01(rng));
    while (g.values()[cell] <= 0.0 && cell > 0) --cell;
    auto idx = g.multi_index(cell);
    for (int a = 0; a < g.dim(); ++a) {
      double w = g.cell_width(a);
      double x = g.window().lower()[a] + (idx[static_cast<std::size_t>(a)] + uniform01(rng)) * w;
      out(i, col + a) = std::min(x, g.window().upper()[a]);
    }
  }
}

void draw(const Measure& m, std::uint64_t seed, Matrix& out, Eigen::Index col) {
  std::mt19937_64 rng(seed);
  switch (m.family()) {
    case Family::Quantile1D: draw_1d(m.as<Measure1D>(), rng, out, col); return;
    case Family::Gaussian: draw_gaussian(m.as<GaussianMeasure>(), rng, out, col); return;
    case Family::Discrete: draw_discrete(m.as<DiscreteMeasure>(), rng, out, col); return;
    case Family::Grid: draw_grid(m.as<GridDensity>(), rng, out, col); return;
    case Family::Product: {
      std::uint64_t s = seed;
      for (const auto& f : m.as<ProductMeasure>().factors) {
        s = splitmix(s);
        draw(f, s, out, col);
        col += f.dim();
      }
      return;
    }
  }
}

// Support box when the family has one, else the sample's bounding box.
Compactum sampling_window(const Measure& m, const Matrix& pts) {
  if (const auto* g = m.get_if<GridDensity>()) return g->window();
  Vector lo(m.dim()), hi(m.dim());
  if (pts.rows() > 0) {
    lo = pts.colwise().minCoeff().transpose();
    hi = pts.colwise().maxCoeff().transpose();
  } else {
    lo.setConstant(-1.0);
    hi.setConstant(1.0);
  }
  if (const auto* q = m.get_if<Measure1D>()) {
    const auto& f = q->quantile_function();
    lo[0] = std::min(lo[0], f.start().front());
    hi[0] = std::max(hi[0], f.end().back());
  }
  for (int a = 0; a < lo.size(); ++a)
    if (!(hi[a] > lo[a])) {
      lo[a] -= 0.5;
      hi[a] += 0.5;
    }
  return Compactum(lo, hi);
}

}  // namespace

PointPattern sample(const Measure& m, std::size_t n, std::uint64_t seed) {
  Matrix pts(static_cast<Eigen::Index>(n), m.dim());
  if (n > 0) draw(m, seed, pts, 0);
  Compactum w = sampling_window(m, pts);
  return PointPattern(std::move(w), std::move(pts));
}

}  // namespace wassbary
