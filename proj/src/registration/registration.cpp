#include "wassbary/registration.hpp"

#include <algorithm>
#include <cmath>

#include "wassbary/error.hpp"
#include "wassbary/solvers.hpp"

namespace wassbary {

namespace {

// Coordinates t_i evaluated at the barycenter's quadrature nodes, with node weights.
struct Routes {
  Vector weights;
  std::vector<Matrix> images;  // one (nodes x d) block per input
};

double spread(const Routes& r) {
  const std::size_t n = r.images.size();
  Matrix mean = Matrix::Zero(r.images[0].rows(), r.images[0].cols());
  for (const auto& im : r.images) mean += im;
  mean /= static_cast<double>(n);
  double s = 0.0;
  for (const auto& im : r.images) s += r.weights.dot((im - mean).rowwise().squaredNorm());
  return s / (2.0 * static_cast<double>(n));
}

double pairwise(const Routes& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.images.size(); ++i)
    for (std::size_t j = i + 1; j < r.images.size(); ++j)
      s += r.weights.dot((r.images[i] - r.images[j]).rowwise().squaredNorm());
  return s;
}

std::vector<double> levels_of(const Measure1D& m, std::size_t size) {
  if (m.kind() != Measure1D::Kind::PiecewiseLinear && m.values().size() == size) return m.values();
  std::vector<double> v(size);
  for (std::size_t k = 0; k < size; ++k) v[k] = quantile(m, Measure1D::level(k, size));
  for (std::size_t k = 1; k < size; ++k) v[k] = std::max(v[k], v[k - 1]);
  return v;
}

// Exact pairwise and spread terms for one-dimensional quantile functions.
void quantile_terms(std::span<const QuantileFunction* const> fns, double& pair, double& spr) {
  const std::size_t n = fns.size();
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const QuantileFunction mean = combine(fns, w);
  pair = spr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    spr += integrated_squared_difference(*fns[i], mean);
    for (std::size_t j = i + 1; j < n; ++j) pair += integrated_squared_difference(*fns[i], *fns[j]);
  }
  spr /= 2.0 * static_cast<double>(n);
}

void terms(const Measure& bary, std::span<const Measure> inputs, const std::vector<TransportMap>& maps,
           double& pair, double& spr) {
  const std::size_t n = inputs.size();
  switch (bary.family()) {
    case Family::Quantile1D: {
      const auto& g = bary.as<Measure1D>();
      if (g.kind() == Measure1D::Kind::PiecewiseLinear) {
        std::vector<const QuantileFunction*> fns;
        for (const auto& m : inputs) fns.push_back(&m.as<Measure1D>().quantile_function());
        quantile_terms(fns, pair, spr);
        return;
      }
      const std::size_t size = g.values().size();
      Routes r{Vector::Constant(static_cast<Eigen::Index>(size), 1.0 / static_cast<double>(size)), {}};
      for (const auto& m : inputs) {
        const auto v = levels_of(m.as<Measure1D>(), size);
        r.images.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(size)));
      }
      pair = pairwise(r);
      spr = spread(r);
      return;
    }
    case Family::Grid: {
      const auto& g = bary.as<GridDensity>();
      if (g.dim() == 1) {
        std::vector<Measure1D> exact;
        for (const auto& m : inputs) exact.push_back(to_measure1d(m.as<GridDensity>()));
        std::vector<const QuantileFunction*> fns;
        for (const auto& e : exact) fns.push_back(&e.quantile_function());
        quantile_terms(fns, pair, spr);
        return;
      }
      Routes r{Vector::Zero(0), {}};
      std::vector<std::size_t> cells;
      for (std::size_t c = 0; c < g.num_cells(); ++c)
        if (g.values()[c] > 0.0) cells.push_back(c);
      r.weights.resize(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t k = 0; k < cells.size(); ++k) r.weights[static_cast<Eigen::Index>(k)] = g.mass(cells[k]);
      for (const auto& t : maps) {
        Matrix im(static_cast<Eigen::Index>(cells.size()), g.dim());
        for (std::size_t k = 0; k < cells.size(); ++k)
          im.row(static_cast<Eigen::Index>(k)) = t(g.cell_center(cells[k])).transpose();
        r.images.push_back(std::move(im));
      }
      pair = pairwise(r);
      spr = spread(r);
      return;
    }
    case Family::Gaussian: {
      const Matrix& cov = bary.as<GaussianMeasure>().covariance();
      const int d = bary.dim();
      Matrix mean = Matrix::Zero(d, d);
      for (const auto& t : maps) mean += t.as<LinearMap>().matrix();
      mean /= static_cast<double>(n);
      pair = spr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Matrix& ti = maps[i].as<LinearMap>().matrix();
        spr += ((ti - mean) * cov * (ti - mean).transpose()).trace();
        for (std::size_t j = i + 1; j < n; ++j) {
          const Matrix diff = ti - maps[j].as<LinearMap>().matrix();
          pair += (diff * cov * diff.transpose()).trace();
        }
      }
      spr /= 2.0 * static_cast<double>(n);
      return;
    }
    case Family::Product: {
      pair = spr = 0.0;
      const auto& factors = bary.as<ProductMeasure>().factors;
      for (std::size_t f = 0; f < factors.size(); ++f) {
        std::vector<Measure> fi;
        std::vector<TransportMap> fm;
        for (std::size_t i = 0; i < n; ++i) {
          fi.push_back(inputs[i].as<ProductMeasure>().factors[f]);
          fm.push_back(maps[i].as<ProductMap>().factors[f]);
        }
        double p = 0.0, s = 0.0;
        terms(factors[f], fi, fm, p, s);
        pair += p;
        spr += s;
      }
      return;
    }
    case Family::Discrete: {
      // Atoms of the barycenter are routed independently through each plan,
      // so split atoms contribute their conditional expectations.
      const auto& z = bary.as<DiscreteMeasure>();
      std::vector<Coupling> plans;
      for (const auto& m : inputs) plans.push_back(optimal_coupling_discrete(z, m.as<DiscreteMeasure>()));
      Routes r{z.weights(), {}};
      for (const auto& t : maps) r.images.push_back(t.as<Assignment>().image());
      spr = spread(r);
      pair = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          for (const auto& a : plans[i].plan)
            for (const auto& b : plans[j].plan) {
              if (a.source != b.source) continue;
              const double wk = z.weights()[static_cast<Eigen::Index>(a.source)];
              const auto ya = plans[i].target.points().row(static_cast<Eigen::Index>(a.target));
              const auto yb = plans[j].target.points().row(static_cast<Eigen::Index>(b.target));
              pair += a.mass * b.mass / wk * (ya - yb).squaredNorm();
            }
      return;
    }
  }
}

// Tiny discrete families: solve the multi-marginal problem as a linear program
// and take the mean of each tuple in its support. This is an exact Frechet
// mean, so descent started there stays put.
constexpr std::size_t kMaxTuples = 4096;

std::optional<Measure> exact_discrete_start(std::span<const Measure> inputs) {
  std::vector<const DiscreteMeasure*> d;
  std::size_t tuples = 1, rows = 0;
  for (const auto& m : inputs) {
    d.push_back(&m.as<DiscreteMeasure>());
    tuples *= d.back()->size();
    rows += d.back()->size();
    if (tuples > kMaxTuples) return std::nullopt;
  }
  const std::size_t n = d.size();
  const int dim = d[0]->dim();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(tuples));
  Vector b(static_cast<Eigen::Index>(rows)), c(static_cast<Eigen::Index>(tuples));
  Matrix means(static_cast<Eigen::Index>(tuples), dim);
  std::vector<std::size_t> offset(n, 0);
  for (std::size_t i = 1; i < n; ++i) offset[i] = offset[i - 1] + d[i - 1]->size();
  for (std::size_t i = 0; i < n; ++i) b.segment(static_cast<Eigen::Index>(offset[i]), d[i]->weights().size()) = d[i]->weights();
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t t = 0; t < tuples; ++t) {
    Vector mean = Vector::Zero(dim);
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto yi = d[i]->points().row(static_cast<Eigen::Index>(idx[i]));
      mean += yi.transpose();
      a(static_cast<Eigen::Index>(offset[i] + idx[i]), static_cast<Eigen::Index>(t)) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) cost += (yi - d[j]->points().row(static_cast<Eigen::Index>(idx[j]))).squaredNorm();
    }
    means.row(static_cast<Eigen::Index>(t)) = mean.transpose() / static_cast<double>(n);
    c[static_cast<Eigen::Index>(t)] = cost;
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < d[i]->size()) break;
      idx[i] = 0;
    }
  }
  const auto sol = solvers::simplex(a, b, c);
  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < sol.x.size(); ++t)
    if (sol.x[t] > 1e-14) support.push_back(t);
  Matrix pts(static_cast<Eigen::Index>(support.size()), dim);
  Vector w(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = means.row(support[k]);
    w[static_cast<Eigen::Index>(k)] = sol.x[support[k]];
  }
  return Measure(DiscreteMeasure::merged(pts, w / w.sum()));
}

}  // namespace

Multicoupling multicoupling(std::span<const Measure> inputs, const DescentConfig& cfg) {
  require(inputs.size() >= 2, ErrorKind::Domain, "multicoupling needs at least two inputs");
  std::vector<std::optional<Measure>> starts{cfg.initial};
  if (inputs.front().family() == Family::Discrete && !cfg.initial) {
    starts.clear();
    for (const auto& m : inputs) starts.emplace_back(m);
    bool all_discrete = true;
    for (const auto& m : inputs) all_discrete = all_discrete && m.family() == Family::Discrete;
    if (all_discrete)
      if (auto exact = exact_discrete_start(inputs)) starts.push_back(std::move(exact));
  }
  std::optional<Multicoupling> best;
  for (const auto& s : starts) {
    DescentConfig c = cfg;
    c.initial = s;
    BarycenterResult r = barycenter(inputs, c);
    Multicoupling mc{r.barycenter, std::move(r.maps), 0.0, 0.0, 0.0, std::move(r.trace), 1};
    terms(mc.barycenter, inputs, mc.maps, mc.pairwise_cost, mc.mean_spread);
    mc.objective = frechet_objective(mc.barycenter, inputs);
    if (!best || mc.pairwise_cost < best->pairwise_cost) best = std::move(mc);
  }
  best->starts = static_cast<int>(starts.size());
  return *best;
}

TransportMap invert_map(const TransportMap& t) {
  switch (t.kind()) {
    case MapKind::Monotone1D: {
      const auto& m = t.as<Monotone1D>();
      require(m.x().size() >= 2 && m.y().front() < m.y().back(), ErrorKind::Domain, "constant map has no inverse");
      return Monotone1D::from_knots(m.y(), m.x());
    }
    case MapKind::Linear: {
      const auto& l = t.as<LinearMap>();
      Eigen::JacobiSVD<Matrix> svd(l.matrix());
      const double smallest = svd.singularValues().minCoeff();
      if (!(smallest > 1e-14 * std::max(1.0, svd.singularValues().maxCoeff())))
        throw ConditioningError("linear map is singular", smallest);
      Matrix inv = l.matrix().inverse();
      if (l.brenier()) return LinearMap(0.5 * (inv + inv.transpose()));
      return LinearMap::general(std::move(inv));
    }
    case MapKind::Product: {
      std::vector<TransportMap> f;
      for (const auto& x : t.as<ProductMap>().factors) f.push_back(invert_map(x));
      return ProductMap(std::move(f));
    }
    case MapKind::Assignment: {
      const auto& a = t.as<Assignment>();
      require(a.is_bijection(), ErrorKind::Domain, "assignment is not a bijection");
      std::vector<int> inv(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) inv[static_cast<std::size_t>(a.target_index()[i])] = static_cast<int>(i);
      Matrix src(a.image().rows(), a.dim()), img(a.image().rows(), a.dim());
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(a.target_index()[i]);
        src.row(k) = a.image().row(static_cast<Eigen::Index>(i));
        img.row(k) = a.source().row(static_cast<Eigen::Index>(i));
      }
      std::vector<int> back(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) back[k] = inv[k];
      return Assignment(std::move(src), std::move(img), std::move(back));
    }
    case MapKind::Grid: break;
  }
  fail(ErrorKind::Representation, "grid maps have no exact inverse");
}

PointPattern register_pattern(const PointPattern& p, const TransportMap& t_inv) {
  require(t_inv.dim() == p.dim(), ErrorKind::Shape, "map and pattern differ in dimension");
  Matrix out(p.points().rows(), p.dim());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = t_inv(p.points().row(i).transpose()).transpose();
  return PointPattern::unchecked(p.window(), std::move(out));
}

double registration_error(const TransportMap& est, const TransportMap& truth, const Matrix& probes) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    const Vector x = probes.row(i).transpose();
    worst = std::max(worst, (est(x) - truth(x)).norm());
  }
  return worst;
}

Matrix probe_grid(const Compactum& window, int per_axis, double shrink) {
  require(per_axis >= 1, ErrorKind::Domain, "probe grid needs at least one point per axis");
  const Compactum inner = window.shrunk(shrink);
  const int d = window.dim();
  Eigen::Index total = 1;
  for (int a = 0; a < d; ++a) total *= per_axis;
  Matrix out(total, d);
  for (Eigen::Index r = 0; r < total; ++r) {
    Eigen::Index rest = r;
    for (int a = d - 1; a >= 0; --a) {
      const auto k = static_cast<double>(rest % per_axis);
      rest /= per_axis;
      const double frac = per_axis == 1 ? 0.5 : k / (per_axis - 1);
      out(r, a) = inner.lower()[a] + frac * (inner.upper()[a] - inner.lower()[a]);
    }
  }
  return out;
}

}  // namespace wassbary
