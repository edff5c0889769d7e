#include <algorithm>
#include <cmath>
#include <numeric>

#include "wassbary/error.hpp"
#include "wassbary/kernels.hpp"
#include "wassbary/parallel.hpp"
#include "wassbary/solvers.hpp"
#include "wassbary/transport.hpp"

namespace wassbary {

Matrix Coupling::dense() const {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(source.size()), static_cast<Eigen::Index>(target.size()));
  for (const auto& e : plan) p(static_cast<Eigen::Index>(e.source), static_cast<Eigen::Index>(e.target)) += e.mass;
  return p;
}

double Coupling::marginal_error() const {
  Vector rows = Vector::Zero(static_cast<Eigen::Index>(source.size()));
  Vector cols = Vector::Zero(static_cast<Eigen::Index>(target.size()));
  for (const auto& e : plan) {
    rows[static_cast<Eigen::Index>(e.source)] += e.mass;
    cols[static_cast<Eigen::Index>(e.target)] += e.mass;
  }
  return std::max((rows - source.weights()).cwiseAbs().maxCoeff(), (cols - target.weights()).cwiseAbs().maxCoeff());
}

namespace {

constexpr std::size_t kHungarianLimit = 1024;

// C(i, j) = |x_i - y_j|^2, one column per target point.
Matrix cost_matrix(const Matrix& x, const Matrix& y) {
  const Eigen::Index m = x.rows(), n = y.rows();
  Matrix xt = x;  // column-major: each column is one axis
  std::vector<const double*> axes(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index a = 0; a < x.cols(); ++a) axes[static_cast<std::size_t>(a)] = xt.col(a).data();
  Matrix c(m, n);
  std::vector<double> yj(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index a = 0; a < y.cols(); ++a) yj[static_cast<std::size_t>(a)] = y(j, a);
    kernels::squared_euclidean_row(axes, static_cast<std::size_t>(m), yj,
                                   std::span<double>(c.col(j).data(), static_cast<std::size_t>(m)));
  }
  return c;
}

std::vector<std::size_t> order_by_first_axis(const Matrix& p) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(p.rows()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return p(static_cast<Eigen::Index>(a), 0) < p(static_cast<Eigen::Index>(b), 0);
  });
  return idx;
}

// Monotone (north-west corner) coupling of sorted atoms; optimal on the line.
std::vector<PlanEntry> sorted_coupling(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  auto ia = order_by_first_axis(a.points());
  auto ib = order_by_first_axis(b.points());
  const double scale = b.weights().sum() > 0.0 ? a.weights().sum() / b.weights().sum() : 1.0;
  const auto wa = [&](std::size_t k) { return a.weights()[static_cast<Eigen::Index>(ia[k])]; };
  const auto wb = [&](std::size_t k) { return b.weights()[static_cast<Eigen::Index>(ib[k])] * scale; };
  std::vector<PlanEntry> plan;
  std::size_t p = 0, q = 0;
  double ra = wa(0), rb = wb(0);
  for (;;) {
    const double t = std::min(ra, rb);
    if (t > 0.0) plan.push_back({ia[p], ib[q], t});
    ra -= t;
    rb -= t;
    const bool last_a = p + 1 == ia.size(), last_b = q + 1 == ib.size();
    if (last_a && last_b) break;
    if (last_b || (!last_a && ra <= rb)) {
      ra = wa(++p);
    } else {
      rb = wb(++q);
    }
  }
  std::sort(plan.begin(), plan.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return x.source != y.source ? x.source < y.source : x.target < y.target;
  });
  return plan;
}

double plan_cost(const std::vector<PlanEntry>& plan, const Matrix& x, const Matrix& y) {
  double c = 0.0;
  for (const auto& e : plan)
    c += e.mass * (x.row(static_cast<Eigen::Index>(e.source)) - y.row(static_cast<Eigen::Index>(e.target))).squaredNorm();
  return c;
}

}  // namespace

Coupling optimal_coupling_discrete(const DiscreteMeasure& src, const DiscreteMeasure& dst,
                                   const DiscreteSolverOptions& options) {
  require(src.dim() == dst.dim(), ErrorKind::Shape, "discrete measures differ in dimension");
  Coupling out{src, dst, {}, 0.0};
  if (src.dim() == 1 && !options.force_network_simplex) {
    out.plan = sorted_coupling(src, dst);
    out.cost = plan_cost(out.plan, src.points(), dst.points());
    return out;
  }
  require(src.size() <= options.max_points && dst.size() <= options.max_points, ErrorKind::Capacity,
          "discrete transport limited to " + std::to_string(options.max_points) + " support points per measure");
  const Matrix c = cost_matrix(src.points(), dst.points());
  if (!options.force_network_simplex && src.size() == dst.size() && src.size() <= kHungarianLimit && src.uniform() &&
      dst.uniform()) {
    const auto match = solvers::hungarian(c);
    const double w = 1.0 / static_cast<double>(src.size());
    for (std::size_t i = 0; i < match.size(); ++i) {
      out.plan.push_back({i, static_cast<std::size_t>(match[i]), w});
      out.cost += w * c(static_cast<Eigen::Index>(i), match[i]);
    }
    return out;
  }
  auto sol = solvers::network_simplex(src.weights(), dst.weights(), c);
  out.plan = std::move(sol.plan);
  out.cost = sol.cost;
  return out;
}

Assignment barycentric_projection(const Coupling& coupling) {
  const auto& x = coupling.source.points();
  const auto& y = coupling.target.points();
  Matrix image = Matrix::Zero(x.rows(), x.cols());
  Vector mass = Vector::Zero(x.rows());
  std::vector<int> target(static_cast<std::size_t>(x.rows()), -1);
  std::vector<int> count(static_cast<std::size_t>(x.rows()), 0);
  for (const auto& e : coupling.plan) {
    const auto i = static_cast<Eigen::Index>(e.source);
    image.row(i) += e.mass * y.row(static_cast<Eigen::Index>(e.target));
    mass[i] += e.mass;
    target[e.source] = static_cast<int>(e.target);
    ++count[e.source];
  }
  bool single = true;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    require(mass[i] > 0.0, ErrorKind::Domain, "coupling leaves a source atom unmatched");
    if (count[static_cast<std::size_t>(i)] == 1) {
      image.row(i) = y.row(target[static_cast<std::size_t>(i)]);
    } else {
      image.row(i) /= mass[i];
      single = false;
    }
  }
  if (!single) target.clear();
  return Assignment(x, std::move(image), std::move(target));
}

MapAverage discrete_map_average(const DiscreteMeasure& gamma, std::span<const DiscreteMeasure> targets, double tau) {
  require(!targets.empty(), ErrorKind::Domain, "no target measures");
  std::vector<Matrix> images(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    images[k] = barycentric_projection(optimal_coupling_discrete(gamma, targets[k])).image();
  });
  Matrix mean = Matrix::Zero(gamma.points().rows(), gamma.points().cols());
  for (const auto& im : images) mean += im;
  mean /= static_cast<double>(targets.size());
  Matrix next = (1.0 - tau) * gamma.points() + tau * mean;
  if (tau == 1.0) next = mean;
  DiscreteMeasure merged = DiscreteMeasure::merged(next, gamma.weights());
  return {merged, gamma.size() - merged.size()};
}

TransportMap optimal_map(const Measure& src, const Measure& dst) {
  require(src.dim() == dst.dim(), ErrorKind::Shape, "measures differ in dimension");
  require(src.family() == dst.family(), ErrorKind::Representation,
          std::string("no optimal map from ") + std::string(to_string(src.family())) + " to " +
              std::string(to_string(dst.family())) + "; convert explicitly");
  switch (src.family()) {
    case Family::Quantile1D: return optimal_map_1d(src.as<Measure1D>(), dst.as<Measure1D>());
    case Family::Gaussian: return optimal_map_gaussian(src.as<GaussianMeasure>(), dst.as<GaussianMeasure>());
    case Family::Product: return optimal_map_product(src.as<ProductMeasure>(), dst.as<ProductMeasure>());
    case Family::Discrete:
      return barycentric_projection(optimal_coupling_discrete(src.as<DiscreteMeasure>(), dst.as<DiscreteMeasure>()));
    case Family::Grid: {
      const auto& g = src.as<GridDensity>();
      const auto& h = dst.as<GridDensity>();
      if (g.dim() == 1) return optimal_map_1d(to_measure1d(g), to_measure1d(h));
      std::vector<std::size_t> cells;
      for (std::size_t i = 0; i < g.num_cells(); ++i)
        if (g.values()[i] > 0.0) cells.push_back(i);
      const DiscreteMeasure a = to_discrete(g, 0);  // positive cells, in flat order
      const Assignment proj = barycentric_projection(optimal_coupling_discrete(a, to_discrete(h, 0)));
      Matrix disp = Matrix::Zero(static_cast<Eigen::Index>(g.num_cells()), g.dim());
      std::vector<bool> known(g.num_cells(), false);
      for (std::size_t k = 0; k < cells.size(); ++k) {
        disp.row(static_cast<Eigen::Index>(cells[k])) =
            proj.image().row(static_cast<Eigen::Index>(k)) - a.points().row(static_cast<Eigen::Index>(k));
        known[cells[k]] = true;
      }
      return GridMap(g.window(), g.cells_per_axis(), std::move(disp), std::move(known));
    }
  }
  fail(ErrorKind::Representation, "unknown measure family");
}

// ---------------------------------------------------------------- push-forward

namespace {

Measure1D push_1d(const Monotone1D& t, const Measure1D& m) {
  if (m.kind() == Measure1D::Kind::PiecewiseLinear) {
    const auto refined = m.quantile_function().refined(t.x());
    return Measure1D::from_quantile_function(refined.mapped([&](double x) { return t(x); }));
  }
  std::vector<double> v(m.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t(m.values()[i]);
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return m.kind() == Measure1D::Kind::Sample ? Measure1D::from_sample(std::move(v))
                                             : Measure1D::from_quantile_grid(std::move(v));
}

DiscreteMeasure push_discrete(const TransportMap& t, const DiscreteMeasure& m) {
  Matrix p(m.points().rows(), t.dim());
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) = t(m.points().row(i).transpose()).transpose();
  return DiscreteMeasure::merged(p, m.weights());
}

// Deposits each cell's mass at its displaced centre, spread linearly over the
// neighbouring cell centres (cloud-in-cell).
GridDensity push_grid(const GridMap& t, const GridDensity& g) {
  require(t.window() == g.window() && t.cells_per_axis() == g.cells_per_axis(), ErrorKind::Representation,
          "grid map and grid density live on different grids");
  const int d = g.dim();
  std::vector<double> mass(g.num_cells(), 0.0);
  std::vector<int> base(static_cast<std::size_t>(d));
  std::vector<double> frac(static_cast<std::size_t>(d));
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const double mc = g.mass(c);
    if (mc <= 0.0) continue;
    const Vector y = g.cell_center(c) + t.displacement().row(static_cast<Eigen::Index>(c)).transpose();
    for (int a = 0; a < d; ++a) {
      const int n = g.cells_per_axis()[static_cast<std::size_t>(a)];
      double pos = std::clamp((y[a] - g.window().lower()[a]) / g.cell_width(a) - 0.5, 0.0, static_cast<double>(n - 1));
      int b = std::min(static_cast<int>(std::floor(pos)), std::max(n - 2, 0));
      base[static_cast<std::size_t>(a)] = b;
      frac[static_cast<std::size_t>(a)] = n > 1 ? pos - b : 0.0;
    }
    for (int corner = 0; corner < (1 << d); ++corner) {
      double w = mc;
      std::vector<int> idx(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a) {
        const bool up = (corner >> a) & 1;
        const double f = frac[static_cast<std::size_t>(a)];
        w *= up ? f : 1.0 - f;
        idx[static_cast<std::size_t>(a)] =
            std::min(base[static_cast<std::size_t>(a)] + (up ? 1 : 0), g.cells_per_axis()[static_cast<std::size_t>(a)] - 1);
      }
      if (w > 0.0) mass[g.flat_index(idx)] += w;
    }
  }
  return GridDensity::from_masses(g.window(), g.cells_per_axis(), mass);
}

}  // namespace

Measure push_forward(const TransportMap& t, const Measure& m) {
  require(t.dim() == m.dim(), ErrorKind::Representation, "map and measure differ in dimension");
  if (const auto* d = m.get_if<DiscreteMeasure>()) return push_discrete(t, *d);
  switch (t.kind()) {
    case MapKind::Monotone1D:
      if (const auto* q = m.get_if<Measure1D>()) return push_1d(t.as<Monotone1D>(), *q);
      if (const auto* g = m.get_if<GridDensity>()) {
        const auto pushed = push_1d(t.as<Monotone1D>(), to_measure1d(*g));
        return to_grid(pushed, g->window(), g->cells_per_axis()[0]);
      }
      break;
    case MapKind::Linear:
      if (const auto* g = m.get_if<GaussianMeasure>()) {
        const Matrix& a = t.as<LinearMap>().matrix();
        return GaussianMeasure(a * g->covariance() * a.transpose());
      }
      break;
    case MapKind::Product:
      if (const auto* p = m.get_if<ProductMeasure>()) {
        const auto& tf = t.as<ProductMap>().factors;
        require(tf.size() == p->factors.size(), ErrorKind::Representation, "map and measure factor differently");
        std::vector<Measure> out;
        for (std::size_t k = 0; k < tf.size(); ++k) out.push_back(push_forward(tf[k], p->factors[k]));
        return ProductMeasure(std::move(out));
      }
      break;
    case MapKind::Grid:
      if (const auto* g = m.get_if<GridDensity>()) return push_grid(t.as<GridMap>(), *g);
      break;
    case MapKind::Assignment: break;
  }
  fail(ErrorKind::Representation, "this map cannot push forward a " + std::string(to_string(m.family())) + " measure");
}

}  // namespace wassbary
