#include "wassbary/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "wassbary/error.hpp"
#include "wassbary/kernels.hpp"
#include "wassbary/parallel.hpp"

namespace wassbary {

void DescentConfig::validate() const {
  require(tolerance > 0.0, ErrorKind::Domain, "tolerance must be positive");
  require(max_iterations > 0, ErrorKind::Domain, "max_iterations must be positive");
  require(step >= 0.0 && step <= 1.0, ErrorKind::Domain, "step must lie in [0, 1]");
  require(stagnation >= 0.0, ErrorKind::Domain, "stagnation threshold must be nonnegative");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Gradient: return "gradient";
    case StopReason::Stagnation: return "stagnation";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

// Everything one iteration needs, computed from a single set of pairwise solves.
struct Evaluation {
  double objective = 0.0;
  double grad_sq = 0.0;
  std::function<Measure(double)> advance;
  std::function<std::vector<TransportMap>()> maps;
  std::size_t collisions = 0;
};

Evaluation evaluate(const Measure& gamma, std::span<const Measure> inputs);

void check_family(const Measure& gamma, std::span<const Measure> inputs) {
  require(!inputs.empty(), ErrorKind::Domain, "no input measures");
  for (const auto& m : inputs) {
    require(m.dim() == gamma.dim(), ErrorKind::Shape, "input measures differ in dimension");
    require(m.family() == gamma.family(), ErrorKind::Representation,
            "mixed measure families: " + std::string(to_string(gamma.family())) + " and " +
                std::string(to_string(m.family())) + "; convert explicitly");
  }
}

// ---------------------------------------------------------------- 1D

// Quantile values of m at the grid levels of a size-M grid.
std::vector<double> values_at_levels(const Measure1D& m, std::size_t size) {
  if (m.kind() != Measure1D::Kind::PiecewiseLinear && m.values().size() == size) return m.values();
  std::vector<double> v(size);
  for (std::size_t k = 0; k < size; ++k) v[k] = quantile(m, Measure1D::level(k, size));
  for (std::size_t k = 1; k < size; ++k) v[k] = std::max(v[k], v[k - 1]);
  return v;
}

Measure1D with_values(const Measure1D& like, std::vector<double> v) {
  for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::max(v[k], v[k - 1]);
  return like.kind() == Measure1D::Kind::Sample ? Measure1D::from_sample(std::move(v))
                                                : Measure1D::from_quantile_grid(std::move(v));
}

Evaluation evaluate_grid_1d(const Measure1D& gamma, std::span<const Measure> inputs) {
  const std::size_t size = gamma.values().size();
  const double n = static_cast<double>(inputs.size());
  auto vals = std::make_shared<std::vector<std::vector<double>>>(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) (*vals)[i] = values_at_levels(inputs[i].as<Measure1D>(), size);
  std::vector<const double*> rows;
  for (const auto& v : *vals) rows.push_back(v.data());
  auto mean = std::make_shared<std::vector<double>>(size);
  kernels::mean_rows(rows, *mean);
  const auto& g = gamma.values();
  Evaluation e;
  for (const auto& v : *vals) e.objective += kernels::squared_distance(v, g);
  e.objective /= 2.0 * n * static_cast<double>(size);
  e.grad_sq = kernels::squared_distance(*mean, g) / static_cast<double>(size);
  e.advance = [gamma, mean](double tau) -> Measure {
    if (tau == 1.0) return with_values(gamma, *mean);
    std::vector<double> out(mean->size());
    kernels::blend(gamma.values(), *mean, tau, out);
    return with_values(gamma, std::move(out));
  };
  e.maps = [gamma, vals] {
    std::vector<TransportMap> maps;
    for (const auto& v : *vals) maps.push_back(Monotone1D::from_knots(gamma.values(), v));
    return maps;
  };
  return e;
}

Evaluation evaluate_exact_1d(const Measure1D& gamma, std::span<const Measure> inputs) {
  std::vector<const QuantileFunction*> fns;
  for (const auto& m : inputs) fns.push_back(&m.as<Measure1D>().quantile_function());
  const std::vector<double> w(fns.size(), 1.0 / static_cast<double>(fns.size()));
  auto mean = std::make_shared<QuantileFunction>(combine(fns, w));
  Evaluation e;
  for (const auto* f : fns) e.objective += integrated_squared_difference(gamma.quantile_function(), *f);
  e.objective /= 2.0 * static_cast<double>(fns.size());
  e.grad_sq = integrated_squared_difference(*mean, gamma.quantile_function());
  e.advance = [gamma, mean](double tau) -> Measure {
    if (tau == 1.0) return Measure1D::from_quantile_function(*mean);
    const QuantileFunction* pair[] = {&gamma.quantile_function(), mean.get()};
    const double wt[] = {1.0 - tau, tau};
    return Measure1D::from_quantile_function(combine(pair, wt));
  };
  std::vector<Measure1D> targets;
  for (const auto& m : inputs) targets.push_back(m.as<Measure1D>());
  e.maps = [gamma, targets] {
    std::vector<TransportMap> maps;
    for (const auto& t : targets) maps.push_back(optimal_map_1d(gamma, t));
    return maps;
  };
  return e;
}

Evaluation evaluate_1d(const Measure1D& gamma, std::span<const Measure> inputs) {
  if (gamma.kind() != Measure1D::Kind::PiecewiseLinear) return evaluate_grid_1d(gamma, inputs);
  return evaluate_exact_1d(gamma, inputs);
}

// ---------------------------------------------------------------- Gaussian

Evaluation evaluate_gaussian(const GaussianMeasure& gamma, std::span<const Measure> inputs) {
  const int d = gamma.dim();
  std::vector<Matrix> maps(inputs.size());
  std::vector<double> dist(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    const auto& mu = inputs[i].as<GaussianMeasure>();
    maps[i] = optimal_map_gaussian(gamma, mu).matrix();
    dist[i] = wasserstein2_squared(gamma, mu);
  });
  Matrix t = Matrix::Zero(d, d);
  for (const auto& m : maps) t += m;
  t /= static_cast<double>(inputs.size());
  const Matrix id = Matrix::Identity(d, d);
  const Matrix diff = t - id;
  Evaluation e;
  for (double v : dist) e.objective += v;
  e.objective /= 2.0 * static_cast<double>(inputs.size());
  e.grad_sq = std::max((diff * gamma.covariance() * diff.transpose()).trace(), 0.0);
  e.advance = [gamma, t, id](double tau) -> Measure {
    const Matrix a = tau == 1.0 ? t : Matrix((1.0 - tau) * id + tau * t);
    return GaussianMeasure(a * gamma.covariance() * a);
  };
  e.maps = [maps] {
    std::vector<TransportMap> out;
    for (const auto& m : maps) out.push_back(LinearMap(m));
    return out;
  };
  return e;
}

// ---------------------------------------------------------------- Product

Evaluation evaluate_product(const ProductMeasure& gamma, std::span<const Measure> inputs) {
  const std::size_t k = gamma.factors.size();
  std::vector<Evaluation> parts;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Measure> factor_inputs;
    for (const auto& m : inputs) {
      const auto& p = m.as<ProductMeasure>();
      require(p.factors.size() == k, ErrorKind::Representation, "product inputs factor differently");
      factor_inputs.push_back(p.factors[f]);
    }
    check_family(gamma.factors[f], factor_inputs);
    parts.push_back(evaluate(gamma.factors[f], factor_inputs));
  }
  Evaluation e;
  for (const auto& p : parts) {
    e.objective += p.objective;
    e.grad_sq += p.grad_sq;
    e.collisions += p.collisions;
  }
  e.advance = [parts](double tau) -> Measure {
    std::vector<Measure> out;
    for (const auto& p : parts) out.push_back(p.advance(tau));
    return ProductMeasure(std::move(out));
  };
  const std::size_t n = inputs.size();
  e.maps = [parts, n] {
    std::vector<std::vector<TransportMap>> per_factor;
    for (const auto& p : parts) per_factor.push_back(p.maps());
    std::vector<TransportMap> out;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<TransportMap> f;
      for (const auto& pf : per_factor) f.push_back(pf[i]);
      out.push_back(ProductMap(std::move(f)));
    }
    return out;
  };
  return e;
}

// ---------------------------------------------------------------- Discrete / grid

struct Projections {
  std::vector<Assignment> maps;
  Matrix mean;
  double objective = 0.0;
  double grad_sq = 0.0;
};

Projections project(const DiscreteMeasure& gamma, const std::vector<DiscreteMeasure>& targets) {
  std::vector<Coupling> couplings(targets.size(), Coupling{gamma, gamma, {}, 0.0});
  parallel_for(targets.size(), [&](std::size_t i) { couplings[i] = optimal_coupling_discrete(gamma, targets[i]); });
  Projections p;
  p.mean = Matrix::Zero(gamma.points().rows(), gamma.points().cols());
  for (const auto& c : couplings) {
    p.maps.push_back(barycentric_projection(c));
    p.mean += p.maps.back().image();
    p.objective += c.cost;
  }
  p.mean /= static_cast<double>(targets.size());
  p.objective /= 2.0 * static_cast<double>(targets.size());
  p.grad_sq = gamma.weights().dot((p.mean - gamma.points()).rowwise().squaredNorm());
  return p;
}

Evaluation evaluate_discrete(const DiscreteMeasure& gamma, std::span<const Measure> inputs) {
  std::vector<DiscreteMeasure> targets;
  for (const auto& m : inputs) targets.push_back(m.as<DiscreteMeasure>());
  auto p = std::make_shared<Projections>(project(gamma, targets));
  Evaluation e;
  e.objective = p->objective;
  e.grad_sq = p->grad_sq;
  e.advance = [gamma, p](double tau) -> Measure {
    const Matrix next = tau == 1.0 ? p->mean : Matrix((1.0 - tau) * gamma.points() + tau * p->mean);
    return DiscreteMeasure::merged(next, gamma.weights());
  };
  e.maps = [p] { return std::vector<TransportMap>(p->maps.begin(), p->maps.end()); };
  return e;
}

Evaluation evaluate_grid(const GridDensity& gamma, std::span<const Measure> inputs) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < gamma.num_cells(); ++c)
    if (gamma.values()[c] > 0.0) cells.push_back(c);
  const DiscreteMeasure support = to_discrete(gamma, 0);
  std::vector<DiscreteMeasure> targets;
  for (const auto& m : inputs) targets.push_back(to_discrete(m, 0));
  auto p = std::make_shared<Projections>(project(support, targets));
  // Empty cells are filled in only for maps handed out; the step ignores them.
  auto field = [gamma, cells, support](const Matrix& image, double tau, bool fill) {
    Matrix disp = Matrix::Zero(static_cast<Eigen::Index>(gamma.num_cells()), gamma.dim());
    std::vector<bool> known(fill ? gamma.num_cells() : 0, false);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      disp.row(static_cast<Eigen::Index>(cells[k])) = tau * (image.row(r) - support.points().row(r));
      if (fill) known[cells[k]] = true;
    }
    return GridMap(gamma.window(), gamma.cells_per_axis(), std::move(disp), std::move(known));
  };
  Evaluation e;
  e.objective = p->objective;
  e.grad_sq = p->grad_sq;
  e.advance = [gamma, p, field](double tau) -> Measure {
    return push_forward(field(p->mean, tau, false), gamma);
  };
  e.maps = [p, field] {
    std::vector<TransportMap> out;
    for (const auto& a : p->maps) out.push_back(field(a.image(), 1.0, true));
    return out;
  };
  return e;
}

Evaluation evaluate(const Measure& gamma, std::span<const Measure> inputs) {
  check_family(gamma, inputs);
  switch (gamma.family()) {
    case Family::Quantile1D: return evaluate_1d(gamma.as<Measure1D>(), inputs);
    case Family::Gaussian: return evaluate_gaussian(gamma.as<GaussianMeasure>(), inputs);
    case Family::Product: return evaluate_product(gamma.as<ProductMeasure>(), inputs);
    case Family::Discrete: return evaluate_discrete(gamma.as<DiscreteMeasure>(), inputs);
    case Family::Grid: return evaluate_grid(gamma.as<GridDensity>(), inputs);
  }
  fail(ErrorKind::Representation, "unknown measure family");
}

// One-dimensional grids are handled through their exact quantile functions.
bool is_grid_1d(const Measure& m) {
  const auto* g = m.get_if<GridDensity>();
  return g && g->dim() == 1;
}

Measure exact_1d(const Measure& m) { return is_grid_1d(m) ? Measure(to_measure1d(m.as<GridDensity>())) : m; }

std::vector<Measure> exact_1d(std::span<const Measure> inputs) {
  std::vector<Measure> out;
  for (const auto& m : inputs) out.push_back(exact_1d(m));
  return out;
}

bool has_formal_gradient(const Measure& m) {
  if (m.family() == Family::Discrete) return true;
  if (const auto* p = m.get_if<ProductMeasure>())
    return std::any_of(p->factors.begin(), p->factors.end(), has_formal_gradient);
  return false;
}

}  // namespace

double frechet_objective(const Measure& gamma, std::span<const Measure> inputs) {
  check_family(gamma, inputs);
  double s = 0.0;
  for (const auto& m : inputs) s += wasserstein2_squared(gamma, m);
  return s / (2.0 * static_cast<double>(inputs.size()));
}

double frechet_gradient_norm_sq(const Measure& gamma, std::span<const Measure> inputs) {
  check_family(gamma, inputs);
  if (is_grid_1d(gamma)) return evaluate(exact_1d(gamma), exact_1d(inputs)).grad_sq;
  return evaluate(gamma, inputs).grad_sq;
}

double karcher_residual(const Measure& gamma, std::span<const Measure> inputs) {
  return std::sqrt(frechet_gradient_norm_sq(gamma, inputs));
}

Measure procrustes_step(const Measure& gamma, std::span<const Measure> inputs, double tau) {
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::Domain, "step must lie in [0, 1]");
  check_family(gamma, inputs);
  if (tau == 0.0) return gamma;
  if (is_grid_1d(gamma)) {
    const auto& g = gamma.as<GridDensity>();
    const Measure next = evaluate(exact_1d(gamma), exact_1d(inputs)).advance(tau);
    return to_grid(next.as<Measure1D>(), g.window(), g.cells_per_axis()[0]);
  }
  return evaluate(gamma, inputs).advance(tau);
}

BarycenterResult barycenter(std::span<const Measure> inputs, const DescentConfig& cfg) {
  cfg.validate();
  require(!inputs.empty(), ErrorKind::Domain, "no input measures");
  const Measure start = cfg.initial ? *cfg.initial : inputs.front();
  check_family(start, inputs);

  const bool grid_1d = is_grid_1d(start);
  const std::vector<Measure> work_inputs = grid_1d ? exact_1d(inputs) : std::vector<Measure>(inputs.begin(), inputs.end());
  Measure gamma = exact_1d(start);

  DescentTrace trace;
  trace.formal_gradient = has_formal_gradient(start);
  if (cfg.observer) cfg.observer(0, gamma);
  Evaluation eval = evaluate(gamma, work_inputs);
  trace.records.push_back({eval.objective, eval.grad_sq, 0.0});
  const double tol_sq = cfg.tolerance * cfg.tolerance;
  trace.stop = StopReason::MaxIterations;
  if (eval.grad_sq < tol_sq) {
    trace.stop = StopReason::Gradient;
  } else {
    for (int j = 0; j < cfg.max_iterations; ++j) {
      Measure next = eval.advance(cfg.step);
      if (const auto* d = gamma.get_if<DiscreteMeasure>())
        trace.collisions += d->size() - next.as<DiscreteMeasure>().size();
      gamma = std::move(next);
      ++trace.iterations_used;
      if (cfg.observer) cfg.observer(trace.iterations_used, gamma);
      const double previous = eval.objective;
      eval = evaluate(gamma, work_inputs);
      const double delta = eval.objective - previous;
      trace.records.push_back({eval.objective, eval.grad_sq, delta});
      if (eval.grad_sq < tol_sq) {
        trace.stop = StopReason::Gradient;
        break;
      }
      if (std::abs(delta) < cfg.stagnation) {
        trace.stop = StopReason::Stagnation;
        break;
      }
    }
  }
  trace.converged = eval.grad_sq < tol_sq;
  std::vector<TransportMap> maps = eval.maps();
  if (grid_1d) {
    const auto& g0 = start.as<GridDensity>();
    return {to_grid(gamma.as<Measure1D>(), g0.window(), g0.cells_per_axis()[0]), std::move(trace), std::move(maps)};
  }
  return {std::move(gamma), std::move(trace), std::move(maps)};
}

double density_bound(std::span<const GridDensity> inputs) {
  require(!inputs.empty(), ErrorKind::Domain, "no input densities");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& g : inputs) {
    require(g.window() == inputs.front().window() && g.cells_per_axis() == inputs.front().cells_per_axis(),
            ErrorKind::Representation, "density bound needs a common grid");
    lo = std::min(lo, g.sup());
    hi = std::max(hi, g.sup());
  }
  const double n = static_cast<double>(inputs.size());
  const int d = inputs.front().dim();
  return std::min(std::pow(n, d - 1) * hi, std::pow(n, d) * lo);
}

double sup_density(const Measure& m) {
  if (const auto* g = m.get_if<GridDensity>()) return g->sup();
  if (const auto* q = m.get_if<Measure1D>()) return q->quantile_function().sup_density();
  fail(ErrorKind::Representation, "measure has no tabulated density");
}

}  // namespace wassbary
