#include <algorithm>
#include <cmath>
#include <limits>

#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/parallel.hpp"
#include "wassbary/registration.hpp"

namespace wassbary {

void ExperimentDesign::validate() const {
  require(!n_grid.empty() && n_grid.size() == tau_grid.size(), ErrorKind::Domain,
          "design needs matching n and tau lists");
  require(replicates >= 1, ErrorKind::Domain, "design needs at least one replicate");
  require(dim >= 1, ErrorKind::Domain, "dimension must be positive");
  require(static_cast<bool>(bandwidth_rule), ErrorKind::Domain, "design needs a bandwidth rule");
  for (std::size_t c = 0; c < n_grid.size(); ++c) {
    require(n_grid[c] >= 1 && tau_grid[c] > 0.0, ErrorKind::Domain, "design cells need n >= 1 and tau > 0");
    if (c > 0) {
      const double prev = tau_grid[c - 1] / std::log(std::max<double>(static_cast<double>(n_grid[c - 1]), 2.0));
      const double cur = tau_grid[c] / std::log(std::max<double>(static_cast<double>(n_grid[c]), 2.0));
      require(cur > prev, ErrorKind::Domain, "tau / log n must increase along the design");
    }
  }
  warp.validate();
  descent.validate();
}

namespace {

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double pattern_distance(const PointPattern& a, const PointPattern& b) {
  if (a.dim() == 1) {
    std::vector<double> x(a.points().data(), a.points().data() + a.size());
    std::vector<double> y(b.points().data(), b.points().data() + b.size());
    return wasserstein2(Measure1D::from_sample(std::move(x)), Measure1D::from_sample(std::move(y)));
  }
  return wasserstein2(a.empirical(), b.empirical());
}

ExperimentRow run_cell(const ExperimentDesign& design, const GridDensity& truth, std::size_t cell, int replicate) {
  ExperimentRow row;
  row.n = design.n_grid[cell];
  row.tau = design.tau_grid[cell];
  row.replicate = replicate;
  const Compactum window = truth.window();
  const int d = window.dim();
  const int cells = design.cells > 0 ? design.cells : default_cells(d);
  const std::vector<int> grid(static_cast<std::size_t>(d), cells);
  row.sigma = design.bandwidth_rule(row.tau, d);
  const std::uint64_t base =
      derive_seed(derive_seed(design.seed, static_cast<std::uint64_t>(replicate)), 1000 + cell);

  std::vector<WarpMap> warps;
  std::vector<PointPattern> originals, observed;
  for (std::size_t i = 0; i < row.n; ++i) {
    const std::uint64_t s = derive_seed(base, i);
    warps.push_back(sample_warp(window, design.warp, derive_seed(s, 0)));
    originals.push_back(sample_poisson(truth, row.tau, window, derive_seed(s, 1)));
    Matrix moved = register_pattern(originals.back(), warps.back().forward).points();
    for (Eigen::Index r = 0; r < moved.rows(); ++r) moved.row(r) = window.clamp(moved.row(r).transpose()).transpose();
    observed.emplace_back(window, std::move(moved));
  }
  KernelSpec spec;
  spec.bandwidth = row.sigma;
  PopulationEstimate est = estimate_population(observed, spec, grid, design.descent);
  row.d_lambda = wasserstein2(est.lambda_hat, truth);
  row.iters = est.trace.iterations_used;
  row.converged = est.trace.converged;

  const Matrix probes = probe_grid(window, design.probes_per_axis, 0.1);
  std::vector<double> tinv, t, reg;
  for (std::size_t i = 0; i < row.n; ++i) {
    t.push_back(registration_error(est.maps[i], warps[i].forward, probes));
    if (est.inverses.empty()) continue;
    tinv.push_back(registration_error(est.inverses[i], warps[i].inverse, probes));
    if (!observed[i].empty())
      reg.push_back(pattern_distance(register_pattern(observed[i], est.inverses[i]), originals[i]));
  }
  row.sup_T_err = median(t);
  row.sup_Tinv_err = median(tinv);
  row.reg_dist = median(reg);
  if (est.inverses.empty()) row.status = "no_inverse";
  return row;
}

}  // namespace

std::vector<ExperimentRow> run_consistency_experiment(const ExperimentDesign& design) {
  design.validate();
  const Compactum window = Compactum::unit(design.dim);
  const GridDensity truth = reference_intensity(window, design.dim == 1 ? design.truth_cells : default_cells(design.dim));
  const std::size_t cells = design.n_grid.size();
  const std::size_t tasks = cells * static_cast<std::size_t>(design.replicates);
  std::vector<ExperimentRow> rows(tasks);
  parallel_for(tasks, [&](std::size_t k) {
    const std::size_t cell = k % cells;
    const int rep = static_cast<int>(k / cells);
    try {
      rows[k] = run_cell(design, truth, cell, rep);
    } catch (const std::exception& e) {
      ExperimentRow r;
      r.n = design.n_grid[cell];
      r.tau = design.tau_grid[cell];
      r.sigma = design.bandwidth_rule(r.tau, design.dim);
      r.replicate = rep;
      r.d_lambda = r.sup_Tinv_err = r.sup_T_err = r.reg_dist = std::numeric_limits<double>::quiet_NaN();
      r.status = std::string("error: ") + e.what();
      rows[k] = r;
    }
  });
  return rows;
}

}  // namespace wassbary
