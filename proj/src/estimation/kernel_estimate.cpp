#include <algorithm>
#include <cmath>
#include <numbers>

#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/kernels.hpp"

namespace wassbary {

void KernelSpec::validate() const {
  require(bandwidth > 0.0 && std::isfinite(bandwidth), ErrorKind::Domain, "bandwidth must be positive");
}

double default_bandwidth(double tau, int dim) {
  require(tau > 0.0, ErrorKind::Domain, "intensity must be positive");
  return std::min(1.0, std::pow(tau, -1.0 / (dim + 2)));
}

double kernel_profile(const KernelSpec& spec, int dim, double radius) {
  spec.validate();
  const double d = static_cast<double>(dim);
  return std::pow(d / (2.0 * std::numbers::pi), d / 2.0) * std::exp(-d * radius * radius / 2.0);
}

double smoothing_constant(const KernelSpec& spec, const Compactum& window) {
  const double denom = kernel_profile(spec, window.dim(), window.diameter()) * window.volume();
  require(denom > 0.0 && std::isfinite(denom), ErrorKind::Domain, "kernel vanishes at the window diameter");
  return 1.0 / denom;
}

int default_cells(int dim) { return dim <= 2 ? 128 : dim == 3 ? 48 : 16; }

GridDensity kernel_estimate(const PointPattern& p, const KernelSpec& spec, std::span<const int> cells_per_axis) {
  spec.validate();
  const int d = p.dim();
  require(static_cast<int>(cells_per_axis.size()) == d, ErrorKind::Shape, "one cell count per axis required");
  std::vector<int> cells(cells_per_axis.begin(), cells_per_axis.end());
  if (p.empty()) return GridDensity::uniform(p.window(), cells);
  GridDensity shape = GridDensity::uniform(p.window(), cells);

  // Per-coordinate standard deviation of the unit-variance kernel.
  const double s = spec.bandwidth / std::sqrt(static_cast<double>(d));
  const double inv_two_var = 1.0 / (2.0 * s * s);
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) centers[static_cast<std::size_t>(a)] = shape.axis_centers(a);

  std::vector<double> mass(shape.num_cells(), 0.0);
  std::vector<std::vector<double>> prof(static_cast<std::size_t>(d));
  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  const double share = 1.0 / static_cast<double>(p.size());
  for (Eigen::Index i = 0; i < p.points().rows(); ++i) {
    const Vector x = p.points().row(i).transpose();
    double total = 1.0;
    for (int a = 0; a < d; ++a) {
      const auto sa = static_cast<std::size_t>(a);
      auto& pr = prof[sa];
      pr.resize(centers[sa].size());
      kernels::gaussian_profile(centers[sa], x[a], inv_two_var, pr);
      // Truncate at 6 standard deviations (never below one cell width).
      const double reach = std::max(6.0 * s, shape.cell_width(a));
      lo[sa] = static_cast<int>(pr.size());
      hi[sa] = -1;
      double sum = 0.0;
      for (std::size_t k = 0; k < pr.size(); ++k) {
        if (std::abs(centers[sa][k] - x[a]) > reach || pr[k] == 0.0) {
          pr[k] = 0.0;
          continue;
        }
        lo[sa] = std::min(lo[sa], static_cast<int>(k));
        hi[sa] = std::max(hi[sa], static_cast<int>(k));
        sum += pr[k];
      }
      if (sum == 0.0) {
        // All centres underflow: the point's mass stays in its own cell.
        const double w = shape.cell_width(a);
        const int k = std::clamp(static_cast<int>(std::floor((x[a] - p.window().lower()[a]) / w)), 0,
                                 static_cast<int>(pr.size()) - 1);
        pr[static_cast<std::size_t>(k)] = 1.0;
        lo[sa] = hi[sa] = k;
        sum = 1.0;
      }
      total *= sum;
    }
    // Accumulate the separable product over the box lo..hi.
    std::vector<int> idx(lo);
    for (;;) {
      double w = share / total;
      for (int a = 0; a < d; ++a) w *= prof[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      mass[shape.flat_index(idx)] += w;
      int a = d - 1;
      while (a >= 0 && idx[static_cast<std::size_t>(a)] == hi[static_cast<std::size_t>(a)]) {
        idx[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)];
        --a;
      }
      if (a < 0) break;
      ++idx[static_cast<std::size_t>(a)];
    }
  }
  return GridDensity::from_masses(p.window(), cells, mass);
}

}  // namespace wassbary
