#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "wassbary/error.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/parallel.hpp"
#include "wassbary/registration.hpp"

namespace wassbary {

PopulationEstimate estimate_population(std::span<const PointPattern> patterns, const KernelSpec& spec,
                                       std::span<const int> cells_per_axis, const DescentConfig& cfg) {
  require(!patterns.empty(), ErrorKind::Domain, "no point patterns");
  for (const auto& p : patterns)
    require(p.window() == patterns.front().window(), ErrorKind::Domain, "patterns must share a window");
  std::vector<std::optional<GridDensity>> smoothed(patterns.size());
  parallel_for(patterns.size(), [&](std::size_t i) { smoothed[i] = kernel_estimate(patterns[i], spec, cells_per_axis); });
  std::vector<Measure> inputs;
  std::vector<GridDensity> grids;
  for (auto& s : smoothed) {
    grids.push_back(*s);
    inputs.emplace_back(*s);
  }
  BarycenterResult r = barycenter(inputs, cfg);
  PopulationEstimate out{r.barycenter.as<GridDensity>(), std::move(grids), std::move(r.maps), {}, std::move(r.trace)};
  const bool invertible = std::all_of(out.maps.begin(), out.maps.end(), [](const TransportMap& t) {
    return t.kind() != MapKind::Grid;
  });
  if (invertible)
    for (const auto& t : out.maps) out.inverses.push_back(invert_map(t));
  return out;
}

GridDensity reference_intensity(const Compactum& window, int cells_per_axis) {
  require(cells_per_axis >= 1, ErrorKind::Domain, "need at least one cell per axis");
  boost::math::normal_distribution<double> left(0.3, 0.1), right(0.7, 0.1);
  const auto n = static_cast<std::size_t>(cells_per_axis);
  std::vector<double> axis(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(n);
    const double b = static_cast<double>(k + 1) / static_cast<double>(n);
    axis[k] = 0.5 * (cdf(left, b) - cdf(left, a)) + 0.5 * (cdf(right, b) - cdf(right, a));
  }
  const int d = window.dim();
  std::vector<int> cells(static_cast<std::size_t>(d), cells_per_axis);
  GridDensity shape = GridDensity::uniform(window, cells);
  std::vector<double> mass(shape.num_cells());
  for (std::size_t c = 0; c < mass.size(); ++c) {
    double m = 1.0;
    for (int k : shape.multi_index(c)) m *= axis[static_cast<std::size_t>(k)];
    mass[c] = m;
  }
  return GridDensity::from_masses(window, cells, mass);
}

}  // namespace wassbary
