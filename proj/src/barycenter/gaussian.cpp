#include "wassbary/barycenter.hpp"
#include "wassbary/error.hpp"

namespace wassbary {

GaussianBarycenterResult gaussian_barycenter(std::span<const GaussianMeasure> inputs, const DescentConfig& cfg) {
  require(!inputs.empty(), ErrorKind::Domain, "no input measures");
  if (cfg.initial)
    require(cfg.initial->family() == Family::Gaussian, ErrorKind::Representation, "initial measure must be Gaussian");
  const std::vector<Measure> wrapped(inputs.begin(), inputs.end());
  auto r = barycenter(wrapped, cfg);
  return {r.barycenter.as<GaussianMeasure>(), std::move(r.trace)};
}

}  // namespace wassbary
