#include <algorithm>
#include <cmath>

#include "wassbary/error.hpp"
#include "wassbary/transport.hpp"

namespace wassbary {

Matrix matrix_sqrt_spd(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix r = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Matrix matrix_inv_sqrt_spd(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const double smallest = es.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) throw ConditioningError("matrix is not positive-definite", smallest);
  Vector inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  Matrix r = es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

LinearMap optimal_map_gaussian(const GaussianMeasure& src, const GaussianMeasure& dst) {
  require(src.dim() == dst.dim(), ErrorKind::Shape, "Gaussians differ in dimension");
  const Matrix rd = matrix_sqrt_spd(dst.covariance());
  const Matrix t = rd * matrix_inv_sqrt_spd(rd * src.covariance() * rd) * rd;
  return LinearMap(0.5 * (t + t.transpose()));
}

Monotone1D optimal_map_1d(const Measure1D& src, const Measure1D& dst) {
  const bool atoms_src = src.kind() != Measure1D::Kind::PiecewiseLinear;
  const bool atoms_dst = dst.kind() != Measure1D::Kind::PiecewiseLinear;
  if (atoms_src && atoms_dst && src.values().size() == dst.values().size())
    return Monotone1D::from_knots(src.values(), dst.values());

  // Walk the merged breakpoints. Where the source is strictly increasing the
  // map is linear between interval ends; an atom of the source goes to the
  // mean of the destination over that atom's probability range.
  const auto& a = src.quantile_function();
  const auto& b = dst.quantile_function();
  const QuantileFunction* fns[] = {&a, &b};
  const std::vector<double> u = merged_breakpoints(fns);
  std::vector<double> kx, ky;
  std::size_t ka = 0, kb = 0;
  double atom_x = 0.0, atom_mass = 0.0, atom_sum = 0.0;
  auto flush_atom = [&] {
    if (atom_mass > 0.0) {
      kx.push_back(atom_x);
      ky.push_back(atom_sum / atom_mass);
    }
    atom_mass = atom_sum = 0.0;
  };
  for (std::size_t m = 0; m + 1 < u.size(); ++m) {
    while (ka + 1 < a.segments() && a.probs()[ka + 1] <= u[m]) ++ka;
    while (kb + 1 < b.segments() && b.probs()[kb + 1] <= u[m]) ++kb;
    const double x0 = a.value_in(ka, u[m]), x1 = a.value_in(ka, u[m + 1]);
    const double y0 = b.value_in(kb, u[m]), y1 = b.value_in(kb, u[m + 1]);
    if (x1 > x0) {
      flush_atom();
      kx.push_back(x0);
      ky.push_back(y0);
      kx.push_back(x1);
      ky.push_back(y1);
    } else {
      if (atom_mass > 0.0 && x0 != atom_x) flush_atom();
      atom_x = x0;
      const double w = u[m + 1] - u[m];
      atom_mass += w;
      atom_sum += w * 0.5 * (y0 + y1);
    }
  }
  flush_atom();
  return Monotone1D::from_knots(kx, ky);
}

ProductMap optimal_map_product(const ProductMeasure& src, const ProductMeasure& dst) {
  require(src.factors.size() == dst.factors.size(), ErrorKind::Representation, "product factorisations differ");
  for (std::size_t k = 0; k < src.factors.size(); ++k)
    require(src.factors[k].dim() == dst.factors[k].dim(), ErrorKind::Representation, "product factorisations differ");
  std::vector<TransportMap> maps;
  for (std::size_t k = 0; k < src.factors.size(); ++k) maps.push_back(optimal_map(src.factors[k], dst.factors[k]));
  return ProductMap(std::move(maps));
}

}  // namespace wassbary
