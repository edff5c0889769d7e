#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>

#include "wassbary/error.hpp"
#include "wassbary/io.hpp"
#include "wassbary/scenarios.hpp"

namespace wassbary::scenarios {

namespace {

using Json = nlohmann::json;
constexpr int kInputs = 4;
constexpr double kFrankTheta = -8.0;

// Tensor grids repeat each axis coordinate; the barycenter densities solve
// for a level on every call.
std::function<double(double)> memo(std::function<double(double)> f) {
  auto cache = std::make_shared<std::unordered_map<double, double>>();
  return [f = std::move(f), cache](double x) {
    auto it = cache->find(x);
    if (it != cache->end()) return it->second;
    return (*cache)[x] = f(x);
  };
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Rows (x, y) of the tensor grid, last axis fastest.
Matrix tensor_nodes(const std::vector<double>& xs, const std::vector<double>& ys) {
  Matrix nodes(static_cast<Eigen::Index>(xs.size() * ys.size()), 2);
  Eigen::Index r = 0;
  for (double x : xs)
    for (double y : ys) {
      nodes(r, 0) = x;
      nodes(r, 1) = y;
      ++r;
    }
  return nodes;
}

template <class F>
std::string density_csv(const Matrix& nodes, F&& density) {
  Matrix m(nodes.rows(), nodes.cols() + 1);
  m.leftCols(nodes.cols()) = nodes;
  for (Eigen::Index r = 0; r < nodes.rows(); ++r) m(r, nodes.cols()) = density(Vector(nodes.row(r).transpose()));
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < nodes.cols(); ++k) header.push_back("x" + std::to_string(k));
  header.push_back("value");
  return io::matrix_csv(m, header);
}

Matrix column(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string points_csv(const Matrix& pts) {
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) header.push_back("x" + std::to_string(k));
  return io::matrix_csv(pts, header);
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json mixture_json(const Mixture1D& m) {
  Json out = Json::array();
  for (const auto& c : m.components()) {
    Json j{{"weight", c.weight}, {"type", c.gamma ? "gamma" : "normal"}, {"location", c.location}};
    if (c.gamma) {
      j["shape"] = c.shape;
      j["rate"] = c.scale;
    } else {
      j["sd"] = c.scale;
    }
    out.push_back(j);
  }
  return out;
}

Json trace_json(const DescentTrace& t) {
  return Json{{"iterations", t.iterations_used},
              {"converged", t.converged},
              {"stop", std::string(to_string(t.stop))},
              {"objective", t.records.back().objective},
              {"grad_sq", t.records.back().grad_sq}};
}

std::vector<const Mixture1D*> pointers(const std::vector<Mixture1D>& v) {
  std::vector<const Mixture1D*> out;
  for (const auto& m : v) out.push_back(&m);
  return out;
}

// Common plotting range covering [q, 1 - q] of every mixture.
std::pair<double, double> plot_range(const std::vector<Mixture1D>& ms, double q = 1e-3) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& m : ms) {
    lo = std::min(lo, m.quantile(q));
    hi = std::max(hi, m.quantile(1.0 - q));
  }
  double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::size_t density_levels(const ScenarioOptions& o) { return std::max<std::size_t>(o.grid_size, 256); }

void one_dimensional(const std::string& prefix, const std::vector<Mixture1D>& mixtures, const ScenarioOptions& o,
                     ScenarioResult& out) {
  std::vector<Measure> inputs;
  for (const auto& m : mixtures) inputs.emplace_back(m.tabulate(o.grid_size));
  BarycenterResult res = barycenter(inputs, o.descent);
  BarycenterDensity1D bary(pointers(mixtures), density_levels(o));

  auto [lo, hi] = plot_range(mixtures);
  Matrix nodes = column(linspace(lo, hi, 4 * o.plot_cells));
  for (int i = 0; i < kInputs; ++i) {
    const auto& m = mixtures[static_cast<std::size_t>(i)];
    out.files.push_back({prefix + "/input_" + std::to_string(i) + ".csv",
                         density_csv(nodes, [&](const Vector& x) { return m.pdf(x[0]); })});
  }
  out.files.push_back({prefix + "/barycenter.csv", density_csv(nodes, [&](const Vector& x) { return bary.pdf(x[0]); })});

  const auto& grid = res.barycenter.as<Measure1D>();
  Matrix q(static_cast<Eigen::Index>(grid.size()), 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    q(static_cast<Eigen::Index>(k), 0) = Measure1D::level(k, grid.size());
    q(static_cast<Eigen::Index>(k), 1) = grid.values()[k];
  }
  out.files.push_back({prefix + "/barycenter_quantiles.csv", io::matrix_csv(q, {"level", "value"})});

  // Maps live on the barycenter's support.
  double a = quantile(grid, 1e-3), b = quantile(grid, 1.0 - 1e-3);
  Matrix map_nodes = column(linspace(a, b, 2 * o.plot_cells));
  for (int i = 0; i < kInputs; ++i)
    out.files.push_back({prefix + "/map_" + std::to_string(i) + ".csv",
                         io::displacement_csv(res.maps[static_cast<std::size_t>(i)], map_nodes)});
  out.files.push_back({prefix + "/trace.csv", io::trace_csv(res.trace)});

  Json params = Json::array();
  for (const auto& m : mixtures) params.push_back(mixture_json(m));
  out.summary[prefix] = Json{{"inputs", params}, {"descent", trace_json(res.trace)}};
}

ScenarioResult run_1d(const ScenarioOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::vector<Mixture1D> bimodal, gamma_gauss;
  for (int i = 0; i < kInputs; ++i) bimodal.push_back(sample_bimodal(rng));
  for (int i = 0; i < kInputs; ++i) gamma_gauss.push_back(sample_gamma_gauss(rng));
  ScenarioResult out;
  one_dimensional("bimodal", bimodal, o, out);
  one_dimensional("gamma_gauss", gamma_gauss, o, out);
  return out;
}

struct Marginals {
  std::vector<Mixture1D> x, y;
};

Marginals draw_marginals(const ScenarioOptions& o) {
  std::mt19937_64 rng(o.seed);
  Marginals m;
  for (int i = 0; i < kInputs; ++i) m.x.push_back(sample_bimodal(rng));
  for (int i = 0; i < kInputs; ++i) m.y.push_back(sample_gamma_gauss(rng));
  return m;
}

Matrix field_nodes(const std::pair<double, double>& rx, const std::pair<double, double>& ry, int cells) {
  return tensor_nodes(linspace(rx.first, rx.second, cells), linspace(ry.first, ry.second, cells));
}

std::pair<double, double> support_range(const Measure1D& m) {
  return {quantile(m, 0.01), quantile(m, 0.99)};
}

ScenarioResult run_product(const ScenarioOptions& o) {
  Marginals mg = draw_marginals(o);
  std::vector<Measure> inputs;
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    inputs.emplace_back(ProductMeasure({Measure(mg.x[k].tabulate(o.grid_size)), Measure(mg.y[k].tabulate(o.grid_size))}));
  }
  BarycenterResult res = barycenter(inputs, o.descent);
  BarycenterDensity1D bx(pointers(mg.x), density_levels(o)), by(pointers(mg.y), density_levels(o));

  ScenarioResult out;
  auto rx = plot_range(mg.x), ry = plot_range(mg.y);
  Matrix nodes = tensor_nodes(linspace(rx.first, rx.second, o.plot_cells), linspace(ry.first, ry.second, o.plot_cells));
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    out.files.push_back({"input_" + std::to_string(i) + ".csv", density_csv(nodes, [&](const Vector& p) {
                           return mg.x[k].pdf(p[0]) * mg.y[k].pdf(p[1]);
                         })});
  }
  auto fx = memo([&](double x) { return bx.pdf(x); }), fy = memo([&](double y) { return by.pdf(y); });
  out.files.push_back({"barycenter.csv", density_csv(nodes, [&](const Vector& p) { return fx(p[0]) * fy(p[1]); })});

  const auto& bar = res.barycenter.as<ProductMeasure>();
  Matrix fnodes = field_nodes(support_range(bar.factors[0].as<Measure1D>()),
                              support_range(bar.factors[1].as<Measure1D>()), o.field_cells);
  for (int i = 0; i < kInputs; ++i)
    out.files.push_back({"map_" + std::to_string(i) + ".csv",
                         io::displacement_csv(res.maps[static_cast<std::size_t>(i)], fnodes)});
  out.files.push_back({"trace.csv", io::trace_csv(res.trace)});

  Json px = Json::array(), py = Json::array();
  for (int i = 0; i < kInputs; ++i) {
    px.push_back(mixture_json(mg.x[static_cast<std::size_t>(i)]));
    py.push_back(mixture_json(mg.y[static_cast<std::size_t>(i)]));
  }
  out.summary = Json{{"x_marginals", px}, {"y_marginals", py}, {"descent", trace_json(res.trace)}};
  return out;
}

ScenarioResult run_copula(const ScenarioOptions& o) {
  Marginals mg = draw_marginals(o);
  // Shared copula sample: every input uses the same ranks.
  std::mt19937_64 rng(o.seed ^ 0x636f70756c61ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t n = o.copula_points;
  require(n >= 1, ErrorKind::Domain, "copula scenario needs at least one point");
  std::vector<double> u(n), v(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Keep levels away from 0 and 1 so quantiles stay finite.
    u[k] = std::clamp(unif(rng), 1e-9, 1.0 - 1e-9);
    v[k] = std::clamp(frank_conditional_inverse(u[k], unif(rng), kFrankTheta), 1e-9, 1.0 - 1e-9);
  }

  std::vector<Measure> inputs;
  for (int i = 0; i < kInputs; ++i) {
    auto idx = static_cast<std::size_t>(i);
    Matrix pts(static_cast<Eigen::Index>(n), 2);
    for (std::size_t k = 0; k < n; ++k) {
      pts(static_cast<Eigen::Index>(k), 0) = mg.x[idx].quantile(u[k]);
      pts(static_cast<Eigen::Index>(k), 1) = mg.y[idx].quantile(v[k]);
    }
    inputs.emplace_back(DiscreteMeasure(pts));
  }
  BarycenterResult res = barycenter(inputs, o.descent);

  // Separable maps from the marginal barycenters.
  std::vector<Measure> xs, ys;
  for (int i = 0; i < kInputs; ++i) {
    xs.emplace_back(mg.x[static_cast<std::size_t>(i)].tabulate(o.grid_size));
    ys.emplace_back(mg.y[static_cast<std::size_t>(i)].tabulate(o.grid_size));
  }
  BarycenterResult rx = barycenter(xs, o.descent), ry = barycenter(ys, o.descent);

  BarycenterDensity1D bx(pointers(mg.x), density_levels(o)), by(pointers(mg.y), density_levels(o));
  ScenarioResult out;
  auto px = plot_range(mg.x), py = plot_range(mg.y);
  Matrix nodes = tensor_nodes(linspace(px.first, px.second, o.plot_cells), linspace(py.first, py.second, o.plot_cells));
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    out.files.push_back({"input_" + std::to_string(i) + ".csv", density_csv(nodes, [&](const Vector& p) {
                           double fx = mg.x[k].pdf(p[0]), fy = mg.y[k].pdf(p[1]);
                           if (fx <= 0.0 || fy <= 0.0) return 0.0;
                           return frank_density(mg.x[k].cdf(p[0]), mg.y[k].cdf(p[1]), kFrankTheta) * fx * fy;
                         })});
  }
  auto pdf_x = memo([&](double x) { return bx.pdf(x); }), pdf_y = memo([&](double y) { return by.pdf(y); });
  auto cdf_x = memo([&](double x) { return bx.cdf(x); }), cdf_y = memo([&](double y) { return by.cdf(y); });
  out.files.push_back({"barycenter.csv", density_csv(nodes, [&](const Vector& p) {
                         double fx = pdf_x(p[0]), fy = pdf_y(p[1]);
                         if (fx <= 0.0 || fy <= 0.0) return 0.0;
                         return frank_density(cdf_x(p[0]), cdf_y(p[1]), kFrankTheta) * fx * fy;
                       })});
  const auto& pts = res.barycenter.as<DiscreteMeasure>().points();
  out.files.push_back({"barycenter_points.csv", points_csv(pts)});

  Matrix fnodes = field_nodes(support_range(rx.barycenter.as<Measure1D>()),
                              support_range(ry.barycenter.as<Measure1D>()), o.field_cells);
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    TransportMap t(ProductMap({rx.maps[k], ry.maps[k]}));
    out.files.push_back({"map_" + std::to_string(i) + ".csv", io::displacement_csv(t, fnodes)});
  }
  out.files.push_back({"trace.csv", io::trace_csv(res.trace)});

  // The discrete barycenter should sit at the averaged marginal quantiles.
  double gap = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double ex = 0.0, ey = 0.0;
    for (int i = 0; i < kInputs; ++i) {
      ex += mg.x[static_cast<std::size_t>(i)].quantile(u[k]) / kInputs;
      ey += mg.y[static_cast<std::size_t>(i)].quantile(v[k]) / kInputs;
    }
    double best = INFINITY;
    for (Eigen::Index r = 0; r < pts.rows(); ++r)
      best = std::min(best, std::hypot(pts(r, 0) - ex, pts(r, 1) - ey));
    gap = std::max(gap, best);
  }
  out.summary = Json{{"theta", kFrankTheta},
                     {"points", n},
                     {"descent", trace_json(res.trace)},
                     {"max_gap_to_quantile_average", gap}};
  return out;
}

double gaussian_pdf(const Vector& x, const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  Vector z = llt.matrixL().solve(x);
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double d = static_cast<double>(x.size());
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * d * std::log(2.0 * std::numbers::pi));
}

ScenarioResult run_gaussian(const ScenarioOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::vector<GaussianMeasure> inputs;
  for (int i = 0; i < kInputs; ++i) inputs.emplace_back(sample_wishart(rng, 2, 2));
  DescentConfig cfg = o.descent;
  if (!cfg.initial) cfg.initial = Measure(GaussianMeasure(Matrix::Identity(2, 2)));
  GaussianBarycenterResult res = gaussian_barycenter(inputs, cfg);
  const Matrix& sbar = res.barycenter.covariance();

  double reach = 0.0;
  for (const auto& g : inputs) reach = std::max(reach, std::sqrt(g.covariance().diagonal().maxCoeff()));
  reach = 3.0 * std::max(reach, std::sqrt(sbar.diagonal().maxCoeff()));
  Matrix nodes = field_nodes({-reach, reach}, {-reach, reach}, o.plot_cells);

  ScenarioResult out;
  Json covs = Json::array();
  for (int i = 0; i < kInputs; ++i) {
    const Matrix& s = inputs[static_cast<std::size_t>(i)].covariance();
    covs.push_back(matrix_json(s));
    out.files.push_back(
        {"input_" + std::to_string(i) + ".csv", density_csv(nodes, [&](const Vector& x) { return gaussian_pdf(x, s); })});
  }
  out.files.push_back({"barycenter.csv", density_csv(nodes, [&](const Vector& x) { return gaussian_pdf(x, sbar); })});

  double r = 3.0 * std::sqrt(sbar.diagonal().maxCoeff());
  Matrix fnodes = field_nodes({-r, r}, {-r, r}, o.field_cells);
  Json maps = Json::array();
  for (int i = 0; i < kInputs; ++i) {
    LinearMap t = optimal_map_gaussian(res.barycenter, inputs[static_cast<std::size_t>(i)]);
    maps.push_back(matrix_json(t.matrix()));
    out.files.push_back({"map_" + std::to_string(i) + ".csv", io::displacement_csv(TransportMap(t), fnodes)});
  }
  out.files.push_back({"trace.csv", io::trace_csv(res.trace)});
  std::vector<Measure> as_measures(inputs.begin(), inputs.end());
  Json cov{{"inputs", covs},
           {"barycenter", matrix_json(sbar)},
           {"maps", maps},
           {"karcher_residual", karcher_residual(Measure(res.barycenter), as_measures)}};
  out.files.push_back({"covariances.json", cov.dump(2) + "\n"});
  out.summary = Json{{"descent", trace_json(res.trace)}};
  return out;
}

// Points of {x : phi_S(x12) f(x3) = c}, rotated by U.
Matrix level_set(const Matrix& u, const Matrix& s, const std::function<double(double)>& f, double lo, double hi,
                 double c, int heights, int angles) {
  Eigen::LLT<Matrix> llt(s);
  Matrix l = llt.matrixL();
  double peak = 1.0 / (2.0 * std::numbers::pi * std::sqrt(s.determinant()));
  std::vector<Vector> pts;
  for (double h : linspace(lo, hi, heights)) {
    double r2 = 2.0 * std::log(f(h) * peak / c);
    if (!(r2 > 0.0)) continue;
    double r = std::sqrt(r2);
    for (int a = 0; a < angles; ++a) {
      double th = 2.0 * std::numbers::pi * a / angles;
      Vector x(3);
      x.head(2) = l * Vector{{r * std::cos(th), r * std::sin(th)}};
      x[2] = h;
      pts.push_back(u * x);
    }
  }
  Matrix m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t k = 0; k < pts.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
  return m;
}

Matrix rotated_sample(const Measure& m, const Matrix& u, std::size_t n, std::uint64_t seed) {
  Matrix pts = sample(m, n, seed).points();
  return pts * u.transpose();
}

ScenarioResult run_trivariate(const ScenarioOptions& o) {
  std::mt19937_64 rng(o.seed);
  Matrix u = sample_orthogonal(rng, 3);
  std::vector<Matrix> covs;
  std::vector<Mixture1D> fs;
  for (int i = 0; i < kInputs; ++i) covs.push_back(sample_wishart(rng, 2, 2));
  for (int i = 0; i < kInputs; ++i) fs.push_back(sample_bimodal(rng));

  // Barycenter in the rotated frame, where every input is a product.
  std::vector<Measure> inputs;
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    inputs.emplace_back(ProductMeasure({Measure(GaussianMeasure(covs[k])), Measure(fs[k].tabulate(o.grid_size))}));
  }
  BarycenterResult res = barycenter(inputs, o.descent);
  const auto& bar = res.barycenter.as<ProductMeasure>();
  const Matrix& sbar = bar.factors[0].as<GaussianMeasure>().covariance();
  BarycenterDensity1D fbar(pointers(fs), density_levels(o));

  auto [lo, hi] = plot_range(fs);
  auto peak_of = [&](const std::function<double(double)>& f, const Matrix& s) {
    double m = 0.0;
    for (double h : linspace(lo, hi, 4 * o.plot_cells)) m = std::max(m, f(h));
    return m / (2.0 * std::numbers::pi * std::sqrt(s.determinant()));
  };

  ScenarioResult out;
  int heights = o.plot_cells, angles = 48;
  for (int i = 0; i < kInputs; ++i) {
    auto k = static_cast<std::size_t>(i);
    std::function<double(double)> f = [&](double x) { return fs[k].pdf(x); };
    double c = 0.05 * peak_of(f, covs[k]);
    out.files.push_back({"level_set_" + std::to_string(i) + ".csv",
                         points_csv(level_set(u, covs[k], f, lo, hi, c, heights, angles))});
    out.files.push_back({"sample_" + std::to_string(i) + ".csv",
                         points_csv(rotated_sample(inputs[k], u, o.trivariate_samples, o.seed + 1 + k))});
  }
  std::function<double(double)> fb = [&](double x) { return fbar.pdf(x); };
  double cb = 0.05 * peak_of(fb, sbar);
  out.files.push_back({"level_set_barycenter.csv", points_csv(level_set(u, sbar, fb, lo, hi, cb, heights, angles))});
  out.files.push_back({"sample_barycenter.csv",
                       points_csv(rotated_sample(res.barycenter, u, o.trivariate_samples, o.seed + 1 + kInputs))});
  out.files.push_back({"trace.csv", io::trace_csv(res.trace)});

  Json cj = Json::array(), fj = Json::array();
  for (int i = 0; i < kInputs; ++i) {
    cj.push_back(matrix_json(covs[static_cast<std::size_t>(i)]));
    fj.push_back(mixture_json(fs[static_cast<std::size_t>(i)]));
  }
  Json model{{"rotation", matrix_json(u)},
             {"covariances", cj},
             {"third_coordinate", fj},
             {"barycenter_covariance", matrix_json(sbar)},
             {"level_fraction", 0.05}};
  out.files.push_back({"model.json", model.dump(2) + "\n"});
  out.summary = Json{{"descent", trace_json(res.trace)}};
  return out;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"1d-mixtures", "product", "copula", "gaussian", "trivariate"}; }

ScenarioResult run_scenario(const std::string& name, const ScenarioOptions& options) {
  require(options.grid_size >= 2 && options.plot_cells >= 2 && options.field_cells >= 2, ErrorKind::Domain,
          "scenario resolutions must be at least 2");
  ScenarioResult r;
  if (name == "1d-mixtures") r = run_1d(options);
  else if (name == "product") r = run_product(options);
  else if (name == "copula") r = run_copula(options);
  else if (name == "gaussian") r = run_gaussian(options);
  else if (name == "trivariate") r = run_trivariate(options);
  else fail(ErrorKind::Domain, "unknown scenario '" + name + "'");
  r.summary["scenario"] = name;
  r.summary["seed"] = options.seed;
  r.summary["grid_size"] = options.grid_size;
  r.files.push_back({"summary.json", r.summary.dump(2) + "\n"});
  return r;
}

}  // namespace wassbary::scenarios
