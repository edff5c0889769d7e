#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "wassbary/error.hpp"
#include "wassbary/io.hpp"
#include "wassbary/registration.hpp"
#include "wassbary/scenarios.hpp"

namespace wassbary::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

Json load_config(const Options& o) {
  if (o.config.empty()) return Json::object();
  Json j = io::read_json(o.config);
  if (!j.is_object()) fail(ErrorKind::Parse, o.config + ": configuration must be a JSON object");
  return j;
}

void emit(const Options& o, Report& r, const std::string& name, const std::string& text) {
  fs::path p = fs::path(o.out) / name;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + p.parent_path().string() + ": " + ec.message());
  io::write_text(p, text);
  r.outputs.push_back(name);
}

void emit_json(const Options& o, Report& r, const std::string& name, const Json& j) { emit(o, r, name, j.dump(2) + "\n"); }

DescentConfig descent_config(const Options& o, const Json& cfg) {
  DescentConfig d;
  if (cfg.contains("descent")) io::update_from_json(d, cfg["descent"]);
  else io::update_from_json(d, cfg);
  if (o.tolerance) d.tolerance = *o.tolerance;
  if (o.max_iters) d.max_iterations = *o.max_iters;
  if (o.tau) d.step = *o.tau;
  d.validate();
  return d;
}

std::vector<Measure> read_inputs(const Options& o) {
  require(!o.inputs.empty(), ErrorKind::Domain, "at least one input measure is required");
  std::vector<Measure> out;
  for (const auto& p : o.inputs) out.push_back(io::read_measure(p));
  return out;
}

Json trace_summary(const DescentTrace& t) {
  const auto& last = t.records.back();
  return Json{{"iterations", t.iterations_used},
              {"converged", t.converged},
              {"stop", std::string(to_string(t.stop))},
              {"objective", last.objective},
              {"gradient_norm", std::sqrt(last.grad_sq)},
              {"formal_gradient", t.formal_gradient},
              {"collisions", t.collisions}};
}

void emit_maps(const Options& o, Report& r, const std::vector<TransportMap>& maps) {
  for (std::size_t i = 0; i < maps.size(); ++i) {
    emit_json(o, r, "map_" + std::to_string(i) + ".json", io::to_json(maps[i]));
    if (const auto* a = maps[i].get_if<Assignment>(); a && !a->target_index().empty())
      emit(o, r, "assignment_" + std::to_string(i) + ".csv", io::assignment_csv(*a));
  }
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void run_barycenter(const Options& o, Report& r) {
  Json cfg = load_config(o);
  DescentConfig d = descent_config(o, cfg);
  std::vector<Measure> inputs = read_inputs(o);
  r.config = Json{{"inputs", o.inputs}, {"descent", io::to_json(d)}};
  BarycenterResult res = barycenter(inputs, d);
  emit_json(o, r, "barycenter.json", io::to_json(res.barycenter));
  emit(o, r, "trace.csv", io::trace_csv(res.trace));
  emit_maps(o, r, res.maps);
  emit_json(o, r, "summary.json", trace_summary(res.trace));
  r.converged = res.trace.converged;
}

void run_multicouple(const Options& o, Report& r) {
  Json cfg = load_config(o);
  DescentConfig d = descent_config(o, cfg);
  std::vector<Measure> inputs = read_inputs(o);
  r.config = Json{{"inputs", o.inputs}, {"descent", io::to_json(d)}};
  Multicoupling mc = multicoupling(inputs, d);
  emit_json(o, r, "barycenter.json", io::to_json(mc.barycenter));
  emit(o, r, "trace.csv", io::trace_csv(mc.trace));
  emit_maps(o, r, mc.maps);
  Json s = trace_summary(mc.trace);
  s["pairwise_cost"] = mc.pairwise_cost;
  s["mean_spread"] = mc.mean_spread;
  s["frechet_objective"] = mc.objective;
  s["starts"] = mc.starts;
  emit_json(o, r, "multicoupling.json", s);
  r.converged = mc.trace.converged;
}

void run_simulate(const Options& o, Report& r) {
  Json cfg = load_config(o);
  DescentConfig d = descent_config(o, cfg);
  int n = cfg.value("patterns", o.patterns);
  double intensity = cfg.value("intensity", o.intensity);
  int dim = cfg.value("dim", o.dim);
  std::uint64_t seed = o.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  require(n >= 1, ErrorKind::Domain, "need at least one pattern");
  require(intensity > 0.0, ErrorKind::Domain, "intensity must be positive");
  require(dim >= 1, ErrorKind::Domain, "dimension must be positive");
  WarpParams warp;
  if (cfg.contains("warp")) {
    const Json& w = cfg["warp"];
    warp.max_frequency = w.value("max_frequency", warp.max_frequency);
    warp.amplitude = w.value("amplitude", warp.amplitude);
    warp.knots = w.value("knots", warp.knots);
  }
  warp.validate();
  KernelSpec spec;
  spec.bandwidth = cfg.value("bandwidth", default_bandwidth(intensity, dim));
  spec.validate();
  int cells = cfg.value("cells", default_cells(dim));
  require(cells >= 2, ErrorKind::Domain, "cells per axis must be at least 2");
  r.seed = seed;
  r.config = Json{{"patterns", n},           {"intensity", intensity},
                  {"dim", dim},              {"bandwidth", spec.bandwidth},
                  {"cells", cells},          {"warp", {{"max_frequency", warp.max_frequency}, {"amplitude", warp.amplitude}, {"knots", warp.knots}}},
                  {"descent", io::to_json(d)}};

  Compactum window = Compactum::unit(dim);
  GridDensity truth = reference_intensity(window, dim == 1 ? 1024 : cells);
  std::vector<WarpMap> warps;
  std::vector<PointPattern> observed;
  std::vector<std::string> names;
  for (int k = 0; k < dim; ++k) names.push_back("x" + std::to_string(k));
  for (int i = 0; i < n; ++i) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    warps.push_back(sample_warp(window, warp, derive_seed(s, 0)));
    PointPattern original = sample_poisson(truth, intensity, window, derive_seed(s, 1));
    Matrix moved = register_pattern(original, warps.back().forward).points();
    for (Eigen::Index row = 0; row < moved.rows(); ++row)
      moved.row(row) = window.clamp(moved.row(row).transpose()).transpose();
    observed.emplace_back(window, moved);
    emit(o, r, "original_" + std::to_string(i) + ".csv", io::matrix_csv(original.points(), names));
    emit(o, r, "pattern_" + std::to_string(i) + ".csv", io::matrix_csv(moved, names));
  }
  std::vector<int> grid(static_cast<std::size_t>(dim), cells);
  PopulationEstimate est = estimate_population(observed, spec, grid, d);
  emit(o, r, "truth.csv", io::grid_csv(truth));
  emit(o, r, "lambda_hat.csv", io::grid_csv(est.lambda_hat));
  emit(o, r, "trace.csv", io::trace_csv(est.trace));
  Matrix probes = probe_grid(window);
  Json errors = Json::array();
  for (int i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    emit(o, r, "smoothed_" + std::to_string(i) + ".csv", io::grid_csv(est.smoothed[k]));
    emit_json(o, r, "map_" + std::to_string(i) + ".json", io::to_json(est.maps[k]));
    Json e{{"frequencies", warps[k].frequencies},
           {"sup_T_err", registration_error(est.maps[k], warps[k].forward, probes)}};
    if (!est.inverses.empty()) {
      e["sup_Tinv_err"] = registration_error(est.inverses[k], warps[k].inverse, probes);
      emit(o, r, "registered_" + std::to_string(i) + ".csv",
           io::matrix_csv(register_pattern(observed[k], est.inverses[k]).points(), names));
    }
    errors.push_back(e);
  }
  Json s = trace_summary(est.trace);
  s["d_lambda"] = wasserstein2(est.lambda_hat, truth);
  s["patterns"] = errors;
  emit_json(o, r, "summary.json", s);
  r.converged = est.trace.converged;
}

void run_experiment(const Options& o, Report& r) {
  Json cfg = load_config(o);
  ExperimentDesign design;
  io::update_from_json(design, cfg);
  if (o.seed) design.seed = *o.seed;
  if (o.tolerance) design.descent.tolerance = *o.tolerance;
  if (o.max_iters) design.descent.max_iterations = *o.max_iters;
  if (o.tau) design.descent.step = *o.tau;
  design.validate();
  r.seed = design.seed;
  r.config = io::to_json(design);
  std::vector<ExperimentRow> rows = run_consistency_experiment(design);
  emit(o, r, "experiment.csv", io::experiment_csv(rows));

  // Medians per design cell across replicates.
  Json cells = Json::array();
  for (std::size_t c = 0; c < design.n_grid.size(); ++c) {
    std::vector<double> dl, ti, te;
    int failed = 0;
    for (const auto& row : rows) {
      if (row.n != design.n_grid[c] || row.tau != design.tau_grid[c]) continue;
      dl.push_back(row.d_lambda);
      ti.push_back(row.sup_Tinv_err);
      te.push_back(row.sup_T_err);
      if (row.status != "ok") ++failed;
      r.converged = r.converged && row.converged;
    }
    cells.push_back(Json{{"n", design.n_grid[c]},
                         {"tau", design.tau_grid[c]},
                         {"median_d_lambda", median(dl)},
                         {"median_sup_Tinv_err", median(ti)},
                         {"median_sup_T_err", median(te)},
                         {"not_ok", failed}});
  }
  emit_json(o, r, "summary.json", Json{{"cells", cells}});
}

void run_figures(const Options& o, Report& r) {
  Json cfg = load_config(o);
  scenarios::ScenarioOptions so;
  so.descent = descent_config(o, cfg);
  so.seed = o.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  so.grid_size = cfg.value("grid_size", so.grid_size);
  so.plot_cells = cfg.value("plot_cells", so.plot_cells);
  so.field_cells = cfg.value("field_cells", so.field_cells);
  so.copula_points = cfg.value("copula_points", so.copula_points);
  so.trivariate_samples = cfg.value("trivariate_samples", so.trivariate_samples);
  r.seed = so.seed;
  r.config = Json{{"scenario", o.scenario},       {"grid_size", so.grid_size},
                  {"plot_cells", so.plot_cells},  {"field_cells", so.field_cells},
                  {"copula_points", so.copula_points}, {"trivariate_samples", so.trivariate_samples},
                  {"descent", io::to_json(so.descent)}};
  scenarios::ScenarioResult res = scenarios::run_scenario(o.scenario, so);
  for (const auto& f : res.files) emit(o, r, f.name, f.content);
  r.converged = res.summary.contains("descent") ? res.summary["descent"].value("converged", true) : true;
  for (const auto& [k, v] : res.summary.items())
    if (v.is_object() && v.contains("descent")) r.converged = r.converged && v["descent"].value("converged", true);
}

}  // namespace wassbary::cli
