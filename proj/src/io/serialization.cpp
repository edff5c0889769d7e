#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wassbary/error.hpp"
#include "wassbary/io.hpp"

namespace wassbary::io {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::Parse, msg); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) bad(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Vector vec_from(const Json& j, const char* what) {
  auto v = numbers(j, what);
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_from(const Json& j, const char* what, Eigen::Index cols = -1) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), cols >= 0 ? cols : (j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size())));
  for (std::size_t r = 0; r < j.size(); ++r) {
    auto row = numbers(j[r], what);
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) bad(std::string(what) + " rows differ in length");
    for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

Json compactum_json(const Compactum& k) { return {{"lower", vec_json(k.lower())}, {"upper", vec_json(k.upper())}}; }

Compactum compactum_from(const Json& j) {
  return Compactum(vec_from(field(j, "lower"), "window.lower"), vec_from(field(j, "upper"), "window.upper"));
}

std::vector<int> ints(const Json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad(std::string(what) + " must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::string kind_name(Measure1D::Kind k) {
  switch (k) {
    case Measure1D::Kind::QuantileGrid: return "quantile_grid";
    case Measure1D::Kind::Sample: return "sample";
    case Measure1D::Kind::PiecewiseLinear: return "piecewise_linear";
  }
  return "";
}

}  // namespace

Json to_json(const Measure& m) {
  switch (m.family()) {
    case Family::Quantile1D: {
      const auto& q = m.as<Measure1D>();
      Json j{{"type", "quantile1d"}, {"representation", kind_name(q.kind())}};
      if (q.kind() == Measure1D::Kind::PiecewiseLinear) {
        const auto& f = q.quantile_function();
        j["probs"] = f.probs();
        j["start"] = f.start();
        j["end"] = f.end();
      } else {
        j["values"] = q.values();
      }
      return j;
    }
    case Family::Gaussian: {
      const auto& g = m.as<GaussianMeasure>();
      return {{"type", "gaussian"}, {"dim", g.dim()}, {"covariance", matrix_json(g.covariance())}};
    }
    case Family::Product: {
      Json f = Json::array();
      for (const auto& x : m.as<ProductMeasure>().factors) f.push_back(to_json(x));
      return {{"type", "product"}, {"factors", f}};
    }
    case Family::Discrete: {
      const auto& d = m.as<DiscreteMeasure>();
      return {{"type", "discrete"}, {"dim", d.dim()}, {"points", matrix_json(d.points())}, {"weights", vec_json(d.weights())}};
    }
    case Family::Grid: {
      const auto& g = m.as<GridDensity>();
      return {{"type", "grid"}, {"window", compactum_json(g.window())}, {"cells_per_axis", g.cells_per_axis()}, {"values", g.values()}};
    }
  }
  return {};
}

Measure measure_from_json(const Json& j) {
  const Json& type = field(j, "type");
  if (!type.is_string()) bad("field 'type' must be a string");
  const std::string t = type.get<std::string>();
  if (t == "quantile1d") {
    const std::string rep = j.value("representation", std::string("quantile_grid"));
    if (rep == "quantile_grid") return Measure1D::from_quantile_grid(numbers(field(j, "values"), "values"));
    if (rep == "sample") return Measure1D::from_sample(numbers(field(j, "values"), "values"));
    if (rep == "piecewise_linear")
      return Measure1D::from_quantile_function(QuantileFunction(numbers(field(j, "probs"), "probs"),
                                                                numbers(field(j, "start"), "start"),
                                                                numbers(field(j, "end"), "end")));
    bad("unknown quantile1d representation '" + rep + "'");
  }
  if (t == "gaussian") {
    Matrix c = matrix_from(field(j, "covariance"), "covariance");
    if (j.contains("dim") && j["dim"].get<int>() != c.rows()) bad("covariance does not match 'dim'");
    return GaussianMeasure(std::move(c));
  }
  if (t == "product") {
    const Json& f = field(j, "factors");
    if (!f.is_array()) bad("'factors' must be an array");
    std::vector<Measure> factors;
    for (const auto& x : f) factors.push_back(measure_from_json(x));
    return ProductMeasure(std::move(factors));
  }
  if (t == "discrete") {
    Matrix p = matrix_from(field(j, "points"), "points");
    if (j.contains("dim") && j["dim"].get<int>() != p.cols()) bad("points do not match 'dim'");
    if (j.contains("weights")) return DiscreteMeasure(std::move(p), vec_from(j["weights"], "weights"));
    return DiscreteMeasure(std::move(p));
  }
  if (t == "grid") {
    return GridDensity(compactum_from(field(j, "window")), ints(field(j, "cells_per_axis"), "cells_per_axis"),
                       numbers(field(j, "values"), "values"));
  }
  bad("unknown measure type '" + t + "'");
}

Json to_json(const TransportMap& t) {
  switch (t.kind()) {
    case MapKind::Monotone1D: {
      const auto& m = t.as<Monotone1D>();
      return {{"type", "monotone1d"}, {"x", m.x()}, {"y", m.y()}};
    }
    case MapKind::Linear: {
      const auto& l = t.as<LinearMap>();
      return {{"type", "linear"}, {"brenier", l.brenier()}, {"matrix", matrix_json(l.matrix())}};
    }
    case MapKind::Product: {
      Json f = Json::array();
      for (const auto& x : t.as<ProductMap>().factors) f.push_back(to_json(x));
      return {{"type", "product"}, {"factors", f}};
    }
    case MapKind::Assignment: {
      const auto& a = t.as<Assignment>();
      Json j{{"type", "assignment"}, {"source", matrix_json(a.source())}, {"image", matrix_json(a.image())}};
      if (!a.target_index().empty()) j["target_index"] = a.target_index();
      return j;
    }
    case MapKind::Grid: {
      const auto& g = t.as<GridMap>();
      return {{"type", "grid"},
              {"window", compactum_json(g.window())},
              {"cells_per_axis", g.cells_per_axis()},
              {"displacement", matrix_json(g.displacement())}};
    }
  }
  return {};
}

TransportMap map_from_json(const Json& j) {
  const std::string t = field(j, "type").get<std::string>();
  if (t == "monotone1d") return Monotone1D(numbers(field(j, "x"), "x"), numbers(field(j, "y"), "y"));
  if (t == "linear") {
    Matrix m = matrix_from(field(j, "matrix"), "matrix");
    if (j.value("brenier", true)) return LinearMap(std::move(m));
    return LinearMap::general(std::move(m));
  }
  if (t == "product") {
    std::vector<TransportMap> f;
    for (const auto& x : field(j, "factors")) f.push_back(map_from_json(x));
    return ProductMap(std::move(f));
  }
  if (t == "assignment") {
    std::vector<int> idx;
    if (j.contains("target_index")) idx = ints(j["target_index"], "target_index");
    return Assignment(matrix_from(field(j, "source"), "source"), matrix_from(field(j, "image"), "image"), std::move(idx));
  }
  if (t == "grid") {
    Compactum w = compactum_from(field(j, "window"));
    const auto d = w.dim();
    return GridMap(w, ints(field(j, "cells_per_axis"), "cells_per_axis"), matrix_from(field(j, "displacement"), "displacement", d));
  }
  bad("unknown map type '" + t + "'");
}

Json to_json(const DescentConfig& cfg) {
  Json j{{"tolerance", cfg.tolerance}, {"max_iterations", cfg.max_iterations}, {"step", cfg.step},
         {"stagnation", cfg.stagnation}};
  j["initial"] = cfg.initial ? to_json(*cfg.initial) : Json("use-first-input");
  return j;
}

void update_from_json(DescentConfig& cfg, const Json& j) {
  if (!j.is_object()) bad("descent configuration must be an object");
  try {
    if (j.contains("tolerance")) cfg.tolerance = j["tolerance"].get<double>();
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("step")) cfg.step = j["step"].get<double>();
    if (j.contains("stagnation")) cfg.stagnation = j["stagnation"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("descent configuration: ") + e.what());
  }
  if (j.contains("initial")) {
    if (j["initial"].is_string()) {
      if (j["initial"].get<std::string>() != "use-first-input") bad("'initial' must be a measure or \"use-first-input\"");
      cfg.initial.reset();
    } else {
      cfg.initial = measure_from_json(j["initial"]);
    }
  }
}

Json to_json(const ExperimentDesign& d) {
  return {{"n_grid", d.n_grid},
          {"tau_grid", d.tau_grid},
          {"bandwidth_rule", "tau^(-1/(d+2)) clipped to (0,1]"},
          {"replicates", d.replicates},
          {"seed", d.seed},
          {"dim", d.dim},
          {"cells", d.cells},
          {"truth_cells", d.truth_cells},
          {"probes_per_axis", d.probes_per_axis},
          {"warp", {{"max_frequency", d.warp.max_frequency}, {"amplitude", d.warp.amplitude}, {"knots", d.warp.knots}}},
          {"descent", to_json(d.descent)}};
}

void update_from_json(ExperimentDesign& d, const Json& j) {
  if (!j.is_object()) bad("experiment design must be an object");
  try {
    if (j.contains("n_grid")) d.n_grid = j["n_grid"].get<std::vector<std::size_t>>();
    if (j.contains("tau_grid")) d.tau_grid = j["tau_grid"].get<std::vector<double>>();
    if (j.contains("replicates")) d.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("dim")) d.dim = j["dim"].get<int>();
    if (j.contains("cells")) d.cells = j["cells"].get<int>();
    if (j.contains("truth_cells")) d.truth_cells = j["truth_cells"].get<int>();
    if (j.contains("probes_per_axis")) d.probes_per_axis = j["probes_per_axis"].get<int>();
    if (j.contains("warp")) {
      const Json& w = j["warp"];
      if (w.contains("max_frequency")) d.warp.max_frequency = w["max_frequency"].get<int>();
      if (w.contains("amplitude")) d.warp.amplitude = w["amplitude"].get<double>();
      if (w.contains("knots")) d.warp.knots = w["knots"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("experiment design: ") + e.what());
  }
  if (j.contains("descent")) update_from_json(d.descent, j["descent"]);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

Measure read_measure(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return measure_from_json(j);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) fail(ErrorKind::Parse, path.string() + ": " + e.what());
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace wassbary::io
