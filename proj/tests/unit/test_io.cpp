#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "wassbary/error.hpp"
#include "wassbary/io.hpp"

using namespace wassbary;
namespace fs = std::filesystem;

namespace {

Measure round_trip(const Measure& m) { return io::measure_from_json(nlohmann::json::parse(io::to_json(m).dump())); }

TEST(Json, MeasureRoundTripIsExact) {
  Measure q = Measure1D::from_quantile_grid({-1.0 / 3.0, 0.1, 2.0 / 7.0});
  EXPECT_EQ(round_trip(q).as<Measure1D>().values(), q.as<Measure1D>().values());
  Measure pl = Measure1D::from_quantile_function(QuantileFunction({0.0, 0.3, 1.0}, {0.0, 0.5}, {0.1, 1.0 / 3.0 + 0.5}));
  EXPECT_EQ(round_trip(pl).as<Measure1D>().quantile_function().end(), pl.as<Measure1D>().quantile_function().end());
  Measure g = GaussianMeasure(Matrix{{1.0 / 3.0, 0.1}, {0.1, 2.0}});
  EXPECT_EQ(round_trip(g).as<GaussianMeasure>().covariance(), g.as<GaussianMeasure>().covariance());
  Measure d = DiscreteMeasure(Matrix{{0.0, 1.0}, {0.1, 0.2}}, Vector{{0.25, 0.75}});
  EXPECT_EQ(round_trip(d).as<DiscreteMeasure>().weights(), d.as<DiscreteMeasure>().weights());
  Measure grid = GridDensity::uniform(Compactum::unit(2), {2, 3});
  EXPECT_EQ(round_trip(grid).as<GridDensity>().values(), grid.as<GridDensity>().values());
  Measure p = ProductMeasure({q, g});
  EXPECT_EQ(round_trip(p).dim(), 3);
}

TEST(Json, MapRoundTrip) {
  TransportMap m = Monotone1D({0.0, 1.0}, {0.0, 2.0});
  auto back = io::map_from_json(io::to_json(m));
  EXPECT_EQ(back.as<Monotone1D>().y(), m.as<Monotone1D>().y());
  TransportMap l = LinearMap::general(Matrix{{0.0, -1.0}, {1.0, 0.0}});
  auto lb = io::map_from_json(io::to_json(l));
  EXPECT_FALSE(lb.as<LinearMap>().brenier());
}

TEST(Json, UnknownTypeIsParseError) {
  try {
    io::measure_from_json(nlohmann::json{{"type", "banana"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
}

TEST(Json, SyntaxErrorReportsLine) {
  fs::path p = fs::temp_directory_path() / "wassbary_bad.json";
  {
    std::ofstream out(p);
    out << "{\n  \"type\": \"gaussian\",\n  \"covariance\": [[1,]]\n}\n";
  }
  try {
    io::read_json(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find(p.string() + ":3"), std::string::npos) << e.what();
  }
  fs::remove(p);
}

TEST(Json, MissingFileIsIoError) {
  try {
    io::read_json("/nonexistent/wassbary.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Json, DescentConfigKeepsMissingFields) {
  DescentConfig c;
  c.max_iterations = 7;
  io::update_from_json(c, nlohmann::json{{"tolerance", 1e-3}});
  EXPECT_EQ(c.max_iterations, 7);
  EXPECT_EQ(c.tolerance, 1e-3);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(io::format_number(std::nan("")), "nan");
}

TEST(Csv, TraceLayout) {
  DescentTrace t;
  t.records = {{1.0, 0.5, 0.0}, {0.5, 0.0, -0.5}};
  EXPECT_EQ(io::trace_csv(t), "iteration,objective,grad_sq,delta\n0,1,0.5,0\n1,0.5,0,-0.5\n");
}

TEST(Csv, ExperimentStatusQuoted) {
  ExperimentRow r;
  r.status = "error: \"x\", y";
  auto s = io::experiment_csv({r});
  EXPECT_NE(s.find("\"error: \"\"x\"\", y\""), std::string::npos);
}

TEST(Csv, Displacement) {
  auto s = io::displacement_csv(TransportMap(Monotone1D::affine(1.0, 1.0)), Matrix{{0.0}, {0.5}});
  EXPECT_EQ(s, "x0,dx0\n0,1\n0.5,1\n");
}

}  // namespace
