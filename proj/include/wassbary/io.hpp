#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wassbary/barycenter.hpp"
#include "wassbary/estimation.hpp"
#include "wassbary/registration.hpp"

namespace wassbary::io {

using Json = nlohmann::json;

// Shortest text that reads back to the same double.
std::string format_number(double x);

Json to_json(const Measure& m);
Measure measure_from_json(const Json& j);
Json to_json(const TransportMap& t);
TransportMap map_from_json(const Json& j);

Json to_json(const DescentConfig& cfg);
// Fields missing from j keep the values already in cfg.
void update_from_json(DescentConfig& cfg, const Json& j);
Json to_json(const ExperimentDesign& d);
void update_from_json(ExperimentDesign& d, const Json& j);

// Parses a file; syntax errors report file and line.
Json read_json(const std::filesystem::path& path);
Measure read_measure(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

// iteration,objective,grad_sq,delta
std::string trace_csv(const DescentTrace& trace);
// x0,...,x{d-1},value at every cell centre
std::string grid_csv(const GridDensity& g);
// Rows of a matrix under the given column names.
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header);
// x0..,dx0.. : t(x) - x at every node
std::string displacement_csv(const TransportMap& t, const Matrix& nodes);
std::string experiment_csv(const std::vector<ExperimentRow>& rows);
// source_index,target_index
std::string assignment_csv(const Assignment& a);

}  // namespace wassbary::io
