#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wassbary::cli {

enum Exit : int { kOk = 0, kUsage = 2, kParse = 3, kNumerical = 4, kIo = 5 };

struct Options {
  std::string command;
  std::vector<std::string> inputs;
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tolerance;
  std::optional<int> max_iters;
  std::optional<double> tau;
  bool strict = false;

  // simulate
  int patterns = 20;
  double intensity = 400.0;
  int dim = 1;
  // figures
  std::string scenario;
};

// What a command did, for the manifest.
struct Report {
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> outputs;
  bool converged = true;
  std::uint64_t seed = 0;
};

void run_barycenter(const Options& o, Report& r);
void run_multicouple(const Options& o, Report& r);
void run_simulate(const Options& o, Report& r);
void run_experiment(const Options& o, Report& r);
void run_figures(const Options& o, Report& r);

}  // namespace wassbary::cli
