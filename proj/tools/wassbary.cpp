#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "wassbary/error.hpp"
#include "wassbary/io.hpp"
#include "wassbary/kernels.hpp"
#include "wassbary/parallel.hpp"
#include "wassbary/scenarios.hpp"
#include "wassbary/version.hpp"

namespace cli = wassbary::cli;

namespace {

void add_common(CLI::App* app, cli::Options& o) {
  app->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "output directory")->capture_default_str();
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--threads", o.threads, "worker threads (default: WASSBARY_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  app->add_option("--tolerance", o.tolerance, "stop once the gradient norm falls below this")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-iters", o.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  app->add_option("--tau", o.tau, "step size in (0, 1]")->check(CLI::Range(0.0, 1.0));
  app->add_flag("--strict", o.strict, "exit with status 4 when the descent does not converge");
}

int exit_code(wassbary::ErrorKind k) {
  using wassbary::ErrorKind;
  switch (k) {
    case ErrorKind::Domain: return cli::kUsage;
    case ErrorKind::Shape:
    case ErrorKind::Representation:
    case ErrorKind::Parse: return cli::kParse;
    case ErrorKind::Conditioning:
    case ErrorKind::Capacity: return cli::kNumerical;
    case ErrorKind::Io: return cli::kIo;
  }
  return cli::kNumerical;
}

void write_manifest(const cli::Options& o, const cli::Report& r, int status, const std::string& error, double seconds) {
  nlohmann::json m{{"command", o.command},
                   {"version", wassbary::kVersion},
                   {"seed", o.seed.value_or(r.seed)},
                   {"threads", wassbary::thread_count()},
                   {"kernels", std::string(wassbary::kernels::to_string(wassbary::kernels::active().isa))},
                   {"config", r.config},
                   {"inputs", o.inputs},
                   {"outputs", r.outputs},
                   {"converged", r.converged},
                   {"exit_status", status},
                   {"wall_time_seconds", seconds}};
  if (!error.empty()) m["error"] = error;
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  try {
    wassbary::io::write_json(std::filesystem::path(o.out) / "manifest.json", m);
  } catch (const std::exception& e) {
    std::cerr << "wassbary: " << e.what() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein barycenters, multicouplings and warped point process registration"};
  app.set_version_flag("--version", wassbary::kVersion);
  app.require_subcommand(1, 1);
  cli::Options o;

  auto* bary = app.add_subcommand("barycenter", "barycenter of measures read from JSON files");
  bary->add_option("inputs", o.inputs, "measure files")->required()->check(CLI::ExistingFile);
  add_common(bary, o);

  auto* multi = app.add_subcommand("multicouple", "barycenter, Procrustes maps and routed multicoupling");
  multi->add_option("inputs", o.inputs, "measure files")->required()->check(CLI::ExistingFile);
  add_common(multi, o);

  auto* sim = app.add_subcommand("simulate", "simulate warped Poisson patterns and register them");
  sim->add_option("--patterns", o.patterns, "number of patterns")->check(CLI::PositiveNumber);
  sim->add_option("--intensity", o.intensity, "expected points per pattern")->check(CLI::PositiveNumber);
  sim->add_option("--dim", o.dim, "dimension of the unit window")->check(CLI::PositiveNumber);
  add_common(sim, o);

  auto* exp = app.add_subcommand("experiment", "consistency experiment over a nested (n, tau) design");
  add_common(exp, o);

  auto* fig = app.add_subcommand("figures", "regenerate plotting data for a scenario");
  fig->add_option("scenario", o.scenario, "scenario name")
      ->required()
      ->check(CLI::IsMember(wassbary::scenarios::scenario_names()));
  add_common(fig, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }
  for (auto* sub : {bary, multi, sim, exp, fig})
    if (sub->parsed()) o.command = sub->get_name();
  if (o.threads) wassbary::set_thread_count(*o.threads);

  const auto start = std::chrono::steady_clock::now();
  cli::Report report;
  int status = cli::kOk;
  std::string error;
  try {
    if (o.command == "barycenter") cli::run_barycenter(o, report);
    else if (o.command == "multicouple") cli::run_multicouple(o, report);
    else if (o.command == "simulate") cli::run_simulate(o, report);
    else if (o.command == "experiment") cli::run_experiment(o, report);
    else cli::run_figures(o, report);
    if (o.strict && !report.converged) {
      status = cli::kNumerical;
      error = "descent did not converge";
    }
  } catch (const wassbary::Error& e) {
    status = exit_code(e.kind());
    error = e.what();
  } catch (const nlohmann::json::exception& e) {
    status = cli::kParse;
    error = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    status = cli::kIo;
    error = e.what();
  } catch (const std::exception& e) {
    status = cli::kNumerical;
    error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!error.empty()) std::cerr << "wassbary " << o.command << ": " << error << "\n";
  write_manifest(o, report, status, error, seconds);
  return status;
}
