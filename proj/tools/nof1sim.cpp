// Batch driver for the simulation test bed: runs the selected
// scenario x design cells over simulated patients and writes per-step
// records, per-cell summaries, and plot-ready regret quantile series.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "nof1/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulated N-of-1 trials with a Thompson-sampling exercise recommendation agent"};

  std::string config_path;
  std::string scenario = "all";
  std::string design = "all";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int patients = 0;
  int jobs = 0;

  auto* config_opt =
      app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* scenario_opt = app.add_option("--scenario", scenario, "Scenario filter: I..VII or all");
  auto* design_opt = app.add_option("--design", design, "Design filter: AB, BA, or all");
  auto* patients_opt = app.add_option("--patients", patients, "Simulated patients per cell")
                           ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Root seed for all streams");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* jobs_opt =
      app.add_option("--jobs", jobs, "Concurrent patient simulations")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    nof1::RunManifest manifest;
    if (config_opt->count() > 0) manifest = nof1::load_manifest(config_path);
    // Explicit flags override the configuration file.
    if (scenario_opt->count() > 0) manifest.scenarios = nof1::parse_scenario_filter(scenario);
    if (design_opt->count() > 0) manifest.designs = nof1::parse_design_filter(design);
    if (patients_opt->count() > 0) manifest.patients = patients;
    if (seed_opt->count() > 0) manifest.root_seed = seed;
    if (out_opt->count() > 0) manifest.out_dir = out_dir;
    if (jobs_opt->count() > 0) manifest.jobs = jobs;
    return nof1::run_all(manifest);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
