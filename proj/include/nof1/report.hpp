#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nof1/metrics.hpp"
#include "nof1/trial.hpp"

namespace nof1 {

/// Batch-run description: which (scenario, design) cells to simulate, how
/// many patients, and where outputs go. `trial` carries the per-trial knobs
/// (phase lengths, sampler, action set); its scenario/design/root_seed
/// fields are overwritten per cell.
struct RunManifest {
  std::uint64_t root_seed = 20240601;
  std::vector<Scenario> scenarios = {Scenario::I, Scenario::II, Scenario::III, Scenario::IV,
                                     Scenario::V,  Scenario::VI, Scenario::VII};
  std::vector<Design> designs = {Design::AB, Design::BA};
  int patients = 100;
  std::string out_dir = "out";
  int jobs = 1;
  TrialConfig trial;
};

inline std::vector<Scenario> parse_scenario_filter(const std::string& text) {
  if (text == "all")
    return {Scenario::I, Scenario::II, Scenario::III, Scenario::IV,
            Scenario::V,  Scenario::VI, Scenario::VII};
  return {parse_scenario(text)};
}

inline std::vector<Design> parse_design_filter(const std::string& text) {
  if (text == "all") return {Design::AB, Design::BA};
  return {parse_design(text)};
}

inline ActionSet action_set_from_json(const nlohmann::json& array) {
  std::vector<ActionDef> defs;
  defs.reserve(array.size());
  for (const auto& item : array)
    defs.push_back({item.at("label").get<std::string>(), item.at("type_id").get<int>(),
                    item.at("intensity").get<double>(), item.at("duration_min").get<int>()});
  return ActionSet(defs);
}

inline void apply_config_json(RunManifest& manifest, const nlohmann::json& j) {
  if (j.contains("seed")) manifest.root_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("patients")) manifest.patients = j.at("patients").get<int>();
  if (j.contains("scenario"))
    manifest.scenarios = parse_scenario_filter(j.at("scenario").get<std::string>());
  if (j.contains("design"))
    manifest.designs = parse_design_filter(j.at("design").get<std::string>());
  if (j.contains("out")) manifest.out_dir = j.at("out").get<std::string>();
  if (j.contains("jobs")) manifest.jobs = j.at("jobs").get<int>();
  if (j.contains("trial")) {
    const auto& t = j.at("trial");
    if (t.contains("baseline_days")) manifest.trial.baseline_days = t.at("baseline_days").get<int>();
    if (t.contains("phase_days")) manifest.trial.phase_days = t.at("phase_days").get<int>();
    if (t.contains("decisions_per_day"))
      manifest.trial.decisions_per_day = t.at("decisions_per_day").get<int>();
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    if (s.contains("warmup_draws")) manifest.trial.sampler.warmup_draws = s.at("warmup_draws").get<int>();
    if (s.contains("kept_draws")) manifest.trial.sampler.kept_draws = s.at("kept_draws").get<int>();
    if (s.contains("chains")) manifest.trial.sampler.chains = s.at("chains").get<int>();
    if (s.contains("initial_scale"))
      manifest.trial.sampler.initial_scale = s.at("initial_scale").get<double>();
  }
  if (j.contains("actions")) manifest.trial.actions = action_set_from_json(j.at("actions"));
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  RunManifest manifest;
  apply_config_json(manifest, j);
  return manifest;
}

/// All per-patient results of one (scenario, design) cell, in patient-id
/// order, plus messages for any failed patients.
struct CellOutcome {
  std::vector<TrialResult> results;
  std::vector<std::string> failures;
};

/// Simulates one cell. Per-patient seeds derive from (root seed, scenario,
/// design, patient id), so outputs do not depend on the parallelism degree
/// or scheduling order.
inline CellOutcome simulate_cell(Scenario scenario, Design design, const RunManifest& manifest) {
  if (manifest.patients < 1) throw std::invalid_argument("simulate_cell: patients must be >= 1");
  TrialConfig base = manifest.trial;
  base.scenario = scenario;
  base.design = design;
  base.root_seed = manifest.root_seed;

  std::vector<TrialResult> slots(manifest.patients);
  std::vector<std::string> errors(manifest.patients);
  const auto simulate_one = [&](int i) {
    const int patient_id = i + 1;
    try {
      Rng truth_rng(derive_seed(patient_seed(manifest.root_seed, scenario, design, patient_id),
                                {seed_tag::kTruth}));
      const PatientTruth truth =
          draw_patient(scenario, patient_id, base.actions.n_types(), truth_rng);
      slots[i] = run_trial(truth, base);
    } catch (const std::exception& e) {
      errors[i] = "patient " + std::to_string(patient_id) + ": " + e.what();
    }
  };

  const int jobs = std::max(1, manifest.jobs);
  if (jobs == 1) {
    for (int i = 0; i < manifest.patients; ++i) simulate_one(i);
  } else {
    std::atomic<int> next{0};
    const auto worker = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= manifest.patients) return;
        simulate_one(i);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }

  CellOutcome outcome;
  for (int i = 0; i < manifest.patients; ++i) {
    if (errors[i].empty())
      outcome.results.push_back(std::move(slots[i]));
    else
      outcome.failures.push_back(std::move(errors[i]));
  }
  return outcome;
}

namespace detail {

inline std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.9g", v);
  return buffer;
}

}  // namespace detail

/// Per-step records, one row per decision point. For baseline/A rows the
/// executed action is the fixed policy itself, so the adaptive and
/// counterfactual delta columns coincide and the probability columns are
/// empty.
inline void write_steps_csv(std::ostream& os, std::span<const TrialResult> results,
                            const ActionSet& actions) {
  os << "patient_id,scenario,design,phase,t,action_index,type_id,intensity,duration_norm,"
        "pain_before,delta_pain_adaptive,delta_pain_fixed_counterfactual,fed_back,"
        "selection_prob_chosen,max_prob,min_prob\n";
  for (const auto& r : results) {
    const auto write_row = [&](const HistoryRecord& rec, const double* fixed_delta,
                               const PolicyDecision* decision) {
      const ExerciseAction& a = actions[rec.action_index];
      os << r.patient_id << ',' << to_string(r.scenario) << ',' << to_string(r.design) << ','
         << to_string(rec.phase) << ',' << rec.t << ',' << rec.action_index << ',' << a.type_id
         << ',' << detail::format_double(a.intensity) << ','
         << detail::format_double(a.duration_norm) << ','
         << detail::format_double(rec.context.pain) << ','
         << detail::format_double(rec.delta_pain) << ','
         << detail::format_double(fixed_delta ? *fixed_delta : rec.delta_pain) << ','
         << (rec.fed_back ? 1 : 0) << ',';
      if (decision) {
        const auto& probs = decision->selection_probs;
        const auto [lo, hi] = std::minmax_element(probs.begin(), probs.end());
        os << detail::format_double(probs[rec.action_index]) << ','
           << detail::format_double(*hi) << ',' << detail::format_double(*lo);
      } else {
        os << ",,";
      }
      os << '\n';
    };
    for (const auto& rec : r.pre_b_records) write_row(rec, nullptr, nullptr);
    for (std::size_t i = 0; i < r.adaptive_records.size(); ++i)
      write_row(r.adaptive_records[i], &r.counterfactual_fixed_deltas[i], &r.decisions[i]);
  }
}

/// Cross-patient quantiles of cumulative regret per decision index
/// (plot-ready series).
inline void write_regret_quantiles_csv(std::ostream& os, std::span<const TrialResult> results) {
  if (results.empty()) throw std::invalid_argument("write_regret_quantiles_csv: no results");
  os << "t,median,q25,q75\n";
  const std::size_t horizon = results.front().regret_series.size();
  std::vector<double> at_t(results.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < results.size(); ++i) at_t[i] = results[i].regret_series.at(t);
    os << (t + 1) << ',' << detail::format_double(quantile(at_t, 0.5)) << ','
       << detail::format_double(quantile(at_t, 0.25)) << ','
       << detail::format_double(quantile(at_t, 0.75)) << '\n';
  }
}

inline nlohmann::ordered_json summary_to_json(const ScenarioSummary& s) {
  return nlohmann::ordered_json{{"scenario", to_string(s.scenario)},
                                {"design", to_string(s.design)},
                                {"n_patients", s.n_patients},
                                {"mean_regret", s.mean_regret},
                                {"regret_q75", s.regret_q75},
                                {"entropy_type", s.entropy_type},
                                {"std_duration", s.std_duration},
                                {"std_intensity", s.std_intensity},
                                {"mean_max_prob", s.mean_max_prob},
                                {"mean_min_prob", s.mean_min_prob}};
}

/// Renders summary rows as a fixed-width table, ordered Scenario I..VII with
/// A-B before B-A, two decimal places throughout.
inline std::string emit_summary_table(std::span<const ScenarioSummary> cells) {
  if (cells.empty()) throw std::invalid_argument("emit_summary_table: no cells");
  std::vector<ScenarioSummary> ordered(cells.begin(), cells.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    return a.design < b.design;
  });
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %-7s %12s %12s %13s %12s %13s %9s %9s\n", "Scenario",
                "Design", "Regret.Mean", "Regret.Q75", "Entropy.Type", "SD.Duration",
                "SD.Intensity", "Prob.Max", "Prob.Min");
  os << line;
  for (const auto& s : ordered) {
    const std::string design = s.design == Design::AB ? "A-B" : "B-A";
    std::snprintf(line, sizeof line, "%-9s %-7s %12.2f %12.2f %13.2f %12.2f %13.2f %9.2f %9.2f\n",
                  to_string(s.scenario), design.c_str(), s.mean_regret, s.regret_q75,
                  s.entropy_type, s.std_duration, s.std_intensity, s.mean_max_prob,
                  s.mean_min_prob);
    os << line;
  }
  return os.str();
}

/// Runs every selected (scenario, design) cell, writing per-cell
/// steps.csv / summary.json / regret_quantiles.csv plus an overall summary
/// table. Returns 0 on full success; failed cells are flagged with a
/// FAILED.txt sidecar and a nonzero status, while remaining cells still run.
/// Output bytes depend only on the manifest, not on the parallelism degree.
inline int run_all(const RunManifest& manifest) {
  namespace fs = std::filesystem;
  if (manifest.patients < 1) throw std::invalid_argument("run_all: patients must be >= 1");
  fs::create_directories(manifest.out_dir);
  std::vector<ScenarioSummary> cells;
  int status = 0;
  for (const Scenario scenario : manifest.scenarios) {
    for (const Design design : manifest.designs) {
      const std::string cell_name =
          std::string(to_string(scenario)) + "_" + to_string(design);
      const fs::path cell_dir = fs::path(manifest.out_dir) / cell_name;
      fs::create_directories(cell_dir);
      const CellOutcome outcome = simulate_cell(scenario, design, manifest);
      if (!outcome.results.empty()) {
        std::ofstream steps(cell_dir / "steps.csv");
        write_steps_csv(steps, outcome.results, manifest.trial.actions);
        std::ofstream quantiles(cell_dir / "regret_quantiles.csv");
        write_regret_quantiles_csv(quantiles, outcome.results);
      }
      if (!outcome.failures.empty()) {
        std::ofstream sidecar(cell_dir / "FAILED.txt");
        for (const auto& message : outcome.failures) sidecar << message << '\n';
        status = 1;
        continue;
      }
      const ScenarioSummary summary = summarize(outcome.results, manifest.trial.actions);
      std::ofstream summary_file(cell_dir / "summary.json");
      summary_file << summary_to_json(summary).dump(2) << '\n';
      cells.push_back(summary);
    }
  }
  if (!cells.empty()) {
    const std::string table = emit_summary_table(cells);
    std::fputs(table.c_str(), stdout);
    std::ofstream table_file(fs::path(manifest.out_dir) / "summary_table.txt");
    table_file << table;
  }
  return status;
}

}  // namespace nof1
