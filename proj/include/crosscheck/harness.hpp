#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crosscheck/bundle_io.hpp"
#include "crosscheck/faults.hpp"
#include "crosscheck/repair.hpp"
#include "crosscheck/validation.hpp"

namespace crosscheck {

struct ExperimentConfig {
  std::filesystem::path topology_file;
  std::filesystem::path demand_file;
  std::filesystem::path forwarding_file;
  std::filesystem::path link_profile;
  std::filesystem::path router_profile;
  std::filesystem::path path_profile;
  std::filesystem::path output_dir = "out";

  int snapshots = 400;
  int calibration_split = 200;
  std::uint64_t seed = 1;
  double bias_pct = 0.0;
  bool abstain_enabled = false;
  RepairParams repair;
  int workers = 0;  // 0 = hardware concurrency

  std::string sweep_preset;
  int sweep_trials = 0;               // 0 = preset default
  std::vector<double> sweep_levels;   // empty = preset default
  int min_bucket_trials = 30;

  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Bundle, profiles and the true demand-implied loads, loaded once per run.
struct Workspace {
  NetworkBundle bundle;
  NoiseProfileSet profiles;
  LinkLoadMap truth;
};
Workspace open_workspace(const ExperimentConfig& config);

// One noise-matched snapshot of the true demand, seeded per snapshot index.
SnapshotTelemetry make_snapshot(const Workspace& ws, std::uint64_t base_seed,
                                std::uint64_t index);

// Writes snapshots/snapshot_NNNNN.json plus a manifest; returns the directory.
std::filesystem::path run_generate(const ExperimentConfig& config);

// Repairs every calibration snapshot and calibrates tau/gamma; writes the
// calibration file and returns it.
CalibrationResult run_calibrate(const ExperimentConfig& config,
                                const std::filesystem::path& out_file);

struct ValidateReport {
  Verdict demand_verdict;
  int topology_disagreements = 0;
  double tau_pct = 0.0;
  double gamma = 0.0;
  std::string text;  // printable report incl. the 10 worst-imbalance links
  int exit_code = 0; // 0 correct, 2 incorrect, 3 abstain
};

struct ValidateInputs {
  std::filesystem::path demand_file;
  std::filesystem::path topology_file;
  std::filesystem::path telemetry_dir;
  std::filesystem::path calibration_file;
  RepairParams repair;
  bool abstain_enabled = false;
};
ValidateReport run_validate(const ValidateInputs& inputs);

// Executes one named sweep preset (demand_remove, demand_stale, counter_zero,
// correlated_grid, fwd_drop, factor_analysis, topology_repair) and writes
// <preset>_trials.csv and <preset>_summary.csv into the output directory.
void run_sweep(const ExperimentConfig& config);

struct ScalingRequest {
  std::vector<long> n_list;
  double p = 0.0;
  double p_prime = 0.0;
  double gamma = 0.6;
  std::optional<double> target_fpr;  // tuned-cutoff mode
};
// Emits one CSV row per n with exact rates and Chernoff bounds.
std::string run_scaling_csv(const ScalingRequest& request);

}  // namespace crosscheck
