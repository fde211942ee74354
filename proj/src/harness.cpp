#include "crosscheck/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "crosscheck/rng.hpp"
#include "crosscheck/scaling.hpp"

namespace crosscheck {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("invalid config JSON " + path.string() + ": " + e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : ".";
  ExperimentConfig c;
  try {
    c.topology_file = resolve(base, j.at("topology").get<std::string>());
    c.demand_file = resolve(base, j.at("demand").get<std::string>());
    c.forwarding_file = resolve(base, j.at("forwarding").get<std::string>());
    const auto& profiles = j.at("profiles");
    c.link_profile = resolve(base, profiles.at("link").get<std::string>());
    c.router_profile = resolve(base, profiles.at("router").get<std::string>());
    c.path_profile = resolve(base, profiles.at("path").get<std::string>());
    c.output_dir = resolve(base, j.value("output_dir", std::string("out")));
    c.snapshots = j.value("snapshots", c.snapshots);
    c.calibration_split = j.value("calibration_split", c.calibration_split);
    c.seed = j.value("seed", c.seed);
    c.bias_pct = j.value("bias_pct", c.bias_pct);
    c.abstain_enabled = j.value("abstain_enabled", c.abstain_enabled);
    c.workers = j.value("workers", c.workers);
    if (j.contains("repair")) {
      const auto& r = j.at("repair");
      c.repair.rounds = r.value("rounds", c.repair.rounds);
      c.repair.cluster_threshold_pct =
          r.value("cluster_threshold_pct", c.repair.cluster_threshold_pct);
      c.repair.zero_floor_bps = r.value("zero_floor_bps", c.repair.zero_floor_bps);
      c.repair.lock_batch = r.value("lock_batch", c.repair.lock_batch);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      c.sweep_preset = s.value("preset", std::string());
      c.sweep_trials = s.value("trials", 0);
      if (s.contains("levels")) c.sweep_levels = s.at("levels").get<std::vector<double>>();
      c.min_bucket_trials = s.value("min_bucket_trials", c.min_bucket_trials);
    }
  } catch (const json::exception& e) {
    throw Error("config schema violation in " + path.string() + ": " + e.what());
  }
  if (c.calibration_split > c.snapshots) {
    throw Error("calibration_split exceeds snapshot count");
  }
  c.repair.validate();
  return c;
}

void ExperimentConfig::save(const fs::path& path) const {
  json j;
  j["topology"] = topology_file.string();
  j["demand"] = demand_file.string();
  j["forwarding"] = forwarding_file.string();
  j["profiles"] = {{"link", link_profile.string()},
                   {"router", router_profile.string()},
                   {"path", path_profile.string()}};
  j["output_dir"] = output_dir.string();
  j["snapshots"] = snapshots;
  j["calibration_split"] = calibration_split;
  j["seed"] = seed;
  j["bias_pct"] = bias_pct;
  j["abstain_enabled"] = abstain_enabled;
  j["workers"] = workers;
  j["repair"] = {{"rounds", repair.rounds},
                 {"cluster_threshold_pct", repair.cluster_threshold_pct},
                 {"zero_floor_bps", repair.zero_floor_bps},
                 {"lock_batch", repair.lock_batch}};
  j["sweep"] = {{"preset", sweep_preset},
                {"trials", sweep_trials},
                {"levels", sweep_levels},
                {"min_bucket_trials", min_bucket_trials}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write config: " + path.string());
  out << j.dump(2) << "\n";
}

Workspace open_workspace(const ExperimentConfig& config) {
  Workspace ws;
  ws.bundle = load_network_bundle(config.topology_file, config.demand_file,
                                  config.forwarding_file);
  ws.profiles = NoiseProfileSet::load(config.link_profile, config.router_profile,
                                      config.path_profile);
  ws.truth = compute_demand_load(ws.bundle.topology, ws.bundle.demand,
                                 ws.bundle.forwarding);
  return ws;
}

SnapshotTelemetry make_snapshot(const Workspace& ws, std::uint64_t base_seed,
                                std::uint64_t index) {
  SnapshotTelemetry ideal = generate_ideal_telemetry(
      ws.bundle.topology, ws.bundle.demand, ws.bundle.forwarding);
  ideal.timestamp = static_cast<double>(index) * 900.0;  // 15-minute cadence
  return apply_invariant_matched_noise(ideal, ws.bundle.topology, ws.profiles,
                                       derive_seed(base_seed, 0x535e4, index));
}

namespace {

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  unsigned n = workers > 0 ? static_cast<unsigned>(workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, count == 0 ? 1 : static_cast<unsigned>(count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string snapshot_name(std::size_t index) {
  std::ostringstream oss;
  oss << "snapshot_" << std::setw(5) << std::setfill('0') << index << ".json";
  return oss.str();
}

RepairParams trial_repair_params(const ExperimentConfig& config, std::uint64_t seed) {
  RepairParams p = config.repair;
  p.seed = seed;
  return p;
}

CalibrationResult calibrate_workspace(const ExperimentConfig& config,
                                      const Workspace& ws) {
  if (config.calibration_split < 2) {
    throw Error("calibration needs at least 2 snapshots");
  }
  std::vector<CalibrationSnapshot> history(config.calibration_split);
  parallel_for(history.size(), config.workers, [&](std::size_t i) {
    const SnapshotTelemetry snap = make_snapshot(ws, config.seed, i);
    CalibrationSnapshot cs;
    cs.l_demand = ws.truth;
    cs.repair = repair(ws.bundle.topology, snap, ws.truth,
                       trial_repair_params(config, derive_seed(config.seed, 0xca1, i)));
    history[i] = std::move(cs);
  });
  return calibrate(history, config.bias_pct, config.repair.zero_floor_bps);
}

}  // namespace

fs::path run_generate(const ExperimentConfig& config) {
  const Workspace ws = open_workspace(config);
  const fs::path dir = config.output_dir / "snapshots";
  fs::create_directories(dir);
  parallel_for(static_cast<std::size_t>(config.snapshots), config.workers,
               [&](std::size_t i) {
                 const SnapshotTelemetry snap = make_snapshot(ws, config.seed, i);
                 save_snapshot(snap, dir / snapshot_name(i));
               });
  json manifest;
  manifest["snapshots"] = config.snapshots;
  manifest["calibration_split"] = config.calibration_split;
  manifest["seed"] = config.seed;
  manifest["topology"] = config.topology_file.string();
  manifest["demand"] = config.demand_file.string();
  manifest["forwarding"] = config.forwarding_file.string();
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  return dir;
}

CalibrationResult run_calibrate(const ExperimentConfig& config,
                                const fs::path& out_file) {
  const Workspace ws = open_workspace(config);
  const CalibrationResult calib = calibrate_workspace(config, ws);
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  calib.save(out_file);
  return calib;
}

ValidateReport run_validate(const ValidateInputs& inputs) {
  const CalibrationResult calib = CalibrationResult::load(inputs.calibration_file);
  const Topology topo = load_topology_file(inputs.topology_file);
  const DemandMatrix demand = load_demand_file(inputs.demand_file, &topo);

  fs::path latest;
  for (const auto& entry : fs::directory_iterator(inputs.telemetry_dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && entry.path().extension() == ".json") {
      if (latest.empty() || name > latest.filename().string()) latest = entry.path();
    }
  }
  if (latest.empty()) {
    throw Error("no snapshot_*.json files in " + inputs.telemetry_dir.string());
  }
  const SnapshotTelemetry snap = load_snapshot(latest);

  const LinkLoadMap l_demand = compute_demand_load(topo, demand, snap.forwarding);
  const RepairResult repaired =
      repair(topo, snap, l_demand, inputs.repair, RepairMode::full);

  ValidateOptions opts;
  opts.zero_floor_bps = inputs.repair.zero_floor_bps;
  opts.abstain_enabled = inputs.abstain_enabled;
  ValidateReport report;
  report.demand_verdict = validate_demand(l_demand, repaired, calib, opts);
  report.tau_pct = calib.tau_pct;
  report.gamma = calib.gamma;

  const auto status = validate_topology(snap, repaired, topo, inputs.repair.zero_floor_bps);
  for (const auto& v : status) {
    if (v.disagrees_with_input) ++report.topology_disagreements;
  }

  std::vector<std::pair<double, LinkId>> imbalances;
  for (const auto& [link, final_load] : repaired.l_final) {
    const double corrected = l_demand.at(link) * (1.0 + calib.bias_pct / 100.0);
    imbalances.emplace_back(
        percent_diff(corrected, final_load, inputs.repair.zero_floor_bps), link);
  }
  std::sort(imbalances.rbegin(), imbalances.rend());

  std::ostringstream oss;
  oss << "decision: " << to_string(report.demand_verdict.decision) << "\n"
      << "consistency_fraction: " << std::setprecision(6)
      << report.demand_verdict.consistency_fraction << "\n"
      << "tau_pct: " << calib.tau_pct << "\n"
      << "gamma: " << calib.gamma << "\n"
      << "snapshot: " << latest.filename().string() << "\n"
      << "topology_disagreements: " << report.topology_disagreements << "\n"
      << "worst_links (percent_diff desc):\n";
  for (std::size_t i = 0; i < imbalances.size() && i < 10; ++i) {
    oss << "  " << imbalances[i].second << " " << std::setprecision(4)
        << imbalances[i].first << "%\n";
  }
  report.text = oss.str();
  switch (report.demand_verdict.decision) {
    case Decision::correct: report.exit_code = 0; break;
    case Decision::incorrect: report.exit_code = 2; break;
    case Decision::abstain: report.exit_code = 3; break;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sweep presets
// ---------------------------------------------------------------------------

namespace {

struct TrialRow {
  std::string series;
  std::string kind;
  std::string scope;
  double level_pct = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double achieved_pct = 0.0;
  std::string decision;
  double fraction = 0.0;
  bool positive = false;
  std::string error;
  int wrong_before = -1;
  int wrong_after = -1;
  double corrected_fraction = -1.0;
};

struct SummaryAccum {
  int trials = 0;
  double num = 0.0;
  double den = 0.0;
  std::string rate_kind;
};

struct SummaryKey {
  std::string series, kind, scope;
  double bucket = 0.0;
  bool operator<(const SummaryKey& o) const {
    return std::tie(series, kind, scope, bucket) <
           std::tie(o.series, o.kind, o.scope, o.bucket);
  }
};

class SweepOutput {
 public:
  SweepOutput(const fs::path& dir, const std::string& preset, int min_bucket_trials)
      : preset_(preset), min_bucket_trials_(min_bucket_trials) {
    fs::create_directories(dir);
    trials_csv_.open(dir / (preset + "_trials.csv"));
    summary_csv_.open(dir / (preset + "_summary.csv"));
    if (!trials_csv_ || !summary_csv_) {
      throw Error("cannot write sweep CSVs under " + dir.string());
    }
    trials_csv_ << "preset,series,kind,scope,level_pct,trial,seed,achieved_pct,"
                   "decision,consistency_fraction,wrong_before,wrong_after,"
                   "corrected_fraction,error\n";
  }

  void trial(const TrialRow& row) {
    trials_csv_ << preset_ << ',' << row.series << ',' << row.kind << ','
                << row.scope << ',' << row.level_pct << ',' << row.trial << ','
                << row.seed << ',' << std::setprecision(6) << row.achieved_pct
                << ',' << row.decision << ',' << std::setprecision(6)
                << row.fraction << ',';
    if (row.wrong_before >= 0) trials_csv_ << row.wrong_before;
    trials_csv_ << ',';
    if (row.wrong_after >= 0) trials_csv_ << row.wrong_after;
    trials_csv_ << ',';
    if (row.corrected_fraction >= 0) {
      trials_csv_ << std::setprecision(6) << row.corrected_fraction;
    }
    trials_csv_ << ',' << row.error << "\n";
  }

  void tally(const std::string& series, const std::string& kind,
             const std::string& scope, double bucket, double num, double den,
             const std::string& rate_kind) {
    auto& cell = summary_[{series, kind, scope, bucket}];
    cell.trials += 1;
    cell.num += num;
    cell.den += den;
    cell.rate_kind = rate_kind;
  }

  void finish() {
    summary_csv_ << "preset,series,kind,scope,bucket_pct,trials,rate_kind,rate\n";
    for (const auto& [key, cell] : summary_) {
      if (cell.trials < min_bucket_trials_) continue;
      summary_csv_ << preset_ << ',' << key.series << ',' << key.kind << ','
                   << key.scope << ',' << key.bucket << ',' << cell.trials << ','
                   << cell.rate_kind << ',' << std::setprecision(6)
                   << (cell.den > 0 ? cell.num / cell.den : 0.0) << "\n";
    }
  }

 private:
  std::string preset_;
  int min_bucket_trials_;
  std::ofstream trials_csv_;
  std::ofstream summary_csv_;
  std::map<SummaryKey, SummaryAccum> summary_;
};

struct SweepContext {
  const ExperimentConfig& config;
  const Workspace& ws;
  CalibrationResult calib;
  int preset_id = 0;

  std::uint64_t trial_seed(std::size_t i) const {
    return derive_seed(config.seed, 0x5eed + preset_id, i);
  }
  std::uint64_t snapshot_index(std::size_t i) const {
    return (static_cast<std::uint64_t>(preset_id) << 20) + i;
  }

  Verdict judge(const SnapshotTelemetry& snap, const LinkLoadMap& l_demand,
                std::uint64_t repair_seed, RepairMode mode = RepairMode::full) const {
    const RepairResult rr = repair(ws.bundle.topology, snap, l_demand,
                                   trial_repair_params(config, repair_seed), mode);
    ValidateOptions opts;
    opts.zero_floor_bps = config.repair.zero_floor_bps;
    opts.abstain_enabled = config.abstain_enabled;
    return validate_demand(l_demand, rr, calib, opts);
  }
};

constexpr double kMagnitudeBands[4][2] = {{5, 15}, {15, 25}, {25, 35}, {35, 45}};

void demand_sweep(const SweepContext& ctx, SweepOutput& out, FaultKind kind) {
  const int trials = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 1200;
  std::vector<TrialRow> rows(trials);
  parallel_for(rows.size(), ctx.config.workers, [&](std::size_t i) {
    TrialRow row;
    row.trial = i;
    row.seed = ctx.trial_seed(i);
    row.kind = to_string(kind);
    row.scope = "random";
    try {
      Rng trng(derive_seed(row.seed, 1));
      // Every 20th trial is a clean control so the 0% bucket carries FPR data.
      const bool control = (i % 20 == 19);
      const double fraction = control ? 0.0 : trng.uniform(0.05, 0.45);
      const auto& band = kMagnitudeBands[trng.index(4)];
      row.level_pct = fraction * 100.0;

      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      DemandMatrix input = ctx.ws.bundle.demand;
      double achieved = 0.0;
      if (fraction > 0.0) {
        FaultSpec spec{kind, FaultScope::random_signals, fraction, band[0], band[1],
                       derive_seed(row.seed, 2)};
        auto [perturbed, pct] = perturb_demand(ctx.ws.bundle.demand, spec);
        input = std::move(perturbed);
        achieved = pct;
      }
      row.achieved_pct = achieved;
      const LinkLoadMap l_demand = compute_demand_load(
          ctx.ws.bundle.topology, input, ctx.ws.bundle.forwarding);
      const Verdict v = ctx.judge(snap, l_demand, derive_seed(row.seed, 3));
      row.decision = to_string(v.decision);
      row.fraction = v.consistency_fraction;
      row.positive = v.decision == Decision::incorrect;
      const double bucket = std::round(achieved);
      row.series = bucket == 0.0 ? "fpr" : "tpr";
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[i] = std::move(row);
  });
  for (const auto& row : rows) {
    out.trial(row);
    if (row.error.empty()) {
      out.tally(row.series, row.kind, row.scope, std::round(row.achieved_pct),
                row.positive ? 1 : 0, 1, row.series);
    }
  }
}

void counter_zero_sweep(const SweepContext& ctx, SweepOutput& out) {
  std::vector<double> levels = ctx.config.sweep_levels;
  if (levels.empty()) levels = {0, 5, 10, 15, 20, 25, 30, 35, 40, 45};
  const int per_level = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 50;
  const std::size_t total = levels.size() * static_cast<std::size_t>(per_level);
  std::vector<std::array<TrialRow, 2>> rows(total);
  parallel_for(total, ctx.config.workers, [&](std::size_t i) {
    const double level = levels[i / per_level];
    TrialRow fpr_row;
    fpr_row.trial = i;
    fpr_row.seed = ctx.trial_seed(i);
    fpr_row.kind = "counter_zero";
    fpr_row.scope = "random";
    fpr_row.level_pct = level;
    TrialRow tpr_row = fpr_row;
    fpr_row.series = "fpr";
    tpr_row.series = "tpr10";
    try {
      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      FaultSpec spec{FaultKind::counter_zero, FaultScope::random_signals,
                     level / 100.0, 0, 0, derive_seed(fpr_row.seed, 2)};
      const SnapshotTelemetry corrupted =
          corrupt_counters(snap, ctx.ws.bundle.topology, spec);
      const double achieved = 100.0 * changed_signal_fraction(snap, corrupted);
      fpr_row.achieved_pct = achieved;
      tpr_row.achieved_pct = achieved;

      const Verdict clean = ctx.judge(corrupted, ctx.ws.truth, derive_seed(fpr_row.seed, 3));
      fpr_row.decision = to_string(clean.decision);
      fpr_row.fraction = clean.consistency_fraction;
      fpr_row.positive = clean.decision == Decision::incorrect;

      // Companion series: the same corrupted telemetry with ~10% of demand
      // volume removed; detection must survive the zeroing.
      FaultSpec demand_spec{FaultKind::demand_remove, FaultScope::random_signals,
                            0.25, 35, 45, derive_seed(tpr_row.seed, 4)};
      auto [perturbed, pct] = perturb_demand(ctx.ws.bundle.demand, demand_spec);
      const LinkLoadMap l_demand = compute_demand_load(
          ctx.ws.bundle.topology, perturbed, ctx.ws.bundle.forwarding);
      const Verdict buggy = ctx.judge(corrupted, l_demand, derive_seed(tpr_row.seed, 5));
      tpr_row.decision = to_string(buggy.decision);
      tpr_row.fraction = buggy.consistency_fraction;
      tpr_row.positive = buggy.decision == Decision::incorrect;
    } catch (const std::exception& e) {
      fpr_row.error = e.what();
      tpr_row.error = e.what();
    }
    rows[i] = {std::move(fpr_row), std::move(tpr_row)};
  });
  for (const auto& pair : rows) {
    for (const auto& row : pair) {
      out.trial(row);
      if (row.error.empty()) {
        out.tally(row.series, row.kind, row.scope, row.level_pct,
                  row.positive ? 1 : 0, 1, row.series == "fpr" ? "fpr" : "tpr");
      }
    }
  }
}

void correlated_grid_sweep(const SweepContext& ctx, SweepOutput& out) {
  std::vector<double> levels = ctx.config.sweep_levels;
  if (levels.empty()) levels = {0, 5, 10, 15, 20, 25, 30, 35, 40, 45};
  const int per_cell = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 40;
  struct Combo {
    FaultKind kind;
    FaultScope scope;
  };
  const std::vector<Combo> combos = {
      {FaultKind::counter_zero, FaultScope::random_signals},
      {FaultKind::counter_zero, FaultScope::correlated_routers},
      {FaultKind::counter_scale, FaultScope::random_signals},
      {FaultKind::counter_scale, FaultScope::correlated_routers},
  };
  const std::size_t total = combos.size() * levels.size() * per_cell;
  std::vector<TrialRow> rows(total);
  parallel_for(total, ctx.config.workers, [&](std::size_t i) {
    const std::size_t combo_idx = i / (levels.size() * per_cell);
    const std::size_t level_idx = (i / per_cell) % levels.size();
    const Combo combo = combos[combo_idx];
    TrialRow row;
    row.trial = i;
    row.seed = ctx.trial_seed(i);
    row.series = "fpr";
    row.kind = to_string(combo.kind);
    row.scope = to_string(combo.scope);
    row.level_pct = levels[level_idx];
    try {
      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      FaultSpec spec{combo.kind, combo.scope, levels[level_idx] / 100.0, 25, 75,
                     derive_seed(row.seed, 2)};
      const SnapshotTelemetry corrupted =
          corrupt_counters(snap, ctx.ws.bundle.topology, spec);
      row.achieved_pct = 100.0 * changed_signal_fraction(snap, corrupted);
      const Verdict v = ctx.judge(corrupted, ctx.ws.truth, derive_seed(row.seed, 3));
      row.decision = to_string(v.decision);
      row.fraction = v.consistency_fraction;
      row.positive = v.decision == Decision::incorrect;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[i] = std::move(row);
  });
  for (const auto& row : rows) {
    out.trial(row);
    if (row.error.empty()) {
      out.tally(row.series, row.kind, row.scope, row.level_pct,
                row.positive ? 1 : 0, 1, "fpr");
    }
  }
}

void fwd_drop_sweep(const SweepContext& ctx, SweepOutput& out) {
  std::vector<double> levels = ctx.config.sweep_levels;
  if (levels.empty()) levels = {0, 5, 10, 15, 20, 25, 30};
  const int per_level = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 50;
  const std::size_t total = levels.size() * per_level;
  const double routers =
      static_cast<double>(ctx.ws.bundle.topology.internal_nodes().size());
  std::vector<TrialRow> rows(total);
  parallel_for(total, ctx.config.workers, [&](std::size_t i) {
    const double level = levels[i / per_level];
    TrialRow row;
    row.trial = i;
    row.seed = ctx.trial_seed(i);
    row.series = "fpr";
    row.kind = "fwd_drop";
    row.scope = "correlated";
    row.level_pct = level;
    try {
      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      const ForwardingState reported = drop_forwarding_entries(
          ctx.ws.bundle.forwarding, ctx.ws.bundle.topology, level / 100.0,
          derive_seed(row.seed, 2));
      row.achieved_pct =
          100.0 * std::floor(level / 100.0 * routers) / routers;
      // The validator sees the reported (broken) forwarding; counters still
      // reflect the true traffic produced by the intact network.
      const LinkLoadMap l_demand = compute_demand_load(
          ctx.ws.bundle.topology, ctx.ws.bundle.demand, reported);
      const Verdict v = ctx.judge(snap, l_demand, derive_seed(row.seed, 3));
      row.decision = to_string(v.decision);
      row.fraction = v.consistency_fraction;
      row.positive = v.decision == Decision::incorrect;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[i] = std::move(row);
  });
  for (const auto& row : rows) {
    out.trial(row);
    if (row.error.empty()) {
      out.tally(row.series, row.kind, row.scope, row.level_pct,
                row.positive ? 1 : 0, 1, "fpr");
    }
  }
}

void factor_analysis_sweep(const SweepContext& ctx, SweepOutput& out) {
  const int per_cell = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 60;
  const double level = ctx.config.sweep_levels.empty() ? 30.0
                                                       : ctx.config.sweep_levels.front();
  struct Combo {
    FaultKind kind;
    FaultScope scope;
  };
  const std::vector<Combo> combos = {
      {FaultKind::counter_zero, FaultScope::random_signals},
      {FaultKind::counter_zero, FaultScope::correlated_routers},
      {FaultKind::counter_scale, FaultScope::random_signals},
      {FaultKind::counter_scale, FaultScope::correlated_routers},
  };
  const std::vector<std::pair<std::string, RepairMode>> modes = {
      {"no_repair", RepairMode::none},
      {"single_no_demand", RepairMode::single_pass_no_demand},
      {"single_full", RepairMode::single_pass},
      {"full", RepairMode::full},
  };
  const std::size_t total = combos.size() * per_cell;
  std::vector<std::vector<TrialRow>> rows(total);
  parallel_for(total, ctx.config.workers, [&](std::size_t i) {
    const Combo combo = combos[i / per_cell];
    std::vector<TrialRow> trial_rows;
    const std::uint64_t seed = ctx.trial_seed(i);
    try {
      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      FaultSpec spec{combo.kind, combo.scope, level / 100.0, 25, 75,
                     derive_seed(seed, 2)};
      const SnapshotTelemetry corrupted =
          corrupt_counters(snap, ctx.ws.bundle.topology, spec);
      const double achieved = 100.0 * changed_signal_fraction(snap, corrupted);
      // Same corrupted snapshot across modes: paired comparison.
      for (const auto& [name, mode] : modes) {
        TrialRow row;
        row.trial = i;
        row.seed = seed;
        row.series = name;
        row.kind = to_string(combo.kind);
        row.scope = to_string(combo.scope);
        row.level_pct = level;
        row.achieved_pct = achieved;
        const Verdict v = ctx.judge(corrupted, ctx.ws.truth, derive_seed(seed, 3), mode);
        row.decision = to_string(v.decision);
        row.fraction = v.consistency_fraction;
        row.positive = v.decision == Decision::incorrect;
        trial_rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      TrialRow row;
      row.trial = i;
      row.seed = seed;
      row.kind = to_string(combo.kind);
      row.scope = to_string(combo.scope);
      row.level_pct = level;
      row.error = e.what();
      trial_rows.push_back(std::move(row));
    }
    rows[i] = std::move(trial_rows);
  });
  for (const auto& trial_rows : rows) {
    for (const auto& row : trial_rows) {
      out.trial(row);
      if (row.error.empty()) {
        out.tally(row.series, row.kind, row.scope, row.level_pct,
                  row.positive ? 1 : 0, 1, "fpr");
      }
    }
  }
}

void topology_repair_sweep(const SweepContext& ctx, SweepOutput& out) {
  const Topology& topo = ctx.ws.bundle.topology;
  const double routers = static_cast<double>(topo.internal_nodes().size());
  std::vector<double> levels = ctx.config.sweep_levels;
  if (levels.empty()) {
    for (int k = 1; k <= static_cast<int>(std::floor(routers * 0.28)); ++k) {
      levels.push_back(100.0 * k / routers);
    }
  }
  const int per_level = ctx.config.sweep_trials > 0 ? ctx.config.sweep_trials : 40;
  const std::size_t total = levels.size() * per_level;
  const double link_count = static_cast<double>(topo.links().size());
  std::vector<TrialRow> rows(total);
  parallel_for(total, ctx.config.workers, [&](std::size_t i) {
    const double level = levels[i / per_level];
    TrialRow row;
    row.trial = i;
    row.seed = ctx.trial_seed(i);
    row.series = "repair";
    row.kind = "status_lie";
    row.scope = "correlated";
    row.level_pct = level;
    try {
      const SnapshotTelemetry snap =
          make_snapshot(ctx.ws, ctx.config.seed, ctx.snapshot_index(i));
      const SnapshotTelemetry lied = corrupt_link_status(
          snap, topo, level / 100.0, derive_seed(row.seed, 2));
      row.achieved_pct = 100.0 * std::floor(level / 100.0 * routers) / routers;
      const RepairResult rr =
          repair(topo, lied, ctx.ws.truth,
                 trial_repair_params(ctx.config, derive_seed(row.seed, 3)));
      const auto before = infer_status_from_signals(lied, topo);
      const auto after = validate_topology(lied, rr, topo,
                                           ctx.config.repair.zero_floor_bps);
      int wrong_before = 0, wrong_after = 0, corrected = 0;
      for (std::size_t li = 0; li < before.size(); ++li) {
        // Ground truth: every link is actually up.
        const bool down_before = before[li].inferred == LinkStatus::down;
        const bool down_after = after[li].inferred == LinkStatus::down;
        if (down_before) ++wrong_before;
        if (down_after) ++wrong_after;
        if (down_before && !down_after) ++corrected;
      }
      row.wrong_before = wrong_before;
      row.wrong_after = wrong_after;
      row.corrected_fraction =
          wrong_before > 0 ? static_cast<double>(corrected) / wrong_before : 1.0;
      row.decision = "n/a";
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[i] = std::move(row);
  });
  for (const auto& row : rows) {
    out.trial(row);
    if (row.error.empty()) {
      out.tally("corrected", row.kind, row.scope, row.level_pct,
                row.corrected_fraction * std::max(row.wrong_before, 0),
                std::max(row.wrong_before, 0), "corrected_share");
      out.tally("up_before", row.kind, row.scope, row.level_pct,
                link_count - row.wrong_before, link_count, "fraction_up");
      out.tally("up_after", row.kind, row.scope, row.level_pct,
                link_count - row.wrong_after, link_count, "fraction_up");
    }
  }
}

}  // namespace

void run_sweep(const ExperimentConfig& config) {
  static const std::map<std::string, int> kPresets = {
      {"demand_remove", 1},   {"demand_stale", 2},    {"counter_zero", 3},
      {"correlated_grid", 4}, {"fwd_drop", 5},        {"factor_analysis", 6},
      {"topology_repair", 7},
  };
  auto it = kPresets.find(config.sweep_preset);
  if (it == kPresets.end()) {
    throw Error("unknown sweep preset '" + config.sweep_preset + "'");
  }
  const Workspace ws = open_workspace(config);
  SweepContext ctx{config, ws, {}, it->second};
  ctx.calib = calibrate_workspace(config, ws);
  fs::create_directories(config.output_dir);
  ctx.calib.save(config.output_dir / "calibration.json");
  SweepOutput out(config.output_dir, config.sweep_preset, config.min_bucket_trials);

  switch (it->second) {
    case 1: demand_sweep(ctx, out, FaultKind::demand_remove); break;
    case 2: demand_sweep(ctx, out, FaultKind::demand_stale); break;
    case 3: counter_zero_sweep(ctx, out); break;
    case 4: correlated_grid_sweep(ctx, out); break;
    case 5: fwd_drop_sweep(ctx, out); break;
    case 6: factor_analysis_sweep(ctx, out); break;
    case 7: topology_repair_sweep(ctx, out); break;
  }
  out.finish();
}

std::string run_scaling_csv(const ScalingRequest& request) {
  std::ostringstream oss;
  oss << "n,gamma,p,p_prime,fpr,fpr_bound,one_minus_tpr,one_minus_tpr_bound\n";
  for (long n : request.n_list) {
    ScalingParams params{n, request.p, request.p_prime, request.gamma};
    if (request.target_fpr) {
      params.gamma = cutoff_for_target(n, request.p, *request.target_fpr);
      if (params.gamma <= request.p_prime) {
        throw Error("tuned cutoff " + std::to_string(params.gamma) +
                    " not above p_prime at n=" + std::to_string(n));
      }
    }
    const ScalingRates exact = exact_rates(params);
    const ScalingRates bounds = chernoff_bounds(params);
    oss << n << ',' << std::setprecision(10) << params.gamma << ',' << request.p
        << ',' << request.p_prime << ',' << exact.fpr << ',' << bounds.fpr << ','
        << exact.one_minus_tpr << ',' << bounds.one_minus_tpr << "\n";
  }
  return oss.str();
}

}  // namespace crosscheck
