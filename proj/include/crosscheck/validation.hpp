#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "crosscheck/network.hpp"
#include "crosscheck/repair.hpp"
#include "crosscheck/telemetry.hpp"

namespace crosscheck {

struct CalibrationResult {
  double tau_pct = 0.0;   // per-link imbalance threshold (75th percentile)
  double gamma = 0.0;     // validation cutoff, just below the observed minimum
  double bias_pct = 0.0;  // systematic demand-vs-counter offset correction
  std::vector<double> window_fractions;  // per-snapshot consistency fractions

  void save(const std::filesystem::path& path) const;
  static CalibrationResult load(const std::filesystem::path& path);
};

// Rejects implausible corrections (|bias| > 20%).
void set_bias_pct(CalibrationResult& calib, double bias_pct);

enum class Decision { correct, incorrect, abstain };
std::string to_string(Decision d);

struct Verdict {
  Decision decision = Decision::incorrect;
  double consistency_fraction = 0.0;
  std::map<LinkId, bool> per_link_satisfied;
};

struct CalibrationSnapshot {
  LinkLoadMap l_demand;
  RepairResult repair;
};

// Pools percent_diff(bias-corrected l_demand, l_final) across a known-good
// window: tau is the nearest-rank 75th percentile, gamma is the minimum
// per-snapshot consistency fraction at tau minus 0.001.
CalibrationResult calibrate(const std::vector<CalibrationSnapshot>& history,
                            double bias_pct, double zero_floor_bps = 1000.0);

struct ValidateOptions {
  double zero_floor_bps = 1000.0;
  // Off by default: report abstain when more than half the links are
  // unestimable (confidence 0).
  bool abstain_enabled = false;
};

// Algorithm-1 style demand validation: a link is satisfied when the
// bias-corrected demand-implied load is within tau of the repaired load;
// the input is correct iff the satisfied fraction strictly exceeds gamma.
Verdict validate_demand(const LinkLoadMap& l_demand, const RepairResult& repaired,
                        const CalibrationResult& calib,
                        const ValidateOptions& opts = {});

struct LinkStatusVerdict {
  LinkId link;
  LinkStatus inferred = LinkStatus::up;
  int up_votes = 0;
  int down_votes = 0;
  bool disagrees_with_input = false;  // input topology lists the link as up
};

// Majority vote over the five per-link signals (four statuses plus
// l_final > zero_floor); ties resolve to down. Missing signals shrink the
// electorate.
std::vector<LinkStatusVerdict> validate_topology(const SnapshotTelemetry& snap,
                                                 const RepairResult& repaired,
                                                 const Topology& topology_input,
                                                 double zero_floor_bps = 1000.0);

// Status-signal-only variant (no load vote); the pre-repair baseline.
std::vector<LinkStatusVerdict> infer_status_from_signals(
    const SnapshotTelemetry& snap, const Topology& topology_input);

}  // namespace crosscheck
