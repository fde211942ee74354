#include "crosscheck/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crosscheck/stats.hpp"

namespace crosscheck {

using nlohmann::json;

void CalibrationResult::save(const std::filesystem::path& path) const {
  json j;
  j["tau_pct"] = tau_pct;
  j["gamma"] = gamma;
  j["bias_pct"] = bias_pct;
  j["window_fractions"] = window_fractions;
  std::ofstream out(path);
  if (!out) throw Error("cannot write calibration file: " + path.string());
  out << j.dump(2) << "\n";
}

CalibrationResult CalibrationResult::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open calibration file: " + path.string());
  json j;
  try {
    in >> j;
    CalibrationResult c;
    c.tau_pct = j.at("tau_pct").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.bias_pct = j.at("bias_pct").get<double>();
    c.window_fractions = j.at("window_fractions").get<std::vector<double>>();
    return c;
  } catch (const json::exception& e) {
    throw Error("invalid calibration file " + path.string() + ": " + e.what());
  }
}

void set_bias_pct(CalibrationResult& calib, double bias_pct) {
  if (std::abs(bias_pct) > 20.0) {
    throw Error("bias correction of " + std::to_string(bias_pct) +
                "% rejected as implausible (limit 20%)");
  }
  calib.bias_pct = bias_pct;
}

std::string to_string(Decision d) {
  switch (d) {
    case Decision::correct: return "correct";
    case Decision::incorrect: return "incorrect";
    case Decision::abstain: return "abstain";
  }
  return "?";
}

namespace {

constexpr double kGammaEpsilon = 0.001;

double satisfied_fraction(const LinkLoadMap& l_demand, const RepairResult& repaired,
                          double bias_pct, double tau_pct, double zero_floor,
                          std::map<LinkId, bool>* per_link) {
  std::size_t satisfied = 0;
  for (const auto& [link, final_load] : repaired.l_final) {
    auto it = l_demand.find(link);
    if (it == l_demand.end()) throw Error("demand load map missing link " + link);
    const double corrected = it->second * (1.0 + bias_pct / 100.0);
    const bool ok = percent_diff(corrected, final_load, zero_floor) <= tau_pct;
    if (ok) ++satisfied;
    if (per_link != nullptr) (*per_link)[link] = ok;
  }
  return repaired.l_final.empty()
             ? 0.0
             : static_cast<double>(satisfied) /
                   static_cast<double>(repaired.l_final.size());
}

}  // namespace

CalibrationResult calibrate(const std::vector<CalibrationSnapshot>& history,
                            double bias_pct, double zero_floor_bps) {
  if (history.size() < 2) throw Error("calibration needs at least 2 snapshots");
  CalibrationResult calib;
  set_bias_pct(calib, bias_pct);

  std::vector<double> pooled;
  for (const auto& snap : history) {
    for (const auto& [link, final_load] : snap.repair.l_final) {
      auto it = snap.l_demand.find(link);
      if (it == snap.l_demand.end()) throw Error("calibration demand map missing link " + link);
      const double corrected = it->second * (1.0 + bias_pct / 100.0);
      pooled.push_back(percent_diff(corrected, final_load, zero_floor_bps));
    }
  }
  calib.tau_pct = percentile_nearest_rank(pooled, 0.75);

  double min_fraction = 1.0;
  for (const auto& snap : history) {
    const double f = satisfied_fraction(snap.l_demand, snap.repair, bias_pct,
                                        calib.tau_pct, zero_floor_bps, nullptr);
    calib.window_fractions.push_back(f);
    min_fraction = std::min(min_fraction, f);
  }
  calib.gamma = min_fraction - kGammaEpsilon;
  return calib;
}

Verdict validate_demand(const LinkLoadMap& l_demand, const RepairResult& repaired,
                        const CalibrationResult& calib, const ValidateOptions& opts) {
  // The two maps must cover the same links.
  std::vector<LinkId> only_demand, only_final;
  for (const auto& [link, _] : l_demand) {
    if (!repaired.l_final.count(link)) only_demand.push_back(link);
  }
  for (const auto& [link, _] : repaired.l_final) {
    if (!l_demand.count(link)) only_final.push_back(link);
  }
  if (!only_demand.empty() || !only_final.empty()) {
    std::ostringstream oss;
    oss << "link-set mismatch between demand loads and repair result;";
    for (const auto& l : only_demand) oss << " demand-only:" << l;
    for (const auto& l : only_final) oss << " final-only:" << l;
    throw Error(oss.str());
  }

  Verdict verdict;
  verdict.consistency_fraction =
      satisfied_fraction(l_demand, repaired, calib.bias_pct, calib.tau_pct,
                         opts.zero_floor_bps, &verdict.per_link_satisfied);
  if (opts.abstain_enabled) {
    std::size_t unestimable = 0;
    for (const auto& [link, c] : repaired.confidence) {
      if (c == 0.0) ++unestimable;
    }
    if (unestimable * 2 > repaired.confidence.size()) {
      verdict.decision = Decision::abstain;
      return verdict;
    }
  }
  verdict.decision = verdict.consistency_fraction > calib.gamma ? Decision::correct
                                                                : Decision::incorrect;
  return verdict;
}

namespace {

LinkStatusVerdict vote_status(const Topology& topo, const Link& l,
                              const LinkSignals& s, const double* final_load,
                              double zero_floor) {
  LinkStatusVerdict v;
  v.link = l.id;
  auto count = [&](const std::optional<LinkStatus>& sig) {
    if (!sig) return;
    (*sig == LinkStatus::up ? v.up_votes : v.down_votes) += 1;
  };
  count(s.phy_src);
  count(s.phy_dst);
  count(s.link_src);
  count(s.link_dst);
  if (final_load != nullptr) {
    (*final_load > zero_floor ? v.up_votes : v.down_votes) += 1;
  }
  v.inferred = v.up_votes > v.down_votes ? LinkStatus::up : LinkStatus::down;
  // The controller's topology input lists the link, i.e. claims it is up.
  v.disagrees_with_input = v.inferred == LinkStatus::down;
  (void)topo;
  return v;
}

}  // namespace

std::vector<LinkStatusVerdict> validate_topology(const SnapshotTelemetry& snap,
                                                 const RepairResult& repaired,
                                                 const Topology& topology_input,
                                                 double zero_floor_bps) {
  std::vector<LinkStatusVerdict> out;
  for (const auto& l : topology_input.links()) {
    auto it = snap.links.find(l.id);
    static const LinkSignals kEmpty;
    const LinkSignals& s = it != snap.links.end() ? it->second : kEmpty;
    auto fl = repaired.l_final.find(l.id);
    const double* load = fl != repaired.l_final.end() ? &fl->second : nullptr;
    out.push_back(vote_status(topology_input, l, s, load, zero_floor_bps));
  }
  return out;
}

std::vector<LinkStatusVerdict> infer_status_from_signals(
    const SnapshotTelemetry& snap, const Topology& topology_input) {
  std::vector<LinkStatusVerdict> out;
  for (const auto& l : topology_input.links()) {
    auto it = snap.links.find(l.id);
    static const LinkSignals kEmpty;
    const LinkSignals& s = it != snap.links.end() ? it->second : kEmpty;
    out.push_back(vote_status(topology_input, l, s, nullptr, 0.0));
  }
  return out;
}

}  // namespace crosscheck
