#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "crosscheck/network.hpp"
#include "crosscheck/telemetry.hpp"
#include "crosscheck/voting.hpp"

namespace crosscheck {

struct RepairParams {
  int rounds = 20;                   // N voting rounds per router
  double cluster_threshold_pct = 5;  // noise threshold for merging estimates
  double zero_floor_bps = 1000;      // percent_diff denominator floor
  int lock_batch = 1;                // links finalized per iteration
  std::uint64_t seed = 0;

  void validate() const;
};

// Factor-analysis variants of the repair step.
enum class RepairMode {
  full,                    // iterative: lock the most confident link, repeat
  single_pass,             // one consolidation of all five estimates
  single_pass_no_demand,   // one pass without the demand-derived vote
  none,                    // raw counter mean, no repair
};

struct RepairResult {
  LinkLoadMap l_final;
  std::map<LinkId, double> confidence;
  std::vector<LinkId> lock_order;
};

// Direct candidate estimates for one link's load: the available counters plus
// the demand-implied value. An internal link yields up to three, a border
// link up to two.
std::vector<Vote> candidate_values(const Topology& topo, const LinkId& link,
                                   const SnapshotTelemetry& snap,
                                   const LinkLoadMap& l_demand,
                                   bool include_demand = true);

// N rounds of the router invariant at one router: each round draws one
// candidate per incident link and predicts every incident link's value from
// the others (incoming positive, outgoing negative). Per link, the largest
// prediction cluster's mean is the vote and its share of N is the weight.
// Routers with fewer than two candidate-bearing incident links emit nothing.
std::map<LinkId, Consolidated> router_round_votes(
    const Topology& topo, const NodeId& router,
    const std::map<LinkId, std::vector<Vote>>& candidates_per_link, int rounds,
    std::uint64_t seed, double cluster_threshold_pct, double zero_floor_bps);

// The voting repair loop: consolidates direct and router-derived votes per
// link, locks the highest-confidence links, and repeats with locked values as
// sole candidates until every link is finalized. Unestimable links lock last
// at zero with confidence 0.
RepairResult repair(const Topology& topo, const SnapshotTelemetry& snap,
                    const LinkLoadMap& l_demand, const RepairParams& params,
                    RepairMode mode = RepairMode::full);

}  // namespace crosscheck
