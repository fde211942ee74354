#pragma once

#include <string>
#include <vector>

#include "crosscheck/error.hpp"

namespace crosscheck {

// Relative difference in percent, with a floored midpoint denominator so idle
// links with tiny absolute noise still cluster together.
inline double percent_diff(double a, double b, double zero_floor) {
  const double mid = (a + b) / 2.0;
  return 100.0 * std::abs(a - b) / std::max(mid, zero_floor);
}

enum class VoteSource { tx, rx, demand, router_src, router_dst, locked };

std::string to_string(VoteSource s);

struct Vote {
  double value = 0.0;
  double weight = 1.0;
  VoteSource source = VoteSource::tx;
};

struct VoteCluster {
  double mean = 0.0;    // weighted mean of the member values
  double weight = 0.0;  // cumulative weight
  bool has_demand = false;
};

// Greedy agglomeration over value-sorted votes: a vote joins the current
// cluster while its percent_diff to the running weighted mean stays within
// threshold_pct. Deterministic for a fixed vote multiset.
std::vector<VoteCluster> cluster_votes(std::vector<Vote> votes,
                                       double threshold_pct, double zero_floor);

struct Consolidated {
  double value = 0.0;
  double confidence = 0.0;  // winning cluster weight / total weight
};

// Largest cumulative weight wins; ties break toward the cluster containing
// the demand vote, then toward the larger value.
Consolidated consolidate_votes(const std::vector<Vote>& votes,
                               double threshold_pct, double zero_floor);

}  // namespace crosscheck
