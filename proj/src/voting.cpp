#include "crosscheck/voting.hpp"

#include <algorithm>
#include <cmath>

namespace crosscheck {

std::string to_string(VoteSource s) {
  switch (s) {
    case VoteSource::tx: return "tx";
    case VoteSource::rx: return "rx";
    case VoteSource::demand: return "demand";
    case VoteSource::router_src: return "router_src";
    case VoteSource::router_dst: return "router_dst";
    case VoteSource::locked: return "locked";
  }
  return "?";
}

std::vector<VoteCluster> cluster_votes(std::vector<Vote> votes,
                                       double threshold_pct, double zero_floor) {
  std::sort(votes.begin(), votes.end(), [](const Vote& a, const Vote& b) {
    if (a.value != b.value) return a.value < b.value;
    return static_cast<int>(a.source) < static_cast<int>(b.source);
  });
  std::vector<VoteCluster> clusters;
  double weighted_sum = 0.0;
  for (const Vote& v : votes) {
    if (!clusters.empty() &&
        percent_diff(v.value, clusters.back().mean, zero_floor) <= threshold_pct) {
      VoteCluster& c = clusters.back();
      weighted_sum += v.value * v.weight;
      c.weight += v.weight;
      c.mean = weighted_sum / c.weight;
      c.has_demand = c.has_demand || v.source == VoteSource::demand;
    } else {
      clusters.push_back({v.value, v.weight, v.source == VoteSource::demand});
      weighted_sum = v.value * v.weight;
    }
  }
  return clusters;
}

Consolidated consolidate_votes(const std::vector<Vote>& votes,
                               double threshold_pct, double zero_floor) {
  if (votes.empty()) throw Error("consolidate_votes: no votes");
  const auto clusters = cluster_votes(votes, threshold_pct, zero_floor);
  double total = 0.0;
  for (const auto& c : clusters) total += c.weight;
  const VoteCluster* best = &clusters.front();
  for (const auto& c : clusters) {
    if (c.weight > best->weight ||
        (c.weight == best->weight &&
         (c.has_demand > best->has_demand ||
          (c.has_demand == best->has_demand && c.mean > best->mean)))) {
      best = &c;
    }
  }
  return {best->mean, total > 0.0 ? best->weight / total : 0.0};
}

}  // namespace crosscheck
