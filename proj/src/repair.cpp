#include "crosscheck/repair.hpp"

#include <algorithm>
#include <set>

#include "crosscheck/rng.hpp"

namespace crosscheck {

void RepairParams::validate() const {
  if (rounds < 1) throw Error("repair rounds must be >= 1");
  if (cluster_threshold_pct <= 0.0) throw Error("cluster threshold must be > 0");
  if (zero_floor_bps <= 0.0) throw Error("zero floor must be > 0");
  if (lock_batch < 1) throw Error("lock batch must be >= 1");
}

std::vector<Vote> candidate_values(const Topology& topo, const LinkId& link,
                                   const SnapshotTelemetry& snap,
                                   const LinkLoadMap& l_demand,
                                   bool include_demand) {
  topo.link(link);  // existence check
  std::vector<Vote> out;
  auto it = snap.links.find(link);
  if (it != snap.links.end()) {
    if (it->second.tx_rate) out.push_back({*it->second.tx_rate, 1.0, VoteSource::tx});
    if (it->second.rx_rate) out.push_back({*it->second.rx_rate, 1.0, VoteSource::rx});
  }
  if (include_demand) {
    auto d = l_demand.find(link);
    if (d != l_demand.end()) out.push_back({d->second, 1.0, VoteSource::demand});
  }
  return out;
}

std::map<LinkId, Consolidated> router_round_votes(
    const Topology& topo, const NodeId& router,
    const std::map<LinkId, std::vector<Vote>>& candidates_per_link, int rounds,
    std::uint64_t seed, double cluster_threshold_pct, double zero_floor_bps) {
  struct Incident {
    const LinkId* id;
    bool incoming;
    const std::vector<Vote>* cands;
  };
  std::vector<Incident> incident;
  auto collect = [&](const std::vector<std::size_t>& links, bool incoming) {
    for (std::size_t li : links) {
      const LinkId& id = topo.links()[li].id;
      auto it = candidates_per_link.find(id);
      if (it == candidates_per_link.end() || it->second.empty()) continue;
      incident.push_back({&it->first, incoming, &it->second});
    }
  };
  collect(topo.in_links(router), true);
  collect(topo.out_links(router), false);
  if (incident.size() < 2) return {};

  Rng rng(seed);
  std::vector<double> assignment(incident.size());
  std::vector<std::vector<Vote>> predictions(incident.size());
  for (auto& p : predictions) p.reserve(rounds);
  for (int round = 0; round < rounds; ++round) {
    double signed_sum = 0.0;  // incoming positive, outgoing negative
    for (std::size_t i = 0; i < incident.size(); ++i) {
      const auto& cands = *incident[i].cands;
      assignment[i] = cands[rng.index(cands.size())].value;
      signed_sum += incident[i].incoming ? assignment[i] : -assignment[i];
    }
    for (std::size_t i = 0; i < incident.size(); ++i) {
      // The invariant predicts link i's value from every other assignment.
      const double pred = incident[i].incoming ? assignment[i] - signed_sum
                                               : assignment[i] + signed_sum;
      predictions[i].push_back({pred, 1.0, VoteSource::router_src});
    }
  }

  std::map<LinkId, Consolidated> votes;
  for (std::size_t i = 0; i < incident.size(); ++i) {
    votes[*incident[i].id] = consolidate_votes(predictions[i], cluster_threshold_pct,
                                               zero_floor_bps);
  }
  return votes;
}

namespace {

struct RepairEngine {
  const Topology& topo;
  const SnapshotTelemetry& snap;
  const LinkLoadMap& l_demand;
  const RepairParams& params;
  bool include_demand;

  std::vector<const Link*> links;
  std::map<LinkId, std::vector<Vote>> candidates;
  std::vector<NodeId> routers;
  std::map<NodeId, std::size_t> router_index;
  std::map<NodeId, std::map<LinkId, Consolidated>> router_votes;

  std::vector<bool> locked;
  std::vector<double> value;
  std::vector<double> conf;
  std::vector<bool> estimable;

  RepairEngine(const Topology& t, const SnapshotTelemetry& s, const LinkLoadMap& d,
               const RepairParams& p, bool with_demand)
      : topo(t), snap(s), l_demand(d), params(p), include_demand(with_demand) {
    for (const auto& l : topo.links()) links.push_back(&l);
    routers = topo.internal_nodes();
    for (std::size_t i = 0; i < routers.size(); ++i) router_index[routers[i]] = i;
    locked.assign(links.size(), false);
    value.assign(links.size(), 0.0);
    conf.assign(links.size(), 0.0);
    estimable.assign(links.size(), true);
    for (std::size_t li = 0; li < links.size(); ++li) {
      auto cands = candidate_values(topo, links[li]->id, snap, l_demand, include_demand);
      estimable[li] = !cands.empty();
      candidates[links[li]->id] = std::move(cands);
    }
  }

  void compute_router_votes(const NodeId& router, std::size_t epoch) {
    router_votes[router] = router_round_votes(
        topo, router, candidates, params.rounds,
        derive_seed(params.seed, router_index.at(router), epoch),
        params.cluster_threshold_pct, params.zero_floor_bps);
  }

  void consolidate_link(std::size_t li) {
    if (locked[li] || !estimable[li]) return;
    const Link& l = *links[li];
    std::vector<Vote> votes = candidates.at(l.id);
    auto add_router_vote = [&](const NodeId& router, VoteSource src) {
      if (!topo.is_internal(router)) return;
      auto rit = router_votes.find(router);
      if (rit == router_votes.end()) return;
      auto vit = rit->second.find(l.id);
      if (vit == rit->second.end()) return;
      votes.push_back({vit->second.value, vit->second.confidence, src});
    };
    add_router_vote(l.src, VoteSource::router_src);
    add_router_vote(l.dst, VoteSource::router_dst);
    if (votes.empty()) {
      estimable[li] = false;
      return;
    }
    const Consolidated c =
        consolidate_votes(votes, params.cluster_threshold_pct, params.zero_floor_bps);
    value[li] = c.value;
    conf[li] = c.confidence;
  }

  void lock_link(std::size_t li, RepairResult& result) {
    locked[li] = true;
    value[li] = std::max(value[li], 0.0);
    candidates[links[li]->id] = {{value[li], 1.0, VoteSource::locked}};
    result.lock_order.push_back(links[li]->id);
  }

  RepairResult run_full() {
    RepairResult result;
    for (const auto& r : routers) compute_router_votes(r, 0);
    for (std::size_t li = 0; li < links.size(); ++li) consolidate_link(li);

    std::size_t remaining = 0;
    for (std::size_t li = 0; li < links.size(); ++li) {
      if (estimable[li]) ++remaining;
    }
    std::size_t epoch = 0;
    while (remaining > 0) {
      // Lock the lock_batch most confident unlocked links.
      std::vector<std::size_t> order;
      for (std::size_t li = 0; li < links.size(); ++li) {
        if (!locked[li] && estimable[li]) order.push_back(li);
      }
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (conf[a] != conf[b]) return conf[a] > conf[b];
        return a < b;
      });
      const std::size_t batch =
          std::min<std::size_t>(params.lock_batch, order.size());
      std::set<std::size_t> affected;
      for (std::size_t i = 0; i < batch; ++i) {
        lock_link(order[i], result);
        --remaining;
        const Link& l = *links[order[i]];
        if (topo.is_internal(l.src)) affected.insert(router_index.at(l.src));
        if (topo.is_internal(l.dst)) affected.insert(router_index.at(l.dst));
      }
      if (remaining == 0) break;
      // Only routers adjacent to freshly locked links see changed candidate
      // sets; everything else keeps its cached votes.
      ++epoch;
      std::set<std::size_t> stale_links;
      for (std::size_t ri : affected) {
        compute_router_votes(routers[ri], epoch);
        for (std::size_t li : topo.in_links(routers[ri])) stale_links.insert(li);
        for (std::size_t li : topo.out_links(routers[ri])) stale_links.insert(li);
      }
      for (std::size_t li : stale_links) consolidate_link(li);
    }
    finalize(result);
    return result;
  }

  RepairResult run_single_pass() {
    RepairResult result;
    for (const auto& r : routers) compute_router_votes(r, 0);
    for (std::size_t li = 0; li < links.size(); ++li) consolidate_link(li);
    for (std::size_t li = 0; li < links.size(); ++li) {
      if (estimable[li]) lock_link(li, result);
    }
    finalize(result);
    return result;
  }

  void finalize(RepairResult& result) {
    for (std::size_t li = 0; li < links.size(); ++li) {
      if (!estimable[li] && !locked[li]) {
        // No estimate at all: fall back to zero load with zero confidence.
        value[li] = 0.0;
        conf[li] = 0.0;
        lock_link(li, result);
      }
      result.l_final[links[li]->id] = value[li];
      result.confidence[links[li]->id] = conf[li];
    }
  }
};

}  // namespace

RepairResult repair(const Topology& topo, const SnapshotTelemetry& snap,
                    const LinkLoadMap& l_demand, const RepairParams& params,
                    RepairMode mode) {
  params.validate();
  if (mode == RepairMode::none) {
    RepairResult result;
    result.l_final = counter_mean_loads(snap, topo);
    for (const auto& l : topo.links()) {
      result.confidence[l.id] = 1.0;
      result.lock_order.push_back(l.id);
    }
    return result;
  }
  RepairEngine engine(topo, snap, l_demand, params,
                      mode != RepairMode::single_pass_no_demand);
  if (mode == RepairMode::full) return engine.run_full();
  return engine.run_single_pass();
}

}  // namespace crosscheck
