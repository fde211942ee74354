#include "crosscheck/faults.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "crosscheck/rng.hpp"

namespace crosscheck {

FaultKind fault_kind_from_string(const std::string& s) {
  if (s == "demand_remove") return FaultKind::demand_remove;
  if (s == "demand_stale") return FaultKind::demand_stale;
  if (s == "counter_zero") return FaultKind::counter_zero;
  if (s == "counter_scale") return FaultKind::counter_scale;
  if (s == "fwd_drop") return FaultKind::fwd_drop;
  if (s == "status_lie") return FaultKind::status_lie;
  throw Error("unknown fault kind '" + s + "'");
}

std::string to_string(FaultKind k) {
  switch (k) {
    case FaultKind::demand_remove: return "demand_remove";
    case FaultKind::demand_stale: return "demand_stale";
    case FaultKind::counter_zero: return "counter_zero";
    case FaultKind::counter_scale: return "counter_scale";
    case FaultKind::fwd_drop: return "fwd_drop";
    case FaultKind::status_lie: return "status_lie";
  }
  return "?";
}

FaultScope fault_scope_from_string(const std::string& s) {
  if (s == "random") return FaultScope::random_signals;
  if (s == "correlated") return FaultScope::correlated_routers;
  throw Error("unknown fault scope '" + s + "'");
}

std::string to_string(FaultScope s) {
  return s == FaultScope::random_signals ? "random" : "correlated";
}

void FaultSpec::validate() const {
  if (entry_fraction < 0.0 || entry_fraction > 1.0) {
    throw Error("fault entry_fraction outside [0,1]");
  }
  if (magnitude_lo_pct > magnitude_hi_pct) {
    throw Error("fault magnitude band has lo > hi");
  }
}

namespace {

// First k positions of a seeded Fisher-Yates shuffle over n indices.
std::vector<std::size_t> pick_k_of_n(std::size_t k, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  }
  idx.resize(std::min(k, n));
  return idx;
}

std::vector<NodeId> pick_routers(const Topology& topo, double fraction, Rng& rng) {
  const auto routers = topo.internal_nodes();
  const auto k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(routers.size())));
  std::vector<NodeId> out;
  for (std::size_t i : pick_k_of_n(k, routers.size(), rng)) out.push_back(routers[i]);
  return out;
}

}  // namespace

std::pair<DemandMatrix, double> perturb_demand(const DemandMatrix& demand,
                                               const FaultSpec& spec) {
  spec.validate();
  if (spec.kind != FaultKind::demand_remove && spec.kind != FaultKind::demand_stale) {
    throw Error("perturb_demand requires a demand fault kind");
  }
  if (demand.size() == 0) throw Error("perturb_demand on empty demand matrix");

  Rng rng(derive_seed(spec.seed, 0xd3a4d));
  auto entries = demand.entries();
  const auto k = static_cast<std::size_t>(
      std::floor(spec.entry_fraction * static_cast<double>(entries.size())));
  double total_change = 0.0;
  for (std::size_t i : pick_k_of_n(k, entries.size(), rng)) {
    const double m = rng.uniform(spec.magnitude_lo_pct, spec.magnitude_hi_pct) / 100.0;
    double delta = -entries[i].rate_bps * m;
    if (spec.kind == FaultKind::demand_stale && rng.coin()) delta = -delta;
    const double updated = std::max(entries[i].rate_bps + delta, 0.0);
    total_change += std::abs(updated - entries[i].rate_bps);
    entries[i].rate_bps = updated;
  }
  const double base = demand.total();
  const double achieved_pct = base > 0.0 ? 100.0 * total_change / base : 0.0;
  return {DemandMatrix(std::move(entries)), achieved_pct};
}

SnapshotTelemetry corrupt_counters(const SnapshotTelemetry& snap,
                                   const Topology& topo, const FaultSpec& spec) {
  spec.validate();
  if (spec.kind != FaultKind::counter_zero && spec.kind != FaultKind::counter_scale) {
    throw Error("corrupt_counters requires a counter fault kind");
  }
  SnapshotTelemetry out = snap;
  Rng rng(derive_seed(spec.seed, 0xc0a7e));
  auto corrupt = [&](std::optional<double>& rate) {
    if (!rate) return;
    if (spec.kind == FaultKind::counter_zero) {
      *rate = 0.0;
    } else {
      *rate *= rng.uniform(spec.magnitude_lo_pct, spec.magnitude_hi_pct) / 100.0;
    }
  };

  if (spec.scope == FaultScope::random_signals) {
    for (const auto& l : topo.links()) {
      LinkSignals& s = out.links.at(l.id);
      if (s.tx_rate && rng.uniform01() < spec.entry_fraction) corrupt(s.tx_rate);
      if (s.rx_rate && rng.uniform01() < spec.entry_fraction) corrupt(s.rx_rate);
    }
  } else {
    const auto liars = pick_routers(topo, spec.entry_fraction, rng);
    const std::set<NodeId> liar_set(liars.begin(), liars.end());
    for (const auto& l : topo.links()) {
      LinkSignals& s = out.links.at(l.id);
      if (liar_set.count(l.src)) corrupt(s.tx_rate);
      if (liar_set.count(l.dst)) corrupt(s.rx_rate);
    }
  }
  return out;
}

ForwardingState drop_forwarding_entries(const ForwardingState& fwd,
                                        const Topology& topo,
                                        double router_fraction,
                                        std::uint64_t seed) {
  if (router_fraction < 0.0 || router_fraction > 1.0) {
    throw Error("router_fraction outside [0,1]");
  }
  ForwardingState out = fwd;
  Rng rng(derive_seed(seed, 0xf00d));
  for (const auto& r : pick_routers(topo, router_fraction, rng)) {
    out.clear_router(r);
  }
  return out;
}

SnapshotTelemetry corrupt_link_status(const SnapshotTelemetry& snap,
                                      const Topology& topo,
                                      double router_fraction,
                                      std::uint64_t seed) {
  if (router_fraction < 0.0 || router_fraction > 1.0) {
    throw Error("router_fraction outside [0,1]");
  }
  SnapshotTelemetry out = snap;
  Rng rng(derive_seed(seed, 0x57a7));
  const auto liars = pick_routers(topo, router_fraction, rng);
  const std::set<NodeId> liar_set(liars.begin(), liars.end());
  for (const auto& l : topo.links()) {
    LinkSignals& s = out.links.at(l.id);
    if (liar_set.count(l.src)) {
      if (s.phy_src) s.phy_src = LinkStatus::down;
      if (s.link_src) s.link_src = LinkStatus::down;
      if (s.tx_rate) s.tx_rate = 0.0;
    }
    if (liar_set.count(l.dst)) {
      if (s.phy_dst) s.phy_dst = LinkStatus::down;
      if (s.link_dst) s.link_dst = LinkStatus::down;
      if (s.rx_rate) s.rx_rate = 0.0;
    }
  }
  return out;
}

double changed_signal_fraction(const SnapshotTelemetry& before,
                               const SnapshotTelemetry& after) {
  std::size_t present = 0;
  std::size_t changed = 0;
  for (const auto& [id, b] : before.links) {
    auto it = after.links.find(id);
    if (it == after.links.end()) continue;
    const LinkSignals& a = it->second;
    if (b.tx_rate) {
      ++present;
      if (!a.tx_rate || *a.tx_rate != *b.tx_rate) ++changed;
    }
    if (b.rx_rate) {
      ++present;
      if (!a.rx_rate || *a.rx_rate != *b.rx_rate) ++changed;
    }
  }
  return present > 0 ? static_cast<double>(changed) / static_cast<double>(present) : 0.0;
}

}  // namespace crosscheck
