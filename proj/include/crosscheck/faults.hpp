#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "crosscheck/network.hpp"
#include "crosscheck/telemetry.hpp"

namespace crosscheck {

enum class FaultKind {
  demand_remove,
  demand_stale,
  counter_zero,
  counter_scale,
  fwd_drop,
  status_lie,
};

enum class FaultScope { random_signals, correlated_routers };

FaultKind fault_kind_from_string(const std::string& s);
std::string to_string(FaultKind k);
FaultScope fault_scope_from_string(const std::string& s);
std::string to_string(FaultScope s);

struct FaultSpec {
  FaultKind kind = FaultKind::demand_remove;
  FaultScope scope = FaultScope::random_signals;
  double entry_fraction = 0.0;       // fraction of entries/signals/routers hit
  double magnitude_lo_pct = 0.0;     // per-entry magnitude band
  double magnitude_hi_pct = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Perturbs floor(entry_fraction * |entries|) uniformly chosen demand entries.
// demand_remove always subtracts the drawn magnitude; demand_stale subtracts
// or adds with probability 1/2, floored at zero. Returns the new matrix and
// the achieved change: sum |delta| / sum original * 100.
std::pair<DemandMatrix, double> perturb_demand(const DemandMatrix& demand,
                                               const FaultSpec& spec);

// Zeroes or rescales tx/rx rate signals. Random scope picks each present
// signal independently with probability entry_fraction; correlated scope
// picks floor(entry_fraction * |routers|) internal routers and hits every
// counter on their side of each incident link.
SnapshotTelemetry corrupt_counters(const SnapshotTelemetry& snap,
                                   const Topology& topo, const FaultSpec& spec);

// Selected routers report no forwarding entries at all.
ForwardingState drop_forwarding_entries(const ForwardingState& fwd,
                                        const Topology& topo,
                                        double router_fraction,
                                        std::uint64_t seed);

// Worst-case router lie: every status signal of the selected routers reports
// down and every one of their counters reports 0, while ground truth stays up.
SnapshotTelemetry corrupt_link_status(const SnapshotTelemetry& snap,
                                      const Topology& topo,
                                      double router_fraction,
                                      std::uint64_t seed);

// Fraction of present rate signals whose value differs between the two
// snapshots; used to report achieved telemetry perturbation.
double changed_signal_fraction(const SnapshotTelemetry& before,
                               const SnapshotTelemetry& after);

}  // namespace crosscheck
