#pragma once

#include <filesystem>
#include <tuple>

#include "crosscheck/network.hpp"

namespace crosscheck {

struct NetworkBundle {
  Topology topology;
  DemandMatrix demand;
  ForwardingState forwarding;
};

Topology load_topology_file(const std::filesystem::path& path);
DemandMatrix load_demand_file(const std::filesystem::path& path,
                              const Topology* topo = nullptr);
ForwardingState load_forwarding_file(const std::filesystem::path& path,
                                     const Topology* topo = nullptr);

void save_topology_file(const Topology& topo, const std::filesystem::path& path);
void save_demand_file(const DemandMatrix& demand, const std::filesystem::path& path);
void save_forwarding_file(const ForwardingState& fwd, const std::filesystem::path& path);

// Structural checks beyond schema: rule links exist and originate at their
// router, weights lie in [0,1] and sum to 1 per rule.
void validate_forwarding(const Topology& topo, const ForwardingState& fwd);

// Loads and cross-validates the three files; every forwarding reference must
// resolve, demand endpoints must exist, and path reconstruction of every
// demand must terminate (no forwarding loops).
NetworkBundle load_network_bundle(const std::filesystem::path& topology_file,
                                  const std::filesystem::path& demand_file,
                                  const std::filesystem::path& forwarding_file);

}  // namespace crosscheck
