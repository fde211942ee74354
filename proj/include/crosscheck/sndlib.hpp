#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosscheck/bundle_io.hpp"
#include "crosscheck/network.hpp"

namespace crosscheck {

// Parsed form of an SNDlib native-format listing (NODES / LINKS / DEMANDS).
struct SndlibNetwork {
  struct SndNode {
    std::string id;
    double x = 0.0, y = 0.0;
  };
  struct SndLink {
    std::string id;
    std::string src, dst;
    double capacity = 0.0;  // in the file's own unit
  };
  struct SndDemand {
    std::string id;
    std::string src, dst;
    double value = 0.0;  // in the file's own unit
  };
  std::vector<SndNode> nodes;
  std::vector<SndLink> links;
  std::vector<SndDemand> demands;
};

SndlibNetwork parse_sndlib(const std::string& text);
SndlibNetwork load_sndlib_file(const std::filesystem::path& path);

struct ConvertOptions {
  // Multiplier from file units to bits/sec; SNDlib listings are in Mbps.
  double unit_to_bps = 1e6;
  // Adds one border node with an in/out link pair per router, so demand
  // enters and leaves the modeled network over border links.
  bool add_border_links = true;
  double border_capacity_factor = 4.0;  // border capacity vs max link
};

// Converts a parsed SNDlib listing into the validated bundle, building
// equal-cost shortest-path forwarding for every demand pair.
NetworkBundle convert_sndlib(const SndlibNetwork& net,
                             const ConvertOptions& opts = {});

// All-pairs hop-count shortest-path forwarding with equal ECMP splits at each
// hop. Rules are emitted for every demand entry over internal links only.
ForwardingState build_shortest_path_forwarding(const Topology& topo,
                                               const DemandMatrix& demand);

struct SyntheticOptions {
  std::size_t internal_nodes = 100;
  std::size_t degree = 8;  // even; internal directed links = nodes * degree
  std::uint64_t seed = 1;
  double total_demand_bps = 40e9;
  double link_capacity_bps = 100e9;
};

// Ring-plus-random-matchings expander-style topology with a border pair per
// router and a gravity demand matrix over all router pairs.
NetworkBundle make_synthetic_bundle(const SyntheticOptions& opts);

// Deterministic gravity-model demand: entry (i, j) proportional to
// w_i * w_j with w = node degree, scaled to the requested total.
DemandMatrix make_gravity_demand(const Topology& topo, double total_bps);

}  // namespace crosscheck
