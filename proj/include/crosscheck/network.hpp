#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crosscheck/error.hpp"

namespace crosscheck {

using NodeId = std::string;
using LinkId = std::string;

enum class NodeKind { internal, border };

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::internal;
};

// A directed link. Every physical adjacency appears as two of these.
struct Link {
  LinkId id;
  NodeId src;
  std::string src_if;
  NodeId dst;
  std::string dst_if;
  double capacity_bps = 0.0;
};

// Static network layout. Immutable after construction; construction validates
// id uniqueness, endpoint existence and per-(node, interface) uniqueness.
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  bool has_node(const NodeId& id) const { return node_index_.count(id) != 0; }
  bool has_link(const LinkId& id) const { return link_index_.count(id) != 0; }
  const Node& node(const NodeId& id) const;
  const Link& link(const LinkId& id) const;
  std::size_t node_index(const NodeId& id) const;
  std::size_t link_index(const LinkId& id) const;

  bool is_internal(const NodeId& id) const {
    return node(id).kind == NodeKind::internal;
  }
  // A border link has exactly one endpoint inside the modeled network.
  bool is_border_link(const Link& l) const {
    return is_internal(l.src) != is_internal(l.dst);
  }
  bool is_border_link(const LinkId& id) const {
    return is_border_link(link(id));
  }

  // Incident directed links, as indices into links().
  const std::vector<std::size_t>& in_links(const NodeId& id) const;
  const std::vector<std::size_t>& out_links(const NodeId& id) const;

  std::vector<NodeId> internal_nodes() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<NodeId, std::size_t> node_index_;
  std::unordered_map<LinkId, std::size_t> link_index_;
  std::vector<std::vector<std::size_t>> in_links_;
  std::vector<std::vector<std::size_t>> out_links_;
};

struct DemandEntry {
  NodeId src;
  NodeId dst;
  double rate_bps = 0.0;
};

// Aggregate traffic rate per (ingress, egress) router pair.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  explicit DemandMatrix(std::vector<DemandEntry> entries);

  const std::vector<DemandEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double total() const;
  std::optional<double> rate(const NodeId& src, const NodeId& dst) const;

 private:
  std::vector<DemandEntry> entries_;  // sorted by (src, dst)
};

struct NextHop {
  LinkId link;
  double weight = 1.0;
};

// Per-router rules mapping a demand (ingress, egress) to a weighted set of
// outgoing links. Weights in a rule sum to 1.
class ForwardingState {
 public:
  using Rule = std::vector<NextHop>;
  using RuleKey = std::pair<NodeId, NodeId>;
  using RuleMap = std::map<RuleKey, Rule>;

  ForwardingState() = default;

  void set_rule(const NodeId& router, const NodeId& src, const NodeId& dst,
                Rule rule);
  const Rule* find_rule(const NodeId& router, const NodeId& src,
                        const NodeId& dst) const;
  const std::map<NodeId, RuleMap>& routers() const { return routers_; }
  bool has_router(const NodeId& router) const {
    return routers_.count(router) != 0;
  }
  void clear_router(const NodeId& router);

 private:
  std::map<NodeId, RuleMap> routers_;
};

// Per-directed-link traffic rate in bytes/sec; houses l_demand and l_final.
using LinkLoadMap = std::map<LinkId, double>;

// Traces every demand along its forwarding rules and accumulates the load
// contributed to each link; links carrying no demand map to 0. Demand enters
// through the ingress router's border in-link and exits through the egress
// router's border out-link when those exist. A router with no rule for a
// demand drops that demand's remaining contribution (unattributed).
LinkLoadMap compute_demand_load(const Topology& topo,
                                const DemandMatrix& demand,
                                const ForwardingState& fwd);

// Sum of incoming minus outgoing load over the router's incident directed
// links. Throws if any incident link is missing from the map.
double router_imbalance(const LinkLoadMap& loads, const Topology& topo,
                        const NodeId& router);

}  // namespace crosscheck
