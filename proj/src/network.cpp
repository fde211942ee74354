#include "crosscheck/network.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace crosscheck {

Topology::Topology(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i].id, i).second) {
      throw Error("duplicate node id: " + nodes_[i].id);
    }
  }
  in_links_.resize(nodes_.size());
  out_links_.resize(nodes_.size());
  std::set<std::pair<NodeId, std::string>> src_endpoints;
  std::set<std::pair<NodeId, std::string>> dst_endpoints;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!link_index_.emplace(l.id, i).second) {
      throw Error("duplicate link id: " + l.id);
    }
    if (!has_node(l.src)) throw Error("link " + l.id + " references unknown node " + l.src);
    if (!has_node(l.dst)) throw Error("link " + l.id + " references unknown node " + l.dst);
    if (l.src == l.dst) throw Error("link " + l.id + " is a self-loop at " + l.src);
    if (!src_endpoints.emplace(l.src, l.src_if).second) {
      throw Error("interface " + l.src + ":" + l.src_if + " used as source by more than one link");
    }
    if (!dst_endpoints.emplace(l.dst, l.dst_if).second) {
      throw Error("interface " + l.dst + ":" + l.dst_if + " used as destination by more than one link");
    }
    out_links_[node_index_.at(l.src)].push_back(i);
    in_links_[node_index_.at(l.dst)].push_back(i);
  }
}

const Node& Topology::node(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw Error("unknown node: " + id);
  return nodes_[it->second];
}

const Link& Topology::link(const LinkId& id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) throw Error("unknown link: " + id);
  return links_[it->second];
}

std::size_t Topology::node_index(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw Error("unknown node: " + id);
  return it->second;
}

std::size_t Topology::link_index(const LinkId& id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) throw Error("unknown link: " + id);
  return it->second;
}

const std::vector<std::size_t>& Topology::in_links(const NodeId& id) const {
  return in_links_[node_index(id)];
}

const std::vector<std::size_t>& Topology::out_links(const NodeId& id) const {
  return out_links_[node_index(id)];
}

std::vector<NodeId> Topology::internal_nodes() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::internal) out.push_back(n.id);
  }
  return out;
}

DemandMatrix::DemandMatrix(std::vector<DemandEntry> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.src == e.dst) throw Error("demand self-pair at " + e.src);
    if (e.rate_bps < 0) {
      throw Error("negative demand rate for (" + e.src + ", " + e.dst + ")");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const DemandEntry& a, const DemandEntry& b) {
              return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
            });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i - 1].src == entries_[i].src &&
        entries_[i - 1].dst == entries_[i].dst) {
      throw Error("duplicate demand entry (" + entries_[i].src + ", " +
                  entries_[i].dst + ")");
    }
  }
}

double DemandMatrix::total() const {
  double t = 0;
  for (const auto& e : entries_) t += e.rate_bps;
  return t;
}

std::optional<double> DemandMatrix::rate(const NodeId& src,
                                         const NodeId& dst) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::make_pair(src, dst),
                             [](const DemandEntry& e, const auto& key) {
                               return std::tie(e.src, e.dst) < key;
                             });
  if (it != entries_.end() && it->src == src && it->dst == dst) {
    return it->rate_bps;
  }
  return std::nullopt;
}

void ForwardingState::set_rule(const NodeId& router, const NodeId& src,
                               const NodeId& dst, Rule rule) {
  routers_[router][{src, dst}] = std::move(rule);
}

const ForwardingState::Rule* ForwardingState::find_rule(
    const NodeId& router, const NodeId& src, const NodeId& dst) const {
  auto rit = routers_.find(router);
  if (rit == routers_.end()) return nullptr;
  auto it = rit->second.find({src, dst});
  if (it == rit->second.end()) return nullptr;
  return &it->second;
}

void ForwardingState::clear_router(const NodeId& router) {
  auto it = routers_.find(router);
  if (it != routers_.end()) it->second.clear();
}

namespace {

// Adds the demand's rate to the unique border in-link (ingress) or out-link
// (egress), splitting equally if several exist.
void attribute_border(const Topology& topo, const NodeId& router, bool ingress,
                      double amount, LinkLoadMap& loads) {
  std::vector<const Link*> border;
  const auto& incident = ingress ? topo.in_links(router) : topo.out_links(router);
  for (std::size_t li : incident) {
    const Link& l = topo.links()[li];
    if (topo.is_border_link(l)) border.push_back(&l);
  }
  if (border.empty()) return;
  const double share = amount / static_cast<double>(border.size());
  for (const Link* l : border) loads[l->id] += share;
}

}  // namespace

LinkLoadMap compute_demand_load(const Topology& topo,
                                const DemandMatrix& demand,
                                const ForwardingState& fwd) {
  LinkLoadMap loads;
  for (const auto& l : topo.links()) loads[l.id] = 0.0;

  const std::size_t hop_cap = topo.nodes().size();
  for (const auto& entry : demand.entries()) {
    if (entry.rate_bps == 0.0) continue;
    // Attribution starts at the ingress rule; with no rule the demand is
    // entirely unattributed (matches routers that report no entries).
    if (fwd.find_rule(entry.src, entry.src, entry.dst) == nullptr) continue;
    attribute_border(topo, entry.src, /*ingress=*/true, entry.rate_bps, loads);

    std::map<NodeId, double> frontier{{entry.src, entry.rate_bps}};
    std::size_t depth = 0;
    while (!frontier.empty()) {
      if (depth++ > hop_cap) {
        std::ostringstream oss;
        oss << "forwarding loop tracing demand (" << entry.src << ", "
            << entry.dst << "); still active at hop cap:";
        for (const auto& [node, amt] : frontier) oss << " " << node;
        throw Error(oss.str());
      }
      std::map<NodeId, double> next;
      for (const auto& [node, amount] : frontier) {
        if (node == entry.dst) {
          attribute_border(topo, node, /*ingress=*/false, amount, loads);
          continue;
        }
        if (!topo.is_internal(node)) continue;
        const auto* rule = fwd.find_rule(node, entry.src, entry.dst);
        if (rule == nullptr) continue;  // unattributed from here on
        for (const auto& hop : *rule) {
          if (hop.weight == 0.0) continue;
          const Link& l = topo.link(hop.link);
          const double amt = amount * hop.weight;
          loads[l.id] += amt;
          next[l.dst] += amt;
        }
      }
      frontier = std::move(next);
    }
  }
  return loads;
}

double router_imbalance(const LinkLoadMap& loads, const Topology& topo,
                        const NodeId& router) {
  double in = 0.0, out = 0.0;
  for (std::size_t li : topo.in_links(router)) {
    const Link& l = topo.links()[li];
    auto it = loads.find(l.id);
    if (it == loads.end()) throw Error("router_imbalance: no load value for link " + l.id);
    in += it->second;
  }
  for (std::size_t li : topo.out_links(router)) {
    const Link& l = topo.links()[li];
    auto it = loads.find(l.id);
    if (it == loads.end()) throw Error("router_imbalance: no load value for link " + l.id);
    out += it->second;
  }
  return in - out;
}

}  // namespace crosscheck
