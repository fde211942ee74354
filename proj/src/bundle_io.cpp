#include "crosscheck/bundle_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace crosscheck {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << j.dump(2) << "\n";
}

NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "internal") return NodeKind::internal;
  if (s == "border") return NodeKind::border;
  throw Error("node " + where + " has unknown kind '" + s + "'");
}

}  // namespace

Topology load_topology_file(const std::filesystem::path& path) {
  const json j = read_json(path);
  std::vector<Node> nodes;
  std::vector<Link> links;
  try {
    for (const auto& n : j.at("nodes")) {
      nodes.push_back({n.at("id").get<std::string>(),
                       parse_kind(n.at("kind").get<std::string>(),
                                  n.value("id", std::string("?")))});
    }
    for (const auto& l : j.at("links")) {
      Link link;
      link.id = l.at("id").get<std::string>();
      link.src = l.at("src").get<std::string>();
      link.src_if = l.at("src_if").get<std::string>();
      link.dst = l.at("dst").get<std::string>();
      link.dst_if = l.at("dst_if").get<std::string>();
      link.capacity_bps = l.at("capacity_bps").get<double>();
      links.push_back(std::move(link));
    }
  } catch (const json::exception& e) {
    throw Error("topology schema violation in " + path.string() + ": " + e.what());
  }
  return Topology(std::move(nodes), std::move(links));
}

DemandMatrix load_demand_file(const std::filesystem::path& path,
                              const Topology* topo) {
  const json j = read_json(path);
  std::vector<DemandEntry> entries;
  try {
    for (const auto& e : j.at("entries")) {
      entries.push_back({e.at("src").get<std::string>(),
                         e.at("dst").get<std::string>(),
                         e.at("rate_bps").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error("demand schema violation in " + path.string() + ": " + e.what());
  }
  DemandMatrix demand(std::move(entries));
  if (topo != nullptr) {
    for (const auto& e : demand.entries()) {
      if (!topo->has_node(e.src)) throw Error("demand references unknown node " + e.src);
      if (!topo->has_node(e.dst)) throw Error("demand references unknown node " + e.dst);
    }
  }
  return demand;
}

ForwardingState load_forwarding_file(const std::filesystem::path& path,
                                     const Topology* topo) {
  const json j = read_json(path);
  ForwardingState fwd;
  try {
    for (const auto& r : j.at("routers")) {
      const auto router = r.at("id").get<std::string>();
      // Presence with an empty rule list is meaningful: the router reported,
      // it just has no entries.
      if (r.at("rules").empty()) {
        fwd.set_rule(router, router, router, {});
        fwd.clear_router(router);
      }
      for (const auto& rule : r.at("rules")) {
        ForwardingState::Rule next;
        for (const auto& hop : rule.at("next")) {
          next.push_back({hop.at("link").get<std::string>(),
                          hop.at("weight").get<double>()});
        }
        fwd.set_rule(router, rule.at("src").get<std::string>(),
                     rule.at("dst").get<std::string>(), std::move(next));
      }
    }
  } catch (const json::exception& e) {
    throw Error("forwarding schema violation in " + path.string() + ": " + e.what());
  }
  if (topo != nullptr) validate_forwarding(*topo, fwd);
  return fwd;
}

void save_topology_file(const Topology& topo, const std::filesystem::path& path) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : topo.nodes()) {
    j["nodes"].push_back({{"id", n.id},
                          {"kind", n.kind == NodeKind::internal ? "internal" : "border"}});
  }
  j["links"] = json::array();
  for (const auto& l : topo.links()) {
    j["links"].push_back({{"id", l.id},
                          {"src", l.src},
                          {"src_if", l.src_if},
                          {"dst", l.dst},
                          {"dst_if", l.dst_if},
                          {"capacity_bps", l.capacity_bps}});
  }
  write_json(j, path);
}

void save_demand_file(const DemandMatrix& demand, const std::filesystem::path& path) {
  json j;
  j["entries"] = json::array();
  for (const auto& e : demand.entries()) {
    j["entries"].push_back({{"src", e.src}, {"dst", e.dst}, {"rate_bps", e.rate_bps}});
  }
  write_json(j, path);
}

void save_forwarding_file(const ForwardingState& fwd, const std::filesystem::path& path) {
  json j;
  j["routers"] = json::array();
  for (const auto& [router, rules] : fwd.routers()) {
    json r;
    r["id"] = router;
    r["rules"] = json::array();
    for (const auto& [key, next] : rules) {
      json rule;
      rule["src"] = key.first;
      rule["dst"] = key.second;
      rule["next"] = json::array();
      for (const auto& hop : next) {
        rule["next"].push_back({{"link", hop.link}, {"weight", hop.weight}});
      }
      r["rules"].push_back(std::move(rule));
    }
    j["routers"].push_back(std::move(r));
  }
  write_json(j, path);
}

void validate_forwarding(const Topology& topo, const ForwardingState& fwd) {
  constexpr double kWeightTolerance = 1e-9;
  for (const auto& [router, rules] : fwd.routers()) {
    if (!topo.has_node(router)) {
      throw Error("forwarding references unknown router " + router);
    }
    for (const auto& [key, next] : rules) {
      double sum = 0.0;
      for (const auto& hop : next) {
        if (!topo.has_link(hop.link)) {
          throw Error("rule (" + key.first + ", " + key.second + ") at " + router +
                      " references unknown link " + hop.link);
        }
        if (topo.link(hop.link).src != router) {
          throw Error("rule (" + key.first + ", " + key.second + ") at " + router +
                      " uses link " + hop.link + " that does not originate there");
        }
        if (hop.weight < 0.0 || hop.weight > 1.0) {
          throw Error("rule (" + key.first + ", " + key.second + ") at " + router +
                      " has weight outside [0,1] on link " + hop.link);
        }
        sum += hop.weight;
      }
      if (!next.empty() && std::abs(sum - 1.0) > kWeightTolerance) {
        throw Error("rule (" + key.first + ", " + key.second + ") at " + router +
                    " has weights summing to " + std::to_string(sum));
      }
    }
  }
}

NetworkBundle load_network_bundle(const std::filesystem::path& topology_file,
                                  const std::filesystem::path& demand_file,
                                  const std::filesystem::path& forwarding_file) {
  NetworkBundle bundle;
  bundle.topology = load_topology_file(topology_file);
  bundle.demand = load_demand_file(demand_file, &bundle.topology);
  bundle.forwarding = load_forwarding_file(forwarding_file, &bundle.topology);
  // Tracing every demand both proves termination (hop cap) and exercises all
  // rule references end to end.
  compute_demand_load(bundle.topology, bundle.demand, bundle.forwarding);
  return bundle;
}

}  // namespace crosscheck
