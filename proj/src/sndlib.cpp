#include "crosscheck/sndlib.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "crosscheck/rng.hpp"

namespace crosscheck {

namespace {

// Tokenizes an SNDlib native file: comments start with '#', parentheses are
// standalone tokens.
std::vector<std::string> tokenize_sndlib(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::string cur;
    for (char c : line) {
      if (c == '(' || c == ')') {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
        tokens.emplace_back(1, c);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }
  return tokens;
}

double to_number(const std::string& tok, const std::string& where) {
  try {
    return std::stod(tok);
  } catch (...) {
    throw Error("sndlib: expected a number in " + where + ", got '" + tok + "'");
  }
}

}  // namespace

SndlibNetwork parse_sndlib(const std::string& text) {
  const auto tokens = tokenize_sndlib(text);
  SndlibNetwork net;

  std::size_t i = 0;
  auto expect = [&](const std::string& tok) {
    if (i >= tokens.size() || tokens[i] != tok) {
      throw Error("sndlib: expected '" + tok + "' at token " + std::to_string(i));
    }
    ++i;
  };
  auto skip_group = [&]() {
    // Consumes a balanced ( ... ) group, returning the inner tokens.
    expect("(");
    std::vector<std::string> inner;
    int depth = 1;
    while (i < tokens.size() && depth > 0) {
      if (tokens[i] == "(") ++depth;
      if (tokens[i] == ")") --depth;
      if (depth > 0) inner.push_back(tokens[i]);
      ++i;
    }
    if (depth != 0) throw Error("sndlib: unbalanced parentheses");
    return inner;
  };

  while (i < tokens.size()) {
    const std::string section = tokens[i];
    if (section == "NODES") {
      ++i;
      expect("(");
      while (i < tokens.size() && tokens[i] != ")") {
        SndlibNetwork::SndNode node;
        node.id = tokens[i++];
        auto coords = skip_group();
        if (coords.size() >= 2) {
          node.x = to_number(coords[0], "node " + node.id);
          node.y = to_number(coords[1], "node " + node.id);
        }
        net.nodes.push_back(std::move(node));
      }
      expect(")");
    } else if (section == "LINKS") {
      ++i;
      expect("(");
      while (i < tokens.size() && tokens[i] != ")") {
        SndlibNetwork::SndLink link;
        link.id = tokens[i++];
        auto ends = skip_group();
        if (ends.size() != 2) throw Error("sndlib: link " + link.id + " needs two endpoints");
        link.src = ends[0];
        link.dst = ends[1];
        // pre_installed_capacity pre_installed_cost routing_cost setup_cost
        std::vector<double> scalars;
        while (i < tokens.size() && tokens[i] != "(" && tokens[i] != ")") {
          scalars.push_back(to_number(tokens[i++], "link " + link.id));
        }
        double module_capacity = 0.0;
        while (i < tokens.size() && tokens[i] == "(") {
          auto mod = skip_group();  // ( capacity cost ) modules
          if (!mod.empty()) {
            module_capacity = std::max(module_capacity,
                                       to_number(mod[0], "link " + link.id));
          }
        }
        link.capacity = module_capacity > 0.0
                            ? module_capacity
                            : (scalars.empty() ? 0.0 : scalars[0]);
        net.links.push_back(std::move(link));
      }
      expect(")");
    } else if (section == "DEMANDS") {
      ++i;
      expect("(");
      while (i < tokens.size() && tokens[i] != ")") {
        SndlibNetwork::SndDemand d;
        d.id = tokens[i++];
        auto ends = skip_group();
        if (ends.size() != 2) throw Error("sndlib: demand " + d.id + " needs two endpoints");
        d.src = ends[0];
        d.dst = ends[1];
        // routing_unit demand_value max_path_length
        std::vector<std::string> rest;
        while (i < tokens.size() && tokens[i] != "(" && tokens[i] != ")" &&
               !(rest.size() >= 3)) {
          rest.push_back(tokens[i++]);
        }
        if (rest.size() < 2) throw Error("sndlib: demand " + d.id + " missing value");
        d.value = to_number(rest[1], "demand " + d.id);
        net.demands.push_back(std::move(d));
      }
      expect(")");
    } else {
      ++i;  // header words, META section tokens, etc.
    }
  }
  if (net.nodes.empty()) throw Error("sndlib: no NODES section found");
  return net;
}

SndlibNetwork load_sndlib_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sndlib(ss.str());
}

namespace {

std::string border_node_id(const NodeId& router) { return "ext." + router; }

void add_border_pair(std::vector<Node>& nodes, std::vector<Link>& links,
                     const NodeId& router, double capacity_bps) {
  const NodeId ext = border_node_id(router);
  nodes.push_back({ext, NodeKind::border});
  links.push_back({"b_in_" + router, ext, "wan", router, "ext", capacity_bps});
  links.push_back({"b_out_" + router, router, "ext", ext, "wan", capacity_bps});
}

}  // namespace

NetworkBundle convert_sndlib(const SndlibNetwork& net, const ConvertOptions& opts) {
  std::vector<Node> nodes;
  std::vector<Link> links;
  double max_cap = 0.0;
  for (const auto& n : net.nodes) nodes.push_back({n.id, NodeKind::internal});
  for (const auto& l : net.links) {
    const double cap = l.capacity * opts.unit_to_bps;
    max_cap = std::max(max_cap, cap);
    links.push_back({"l_" + l.src + "_" + l.dst, l.src, "to_" + l.dst,
                     l.dst, "to_" + l.src, cap});
    links.push_back({"l_" + l.dst + "_" + l.src, l.dst, "to_" + l.src,
                     l.src, "to_" + l.dst, cap});
  }
  if (opts.add_border_links) {
    const double border_cap = max_cap * opts.border_capacity_factor;
    for (const auto& n : net.nodes) {
      add_border_pair(nodes, links, n.id, border_cap);
    }
  }

  NetworkBundle bundle;
  bundle.topology = Topology(std::move(nodes), std::move(links));

  std::vector<DemandEntry> entries;
  for (const auto& d : net.demands) {
    entries.push_back({d.src, d.dst, d.value * opts.unit_to_bps});
  }
  bundle.demand = DemandMatrix(std::move(entries));
  for (const auto& e : bundle.demand.entries()) {
    if (!bundle.topology.has_node(e.src) || !bundle.topology.has_node(e.dst)) {
      throw Error("sndlib demand references unknown node (" + e.src + ", " + e.dst + ")");
    }
  }
  bundle.forwarding = build_shortest_path_forwarding(bundle.topology, bundle.demand);
  return bundle;
}

ForwardingState build_shortest_path_forwarding(const Topology& topo,
                                               const DemandMatrix& demand) {
  const auto& nodes = topo.nodes();
  const std::size_t n = nodes.size();
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

  // BFS distance to each destination over internal links, on the reversed
  // graph. Border links never appear in rules.
  auto dist_to = [&](std::size_t dst_idx) {
    std::vector<std::size_t> dist(n, kInf);
    dist[dst_idx] = 0;
    std::deque<std::size_t> queue{dst_idx};
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      for (std::size_t li : topo.in_links(nodes[cur].id)) {
        const Link& l = topo.links()[li];
        if (topo.is_border_link(l)) continue;
        const std::size_t prev = topo.node_index(l.src);
        if (dist[prev] == kInf) {
          dist[prev] = dist[cur] + 1;
          queue.push_back(prev);
        }
      }
    }
    return dist;
  };

  std::map<NodeId, std::vector<std::size_t>> dist_cache;
  ForwardingState fwd;
  for (const auto& e : demand.entries()) {
    auto [it, inserted] = dist_cache.try_emplace(e.dst);
    if (inserted) it->second = dist_to(topo.node_index(e.dst));
    const auto& dist = it->second;
    const std::size_t src_idx = topo.node_index(e.src);
    if (dist[src_idx] == kInf) {
      throw Error("no path from " + e.src + " to " + e.dst);
    }
    // Emit a rule at every node on some shortest path.
    std::deque<std::size_t> queue{src_idx};
    std::set<std::size_t> seen{src_idx};
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      if (nodes[cur].id == e.dst) continue;
      std::vector<std::size_t> next_links;
      for (std::size_t li : topo.out_links(nodes[cur].id)) {
        const Link& l = topo.links()[li];
        if (topo.is_border_link(l)) continue;
        if (dist[topo.node_index(l.dst)] + 1 == dist[cur]) next_links.push_back(li);
      }
      ForwardingState::Rule rule;
      const double w = 1.0 / static_cast<double>(next_links.size());
      for (std::size_t li : next_links) {
        const Link& l = topo.links()[li];
        rule.push_back({l.id, w});
        const std::size_t nxt = topo.node_index(l.dst);
        if (seen.insert(nxt).second) queue.push_back(nxt);
      }
      fwd.set_rule(nodes[cur].id, e.src, e.dst, std::move(rule));
    }
  }
  return fwd;
}

DemandMatrix make_gravity_demand(const Topology& topo, double total_bps) {
  const auto routers = topo.internal_nodes();
  std::map<NodeId, double> weight;
  for (const auto& r : routers) {
    double deg = 0;
    for (std::size_t li : topo.out_links(r)) {
      if (!topo.is_border_link(topo.links()[li])) deg += 1;
    }
    weight[r] = std::max(deg, 1.0);
  }
  double denom = 0;
  for (const auto& a : routers) {
    for (const auto& b : routers) {
      if (a != b) denom += weight[a] * weight[b];
    }
  }
  std::vector<DemandEntry> entries;
  for (const auto& a : routers) {
    for (const auto& b : routers) {
      if (a == b) continue;
      entries.push_back({a, b, total_bps * weight[a] * weight[b] / denom});
    }
  }
  return DemandMatrix(std::move(entries));
}

NetworkBundle make_synthetic_bundle(const SyntheticOptions& opts) {
  if (opts.internal_nodes < 4) throw Error("synthetic topology needs >= 4 nodes");
  if (opts.degree < 2 || opts.degree % 2 != 0) {
    throw Error("synthetic degree must be even and >= 2");
  }
  const std::size_t n = opts.internal_nodes;
  Rng rng(derive_seed(opts.seed, 0xabcd));

  // Ring guarantees connectivity; additional random matchings raise the
  // degree towards the target and keep the diameter small.
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto add_edge = [&](std::size_t a, std::size_t b) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    return edges.emplace(a, b).second;
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(i, (i + 1) % n);
  const std::size_t target_edges = n * opts.degree / 2;
  std::size_t guard = 0;
  while (edges.size() < target_edges && guard < target_edges * 200) {
    ++guard;
    add_edge(rng.index(n), rng.index(n));
  }

  std::vector<Node> nodes;
  std::vector<Link> links;
  auto name = [](std::size_t i) { return "r" + std::to_string(i); };
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({name(i), NodeKind::internal});
  for (const auto& [a, b] : edges) {
    links.push_back({"l_" + name(a) + "_" + name(b), name(a), "to_" + name(b),
                     name(b), "to_" + name(a), opts.link_capacity_bps});
    links.push_back({"l_" + name(b) + "_" + name(a), name(b), "to_" + name(a),
                     name(a), "to_" + name(b), opts.link_capacity_bps});
  }
  for (std::size_t i = 0; i < n; ++i) {
    add_border_pair(nodes, links, name(i), opts.link_capacity_bps);
  }

  NetworkBundle bundle;
  bundle.topology = Topology(std::move(nodes), std::move(links));
  bundle.demand = make_gravity_demand(bundle.topology, opts.total_demand_bps);
  bundle.forwarding = build_shortest_path_forwarding(bundle.topology, bundle.demand);
  return bundle;
}

}  // namespace crosscheck
