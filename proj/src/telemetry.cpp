#include "crosscheck/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crosscheck/error.hpp"

namespace crosscheck {

using nlohmann::json;

NoiseProfile::NoiseProfile(std::vector<double> samples_pct)
    : samples_(std::move(samples_pct)) {
  if (samples_.empty()) throw Error("noise profile needs at least one sample");
  std::sort(samples_.begin(), samples_.end());
  if (!std::isfinite(quantile(0.5))) throw Error("noise profile median not finite");
}

NoiseProfile NoiseProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open noise profile: " + path.string());
  json j;
  try {
    in >> j;
    return NoiseProfile(j.at("samples_pct").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error("invalid noise profile " + path.string() + ": " + e.what());
  }
}

void NoiseProfile::save(const std::filesystem::path& path,
                        const std::string& invariant_class) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write noise profile: " + path.string());
  json j;
  j["invariant_class"] = invariant_class;
  j["samples_pct"] = samples_;
  out << j.dump() << "\n";
}

bool NoiseProfile::is_zero() const {
  return samples_.front() == 0.0 && samples_.back() == 0.0;
}

double NoiseProfile::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(samples_.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= samples_.size()) return samples_.back();
  const double frac = pos - static_cast<double>(i);
  return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
}

double NoiseProfile::abs_quantile(double q) const {
  std::vector<double> abs(samples_.size());
  std::transform(samples_.begin(), samples_.end(), abs.begin(),
                 [](double v) { return std::abs(v); });
  std::sort(abs.begin(), abs.end());
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(abs.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= abs.size()) return abs.back();
  const double frac = pos - static_cast<double>(i);
  return abs[i] + frac * (abs[i + 1] - abs[i]);
}

double NoiseProfile::sample(Rng& rng) const {
  const double pos = rng.uniform01() * static_cast<double>(samples_.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= samples_.size()) return samples_.back();
  const double frac = pos - static_cast<double>(i);
  return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
}

NoiseProfileSet NoiseProfileSet::load(const std::filesystem::path& link_file,
                                      const std::filesystem::path& router_file,
                                      const std::filesystem::path& path_file) {
  return {NoiseProfile::load(link_file), NoiseProfile::load(router_file),
          NoiseProfile::load(path_file)};
}

SnapshotTelemetry generate_ideal_telemetry(const Topology& topo,
                                           const DemandMatrix& demand,
                                           const ForwardingState& fwd) {
  const LinkLoadMap loads = compute_demand_load(topo, demand, fwd);
  SnapshotTelemetry snap;
  snap.forwarding = fwd;
  for (const auto& l : topo.links()) {
    LinkSignals s;
    const double t = loads.at(l.id);
    if (topo.is_internal(l.src)) {
      s.phy_src = LinkStatus::up;
      s.link_src = LinkStatus::up;
      s.tx_rate = t;
    }
    if (topo.is_internal(l.dst)) {
      s.phy_dst = LinkStatus::up;
      s.link_dst = LinkStatus::up;
      s.rx_rate = t;
    }
    snap.links[l.id] = s;
  }
  return snap;
}

namespace {

// Working state of the noise pass: each link is a mean plus a stored relative
// split, so router-step mean adjustments never disturb the link-invariant
// distribution.
struct NoisyLink {
  std::size_t index = 0;
  double mean = 0.0;
  double rel_diff = 0.0;  // (tx - rx) / mean, as a fraction
  bool has_tx = false;
  bool has_rx = false;
};

void write_counters(const Topology& topo, std::vector<NoisyLink>& work,
                    SnapshotTelemetry& snap) {
  for (auto& nl : work) {
    const Link& l = topo.links()[nl.index];
    LinkSignals& s = snap.links.at(l.id);
    if (nl.has_tx && nl.has_rx) {
      s.tx_rate = nl.mean * (1.0 + nl.rel_diff / 2.0);
      s.rx_rate = nl.mean * (1.0 - nl.rel_diff / 2.0);
    } else if (nl.has_tx) {
      s.tx_rate = nl.mean;
    } else if (nl.has_rx) {
      s.rx_rate = nl.mean;
    }
  }
}

}  // namespace

SnapshotTelemetry apply_invariant_matched_noise(const SnapshotTelemetry& ideal,
                                                const Topology& topo,
                                                const NoiseProfileSet& profiles,
                                                std::uint64_t seed,
                                                const NoiseOptions& opts) {
  SnapshotTelemetry snap = ideal;
  Rng rng_path(derive_seed(seed, 0x70617468));
  Rng rng_link(derive_seed(seed, 0x6c696e6b));
  Rng rng_router(derive_seed(seed, 0x72747273));

  std::vector<NoisyLink> work;
  work.reserve(topo.links().size());
  for (std::size_t i = 0; i < topo.links().size(); ++i) {
    const Link& l = topo.links()[i];
    auto it = ideal.links.find(l.id);
    if (it == ideal.links.end()) {
      throw Error("snapshot does not cover link " + l.id);
    }
    const LinkSignals& s = it->second;
    NoisyLink nl;
    nl.index = i;
    nl.has_tx = s.tx_rate.has_value();
    nl.has_rx = s.rx_rate.has_value();
    double base = 0.0;
    int k = 0;
    if (nl.has_tx) { base += *s.tx_rate; ++k; }
    if (nl.has_rx) { base += *s.rx_rate; ++k; }
    if (k > 0) base /= k;

    // (a) path noise scales the link's value; both counters follow the mean.
    const double path_draw = profiles.path.sample(rng_path) / 100.0;
    nl.mean = base * (1.0 + path_draw);
    // (b) link noise x splits +x/2 / -x/2 across the two counters so their
    // relative difference is x and the mean is unchanged.
    if (nl.has_tx && nl.has_rx) {
      const double x = profiles.link.sample(rng_link) / 100.0;
      const bool tx_high = rng_link.coin();
      nl.rel_diff = tx_high ? x : -x;
    }
    work.push_back(nl);
  }

  // (c) per-router targets drawn from the router profile, then damped
  // mean adjustments until every router's local imbalance matches its target.
  const auto routers = topo.internal_nodes();
  std::map<NodeId, double> target_pct;
  for (const auto& r : routers) target_pct[r] = profiles.router.sample(rng_router);

  auto local_sums = [&](const NodeId& r) {
    double in_sum = 0.0, out_sum = 0.0;
    for (std::size_t li : topo.in_links(r)) {
      const NoisyLink& nl = work[li];
      if (nl.has_rx) in_sum += nl.mean * (1.0 - nl.rel_diff / 2.0);
    }
    for (std::size_t li : topo.out_links(r)) {
      const NoisyLink& nl = work[li];
      if (nl.has_tx) out_sum += nl.mean * (1.0 + nl.rel_diff / 2.0);
    }
    return std::make_pair(in_sum, out_sum);
  };

  double residual = 0.0;
  bool converged = false;
  for (int iter = 0; iter < opts.max_iterations && !converged; ++iter) {
    for (const auto& r : routers) {
      const auto [in_sum, out_sum] = local_sums(r);
      const double avg = (in_sum + out_sum) / 2.0;
      if (avg <= 0.0) continue;
      const double excess = (in_sum - out_sum) - target_pct[r] / 100.0 * avg;
      const double step = opts.damping * excess;
      if (step == 0.0) continue;
      const double fin = in_sum > 0.0 ? std::clamp(1.0 - step / (2.0 * in_sum), 0.5, 2.0) : 1.0;
      const double fout = out_sum > 0.0 ? std::clamp(1.0 + step / (2.0 * out_sum), 0.5, 2.0) : 1.0;
      for (std::size_t li : topo.in_links(r)) {
        if (work[li].has_rx) work[li].mean *= fin;
      }
      for (std::size_t li : topo.out_links(r)) {
        if (work[li].has_tx) work[li].mean *= fout;
      }
    }
    residual = 0.0;
    for (const auto& r : routers) {
      const auto [in_sum, out_sum] = local_sums(r);
      const double avg = (in_sum + out_sum) / 2.0;
      if (avg <= 0.0) continue;
      const double cur_pct = 100.0 * (in_sum - out_sum) / avg;
      residual = std::max(residual, std::abs(cur_pct - target_pct[r]));
    }
    converged = residual <= opts.router_tolerance_pct;
  }
  if (!converged) {
    std::ostringstream oss;
    oss << "router noise adjustment did not converge after " << opts.max_iterations
        << " iterations; residual " << residual << " pct vs tolerance "
        << opts.router_tolerance_pct;
    throw Error(oss.str());
  }

  write_counters(topo, work, snap);
  return snap;
}

InvariantImbalances measure_invariant_imbalances(const SnapshotTelemetry& snap,
                                                 const Topology& topo,
                                                 const LinkLoadMap& truth) {
  InvariantImbalances out;
  for (const auto& l : topo.links()) {
    auto it = snap.links.find(l.id);
    if (it == snap.links.end()) continue;
    const LinkSignals& s = it->second;
    if (s.tx_rate && s.rx_rate) {
      const double mean = (*s.tx_rate + *s.rx_rate) / 2.0;
      if (mean > 0.0) out.link_pct.push_back(100.0 * (*s.tx_rate - *s.rx_rate) / mean);
    }
    double sum = 0.0;
    int k = 0;
    if (s.tx_rate) { sum += *s.tx_rate; ++k; }
    if (s.rx_rate) { sum += *s.rx_rate; ++k; }
    if (k > 0) {
      auto t = truth.find(l.id);
      if (t != truth.end() && t->second > 0.0) {
        out.path_pct.push_back(100.0 * (sum / k - t->second) / t->second);
      }
    }
  }
  for (const auto& r : topo.internal_nodes()) {
    double in_sum = 0.0, out_sum = 0.0;
    for (std::size_t li : topo.in_links(r)) {
      const auto& s = snap.links.at(topo.links()[li].id);
      if (s.rx_rate) in_sum += *s.rx_rate;
    }
    for (std::size_t li : topo.out_links(r)) {
      const auto& s = snap.links.at(topo.links()[li].id);
      if (s.tx_rate) out_sum += *s.tx_rate;
    }
    const double avg = (in_sum + out_sum) / 2.0;
    if (avg > 0.0) out.router_pct.push_back(100.0 * (in_sum - out_sum) / avg);
  }
  return out;
}

LinkLoadMap counter_mean_loads(const SnapshotTelemetry& snap, const Topology& topo) {
  LinkLoadMap loads;
  for (const auto& l : topo.links()) {
    double sum = 0.0;
    int k = 0;
    auto it = snap.links.find(l.id);
    if (it != snap.links.end()) {
      if (it->second.tx_rate) { sum += *it->second.tx_rate; ++k; }
      if (it->second.rx_rate) { sum += *it->second.rx_rate; ++k; }
    }
    loads[l.id] = k > 0 ? sum / k : 0.0;
  }
  return loads;
}

namespace {

json status_to_json(const std::optional<LinkStatus>& s) {
  if (!s) return nullptr;
  return *s == LinkStatus::up ? "up" : "down";
}

std::optional<LinkStatus> status_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  const auto s = j.get<std::string>();
  if (s == "up") return LinkStatus::up;
  if (s == "down") return LinkStatus::down;
  throw Error("unknown link status '" + s + "'");
}

json rate_to_json(const std::optional<double>& r) {
  if (!r) return nullptr;
  return *r;
}

std::optional<double> rate_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void save_snapshot(const SnapshotTelemetry& snap, const std::filesystem::path& path) {
  json j;
  j["timestamp"] = snap.timestamp;
  json links = json::object();
  for (const auto& [id, s] : snap.links) {
    links[id] = {{"phy_src", status_to_json(s.phy_src)},
                 {"phy_dst", status_to_json(s.phy_dst)},
                 {"link_src", status_to_json(s.link_src)},
                 {"link_dst", status_to_json(s.link_dst)},
                 {"tx_rate", rate_to_json(s.tx_rate)},
                 {"rx_rate", rate_to_json(s.rx_rate)}};
  }
  j["links"] = std::move(links);
  json routers = json::array();
  for (const auto& [router, rules] : snap.forwarding.routers()) {
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
    routers.push_back(std::move(r));
  }
  j["forwarding"]["routers"] = std::move(routers);
  std::ofstream out(path);
  if (!out) throw Error("cannot write snapshot: " + path.string());
  out << j.dump() << "\n";
}

SnapshotTelemetry load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open snapshot: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("invalid snapshot JSON " + path.string() + ": " + e.what());
  }
  SnapshotTelemetry snap;
  try {
    snap.timestamp = j.at("timestamp").get<double>();
    for (const auto& [id, s] : j.at("links").items()) {
      LinkSignals sig;
      sig.phy_src = status_from_json(s.at("phy_src"));
      sig.phy_dst = status_from_json(s.at("phy_dst"));
      sig.link_src = status_from_json(s.at("link_src"));
      sig.link_dst = status_from_json(s.at("link_dst"));
      sig.tx_rate = rate_from_json(s.at("tx_rate"));
      sig.rx_rate = rate_from_json(s.at("rx_rate"));
      snap.links[id] = sig;
    }
    for (const auto& r : j.at("forwarding").at("routers")) {
      const auto router = r.at("id").get<std::string>();
      if (r.at("rules").empty()) {
        snap.forwarding.set_rule(router, router, router, {});
        snap.forwarding.clear_router(router);
      }
      for (const auto& rule : r.at("rules")) {
        ForwardingState::Rule next;
        for (const auto& hop : rule.at("next")) {
          next.push_back({hop.at("link").get<std::string>(),
                          hop.at("weight").get<double>()});
        }
        snap.forwarding.set_rule(router, rule.at("src").get<std::string>(),
                                 rule.at("dst").get<std::string>(), std::move(next));
      }
    }
  } catch (const json::exception& e) {
    throw Error("snapshot schema violation in " + path.string() + ": " + e.what());
  }
  return snap;
}

}  // namespace crosscheck
