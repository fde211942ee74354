#include "crosscheck/counter_store.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "crosscheck/error.hpp"

namespace crosscheck {

using nlohmann::json;

CounterStore::Series& CounterStore::series_for(const std::string& interface,
                                               Direction dir) {
  const auto key = std::make_pair(interface, static_cast<int>(dir));
  {
    std::shared_lock lock(map_mutex_);
    auto it = series_.find(key);
    if (it != series_.end()) return *it->second;
  }
  std::unique_lock lock(map_mutex_);
  auto& slot = series_[key];
  if (!slot) slot = std::make_unique<Series>();
  return *slot;
}

const CounterStore::Series* CounterStore::find_series(
    const std::string& interface, Direction dir) const {
  std::shared_lock lock(map_mutex_);
  auto it = series_.find({interface, static_cast<int>(dir)});
  return it == series_.end() ? nullptr : it->second.get();
}

void CounterStore::append(const std::string& interface, Direction dir,
                          std::int64_t t_unix_ns, double cumulative_bytes) {
  Series& s = series_for(interface, dir);
  std::lock_guard lock(s.mutex);
  if (!s.samples.empty() && t_unix_ns <= s.samples.back().t_unix_ns) {
    throw Error("non-monotone timestamp for series " + interface +
                (dir == Direction::in ? ":in" : ":out") + ": " +
                std::to_string(t_unix_ns) + " after " +
                std::to_string(s.samples.back().t_unix_ns));
  }
  s.samples.push_back({t_unix_ns, cumulative_bytes});
}

std::vector<CounterSample> CounterStore::window(const std::string& interface,
                                                Direction dir, std::int64_t t0_ns,
                                                std::int64_t t1_ns) const {
  const Series* s = find_series(interface, dir);
  if (s == nullptr) return {};
  std::lock_guard lock(s->mutex);
  auto lo = std::lower_bound(s->samples.begin(), s->samples.end(), t0_ns,
                             [](const CounterSample& a, std::int64_t t) {
                               return a.t_unix_ns < t;
                             });
  auto hi = std::upper_bound(s->samples.begin(), s->samples.end(), t1_ns,
                             [](std::int64_t t, const CounterSample& a) {
                               return t < a.t_unix_ns;
                             });
  return {lo, hi};
}

std::size_t CounterStore::series_count() const {
  std::shared_lock lock(map_mutex_);
  return series_.size();
}

double compute_rates(const CounterStore& store, const std::string& interface,
                     Direction dir, std::int64_t t0_ns, std::int64_t t1_ns) {
  const auto samples = store.window(interface, dir, t0_ns, t1_ns);
  if (samples.size() < 2) {
    throw Error("no rate for " + interface + ": fewer than 2 samples in window");
  }
  double bytes = 0.0;
  double span_sec = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double delta = samples[i].cumulative_bytes - samples[i - 1].cumulative_bytes;
    if (delta < 0.0) continue;  // counter reset; drop the interval entirely
    bytes += delta;
    span_sec += static_cast<double>(samples[i].t_unix_ns - samples[i - 1].t_unix_ns) / 1e9;
  }
  if (span_sec <= 0.0) {
    throw Error("no rate for " + interface + ": all sample pairs excluded as resets");
  }
  return bytes / span_sec;
}

SnapshotTelemetry snapshot_at(const CounterStore& store, const Topology& topo,
                              const ForwardingState& fwd_report, std::int64_t t_ns,
                              std::int64_t window_ns) {
  SnapshotTelemetry snap;
  snap.timestamp = static_cast<double>(t_ns) / 1e9;
  snap.forwarding = fwd_report;
  const std::int64_t t0 = t_ns - window_ns;
  auto rate_or_missing = [&](const NodeId& node, const std::string& iface,
                             Direction dir) -> std::optional<double> {
    try {
      return compute_rates(store, node + ":" + iface, dir, t0, t_ns);
    } catch (const Error&) {
      return std::nullopt;  // missingness is data, not failure
    }
  };
  for (const auto& l : topo.links()) {
    LinkSignals s;
    if (topo.is_internal(l.src)) {
      s.phy_src = LinkStatus::up;
      s.link_src = LinkStatus::up;
      s.tx_rate = rate_or_missing(l.src, l.src_if, Direction::out);
    }
    if (topo.is_internal(l.dst)) {
      s.phy_dst = LinkStatus::up;
      s.link_dst = LinkStatus::up;
      s.rx_rate = rate_or_missing(l.dst, l.dst_if, Direction::in);
    }
    snap.links[l.id] = s;
  }
  return snap;
}

std::size_t ingest_counter_stream(CounterStore& store,
                                  const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open counter stream: " + path.string());
  std::string line;
  std::size_t count = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto dir_str = j.at("direction").get<std::string>();
      Direction dir;
      if (dir_str == "in") {
        dir = Direction::in;
      } else if (dir_str == "out") {
        dir = Direction::out;
      } else {
        throw Error("unknown direction '" + dir_str + "'");
      }
      store.append(j.at("interface").get<std::string>(), dir,
                   j.at("t_unix_ns").get<std::int64_t>(),
                   j.at("cumulative_bytes").get<double>());
      ++count;
    } catch (const json::exception& e) {
      throw Error("bad counter record at " + path.string() + ":" +
                  std::to_string(line_no) + ": " + e.what());
    }
  }
  return count;
}

}  // namespace crosscheck
