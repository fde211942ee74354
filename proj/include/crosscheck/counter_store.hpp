#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "crosscheck/telemetry.hpp"

namespace crosscheck {

enum class Direction { in, out };

struct CounterSample {
  std::int64_t t_unix_ns = 0;
  double cumulative_bytes = 0.0;
};

// Append-only cumulative byte counters, one series per (interface, direction).
// Appends to distinct series and reads may run concurrently; a single series
// is appended by one writer at a time.
class CounterStore {
 public:
  void append(const std::string& interface, Direction dir,
              std::int64_t t_unix_ns, double cumulative_bytes);

  // Samples with t0 <= t <= t1, in timestamp order.
  std::vector<CounterSample> window(const std::string& interface, Direction dir,
                                    std::int64_t t0_ns, std::int64_t t1_ns) const;

  std::size_t series_count() const;

 private:
  struct Series {
    mutable std::mutex mutex;
    std::vector<CounterSample> samples;
  };
  Series& series_for(const std::string& interface, Direction dir);
  const Series* find_series(const std::string& interface, Direction dir) const;

  mutable std::shared_mutex map_mutex_;
  std::map<std::pair<std::string, int>, std::unique_ptr<Series>> series_;
};

inline void append_counter_sample(CounterStore& store, const std::string& interface,
                                  Direction dir, std::int64_t t_unix_ns,
                                  double cumulative_bytes) {
  store.append(interface, dir, t_unix_ns, cumulative_bytes);
}

// Rate over [t0, t1]: sum of positive byte deltas over the sum of their time
// spans; a pair with a negative delta is a counter reset and is excluded from
// both sums. Throws when fewer than two samples fall in the window or every
// pair is excluded.
double compute_rates(const CounterStore& store, const std::string& interface,
                     Direction dir, std::int64_t t0_ns, std::int64_t t1_ns);

// Assembles a snapshot from per-interface rates over [t - window, t]. Series
// that yield no rate become missing markers; statuses report up.
SnapshotTelemetry snapshot_at(const CounterStore& store, const Topology& topo,
                              const ForwardingState& fwd_report, std::int64_t t_ns,
                              std::int64_t window_ns);

// Ingests newline-delimited JSON records
// {interface, direction, t_unix_ns, cumulative_bytes}; returns record count.
std::size_t ingest_counter_stream(CounterStore& store,
                                  const std::filesystem::path& path);

}  // namespace crosscheck
