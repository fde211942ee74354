#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crosscheck/network.hpp"
#include "crosscheck/rng.hpp"

namespace crosscheck {

enum class LinkStatus { up, down };

// The per-link router signals of one collection window. A border link only
// carries the signals of its internal endpoint; the rest stay unset.
struct LinkSignals {
  std::optional<LinkStatus> phy_src;   // physical status at the source router
  std::optional<LinkStatus> phy_dst;   // physical status at the destination
  std::optional<LinkStatus> link_src;  // link-layer status at the source
  std::optional<LinkStatus> link_dst;  // link-layer status at the destination
  std::optional<double> tx_rate;       // transmit rate at the source, bytes/sec
  std::optional<double> rx_rate;       // receive rate at the destination, bytes/sec
};

struct SnapshotTelemetry {
  double timestamp = 0.0;
  std::map<LinkId, LinkSignals> links;
  ForwardingState forwarding;  // as reported by routers for this window
};

// Empirical distribution of relative imbalance (%), one per invariant class.
// Sampling and quantiles interpolate linearly between sorted samples.
class NoiseProfile {
 public:
  NoiseProfile() = default;
  explicit NoiseProfile(std::vector<double> samples_pct);

  static NoiseProfile load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path, const std::string& invariant_class) const;

  bool is_zero() const;
  double quantile(double q) const;
  // Quantile of the absolute value, e.g. abs_quantile(0.75) for tau-like cuts.
  double abs_quantile(double q) const;
  double sample(Rng& rng) const;
  const std::vector<double>& samples() const { return samples_; }

 private:
  std::vector<double> samples_;  // sorted
};

struct NoiseProfileSet {
  NoiseProfile link;    // two counters of one link disagreeing
  NoiseProfile router;  // local in-sum vs out-sum at one router
  NoiseProfile path;    // counter mean vs demand-implied load

  static NoiseProfileSet load(const std::filesystem::path& link_file,
                              const std::filesystem::path& router_file,
                              const std::filesystem::path& path_file);
};

// Noise-free telemetry: both counters equal the demand-implied load, all
// status signals up, forwarding echoed verbatim.
SnapshotTelemetry generate_ideal_telemetry(const Topology& topo,
                                           const DemandMatrix& demand,
                                           const ForwardingState& fwd);

struct NoiseOptions {
  int max_iterations = 200;
  double damping = 0.7;
  // Convergence: every router's imbalance within this many percentage points
  // of its per-router target draw.
  double router_tolerance_pct = 0.02;
};

// Appendix-style noise matching: (a) both counters of each link scaled by a
// path-profile draw, (b) a link-profile draw x split +x/2 / -x/2 across the
// two counters, (c) damped iterative adjustment of link means until every
// router's local imbalance hits its router-profile target draw. Statuses are
// untouched. Throws if the router step fails to converge, reporting the
// residual.
SnapshotTelemetry apply_invariant_matched_noise(const SnapshotTelemetry& ideal,
                                                const Topology& topo,
                                                const NoiseProfileSet& profiles,
                                                std::uint64_t seed,
                                                const NoiseOptions& opts = {});

// Relative imbalances (%) realized by a snapshot, pooled per invariant class;
// zero-traffic links/routers are skipped. truth is the demand-implied load.
struct InvariantImbalances {
  std::vector<double> link_pct;
  std::vector<double> router_pct;
  std::vector<double> path_pct;
};
InvariantImbalances measure_invariant_imbalances(const SnapshotTelemetry& snap,
                                                 const Topology& topo,
                                                 const LinkLoadMap& truth);

// Mean of the available counters per link (raw l_router); links with no
// counter at all map to 0.
LinkLoadMap counter_mean_loads(const SnapshotTelemetry& snap, const Topology& topo);

void save_snapshot(const SnapshotTelemetry& snap, const std::filesystem::path& path);
SnapshotTelemetry load_snapshot(const std::filesystem::path& path);

}  // namespace crosscheck
