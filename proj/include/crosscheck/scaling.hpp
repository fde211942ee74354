#pragma once

#include <utility>

#include "crosscheck/telemetry.hpp"

namespace crosscheck {

struct ScalingParams {
  long n = 1;            // number of links
  double p = 0.0;        // per-link satisfaction probability, healthy inputs
  double p_prime = 0.0;  // per-link satisfaction probability, buggy inputs
  double gamma = 0.0;    // validation cutoff, p_prime < gamma < p

  void validate() const;
};

// Bernoulli KL divergence D(x || y) in nats; both arguments in (0, 1).
double kl_bernoulli(double x, double y);

// log P(X <= k) for X ~ Binomial(n, p), accumulated in log space so tails
// stay finite up to n = 1e5.
double log_binomial_cdf(long n, double p, long k);

struct ScalingRates {
  double fpr = 0.0;
  double one_minus_tpr = 0.0;
};

// Exact rates under the i.i.d. coin model: a healthy input is rejected when
// at most floor(n * gamma) links satisfy the invariant (the strict "> gamma"
// acceptance), so fpr = B_{n,p}(floor(n*gamma)) and
// 1 - tpr = 1 - B_{n,p'}(floor(n*gamma)).
ScalingRates exact_rates(const ScalingParams& params);

// Chernoff-Hoeffding bounds exp(-n D(gamma||p)) and exp(-n D(gamma||p')).
ScalingRates chernoff_bounds(const ScalingParams& params);

// Largest gamma on the grid {k/n, k < n} whose exact FPR stays within
// target_fpr. Throws when even gamma = 0 misses the target.
double cutoff_for_target(long n, double p, double target_fpr);

// Healthy per-link satisfaction probability for a given tau: mass of the
// profile within [-tau, tau].
double healthy_satisfaction_probability(const NoiseProfile& path_profile,
                                        double tau_pct);

// Buggy counterpart: each profile sample is shifted by a Gaussian imbalance
// with the given mean/stddev; returns the average mass within [-tau, tau].
double buggy_satisfaction_probability(const NoiseProfile& path_profile,
                                      double tau_pct, double shift_mean_pct,
                                      double shift_std_pct);

}  // namespace crosscheck
