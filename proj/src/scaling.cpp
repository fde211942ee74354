#include "crosscheck/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "crosscheck/error.hpp"

namespace crosscheck {

void ScalingParams::validate() const {
  if (n < 1) throw Error("scaling n must be >= 1");
  if (!(p > 0.0 && p < 1.0) && p != 1.0) throw Error("scaling p outside (0,1]");
  if (p_prime < 0.0 || p_prime >= 1.0) throw Error("scaling p_prime outside [0,1)");
  if (!(p_prime < gamma && gamma < p)) {
    throw Error("scaling params must satisfy p_prime < gamma < p");
  }
}

double kl_bernoulli(double x, double y) {
  if (x <= 0.0 || x >= 1.0 || y <= 0.0 || y >= 1.0) {
    throw Error("kl_bernoulli arguments must lie strictly in (0,1)");
  }
  return x * std::log(x / y) + (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
}

double log_binomial_cdf(long n, double p, long k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (k >= n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return -std::numeric_limits<double>::infinity();
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  // log-sum-exp over terms log C(n,i) + i log p + (n-i) log q
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<std::size_t>(k) + 1);
  for (long i = 0; i <= k; ++i) {
    const double term = lgn - std::lgamma(static_cast<double>(i) + 1.0) -
                        std::lgamma(static_cast<double>(n - i) + 1.0) +
                        static_cast<double>(i) * log_p +
                        static_cast<double>(n - i) * log_q;
    terms[static_cast<std::size_t>(i)] = term;
    max_term = std::max(max_term, term);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return std::min(max_term + std::log(sum), 0.0);
}

ScalingRates exact_rates(const ScalingParams& params) {
  params.validate();
  const long cut = static_cast<long>(std::floor(static_cast<double>(params.n) * params.gamma));
  ScalingRates rates;
  rates.fpr = std::exp(log_binomial_cdf(params.n, params.p, cut));
  rates.one_minus_tpr = 1.0 - std::exp(log_binomial_cdf(params.n, params.p_prime, cut));
  return rates;
}

ScalingRates chernoff_bounds(const ScalingParams& params) {
  params.validate();
  const double n = static_cast<double>(params.n);
  ScalingRates bounds;
  bounds.fpr = std::exp(-n * kl_bernoulli(params.gamma, params.p));
  bounds.one_minus_tpr = std::exp(-n * kl_bernoulli(params.gamma, params.p_prime));
  return bounds;
}

double cutoff_for_target(long n, double p, double target_fpr) {
  if (n < 1) throw Error("cutoff_for_target: n must be >= 1");
  if (p <= 0.0 || p >= 1.0) throw Error("cutoff_for_target: p must lie in (0,1)");
  if (target_fpr <= 0.0 || target_fpr > 1.0) {
    throw Error("cutoff_for_target: target_fpr must lie in (0,1]");
  }
  const double log_target = std::log(target_fpr);
  // FPR(k) = B_{n,p}(k) is non-decreasing in k; binary search the largest
  // k <= n-1 still within target.
  if (log_binomial_cdf(n, p, 0) > log_target) {
    throw Error("cutoff_for_target: unattainable target " + std::to_string(target_fpr) +
                " at n=" + std::to_string(n));
  }
  long lo = 0, hi = n - 1;
  while (lo < hi) {
    const long mid = (lo + hi + 1) / 2;
    if (log_binomial_cdf(n, p, mid) <= log_target) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return static_cast<double>(lo) / static_cast<double>(n);
}

namespace {

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double healthy_satisfaction_probability(const NoiseProfile& path_profile,
                                        double tau_pct) {
  const auto& s = path_profile.samples();
  std::size_t within = 0;
  for (double v : s) {
    if (std::abs(v) <= tau_pct) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(s.size());
}

double buggy_satisfaction_probability(const NoiseProfile& path_profile,
                                      double tau_pct, double shift_mean_pct,
                                      double shift_std_pct) {
  const auto& s = path_profile.samples();
  double acc = 0.0;
  for (double v : s) {
    // P(|v + G| <= tau) with G ~ Normal(mean, std), in closed form per sample.
    const double hi = (tau_pct - v - shift_mean_pct) / shift_std_pct;
    const double lo = (-tau_pct - v - shift_mean_pct) / shift_std_pct;
    acc += standard_normal_cdf(hi) - standard_normal_cdf(lo);
  }
  return acc / static_cast<double>(s.size());
}

}  // namespace crosscheck
