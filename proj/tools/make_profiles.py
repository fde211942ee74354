#!/usr/bin/env python3
"""Regenerates the bundled noise profiles in data/profiles/.

Each profile is a symmetric empirical distribution of relative imbalance (%)
whose absolute-value percentiles hit the published production measurements:

  link:   |x| p95 = 4.0   (and 5.0 at p96.5, pinning the tail slope)
  router: |x| p95 = 0.21
  path:   |x| p75 = 5.6, p95 = 15.3

Magnitudes follow a lognormal fitted through those points; percentiles between
the published ones are therefore log-linear in the probit scale. Operators with
measured distributions should replace these files with their own samples.
"""

import json
import math
import pathlib

M = 1000  # magnitudes per side; the emitted profile has 2*M+1 samples


def probit(p: float) -> float:
    # Acklam/Wichura-style rational approximation; plenty for grid generation.
    a = [-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00]
    b = [-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01]
    c = [-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00]
    d = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00]
    plow, phigh = 0.02425, 1 - 0.02425
    if p < plow:
        q = math.sqrt(-2 * math.log(p))
        return (((((c[0]*q+c[1])*q+c[2])*q+c[3])*q+c[4])*q+c[5]) / \
               ((((d[0]*q+d[1])*q+d[2])*q+d[3])*q+1)
    if p > phigh:
        q = math.sqrt(-2 * math.log(1 - p))
        return -(((((c[0]*q+c[1])*q+c[2])*q+c[3])*q+c[4])*q+c[5]) / \
                ((((d[0]*q+d[1])*q+d[2])*q+d[3])*q+1)
    q = p - 0.5
    r = q * q
    return (((((a[0]*r+a[1])*r+a[2])*r+a[3])*r+a[4])*r+a[5])*q / \
           (((((b[0]*r+b[1])*r+b[2])*r+b[3])*r+b[4])*r+1)


def lognormal_from_quantiles(q1, v1, q2, v2):
    z1, z2 = probit(q1), probit(q2)
    sigma = (math.log(v2) - math.log(v1)) / (z2 - z1)
    mu = math.log(v1) - z1 * sigma
    return mu, sigma


def make_profile(mu, sigma):
    mags = [math.exp(mu + sigma * probit((i + 0.5) / M)) for i in range(M)]
    samples = sorted([-m for m in mags] + [0.0] + mags)
    return samples


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "profiles"
    out.mkdir(parents=True, exist_ok=True)
    fits = {
        "link": lognormal_from_quantiles(0.95, 4.0, 0.965, 5.0),
        "router": (math.log(0.21) - probit(0.95) * 1.0, 1.0),
        "path": lognormal_from_quantiles(0.75, 5.6, 0.95, 15.3),
    }
    for name, (mu, sigma) in fits.items():
        samples = make_profile(mu, sigma)
        payload = {"invariant_class": name,
                   "samples_pct": [round(s, 6) for s in samples]}
        (out / f"{name}.json").write_text(json.dumps(payload) + "\n")
        mags = sorted(abs(s) for s in samples)
        for q in (0.5, 0.75, 0.95):
            print(f"{name} |x| p{int(q*100)} = {mags[int(q*(len(mags)-1))]:.3f}")


if __name__ == "__main__":
    main()
