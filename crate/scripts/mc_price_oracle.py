#!/usr/bin/env python3
"""Independent Monte Carlo oracle for the European call test values.

Prices the reference contract (x0 = 100, K = 100, r = 0.05, alpha = 0.04,
T = 1) by risk-neutral simulation with numpy's PCG64 generator, which shares
no code with the library's sampler. The printed price and standard error are
frozen into crates/core/tests/pricing_oracles.rs; rerun this script to audit
them.

Usage: python3 scripts/mc_price_oracle.py [n_paths] [seed]
"""

import math
import sys

import numpy as np


def mc_call(x0, strike, r, alpha, t, n_paths, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n_paths)
    xt = x0 * np.exp((r - alpha / 2.0) * t + math.sqrt(alpha * t) * z)
    payoff = np.maximum(xt - strike, 0.0)
    disc = math.exp(-r * t)
    price = disc * payoff.mean()
    se = disc * payoff.std(ddof=1) / math.sqrt(n_paths)
    return price, se


def bs_call(x0, strike, r, alpha, t):
    from statistics import NormalDist

    sd = math.sqrt(alpha * t)
    d1 = (math.log(x0 / strike) + (r + alpha / 2.0) * t) / sd
    d2 = d1 - sd
    phi = NormalDist().cdf
    return x0 * phi(d1) - strike * math.exp(-r * t) * phi(d2)


def main():
    n_paths = int(float(sys.argv[1])) if len(sys.argv) > 1 else 1_000_000
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 20260814
    x0, strike, r, alpha, t = 100.0, 100.0, 0.05, 0.04, 1.0
    price, se = mc_call(x0, strike, r, alpha, t, n_paths, seed)
    closed = bs_call(x0, strike, r, alpha, t)
    print(f"n_paths      = {n_paths}")
    print(f"seed         = {seed}")
    print(f"mc price     = {price:.15f}")
    print(f"std error    = {se:.15f}")
    print(f"closed form  = {closed:.15f}")
    print(f"gap / se     = {abs(price - closed) / se:.3f}")


if __name__ == "__main__":
    main()
