# The agent with the largest saving propensity ends up holding the largest
# average fortune.  Pinning that propensity at lambda_max and watching the
# agent's money relax shows two scaling laws: the relaxation time grows like
# 1/(1 - lambda_max), and at fixed disorder the richest agent's mean money
# grows sublinearly with the population size (slope ~ 0.77 in log-log).

import numpy as np

from kinexch import engine, lambda_dist
from kinexch.engine import SimConfig

print("relaxation time vs 1 - lambda_max (slope should be ~ -1):")
taus, gaps = [], []
for lam_max in (0.9, 0.95, 0.975):
    steps = int(200 / (1 - lam_max))
    cfg = SimConfig(
        model="distributed_savings", N=100, mc_steps=steps, seed=21,
        ensembles=50, lambda_spec=lambda_dist.uniform_interval(0.0, 1.0),
    )
    res = engine.track_richest(cfg, lambda_max=lam_max)
    print(f"  lambda_max={lam_max:.3f}  tau={res.tau:7.0f}  <m>={res.mean_money:.2f}")
    taus.append(res.tau)
    gaps.append(1 - lam_max)
slope = np.polyfit(np.log(gaps), np.log(taus), 1)[0]
print(f"  log-log slope = {slope:.2f}")

print("\nrichest agent's mean money vs N (slope should be ~ 0.77):")
ms, ns = [], []
for n in (100, 200, 400, 800):
    cfg = SimConfig(
        model="distributed_savings", N=n, mc_steps=12 * n, seed=31,
        ensembles=60, lambda_spec=lambda_dist.uniform_interval(0.0, 1.0),
    )
    res = engine.track_richest(cfg)
    print(f"  N={n:4d}  lambda_max={res.lambda_max:.4f}  <m>={res.mean_money:.2f}")
    ms.append(res.mean_money)
    ns.append(n)
slope = np.polyfit(np.log(ns), np.log(ms), 1)[0]
print(f"  log-log slope = {slope:.2f}")
