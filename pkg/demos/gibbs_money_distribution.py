# Random pairwise money exchange with no savings: the steady state is the
# Boltzmann-Gibbs exponential P(m) = (1/T) exp(-m/T) with T = M/N.

import numpy as np

from kinexch import analysis, engine, theory
from kinexch.engine import SimConfig

cfg = SimConfig(
    model="no_savings",
    N=1000,
    mc_steps=10_000,
    burn_in=10_000,
    sample_interval=50,
    seed=7,
)
res = engine.run(cfg)
print(f"ran {res.total_trades:,} trades in {res.wall_time:.1f}s "
      f"(conservation {res.conservation_max_rel:.1e})")

fit = analysis.fit_exponential(res.money_samples)
T_pred = theory.gibbs_temperature(cfg.total_money, cfg.N)
print(f"fitted T = {fit.estimate:.4f}  (predicted {T_pred:.4f})")
print(f"KS distance {fit.params['ks']:.5f} vs 1% critical "
      f"{fit.params['ks_critical_1pct']:.5f} -> healthy = {fit.healthy}")

# quick look at the density on a log scale: straight line in log P vs m
est = res.money_estimate("linear")
centers = 0.5 * (est.edges[:-1] + est.edges[1:])
sel = est.counts > 50
logp = np.log(est.density[sel])
print("\n  m      log P(m)   (slope should be -1/T = -1)")
for m, lp in list(zip(centers[sel], logp))[::20]:
    print(f"  {m:5.2f}  {lp:8.3f}")
slope = np.polyfit(centers[sel], logp, 1)[0]
print(f"\nlog-density slope = {slope:.3f}")
