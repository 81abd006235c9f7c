"""
Checking the asymptotics by simulation
======================================

False-alarm rate at the asymptotic threshold, power of both tests at
matched false-alarm levels, and the Tracy-Widom fit of the top eigenvalue.
"""

from spike_detect.simulate import (
    SimConfig,
    compare_at_levels,
    empirical_pfa,
    mean_top_eigenvalue,
    paired_statistics,
    tw_fluctuation_check,
)

# %% False alarms at the asymptotic threshold
for K, N in ((10, 50), (20, 100), (60, 300)):
    e = empirical_pfa(SimConfig(K=K, N=N, trials=4000, seed=1, alpha=0.1))
    print(f"K={K:3d} N={N:4d}  PFA = {e.pfa:.4f}  (95% CI {e.ci_low:.4f}..{e.ci_high:.4f}) at alpha 0.1")

# %% Power at matched levels, unit SNR
s = paired_statistics(SimConfig(K=10, N=50, rho=1.0, trials=4000, seed=8))
m = compare_at_levels(s, [0.01, 0.05, 0.1, 0.2, 0.5])
print("\nlevel   GLRT    cond    diff/SE")
for row in zip(m.levels, m.power_glrt, m.power_cond, m.difference / m.paired_se):
    print("{:.2f}   {:.4f}  {:.4f}  {:6.1f}".format(*row))

# %% Largest eigenvalue: Tracy-Widom under the null, a spike under the alternative
print()
for K in (4, 8, 16, 64):
    d = tw_fluctuation_check(SimConfig(K=K, N=4 * K, trials=4000, seed=1))
    print(f"K={K:3d} N={4 * K:4d}  KS distance to Tracy-Widom = {d:.4f}")
m1 = mean_top_eigenvalue(SimConfig(K=200, N=1000, rho=10.0, trials=50, seed=3))
print(f"mean top eigenvalue at c=0.2, rho=10: {m1:.3f} (limit {(1 + 10) * (1 + 0.2 / 10):.3f})")
