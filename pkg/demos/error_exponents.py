"""
Error exponents of the two tests
================================

Miss probabilities decay like exp(-N E). The GLRT and the condition-number
test share the same exponent at a fixed level, but along the whole
trade-off curve the GLRT is strictly better.
"""

import numpy as np

from spike_detect import ldp

# %% Rate functions for c = 0.5 and a unit-power source
ctx = ldp.LdpContext(0.5, 1.0)
print(f"lambda+ = {ctx.lambda_plus:.4f}, lambda_spk = {ctx.lambda_spk:.4f}")
for x in np.linspace(ctx.lambda_plus, 3.2, 6):
    print(f"  x = {x:.3f}  I0+ = {ldp.rate_I0_plus(ctx, x):.5f}  Irho+ = {ldp.rate_Irho_plus(ctx, x):.5f}")

# %% Exponent at a fixed level, versus SNR
print("\nc = 0.2")
for rho in (0.3, 1.0, 10.0, 100.0, 1000.0):
    e = ldp.error_exponent_T(ldp.LdpContext(0.2, rho))
    print(f"  rho = {rho:7.1f}  E_T = {e:.5f}  high-SNR form = {ldp.high_snr_exponent(rho, 0.2):.5f}")

# %% Trade-off curves and the GLRT margin
ctx = ldp.LdpContext(0.2, 10.0)
curve_t = ldp.ee_curve_T(ctx, 8)
curve_u = ldp.ee_curve_U(ctx, 8)
margins = ldp.dominance_margins(ctx, curve_u)
print("\nGLRT curve (a, b):", [(round(p.a, 4), round(p.b, 4)) for p in curve_t])
print("cond curve (a, b):", [(round(p.a, 4), round(p.b, 4)) for p in curve_u])
print("GLRT margin at matched a:", np.round(margins, 5))

# %% Below the detectability threshold there is nothing to plot
print("\nrho <= sqrt(c):", ldp.ee_curve_T(ldp.LdpContext(0.5, 0.5)))
