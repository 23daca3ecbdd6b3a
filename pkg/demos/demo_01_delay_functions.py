"""Delay-function basics: the exp-channel pair and its involution structure.

Run:  python demos/demo_01_delay_functions.py
"""

import numpy as np

from involution import (
    ExpChannelParams,
    check_involution,
    delta_min,
    derivative_down,
    derivative_up,
    exp_channel,
    tabulated_channel,
)

# The reference channel used throughout the demos: an RC stage with unit RC
# constant, half a second of pure delay, and a mid-rail threshold.
ref = exp_channel(ExpChannelParams(tau=1.0, t_p=0.5, vth_norm=0.5))

print("== asymptotes ==")
print(f"delta_inf_up   = {ref.delta_inf_up:.6f} s")
print(f"delta_inf_down = {ref.delta_inf_down:.6f} s  (symmetric threshold -> equal pair)")

print("\n== a few values ==")
for T in (-1.0, -0.5, 0.0, 1.0, 10.0):
    print(f"delta_up({T:5.1f}) = {ref.up(T):9.6f}   delta_down({T:5.1f}) = {ref.down(T):9.6f}")
print("(the domain guard maps T <= -delta_inf to -inf: "
      f"delta_up(-2) = {ref.up(-2.0)})")

print("\n== the involution identity ==")
grid = np.linspace(-0.9, 8.0, 9)
res = check_involution(ref, grid, tol=1e-9)
print(f"max |-up(-down(T)) - T| over {len(grid)} points: {res.max_residual:.3e}  "
      f"({'ok' if res.passed else 'violated'})")

print("\n== minimum delay ==")
d = delta_min(ref)
print(f"delta_min = {d:.9f} s; for exp channels this equals the pure delay T_p")
print(f"delta_up(-delta_min) = {ref.up(-d):.9f}  delta_down(-delta_min) = {ref.down(-d):.9f}")

print("\n== derivatives ==")
print(f"delta_up'(0) = {derivative_up(ref, 0.0):.6f}")
T = 1.0
recip = derivative_up(ref, -ref.down(T)) * derivative_down(ref, T)
print(f"reciprocal identity at T={T}: up'(-down(T)) * down'(T) = {recip:.9f}")

print("\n== tabulated channels ==")
# sample the closed form, rebuild by interpolation, and re-check the identity
dinf = ref.delta_inf_down
ts = -dinf + np.logspace(-4, np.log10(15 + dinf), 3000)
down_samples = [(float(t), ref.down(float(t))) for t in ts]
up_samples = [(-dd, -t) for t, dd in down_samples]  # inversion via the involution
tab = tabulated_channel(up_samples, down_samples, ref.delta_inf_up, ref.delta_inf_down)
res = check_involution(tab, np.linspace(-0.9, 6.0, 50), tol=1e-6)
print(f"interpolated pair: max residual {res.max_residual:.3e}, "
      f"delta_min = {delta_min(tab):.8f}")
