"""One channel, one pulse: attenuation, cancellation, and the transition log.

Run:  python demos/demo_02_pulse_filtering.py
"""

import numpy as np

from involution import (
    ExpChannelParams,
    Inertial,
    Involution,
    Pure,
    apply_channel,
    exp_channel,
    pulse,
)

ref = exp_channel(ExpChannelParams(1.0, 0.5, 0.5))


def show(title, out, log):
    trs = ", ".join(f"{'R' if t.value else 'F'}@{t.time:.4f}" for t in out.transitions) or "zero signal"
    print(f"{title:32s} -> {trs}")
    for r in log:
        mark = "x" if r.canceled else " "
        print(f"    {mark} n={r.index} t={r.time:7.3f} T={r.T:9.4f} delta={r.delta:9.4f} out={r.out_time:9.4f}")


print("== involution channel: pulse width sweep ==")
for width in (0.1, 0.5, 0.69, 0.75, 1.0, 2.0):
    out, log = apply_channel(Involution(ref), pulse(0, width))
    show(f"pulse width {width}", out, log)

print("\nshort pulses cancel in the channel: the tentative falling transition")
print("lands before the rising one (non-FIFO) and both are removed.")
print(f"the single-pulse filtering threshold is delta_inf_up - delta_min = "
      f"{ref.delta_inf_up - 0.5:.5f} s")

print("\n== pulse attenuation ==")
print("surviving pulses are shortened: output width vs input width")
for width in np.linspace(0.75, 2.5, 8):
    out, _ = apply_channel(Involution(ref), pulse(0, float(width)))
    if len(out.transitions) == 2:
        w_out = out.transitions[1].time - out.transitions[0].time
        print(f"   in {width:5.3f}  out {w_out:5.3f}  (attenuated by {width - w_out:+.3f})")

print("\n== baselines ==")
out, _ = apply_channel(Pure(1.0), pulse(0, 0.1))
print("pure delay d=1 shifts the pulse:", [(t.time, t.value) for t in out.transitions])
out, _ = apply_channel(Inertial(1.0, 0.2), pulse(0, 0.1))
print("inertial (d=1, window=0.2) suppresses a 0.1 pulse:", out.is_zero and "zero signal")
out, _ = apply_channel(Inertial(1.0, 0.2), pulse(0, 0.5))
print("but passes a 0.5 pulse unscathed:", [(t.time, t.value) for t in out.transitions])
