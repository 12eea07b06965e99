"""
Sequential rain-onset detection
===============================

A CUSUM detector tuned to the attenuation of light rain raises an alarm once
the clipped cumulative excess passes a threshold set by the false-alarm
probability. Heavier rain drifts faster, so it is flagged sooner.
"""

# %%
from rainbound.montecarlo import RngSpec, arl0_experiment, cusum_delay_experiment
from rainbound.rain_detect import CusumConfig, add_wald, arl0_siegmund

cfg = CusumConfig()
print(f"mu_d = {cfg.mu_d:.3f} dB, h = {cfg.h:.2f} dB")
rows = cusum_delay_experiment((10.0, 20.0, 50.0), cfg, 2000, RngSpec(seed=1))
for row in rows:
    print(f"R={row.rain_rate:4.0f}: Wald {add_wald(row.rain_rate, cfg):5.2f} min, "
          f"simulated {row.mc_add:5.2f} min, P(alarm <= 10 min) = {row.pd_10:.3f}")

# %%
# Without rain the detector runs far longer than 1/P_FA before a false alarm.
res = arl0_experiment(CusumConfig(p_fa=1e-2), runs=500, rng=RngSpec(seed=2))
print(f"in-control run length {res.mean_run_length:.0f} min, Siegmund "
      f"{arl0_siegmund(CusumConfig(p_fa=1e-2)):.0f}, nominal {res.nominal:.0f}")
