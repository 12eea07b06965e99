"""
Elevation angle and sensing sensitivity
=======================================

Lower elevations lengthen the path through rain, which raises the
attenuation per mm/h, but they also cost SNR and so inflate the pilot
estimation noise. With realistic noise the minimum detectable rain rate has
an interior minimum; with constant noise it keeps improving toward the
horizon.
"""

# %%
from rainbound import RunConfig
from rainbound.slant_geometry import (NoiseMode, elevation_sweep, optimal_locus,
                                      sensing_optimal_elevation_closed, sensing_optimal_elevation_numeric)

link = RunConfig().link_config()
els = [5, 7.5, 10, 12.5, 15, 20, 30, 38, 60, 90]
real = elevation_sweep(els, link, NoiseMode.REALISTIC)
const = elevation_sweep(els, link, NoiseMode.CONSTANT)
print(f"{'elev':>6} {'realistic':>10} {'constant':>10}  note")
for e, a, b, z in zip(els, real.rmin_values, const.rmin_values, real.p618_zone):
    print(f"{e:6.1f} {a:10.3f} {b:10.3f}  {'below P.618 validity' if z else ''}")

# %%
# Closed-form optimum with rain and gas left out of the SNR, checked
# against a golden-section search on the same model.
closed = sensing_optimal_elevation_closed(link)
print(f"closed form {closed.elevation:.3f} deg, numeric {sensing_optimal_elevation_numeric(link):.3f} deg")

# %%
# With rain also degrading the SNR, the sensing optimum moves up with rain
# rate while the rate-optimal elevation stays at zenith.
for p in optimal_locus([3, 10, 25], link):
    print(f"R={p.rain_rate:5.1f}: sensing {p.theta_sens:6.2f} deg, rate {p.theta_comm:6.2f} deg")
