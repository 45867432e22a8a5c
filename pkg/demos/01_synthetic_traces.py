"""Generate synthetic hourly PRB traces and look at their structure.

The generator composes a diurnal sinusoid (trough at night), weekend
attenuation of the daily swing, and additive Gaussian noise, clamped to
[floor, max_prb]. Run:

    python demos/01_synthetic_traces.py
"""

import numpy as np

from prb_oracle import TraceConfig, generate_synthetic, load_csv, save_csv, split

config = TraceConfig(weeks=10, base_load=60.0, daily_amplitude=40.0,
                     weekly_factor=0.7, noise_std=6.0, seed=42)
series = generate_synthetic(config, max_prb=160)

print(f"{config.weeks} weeks -> {len(series)} hourly samples "
      f"starting {series.start_time:%A %Y-%m-%d %H:%M}")
print(f"range [{series.values.min():.1f}, {series.values.max():.1f}] PRBs, "
      f"mean {series.values.mean():.1f}")

# Hourly profile of the first Monday vs the first Saturday: the weekend
# daily swing is attenuated by weekly_factor.
monday = series.values[:24]
saturday = series.values[5 * 24 : 6 * 24]
print("\nhour  monday  saturday")
for h in range(0, 24, 3):
    print(f"{h:4d} {monday[h]:7.1f} {saturday[h]:9.1f}")

# Chronological 80:20 split, never shuffled.
train, test = split(series, 0.8)
print(f"\nsplit: {len(train)} train hours + {len(test)} test hours")

# The CSV interface round-trips exactly.
save_csv(series, "demo_trace.csv")
again = load_csv("demo_trace.csv")
assert np.array_equal(again.values, series.values)
print("wrote demo_trace.csv and verified a lossless round trip")
