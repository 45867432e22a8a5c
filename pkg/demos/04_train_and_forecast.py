"""Train one probabilistic estimator and read its quantile forecasts.

Uses a reduced setup (3-week trace, 2 epochs) so it finishes in about half
a minute; the full benchmark lives in default.json. Run:

    python demos/04_train_and_forecast.py
"""

import numpy as np

from prb_oracle import (
    ForecasterConfig,
    TraceConfig,
    fit,
    forecast_quantile,
    generate_synthetic,
    predict,
    split,
)

series = generate_synthetic(TraceConfig(weeks=3, seed=42), max_prb=160)
train, test = split(series, 0.8)
print(f"training deepar on {len(train)} hours...")

config = ForecasterConfig(kind="deepar", epochs=2, num_samples=100, seed=1)
model = fit(config, train)
print(f"done; scale={model.scale:.2f}, final epoch mean NLL={model.final_train_loss:.3f}")

# Forecast the first test day from the last training day.
t0 = len(train)
context = series.values[t0 - 24 : t0]
result = predict(model, context, start=series.timestamp(t0))
print(f"sample paths: {result.samples.shape}")

q05 = forecast_quantile(result, 0.05)
q50 = forecast_quantile(result, 0.50)
q95 = forecast_quantile(result, 0.95)
truth = test.values[:24]

print("\nhour  truth    p5   p50   p95   inside?")
hits = 0
for h in range(24):
    inside = q05[h] <= truth[h] <= q95[h]
    hits += inside
    print(f"{h:4d} {truth[h]:6.1f} {q05[h]:6.1f} {q50[h]:6.1f} {q95[h]:6.1f}   {'y' if inside else 'n'}")
print(f"\n{hits}/24 hours inside the 5-95 band")
print(f"median MAE on this window: {np.mean(np.abs(q50 - truth)):.2f} PRBs")
