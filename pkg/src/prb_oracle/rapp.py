"""Pipeline orchestrator: monitoring (trace), analytics (fit + rolling
forecasts), decision (percentile allocation), actuation scoring (power and
provisioning), and report emission."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .decision import AllocationPolicy, allocate
from .forecasters import (
    MODEL_KINDS,
    PROBABILISTIC_KINDS,
    ForecasterConfig,
    fit,
    forecast_quantile,
    predict,
)
from .metrics import MetricsReport, coverage, normalized_deviation, point_errors, quantile_loss, provisioning
from .power import PowerParams, power_saving
from .traces import PrbSeries, TraceConfig, generate_synthetic, load_csv, split

DEFAULT_PERCENTILES = (0.05, 0.25, 0.50, 0.75, 0.90, 0.99)
BAND_LOW, BAND_HIGH = 0.01, 0.99  # shaded uncertainty band in the hourly table

# Fixed per-kind offsets so the four fits get independent streams from one
# global seed.
MODEL_SEED_OFFSETS = {"sff": 11, "deepar": 12, "transformer": 13, "lstm": 14}


class PipelineError(ValueError):
    """Invalid experiment configuration or insufficient data."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One end-to-end experiment: trace source, models, policies, power model."""

    trace: TraceConfig | str = field(default_factory=TraceConfig)
    max_prb: int = 160
    train_fraction: float = 0.8
    percentiles: tuple[float, ...] = DEFAULT_PERCENTILES
    power: PowerParams = field(default_factory=PowerParams)
    models: dict[str, ForecasterConfig] = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        ps = tuple(float(p) for p in self.percentiles)
        object.__setattr__(self, "percentiles", ps)
        if any(not 0.0 < p < 1.0 for p in ps) or any(a >= b for a, b in zip(ps, ps[1:])):
            raise PipelineError(
                f"percentiles must be strictly increasing within (0,1), got {ps}"
            )
        if not self.models:
            object.__setattr__(
                self, "models", {kind: ForecasterConfig(kind=kind) for kind in MODEL_KINDS}
            )
        for kind in self.models:
            if kind not in MODEL_KINDS:
                raise PipelineError(f"unknown model kind {kind!r}")
        geometries = {(m.context_len, m.horizon) for m in self.models.values()}
        if len(geometries) != 1:
            raise PipelineError(
                f"all models must share context_len and horizon, got {geometries}"
            )

    @property
    def context_len(self) -> int:
        return next(iter(self.models.values())).context_len

    @property
    def horizon(self) -> int:
        return next(iter(self.models.values())).horizon

    def to_dict(self) -> dict:
        if isinstance(self.trace, TraceConfig):
            trace = {"kind": "synthetic", **vars(self.trace)}
        else:
            trace = {"kind": "csv", "path": str(self.trace)}
        return {
            "trace": trace,
            "max_prb": self.max_prb,
            "train_fraction": self.train_fraction,
            "percentiles": list(self.percentiles),
            "power": vars(self.power),
            "models": {k: m.to_dict() for k, m in self.models.items()},
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        kwargs = {}
        if "trace" in doc:
            tr = dict(doc.pop("trace"))
            kind = tr.pop("kind", "synthetic")
            if kind == "synthetic":
                kwargs["trace"] = TraceConfig(**tr)
            elif kind == "csv":
                kwargs["trace"] = tr["path"]
            else:
                raise PipelineError(f"unknown trace kind {kind!r}")
        if "power" in doc:
            pw = dict(doc.pop("power"))
            pw.setdefault("max_prb", doc.get("max_prb", 160))
            kwargs["power"] = PowerParams(**pw)
        if "models" in doc:
            models = {}
            for kind, m in doc.pop("models").items():
                m = dict(m)
                m["kind"] = kind
                models[kind] = ForecasterConfig.from_dict(m)
            kwargs["models"] = models
        if "percentiles" in doc:
            kwargs["percentiles"] = tuple(doc.pop("percentiles"))
        for key in ("max_prb", "train_fraction", "output_dir", "seed"):
            if key in doc:
                kwargs[key] = doc.pop(key)
        if doc:
            raise PipelineError(f"unknown config keys {sorted(doc)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise PipelineError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise PipelineError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(doc)


@dataclass
class ModelReport:
    """Pooled forecasts and scores for one trained model."""

    kind: str
    metrics: MetricsReport
    power_saving_percent: dict[float, float]
    median_pooled: np.ndarray
    quantiles_pooled: dict[float, np.ndarray]
    allocations: dict[float, np.ndarray]
    final_train_loss: float | None


@dataclass
class SustainabilityReport:
    """Everything the experiment measured, pooled across test windows."""

    config: dict
    percentiles: tuple[float, ...]
    horizon: int
    n_windows: int
    max_prb: int
    truth_pooled: np.ndarray
    true_data_saving_percent: float
    true_data_alloc: np.ndarray
    lstm_baseline: dict[str, float]
    models: dict[str, ModelReport]
    last_window: dict


def _obtain_trace(config: ExperimentConfig) -> PrbSeries:
    if isinstance(config.trace, TraceConfig):
        return generate_synthetic(config.trace, config.max_prb)
    return load_csv(config.trace, config.max_prb)


def run_pipeline(config: ExperimentConfig) -> SustainabilityReport:
    """Run the full experiment; deterministic per config.seed.

    Fits every configured model on the chronological train split, rolls
    non-overlapping horizon-length windows across the test split (each
    conditioned on the preceding context hours), allocates PRBs at every
    configured percentile, and scores provisioning and power saving.
    """
    series = _obtain_trace(config)
    train, test = split(series, config.train_fraction)
    ctx_len, horizon = config.context_len, config.horizon
    if len(test) < ctx_len + horizon:
        raise PipelineError(
            f"test segment of {len(test)} hours shorter than context+horizon "
            f"({ctx_len}+{horizon})"
        )
    n_windows = len(test) // horizon
    n_train = len(train)
    truth = test.values[: n_windows * horizon].copy()

    trained = {}
    for kind, model_cfg in config.models.items():
        seeded = replace(model_cfg, seed=config.seed * 100 + MODEL_SEED_OFFSETS[kind])
        trained[kind] = fit(seeded, train)

    results = {kind: [] for kind in trained}
    for k in range(n_windows):
        t0 = n_train + k * horizon
        ctx = series.values[t0 - ctx_len : t0]
        start = series.timestamp(t0)
        for kind, model in trained.items():
            rng = np.random.default_rng([config.seed, MODEL_SEED_OFFSETS[kind], k])
            results[kind].append(predict(model, ctx, start=start, rng=rng, origin=t0))

    # Ground-truth baseline: provision exactly the demand, rounded up.
    true_alloc = np.clip(np.ceil(truth), 0, config.max_prb).astype(np.int64)
    _, true_saving = power_saving(true_alloc, config.power)

    models = {}
    for kind, window_results in results.items():
        median = np.concatenate([forecast_quantile(r, 0.5) for r in window_results])
        mse, mae, mape = point_errors(truth, median)
        report = MetricsReport(
            mse=mse, mae=mae, mape_percent=mape, nd=normalized_deviation(truth, median)
        )
        saving_map, quant_map, alloc_map = {}, {}, {}
        for p in config.percentiles:
            qpred = np.concatenate([forecast_quantile(r, p) for r in window_results])
            alloc = np.concatenate(
                [allocate(r, AllocationPolicy(p), config.max_prb, kind).prbs
                 for r in window_results]
            )
            report.quantile_loss[p] = quantile_loss(truth, qpred, p)
            report.coverage[p] = coverage(truth, qpred)
            over, under = provisioning(truth, alloc)
            report.over_percent[p] = over
            report.under_percent[p] = under
            _, saving_map[p] = power_saving(alloc, config.power)
            quant_map[p] = qpred
            alloc_map[p] = alloc
        models[kind] = ModelReport(
            kind=kind,
            metrics=report,
            power_saving_percent=saving_map,
            median_pooled=median,
            quantiles_pooled=quant_map,
            allocations=alloc_map,
            final_train_loss=trained[kind].final_train_loss,
        )

    lstm_baseline = {}
    if "lstm" in models:
        mid = 0.5 if 0.5 in config.percentiles else config.percentiles[0]
        lstm_baseline = {
            "power_saving_percent": models["lstm"].power_saving_percent[mid],
            "over_percent": models["lstm"].metrics.over_percent[mid],
            "under_percent": models["lstm"].metrics.under_percent[mid],
        }

    last = _last_window_table(config, truth, true_alloc, results, n_windows)

    # The echo describes the experiment, not the emission destination, so
    # identical (config, seed) runs serialize byte-identically anywhere.
    config_echo = {k: v for k, v in config.to_dict().items() if k != "output_dir"}

    return SustainabilityReport(
        config=config_echo,
        percentiles=config.percentiles,
        horizon=horizon,
        n_windows=n_windows,
        max_prb=config.max_prb,
        truth_pooled=truth,
        true_data_saving_percent=true_saving,
        true_data_alloc=true_alloc,
        lstm_baseline=lstm_baseline,
        models=models,
        last_window=last,
    )


def _last_window_table(config, truth, true_alloc, results, n_windows) -> dict:
    horizon = config.horizon
    sl = slice((n_windows - 1) * horizon, n_windows * horizon)
    per_hour_true_saving, _ = power_saving(true_alloc[sl], config.power)
    table = {
        "t0_index": results[next(iter(results))][-1].origin,
        "truth": truth[sl],
        "true_alloc": true_alloc[sl],
        "true_saving": per_hour_true_saving,
        "models": {},
    }
    for kind, window_results in results.items():
        last = window_results[-1]
        entry = {
            "median": forecast_quantile(last, 0.5),
            "band_low": forecast_quantile(last, BAND_LOW),
            "band_high": forecast_quantile(last, BAND_HIGH),
            "alloc": {},
            "saving": {},
        }
        if last.point is not None:
            entry["point"] = last.point
        for p in config.percentiles:
            alloc = allocate(last, AllocationPolicy(p), config.max_prb, kind).prbs
            per_hour, _ = power_saving(alloc, config.power)
            entry["alloc"][p] = alloc
            entry["saving"][p] = per_hour
        table["models"][kind] = entry
    return table


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _plabel(p: float) -> str:
    return f"p{100 * p:g}"


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def report_to_dict(report: SustainabilityReport) -> dict:
    doc = {
        "config": report.config,
        "percentiles": list(report.percentiles),
        "horizon": report.horizon,
        "n_windows": report.n_windows,
        "max_prb": report.max_prb,
        "truth_pooled": report.truth_pooled,
        "baselines": {
            "true_data": {
                "power_saving_percent": report.true_data_saving_percent,
                "alloc": report.true_data_alloc,
            },
            "lstm": report.lstm_baseline,
        },
        "models": {},
        "last_window": report.last_window,
    }
    for kind, m in report.models.items():
        doc["models"][kind] = {
            "metrics": {
                "mse": m.metrics.mse,
                "mae": m.metrics.mae,
                "mape_percent": m.metrics.mape_percent,
                "nd": m.metrics.nd,
                "quantile_loss": m.metrics.quantile_loss,
                "coverage": m.metrics.coverage,
                "over_percent": m.metrics.over_percent,
                "under_percent": m.metrics.under_percent,
            },
            "power_saving_percent": m.power_saving_percent,
            "median_pooled": m.median_pooled,
            "quantiles_pooled": m.quantiles_pooled,
            "allocations": m.allocations,
            "final_train_loss": m.final_train_loss,
        }
    return _jsonify(doc)


def emit_report(report: SustainabilityReport, out_dir: str | Path) -> list[Path]:
    """Write report.json plus the table/plot CSVs; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PipelineError(f"cannot create output directory {out}: {exc}") from None
    written = []

    path = out / "report.json"
    path.write_text(json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n")
    written.append(path)

    written.append(_write_table1(report, out / "table1.csv"))
    written.append(_write_table2(report, out / "table2.csv"))
    written.append(_write_hourly(report, out / "hourly.csv"))
    written.append(_write_provisioning(report, out / "provisioning.csv"))
    return written


def _percentile_header(report) -> list[str]:
    return [_plabel(p) for p in report.percentiles]


def _write_table1(report: SustainabilityReport, path: Path) -> Path:
    ordered = [k for k in MODEL_KINDS if k in report.models]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "model", "overall", *_percentile_header(report)])
        blanks = [""] * len(report.percentiles)
        for metric in ("mse", "mae", "mape_percent"):
            for kind in ordered:
                w.writerow([metric, kind, getattr(report.models[kind].metrics, metric), *blanks])
        for kind in ordered:
            if kind in PROBABILISTIC_KINDS:
                w.writerow(["nd", kind, report.models[kind].metrics.nd, *blanks])
        for metric in ("quantile_loss", "coverage"):
            for kind in ordered:
                if kind in PROBABILISTIC_KINDS:
                    vals = getattr(report.models[kind].metrics, metric)
                    w.writerow([metric, kind, "", *[vals[p] for p in report.percentiles]])
    return path


def _write_table2(report: SustainabilityReport, path: Path) -> Path:
    ordered = [k for k in MODEL_KINDS if k in report.models]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "statistic", "overall", *_percentile_header(report)])
        blanks = [""] * len(report.percentiles)
        w.writerow(["true_data", "power_saving_percent", report.true_data_saving_percent, *blanks])
        for stat, value in report.lstm_baseline.items():
            w.writerow(["lstm", stat, value, *blanks])
        for kind in ordered:
            if kind not in PROBABILISTIC_KINDS:
                continue
            m = report.models[kind]
            w.writerow(["", "", "", *blanks])  # visual separator, matches grid layout
            w.writerow([kind, "power_saving_percent", "",
                        *[m.power_saving_percent[p] for p in report.percentiles]])
            w.writerow([kind, "over_percent", "",
                        *[m.metrics.over_percent[p] for p in report.percentiles]])
            w.writerow([kind, "under_percent", "",
                        *[m.metrics.under_percent[p] for p in report.percentiles]])
    return path


def _write_hourly(report: SustainabilityReport, path: Path) -> Path:
    last = report.last_window
    ordered = [k for k in MODEL_KINDS if k in last["models"]]
    header = ["hour", "truth", "true_alloc", "true_saving"]
    for kind in ordered:
        header += [f"{kind}_median", f"{kind}_band_low", f"{kind}_band_high"]
        if "point" in last["models"][kind]:
            header.append(f"{kind}_point")
        for p in report.percentiles:
            header += [f"{kind}_alloc_{_plabel(p)}", f"{kind}_saving_{_plabel(p)}"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for h in range(report.horizon):
            row = [h, last["truth"][h], last["true_alloc"][h], last["true_saving"][h]]
            for kind in ordered:
                entry = last["models"][kind]
                row += [entry["median"][h], entry["band_low"][h], entry["band_high"][h]]
                if "point" in entry:
                    row.append(entry["point"][h])
                for p in report.percentiles:
                    row += [entry["alloc"][p][h], entry["saving"][p][h]]
            w.writerow(row)
    return path


def _write_provisioning(report: SustainabilityReport, path: Path) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "percentile", "over_percent", "under_percent"])
        for kind in MODEL_KINDS:
            if kind not in report.models or kind not in PROBABILISTIC_KINDS:
                continue
            m = report.models[kind]
            for p in report.percentiles:
                w.writerow([kind, p, m.metrics.over_percent[p], m.metrics.under_percent[p]])
    return path
