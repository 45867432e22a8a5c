"""Command-line front door: generate traces, run the pipeline, inspect reports.

Override precedence: CLI flag beats config-file value beats built-in default;
the PRB_ORACLE_OUT environment variable is the output-directory fallback when
neither flag nor file names one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .rapp import ExperimentConfig, PipelineError, emit_report, run_pipeline
from .traces import TraceError, generate_synthetic, save_csv

DEFAULT_CONFIG_NAME = "default.json"


def default_config_path() -> Path:
    """The bundled benchmark configuration shipped with the package."""
    return Path(__file__).parent / DEFAULT_CONFIG_NAME


def write_default_config(path: str | Path) -> Path:
    """Copy the bundled default configuration to `path`."""
    path = Path(path)
    path.write_text(default_config_path().read_text())
    return path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prb-oracle",
        description="Probabilistic PRB-load forecasting and power-saving simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-trace", help="write a synthetic trace CSV")
    gen.add_argument("--config", help="experiment config JSON (its trace block is used)")
    gen.add_argument("--seed", type=int, help="override the trace seed")
    gen.add_argument("--out", help="output CSV path (default trace.csv)")

    run = sub.add_parser("run", help="run the pipeline and emit the report files")
    run.add_argument("--config", help=f"experiment config JSON (default: bundled {DEFAULT_CONFIG_NAME})")
    run.add_argument("--seed", type=int, help="override the global seed")
    run.add_argument("--out", help="output directory")
    run.add_argument("--models", help="comma-separated subset of sff,deepar,transformer,lstm")
    run.add_argument("--percentiles", help="comma-separated percentile levels in (0,1)")

    ins = sub.add_parser("inspect", help="summarize an existing report.json")
    ins.add_argument("report", help="path to report.json (or its directory)")
    return parser


def _load_raw_config(path: str | None) -> dict:
    config_path = Path(path) if path else default_config_path()
    if not config_path.exists():
        raise PipelineError(f"config file not found: {config_path}")
    try:
        return json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise PipelineError(f"config {config_path} is not valid JSON: {exc}") from None


def _resolve_run_config(args) -> ExperimentConfig:
    doc = _load_raw_config(args.config)
    config = ExperimentConfig.from_dict(doc)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.models is not None:
        wanted = [m.strip() for m in args.models.split(",") if m.strip()]
        missing = [m for m in wanted if m not in config.models]
        if missing:
            raise PipelineError(f"models not in config: {missing}")
        config = replace(config, models={k: config.models[k] for k in wanted})
    if args.percentiles is not None:
        try:
            levels = tuple(float(p) for p in args.percentiles.split(","))
        except ValueError:
            raise PipelineError(f"bad percentile list {args.percentiles!r}") from None
        config = replace(config, percentiles=levels)
    out = args.out or doc.get("output_dir") or os.environ.get("PRB_ORACLE_OUT") or "out"
    return replace(config, output_dir=out)


def _cmd_gen_trace(args) -> int:
    doc = _load_raw_config(args.config)
    config = ExperimentConfig.from_dict(doc)
    if isinstance(config.trace, str):
        raise PipelineError("gen-trace needs a synthetic trace block, config points at a CSV")
    trace_cfg = config.trace
    if args.seed is not None:
        trace_cfg = replace(trace_cfg, seed=args.seed)
    series = generate_synthetic(trace_cfg, config.max_prb)
    out = Path(args.out or "trace.csv")
    save_csv(series, out)
    print(f"wrote {len(series)} hours to {out}")
    return 0


def _cmd_run(args) -> int:
    config = _resolve_run_config(args)
    report = run_pipeline(config)
    written = emit_report(report, config.output_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_inspect(args) -> int:
    path = Path(args.report)
    if path.is_dir():
        path = path / "report.json"
    if not path.exists():
        raise PipelineError(f"report not found: {path}")
    doc = json.loads(path.read_text())
    percentiles = doc["percentiles"]
    labels = [f"p{100 * p:g}" for p in percentiles]
    name_w, stat_w = 12, 16
    print(f"{'model':<{name_w}} {'statistic':<{stat_w}} " + " ".join(f"{l:>8}" for l in labels))
    base = doc["baselines"]
    print(f"{'true_data':<{name_w}} {'saving%':<{stat_w}} "
          f"{base['true_data']['power_saving_percent']:>8.2f}  (all percentiles)")
    if base.get("lstm"):
        for stat, label in (("power_saving_percent", "saving%"),
                            ("over_percent", "over%"), ("under_percent", "under%")):
            print(f"{'lstm':<{name_w}} {label:<{stat_w}} {base['lstm'][stat]:>8.2f}")
    for kind, model in doc["models"].items():
        rows = [
            ("saving%", model["power_saving_percent"]),
            ("over%", model["metrics"]["over_percent"]),
            ("under%", model["metrics"]["under_percent"]),
        ]
        for label, values in rows:
            cells = " ".join(f"{values[str(p)]:>8.2f}" for p in percentiles)
            print(f"{kind:<{name_w}} {label:<{stat_w}} {cells}")
    return 0


def dispatch(argv: list[str]) -> int:
    """Parse and execute; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own diagnostics
        return int(exc.code or 0)
    handlers = {"gen-trace": _cmd_gen_trace, "run": _cmd_run, "inspect": _cmd_inspect}
    try:
        return handlers[args.command](args)
    except (PipelineError, TraceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
