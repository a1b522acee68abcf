"""Command-line front end: dataset synthesis/ingestion, experiments,
calibration, and report emission.

Exit codes: 0 success, 1 usage error (bad flag, unknown subcommand or
config key), 2 data error (malformed input files, ineligible users).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import dataio
from .calibrate import SCHEDULES, run_calibration
from .config import PipelineConfig
from .errors import DataError, UsageError
from .evaluation import CLASS_NAMES
from .experiments import EXPERIMENT_KINDS, run_experiment
from .reporting import (
    FORMATS,
    emit_report,
    load_result_json,
    result_from_dict,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config file (.toml/.json/.yaml)")
    common.add_argument("--seed", type=int, help="override cv.seed")
    common.add_argument("--out", help="override io.out_dir")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (results are thread-count independent)")

    data_args = argparse.ArgumentParser(add_help=False)
    data_args.add_argument("--tracking", help="tracking CSV path")
    data_args.add_argument("--reports", help="FMS reports CSV path")
    data_args.add_argument("--mapping", help="column-mapping adapter file")

    parser = _Parser(prog="csdetect", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic dataset")
    p.add_argument("--users", type=int, default=4)
    p.add_argument("--scenarios", type=int, default=2)
    p.add_argument("--reports", type=int, default=14, dest="n_reports")
    p.add_argument("--interval", type=float, default=30.0)
    p.add_argument("--frame-rate", type=float, default=20.0)
    p.add_argument("--class-separation", type=float, default=1.0)
    p.add_argument("--user-shift", type=float, default=0.0)
    p.add_argument("--segment-shift", type=float, default=0.0)
    p.add_argument("--noise-sd", type=float, default=1.0)

    sub.add_parser("ingest", parents=[common, data_args],
                   help="parse, validate, and re-emit canonical CSV files")
    sub.add_parser("validate", parents=[common, data_args],
                   help="print per-session statistics and warnings")

    p = sub.add_parser("run", parents=[common, data_args],
                       help="run an experiment and emit reports")
    p.add_argument("experiment", choices=EXPERIMENT_KINDS)
    p.add_argument("--formats", default="json,csv,md",
                   help=f"comma-separated subset of {FORMATS}")

    p = sub.add_parser("calibrate", parents=[common, data_args],
                       help="pretrain-then-calibrate workflow for one user")
    p.add_argument("--user", required=True)
    p.add_argument("--schedule", choices=SCHEDULES, default="per-segment")
    p.add_argument("--fold", type=int, default=0)

    p = sub.add_parser("report", parents=[common],
                       help="re-emit reports from a stored JSON result")
    p.add_argument("--input", required=True, help="result JSON path")
    p.add_argument("--formats", default="csv,md")

    return parser


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config.set("cv.seed", args.seed)
    if args.out:
        config.set("io.out_dir", args.out)
    for key in ("tracking", "reports", "mapping"):
        value = getattr(args, key, None)
        if value:
            config.set(f"io.{key}", value)
    return config


def _load_dataset(config: PipelineConfig) -> dataio.Dataset:
    tracking = config.get("io.tracking")
    reports = config.get("io.reports")
    if not tracking or not reports:
        raise UsageError(
            "dataset paths missing: pass --tracking/--reports or set io.* in the config"
        )
    mapping = config.get("io.mapping") or None
    return dataio.load_dataset(tracking, reports, mapping)


def _cmd_synth(args) -> int:
    config = _load_config(args)
    spec = dataio.SynthSpec(
        n_users=args.users,
        n_scenarios=args.scenarios,
        reports_per_session=args.n_reports,
        report_interval=args.interval,
        frame_rate=args.frame_rate,
        class_separation=args.class_separation,
        user_shift=args.user_shift,
        segment_shift=args.segment_shift,
        noise_sd=args.noise_sd,
        seed=args.seed if args.seed is not None else 0,
    )
    dataset = dataio.generate_synthetic(spec)
    out = Path(config.get("io.out_dir"))
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_tracking_csv(dataset, str(out / "tracking.csv"))
    dataio.write_reports_csv(dataset, str(out / "reports.csv"))
    print(f"wrote {out / 'tracking.csv'} ({dataset.n_frames()} frames)")
    print(f"wrote {out / 'reports.csv'} ({dataset.n_reports()} reports)")
    return 0


def _cmd_ingest(args) -> int:
    config = _load_config(args)
    dataset = _load_dataset(config)
    report = dataio.validate_dataset(dataset)
    out = Path(config.get("io.out_dir"))
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_tracking_csv(dataset, str(out / "tracking.csv"))
    dataio.write_reports_csv(dataset, str(out / "reports.csv"))
    (out / "validation.txt").write_text(report.summary() + "\n", encoding="utf-8")
    print(report.summary())
    print(f"wrote canonical files to {out}")
    return 0


def _cmd_validate(args) -> int:
    config = _load_config(args)
    dataset = _load_dataset(config)
    print(dataio.validate_dataset(dataset).summary())
    return 0


def _cmd_run(args) -> int:
    config = _load_config(args)
    dataset = _load_dataset(config)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    result = run_experiment(args.experiment, dataset, config, threads=args.threads)
    written = emit_report(
        result, formats, config.get("io.out_dir"), config.config_hash()
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_calibrate(args) -> int:
    config = _load_config(args)
    dataset = _load_dataset(config)
    session = run_calibration(
        dataset, args.user, config, schedule=args.schedule,
        fold_index=args.fold, threads=args.threads,
    )
    out = Path(config.get("io.out_dir"))
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"calibrate-{args.user}-{config.config_hash()}.csv"
    lines = [
        "step,added_segments,n_train,train_time_s,accuracy,macro_f1,"
        + ",".join(f"f1_{c}" for c in CLASS_NAMES)
    ]
    for s in session.steps:
        lines.append(
            f"{s.step},{'+'.join(map(str, s.added_segments))},{s.n_train},"
            f"{s.train_time_s:.4f},{s.metrics.accuracy:.6f},"
            f"{s.metrics.macro_f1:.6f},"
            + ",".join(f"{v:.6f}" for v in s.metrics.f1)
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(session.steps)} steps)")
    return 0


def _cmd_report(args) -> int:
    config = _load_config(args)
    result = result_from_dict(load_result_json(args.input))
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    written = emit_report(
        result, formats, config.get("io.out_dir"), config.config_hash()
    )
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "validate": _cmd_validate,
    "run": _cmd_run,
    "calibrate": _cmd_calibrate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
