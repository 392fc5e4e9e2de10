"""``hhtdrift`` command line: generate | run | evaluate.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

The config file is YAML::

    window: 100
    seeds: 10                 # count, or an explicit list
    streams:
      - {name: mg, kind: moving_gaussians, length: 5000, jump: 4.0}
      - {name: real, path: data/electricity.csv}
    detectors:
      - HHT-CU
      - {name: HHT-AG, params: {theta1: 0.001}}
    range_grid: [50, 100, 250, 500]   # optional
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import yaml

from .evaluation import DetectionReport
from .harness import ExperimentConfig, aggregate, materialize_stream, run_matrix
from .streamgen import StreamSpec, write_stream

logger = logging.getLogger("hhtdrift")

USAGE, RUNTIME = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def load_config(path, seed_count: int | None = None) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must be a mapping")
    try:
        return ExperimentConfig.from_dict(raw, seed_count=seed_count)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None


def _out_dir(args, config: ExperimentConfig) -> Path:
    out = args.out or config.output
    if out is None:
        raise UsageError("no output directory: pass --out or set 'output' in the config")
    return Path(out)


def cmd_generate(args) -> int:
    config = load_config(args.config, args.seed_count)
    out = _out_dir(args, config)
    count = 0
    for entry in config.streams:
        if entry.spec is None:
            logger.info("stream %s is a CSV file; nothing to generate", entry.name)
            continue
        for seed in config.seeds:
            stream = materialize_stream(entry, seed)
            path = out / "streams" / f"{entry.name}__seed{seed:04d}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            spec = stream.meta.get("spec")
            write_stream(stream, path, StreamSpec.from_dict(spec) if spec else None)
            count += 1
    print(f"wrote {count} stream(s) to {out / 'streams'}")
    return 0


def cmd_run(args) -> int:
    config = load_config(args.config, args.seed_count)
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers if args.workers is not None else config.workers
    reports = run_matrix(config, str(out), workers=workers)
    with (out / "reports.ndjson").open("w") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
    write_aggregate(aggregate(reports), out / "aggregate.csv")
    print(f"completed {len(reports)} run(s); results in {out}")
    return 0


def load_reports(run_dir) -> list[DetectionReport]:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    files = sorted((run_dir / "runs").glob("*.report.json"))
    if not files:
        raise FileNotFoundError(f"no run reports under {run_dir / 'runs'}")
    return [DetectionReport.from_dict(json.loads(f.read_text())) for f in files]


def write_aggregate(rows: list[dict], path) -> None:
    if not rows:
        return
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})


def cmd_evaluate(args) -> int:
    reports = load_reports(args.run_dir)
    rows = aggregate(reports)
    target = Path(args.out) if args.out else Path(args.run_dir)
    target.mkdir(parents=True, exist_ok=True)
    write_aggregate(rows, target / "aggregate.csv")
    cols = ["stream", "detector", "runs", "nauc_precision", "nauc_recall", "label_fraction", "accuracy"]
    print("  ".join(f"{c:>14}" for c in cols))
    for row in rows:
        print("  ".join(f"{row[c]:>14.4f}" if isinstance(row[c], float) else f"{row[c]!s:>14}"
                        for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hhtdrift", description="Streaming concept-drift detection experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_config=True):
        if need_config:
            sp.add_argument("--config", required=True, help="YAML experiment config")
            sp.add_argument("--seed-count", type=int, default=None,
                            help="override the config's seeds with range(n)")
        sp.add_argument("--out", default=None, help="output directory")

    g = sub.add_parser("generate", help="write synthetic streams and their manifests")
    common(g)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run every stream x detector x seed combination")
    common(r)
    r.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("evaluate", help="aggregate the reports of a run directory")
    e.add_argument("run_dir", help="directory written by 'run'")
    common(e, need_config=False)
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed_count", None) is not None and args.seed_count < 1:
        parser.error("--seed-count must be >= 1")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hhtdrift: error: {exc}", file=sys.stderr)
        return USAGE
    except Exception as exc:  # noqa: BLE001 - any failed run is a runtime failure
        logger.debug("run failed", exc_info=True)
        print(f"hhtdrift: runtime failure: {exc}", file=sys.stderr)
        return RUNTIME


if __name__ == "__main__":
    sys.exit(main())
