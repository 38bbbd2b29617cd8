"""Command line entry point: ``psfwsn run <config> [--out DIR] [--seed U64] [--jobs N] [--methods LIST]``.

On failure a single JSON error record is printed to stderr (and written to
``<out>/error.json`` when the directory is usable) and the exit code is
nonzero: 2 for config problems, 3 for I/O problems, 1 otherwise.
"""

import argparse
import json
import logging
import sys
import time
import traceback
from pathlib import Path

from psfwsn.harness import ConfigError, config_hash, emit_plot_data, run_experiment, validate_config

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="psfwsn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, default=Path("out"))
    r.add_argument("--seed", type=_u64, default=None, help="overrides the config seed")
    r.add_argument("--jobs", type=_positive, default=1)
    r.add_argument("--methods", default=None, help="comma-separated method list")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def _error(out_dir, kind, exc, code):
    rec = {"status": "error", "error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if code == EXIT_RUNTIME:
        rec["traceback"] = traceback.format_exc()
    print(json.dumps(rec), file=sys.stderr)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(json.dumps(rec, indent=2))
    except OSError:
        pass
    return code


def run(args):
    try:
        cfg = json.loads(args.config.read_text())
    except OSError as exc:
        return _error(args.out, "io", exc, EXIT_IO)
    except json.JSONDecodeError as exc:
        return _error(args.out, "config", exc, EXIT_CONFIG)
    if not isinstance(cfg, dict):
        return _error(args.out, "config", ConfigError("config must be a JSON object"), EXIT_CONFIG)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.methods:
        cfg["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        cfg = validate_config(cfg)
    except ConfigError as exc:
        return _error(args.out, "config", exc, EXIT_CONFIG)
    t0 = time.perf_counter()
    try:
        records = run_experiment(cfg, jobs=args.jobs)
    except ConfigError as exc:
        return _error(args.out, "config", exc, EXIT_CONFIG)
    except Exception as exc:  # surfaced as a record, not a bare traceback
        return _error(args.out, "runtime", exc, EXIT_RUNTIME)
    try:
        csv_path, json_path = emit_plot_data(records, args.out / f"{args.config.stem}.csv", config=cfg)
    except OSError as exc:
        return _error(args.out, "io", exc, EXIT_IO)
    print(json.dumps({"status": "ok", "csv": str(csv_path), "sidecar": str(json_path),
                      "records": len(records), "config_hash": config_hash(cfg),
                      "seconds": round(time.perf_counter() - t0, 3)}))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return run(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
