"""Command-line runner: run one experiment, a parameter sweep, or the
verification suite.

    blowup-lab run CONFIG [--out DIR] [--quiet]
    blowup-lab sweep CONFIG [--out DIR] [--jobs N] [--quiet]
    blowup-lab verify [--out DIR] [--quiet] [--set KEY=VALUE ...]

Output root resolution: --out flag, then $BLOWUP_LAB_OUT, then the config's
out_dir, then ./runs/<config name>.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, ValidationError
from .runner import run_experiment, run_sweep
from .verify import collect_verification, format_table

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _out_root(args, config_path: Path | None, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("BLOWUP_LAB_OUT")
    if env:
        return Path(env) / default_name
    if config_path is not None:
        try:
            cfg = load_config(config_path)
            if cfg.out_dir:
                return Path(cfg.out_dir)
        except ConfigError:
            pass
    return Path("runs") / default_name


def _parse_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            out[key] = float(value) if "." in value or "e" in value.lower() \
                else int(value)
        except ValueError:
            out[key] = value
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="blowup-lab",
        description="Finite-difference blow-up experiments on a ball: "
                    "interior exponential source (Dirichlet) and boundary "
                    "flux (Neumann).")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--quiet", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run the cartesian sweep axes")
    p_sweep.add_argument("config", type=Path)
    p_sweep.add_argument("--out", type=Path, default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--quiet", action="store_true")

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--out", type=Path, default=None)
    p_verify.add_argument("--jobs", type=int, default=1)
    p_verify.add_argument("--quiet", action="store_true")
    p_verify.add_argument("--set", dest="overrides", action="append",
                          default=[], metavar="KEY=VALUE",
                          help="override a reference-config field "
                               "(stress/tamper knob)")

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            cfg = load_config(args.config)
            out = _out_root(args, args.config, args.config.stem)
            run_experiment(cfg, out, quiet=args.quiet)
            return EXIT_OK
        if args.command == "sweep":
            cfg = load_config(args.config)
            out = _out_root(args, args.config, args.config.stem + "_sweep")
            run_sweep(cfg, out, jobs=args.jobs, quiet=args.quiet)
            return EXIT_OK
        # verify
        overrides = _parse_overrides(args.overrides)
        rows, _ = collect_verification(overrides=overrides, quiet=args.quiet)
        table = format_table(rows)
        print(table)
        out = _out_root(args, None, "verify")
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_report.txt").write_text(table + "\n", encoding="utf-8")
        return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
