"""Command-line entry point: propagate, compare, oracle, presets."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .harness import ConfigError, MatvecLedgerError, RunConfig, RunError, run_comparison, run_propagation
from .oracle_suite import run_oracle_suite, write_report
from .presets import PRESETS, preset_config

CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _field_type(f):
    default = f.default
    if isinstance(default, bool):
        return bool
    if default is None:
        return str
    return type(default)


def _coerce(name: str, text: str):
    f = CONFIG_FIELDS.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    kind = _field_type(f)
    if kind is bool:
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{name} expects a boolean, got {text!r}")
        return low in ("true", "1", "yes")
    if text.lower() in ("none", "null") and f.default is None:
        return None
    return kind(text)


def add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set (lowest precedence)")
    p.add_argument("--config", help="JSON file of RunConfig keys (overrides the preset)")
    g = p.add_argument_group("run configuration (overrides preset and file)")
    for name, f in CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        kind = _field_type(f)
        if kind is bool:
            g.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        else:
            choices = ("original", "extended", "chebyshev") if name == "method" else None
            g.add_argument(flag, dest=name, type=kind, default=None, choices=choices, help=f"default: {f.default}")


def config_from_args(args) -> RunConfig:
    values: dict = {}
    if args.preset:
        values.update(preset_config(args.preset))
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    for name in CONFIG_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig.from_dict(values)


def _cmd_propagate(args) -> int:
    cfg = config_from_args(args)
    try:
        rec = run_propagation(cfg)
    except RunError as exc:
        print(f"run failed after {exc.record.steps_completed} steps: {exc}", file=sys.stderr)
        return 1
    except MatvecLedgerError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    final = rec.final_error
    print(
        f"{cfg.method}: {rec.steps_completed} steps, matvecs {rec.matvecs_total}, "
        f"replacements {rec.replacements}, final Err "
        + ("n/a" if final is None else f"{final:.3e}")
    )
    return 0


def _cmd_compare(args) -> int:
    cfg_a = config_from_args(args)
    overrides = {"method": "original"}
    for item in args.b_set or []:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"--b-set expects key=value, got {item!r}")
        overrides[key] = _coerce(key, text)
    cfg_b = cfg_a.replace(**overrides)
    report = run_comparison(cfg_a, cfg_b, output_dir=cfg_a.output_dir)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_oracle(args) -> int:
    reports = [run_oracle_suite(args.seed + k, args.corrupt_symmetrization) for k in range(args.seeds)]
    for rep in reports:
        for r in rep["results"]:
            mark = "PASS" if r["passed"] else "FAIL"
            print(f"seed {rep['seed']:>3}  {mark}  {r['name']:<34} {r['residual']:.3e} (tol {r['tolerance']:.1e})")
    passed = sum(rep["passed"] for rep in reports)
    print(f"pass rate {passed}/{len(reports)}")
    if args.output:
        write_report(reports[0] if len(reports) == 1 else {"reports": reports}, args.output)
    return 0 if passed == len(reports) else 1


def _cmd_presets(args) -> int:
    for name, p in PRESETS.items():
        print(f"{name:<10} {p['description']}")
        if args.verbose:
            print("           " + json.dumps(p["config"], sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varlanczos", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every error reading at each checkpoint")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="run one propagation and write its series")
    add_config_flags(p)
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("compare", help="run two methods on the same setup and compare error curves")
    add_config_flags(p)
    p.add_argument(
        "--b-set", action="append", metavar="KEY=VALUE",
        help="override for the second run (repeatable); the second run defaults to method=original",
    )
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("oracle", help="dense-matrix verification suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds to run")
    p.add_argument("--corrupt-symmetrization", action="store_true", help="negative control")
    p.add_argument("--output", help="write the JSON report here")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("presets", help="named parameter sets")
    psub = p.add_subparsers(dest="action", required=True)
    pl = psub.add_parser("list")
    pl.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
