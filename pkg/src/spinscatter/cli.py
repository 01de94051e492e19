"""Command line front end.

Exit codes: 0 when every check passes, 1 for configuration errors, 2 for a
failed numerical check (the report names it) or a numerical breakdown.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .entanglement import NoSteadyStateError, TraceDeficitError
from .scattering import ScatteringSolverError
from .scenarios import PRESETS, SWEEP_AXES, ConfigError, ScenarioConfig, preset, run_preset, sweep, write_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
NUMERICAL_ERRORS = (ScatteringSolverError, NoSteadyStateError, TraceDeficitError, FloatingPointError,
                    RuntimeError, ArithmeticError, MemoryError)


def _overrides(args) -> dict:
    return {"engine": args.engine, "mode": args.mode, "quadrature_nodes": args.quadrature_nodes}


def _load_target(target: str) -> tuple[str, object]:
    """``preset`` or ``preset:member`` or a config path."""
    name, _, member = target.partition(":")
    if name in PRESETS:
        return "preset", (name, member or None)
    path = Path(target)
    if path.exists() or path.suffix:
        return "config", ScenarioConfig.from_file(path)
    raise ConfigError("target", f"{target!r} is neither a preset ({', '.join(PRESETS)}) nor a config file")


def _print_checks(checks, out) -> None:
    for c in checks:
        print("  " + c.line(), file=out)


def cmd_list(args, out) -> int:
    for name, pr in PRESETS.items():
        print(f"{name:7s} {pr.description}", file=out)
        print(f"        members: {', '.join(k for k, _ in pr.members)}", file=out)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    cfg = ScenarioConfig.from_file(args.config)
    print(f"{args.config}: ok", file=out)
    print(cfg.to_text(), end="", file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    kind, what = _load_target(args.target)
    ov = _overrides(args)
    if kind == "preset":
        name, member = what
        res = run_preset(name, args.out_dir, members=[member] if member else None, workers=args.workers, **ov)
        for k, r in res.members.items():
            print(f"{name}/{k}: steady E_N = {r.curve.steady_value():.6g}", file=out)
            _print_checks(r.checks, out)
        print(f"{name}: preset checks", file=out)
        _print_checks(res.checks, out)
        ok = res.passed
        where = Path(args.out_dir) / name
    else:
        from .scenarios import run_scenario
        cfg = what.with_overrides(**ov)
        r = run_scenario(cfg, keep_field=True)
        write_scenario(r, Path(args.out_dir) / cfg.name)
        print(f"{cfg.name}: steady E_N = {r.curve.steady_value():.6g}", file=out)
        _print_checks(r.checks, out)
        ok = r.passed
        where = Path(args.out_dir) / cfg.name
    print(f"outputs in {where}", file=out)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_sweep(args, out) -> int:
    kind, what = _load_target(args.template)
    if kind == "preset":
        name, member = what
        members = dict(preset(name).members)
        if member and member not in members:
            raise ConfigError("template", f"preset {name} has no member {member!r}")
        cfg = members[member] if member else next(iter(members.values()))
        cfg = cfg.with_overrides(name=f"{name}-{member or next(iter(members))}")
    else:
        cfg = what
    if cfg.kind != "scattering":
        raise ConfigError("template", "only scattering scenarios can be swept")
    cfg = cfg.with_overrides(**_overrides(args))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if args.axis not in ("spin", "model"):
        try:
            values = [float(v) for v in values]
        except ValueError as exc:
            raise ConfigError("values", str(exc)) from None
    res = sweep(cfg, args.axis, values, args.out_dir, workers=args.workers, collapse_limit=args.collapse_limit)
    _print_checks(res.checks, out)
    print(f"outputs in {Path(args.out_dir) / f'{cfg.name}-sweep-{args.axis}'}", file=out)
    return EXIT_OK if res.passed else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinscatter", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def engine_flags(p):
        p.add_argument("--engine", choices=("spectral", "lattice", "both"), default=None)
        p.add_argument("--mode", choices=("quasi-mono", "exact"), default=None)
        p.add_argument("--quadrature-nodes", type=int, default=None)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("run", help="run a preset (optionally preset:member) or a config file")
    p.add_argument("target")
    engine_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter of a template scenario")
    p.add_argument("template", help="config file, preset or preset:member")
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma separated values")
    p.add_argument("--collapse-limit", type=float, default=0.02)
    engine_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list-presets", help="list the built-in presets")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("validate-config", help="parse and validate a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error in {exc.field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
