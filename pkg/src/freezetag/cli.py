"""Command line entry point: ``freezetag <command> [flags]``.

Exit codes: 0 success, 2 invalid input, 3 a proven bound was exceeded.
Every JSON document written carries the effective configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3

log = logging.getLogger("freezetag")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt():
    return argparse.ArgumentDefaultsHelpFormatter


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freezetag", description="Freeze-tag wake-up bounds, sweeps and schedules.", formatter_class=_fmt())
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write random instances as JSON lines", formatter_class=_fmt())
    g.add_argument("--dim", type=int, choices=(2, 3), default=2)
    g.add_argument("--norm", choices=("l1", "l2"), default="l2")
    g.add_argument("--n", type=_positive_int, required=True, help="asleep robots per instance")
    g.add_argument("--count", type=_positive_int, default=1, help="number of instances")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", help="output file (default: stdout)")

    e = sub.add_parser("eval2d", help="evaluate every planar strategy on one scenario", formatter_class=_fmt())
    e.add_argument("--r1", type=float, required=True)
    e.add_argument("--r2", type=float, required=True)
    e.add_argument("--r3", type=float, required=True)
    e.add_argument("--mu12", type=float, required=True)
    e.add_argument("--mu13", type=float, required=True)
    e.add_argument("--case", choices=("sum", "diff"), default="sum", help="p3 below (sum) or above (diff) the x-axis")
    e.add_argument("--beta-step", type=_positive_float, default=0.05)
    e.add_argument("--x-tol", type=_positive_float, default=1e-9)
    e.add_argument("--out", help="output file (default: stdout)")

    c = sub.add_parser("certify2d", help="grid sweep of the planar strategy portfolio", formatter_class=_fmt())
    c.add_argument("--radial-steps", type=_positive_int, default=40, help="radial samples per unit radius")
    c.add_argument("--angle-step", type=_positive_float, default=0.05, help="angular grid step in radians")
    c.add_argument("--beta-step", type=_positive_float, default=0.05, help="step of the early-turn angle search")
    c.add_argument("--x-tol", type=_positive_float, default=1e-9, help="equalizer tolerance")
    c.add_argument("--r2-cutoff", type=_positive_float, default=0.87, help="cells with r2 above this are covered by two crowns")
    c.add_argument("--workers", type=_positive_int, default=None, help="worker processes (default: $FTP_WORKERS or 1)")
    c.add_argument("--checkpoint", default=None, help="JSON-lines file for resumable runs")
    c.add_argument("--out", default=None, help="base path for <out>.json and <out>.csv")
    c.add_argument("--top-k", type=_positive_int, default=10, help="rows kept in the CSV report")

    s = sub.add_parser("sim3d", help="run the 3D partition schedule", formatter_class=_fmt())
    s.add_argument("--norm", choices=("l1", "l2"), required=True)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="infile", help="JSON-lines instance file")
    src.add_argument("--random", type=_positive_int, metavar="N", help="simulate one random instance of N robots")
    s.add_argument("--seed", type=int, default=None, help="required with --random")
    s.add_argument("--policy", choices=("index", "greedy"), default="index", help="lower-half matching")
    s.add_argument("--tie-break", choices=("coordinates", "index"), default="coordinates")
    s.add_argument("--out", help="report file (default: stdout)")

    o = sub.add_parser("oracle", help="optimal direct-move schedule of a small instance", formatter_class=_fmt())
    o.add_argument("--in", dest="infile", required=True, help="JSON-lines instance file (first record)")
    o.add_argument("--max-n", type=_positive_int, default=9)
    o.add_argument("--out", help="output file (default: stdout)")

    from .verify import SUITES

    v = sub.add_parser("verify", help="run seeded invariant suites", formatter_class=_fmt())
    v.add_argument("suite", choices=SUITES + ("all",))

    sub.add_parser("constants", help="print the numerical constants", formatter_class=_fmt())
    return p


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _emit(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    from .geometry import generate_instance, instance_to_line

    lines = [instance_to_line(generate_instance(args.dim, args.norm, args.n, args.seed + k)) for k in range(args.count)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval2d(args) -> int:
    from .strategies import Scenario2D, all_strategies, best_bound

    s = Scenario2D(args.r1, args.r2, args.r3, args.mu12, args.mu13, args.case)
    evals = all_strategies(s, args.beta_step, args.x_tol)
    best = best_bound(s, args.beta_step, args.x_tol)
    doc = {
        "config": _config(args),
        "mu23": s.mu23,
        "strategies": {ev.name: {"bound": ev.bound if ev.feasible else None, "x_star": ev.x_star, "note": ev.orientation_note} for ev in evals},
        "best": {"strategy": best.name, "bound": best.bound},
    }
    _emit(doc, args.out)
    return EXIT_OK


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("FTP_WORKERS")
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise ValueError(f"FTP_WORKERS must be a positive integer, got {env!r}") from None
    return 1


def cmd_certify2d(args) -> int:
    from .certify import PRIOR_BOUND, GridSpec, report, summary, sweep

    g = GridSpec(args.radial_steps, args.angle_step, args.beta_step, args.x_tol, args.r2_cutoff)
    workers = _workers(args)

    def progress(done, total):
        log.info("slab %d/%d", done, total)

    c = sweep(g, parallelism=workers, checkpoint=args.checkpoint, top_k=args.top_k, progress=progress)
    doc = summary(c)
    doc["config"] = {**_config(args), "workers": workers}
    doc["improves_prior"] = c.certified < PRIOR_BOUND
    if args.out:
        json_path, _ = report(c, args.out, args.top_k)
        full = json.loads(json_path.read_text(encoding="utf-8"))
        full["config"] = doc["config"]
        full["improves_prior"] = doc["improves_prior"]
        json_path.write_text(json.dumps(full, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(doc, None)
    return EXIT_OK


def cmd_sim3d(args) -> int:
    from .freeze3d import SimConfig, report, simulate
    from .geometry import InputError, generate_instance, read_instances

    if args.random is not None:
        if args.seed is None:
            raise InputError("--seed is required with --random")
        instances = [generate_instance(3, args.norm, args.random, args.seed)]
    else:
        instances = list(read_instances(args.infile))
        if not instances:
            raise InputError(f"{args.infile} contains no instance")
    cfg = SimConfig(args.norm, args.policy, args.tie_break)
    reports = []
    ok = True
    for inst in instances:
        if inst.norm.value != args.norm:
            raise InputError(f"instance norm {inst.norm.value} does not match --norm {args.norm}")
        res = simulate(inst, cfg)
        ok &= res.ok
        reports.append(report(res))
    doc = {"config": _config(args), "instances": reports, "ok": ok}
    _emit(doc, args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_oracle(args) -> int:
    from .geometry import read_instance, validate_tree
    from .oracle import lower_bound, optimal_makespan

    inst = read_instance(args.infile)
    value, tree = optimal_makespan(inst, args.max_n)
    check = validate_tree(inst, tree)
    doc = {
        "config": _config(args),
        "makespan": value,
        "lower_bound": lower_bound(inst),
        "validated_makespan": check,
        "schedule_class": "direct moves between robot positions",
        "tree": tree.to_json(),
    }
    _emit(doc, args.out)
    return EXIT_OK if abs(check - value) <= 1e-9 else EXIT_INVARIANT


def cmd_verify(args) -> int:
    from .verify import run

    checks = run(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def constants() -> dict:
    from .certify import GridSpec, epsilon_total
    from .crowns import GoldenConstants
    from .freeze3d import L1_UPPER_SERIES, L2_PAIR_BOUND, L2_TAIL_BOUND, L2_TOTAL

    return {
        **asdict(GoldenConstants()),
        "four_sin_3pi_8": L2_PAIR_BOUND,
        "two_sqrt2_plus_sqrt5": L2_TAIL_BOUND,
        "l2_total": L2_TOTAL,
        "l1_upper_series": L1_UPPER_SERIES,
        "epsilon_fine_grid": epsilon_total(GridSpec.fine()),
        "epsilon_desk_grid": epsilon_total(GridSpec()),
    }


def cmd_constants(args) -> int:
    _emit({"config": _config(args), "constants": constants()}, None)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "eval2d": cmd_eval2d,
    "certify2d": cmd_certify2d,
    "sim3d": cmd_sim3d,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "constants": cmd_constants,
}


def run(argv=None) -> int:
    from .freeze3d import InvariantViolation

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
