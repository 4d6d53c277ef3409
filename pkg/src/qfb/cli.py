"""Command-line front end: curve data, sweeps and the self-check suite.

Exit codes: 0 success, 1 verification failure, 2 bad arguments, 3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import json
import math
import os
import sys
from typing import Iterable, Iterator

import numpy as np

from .channels import apply_channel, check_q, closed_form_rho_q_prime, product_kraus, rho_q
from .errors import DomainError
from .feedback import (
    AngleCombos,
    RepeatConfig,
    apply_feedback_channel,
    closed_form_repeat_concurrence,
    closed_form_repeat_state,
    optimal_scheme,
    repeat_map,
)
from .measures import (
    concurrence,
    concurrence_x_state,
    purity_closed_form_fb,
    purity_closed_form_nofb,
    subsystem_purity,
)
from .optimize import SweepConfig, sweep_canonical, sweep_remix, unit_grid
from .verify import run_verification

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

CURVE_FIELDS = ("eta", "n", "quantity", "source", "value")
SWEEP_FIELDS = ("section", "eta", "q_abs", "r_alpha", "theta_ab", "xi_v", "value", "tie_count")
CANONICAL_FIELDS = ("section", "eta", "q_abs", "beta_u", "beta_v", "xi", "gamma_u", "value", "tie_count")

# two fixed-angle cuts through the remix sweep, as (theta_ab, xi_v)
SWEEP_SLICES = {
    "slice_a": (math.pi / 2, math.pi / 3),
    "slice_b": (0.0, math.pi),
}


class UsageError(Exception):
    pass


def eta_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    """``steps`` points from ``lo`` to ``hi`` inclusive; exact tenths on [0, 1] with 11 steps."""
    if not (0.0 <= lo <= hi <= 1.0):
        raise UsageError("eta bounds must satisfy 0 <= eta-min <= eta-max <= 1")
    if steps == 1 and lo == hi:
        return np.array([lo])
    if steps < 2:
        raise UsageError("--eta-steps must be at least 2 (or 1 with eta-min == eta-max)")
    return lo + (hi - lo) * (np.arange(steps) / (steps - 1))


def resolve_workers(flag: int | None) -> int:
    if flag is not None:
        workers = flag
    else:
        env = os.environ.get("QFB_WORKERS", "").strip()
        if not env:
            return 1
        try:
            workers = int(env)
        except ValueError:
            raise UsageError(f"QFB_WORKERS must be an integer, got {env!r}") from None
    if workers < 1:
        raise UsageError("worker count must be positive")
    return workers


def _q(args) -> complex:
    try:
        return check_q(complex(args.q_re, args.q_im))
    except DomainError as exc:
        raise UsageError(str(exc)) from None


# -- record generation -----------------------------------------------------------


def curve_records(etas: Iterable[float], q: complex = 1.0) -> Iterator[dict]:
    """Purity and concurrence with and without optimal feedback after one map."""
    scheme = optimal_scheme()
    combos = AngleCombos.from_scheme(scheme)
    rho0 = rho_q(q)
    for eta in etas:
        eta = float(eta)
        k = product_kraus(eta)
        nofb = apply_channel(k, rho0)
        fb = apply_feedback_channel(k, scheme, rho0)
        rows = (
            ("purity_nofb", subsystem_purity(nofb), purity_closed_form_nofb(eta)),
            ("purity_fb", subsystem_purity(fb), purity_closed_form_fb(eta, combos)),
            ("conc_nofb", concurrence(nofb).value, concurrence_x_state(closed_form_rho_q_prime(eta, q))),
            ("conc_fb", concurrence(fb).value, abs(q) * eta),
        )
        for quantity, sim, closed in rows:
            yield _curve(eta, 1, quantity, "simulated", sim)
            yield _curve(eta, 1, quantity, "closed_form", closed)


def repeat_records(etas: Iterable[float], n_max: int, q: complex = 1.0) -> Iterator[dict]:
    """Concurrence after ``n = 1..n_max`` rounds, with and without feedback."""
    if n_max < 1:
        raise UsageError("--n-max must be at least 1")
    etas = [float(e) for e in etas]
    rho0 = rho_q(q)
    for n in range(1, n_max + 1):
        for eta in etas:
            sim_nofb = concurrence(repeat_map(rho0, eta, RepeatConfig(n))).value
            if q == 1:
                closed_nofb = closed_form_repeat_concurrence(eta, n, False)
            else:
                closed_nofb = concurrence_x_state(closed_form_repeat_state(eta, n, False, q=q))
            sim_fb = concurrence(repeat_map(rho0, eta, RepeatConfig(n, True))).value
            yield _curve(eta, n, "conc_nofb", "simulated", sim_nofb)
            yield _curve(eta, n, "conc_nofb", "closed_form", closed_nofb)
            yield _curve(eta, n, "conc_fb", "simulated", sim_fb)
            yield _curve(eta, n, "conc_fb", "closed_form", abs(q) * eta**n)


def _curve(eta, n, quantity, source, value) -> dict:
    return {"eta": float(eta), "n": int(n), "quantity": quantity, "source": source, "value": float(value)}


def sweep_records(result, q_abs: float | None = None) -> Iterator[dict]:
    """Every grid point, then one best row per outer key, then the fixed-angle slices."""
    names = result.param_names

    def row(section, key, params, value, ties=None):
        rec = {"section": section, "eta": float(key[0])}
        rec["q_abs"] = float(key[1]) if len(key) > 1 else float(q_abs)
        rec.update({name: float(p) for name, p in zip(names, params)})
        rec["value"] = float(value)
        rec["tie_count"] = ties
        return rec

    for key, params, value in zip(result.keys, result.params, result.values):
        yield row("record", key, params, value)
    for b in result.best:
        yield row("best", b.key, b.params, b.value, b.tie_count)
    if names == ("r_alpha", "theta_ab", "xi_v"):
        for section, (theta_ab, xi_v) in SWEEP_SLICES.items():
            mask = result.select(theta_ab=theta_ab, xi_v=xi_v)
            for i in np.nonzero(mask)[0]:
                yield row(section, result.keys[i], result.params[i], result.values[i])


# -- output ------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_records(records: Iterable[dict], fields: tuple[str, ...], fmt: str, stream) -> None:
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(fields)
        for rec in records:
            w.writerow([_fmt(rec[f]) for f in fields])
    else:
        # floats serialise through repr, the shortest round-trip form
        json.dump([{f: rec[f] for f in fields} for rec in records], stream, indent=1)
        stream.write("\n")


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# -- commands ----------------------------------------------------------------------


def cmd_curves(args) -> int:
    etas = eta_grid(args.eta_min, args.eta_max, args.eta_steps or 101)
    q = _q(args)
    with _open_out(args.out) as out:
        write_records(curve_records(etas, q), CURVE_FIELDS, args.format, out)
    return EXIT_OK


def cmd_repeat(args) -> int:
    etas = eta_grid(args.eta_min, args.eta_max, args.eta_steps or 101)
    q = _q(args)
    records = list(repeat_records(etas, args.n_max, q))
    with _open_out(args.out) as out:
        write_records(records, CURVE_FIELDS, args.format, out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    etas = eta_grid(args.eta_min, args.eta_max, args.eta_steps or 11)
    if args.r_steps < 1 or args.angle_steps < 2:
        raise UsageError("--r-steps must be positive and --angle-steps at least 2")
    q = _q(args)
    q_grid = tuple(unit_grid()) if args.q_grid else None
    cfg = SweepConfig(
        eta_grid=tuple(etas),
        q_grid=q_grid,
        r_alpha_grid=tuple(unit_grid(args.r_steps)) if args.r_steps > 1 else (1.0,),
        angle_grid_size=args.angle_steps,
        objective=args.objective,
        workers=resolve_workers(args.workers),
    )
    if args.mode == "canonical" and (q_grid is not None or q != 1):
        raise UsageError("the canonical sweep starts from the Bell state; drop --q-grid/--q-re/--q-im")
    if q_grid is None and q != 1:
        # only |q| matters, so a single q is a one-point |q| grid
        cfg = dataclasses.replace(cfg, q_grid=(abs(q),))
    with _open_out(args.out) as out:
        if args.mode == "canonical":
            result, fields = sweep_canonical(cfg), CANONICAL_FIELDS
        else:
            result, fields = sweep_remix(cfg), SWEEP_FIELDS
        write_records(sweep_records(result, abs(q)), fields, args.format, out)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_verification(trials=args.trials, seed=args.seed, tolerance_scale=args.tolerance_scale)
    with _open_out(args.out) as out:
        for check in report.checks:
            out.write(check.line() + "\n")
        out.write(report.summary() + "\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eta-min", type=float, default=0.0)
    common.add_argument("--eta-max", type=float, default=1.0)
    common.add_argument("--eta-steps", type=int, default=None, help="default 101 (11 for sweep)")
    common.add_argument("--n-max", type=int, default=6)
    common.add_argument("--q-re", type=float, default=1.0, help="real part of the initial coherence q")
    common.add_argument("--q-im", type=float, default=0.0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", metavar="PATH", help="output file, '-' for stdout")
    common.add_argument("--workers", type=int, default=None, help="worker processes (env QFB_WORKERS)")

    parser = argparse.ArgumentParser(
        prog="qfb", description="Feedback protection of two-qubit entanglement under amplitude damping."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("curves", parents=[common], help="purity and concurrence versus eta")
    p.set_defaults(func=cmd_curves)
    p = sub.add_parser("repeat", parents=[common], help="concurrence after repeated maps")
    p.set_defaults(func=cmd_repeat)
    p = sub.add_parser("sweep", parents=[common], help="grid search over Kraus remixing or feedback angles")
    p.add_argument("--mode", choices=("remix", "canonical"), default="remix")
    p.add_argument("--q-grid", action="store_true", help="also scan |q| over 0, 0.1, ..., 1")
    p.add_argument("--r-steps", type=int, default=11)
    p.add_argument("--angle-steps", type=int, default=61)
    p.add_argument("--objective", choices=("concurrence", "purity"), default="concurrence")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"qfb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qfb: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
