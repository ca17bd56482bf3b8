"""
Command-line entry point.

    gsic solve --config system.json
    gsic pc-sim --config system.json --schedule random --seed 42 --out trace.csv
    gsic figures --out figures/

Exit status: 0 success, 1 internal error, 2 infeasible, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config, parse_config_dict, parse_sweep
from .core import GroupParams, ReceiverKind, derive_params, recover_transmit_power
from .errors import (
    GsicError,
    InfeasibleSystem,
    ParseError,
    RecursionInfeasible,
    SingularSystem,
    ValidationError,
)
from .feasibility import check_feasibility, solve_powers
from .ordering import brute_force_order, order_total, sorted_order
from .power_control import Outcome, run_power_control
from .recursion import solve_powers_recursive
from .regions import ArchitectureKind, find_crossovers, sweep_grid, trace_boundary

log = logging.getLogger("gsic")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INFEASIBLE = 2
EXIT_INVALID = 3

SOLVER_AGREEMENT = 1e-8

FIGURE_XI2 = (0.0, 0.001, 0.01)
FIGURE_GAMMA = 10.0
FIGURE_PATHS = 3
FIGURE_M = 4
FIGURES = {
    "fig1_gsic_lmmse_vs_mf.csv": (ArchitectureKind.GsicLmmse, ArchitectureKind.GsicMf),
    "fig2_gsicmf_vs_allmf.csv": (ArchitectureKind.GsicMf, ArchitectureKind.AllMf),
    "fig3_gsic_vs_multicode.csv": (ArchitectureKind.GsicLmmse, ArchitectureKind.MulticodeLmmse),
}


def fmt(x) -> str:
    return repr(float(x))


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _labels(order):
    return ",".join(str(c + 1) for c in order)


def cmd_derive(cfg: RunConfig) -> int:
    buf = io.StringIO()
    buf.write(f"# receiver={cfg.receiver.value}\n")
    w = _writer(buf)
    w.writerow(["group", "nu", "epsilon", "theta", "lambda_lmmse", "lambda_mf", "gamma_big"])
    for i, g in enumerate(cfg.system.groups):
        d = derive_params(g, cfg.receiver)
        w.writerow([i + 1, fmt(d.nu), fmt(d.epsilon), fmt(d.theta), fmt(d.lambda_lmmse),
                    fmt(d.lambda_mf), fmt(d.gamma_big)])
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_feasibility(cfg: RunConfig) -> int:
    rep = check_feasibility(cfg.system, cfg.order, cfg.receiver)
    lines = [
        f"order={_labels(cfg.order)}",
        f"receiver={cfg.receiver.value}",
        "per_group_sir_ok=" + ",".join(str(f).lower() for f in rep.per_group_sir_ok),
        f"spectral_radius={fmt(rep.spectral_radius)}",
        f"feasible={str(rep.feasible).lower()}",
    ]
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_solve(cfg: RunConfig) -> int:
    system = cfg.system
    try:
        direct = solve_powers(system, cfg.order, cfg.receiver)
        recursive = solve_powers_recursive(system, cfg.order, cfg.receiver)
    except (InfeasibleSystem, SingularSystem, RecursionInfeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    rel = float(np.max(np.abs(direct.q - recursive.q) / np.abs(direct.q)))
    s2 = system.sigma2
    buf = io.StringIO()
    buf.write(f"# sigma2={fmt(s2)}\n")
    buf.write(f"# order={_labels(cfg.order)} receiver={cfg.receiver.value}\n")
    w = _writer(buf)
    w.writerow(["group", "Q", "transmit_equivalent"])
    for pos, cls in enumerate(cfg.order):
        q = direct.q[pos] / s2
        pt = recover_transmit_power(q, system.groups[cls], cfg.pathloss[cls])
        w.writerow([cls + 1, fmt(q), fmt(pt)])
    buf.write("# recursion_Q=" + ",".join(fmt(v / s2) for v in recursive.q) + "\n")
    buf.write(f"# Q_T={fmt(direct.total / s2)}\n")
    buf.write(f"# max_rel_diff={fmt(rel)}\n")
    _emit(buf.getvalue(), cfg.out)
    if not rel <= SOLVER_AGREEMENT:
        print(f"matrix and recursive solutions disagree (relative {rel:.3e})", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_order(cfg: RunConfig, mode: str) -> int:
    buf = io.StringIO()
    w = _writer(buf)
    if mode == "sorted":
        order = sorted_order(cfg.system)
        total = order_total(cfg.system, order, cfg.receiver)
        w.writerow(["order", "Q_T"])
        w.writerow([_labels(order), fmt(total)])
        _emit(buf.getvalue(), cfg.out)
        return EXIT_OK if np.isfinite(total) else EXIT_INFEASIBLE
    res = brute_force_order(cfg.system, cfg.receiver)
    buf.write(f"# best={_labels(res.best_order)} Q_T={fmt(res.best_total)}\n")
    w.writerow(["order", "Q_T"])
    for perm, total in res.all_totals.items():
        w.writerow([_labels(perm), fmt(total)])
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_pc_sim(cfg: RunConfig) -> int:
    trace = run_power_control(cfg.system, cfg.order, cfg.receiver, schedule=cfg.schedule,
                              tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed)
    n = cfg.system.num_groups
    s2 = cfg.system.sigma2
    buf = io.StringIO()
    buf.write(f"# sigma2={fmt(s2)}\n")
    buf.write(f"# order={_labels(cfg.order)} schedule={cfg.schedule.value} seed={cfg.seed}\n")
    w = _writer(buf)
    w.writerow(["iter"] + [f"Q_{i + 1}" for i in range(n)] + ["max_rel_change"])
    for row in trace.rows:
        w.writerow([row.iteration] + [fmt(v / s2) for v in row.q] + [fmt(row.max_rel_change)])
    buf.write(f"# outcome={trace.outcome.value}\n")
    _emit(buf.getvalue(), cfg.out)
    return EXIT_INFEASIBLE if trace.outcome is Outcome.Diverged else EXIT_OK


def _region_csv(samples) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["alpha1", "alpha2_max"])
    for s in samples:
        w.writerow([fmt(s.alpha1), fmt(s.alpha2_max)])
    return buf.getvalue()


def cmd_region(cfg: RunConfig) -> int:
    if cfg.system.num_groups != 2:
        raise ValidationError("region tracing needs exactly two groups", "groups")
    classes = [cfg.system.groups[c] for c in cfg.order]
    samples = trace_boundary(cfg.arch, sweep_grid(*cfg.sweep), classes, cfg.bisect_tol, cfg.m)
    header = f"# arch={cfg.arch.value} M={samples[0].m} order={_labels(cfg.order)}\n"
    _emit(header + _region_csv(samples), cfg.out)
    return EXIT_OK


def figure_classes(xi2: float) -> tuple:
    g = GroupParams(alpha=0.0, gamma=FIGURE_GAMMA, hbar2=1.0, xi2=xi2, paths=FIGURE_PATHS)
    return (g, g)


def figure_data(sweep=(0.0, 2.0, 0.01), bisect_tol: float = 1e-6, m: int = FIGURE_M) -> dict:
    """Boundary curves behind the three comparison figures, keyed by file name."""
    grid = sweep_grid(*sweep)
    cache = {}
    out = {}
    for name, archs in FIGURES.items():
        curves = []
        for xi2 in FIGURE_XI2:
            for arch in archs:
                key = (arch, xi2)
                if key not in cache:
                    cache[key] = trace_boundary(arch, grid, figure_classes(xi2), bisect_tol, m)
                curves.append((xi2, arch, cache[key]))
        out[name] = curves
    return out


def cmd_figures(out_dir, sweep, bisect_tol, m) -> int:
    out_dir = Path(out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    data = figure_data(sweep, bisect_tol, m)
    for name, curves in data.items():
        buf = io.StringIO()
        buf.write(f"# gamma={fmt(FIGURE_GAMMA)} hbar2=1.0 L={FIGURE_PATHS} M={m}\n")
        if name.startswith("fig3"):
            for xi2 in FIGURE_XI2:
                a, b = [c[2] for c in curves if c[0] == xi2]
                cross = find_crossovers([s.alpha1 for s in a], [s.alpha2_max for s in a],
                                        [s.alpha2_max for s in b])
                buf.write(f"# crossover xi2={fmt(xi2)} alpha1=" + ",".join(fmt(c) for c in cross) + "\n")
        w = _writer(buf)
        w.writerow(["xi2", "architecture", "alpha1", "alpha2_max"])
        for xi2, arch, samples in curves:
            for s in samples:
                w.writerow([fmt(xi2), arch.value, fmt(s.alpha1), fmt(s.alpha2_max)])
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
        print(out_dir / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON system description")
    common.add_argument("--order", help="detection order as 1-based labels, e.g. 2,3,1")
    common.add_argument("--receiver", choices=["lmmse", "mf"])
    common.add_argument("--arch", choices=[a.value for a in ArchitectureKind])
    common.add_argument("--M", dest="M", type=int)
    common.add_argument("--schedule", choices=["sync", "roundrobin", "random"])
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--sweep", help="START:STOP:STEP")
    common.add_argument("--out", help="output file (directory for figures)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gsic", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common], help="per-group derived parameters")
    sub.add_parser("feasibility", parents=[common], help="spectral-radius feasibility test")
    sub.add_parser("solve", parents=[common], help="optimal powers by matrix solve and recursion")
    p = sub.add_parser("order", parents=[common], help="detection order minimizing total power")
    p.add_argument("--mode", choices=["brute", "sorted"], default="brute")
    sub.add_parser("pc-sim", parents=[common], help="iterative power control trace")
    sub.add_parser("region", parents=[common], help="two-class capacity region boundary")
    sub.add_parser("figures", parents=[common], help="datasets for the three region comparisons")
    return parser


def load_config(args) -> RunConfig:
    if not args.config:
        raise ValidationError("--config is required for this command")
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {args.config}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return parse_config(text)  # raises ParseError
    if isinstance(data, dict):
        for key in ("receiver", "arch", "M", "schedule", "seed", "tol", "max_iter", "sweep", "out"):
            value = getattr(args, key)
            if value is not None:
                data[key] = value
        if args.order is not None:
            try:
                data["order"] = [int(v) for v in args.order.split(",")]
            except ValueError:
                raise ValidationError(f"bad label list {args.order!r}", "order") from None
    return parse_config_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figures":
            sweep = parse_sweep(args.sweep) if args.sweep else (0.0, 2.0, 0.01)
            return cmd_figures(args.out, sweep, 1e-6, args.M or FIGURE_M)
        cfg = load_config(args)
        if args.command == "derive":
            return cmd_derive(cfg)
        if args.command == "feasibility":
            return cmd_feasibility(cfg)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "order":
            return cmd_order(cfg, args.mode)
        if args.command == "pc-sim":
            return cmd_pc_sim(cfg)
        if args.command == "region":
            return cmd_region(cfg)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GsicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE if "infeasible" in type(exc).__name__.lower() else EXIT_INTERNAL
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
