"""Command-line front end.

Exit codes: 0 success, 1 solver error or failed verification, 2 stability
refusal in strict mode, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from pathlib import Path

import numpy as np

from . import diagnostics, weakform
from .coefficients import transport_pair_problem
from .config import RunConfig, load_config, parse_levels
from .errors import ConfigurationError, DegenParaError, SolverError, StabilityError
from .grid import Grid, sup_bound_rows
from .rng import Lcg64
from .scheme import Solution, check_stability, solve

EXIT_OK, EXIT_FAIL, EXIT_STABILITY, EXIT_CONFIG = 0, 1, 2, 3

SUP_BOUND_JS = (8, 64, 256)
SUP_BOUND_TRIALS = 10_000
Q_PROBES = 100_000


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def solution_csv(s: Solution, snapshots=()) -> str:
    g = s.grid
    rows = range(g.N + 1)
    if snapshots:
        rows = sorted({int(np.clip(round(t / g.dt), 0, g.N)) for t in snapshots})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *[fmt(x) for x in g.x]])
    for n in rows:
        w.writerow([fmt(g.t[n]), *[fmt(v) for v in s.u[n]]])
    return buf.getvalue()


def series_csv(s: Solution, rep: diagnostics.DiagnosticsReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t", "norm", "grad_norm", "dt_norm"])
    for n in range(s.grid.N + 1):
        dtn = fmt(rep.dt_norms[n]) if n < s.grid.N else ""
        w.writerow([n, fmt(s.grid.t[n]), fmt(rep.norms[n]), fmt(rep.grad_norms[n]), dtn])
    return buf.getvalue()


def report_text(cfg: RunConfig, s: Solution, rep: diagnostics.DiagnosticsReport, ends: dict) -> str:
    g, st = s.grid, s.stability
    items = [
        ("problem", s.problem.name),
        ("boundary_case", s.problem.boundary_case.value),
        ("J", g.J),
        ("N", g.N),
        ("T", g.T),
        ("lambda", g.lam),
        ("dx", g.dx),
        ("dt", g.dt),
        ("strict", cfg.strict),
        ("stability_ok", st.ok),
        ("case_ok", st.case_ok),
        ("cond_left", st.cond_left),
        ("cond_right", st.cond_right),
        ("c2", st.c2),
        ("c3", st.c3),
        ("c4", st.c4),
        ("dt_max", st.dt_max),
    ]
    items += list(rep.as_dict().items())
    for name in ("left", "right"):
        if name in ends:
            items.append((f"boundary_{name}_deviation", ends[name]))
    items.append(("warnings", len(s.warnings)))
    return "".join(f"{k} = {fmt(v)}\n" for k, v in items)


def _run(cfg: RunConfig, grid: Grid | None = None) -> Solution:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solve(cfg.problem, grid or cfg.grid, strict=cfg.strict)


def _solve_and_report(cfg: RunConfig, out: Path, write_solution: bool) -> int:
    st = check_stability(cfg.problem, cfg.grid)
    if not st.ok and cfg.strict:
        for msg in st.messages:
            print(f"stability: {msg}", file=sys.stderr)
        return EXIT_STABILITY
    s = _run(cfg)
    rep = diagnostics.energy_series(s)
    ends = diagnostics.boundary_ode_check(s)
    if write_solution:
        _write(out / "solution.csv", solution_csv(s, cfg.snapshots))
    _write(out / "report.txt", report_text(cfg, s, rep, ends))
    _write(out / "series.csv", series_csv(s, rep))
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    return _solve_and_report(cfg, out, write_solution=True)


def cmd_diagnose(cfg: RunConfig, out: Path) -> int:
    """Like ``solve`` but only the report and the per-step series are written."""
    return _solve_and_report(cfg, out, write_solution=False)


def cmd_converge(cfg: RunConfig, out: Path) -> int:
    rep = weakform.refinement_study(cfg.problem, cfg.levels, T=cfg.grid.T, lam=cfg.grid.lam, strict=cfg.strict)
    _write(out / "convergence.csv", rep.to_csv())
    return EXIT_OK


# --- verify -----------------------------------------------------------------


def _check_sup_bound_sweep(rng: Lcg64) -> tuple[bool, str]:
    failures = 0
    for J in SUP_BOUND_JS:
        v = rng.normal((SUP_BOUND_TRIALS, J + 1))
        _, _, ok = sup_bound_rows(v, 1.0 / J)
        failures += int(np.count_nonzero(~ok))
    return failures == 0, f"{failures} failures in {SUP_BOUND_TRIALS} trials at J in {SUP_BOUND_JS}"


def _check_quadratic_forms(rng: Lcg64) -> tuple[bool, str]:
    theta = rng.uniform(Q_PROBES)
    y = rng.normal((Q_PROBES, 3))
    q1, q2 = diagnostics.quadratic_form_sweep(theta, y)
    order = int(np.count_nonzero(q1 > q2 + 1e-12))
    ident = 0.5 * theta * (y[:, 0] - 2 * y[:, 1] + y[:, 2]) ** 2
    worst = float(np.max(np.abs((q2 - q1) - ident)))
    ok = order == 0 and worst <= 1e-12
    return ok, f"{order} order failures, identity error {worst:.3e} over {Q_PROBES} probes"


def _check_gronwall(cfg: RunConfig) -> tuple[bool, str]:
    f1 = cfg.problem.f
    p1 = transport_pair_problem(f1)
    p2 = transport_pair_problem(lambda x: f1(x) + 0.1 * np.sin(np.pi * np.asarray(x, dtype=float)))
    s1 = solve(p1, cfg.grid)
    s2 = solve(p2, cfg.grid)
    res = diagnostics.gronwall_check(p1, s1, s2)
    return res.holds, f"max slack {res.max_slack:.3e}"


def verify_lines(cfg: RunConfig) -> list[tuple[str, bool, str]]:
    rng = Lcg64(cfg.seed)
    p, g = cfg.problem, cfg.grid
    lines = []
    consistent = p.case_is_consistent(g.T)
    lines.append(("classification", consistent, f"boundary case {p.boundary_case.value}"))
    st = check_stability(p, g)
    lines.append(("stability", st.ok, "; ".join(st.messages) or f"dt={g.dt:g} < dt_max={st.dt_max:g}"))
    lines.append(("sup-bound-sweep", *_check_sup_bound_sweep(rng)))
    lines.append(("quadratic-form", *_check_quadratic_forms(rng)))
    try:
        lines.append(("gronwall", *_check_gronwall(cfg)))
    except DegenParaError as exc:
        lines.append(("gronwall", False, str(exc)))

    try:
        s = _run(cfg)
        s2 = _run(cfg, Grid(2 * g.J, 2 * g.N, g.T, g.lam))
    except DegenParaError as exc:
        for name in ("gradient-ratio", "sup-bound-rows", "uniform-bound", "interpolant-gap", "lemma-checks"):
            lines.append((name, False, f"no solution: {exc}"))
        return lines
    rep = diagnostics.energy_series(s)
    lines.append(("gradient-ratio", not rep.ratio_violations, f"{len(rep.ratio_violations)} violations in {g.N} steps"))
    lines.append(("sup-bound-rows", not rep.sobolev_failures, f"{len(rep.sobolev_failures)} failing rows"))
    lines.append(("uniform-bound", rep.uniform_bound_holds, f"c4p={rep.c4p:.6g} c1={rep.c1:.6g} c6={rep.c6:.6g}"))
    gr, gl, bound = weakform.interpolant_gaps(s)
    lines.append(("interpolant-gap", max(gr, gl) <= bound * (1 + 1e-12), f"gap_r={gr:.6g} gap_l={gl:.6g} bound={bound:.6g}"))
    lem = weakform.lemma_checks(s, s2)
    bad = [k for k, v in lem.decreasing().items() if not v]
    detail = f"{g.J}x{g.N} -> {2 * g.J}x{2 * g.N}"
    if bad:
        detail += f"; not decreasing: {', '.join(bad)}"
    if not (lem.coarse.gaps_ok and lem.fine.gaps_ok):
        detail += "; gap bound exceeded"
    lines.append(("lemma-checks", lem.ok, detail))
    return lines


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    lines = verify_lines(cfg)
    text = "".join(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n" for name, ok, detail in lines)
    _write(out / "verify.txt", text)
    sys.stdout.write(text)
    return EXIT_OK if all(ok for _, ok, _ in lines) else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "verify": cmd_verify, "diagnose": cmd_diagnose}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degenpara", description="Crank-Nicolson solver for degenerate parabolic equations.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="key = value config file with [section] headers")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    ap.add_argument("--seed", type=_u64, help="seed for the random probe sweeps")
    ap.add_argument("--no-strict", action="store_true", help="warn instead of refusing unstable runs")
    ap.add_argument("--levels", help="refinement levels as J0xN0,J1xN1,...")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        levels = parse_levels(args.levels, "--levels") if args.levels else None
        cfg = load_config(args.config, seed=args.seed, strict=False if args.no_strict else None, levels=levels)
        return COMMANDS[args.command](cfg, args.out)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as exc:
        print(f"stability: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        # grid and parameter validation
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
