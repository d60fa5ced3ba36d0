"""Piecewise-constant and bilinear extensions of a discrete solution, and weak-form checks.

A :class:`StepFunctionView` turns nodal data into a function on the whole
space-time rectangle.  ``r``-type views take the value at the right node of
each space cell ``((j-1)dx, j dx]``, ``l``-type views the left node of
``[j dx, (j+1)dx)``.  Time cells are ``(n dt, (n+1) dt]`` and the row
``t = 0`` carries the initial data.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import beta as beta_fn

from .errors import ConfigurationError, DomainError
from .grid import Grid
from .scheme import Solution, solve

VIEW_KINDS = ("r", "l", "r_prime", "l_prime", "r_t", "l_t", "m", "m1", "m2", "q1", "q2")
_SNAP = 1e-9
# quadrature sums of an exactly cancelling integrand land here, not at 0
ROUNDOFF_FLOOR = 1e-14


def _cell_coords(x, t, g: Grid):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any((t < 0) | (t > g.T)):
        raise DomainError("point outside [0, 1] x [0, T]")
    sx = x / g.dx
    st = t / g.dt
    # snap values that sit on a grid line up to rounding
    rx = np.round(sx)
    sx = np.where(np.abs(sx - rx) < _SNAP, rx, sx)
    rt = np.round(st)
    st = np.where(np.abs(st - rt) < _SNAP, rt, st)
    return sx, st


@dataclass(frozen=True)
class StepFunctionView:
    """Piecewise-constant extension of one discrete quantity of ``solution``.

    ``V`` below is ``U^{n+1} + U^n``; the ``m``/``q`` kinds use ``V/2``.
    """

    kind: str
    solution: Solution

    def __post_init__(self):
        if self.kind not in VIEW_KINDS:
            raise ValueError(f"unknown view kind {self.kind!r}")

    def __call__(self, x, t):
        s = self.solution
        g = s.grid
        u = s.u
        J, N, dx, dt = g.J, g.N, g.dx, g.dt
        sx, st = _cell_coords(x, t, g)
        sx, st = np.broadcast_arrays(sx, st)
        jr = np.ceil(sx).astype(int)  # right node of ((j-1)dx, j dx]
        jl = np.minimum(np.floor(sx).astype(int), J)  # left node of [j dx, (j+1)dx)
        row = np.ceil(st).astype(int)  # U^{n+1} on (n dt, (n+1) dt], U^0 at t=0
        lvl = np.clip(row - 1, 0, N - 1)  # step index n of the cell, 0 at t=0
        k = self.kind
        if k == "r":
            out = u[row, jr]
        elif k == "l":
            out = u[row, jl]
        elif k in ("r_prime", "l_prime"):
            # forward quotient spanning the cell; r-type cell (j dx, (j+1) dx] holds D+U_j
            j = np.clip(jr - 1 if k == "r_prime" else jl, 0, J - 1)
            out = (u[row, j + 1] - u[row, j]) / dx
        elif k in ("r_t", "l_t"):
            j = jr if k == "r_t" else jl
            out = (u[lvl + 1, j] - u[lvl, j]) / dt
        else:

            def vh(j):
                return 0.5 * (u[lvl + 1, j] + u[lvl, j])

            if k == "m":
                out = np.where(st == 0, u[0, jr], vh(jr))
            elif k == "m1":
                j = np.clip(jr, 1, J - 1)
                out = (vh(j + 1) - vh(j - 1)) / (2 * dx)
            elif k == "m2":
                j = np.clip(jr - 1, 0, J - 1)
                out = (vh(j + 1) - vh(j)) / dx
            elif k == "q1":
                j = np.clip(jr - 1, 0, J - 2)
                out = (-3 * vh(j) + 4 * vh(j + 1) - vh(j + 2)) / (2 * dx)
            else:  # q2
                j = np.clip(jr, 2, J)
                out = (3 * vh(j) - 4 * vh(j - 1) + vh(j - 2)) / (2 * dx)
        out = np.asarray(out, dtype=float)
        return out if out.ndim else float(out)


def view_eval(v: StepFunctionView, x, t):
    return v(x, t)


@dataclass(frozen=True)
class BilinearInterpolant:
    """Continuous surface that is bilinear on every mesh rectangle."""

    solution: Solution

    def __call__(self, x, t):
        s = self.solution
        g = s.grid
        sx, st = _cell_coords(x, t, g)
        sx, st = np.broadcast_arrays(sx, st)
        j = np.clip(np.floor(sx).astype(int), 0, g.J - 1)
        n = np.clip(np.floor(st).astype(int), 0, g.N - 1)
        px = sx - j
        pt = st - n
        u = s.u
        lo = _lerp(u[n, j], u[n, j + 1], px)
        hi = _lerp(u[n + 1, j], u[n + 1, j + 1], px)
        out = _lerp(lo, hi, pt)
        return out if np.ndim(out) else float(out)


def _lerp(a, b, w):
    # exact at w = 0, at w = 1 and for a == b
    return np.where(w < 0.5, a + w * (b - a), b - (1 - w) * (b - a))


@dataclass(frozen=True)
class TestFunction:
    """Bump ``K x^a (1-x)^a t^b (T-t)^b`` vanishing with its first partials on the boundary."""

    __test__ = False  # keep pytest from collecting this class

    a: int
    b: int
    T: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if self.a < 2 or self.b < 2:
            raise ValueError("exponents must be at least 2")

    @classmethod
    def normalized(cls, a: int, b: int, T: float = 1.0) -> "TestFunction":
        ex = beta_fn(2 * a + 1, 2 * a + 1)
        et = T ** (4 * b + 1) * beta_fn(2 * b + 1, 2 * b + 1)
        return cls(a, b, T, 1.0 / math.sqrt(ex * et))

    @property
    def id(self) -> str:
        return f"phi_{self.a}{self.b}"

    def __call__(self, x, t):
        a, b, T = self.a, self.b, self.T
        return self.K * (x * (1 - x)) ** a * (t * (T - t)) ** b

    def dx(self, x, t):
        a, b, T = self.a, self.b, self.T
        return self.K * a * (x * (1 - x)) ** (a - 1) * (1 - 2 * x) * (t * (T - t)) ** b

    def dt(self, x, t):
        a, b, T = self.a, self.b, self.T
        return self.K * (x * (1 - x)) ** a * b * (t * (T - t)) ** (b - 1) * (T - 2 * t)


CATALOG_EXPONENTS = ((2, 2), (3, 2), (2, 3))


def catalog(T: float = 1.0) -> list[TestFunction]:
    return [TestFunction.normalized(a, b, T) for a, b in CATALOG_EXPONENTS]


_GAUSS = np.array([-1.0, 1.0]) / math.sqrt(3.0)


def _gauss_points(g: Grid):
    xs = ((np.arange(g.J)[:, None] + 0.5 + 0.5 * _GAUSS[None, :]) * g.dx).ravel()
    ts = ((np.arange(g.N)[:, None] + 0.5 + 0.5 * _GAUSS[None, :]) * g.dt).ravel()
    X, Tm = np.meshgrid(xs, ts)
    return X, Tm, 0.25 * g.dx * g.dt


def energy_inner(f: Callable, g_field: Callable, grid: Grid) -> float:
    """Space-time L2 inner product by 2x2 Gauss quadrature on each mesh rectangle."""
    X, Tm, w = _gauss_points(grid)
    return float(np.sum(np.asarray(f(X, Tm)) * np.asarray(g_field(X, Tm))) * w)


def energy_norm(f: Callable, grid: Grid) -> float:
    return math.sqrt(max(energy_inner(f, f, grid), 0.0))


def weak_residual(s: Solution, phi: TestFunction) -> float:
    """``<u_t, phi> + <A u_x, phi_x> - <B u_x, phi> - <C u, phi> - <F, phi>`` from the step views.

    ``u_t`` is the ``r_t`` view, ``u_x`` the ``m2`` view, ``u`` the ``m`` view.
    """
    p, g = s.problem, s.grid
    X, Tm, w = _gauss_points(g)
    rt = StepFunctionView("r_t", s)(X, Tm)
    m2 = StepFunctionView("m2", s)(X, Tm)
    m = StepFunctionView("m", s)(X, Tm)
    ph = phi(X, Tm)
    integrand = rt * ph + p.A(X, Tm) * m2 * phi.dx(X, Tm) - p.B(X, Tm) * m2 * ph - p.C(X, Tm) * m * ph - p.F(X, Tm) * ph
    return float(np.sum(integrand) * w)


def _lattice(g: Grid, size: int = 101):
    return np.meshgrid(np.linspace(0.0, 1.0, size), np.linspace(0.0, g.T, size))


def interpolant_gaps(s: Solution, size: int = 101) -> tuple[float, float, float]:
    """``max|s - r|``, ``max|s - l|`` on a lattice, and the modulus bound they should respect."""
    from .diagnostics import holder_moduli

    X, Tm = _lattice(s.grid, size)
    sb = BilinearInterpolant(s)(X, Tm)
    gap_r = float(np.max(np.abs(sb - StepFunctionView("r", s)(X, Tm))))
    gap_l = float(np.max(np.abs(sb - StepFunctionView("l", s)(X, Tm))))
    cx, ct = holder_moduli(s)
    bound = max(cx, ct) * (math.sqrt(s.grid.dx) + s.grid.dt**0.25)
    return gap_r, gap_l, bound


@dataclass
class LemmaLevel:
    J: int
    N: int
    dx_identity: list
    dt_identity: list
    q_gap: list
    gap_r: float
    gap_l: float
    gap_bound: float

    @property
    def gaps_ok(self) -> bool:
        tol = 1e-12 * max(1.0, self.gap_bound)
        return self.gap_r <= self.gap_bound + tol and self.gap_l <= self.gap_bound + tol


@dataclass
class LemmaReport:
    coarse: LemmaLevel
    fine: LemmaLevel

    def decreasing(self) -> dict[str, bool]:
        """Whether each quantity shrank; values at rounding level on both grids count as converged."""
        c, f = self.coarse, self.fine

        def down(a, b):
            return b < a or max(a, b) <= ROUNDOFF_FLOOR

        out = {}
        for name in ("dx_identity", "dt_identity", "q_gap"):
            out[name] = all(down(a, b) for a, b in zip(getattr(c, name), getattr(f, name)))
        out["gap_r"] = down(c.gap_r, f.gap_r)
        out["gap_l"] = down(c.gap_l, f.gap_l)
        return out

    @property
    def ok(self) -> bool:
        return self.coarse.gaps_ok and self.fine.gaps_ok and all(self.decreasing().values())


def _lemma_level(s: Solution, phis: Sequence[TestFunction]) -> LemmaLevel:
    g = s.grid
    X, Tm, w = _gauss_points(g)
    r = StepFunctionView("r", s)(X, Tm)
    lp = StepFunctionView("l_prime", s)(X, Tm)
    rt = StepFunctionView("r_t", s)(X, Tm)
    q = StepFunctionView("q1", s)(X, Tm) - StepFunctionView("q2", s)(X, Tm)
    dx_id, dt_id, qg = [], [], []
    for phi in phis:
        ph = phi(X, Tm)
        dx_id.append(abs(float(np.sum(r * phi.dx(X, Tm) + lp * ph) * w)))
        dt_id.append(abs(float(np.sum(r * phi.dt(X, Tm) + rt * ph) * w)))
        qg.append(abs(float(np.sum(q * ph) * w)))
    gr, gl, bound = interpolant_gaps(s)
    return LemmaLevel(g.J, g.N, dx_id, dt_id, qg, gr, gl, bound)


def lemma_checks(s_coarse: Solution, s_fine: Solution, phis: Sequence[TestFunction] | None = None) -> LemmaReport:
    """Discrete weak-derivative identities, interpolant gaps and the q1/q2 gap on two grids.

    The fine grid must halve both ``dx`` and ``dt`` of the coarse one.
    """
    gc, gf = s_coarse.grid, s_fine.grid
    if gf.J != 2 * gc.J or gf.N != 2 * gc.N or gf.T != gc.T:
        raise ConfigurationError("fine grid must halve both steps of the coarse grid")
    phis = list(phis) if phis is not None else catalog(gc.T)
    return LemmaReport(_lemma_level(s_coarse, phis), _lemma_level(s_fine, phis))


@dataclass
class LevelResult:
    J: int
    N: int
    l2_error: float | None
    order: float | None
    residuals: list
    cx: float
    ct: float
    enorm_step: float | None = None


@dataclass
class ConvergenceReport:
    problem: str
    levels: list = field(default_factory=list)
    phi_ids: list = field(default_factory=list)

    def orders(self) -> list:
        return [lv.order for lv in self.levels[1:]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["J", "N", "l2_error", "order", *[f"residual_{pid}" for pid in self.phi_ids], "cx", "ct"])
        for lv in self.levels:
            w.writerow(
                [
                    lv.J,
                    lv.N,
                    _fmt(lv.l2_error),
                    _fmt(lv.order),
                    *[_fmt(r) for r in lv.residuals],
                    _fmt(lv.cx),
                    _fmt(lv.ct),
                ]
            )
        return buf.getvalue()


def _fmt(v):
    return "" if v is None else format(float(v), ".17g")


def _step_difference(coarse: Solution, fine: Solution) -> float:
    """``||r_coarse - r_fine||_E``, exact on the fine mesh for nested grids."""
    rc = StepFunctionView("r", coarse)
    rf = StepFunctionView("r", fine)
    return energy_norm(lambda x, t: rc(x, t) - rf(x, t), fine.grid)


def refinement_study(p, levels: Sequence[tuple[int, int]], T: float = 1.0, lam: float = 0.25, strict: bool = True, backend=None) -> ConvergenceReport:
    grids = [Grid(J, N, T, lam) for J, N in levels]
    for coarse, fine in zip(grids, grids[1:]):
        if not fine.refines(coarse):
            raise ConfigurationError(f"level {fine.J}x{fine.N} does not refine {coarse.J}x{coarse.N}")
    phis = catalog(T)
    rep = ConvergenceReport(p.name, phi_ids=[phi.id for phi in phis])
    prev = None
    from .diagnostics import holder_moduli

    for g in grids:
        s = solve(p, g, strict=strict, backend=backend)
        err = None
        if p.exact is not None:
            e = s.u[-1] - p.exact(g.x, g.T)
            err = float(np.sqrt(np.sum(e * e) * g.dx))
        order = None
        if prev is not None and err is not None and rep.levels[-1].l2_error:
            pe = rep.levels[-1].l2_error
            ratio = prev.grid.dx / g.dx
            order = math.log(pe / err) / math.log(ratio) if err > 0 else math.inf
        cx, ct = holder_moduli(s)
        lv = LevelResult(g.J, g.N, err, order, [weak_residual(s, phi) for phi in phis], cx, ct)
        if prev is not None:
            lv.enorm_step = _step_difference(prev, s)
        rep.levels.append(lv)
        prev = s
    return rep
