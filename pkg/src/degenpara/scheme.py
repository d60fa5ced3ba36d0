"""Implicit theta-blended Crank-Nicolson scheme without artificial boundary conditions.

Each step solves ``(I/dt - L) U^{n+1} = (I/dt + L) U^n + F^{n+1/2}`` where
``L`` discretises ``(A u_x)_x + B u_x + C u`` (with a factor 1/2 because it
acts on ``V = U^{n+1} + U^n``).  Interior advection blends the central
quotient with the upwind one-sided second-order quotient through ``theta``.
At an outflow end the row is the one-sided equation that holds on the
degenerate boundary; at an inflow end the Dirichlet value is imposed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .coefficients import BoundaryCase, Problem, derivative_x
from .errors import ConfigurationError, SolverError, StabilityError
from .grid import Grid, GridFunction

STABILITY_TIME_SAMPLES = 64
LIPSCHITZ_X_SAMPLES = 512
_TOL = 1e-12


def _lipschitz(values: np.ndarray, h: float) -> float:
    """Largest adjacent difference quotient along the last axis."""
    return float(np.max(np.abs(np.diff(values, axis=-1))) / h)


@dataclass(frozen=True)
class StabilityReport:
    """Endpoint conditions and the time-step restriction for one problem/grid pair.

    ``cond_left``/``cond_right`` hold the condition relevant to each end:
    an outflow end needs ``B >= a/7`` at x=0 (``B <= a/7`` at x=1); for the
    single-inflow cases the Dirichlet end needs ``a + B`` of the sign that
    keeps the gradient estimate closed.  Two inflow ends carry no condition.
    """

    case: BoundaryCase
    case_ok: bool
    cond_left: bool
    cond_right: bool
    c2: float
    c3: float
    c4: float
    c5_estimate: float
    dt_max: float
    dt: float
    messages: tuple = ()

    @property
    def dt_ok(self) -> bool:
        return self.dt < self.dt_max

    @property
    def ok(self) -> bool:
        return self.case_ok and self.cond_left and self.cond_right and self.dt_ok


def check_stability(p: Problem, g: Grid) -> StabilityReport:
    ts = np.linspace(0.0, g.T, STABILITY_TIME_SAMPLES)
    case = p.boundary_case
    msgs = []
    case_ok = p.case_is_consistent(g.T, STABILITY_TIME_SAMPLES)
    if not case_ok:
        msgs.append(f"signs of B at the ends do not match boundary case {case.value!r}")

    a0, a1 = np.asarray(p.a(0.0, ts)), np.asarray(p.a(1.0, ts))
    b0, b1 = np.asarray(p.B(0.0, ts)), np.asarray(p.B(1.0, ts))
    if case is BoundaryCase.BOTH:
        left = right = True
    else:
        if case.needs_left:
            left = bool(np.all(a0 + b0 <= _TOL))
            lmsg = "a(0,t) + B(0,t) <= 0"
        else:
            left = bool(np.all(b0 >= a0 / 7.0 - _TOL))
            lmsg = "B(0,t) >= a(0,t)/7"
        if case.needs_right:
            right = bool(np.all(a1 + b1 >= -_TOL))
            rmsg = "a(1,t) + B(1,t) >= 0"
        else:
            right = bool(np.all(b1 <= a1 / 7.0 + _TOL))
            rmsg = "B(1,t) <= a(1,t)/7"
        if not left:
            msgs.append(f"left endpoint condition fails: {lmsg}")
        if not right:
            msgs.append(f"right endpoint condition fails: {rmsg}")

    xs = np.linspace(0.0, 1.0, LIPSCHITZ_X_SAMPLES)
    h = xs[1] - xs[0]
    X, Tm = np.meshgrid(xs, ts)
    Bv = np.asarray(p.B(X, Tm))
    c2 = _lipschitz(np.asarray(p.a(X, Tm)), h)
    c3 = _lipschitz(Bv, h)
    c4 = _lipschitz(g.blend(xs)[None, :] * Bv, h)
    c5 = 7.0 * c2 / 16.0 + 2.0 * c3 + 2.0 * c4
    dt_max = math.inf if c5 == 0.0 else 1.0 / c5
    if not g.dt < dt_max:
        msgs.append(f"dt={g.dt:g} is not below 1/C5={dt_max:g}")
    return StabilityReport(case, case_ok, left, right, c2, c3, c4, c5, dt_max, g.dt, tuple(msgs))


@dataclass(frozen=True)
class StepSystem:
    """Banded system for one step; ``bands`` uses the layout of :mod:`._kernels`."""

    bands: np.ndarray
    rhs: np.ndarray
    step: int

    def dense(self) -> np.ndarray:
        return _kernels.band_to_dense(self.bands)

    def residual(self, u: np.ndarray) -> float:
        return float(np.max(np.abs(_kernels.band_matvec(self.bands, u) - self.rhs)))


def _coefficients_at(p: Problem, g: Grid, t: float):
    x = g.x
    xh = (np.arange(g.J) + 0.5) * g.dx
    tt = np.full_like(x, t)
    A_half = np.asarray(p.A(xh, t), dtype=float).copy()
    B = np.asarray(p.B(x, tt), dtype=float).copy()
    C = np.asarray(p.C(x, tt), dtype=float).copy()
    F = np.asarray(p.F(x, tt), dtype=float).copy()
    a0 = float(p.a(0.0, t))
    aJ = float(p.a(1.0, t))
    return A_half, a0, aJ, B, C, F


def operator_bands(p: Problem, g: Grid, n: int, theta=None, backend=None) -> np.ndarray:
    """Bands of ``L`` at time level ``n + 1/2``."""
    ops, _ = _kernels.get_backend(backend)
    A_half, a0, aJ, B, C, _ = _coefficients_at(p, g, (n + 0.5) * g.dt)
    th = g.theta() if theta is None else np.asarray(theta, dtype=float)
    case = p.boundary_case
    return ops(g.dx, A_half, a0, aJ, B, C, th, case.needs_left, case.needs_right)


def assemble_step(p: Problem, g: Grid, n: int, u_n, backend=None) -> StepSystem:
    if not 0 <= n < g.N:
        raise IndexError(f"step index {n} outside 0..{g.N - 1}")
    case = p.boundary_case
    if case.needs_left != (p.dirichlet_left is not None) or case.needs_right != (p.dirichlet_right is not None):
        raise ConfigurationError(f"Dirichlet data does not match boundary case {case.value!r}")
    u = np.asarray(getattr(u_n, "values", u_n), dtype=float)
    if u.size != g.J + 1:
        raise ValueError(f"expected {g.J + 1} nodal values, got {u.size}")
    ops, _ = _kernels.get_backend(backend)
    t_half = (n + 0.5) * g.dt
    A_half, a0, aJ, B, C, F = _coefficients_at(p, g, t_half)
    L = ops(g.dx, A_half, a0, aJ, B, C, g.theta(), case.needs_left, case.needs_right)
    inv_dt = 1.0 / g.dt
    bands = -L
    bands[2] += inv_dt
    rhs = u * inv_dt + _kernels.band_matvec(L, u) + F
    t_next = (n + 1) * g.dt
    if case.needs_left:
        bands[:, 0] = 0.0
        bands[2, 0] = 1.0
        rhs[0] = float(p.dirichlet_left(t_next))
    if case.needs_right:
        bands[:, g.J] = 0.0
        bands[2, g.J] = 1.0
        rhs[g.J] = float(p.dirichlet_right(t_next))
    return StepSystem(bands, rhs, n)


def step(sys: StepSystem, backend=None) -> GridFunction:
    _, solve = _kernels.get_backend(backend)
    u, bad = solve(sys.bands, sys.rhs)
    if bad >= 0:
        raise SolverError(f"singular banded system at step {sys.step} (pivot column {bad})", step=sys.step, node=bad)
    return GridFunction(u, 1.0 / (sys.rhs.size - 1))


@dataclass(frozen=True)
class Solution:
    """Nodal values ``u[n, j]`` for ``n = 0..N`` and ``j = 0..J``."""

    u: np.ndarray
    grid: Grid
    problem: Problem
    stability: StabilityReport | None = None
    warnings: tuple = field(default=())

    def __post_init__(self):
        self.u.setflags(write=False)

    def row(self, n: int) -> GridFunction:
        return GridFunction(self.u[n], self.grid.dx)


def solve(p: Problem, g: Grid, strict: bool = True, backend=None) -> Solution:
    """March the scheme from ``t = 0`` to ``t = T``.

    In strict mode a failed :func:`check_stability` raises
    :class:`StabilityError`; otherwise its messages are kept as warnings.
    """
    report = check_stability(p, g)
    notes = report.messages
    if not report.ok:
        if strict:
            raise StabilityError("; ".join(report.messages) or "stability check failed", report)
        for msg in notes:
            warnings.warn(msg, RuntimeWarning, stacklevel=2)

    _, band_solve = _kernels.get_backend(backend)
    out = np.empty((g.N + 1, g.J + 1))
    out[0] = p.initial(g.x)
    if not np.all(np.isfinite(out[0])):
        j = int(np.argmin(np.isfinite(out[0])))
        raise SolverError(f"initial data is not finite at j={j}", step=0, node=j)
    for n in range(g.N):
        sys = assemble_step(p, g, n, out[n], backend)
        new, bad = band_solve(sys.bands, sys.rhs)
        if bad >= 0:
            raise SolverError(f"singular banded system at step {n} (pivot column {bad})", step=n, node=bad)
        finite = np.isfinite(new)
        if not finite.all():
            j = int(np.argmin(finite))
            raise SolverError(f"non-finite value at j={j}, n={n + 1}", step=n + 1, node=j)
        out[n + 1] = new
    return Solution(out, g, p, report, tuple(notes if not report.ok else ()))


def l2_growth_rate(p: Problem, g: Grid) -> float:
    """``max|C| + max|dB/dx|`` over a sample lattice."""
    xs = np.linspace(0.0, 1.0, LIPSCHITZ_X_SAMPLES)
    X, Tm = np.meshgrid(xs, np.linspace(0.0, g.T, STABILITY_TIME_SAMPLES))
    dB = derivative_x(p.B)
    return float(np.max(np.abs(p.C(X, Tm))) + np.max(np.abs(dB(X, Tm))))
