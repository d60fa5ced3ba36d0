"""Energy quantities of a computed solution and empirical checks of the a priori bounds.

The constants reported here are measured on one run.  Their use is to show
that the bounds stay put under mesh refinement, not to certify them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .coefficients import Problem, derivative_x
from .errors import PreconditionError
from .grid import forward_norms, norms, sup_bound_rows
from .scheme import LIPSCHITZ_X_SAMPLES, STABILITY_TIME_SAMPLES, Solution

GRONWALL_SLACK = 0.05


@dataclass
class DiagnosticsReport:
    norms: np.ndarray
    grad_norms: np.ndarray
    dt_norms: np.ndarray
    c1: float
    c6: float
    c11: float
    c4p: float
    c5p: float
    cx: float
    c6p: float
    c5_estimate: float
    ratio_violations: list = field(default_factory=list)
    sobolev_failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ct(self) -> float:
        return self.c5p

    @property
    def uniform_bound_holds(self) -> bool:
        """Sup bound implied by the L2 and gradient bounds: ``c4p^2 <= c1 (2 c6 + c1)``."""
        rhs = self.c1 * (2.0 * self.c6 + self.c1)
        return self.c4p**2 <= rhs * (1 + 1e-12)

    def as_dict(self) -> dict:
        return {
            "c1": self.c1,
            "c6": self.c6,
            "c11": self.c11,
            "c4p": self.c4p,
            "c5p": self.c5p,
            "c6p": self.c6p,
            "cx": self.cx,
            "ct": self.ct,
            "c5_estimate": self.c5_estimate,
            "ratio_violations": len(self.ratio_violations),
            "sobolev_failures": len(self.sobolev_failures),
            "uniform_bound_holds": self.uniform_bound_holds,
        }


def holder_moduli(s: Solution) -> tuple[float, float]:
    """``max |U_{j+1} - U_j| / sqrt(dx)`` and ``max |U^{n+1} - U^n| / dt^(1/4)``."""
    u, g = s.u, s.grid
    cx = float(np.max(np.abs(np.diff(u, axis=1)))) / np.sqrt(g.dx)
    ct = float(np.max(np.abs(np.diff(u, axis=0)))) / g.dt**0.25 if g.N else 0.0
    return cx, ct


def gradient_ratio_violations(s: Solution, c5: float) -> list[int]:
    """Steps where ``|D+U^{n+1}|^2 - |D+U^n|^2 > c5 dt |D+V^n|^2``."""
    u, dx, dt = s.u, s.grid.dx, s.grid.dt
    g2 = forward_norms(u, dx) ** 2
    v2 = forward_norms(u[1:] + u[:-1], dx) ** 2
    lhs = g2[1:] - g2[:-1]
    rhs = c5 * dt * v2
    tol = 1e-12 * np.maximum(1.0, g2[1:] + g2[:-1])
    return [int(n) for n in np.flatnonzero(lhs > rhs + tol)]


def energy_series(s: Solution, c5: float | None = None) -> DiagnosticsReport:
    u, g = s.u, s.grid
    if c5 is None:
        c5 = s.stability.c5_estimate if s.stability is not None else 0.0
    nrm = norms(u, g.dx)
    gnrm = forward_norms(u, g.dx)
    dtn = norms(np.diff(u, axis=0) / g.dt, g.dx)
    cx, ct = holder_moduli(s)
    _, _, ok = sup_bound_rows(u, g.dx)
    report = DiagnosticsReport(
        norms=nrm,
        grad_norms=gnrm,
        dt_norms=dtn,
        c1=float(nrm.max()),
        c6=float(gnrm.max()),
        c11=float(np.sum(dtn**2) * g.dt),
        c4p=float(np.max(np.abs(u))),
        c5p=ct,
        cx=cx,
        c6p=max(cx, ct),
        c5_estimate=float(c5),
        ratio_violations=gradient_ratio_violations(s, c5),
        sobolev_failures=[int(n) for n in np.flatnonzero(~ok)],
    )
    if report.ratio_violations:
        report.notes.append(f"gradient growth exceeded c5*dt at steps {report.ratio_violations[:10]}")
    if report.sobolev_failures:
        report.notes.append(f"discrete sup bound failed at rows {report.sobolev_failures[:10]}")
    return report


class GronwallResult(NamedTuple):
    max_slack: float
    holds: bool
    lhs: np.ndarray
    rhs: np.ndarray


def gronwall_check(p: Problem, s1: Solution, s2: Solution) -> GronwallResult:
    """Data-stability estimate for two runs that differ only in their initial data.

    Checks ``|d^n|^2 <= exp((N_B + 1) t^n) (|d^0|^2 + int_0^t N1 d(1)^2 + N2 d(0)^2)``
    at every level, with ``N_B = max|B_x|`` and ``N1``, ``N2`` the inflow
    parts of ``B`` at the two ends.  ``max_slack`` is the worst
    ``(lhs - rhs) / rhs``; the check passes when it stays within 5%.
    """
    g = s1.grid
    if s2.grid != g:
        raise PreconditionError("both solutions must live on the same grid")
    if not p.reaction_free(g.T):
        raise PreconditionError("the data-stability estimate assumes C == 0")
    xs = np.linspace(0.0, 1.0, LIPSCHITZ_X_SAMPLES)
    ts = np.linspace(0.0, g.T, STABILITY_TIME_SAMPLES)
    X, Tm = np.meshgrid(xs, ts)
    n_b = float(np.max(np.abs(derivative_x(p.B)(X, Tm))))
    n1 = max(0.0, float(np.max(p.B(1.0, ts))))
    n2 = -min(0.0, float(np.min(p.B(0.0, ts))))

    d = s1.u - s2.u
    lhs = norms(d, g.dx) ** 2
    t = g.t
    boundary = n1 * d[:, -1] ** 2 + n2 * d[:, 0] ** 2
    acc = integrate.cumulative_trapezoid(boundary, t, initial=0.0)
    rhs = np.exp((n_b + 1.0) * t) * (lhs[0] + acc)
    with np.errstate(divide="ignore", invalid="ignore"):
        slack = np.where(rhs > 0, (lhs - rhs) / rhs, np.where(lhs > 0, np.inf, 0.0))
    worst = float(np.max(slack))
    return GronwallResult(worst, worst <= GRONWALL_SLACK, lhs, rhs)


def q_matrices(theta: float) -> tuple[np.ndarray, np.ndarray]:
    th = float(theta)
    q1 = np.array(
        [
            [1 - th, 1.5 * th, -0.5 * th],
            [1.5 * th, -(1 + 2 * th), 0.5 * th],
            [-0.5 * th, 0.5 * th, 0.0],
        ]
    )
    q2 = np.array(
        [
            [1 - 0.5 * th, 0.5 * th, 0.0],
            [0.5 * th, -1.0, -0.5 * th],
            [0.0, -0.5 * th, 0.5 * th],
        ]
    )
    return q1, q2


@dataclass(frozen=True)
class QuadraticFormProbe:
    theta: float
    y: tuple

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if len(self.y) != 3:
            raise ValueError("y must have three entries")


def quadratic_form_gap(probe: QuadraticFormProbe) -> tuple[float, float]:
    q1, q2 = q_matrices(probe.theta)
    y = np.asarray(probe.y, dtype=float)
    return float(y @ q1 @ y), float(y @ q2 @ y)


def quadratic_form_sweep(theta: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(q1, q2)`` for probes ``theta[k]``, ``y[k, :]``."""
    th = np.asarray(theta, dtype=float)
    y0, y1, y2 = np.asarray(y, dtype=float).T
    q1 = (1 - th) * y0**2 - (1 + 2 * th) * y1**2 + 3 * th * y0 * y1 - th * y0 * y2 + th * y1 * y2
    q2 = (1 - 0.5 * th) * y0**2 - y1**2 + 0.5 * th * y2**2 + th * y0 * y1 - th * y1 * y2
    return q1, q2


def _degenerate_end(p: Problem, x: float, ts: np.ndarray) -> bool:
    return all(np.all(np.asarray(fld(x, ts)) == 0.0) for fld in (p.A, p.a, p.B, p.F))


def boundary_ode_check(s: Solution, ends=None) -> dict[str, float]:
    """Max deviation of each boundary trace from the exact endpoint ODE solution.

    At a fully degenerate end (``A = a = B = F = 0``) the equation reduces
    to ``u' = C u``, solved by ``f(x) exp(int_0^t C)``.  With ``ends=None``
    every qualifying end is checked; naming an end that does not qualify
    raises :class:`PreconditionError`.
    """
    p, g = s.problem, s.grid
    ts = np.linspace(0.0, g.T, STABILITY_TIME_SAMPLES)
    spec = {"left": (0.0, 0, p.boundary_case.needs_left), "right": (1.0, -1, p.boundary_case.needs_right)}
    explicit = ends is not None
    out = {}
    for name in ends if explicit else spec:
        x, col, dirichlet = spec[name]
        if dirichlet or not _degenerate_end(p, x, ts):
            if explicit:
                raise PreconditionError(f"{name} end is not fully degenerate")
            continue
        t = g.t
        c = np.asarray(p.C(x, t), dtype=float)
        if np.all(c == c[0]):
            expo = c[0] * t
        else:
            expo = np.array([integrate.quad(lambda tau: float(p.C(x, tau)), 0.0, tn)[0] for tn in t])
        f_end = float(p.initial(np.array([x]))[0])
        out[name] = float(np.max(np.abs(s.u[:, col] - f_end * np.exp(expo))))
    return out
