"""Uniform space-time grids and discrete calculus on grid functions.

Norms use the endpoint-weighted sum ``sum_{j=0..J} u_j v_j dx`` (no
trapezoid halving), and the forward/backward quotient norms sum over their
``J`` valid quotients with the same weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coefficients import ThetaBlend
from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    J: int
    N: int
    T: float = 1.0
    lam: float = 0.25

    def __post_init__(self):
        if self.J < 4:
            raise ConfigurationError(f"J must be at least 4, got {self.J}")
        if self.N < 1:
            raise ConfigurationError(f"N must be at least 1, got {self.N}")
        if not self.T > 0:
            raise ConfigurationError("T must be positive")
        if not 0.0 < self.lam < 0.5:
            raise ConfigurationError(f"lambda must lie in (0, 1/2), got {self.lam}")
        # small slack so that lam == 2/J is accepted despite rounding
        if self.lam < 2.0 / self.J - 1e-12:
            raise ConfigurationError(f"lambda={self.lam} violates lambda >= 2*dx for J={self.J}")

    @property
    def dx(self) -> float:
        return 1.0 / self.J

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.J + 1) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt

    @property
    def blend(self) -> ThetaBlend:
        return ThetaBlend(self.lam)

    def theta(self) -> np.ndarray:
        return self.blend(self.x)

    def refines(self, other: "Grid") -> bool:
        """True if ``self`` is a strict nested refinement of ``other``."""
        return (
            self.T == other.T
            and self.J % other.J == 0
            and self.N % other.N == 0
            and (self.J > other.J or self.N > other.N)
        )


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray
    dx: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("grid function needs a 1-d array of at least two values")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def J(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size


def _check_pair(u: GridFunction, v: GridFunction):
    if u.values.shape != v.values.shape or u.dx != v.dx:
        raise ValueError(f"shape mismatch: {u.values.shape}/{u.dx} vs {v.values.shape}/{v.dx}")


def inner(u: GridFunction, v: GridFunction) -> float:
    _check_pair(u, v)
    return float(np.dot(u.values, v.values) * u.dx)


def norm(u: GridFunction) -> float:
    return float(np.sqrt(inner(u, u)))


# row-wise helpers used by the diagnostics; they act on the last axis


def norms(values: np.ndarray, dx: float) -> np.ndarray:
    return np.sqrt(np.sum(np.square(values), axis=-1) * dx)


def forward_quotients(values: np.ndarray, dx: float) -> np.ndarray:
    return np.diff(values, axis=-1) / dx


def forward_norms(values: np.ndarray, dx: float) -> np.ndarray:
    return norms(forward_quotients(values, dx), dx)


_RANGES = {
    "forward": (0, 1),
    "backward": (1, 0),
    "central": (1, 1),
    "forward2": (0, 2),
    "backward2": (2, 0),
}


def diff(kind: str, u: GridFunction, j: int) -> float:
    """One difference quotient of ``u`` at node ``j``.

    ``forward2``/``backward2`` are the one-sided second-order quotients
    ``(3 D+ u_j - D+ u_{j+1}) / 2`` and ``(3 D- u_j - D- u_{j-1}) / 2``.
    """
    try:
        left, right = _RANGES[kind]
    except KeyError:
        raise ValueError(f"unknown difference kind {kind!r}") from None
    J = u.J
    if j - left < 0 or j + right > J:
        raise IndexError(f"{kind} stencil at j={j} leaves 0..{J}")
    v, h = u.values, u.dx
    if kind == "forward":
        return (v[j + 1] - v[j]) / h
    if kind == "backward":
        return (v[j] - v[j - 1]) / h
    if kind == "central":
        return (v[j + 1] - v[j - 1]) / (2.0 * h)
    if kind == "forward2":
        return 0.5 * (3.0 * (v[j + 1] - v[j]) - (v[j + 2] - v[j + 1])) / h
    return 0.5 * (3.0 * (v[j] - v[j - 1]) - (v[j - 1] - v[j - 2])) / h


class SupBound(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def sup_bound_rows(values: np.ndarray, dx: float, rel_slack: float = 1e-12):
    """Vectorised discrete Sobolev bound ``max|v|^2 <= |v| (2 |D+ v| + |v|)``."""
    lhs = np.max(np.square(values), axis=-1)
    nv = norms(values, dx)
    rhs = nv * (2.0 * forward_norms(values, dx) + nv)
    return lhs, rhs, lhs <= rhs + rel_slack * rhs


def sup_bound_check(v: GridFunction) -> SupBound:
    if v.J < 2:
        raise ValueError("need J >= 2")
    lhs, rhs, ok = sup_bound_rows(v.values, v.dx)
    return SupBound(float(lhs), float(rhs), bool(ok))
