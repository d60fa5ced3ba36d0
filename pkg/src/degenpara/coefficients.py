"""Continuous problem data for ``u_t = (A u_x)_x + B u_x + C u + F`` on [0, 1].

The diffusion coefficient ``A`` vanishes at both ends of the interval, so the
boundary behaviour is governed by the sign of the advection coefficient ``B``
there.  This module holds the coefficient fields, the boundary classification,
the cubic blending function used by the scheme and the built-in presets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassificationError, ConfigurationError, DomainError

FieldFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _as_float(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class CoefficientField:
    """Scalar field ``(x, t) -> value`` evaluated with numpy broadcasting.

    ``ddx`` is the analytic partial derivative in ``x`` when known.
    """

    fn: FieldFn
    ddx: Optional[FieldFn] = None
    label: str = ""

    def __call__(self, x, t):
        x = _as_float(x)
        t = _as_float(t)
        out = np.broadcast_to(_as_float(self.fn(x, t)), np.broadcast(x, t).shape)
        return out if out.ndim else float(out)

    @classmethod
    def constant(cls, value: float, label: str = "") -> "CoefficientField":
        value = float(value)
        return cls(
            lambda x, t: np.full(np.broadcast(x, t).shape, value),
            lambda x, t: np.zeros(np.broadcast(x, t).shape),
            label or repr(value),
        )

    @classmethod
    def separable(cls, px: Sequence[float], qt: Sequence[float] = (1.0,), label: str = ""):
        """``p(x) q(t)`` with ascending coefficient sequences."""
        p = np.polynomial.Polynomial(np.asarray(px, dtype=float))
        q = np.polynomial.Polynomial(np.asarray(qt, dtype=float))
        dp = p.deriv()
        return cls(
            lambda x, t: p(x) * q(t),
            lambda x, t: dp(x) * q(t),
            label or f"poly(x={list(px)}, t={list(qt)})",
        )

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        f, g = self, other
        ddx = None
        if f.ddx is not None and g.ddx is not None:
            ddx = lambda x, t: f.ddx(x, t) + g.ddx(x, t)  # noqa: E731
        return CoefficientField(lambda x, t: f.fn(x, t) + g.fn(x, t), ddx, f"({f.label})+({g.label})")

    def __neg__(self) -> "CoefficientField":
        f = self
        ddx = None if f.ddx is None else (lambda x, t: -f.ddx(x, t))
        return CoefficientField(lambda x, t: -f.fn(x, t), ddx, f"-({f.label})")

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        return self + (-other)


ZERO = CoefficientField.constant(0.0, "0")


def derivative_x(f: CoefficientField) -> CoefficientField:
    """Partial derivative in ``x``; analytic when available, else a centred difference.

    The difference step is ``1e-6 * max(1, |x|)``.
    """
    if f.ddx is not None:
        return CoefficientField(f.ddx, None, f"d/dx {f.label}")

    def fd(x, t):
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (f.fn(x + h, t) - f.fn(x - h, t)) / (2.0 * h)

    return CoefficientField(fd, None, f"d/dx {f.label} (fd)")


class BoundaryCase(enum.Enum):
    """Sign pattern of ``B`` at the two ends, named by where characteristics enter.

    ``NONE``: B(0) >= 0, B(1) <= 0.  ``RIGHT``: B(0) >= 0, B(1) > 0.
    ``LEFT``: B(0) < 0, B(1) <= 0.  ``BOTH``: B(0) < 0, B(1) > 0.
    A Dirichlet condition is required exactly at the inflow ends.
    """

    NONE = "none"
    RIGHT = "right"
    LEFT = "left"
    BOTH = "both"

    @property
    def needs_left(self) -> bool:
        return self in (BoundaryCase.LEFT, BoundaryCase.BOTH)

    @property
    def needs_right(self) -> bool:
        return self in (BoundaryCase.RIGHT, BoundaryCase.BOTH)

    @classmethod
    def from_signs(cls, left_negative: bool, right_positive: bool) -> "BoundaryCase":
        return {
            (False, False): cls.NONE,
            (False, True): cls.RIGHT,
            (True, False): cls.LEFT,
            (True, True): cls.BOTH,
        }[(left_negative, right_positive)]


def classify_boundary(B: CoefficientField, t_samples) -> BoundaryCase:
    t = np.atleast_1d(_as_float(t_samples))
    if t.size == 0:
        raise ValueError("t_samples must be nonempty")
    b0 = np.atleast_1d(B(0.0, t))
    b1 = np.atleast_1d(B(1.0, t))
    left_neg = b0 < 0
    right_pos = b1 > 0
    if left_neg.any() and not left_neg.all():
        raise ClassificationError("B(0, t) changes sign over the sampled times")
    if right_pos.any() and not right_pos.all():
        raise ClassificationError("B(1, t) changes sign over the sampled times")
    return BoundaryCase.from_signs(bool(left_neg[0]), bool(right_pos[0]))


@dataclass(frozen=True)
class ThetaBlend:
    """C^1 blend that is 1 on [0, lam], 0 on [1 - lam, 1] and cubic in between."""

    lam: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.lam < 0.5:
            raise ConfigurationError(f"blend width must lie in (0, 1/2), got {self.lam}")

    @property
    def cubic(self) -> np.polynomial.Polynomial:
        """Middle segment as a polynomial in ``x``."""
        lam = self.lam
        w = 1.0 - 2.0 * lam
        # 1 - 3 s^2 + 2 s^3 with s = (x - lam) / w
        s = np.polynomial.Polynomial([-lam / w, 1.0 / w])
        return 1.0 - 3.0 * s**2 + 2.0 * s**3

    def __call__(self, x):
        x = _as_float(x)
        if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
            raise DomainError("theta is defined on [0, 1] only")
        s = np.clip((x - self.lam) / (1.0 - 2.0 * self.lam), 0.0, 1.0)
        out = 1.0 - s * s * (3.0 - 2.0 * s)
        return out if out.ndim else float(out)


def theta_eval(blend: ThetaBlend, x):
    return blend(x)


def _zero_profile(x):
    return np.zeros_like(_as_float(x))


@dataclass(frozen=True)
class Problem:
    """Coefficients, initial data and boundary data of one problem instance.

    ``a`` is ``dA/dx``; it is needed on its own because the outflow boundary
    rows use it directly.  ``exact`` is set only for manufactured problems.
    Consistency of ``boundary_case`` with the signs of ``B`` is not enforced
    here (see :meth:`case_is_consistent`) so that a misconfigured problem can
    still be inspected and reported on.
    """

    A: CoefficientField
    B: CoefficientField
    C: CoefficientField = ZERO
    a: Optional[CoefficientField] = None
    F: CoefficientField = ZERO
    f: Callable[[np.ndarray], np.ndarray] = _zero_profile
    boundary_case: BoundaryCase = BoundaryCase.NONE
    dirichlet_left: Optional[Callable[[float], float]] = None
    dirichlet_right: Optional[Callable[[float], float]] = None
    exact: Optional[FieldFn] = None
    name: str = "custom"

    def __post_init__(self):
        if self.a is None:
            object.__setattr__(self, "a", derivative_x(self.A))
        case = self.boundary_case
        if case.needs_left != (self.dirichlet_left is not None):
            raise ConfigurationError(
                f"boundary case {case.value!r} "
                + ("requires" if case.needs_left else "forbids")
                + " a Dirichlet profile at x=0"
            )
        if case.needs_right != (self.dirichlet_right is not None):
            raise ConfigurationError(
                f"boundary case {case.value!r} "
                + ("requires" if case.needs_right else "forbids")
                + " a Dirichlet profile at x=1"
            )

    def initial(self, x) -> np.ndarray:
        return np.broadcast_to(_as_float(self.f(_as_float(x))), np.shape(x)).astype(float)

    def case_is_consistent(self, T: float, samples: int = 64) -> bool:
        try:
            return classify_boundary(self.B, np.linspace(0.0, T, samples)) is self.boundary_case
        except ClassificationError:
            return False

    def reaction_free(self, T: float) -> bool:
        x, t = np.meshgrid(np.linspace(0, 1, 129), np.linspace(0, T, 33))
        return bool(np.all(self.C(x, t) == 0.0))


@dataclass(frozen=True)
class ConservativeCoefficients:
    A: CoefficientField
    a: CoefficientField
    B: CoefficientField
    C: CoefficientField


def conservative_from_nonconservative(
    A: CoefficientField, b: CoefficientField, c: CoefficientField = ZERO
) -> ConservativeCoefficients:
    """Rewrite ``A u_xx + b u_x + c u`` as ``(A u_x)_x + (b - A_x) u_x + c u``."""
    a = derivative_x(A)
    return ConservativeCoefficients(A=A, a=a, B=b - a, C=c)


@dataclass(frozen=True)
class AsianParams:
    sigma: float = 0.05
    r: float = 0.05
    d0: float = 0.1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if self.r < 0 or self.d0 < 0:
            raise ConfigurationError("rates must be nonnegative")


def asian_problem(p: AsianParams = AsianParams(), f=np.tanh) -> Problem:
    """Transformed Asian-option equation on [0, 1].

    Diffusion ``sigma^2 x^2 (1-x)^2 / 2``, drift ``(d0 - r) x (1-x)`` and
    discount ``-(d0 (1-x) + r x)``.  Both ends are fully degenerate.
    """
    s2 = p.sigma**2
    A = CoefficientField(
        lambda x, t: 0.5 * s2 * x**2 * (1 - x) ** 2,
        lambda x, t: s2 * x * (1 - x) * (1 - 2 * x),
        "asian A",
    )
    b = CoefficientField(
        lambda x, t: (p.d0 - p.r) * x * (1 - x),
        lambda x, t: (p.d0 - p.r) * (1 - 2 * x),
        "asian b",
    )
    c = CoefficientField(
        lambda x, t: -(p.d0 * (1 - x) + p.r * x),
        lambda x, t: np.full(np.broadcast(x, t).shape, p.d0 - p.r),
        "asian C",
    )
    cc = conservative_from_nonconservative(A, b, c)
    return Problem(A=cc.A, B=cc.B, C=cc.C, a=cc.a, f=f, boundary_case=BoundaryCase.NONE, name="asian")


def _constant_profile(value):
    value = float(value)
    return lambda t: value


def pure_diffusion_problem(f=np.tanh) -> Problem:
    """``u_t = x(1-x) u_xx`` with the endpoint values held at their initial values."""
    A = CoefficientField.separable([0.0, 1.0, -1.0], label="x(1-x)")
    cc = conservative_from_nonconservative(A, ZERO)
    x = np.array([0.0, 1.0])
    f0, f1 = np.broadcast_to(f(x), (2,))
    return Problem(
        A=cc.A, B=cc.B, a=cc.a, f=f, boundary_case=BoundaryCase.BOTH,
        dirichlet_left=_constant_profile(f0), dirichlet_right=_constant_profile(f1),
        name="pure-diffusion",
    )


def _light_diffusion():
    return CoefficientField.separable([0.0, 0.1, -0.1], label="0.1 x(1-x)")


def advection_right_problem(f=np.tanh, speed: float = 0.5) -> Problem:
    """Constant leftward transport entering through x=1, where the value is held."""
    f1 = float(np.asarray(f(np.array([1.0])))[0])
    return Problem(
        A=_light_diffusion(), B=CoefficientField.constant(speed), f=f,
        boundary_case=BoundaryCase.RIGHT, dirichlet_right=_constant_profile(f1),
        name="advection-right",
    )


def advection_left_problem(f=np.tanh, speed: float = 0.5) -> Problem:
    """Constant rightward transport entering through x=0, where the value is held."""
    f0 = float(np.asarray(f(np.array([0.0])))[0])
    return Problem(
        A=_light_diffusion(), B=CoefficientField.constant(-speed), f=f,
        boundary_case=BoundaryCase.LEFT, dirichlet_left=_constant_profile(f0),
        name="advection-left",
    )


def two_sided_problem(f=np.tanh, speed: float = 0.5) -> Problem:
    """Inflow at both ends: ``B = -speed (1 - 2x)``."""
    ends = np.asarray(f(np.array([0.0, 1.0])), dtype=float)
    return Problem(
        A=_light_diffusion(),
        B=CoefficientField.separable([-speed, 2.0 * speed], label="-s(1-2x)"),
        f=f, boundary_case=BoundaryCase.BOTH,
        dirichlet_left=_constant_profile(ends[0]), dirichlet_right=_constant_profile(ends[1]),
        name="two-sided",
    )


def mms_exact(x, t):
    """Manufactured solution ``exp(-t) cos(pi x) + x``."""
    return np.exp(-t) * np.cos(np.pi * x) + x


def mms_problem() -> Problem:
    """Degenerate diffusion ``x^2 (1-x)^2`` with drift ``1/2 - x`` and decay ``-1/2``.

    The source is chosen so that :func:`mms_exact` solves the equation exactly.
    No boundary data is needed: ``B(0) > 0`` and ``B(1) < 0``.
    """
    A = CoefficientField.separable([0.0, 0.0, 1.0, -2.0, 1.0], label="x^2(1-x)^2")
    a = derivative_x(A)
    B = CoefficientField.separable([0.5, -1.0], label="1/2 - x")
    C = CoefficientField.constant(-0.5)
    pi = np.pi

    def source(x, t):
        e = np.exp(-t)
        u = e * np.cos(pi * x) + x
        ut = -e * np.cos(pi * x)
        ux = 1.0 - pi * e * np.sin(pi * x)
        uxx = -pi * pi * e * np.cos(pi * x)
        return ut - a(x, t) * ux - A(x, t) * uxx - B(x, t) * ux - C(x, t) * u

    return Problem(
        A=A, B=B, C=C, a=a, F=CoefficientField(source, None, "mms source"),
        f=lambda x: mms_exact(x, 0.0), boundary_case=BoundaryCase.NONE,
        exact=mms_exact, name="mms",
    )


def transport_pair_problem(f=np.tanh) -> Problem:
    """Reaction-free degenerate problem used for the data-stability check.

    Nonconservative drift ``0.1 x(1-x)`` with diffusion ``x^2 (1-x)^2``.
    """
    A = CoefficientField.separable([0.0, 0.0, 1.0, -2.0, 1.0], label="x^2(1-x)^2")
    b = CoefficientField.separable([0.0, 0.1, -0.1], label="0.1 x(1-x)")
    cc = conservative_from_nonconservative(A, b)
    return Problem(A=cc.A, B=cc.B, a=cc.a, f=f, boundary_case=BoundaryCase.NONE, name="transport-pair")


INITIAL_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "zero": _zero_profile,
    "one": lambda x: np.ones_like(_as_float(x)),
    "linear": lambda x: _as_float(x).copy(),
    "sinpi": lambda x: np.sin(np.pi * _as_float(x)),
    "bump": lambda x: 16.0 * _as_float(x) ** 2 * (1.0 - _as_float(x)) ** 2,
}

PRESETS = ("asian", "pure-diffusion", "advection-right", "advection-left", "two-sided", "mms")


def make_preset(name: str, initial: str | Callable = "tanh", asian: AsianParams | None = None) -> Problem:
    """Build a named preset.  ``mms`` ignores ``initial``."""
    f = INITIAL_PROFILES[initial] if isinstance(initial, str) else initial
    if name == "asian":
        return asian_problem(asian or AsianParams(), f)
    if name == "pure-diffusion":
        return pure_diffusion_problem(f)
    if name == "advection-right":
        return advection_right_problem(f)
    if name == "advection-left":
        return advection_left_problem(f)
    if name == "two-sided":
        return two_sided_problem(f)
    if name == "mms":
        return mms_problem()
    raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
