"""Flat ``key = value`` run configuration with ``[section]`` headers.

Keys before the first header belong to ``[problem]``.  Recognised keys::

    [problem]  preset, initial, boundary_case
    [asian]    sigma, r, d0
    [grid]     J, N, T, lambda
    [boundary] left, right        ascending polynomial coefficients in t
    [run]      strict, seed, snapshots, levels
    [A] [B] [C] [F]  x, t         separable polynomial p(x) q(t), preset = custom

``boundary_case`` takes ``none``, ``right``, ``left`` or ``both`` (the ends
where data flows in); for presets it overrides the built-in case.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import (
    INITIAL_PROFILES,
    PRESETS,
    ZERO,
    AsianParams,
    BoundaryCase,
    CoefficientField,
    Problem,
    classify_boundary,
    derivative_x,
    make_preset,
)
from .errors import ClassificationError, ConfigurationError
from .grid import Grid

DEFAULT_LEVELS = ((16, 16), (32, 32), (64, 64), (128, 128))


@dataclass(frozen=True)
class RunConfig:
    problem: Problem
    grid: Grid
    strict: bool = True
    seed: int = 0
    snapshots: tuple = ()
    levels: tuple = DEFAULT_LEVELS
    preset: str = "asian"
    initial: str = "tanh"
    asian: AsianParams = field(default_factory=AsianParams)


def parse_floats(text: str, key: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError:
        raise ConfigurationError(f"{key}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigurationError(f"{key}: empty value")
    return vals


def parse_levels(text: str, key: str = "levels") -> tuple[tuple[int, int], ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        try:
            j, n = tok.split("x")
            out.append((int(j), int(n)))
        except ValueError:
            raise ConfigurationError(f"{key}: expected JxN pairs, got {tok!r}") from None
    if not out:
        raise ConfigurationError(f"{key}: no levels given")
    return tuple(out)


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(strict=False, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep J and N distinct from j and n
    try:
        cp.read_string("[problem]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"unreadable config: {exc}") from None
    return cp


def _get(cp, section, key, conv, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    try:
        return conv(raw)
    except (ValueError, KeyError):
        raise ConfigurationError(f"{section}.{key}: cannot parse {raw!r}") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _poly_profile(coeffs):
    poly = np.polynomial.Polynomial(coeffs)
    return lambda t: float(poly(t))


def _field(cp, name: str) -> CoefficientField:
    if not cp.has_section(name):
        return ZERO
    px = parse_floats(cp.get(name, "x", fallback="0"), f"{name}.x")
    qt = parse_floats(cp.get(name, "t", fallback="1"), f"{name}.t")
    return CoefficientField.separable(px, qt)


def _boundary_profiles(cp):
    left = right = None
    if cp.has_option("boundary", "left"):
        left = _poly_profile(parse_floats(cp.get("boundary", "left"), "boundary.left"))
    if cp.has_option("boundary", "right"):
        right = _poly_profile(parse_floats(cp.get("boundary", "right"), "boundary.right"))
    return left, right


def _apply_case(p: Problem, case: BoundaryCase, left, right) -> Problem:
    """Rebuild ``p`` for ``case``, taking Dirichlet data from config before the preset."""
    dl = (left or p.dirichlet_left) if case.needs_left else None
    dr = (right or p.dirichlet_right) if case.needs_right else None
    if case.needs_left and dl is None:
        raise ConfigurationError(f"boundary.left: required for boundary_case = {case.value}")
    if case.needs_right and dr is None:
        raise ConfigurationError(f"boundary.right: required for boundary_case = {case.value}")
    return dataclasses.replace(p, boundary_case=case, dirichlet_left=dl, dirichlet_right=dr)


def build_config(text: str = "", seed: int | None = None, strict: bool | None = None, levels=None) -> RunConfig:
    cp = _read(text)
    preset = cp.get("problem", "preset", fallback="asian").strip()
    initial = cp.get("problem", "initial", fallback="tanh").strip()
    if initial not in INITIAL_PROFILES:
        raise ConfigurationError(f"problem.initial: unknown profile {initial!r}")
    try:
        asian = AsianParams(
            sigma=_get(cp, "asian", "sigma", float, 0.05),
            r=_get(cp, "asian", "r", float, 0.05),
            d0=_get(cp, "asian", "d0", float, 0.1),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"asian: {exc}") from None
    try:
        grid = Grid(
            J=_get(cp, "grid", "J", int, 100),
            N=_get(cp, "grid", "N", int, 100),
            T=_get(cp, "grid", "T", float, 1.0),
            lam=_get(cp, "grid", "lambda", float, 0.25),
        )
    except ConfigurationError as exc:
        msg = str(exc)
        raise ConfigurationError(msg if msg.startswith("grid.") else f"grid: {msg}") from None
    case_override = _get(cp, "problem", "boundary_case", BoundaryCase, None)
    left, right = _boundary_profiles(cp)

    if preset == "custom":
        A = _field(cp, "A")
        B = _field(cp, "B")
        if case_override is None:
            try:
                case_override = classify_boundary(B, np.linspace(0.0, grid.T, 64))
            except ClassificationError as exc:
                raise ConfigurationError(f"B: {exc}") from None
        base = Problem(A=A, B=B, C=_field(cp, "C"), a=derivative_x(A), F=_field(cp, "F"),
                       f=INITIAL_PROFILES[initial], name="custom")
        problem = _apply_case(base, case_override, left, right)
    elif preset in PRESETS:
        problem = make_preset(preset, initial, asian)
        case = case_override or problem.boundary_case
        if case_override is not None or left or right:
            problem = _apply_case(problem, case, left, right)
    else:
        raise ConfigurationError(f"problem.preset: unknown preset {preset!r}")

    cfg_levels = _get(cp, "run", "levels", parse_levels, DEFAULT_LEVELS)
    return RunConfig(
        problem=problem,
        grid=grid,
        strict=_get(cp, "run", "strict", _bool, True) if strict is None else strict,
        seed=_get(cp, "run", "seed", int, 0) if seed is None else seed,
        snapshots=tuple(_get(cp, "run", "snapshots", lambda s: parse_floats(s, "run.snapshots"), ())),
        levels=cfg_levels if levels is None else levels,
        preset=preset,
        initial=initial,
        asian=asian,
    )


def load_config(path: str | Path | None, **overrides) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return build_config(text, **overrides)
