import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degenpara.coefficients import (
    INITIAL_PROFILES,
    PRESETS,
    AsianParams,
    BoundaryCase,
    CoefficientField,
    Problem,
    ThetaBlend,
    asian_problem,
    classify_boundary,
    conservative_from_nonconservative,
    derivative_x,
    make_preset,
    theta_eval,
)
from degenpara.errors import ClassificationError, ConfigurationError, DomainError

TS = np.linspace(0.0, 1.0, 64)


# --- fields -------------------------------------------------------------------


def test_separable_field_and_analytic_derivative():
    f = CoefficientField.separable([1.0, 2.0, 3.0], [1.0, -1.0])
    x, t = 0.3, 0.25
    assert f(x, t) == pytest.approx((1 + 2 * x + 3 * x * x) * (1 - t))
    assert derivative_x(f)(x, t) == pytest.approx((2 + 6 * x) * (1 - t))


def test_derivative_fallback_uses_finite_differences():
    f = CoefficientField(lambda x, t: np.sin(x) * (1 + t))
    assert derivative_x(f)(0.4, 0.5) == pytest.approx(np.cos(0.4) * 1.5, rel=1e-8)


def test_field_arithmetic():
    f = CoefficientField.constant(2.0)
    g = CoefficientField.separable([0.0, 1.0])
    assert (f - g)(0.25, 0.0) == pytest.approx(1.75)
    assert (-g)(0.5, 0.0) == pytest.approx(-0.5)
    assert derivative_x(f + g)(0.1, 0.0) == pytest.approx(1.0)


def test_fields_broadcast():
    f = CoefficientField.constant(3.0)
    assert f(np.zeros((4, 5)), 0.0).shape == (4, 5)


# --- theta blend -------------------------------------------------------------


@pytest.mark.parametrize("x, expected", [(0.1, 1.0), (0.9, 0.0), (0.5, 0.5)])
def test_theta_reference_values(x, expected):
    assert theta_eval(ThetaBlend(0.25), x) == pytest.approx(expected, abs=1e-15)


def test_theta_outside_unit_interval():
    with pytest.raises(DomainError):
        theta_eval(ThetaBlend(0.25), 1.5)
    with pytest.raises(DomainError):
        ThetaBlend(0.25)(np.array([-0.1, 0.5]))


@pytest.mark.parametrize("lam", [0.05, 0.25, 0.4])
def test_theta_matches_independent_hermite_solve(lam):
    # cubic through (lam, 1), (1 - lam, 0) with zero slope at both ends,
    # solved in a basis centred at 1/2 to keep the 4x4 system well conditioned
    a, b = lam - 0.5, 0.5 - lam
    M = np.array([[1, a, a**2, a**3], [1, b, b**2, b**3], [0, 1, 2 * a, 3 * a**2], [0, 1, 2 * b, 3 * b**2]])
    coef = np.linalg.solve(M, [1.0, 0.0, 0.0, 0.0])
    xs = np.linspace(lam, 1.0 - lam, 101)
    ref = np.polynomial.polynomial.polyval(xs - 0.5, coef)
    assert np.max(np.abs(ThetaBlend(lam)(xs) - ref)) <= 1e-14
    # C^1 at the joins
    d = ThetaBlend(lam).cubic.deriv()
    assert abs(d(lam)) < 1e-12 and abs(d(1.0 - lam)) < 1e-12


@given(st.floats(0.01, 0.49), st.floats(0.0, 1.0))
def test_theta_range_and_monotone(lam, x):
    th = ThetaBlend(lam)
    v = float(th(x))
    assert 0.0 <= v <= 1.0
    assert float(th(min(1.0, x + 0.01))) <= v + 1e-15


@given(st.floats(0.01, 0.49), st.floats(0.0, 1.0))
def test_theta_symmetry(lam, x):
    th = ThetaBlend(lam)
    assert float(th(x)) + float(th(1.0 - x)) == pytest.approx(1.0, abs=1e-12)


def test_theta_rejects_bad_lambda():
    for lam in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            ThetaBlend(lam)


# --- classification ------------------------------------------------------------


@pytest.mark.parametrize(
    "b, case",
    [
        (0.0, BoundaryCase.NONE),
        (1.0, BoundaryCase.RIGHT),
        (-1.0, BoundaryCase.LEFT),
    ],
)
def test_classify_constant_B(b, case):
    assert classify_boundary(CoefficientField.constant(b), TS) is case


def test_classify_two_sided():
    B = CoefficientField.separable([-1.0, 2.0])
    assert classify_boundary(B, TS) is BoundaryCase.BOTH


def test_classify_sign_change_in_time():
    B = CoefficientField.separable([1.0], [-1.0, 2.0])
    with pytest.raises(ClassificationError):
        classify_boundary(B, TS)


@given(st.floats(1e-3, 2.0), st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_asian_is_always_outflow_both_ends(sigma, r, d0):
    p = asian_problem(AsianParams(sigma, r, d0))
    assert classify_boundary(p.B, TS) is BoundaryCase.NONE


# --- conservative form ----------------------------------------------------------


def test_conservative_reference_cases():
    cc = conservative_from_nonconservative(CoefficientField.separable([0.0, 1.0, -1.0]), CoefficientField.constant(0.0))
    assert cc.B(0.0, 0.0) == pytest.approx(-1.0)
    assert cc.B(1.0, 0.0) == pytest.approx(1.0)
    cc = conservative_from_nonconservative(CoefficientField.constant(2.0), CoefficientField.constant(0.3))
    assert cc.B(0.7, 0.1) == pytest.approx(0.3)


@pytest.mark.parametrize("k", range(5))
def test_conservative_reexpansion(k):
    # (A u')' + B u' == A u'' + b u' for u = x^(k+2)
    A = CoefficientField.separable([0.0, 0.0, 0.5, -1.0, 0.5])
    b = CoefficientField.separable([0.0, 0.3, -0.3])
    cc = conservative_from_nonconservative(A, b)
    x = np.linspace(0.0, 1.0, 21)
    m = k + 2
    u1, u2 = m * x ** (m - 1), m * (m - 1) * x ** (m - 2)
    lhs = cc.a(x, 0.0) * u1 + cc.A(x, 0.0) * u2 + cc.B(x, 0.0) * u1
    rhs = A(x, 0.0) * u2 + b(x, 0.0) * u1
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


# --- Asian ----------------------------------------------------------------------


def test_asian_reference_values():
    p = asian_problem(AsianParams(0.05, 0.05, 0.1))
    assert p.A(0.5, 0.0) == pytest.approx(7.8125e-5, rel=1e-14)
    assert p.A(0.0, 0.3) == 0.0 and p.A(1.0, 0.3) == 0.0
    assert p.C(0.0, 0.0) == pytest.approx(-0.1)
    assert p.C(1.0, 0.0) == pytest.approx(-0.05)
    assert p.B(0.0, 0.5) == 0.0 and p.B(1.0, 0.5) == 0.0
    assert p.boundary_case is BoundaryCase.NONE


def test_asian_params_validation():
    with pytest.raises(ConfigurationError):
        AsianParams(sigma=0.0)
    with pytest.raises(ConfigurationError):
        AsianParams(r=-0.1)


# --- presets and problem invariants --------------------------------------------


@pytest.mark.parametrize("name", PRESETS)
def test_presets_degenerate_at_both_ends(name):
    p = make_preset(name)
    x = np.linspace(0.0, 1.0, 1001)
    for t in (0.0, 0.5, 1.0):
        A = np.asarray(p.A(x, t))
        assert A[0] == 0.0 and A[-1] == 0.0
        assert np.all(A >= 0.0)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_have_consistent_case(name):
    p = make_preset(name)
    assert p.case_is_consistent(1.0)
    assert (p.dirichlet_left is not None) == p.boundary_case.needs_left
    assert (p.dirichlet_right is not None) == p.boundary_case.needs_right


def test_problem_rejects_missing_dirichlet():
    A = CoefficientField.separable([0.0, 1.0, -1.0])
    with pytest.raises(ConfigurationError):
        Problem(A=A, B=CoefficientField.constant(1.0), boundary_case=BoundaryCase.RIGHT)
    with pytest.raises(ConfigurationError):
        Problem(A=A, B=CoefficientField.constant(0.0), dirichlet_left=lambda t: 0.0)


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        make_preset("nope")


@pytest.mark.parametrize("name", sorted(INITIAL_PROFILES))
def test_initial_profiles_finite(name):
    v = INITIAL_PROFILES[name](np.linspace(0, 1, 33))
    assert np.all(np.isfinite(v)) and np.shape(v) == (33,)
