import math
import warnings

import numpy as np
import pytest

from degenpara._compat import HAVE_NUMBA
from degenpara import AsianParams, BoundaryCase, CoefficientField, Grid, Problem, make_preset
from degenpara.coefficients import PRESETS, asian_problem
from degenpara.errors import ConfigurationError, SolverError, StabilityError
from degenpara.scheme import (
    StepSystem,
    assemble_step,
    check_stability,
    l2_growth_rate,
    operator_bands,
    solve,
    step,
)
from degenpara.grid import norms

from oracles import dense_solve, dense_step, random_instance

X1MX = CoefficientField.separable([0.0, 1.0, -1.0])
ZERO = CoefficientField.constant(0.0)


# --- stability report ---------------------------------------------------------


def test_asian_stability_conditions():
    rep = check_stability(asian_problem(), Grid(100, 100))
    assert rep.case_ok and rep.cond_left and rep.cond_right and rep.dt_ok and rep.ok


def test_outflow_condition_compares_against_a_over_7():
    # a(0) = 1, so B(0) = 0.2 >= 1/7 passes and 0.1 fails
    for b, expected in ((0.2, True), (0.1, False)):
        B = CoefficientField.constant(b)
        p = Problem(A=X1MX, B=B, boundary_case=BoundaryCase.RIGHT, dirichlet_right=lambda t: 0.0)
        assert check_stability(p, Grid(16, 16)).cond_left is expected


def test_pure_ode_has_no_time_step_limit():
    p = Problem(A=ZERO, B=ZERO, C=CoefficientField.constant(-1.0))
    rep = check_stability(p, Grid(8, 1))
    assert rep.c2 == rep.c3 == rep.c4 == 0.0
    assert math.isinf(rep.dt_max) and rep.dt_ok


def test_case_mismatch_reported():
    p = Problem(A=X1MX, B=CoefficientField.constant(-0.5))
    rep = check_stability(p, Grid(16, 16))
    assert not rep.case_ok and not rep.ok and rep.messages


def test_large_time_step_refused():
    rep = check_stability(make_preset("pure-diffusion"), Grid(16, 1, T=5.0))
    assert not rep.dt_ok
    with pytest.raises(StabilityError) as info:
        solve(make_preset("pure-diffusion"), Grid(16, 1, T=5.0))
    assert info.value.report is not None


def test_non_strict_mode_warns():
    with pytest.warns(RuntimeWarning):
        s = solve(make_preset("pure-diffusion"), Grid(16, 1, T=5.0), strict=False)
    assert s.warnings


# --- assembly -----------------------------------------------------------------


def test_interior_rows_without_advection_are_pure_diffusion(backend):
    p = Problem(A=X1MX, B=ZERO, boundary_case=BoundaryCase.NONE)
    g = Grid(16, 16)
    L = operator_bands(p, g, 0, backend=backend)
    # the rows of L sum to zero in the interior: flux telescoping of the conservative stencil
    assert np.max(np.abs(L[:, 1:-1].sum(axis=0))) < 1e-12
    sys = assemble_step(p, g, 0, np.ones(17), backend)
    dense = sys.dense()
    assert np.allclose(dense[1:-1].sum(axis=1), 1 / g.dt)
    assert np.allclose(sys.rhs[1:-1], 1 / g.dt)


def test_upwind_rows_reach_two_nodes_forward(backend):
    p = asian_problem(AsianParams(sigma=0.05, r=0.01, d0=0.1))  # b = 0.09 x(1-x) >= 0 near 0
    g = Grid(64, 64)
    L = operator_bands(p, g, 0, backend=backend)
    th = g.theta()
    j = 5
    assert th[j] == 1.0 and p.B(g.x[j], 0.0) > 0
    assert L[4, j] != 0.0 and L[0, j] == 0.0


def test_central_fallback_at_last_interior_node(backend):
    J = 5
    g = Grid(J, 2, lam=2 / J)
    th = np.ones(J + 1)
    B = CoefficientField.constant(1.0)
    p = Problem(A=X1MX, B=B, boundary_case=BoundaryCase.RIGHT, dirichlet_right=lambda t: 0.0)
    L = operator_bands(p, g, 0, theta=th, backend=backend)
    assert L[4, J - 1] == 0.0  # would reference x_{J+1}


@pytest.mark.parametrize("seed", range(12))
def test_assembly_matches_dense_oracle(seed, backend):
    p, g = random_instance(seed, 5 + seed % 4)
    u = p.initial(g.x)
    sys = assemble_step(p, g, 1, u, backend)
    M, rhs = dense_step(p, g, 1, u)
    scale = np.max(np.abs(M))
    assert np.max(np.abs(sys.dense() - M)) <= 1e-14 * scale
    assert np.max(np.abs(sys.rhs - rhs)) <= 1e-14 * max(1.0, np.max(np.abs(rhs)))


def test_assemble_step_errors():
    p = make_preset("asian")
    g = Grid(16, 4)
    with pytest.raises(IndexError):
        assemble_step(p, g, 4, np.zeros(17))
    with pytest.raises(ValueError):
        assemble_step(p, g, 0, np.zeros(5))


# --- step ---------------------------------------------------------------------


def test_identity_system_keeps_data(backend):
    p = Problem(A=ZERO, B=ZERO, f=np.cos)
    # dt = 1/4 makes scaling by 1/dt exact
    g = Grid(8, 4)
    u0 = p.initial(g.x)
    out = step(assemble_step(p, g, 0, u0, backend), backend)
    np.testing.assert_array_equal(out.values, u0)
    g = Grid(8, 3)
    out = step(assemble_step(p, g, 0, u0, backend), backend)
    np.testing.assert_array_max_ulp(out.values, u0, maxulp=1)


def test_scalar_boundary_row_is_crank_nicolson(backend):
    r = 0.3
    p = Problem(A=ZERO, B=ZERO, C=CoefficientField.constant(-r), f=lambda x: 1.0 + x)
    g = Grid(8, 4)
    out = step(assemble_step(p, g, 0, p.initial(g.x), backend), backend)
    factor = (1 - r * g.dt / 2) / (1 + r * g.dt / 2)
    assert out.values[0] == pytest.approx(1.0 * factor, rel=1e-14)
    assert out.values[-1] == pytest.approx(2.0 * factor, rel=1e-14)


def test_step_reports_singular_system(backend):
    bands = np.zeros((5, 5))
    bands[2] = [1.0, 1.0, 0.0, 1.0, 1.0]
    with pytest.raises(SolverError) as info:
        step(StepSystem(bands, np.ones(5), 7), backend)
    assert info.value.step == 7


# --- solve --------------------------------------------------------------------


def test_zero_data_stays_zero(backend):
    for name in ("asian", "advection-right", "two-sided"):
        p = make_preset(name, "zero")
        if p.boundary_case is not BoundaryCase.NONE:
            p = Problem(A=p.A, B=p.B, C=p.C, a=p.a, boundary_case=p.boundary_case,
                        dirichlet_left=(lambda t: 0.0) if p.boundary_case.needs_left else None,
                        dirichlet_right=(lambda t: 0.0) if p.boundary_case.needs_right else None)
        s = solve(p, Grid(32, 32), backend=backend)
        assert np.all(s.u == 0.0)


def test_asian_boundary_traces(backend):
    s = solve(asian_problem(), Grid(100, 100), backend=backend)
    assert np.all(s.u[:, 0] == 0.0)
    t = s.grid.t
    assert np.max(np.abs(s.u[:, -1] - np.tanh(1.0) * np.exp(-0.05 * t))) <= 1e-6


def test_solution_is_read_only():
    s = solve(asian_problem(), Grid(16, 4))
    with pytest.raises(ValueError):
        s.u[0, 0] = 1.0
    assert s.row(0).values[3] == pytest.approx(np.tanh(3 / 16))


def test_non_finite_initial_data():
    p = Problem(A=X1MX, B=ZERO, f=lambda x: np.where(x > 0.5, np.inf, 0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(SolverError) as info:
            solve(p, Grid(8, 2), strict=False)
    assert info.value.node == 5


@pytest.mark.parametrize("seed", range(4))
def test_solve_matches_dense_march(seed, backend):
    p, g = random_instance(seed, 6 + seed % 3, N=4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        s = solve(p, g, strict=False, backend=backend)
    ref = dense_solve(p, g)
    assert np.max(np.abs(s.u - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backends_agree_on_asian():
    g = Grid(64, 64)
    a = solve(asian_problem(), g, backend="numpy").u
    b = solve(asian_problem(), g, backend="numba").u
    assert np.max(np.abs(a - b)) < 1e-13


@pytest.mark.parametrize("name", PRESETS)
def test_l2_stability_bound(name):
    p = make_preset(name)
    g = Grid(64, 64)
    s = solve(p, g)
    nrm = norms(s.u, g.dx)
    K = l2_growth_rate(p, g)
    if p.boundary_case is BoundaryCase.NONE:
        assert np.max(nrm) <= (1 + 1e-6) * nrm[0] * math.exp(K * g.T)
    else:
        # with inflow data the bound also carries the boundary values
        assert np.all(np.isfinite(nrm))


def test_conservation_without_advection():
    A = CoefficientField.separable([0.0, 0.0, 1.0, -2.0, 1.0])
    p = Problem(A=A, B=ZERO, a=CoefficientField.separable([0.0, 2.0, -6.0, 4.0]), f=lambda x: np.sin(np.pi * x) ** 2)
    drifts = []
    for J in (32, 64):
        g = Grid(J, J)
        s = solve(p, g)
        mass = s.u.sum(axis=1) * g.dx
        drifts.append(np.max(np.abs(mass - mass[0])))
    assert drifts[1] < drifts[0] or drifts[1] < 1e-12
    assert drifts[0] < 1e-2


def test_gradient_ratio_from_stability_estimate():
    p = make_preset("asian")
    g = Grid(100, 100)
    s = solve(p, g)
    c5 = s.stability.c5_estimate
    g2 = (np.diff(s.u, axis=1) ** 2).sum(axis=1) / g.dx
    ratio = (1 + c5 * g.dt) / (1 - c5 * g.dt)
    assert np.all(g2[1:] <= ratio * g2[:-1] * (1 + 1e-12))


def test_assemble_rejects_missing_dirichlet_after_mutation():
    p = make_preset("advection-right")
    object.__setattr__(p, "dirichlet_right", None)
    with pytest.raises(ConfigurationError):
        assemble_step(p, Grid(16, 4), 0, np.zeros(17))
