import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from homoflow.errors import BlowUp, DomainError, PoleError
from homoflow.numerics import Tolerance
from homoflow.profile import (GammaBounds, ProfileSolver, SolutionParams, boundary_values, cbar3,
                              chebyshev_grid, expansion_report, gamma_bounds, profile_c0_closed_form,
                              profile_linearized, read_profile_csv, solve_profile)

small = st.floats(-0.3, 0.3)


@pytest.mark.parametrize("c1, c2, expected", [(0, 0, -4.0), (-1, -1, 0.0), (3, 0, -7.5)])
def test_cbar3(c1, c2, expected):
    assert cbar3(c1, c2) == pytest.approx(expected)


def test_cbar3_domain():
    with pytest.raises(DomainError):
        cbar3(-2, 0)


def test_membership():
    assert SolutionParams(0, 0, -3.9, 0).in_J()
    assert not SolutionParams(0, 0, -4.1, 0).in_J()
    assert not SolutionParams(-1.5, 0, 0, 0).in_J()
    assert not SolutionParams(0.1, 0, 0, 0).in_M()
    assert SolutionParams(0, 0, 0, 1.0).in_M()
    assert not SolutionParams(0, 0, 0, 2.5).in_M()


def test_zero_solution(sol_zero):
    assert sol_zero.is_zero
    assert np.all(sol_zero.values == 0)
    assert sol_zero.derivatives(np.array([0.0, 0.5]))[1].tolist() == [0.0, 0.0]


def test_closed_form_examples():
    assert profile_c0_closed_form(1.0, 0.5) == pytest.approx(0.6)
    assert profile_c0_closed_form(0.0, 0.3) == 0.0
    y = np.linspace(-1, 1, 11)
    assert np.allclose(profile_c0_closed_form(2.0, y), 2 * (1 - y))
    assert profile_c0_closed_form(2.0, -1.0) == pytest.approx(4.0)
    with pytest.raises(PoleError):
        profile_c0_closed_form(4.0, -0.5)
    with pytest.raises(DomainError):
        profile_c0_closed_form(1.0, 1.5)


def test_linearized_examples():
    assert profile_linearized(0.3, 0.2, 0.0) == pytest.approx(0.2)
    # the c3 coefficient (not c3/2) is what solves the equation without U^2/2
    assert profile_linearized(0.1, 0.05, 0.5) == pytest.approx(0.75 * (0.05 + 0.1 * math.atanh(0.5)))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.99, 0.99))
def test_linearized_odd_symmetry(c3, g, y):
    assert profile_linearized(c3, g, y) == pytest.approx(-profile_linearized(c3, -g, -y), abs=1e-14)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.95, 0.95))
def test_linearized_solves_dropped_equation(c3, g, y):
    # (1 - y^2) U' + 2 y U = c3 (1 - y^2)
    h = 1e-6
    U = profile_linearized(c3, g, y)
    dU = (profile_linearized(c3, g, y + h) - profile_linearized(c3, g, y - h)) / (2 * h)
    assert (1 - y * y) * dU + 2 * y * U == pytest.approx(c3 * (1 - y * y), abs=1e-7)


def test_closed_form_match_fine_grid():
    y = np.linspace(-1 + 1e-9, 1 - 1e-9, 2001)
    for g in (-1.5, 0.5, 1.9):
        sol = solve_profile(SolutionParams(0, 0, 0, g))
        assert np.max(np.abs(sol.u_at(y) - profile_c0_closed_form(g, y))) < 1e-8


def test_derivative_example():
    sol = solve_profile(SolutionParams(0, 0, 0, 1.0))
    U, dU, d2U = sol.derivatives(np.array([0.0]))
    assert (U[0], dU[0], d2U[0]) == pytest.approx((1.0, -0.5, -1.5), abs=1e-9)
    # second derivative against a difference quotient of the closed form
    y = np.array([0.3, -0.7])
    h = 1e-4
    f = lambda t: profile_c0_closed_form(1.0, t)
    fd2 = (f(y + h) - 2 * f(y) + f(y - h)) / h**2
    assert np.allclose(sol.derivatives(y)[2], fd2, atol=1e-6)


@given(small, small, small, st.floats(-0.5, 0.5))
@settings(max_examples=8, deadline=None)
def test_derivative_at_zero(c1, c2, c3, g):
    sol = solve_profile(SolutionParams(c1, c2, c3, g), grid_size=9, check_bounds=False)
    dU = sol.derivatives(np.array([0.0]))[1][0]
    assert dU == pytest.approx(c1 + c2 + c3 - g * g / 2, abs=1e-12)


@given(small, small, small, st.floats(-0.5, 0.5))
@settings(max_examples=8, deadline=None)
def test_reflection_symmetry(c1, c2, c3, g):
    # U(y; c1, c2, c3, g) = -U(-y; c2, c1, c3, -g)
    a = solve_profile(SolutionParams(c1, c2, c3, g), grid_size=9, check_bounds=False)
    b = solve_profile(SolutionParams(c2, c1, c3, -g), grid_size=9, check_bounds=False)
    y = np.linspace(-0.999, 0.999, 41)
    assert np.max(np.abs(a.u_at(y) + b.u_at(-y))) < 1e-12


def test_ode_residual_small(sol_small, sol_general):
    y = np.linspace(-0.99, 0.99, 199)
    for sol in (sol_small, sol_general):
        U = sol.u_at(y)
        h = 1e-5
        dU = (sol.u_at(y + h) - sol.u_at(y - h)) / (2 * h)
        p = sol.params
        res = (1 - y * y) * dU + 2 * y * U + 0.5 * U * U - p.rhs(y)
        assert np.max(np.abs(res)) < 1e-7


def test_linearized_agreement_quadratic():
    # U - U_lin = O(K^2): halving the parameters divides the gap by about 4
    y = np.linspace(-0.95, 0.95, 39)
    gaps = []
    for k in (1.0, 0.5):
        p = SolutionParams(0, 0, 0.1 * k, 0.05 * k)
        gaps.append(np.max(np.abs(solve_profile(p).u_at(y) - profile_linearized(p.c3, p.gamma, y))))
    assert 3.0 < gaps[0] / gaps[1] < 5.0


def test_linearized_spec_point(sol_small):
    assert sol_small.u_at(np.array([0.5]))[0] == pytest.approx(0.0787, abs=0.01)


def test_pole_values_generic(sol_small, sol_general):
    assert sol_small.endpoint_values == pytest.approx((0.0, 0.0), abs=1e-12)
    left, right = sol_general.endpoint_values
    assert left == pytest.approx(2 - 2 * math.sqrt(1.3), abs=1e-10)
    assert right == pytest.approx(-2 + 2 * math.sqrt(0.8), abs=1e-10)
    # continuity into the expansion region
    assert sol_general.u_at(np.array([-1 + 1e-9]))[0] == pytest.approx(left, abs=1e-6)


def test_special_branch_at_gamma_plus():
    sol = solve_profile(SolutionParams(0, 0, 0, 2.0))
    assert sol.endpoint_values[0] == pytest.approx(4.0, abs=1e-8)


def test_boundary_value_table():
    gb = GammaBounds(-2.0, 2.0, (0.0, 0.0, 0.0), Tolerance(1e-12, 1e-10))
    assert boundary_values(SolutionParams(0, 0, 0, 0.5), gb) == (0.0, 0.0)
    assert boundary_values(SolutionParams(0, 0, 0, 2.0), gb)[0] == 4.0
    gb3 = GammaBounds(-2.8, 3.4, (3.0, 0.0, 0.0), Tolerance(1e-12, 1e-10))
    assert boundary_values(SolutionParams(3, 0, 0, 3.4), gb3)[0] == 6.0
    with pytest.raises(DomainError):
        boundary_values(SolutionParams(0, 0, 0, 2.5), gb)


def test_gamma_bounds_zero():
    gb = gamma_bounds((0, 0, 0))
    assert gb.gamma_minus == pytest.approx(-2, abs=1e-8)
    assert gb.gamma_plus == pytest.approx(2, abs=1e-8)


def test_gamma_bounds_small_c3_straddle_zero():
    gb = gamma_bounds((0, 0, 0.2))
    assert gb.gamma_minus < 0 < gb.gamma_plus


def test_gamma_bounds_at_cbar3():
    gb = gamma_bounds((0, 0, -4.0))
    assert gb.gap == pytest.approx(0.0, abs=1e-4)


def test_gamma_bounds_outside_J():
    with pytest.raises(DomainError):
        gamma_bounds((0, 0, -5.0))


def test_blow_up_outside_range():
    with pytest.raises(BlowUp) as info:
        solve_profile(SolutionParams(0, 0, 0, 3.0))
    assert info.value.gamma == 3.0


def test_solve_outside_J():
    with pytest.raises(DomainError):
        solve_profile(SolutionParams(-2, 0, 0, 0))


def test_chebyshev_grid():
    g = chebyshev_grid(9)
    assert g[4] == 0.0 and np.all(np.diff(g) > 0) and np.all(np.abs(g) < 1)


def test_csv_round_trip(sol_small):
    buf = io.StringIO()
    sol_small.to_csv(buf, {"note": "x"})
    head, arr = read_profile_csv(io.StringIO(buf.getvalue()))
    assert head["params"]["c3"] == 0.1 and head["note"] == "x"
    assert np.array_equal(arr, sol_small.table())


def test_expansion_report_zero(sol_zero):
    r = expansion_report(sol_zero)
    assert (r.ratio_U, r.ratio_dU, r.ratio_d2U) == (0.0, 0.0, 0.0)


def test_expansion_report_comparable():
    a = expansion_report(solve_profile(SolutionParams(0, 0, 0.05, 0.02)))
    b = expansion_report(solve_profile(SolutionParams(0, 0, 0.1, 0.04)))
    for x, y in zip(a.as_dict().values(), b.as_dict().values()):
        if isinstance(x, float):
            assert np.isfinite(x) and np.isfinite(y)
            assert 0.25 <= x / y <= 4


def test_expansion_report_requires_M():
    sol = solve_profile(SolutionParams(0.1, 0, 0, 0), grid_size=9)
    with pytest.raises(DomainError):
        expansion_report(sol)


def test_estimator_api():
    est = ProfileSolver(c3=0.1, gamma=0.05, grid_size=33)
    params = est.get_params()
    assert params["c3"] == 0.1 and params["grid_size"] == 33
    y = np.array([[-0.5], [0.0], [0.5]])
    U = est.fit().predict(y)
    assert U[1] == pytest.approx(0.05, abs=1e-14)
    cols = clone(est).fit().transform(y)
    assert cols.shape == (3, 3) and np.allclose(cols[:, 0], U)
    with pytest.raises(ValueError):
        est.predict(np.array([np.nan]))
