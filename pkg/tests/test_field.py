import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homoflow.errors import AxisError, DomainError
from homoflow.field import (FieldSampler, Point, eval_profile_derivs, gradient_array, pressure,
                            singular_bound_report, velocity_array, velocity_cartesian,
                            velocity_gradient, write_field_csv)
from homoflow.force import stress_array
from homoflow.profile import SolutionParams, solve_profile

coord = st.floats(-2, 2).filter(lambda v: abs(v) > 0.05)


@pytest.fixture(scope="module")
def sol_one():
    return solve_profile(SolutionParams(0, 0, 0, 1.0))


def test_example_point(sol_one):
    s = velocity_cartesian(sol_one, Point(1, 0, 0))
    assert s.u == pytest.approx([-0.5, 0.0, -1.0], abs=1e-12)
    assert s.p == pytest.approx(-1.0, abs=1e-12)
    assert (s.u_r, s.u_theta) == pytest.approx((-0.5, 1.0), abs=1e-12)
    assert pressure(sol_one, Point(1, 0, 0)) == pytest.approx(-1.0, abs=1e-12)


def test_eval_profile_derivs(sol_one):
    assert eval_profile_derivs(sol_one, 0.0) == pytest.approx((1.0, -0.5, -1.5), abs=1e-9)
    with pytest.raises(DomainError):
        eval_profile_derivs(sol_one, 1.0)


def test_spherical_components_consistent(sol_general):
    pt = Point(0.4, -0.3, 0.7)
    s = velocity_cartesian(sol_general, pt)
    er, et, ephi = pt.spherical_frame()
    assert s.u @ er == pytest.approx(s.u_r, abs=1e-12)
    assert s.u @ et == pytest.approx(s.u_theta, abs=1e-12)
    assert s.u @ ephi == pytest.approx(0.0, abs=1e-12)


@given(coord, coord, coord, st.floats(0.1, 10))
@settings(max_examples=30, deadline=None)
def test_homogeneity(sol_general, x1, x2, x3, lam):
    X = np.array([[x1, x2, x3]])
    u, p = velocity_array(sol_general, X)
    ul, pl = velocity_array(sol_general, lam * X)
    assert np.allclose(ul * lam, u, rtol=1e-10, atol=1e-13)
    assert pl * lam**2 == pytest.approx(p[0], rel=1e-10, abs=1e-13)
    G, Gl = gradient_array(sol_general, X), gradient_array(sol_general, lam * X)
    assert np.allclose(Gl * lam**2, G, rtol=1e-9, atol=1e-12)


@given(coord, coord, coord)
@settings(max_examples=30, deadline=None)
def test_axisymmetry(sol_general, x1, x2, x3):
    a = 0.7
    Q = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    X = np.array([x1, x2, x3])
    u, p = velocity_array(sol_general, X)
    uq, pq = velocity_array(sol_general, Q @ X)
    assert np.allclose(uq[0], Q @ u[0], atol=1e-12)
    assert pq[0] == pytest.approx(p[0], abs=1e-12)


def _fd_gradient(sol, x, h):
    G = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        G[:, j] = (velocity_array(sol, x + e)[0][0] - velocity_array(sol, x - e)[0][0]) / (2 * h)
    return G


def test_gradient_matches_finite_differences(sol_general):
    x = np.array([0.6, 0.2, -0.5])
    G = velocity_gradient(sol_general, Point(*x)).grad
    errs = [np.max(np.abs(_fd_gradient(sol_general, x, h) - G)) for h in (2e-3, 1e-3)]
    assert errs[1] < 1e-5, errs
    # second-order convergence of the central difference
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_trace_free(sol_general, sol_small):
    for sol in (sol_general, sol_small):
        assert abs(velocity_gradient(sol, Point(1, 0.3, 0.2)).trace) < 1e-9
    X = np.random.default_rng(1).normal(size=(200, 3))
    assert np.max(np.abs(np.trace(gradient_array(sol_general, X), axis1=1, axis2=2))) < 1e-9


@pytest.mark.parametrize("name", ["sol_small", "sol_general"])
def test_stress_divergence_free(name, request):
    sol = request.getfixturevalue(name)
    h = 1e-4
    for x in (np.array([0.5, 0.3, 0.4]), np.array([-0.2, 0.7, -0.9])):
        div = np.zeros(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            Tp, Tm = stress_array(sol, x + e)[0], stress_array(sol, x - e)[0]
            div += (Tp[:, j] - Tm[:, j]) / (2 * h)
        assert np.max(np.abs(div)) < 1e-6


def test_axis_and_origin(sol_small):
    with pytest.raises(AxisError):
        velocity_array(sol_small, [0.0, 0.0, 1.0])
    with pytest.raises(AxisError):
        gradient_array(sol_small, [1e-14, 0.0, 1.0])
    with pytest.raises(DomainError):
        velocity_array(sol_small, [0.0, 0.0, 0.0])
    # just outside the floor is fine and finite
    u, p = velocity_array(sol_small, [1e-10, 0.0, 1.0])
    assert np.all(np.isfinite(u)) and np.isfinite(p[0])


def test_singular_bounds_stable(sol_small):
    ratios = []
    for k in range(2, 7):
        rho = 10.0 ** -k
        X = np.array([[rho, 0.0, 1.0], [0.0, rho, -1.0], [rho, rho, 0.5]])
        ratios.append(singular_bound_report(sol_small, X).as_dict())
    for key in ("ratio_u_theta", "ratio_u_r"):
        vals = np.array([r[key] for r in ratios])
        assert np.all(np.isfinite(vals)) and vals.max() < 2 * vals.min()
    # the gradient remainder is bounded and shrinks toward the axis
    grad = np.array([r["ratio_grad"] for r in ratios])
    assert np.all(np.isfinite(grad)) and np.all(np.diff(grad) < 0)


def test_singular_bounds_scale_invariant(sol_small):
    X = np.array([[1e-4, 0.0, 1.0], [2e-3, 1e-3, -0.7]])
    a = singular_bound_report(sol_small, X).as_dict()
    b = singular_bound_report(sol_small, 7.0 * X).as_dict()
    for key in ("ratio_u_theta", "ratio_u_r", "ratio_grad"):
        assert b[key] == pytest.approx(a[key], rel=1e-8)


def test_singular_bounds_zero_and_domain(sol_zero):
    r = singular_bound_report(sol_zero, [[0.1, 0, 1]])
    assert r.ratio_grad == 0 and r.n_samples == 1
    sol = solve_profile(SolutionParams(0.1, 0, 0, 0), grid_size=9)
    with pytest.raises(DomainError):
        singular_bound_report(sol, [[0.1, 0, 1]])


def test_sampler_and_csv(sol_general):
    X = np.array([[1.0, 0.0, 0.0], [0.3, 0.4, -0.5]])
    out = FieldSampler(solution=sol_general).fit().transform(X)
    u, p = velocity_array(sol_general, X)
    assert np.array_equal(out, np.column_stack([u, p]))
    G = FieldSampler(solution=sol_general).fit().gradient(X)
    assert G.shape == (2, 3, 3)
    buf = io.StringIO()
    write_field_csv(buf, X, u, p, header="h")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# h" and lines[1].startswith("x1,")
    assert float(lines[2].split(",")[3]) == u[0, 0]
    with pytest.raises(ValueError):
        FieldSampler(solution=sol_general).fit().transform([[1.0, 2.0]])
