import json
import math

import numpy as np
import pytest

from homoflow.errors import DomainError
from homoflow.force import (BumpTestFunction, axial_term_A, b_eps_cylinder, b_eps_y_form,
                            cylinder_flux, flux_G, force_constant_b, point_force_constant,
                            stress_array, stress_integrability, stress_tensor, weak_residual)
from homoflow.field import Point, velocity_cartesian
from homoflow.profile import SolutionParams, solve_profile


@pytest.fixture(scope="module")
def weak_small(sol_small):
    return weak_residual(sol_small, BumpTestFunction())


def _sol(c3, g):
    return solve_profile(SolutionParams(0, 0, c3, g))


def test_zero_solution_constants(sol_zero):
    assert force_constant_b(sol_zero).value == 0
    assert point_force_constant(sol_zero).value == 0
    assert force_constant_b(_sol(0.1, 0.0)).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("c3", [0.0, 0.1])
def test_b_odd_in_gamma(c3):
    for f in (force_constant_b, point_force_constant):
        a, b = f(_sol(c3, 0.3)).value, f(_sol(c3, -0.3)).value
        assert a == pytest.approx(-b, abs=1e-10)


def test_slopes_at_origin():
    g = 1e-3
    assert force_constant_b(_sol(0, g)).value / g == pytest.approx(-10 / 3, rel=1e-3)
    assert point_force_constant(_sol(0, g)).value / g == pytest.approx(-4.0, rel=1e-3)


def test_constants_differ_by_weighted_integral(sol_small):
    # b - b_point = int y^2 U / (1 - y^2) dy
    from homoflow.numerics import gauss_legendre_panels, graded_breakpoints
    s, w = gauss_legendre_panels(graded_breakpoints(0.0, 1.0, 40, toward="a"), 12)
    total = 0.0
    for side in (1, -1):
        y = side * (1 - s)
        U, _, _ = sol_small.derivatives(y, s * (2 - s))
        total += float(np.sum(w * y * y * U / (s * (2 - s))))
    diff = force_constant_b(sol_small).value - point_force_constant(sol_small).value
    assert diff == pytest.approx(total, abs=1e-9)


def test_stress_tensor_symmetric_and_homogeneous(sol_small):
    pt = Point(0.3, 0.2, 0.5)
    s = velocity_cartesian(sol_small, pt)
    # div u = 0 leaves trace T = 3 p + |u|^2
    assert stress_tensor(sol_small, pt).trace == pytest.approx(3 * s.p + s.u @ s.u, abs=1e-12)
    X = np.array([[0.3, 0.2, 0.5]])
    A = stress_array(sol_small, X)[0]
    assert np.allclose(A, A.T, atol=1e-14)
    assert np.allclose(stress_array(sol_small, 3 * X)[0] * 9, A, rtol=1e-10)


def test_flux_density_identity(sol_small):
    eps = 0.05
    z = np.linspace(-1, 1, 9)
    X = np.column_stack([np.full_like(z, eps), np.zeros_like(z), z])
    T = stress_array(sol_small, X)
    lhs = T[:, 0, 2] * eps
    r2 = eps**2 + z * z
    assert np.allclose(lhs, -2 * 0.1 * z / r2 + flux_G(sol_small, eps, z), atol=1e-12)


def test_flux_G_needs_c12_zero(sol_general):
    with pytest.raises(DomainError):
        flux_G(sol_general, 0.1, 0.2)
    with pytest.raises(DomainError):
        flux_G(_sol(0.1, 0.0), 0.0, 0.2)


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_cylinder_matches_y_form(sol_small, eps):
    a = b_eps_cylinder(sol_small, eps, 1.0).value
    b = b_eps_y_form(sol_small, eps, 1.0).value
    assert a == pytest.approx(b, abs=1e-11)


def test_b_eps_converges_to_point_constant(sol_small):
    bp = point_force_constant(sol_small).value
    gaps = [abs(b_eps_y_form(sol_small, e, 1.0).value - bp) for e in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-7


def test_axial_term_even_phi_vanishes():
    phi = BumpTestFunction(tilt=0.0)
    A_eps, A_lim = axial_term_A(1e-3, 1.0, 0.1, phi.axis_derivative)
    assert A_lim == pytest.approx(0.0, abs=1e-14)
    assert A_eps == pytest.approx(0.0, abs=1e-14)
    assert axial_term_A(1e-3, 1.0, 0.0, phi.axis_derivative) == (0.0, 0.0)


def test_axial_term_converges():
    phi = BumpTestFunction()
    vals = [axial_term_A(e, 1.0, 0.1, phi.axis_derivative) for e in (1e-2, 1e-3, 1e-4)]
    lim = vals[0][1]
    gaps = [abs(a - lim) for a, _ in vals]
    assert gaps[0] > gaps[1] > gaps[2]


def test_cylinder_probe(sol_small):
    fp = cylinder_flux(sol_small, 1e-3, 1.0, BumpTestFunction())
    assert abs(fp.L1) < 1e-12 and abs(fp.L2) < 1e-12
    assert fp.L3 == pytest.approx(fp.L3_direct, abs=1e-10)
    assert fp.L3 == pytest.approx(fp.A + fp.B)
    with pytest.raises(DomainError):
        cylinder_flux(sol_small, 2.0, 1.0, BumpTestFunction())


def test_bump_function():
    phi = BumpTestFunction(coeffs=(1.0, 0.5, -0.2))
    X = np.array([[0.2, 0.1, 0.3]])
    val, grad = phi.value_and_grad(X)
    h = 1e-6
    fd = [(phi(X + h * e) - phi(X - h * e))[0] / (2 * h) for e in np.eye(3)]
    assert np.allclose(grad[0], fd, atol=1e-8)
    assert phi(np.array([[1.5, 0, 0]]))[0] == 0
    assert phi.value_at_origin == pytest.approx(math.exp(-2))
    with pytest.raises(ValueError):
        BumpTestFunction(tilt=2.0)


def test_weak_closure_point_constant(weak_small):
    assert weak_small.resolved_sign == 1
    assert weak_small.normalization == pytest.approx(2 * math.pi)
    assert weak_small.residual_F2 <= 1e-6 * weak_small.phi_scale
    assert weak_small.residual_F3 <= 1e-6 * weak_small.phi_scale
    assert abs(weak_small.weak_limits[0]) < 1e-10 and abs(weak_small.weak_limits[1]) < 1e-10


def test_weak_report_serializes(weak_small):
    d = json.loads(weak_small.to_json())
    assert {"b", "b_point", "b_eps", "residuals", "resolved_sign"} <= d.keys()
    assert d["b"] == pytest.approx(-0.1548297, abs=1e-6)
    assert d["b_point"] == pytest.approx(-0.1870094, abs=1e-6)


def test_weak_residual_validation(sol_small, sol_general):
    with pytest.raises(ValueError):
        weak_residual(sol_small, BumpTestFunction(), eps_grid=(1e-3, 1e-4))
    with pytest.raises(DomainError):
        weak_residual(sol_general, BumpTestFunction())


def test_integrability():
    sol = _sol(0.1, 0.05)
    a = stress_integrability(sol, 1.4)
    assert np.isfinite(a.value) and a.value > 0
    # homogeneity fixes the radius dependence
    b = stress_integrability(sol, 1.4, radius=2.0)
    assert b.value == pytest.approx(a.value * 2 ** (3 - 2.8), rel=1e-8)
    # finite below 3/2 but growing as q approaches it
    assert stress_integrability(sol, 1.45).value > stress_integrability(sol, 1.3).value
    for q in (1.5, 2.0):
        with pytest.raises(DomainError):
            stress_integrability(sol, q)
