import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from homoflow.errors import CFLViolation, DomainError, MismatchedHistories, NonFiniteState
from homoflow.evolve import (DomainSpec, EnergyHistory, ShellModel, arakawa, decay_compare,
                             energy_inequality_check, history_json, init_perturbation, run, step)
from homoflow.profile import SolutionParams

SPEC = DomainSpec(n_r=16, n_theta=24)
ZERO = SolutionParams(0, 0, 0, 0)


@pytest.fixture(scope="module")
def model0():
    return ShellModel(SPEC)


@pytest.fixture(scope="module")
def model_bg(sol_small):
    return ShellModel(SPEC, sol_small)


def test_domain_validation():
    for kw in (dict(r_min=0.0), dict(r_min=2.0, r_max=1.0), dict(theta_min=0.0), dict(n_r=2)):
        with pytest.raises(DomainError):
            DomainSpec(**kw)
    assert SPEC.refined().n_theta == 48


def test_stiffness_symmetric_positive(model0):
    A = model0.A.toarray()
    assert np.allclose(A, A.T, atol=1e-14)
    assert np.linalg.eigvalsh(A).min() > 0
    S = model0.S.toarray()
    assert np.allclose(S, S.T, atol=1e-10 * np.abs(S).max())


grid = arrays(np.float64, (6, 7), elements=st.floats(-1, 1))


@given(grid, grid)
def test_arakawa_antisymmetric(a, b):
    assert np.allclose(arakawa(a, b, 0.3, 0.2), -arakawa(b, a, 0.3, 0.2), atol=1e-12)
    assert np.allclose(arakawa(a, a, 0.3, 0.2), 0.0, atol=1e-12)


def test_arakawa_exact_on_polynomials():
    x, y = np.meshgrid(np.arange(8) * 0.1, np.arange(9) * 0.2, indexing="ij")
    assert np.allclose(arakawa(x, y, 0.1, 0.2), 1.0)
    assert np.allclose(arakawa(x * x, y, 0.1, 0.2), 2 * x[1:-1, 1:-1])



def test_arakawa_second_order():
    errs = []
    for n in (40, 80):
        h = 1.0 / n
        x, y = np.meshgrid(np.arange(n + 1) * h, np.arange(n + 1) * h, indexing="ij")
        J = arakawa(np.sin(x + 2 * y), np.cos(x * y), h, h)
        xi, yi = x[1:-1, 1:-1], y[1:-1, 1:-1]
        exact = np.cos(xi + 2 * yi) * (-xi * np.sin(xi * yi)) - 2 * np.cos(xi + 2 * yi) * (-yi * np.sin(xi * yi))
        errs.append(np.max(np.abs(J - exact)))
    assert 3.5 < errs[0] / errs[1] < 4.5


@given(arrays(np.float64, (8, 9), elements=st.floats(-1, 1)), arrays(np.float64, (8, 9), elements=st.floats(-1, 1)))
@settings(max_examples=30)
def test_arakawa_conserves_energy(p, z):
    # with p = 0 on the boundary ring, sum p J(p, z) vanishes
    p = p.copy()
    p[0], p[-1], p[:, 0], p[:, -1] = 0, 0, 0, 0
    p[1], p[-2], p[:, 1], p[:, -2] = 0, 0, 0, 0
    assert abs(np.sum(p[1:-1, 1:-1] * arakawa(p, z, 0.1, 0.2))) < 1e-9


def test_viscous_energy_identity(model0):
    # dE/dt = -2 D for A psi_t = -S psi
    st0 = init_perturbation(model0, "random", 1.0, seed=3)
    dq, psi = model0.rhs(st0.q, True)
    dE = 2 * 2 * math.pi * float(psi @ dq)
    assert dE == pytest.approx(-2 * st0.dissipation, rel=1e-10)


def test_self_advection_conserves_energy(model_bg):
    st0 = init_perturbation(model_bg, "random", 1.0, seed=3, linearized=False)
    nl, psi = model_bg.rhs(st0.q, False)
    lin, _ = model_bg.rhs(st0.q, True)
    # the quadratic term alone leaves E unchanged; the background terms may not
    assert abs(psi @ (nl - lin)) < 1e-12 * np.abs(psi).max() * np.abs(nl - lin).sum()
    assert np.abs(nl - lin).max() > 0


def test_init_normalization(model0):
    for kind in ("eigenmode", "random"):
        st0 = init_perturbation(model0, kind, 0.7, seed=1)
        assert st0.energy == pytest.approx(0.49, rel=1e-12)
    z = init_perturbation(model0, "random", 0.0)
    assert z.energy == 0 and np.all(z.psi == 0)
    with pytest.raises(DomainError):
        init_perturbation(model0, "random", -1.0)
    with pytest.raises(DomainError):
        init_perturbation(model0, "sawtooth", 1.0)


def test_psi_vanishes_on_walls(model0):
    P = init_perturbation(model0, "random", 1.0, seed=2).psi
    assert np.all(P[0] == 0) and np.all(P[-1] == 0) and np.all(P[:, 0] == 0) and np.all(P[:, -1] == 0)


def test_eigenmode_decay():
    hist, _ = run(SPEC, ZERO, "eigenmode", 1.0, t_end=0.02, n_samples=10, cfl=0.05)
    model = ShellModel(SPEC)
    lam = model.eigenmodes(1)[0][0]
    exact = np.exp(-2 * lam * np.asarray(hist.t))
    assert np.max(np.abs(np.asarray(hist.E) / exact - 1)) < 1e-4
    # the dissipation of a mode is lambda times its energy
    assert hist.D[0] == pytest.approx(lam * hist.E[0], rel=1e-8)


def test_amplitude_scaling():
    h1, _ = run(SPEC, ZERO, "random", 1.0, t_end=0.01, n_samples=5)
    h2, _ = run(SPEC, ZERO, "random", 2.0, t_end=0.01, n_samples=5)
    assert np.allclose(h2.E, 4 * np.asarray(h1.E), rtol=1e-10)


def test_zero_state_stays_zero():
    h, state = run(SPEC, ZERO, "random", 0.0, t_end=0.01, n_samples=5)
    assert max(h.E) == 0 and np.all(state.q == 0)
    assert energy_inequality_check(h).violation == 0


def test_run_deterministic(sol_small):
    kw = dict(t_end=0.005, n_samples=5, certificate=0.01, background=sol_small, linearized=False)
    a = run(SPEC, sol_small.params, "random", 1.0, seed=2, **kw)[0]
    b = run(SPEC, sol_small.params, "random", 1.0, seed=2, **kw)[0]
    assert a.E == b.E and a.D == b.D


def test_nonlinear_run_dissipative(sol_small):
    h, state = run(SPEC, sol_small.params, "random", 1.0, t_end=0.01, n_samples=10,
                   certificate=0.01, background=sol_small, linearized=False)
    assert np.all(np.diff(h.E) < 0)
    rep = energy_inequality_check(h)
    assert rep.violation <= 1e-3
    assert np.max(np.abs(state.divergence())) < 1e-12


def test_certificate_required(sol_small):
    with pytest.raises(DomainError):
        run(SPEC, sol_small.params, certificate=0.6, background=sol_small)
    with pytest.raises(DomainError):
        run(SPEC, ZERO, t_end=0.0)


def test_cfl_violation(model0):
    st0 = init_perturbation(model0, "random", 1.0)
    bound = model0.dt_bound(st0.psi_interior)
    assert step(st0, 0.5 * bound).t == pytest.approx(0.5 * bound)
    with pytest.raises(CFLViolation):
        step(st0, 1.5 * bound)


def test_history_round_trip_and_json():
    h, state = run(SPEC, ZERO, "random", 1.0, t_end=0.005, n_samples=4)
    buf = io.StringIO()
    h.to_csv(buf)
    back = EnergyHistory.from_csv(io.StringIO(buf.getvalue()))
    assert back.t == h.t and back.E == h.E and back.D == h.D
    assert set(json.loads(history_json(h))) == {"t", "E", "D", "meta"}
    out = io.StringIO()
    state.to_csv(out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "r,theta,psi,omega" and len(lines) == 1 + 17 * 25


def test_history_validation():
    with pytest.raises(NonFiniteState):
        EnergyHistory([0.0], [math.nan], [0.0])
    with pytest.raises(NonFiniteState):
        EnergyHistory([0.0], [-1.0], [0.0])
    with pytest.raises(DomainError):
        energy_inequality_check(EnergyHistory([], [], []))


def test_inequality_detects_growth():
    h = EnergyHistory([0.0, 1.0], [1.0, 2.0], [0.0, 0.0])
    assert energy_inequality_check(h).violation == pytest.approx(1.0)


def test_decay_compare():
    a = EnergyHistory([0.0, 1.0], [1.0, 0.5], [0.1, 0.1])
    assert decay_compare(a, a).sup_ratio == 1.0
    b = EnergyHistory([0.0, 1.0], [1.0, 0.25], [0.1, 0.1])
    r = decay_compare(a, b)
    assert (r.sup_ratio, r.final_ratio) == (2.0, 2.0)
    with pytest.raises(MismatchedHistories):
        decay_compare(a, EnergyHistory([0.0, 2.0], [1.0, 0.5], [0.1, 0.1]))
    with pytest.raises(MismatchedHistories):
        decay_compare(a, EnergyHistory([0.0, 1.0], [2.0, 0.5], [0.1, 0.1]))
