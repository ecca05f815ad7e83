"""Axisymmetric perturbation dynamics around a stationary solution on a spherical shell.

The perturbation ``w`` is axisymmetric without swirl, so it is described by a
Stokes stream function ``psi(r, theta)``:

    w = curl(psi / rho e_phi),   omega = -E^2 psi / rho,   zeta = omega / rho,

with ``E^2 = d_rr + (sin(theta) / r^2) d_theta((1 / sin(theta)) d_theta)``.
The domain is ``r_min <= r <= r_max``, ``theta_min <= theta <= pi - theta_min``
(the singular axis is cut out) with no-slip walls.

Discretization on the uniform ``(r, theta)`` node grid:

* ``A``: the symmetric stiffness of ``int (psi_r^2 + psi_theta^2 / r^2) / sin(theta)``
  on interior nodes, so ``E_h = 2 pi psi^T A psi`` is the kinetic energy
  ``||w||_2^2`` and ``A psi = M omega`` with ``M = r dr dtheta``.
* ``B``: ``psi -> omega`` on all nodes; interior rows are ``M^-1 A`` and wall
  rows are Thom's closure ``-2 psi_1 / (h_n^2 rho)`` (a mirrored ghost node).
* ``D_h = 2 pi omega^T W omega`` with trapezoid weights ``W`` in the measure
  ``rho r dr dtheta``; for no-slip fields this is ``||grad w||_2^2``.
* Viscous part: ``A psi_t = -B^T W B psi``, the exact gradient flow of ``D_h``
  in the energy metric, hence ``dE_h/dt = -2 D_h`` before time stepping.
* Advection: ``q = M omega`` moves by ``dr dtheta J(psi_tot, zeta_tot)``
  with Arakawa's Jacobian in ``(r, theta)``; its antisymmetry makes the
  self-interaction and ``J(psi, Z)`` exactly energy neutral, leaving only the
  physical coupling ``J(Psi, zeta)`` with the background.

The background enters through ``Psi = -r U(cos theta)`` and
``Z = U''(cos theta) / r^3``.  Time stepping is Heun's method on ``q``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from .errors import CFLViolation, DomainError, MismatchedHistories, NonFiniteState
from .profile import ProfileSolution, SolutionParams, solve_profile

__all__ = [
    "DomainSpec",
    "ShellModel",
    "PerturbationState",
    "EnergyHistory",
    "InequalityReport",
    "DecayReport",
    "init_perturbation",
    "step",
    "run",
    "energy_inequality_check",
    "decay_compare",
    "arakawa",
]


@dataclass(frozen=True)
class DomainSpec:
    r_min: float = 1.0
    r_max: float = 2.0
    theta_min: float = 0.05
    n_r: int = 64
    n_theta: int = 64

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise DomainError("need 0 < r_min < r_max")
        if not 0 < self.theta_min < math.pi / 2:
            raise DomainError("need 0 < theta_min < pi/2")
        if self.n_r < 4 or self.n_theta < 4:
            raise DomainError("need at least 4 cells in each direction")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / self.n_r

    @property
    def dtheta(self) -> float:
        return (math.pi - 2 * self.theta_min) / self.n_theta

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r + 1)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(self.theta_min, math.pi - self.theta_min, self.n_theta + 1)

    @property
    def interior_shape(self):
        return (self.n_r - 1, self.n_theta - 1)

    def refined(self, factor: int = 2) -> "DomainSpec":
        return replace(self, n_r=self.n_r * factor, n_theta=self.n_theta * factor)


def arakawa(a: np.ndarray, b: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Arakawa's Jacobian ``a_x b_y - a_y b_x`` at interior nodes of full node arrays."""
    ip, im = (slice(2, None), slice(1, -1)), (slice(None, -2), slice(1, -1))
    jp, jm = (slice(1, -1), slice(2, None)), (slice(1, -1), slice(None, -2))
    pp, pm = (slice(2, None), slice(2, None)), (slice(2, None), slice(None, -2))
    mp, mm = (slice(None, -2), slice(2, None)), (slice(None, -2), slice(None, -2))
    jpp = (a[ip] - a[im]) * (b[jp] - b[jm]) - (a[jp] - a[jm]) * (b[ip] - b[im])
    jpx = (a[ip] * (b[pp] - b[pm]) - a[im] * (b[mp] - b[mm])
           - a[jp] * (b[pp] - b[mp]) + a[jm] * (b[pm] - b[mm]))
    jxp = (b[jp] * (a[pp] - a[mp]) - b[jm] * (a[pm] - a[mm])
           - b[ip] * (a[pp] - a[pm]) + b[im] * (a[mp] - a[mm]))
    return (jpp + jpx + jxp) / (12.0 * dx * dy)


class ShellModel:
    """Discrete operators for one domain and one background."""

    def __init__(self, spec: DomainSpec, background: ProfileSolution | None = None):
        self.spec = spec
        self.background = background
        r, th = spec.r, spec.theta
        self.R, self.TH = np.meshgrid(r, th, indexing="ij")
        self.RHO = self.R * np.sin(self.TH)
        dr, dt = spec.dr, spec.dtheta
        ni, nj = spec.interior_shape
        self.n = ni * nj
        idx = np.arange(self.n).reshape(ni, nj)
        full = -np.ones((spec.n_r + 1, spec.n_theta + 1), dtype=int)
        full[1:-1, 1:-1] = idx
        self._full_index = full

        # stiffness: sum over edges of weight * (difference)^2
        rows, cols, vals = [], [], []

        def edges(p, q, wgt):
            p, q, wgt = p.ravel(), q.ravel(), np.broadcast_to(wgt, p.shape).ravel()
            for u, v, s in ((p, p, 1), (q, q, 1), (p, q, -1), (q, p, -1)):
                keep = (u >= 0) & (v >= 0)
                rows.append(u[keep]); cols.append(v[keep]); vals.append(s * wgt[keep])

        sin_j = np.sin(th)
        edges(full[:-1, 1:-1], full[1:, 1:-1], (dt / (dr * sin_j[1:-1]))[None, :]
              * np.ones((spec.n_r, 1)))
        th_half = 0.5 * (th[:-1] + th[1:])
        edges(full[1:-1, :-1], full[1:-1, 1:], dr / (dt * r[1:-1, None] ** 2 * np.sin(th_half)[None, :]))
        self.A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(self.n, self.n))
        self.M = (self.R[1:-1, 1:-1] * dr * dt).ravel()
        self._lu = splu(self.A)

        # psi (interior) -> omega (all nodes)
        Bi = sp.diags(1.0 / self.M) @ self.A
        nodes = (spec.n_r + 1) * (spec.n_theta + 1)
        node = np.arange(nodes).reshape(full.shape)
        interior_rows = node[1:-1, 1:-1].ravel()
        P = sp.csr_matrix((np.ones(self.n), (interior_rows, np.arange(self.n))), shape=(nodes, self.n))
        wr, wc, wv = [], [], []
        j = np.arange(1, spec.n_theta)
        for i_wall, i_in in ((0, 1), (spec.n_r, spec.n_r - 1)):
            wr.append(node[i_wall, j]); wc.append(full[i_in, j])
            wv.append(-2.0 / (dr * dr * self.RHO[i_wall, j]))
        i = np.arange(1, spec.n_r)
        for j_wall, j_in in ((0, 1), (spec.n_theta, spec.n_theta - 1)):
            wr.append(node[i, j_wall]); wc.append(full[i, j_in])
            wv.append(-2.0 / (r[i] ** 2 * dt * dt * self.RHO[i, j_wall]))
        Bw = sp.csr_matrix((np.concatenate(wv), (np.concatenate(wr), np.concatenate(wc))),
                           shape=(nodes, self.n))
        self.B = (P @ Bi + Bw).tocsr()
        tr = np.ones(spec.n_r + 1); tr[[0, -1]] = 0.5
        tt = np.ones(spec.n_theta + 1); tt[[0, -1]] = 0.5
        self.W = (np.outer(tr, tt) * dr * dt * self.R * self.RHO).ravel()
        self.S = (self.B.T @ sp.diags(self.W) @ self.B).tocsc()

        if background is None or background.is_zero:
            self.Psi = self.Z = None
            self.bg_speed = 0.0
        else:
            y = np.cos(th)
            w = np.sin(th) ** 2
            U, dU, d2U = background.derivatives(y, w)
            self.Psi = -self.R * U[None, :]
            self.Z = d2U[None, :] / self.R**3
            self.bg_speed = float(np.max(np.hypot(dU[None, :] / self.R, U[None, :] / self.RHO)))

    # -- conversions ---------------------------------------------------------

    def psi_from_q(self, q):
        return self._lu.solve(q)

    def full(self, interior: np.ndarray) -> np.ndarray:
        out = np.zeros(self.R.shape)
        out[1:-1, 1:-1] = interior.reshape(self.spec.interior_shape)
        return out

    def omega(self, psi) -> np.ndarray:
        return (self.B @ psi).reshape(self.R.shape)

    def energy(self, psi, q) -> float:
        return 2 * math.pi * float(psi @ q)

    def dissipation(self, psi) -> float:
        om = self.B @ psi
        return 2 * math.pi * float(self.W @ (om * om))

    # -- stability -----------------------------------------------------------

    @cached_property
    def lambda_max(self) -> float:
        """Largest eigenvalue of ``A^-1 S``."""
        Minv = LinearOperator((self.n, self.n), matvec=self._lu.solve, dtype=float)
        val = eigsh(self.S, k=1, M=self.A, Minv=Minv, which="LA", tol=1e-6,
                    return_eigenvectors=False, v0=np.ones(self.n))
        return float(val[0])

    def eigenmodes(self, k: int):
        """The ``k`` slowest Stokes modes: ``S v = lambda A v``, ``v^T A v = 1``."""
        vals, vecs = eigsh(self.S, k=k, M=self.A, sigma=0.0, which="LM", v0=np.ones(self.n))
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        for m in range(k):
            v = vecs[:, m]
            v /= math.sqrt(float(v @ (self.A @ v)))
            # fix the sign so the state is reproducible
            if v[np.argmax(np.abs(v))] < 0:
                v *= -1
        return vals, vecs

    def speed(self, psi) -> float:
        P = self.full(psi)
        ur = np.gradient(P, self.spec.dtheta, axis=1) / (self.R**2 * np.sin(self.TH))
        ut = -np.gradient(P, self.spec.dr, axis=0) / self.RHO
        return float(np.max(np.hypot(ur, ut)))

    def dt_bound(self, psi) -> float:
        h = min(self.spec.dr, self.spec.r_min * self.spec.dtheta)
        speed = self.bg_speed + self.speed(psi)
        adv = h / speed if speed > 0 else math.inf
        return min(2.0 / self.lambda_max, adv)

    # -- right-hand side -------------------------------------------------------

    def rhs(self, q, linearized: bool):
        psi = self.psi_from_q(q)
        out = -(self.S @ psi)
        dr, dt = self.spec.dr, self.spec.dtheta
        zeta = None
        if self.Psi is not None or not linearized:
            zeta = self.omega(psi) / self.RHO
            P = self.full(psi)
        if self.Psi is not None:
            out += dr * dt * (arakawa(self.Psi, zeta, dr, dt) + arakawa(P, self.Z, dr, dt)).ravel()
        if not linearized:
            out += dr * dt * arakawa(P, zeta, dr, dt).ravel()
        return out, psi


@dataclass(frozen=True)
class PerturbationState:
    model: ShellModel = field(repr=False)
    q: np.ndarray = field(repr=False)
    t: float = 0.0
    linearized: bool = True

    @cached_property
    def psi_interior(self) -> np.ndarray:
        return self.model.psi_from_q(self.q)

    @property
    def psi(self) -> np.ndarray:
        return self.model.full(self.psi_interior)

    @property
    def omega(self) -> np.ndarray:
        return self.model.omega(self.psi_interior)

    @property
    def energy(self) -> float:
        return self.model.energy(self.psi_interior, self.q)

    @property
    def dissipation(self) -> float:
        return self.model.dissipation(self.psi_interior)

    def face_fluxes(self):
        """Volume fluxes ``2 pi (psi_b - psi_a)`` through the cell faces (radial, polar)."""
        P = 2 * math.pi * self.psi
        return np.diff(P, axis=1), np.diff(P, axis=0)

    def divergence(self) -> np.ndarray:
        """Net outflow of every cell from the face fluxes; zero up to rounding."""
        fr, ft = self.face_fluxes()
        return (fr[1:, :] - fr[:-1, :]) - (ft[:, 1:] - ft[:, :-1])

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "theta", "psi", "omega"])
        for r, th, p, o in zip(self.model.R.ravel(), self.model.TH.ravel(),
                               self.psi.ravel(), self.omega.ravel()):
            writer.writerow([repr(float(v)) for v in (r, th, p, o)])


def _bump(model: ShellModel, center, width):
    """Polynomial bump ``(1 - d^2)^4`` in the scaled (r, theta) plane; vanishes with its slope at the walls."""
    d2 = ((model.R - center[0]) / width[0]) ** 2 + ((model.TH - center[1]) / width[1]) ** 2
    return np.where(d2 < 1, (1 - np.minimum(d2, 1)) ** 4, 0.0)


def init_perturbation(model: ShellModel, kind: str = "eigenmode", amplitude: float = 1.0, *,
                      mode: int = 0, seed: int = 0, n_bumps: int = 6,
                      linearized: bool = True) -> PerturbationState:
    """Eigenmode ``mode`` or ``n_bumps`` seeded random bumps, scaled so ``E(0) = amplitude^2``."""
    if amplitude < 0:
        raise DomainError("amplitude must be non-negative")
    spec = model.spec
    if kind == "eigenmode":
        _, vecs = model.eigenmodes(mode + 1)
        psi = vecs[:, mode].copy()
    elif kind == "random":
        rng = np.random.default_rng(seed)
        P = np.zeros(model.R.shape)
        span_r = spec.r_max - spec.r_min
        span_t = math.pi - 2 * spec.theta_min
        for _ in range(n_bumps):
            wdt = (rng.uniform(0.15, 0.3) * span_r, rng.uniform(0.1, 0.25) * span_t)
            ctr = (rng.uniform(spec.r_min + wdt[0], spec.r_max - wdt[0]),
                   rng.uniform(spec.theta_min + wdt[1], math.pi - spec.theta_min - wdt[1]))
            P += rng.normal() * _bump(model, ctr, wdt)
        psi = P[1:-1, 1:-1].ravel()
    else:
        raise DomainError(f"unknown initial condition kind {kind!r}")
    q = model.A @ psi
    e = model.energy(psi, q)
    if amplitude == 0 or e == 0:
        return PerturbationState(model, np.zeros(model.n), 0.0, linearized)
    return PerturbationState(model, q * (amplitude / math.sqrt(e)), 0.0, linearized)


def step(state: PerturbationState, dt: float) -> PerturbationState:
    """One Heun step; raises :class:`CFLViolation` above the stability bound."""
    model = state.model
    bound = model.dt_bound(state.psi_interior)
    if dt > bound:
        raise CFLViolation(f"dt={dt:g} exceeds the stability bound {bound:g}")
    k1, psi = model.rhs(state.q, state.linearized)
    q1 = state.q + dt * k1
    k2, _ = model.rhs(q1, state.linearized)
    q = state.q + 0.5 * dt * (k1 + k2)
    if not np.all(np.isfinite(q)):
        raise NonFiniteState("non-finite vorticity", t=state.t + dt, state=None)
    return PerturbationState(model, q, state.t + dt, state.linearized)


@dataclass(frozen=True)
class EnergyHistory:
    t: list
    E: list
    D: list
    int_D: list | None = None   # running integral of D at the step resolution
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array([self.t, self.E, self.D], dtype=float)
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr[1:] < 0)):
            raise NonFiniteState("energy history must be finite and non-negative")

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "E", "D"])
        for row in zip(self.t, self.E, self.D):
            writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, fh) -> "EnergyHistory":
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")][1:]
        t, E, D = (list(map(float, c)) for c in zip(*rows)) if rows else ([], [], [])
        return cls(t, E, D)


def _advance(state, dt, n_steps, hist, every):
    D_prev = state.dissipation
    acc = hist.int_D[-1]
    for k in range(1, n_steps + 1):
        state = step(state, dt)
        D = state.dissipation
        acc += 0.5 * dt * (D_prev + D)
        D_prev = D
        if k % every == 0 or k == n_steps:
            hist.t.append(state.t); hist.E.append(state.energy); hist.D.append(D)
            hist.int_D.append(acc)
    return state


def run(spec: DomainSpec, params: SolutionParams, kind: str = "eigenmode", amplitude: float = 1.0,
        t_end: float = 0.1, dt_policy="auto", *, n_samples: int = 50, linearized: bool = True,
        seed: int = 0, mode: int = 0, certificate: float | None = None, k_samples: int = 16,
        cfl: float = 0.5, background: ProfileSolution | None = None
        ) -> tuple[EnergyHistory, PerturbationState]:
    """Evolve from ``init_perturbation`` to ``t_end``; ``n_samples`` evenly spaced records.

    ``dt_policy`` is ``"auto"`` (``cfl`` times the initial stability bound)
    or a fixed step.  The background must carry the smallness certificate
    ``K_hat < 1/2``; it is computed with :func:`homoflow.hardy.estimate_K`
    unless ``certificate`` supplies it.
    """
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    sol = background if background is not None else solve_profile(params)
    if certificate is None:
        if params.size == 0:
            certificate = 0.0
        else:
            from .hardy import estimate_K
            certificate = estimate_K(sol, samples=k_samples, seed=seed).K_hat
    if not certificate < 0.5:
        raise DomainError(f"smallness certificate failed: K_hat={certificate:g} >= 1/2")
    model = ShellModel(spec, sol)
    state = init_perturbation(model, kind, amplitude, mode=mode, seed=seed, linearized=linearized)
    bound = model.dt_bound(state.psi_interior)
    dt_req = cfl * bound if dt_policy == "auto" else float(dt_policy)
    per_sample = max(1, math.ceil(t_end / n_samples / dt_req))
    n_steps = per_sample * n_samples
    dt = t_end / n_steps
    hist = EnergyHistory([0.0], [state.energy], [state.dissipation], [0.0],
                         meta={"dt": dt, "steps": n_steps, "K_hat": certificate,
                               "lambda_max": model.lambda_max})
    state = _advance(state, dt, n_steps, hist, per_sample)
    return hist, state


@dataclass(frozen=True)
class InequalityReport:
    violation: float
    identity_defect: float
    pairs: int

    def as_dict(self):
        return {"violation": self.violation, "identity_defect": self.identity_defect,
                "pairs": self.pairs}


def energy_inequality_check(h: EnergyHistory) -> InequalityReport:
    """Largest ``(E(t) + int_s^t D - E(s)) / E(s)`` over sampled ``s <= t`` (0 if none positive).

    ``identity_defect`` is the largest ``|E(t) - E(s) + 2 int_s^t D| / E(s)``,
    which vanishes for pure diffusion.  The integral uses the step-resolution
    running sum when the history carries one, the trapezoid rule otherwise.
    """
    if not h.t:
        raise DomainError("empty history")
    t, E, D = (np.asarray(x, dtype=float) for x in (h.t, h.E, h.D))
    if h.int_D is not None:
        I = np.asarray(h.int_D, dtype=float)
    else:
        I = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (D[1:] + D[:-1]))])
    viol, defect, pairs = 0.0, 0.0, 0
    for s in range(len(t)):
        if E[s] == 0:
            continue
        integ = I[s:] - I[s]
        viol = max(viol, float(np.max((E[s:] + integ - E[s]) / E[s])))
        defect = max(defect, float(np.max(np.abs(E[s:] - E[s] + 2 * integ) / E[s])))
        pairs += len(t) - s
    return InequalityReport(max(viol, 0.0), defect, pairs)


@dataclass(frozen=True)
class DecayReport:
    sup_ratio: float
    final_ratio: float

    def as_dict(self):
        return {"sup_ratio": self.sup_ratio, "final_ratio": self.final_ratio}


def decay_compare(h_bg: EnergyHistory, h_zero: EnergyHistory) -> DecayReport:
    """``sup_t E_bg(t) / E_zero(t)`` over a shared sampling grid."""
    if len(h_bg.t) != len(h_zero.t) or not np.allclose(h_bg.t, h_zero.t, rtol=1e-12, atol=0):
        raise MismatchedHistories("histories are sampled at different times")
    if h_bg.E[0] != h_zero.E[0] and not math.isclose(h_bg.E[0], h_zero.E[0], rel_tol=1e-12):
        raise MismatchedHistories("histories start from different energies")
    eb, ez = np.asarray(h_bg.E), np.asarray(h_zero.E)
    ok = ez > 0
    ratio = np.where(ok, eb / np.where(ok, ez, 1.0), 1.0)
    return DecayReport(float(np.max(ratio)), float(ratio[-1]))


def history_json(h: EnergyHistory) -> str:
    return json.dumps({"t": h.t, "E": h.E, "D": h.D, "meta": h.meta}, sort_keys=True)
