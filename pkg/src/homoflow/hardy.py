"""Anisotropic Hardy-type inequality and the bilinear smallness estimate.

For ``x = (x', x_n)`` in R^n the inequality compares

    lhs = || |x|^beta |x'|^alpha u ||_p
    rhs = || |x|^(beta + alpha - alpha') |x'|^(alpha' + 1) grad u ||_p

and holds with a uniform constant exactly when ``alpha' <= alpha``.  The
counterexample family ``u_delta = f_delta(|x'|) g(x_n)`` concentrates on
``delta <= |x'| <= 4 delta`` and gives ``lhs^p ~ delta^(alpha p + n - 1)``
against ``rhs^p ~ delta^(alpha' p + n - 1)``.

In R^3 the (p, alpha, beta) = (2, -1/2, -1/2) instance controls
``int |v|^2 / (|x| |x'|)`` by ``||grad v||^2``, which is how the trilinear
term ``int (v . grad u) . w`` of the perturbation equation is bounded by
``K ||grad v|| ||grad w||`` with ``K`` proportional to the size of the
background.  :func:`estimate_K` samples that ratio over random
divergence-free fields.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .field import gradient_array
from .numerics import gauss_legendre_panels, graded_breakpoints
from .profile import GammaBounds, ProfileSolution

__all__ = [
    "WeightParams",
    "TestField",
    "RadialField",
    "HardyReport",
    "ScanResult",
    "KEstimate",
    "smoothstep",
    "counterexample_field",
    "gaussian_field",
    "weighted_norms",
    "failure_exponent_scan",
    "DivergenceFreeField",
    "random_divergence_free",
    "CylinderGrid",
    "bilinear_form",
    "estimate_K",
    "thread_count",
]


def thread_count() -> int:
    """Worker count from ``HOMOFLOW_THREADS`` (default: CPU count, capped at 8)."""
    env = os.environ.get("HOMOFLOW_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("HOMOFLOW_THREADS must be a positive integer")
        return n
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class WeightParams:
    n: int = 3
    p: float = 2.0
    alpha: float = -0.5
    beta: float = 0.0
    alpha_prime: float = -0.5

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("dimension must be at least 2")
        if not 1 <= self.p < self.n:
            raise DomainError(f"need 1 <= p < n, got p={self.p}, n={self.n}")
        if not self.alpha * self.p > 1 - self.n:
            raise DomainError("need alpha p > 1 - n")
        if not (self.alpha + self.beta) * self.p > -self.n:
            raise DomainError("need (alpha + beta) p > -n")

    @property
    def lam(self) -> float:
        """Homogeneity ``(alpha + beta) p + n`` shared by both sides when ``alpha' = alpha``."""
        return (self.alpha + self.beta) * self.p + self.n


# ---------------------------------------------------------------------------
# test fields
# ---------------------------------------------------------------------------


def smoothstep(t):
    """C^2 quintic ramp ``6t^5 - 15t^4 + 10t^3`` clamped to [0, 1], and its derivative."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t), 30 * t * t * (1 - t) ** 2


def _plateau(s, a):
    """0 below ``a``, ramp to 1 on ``[a, 2a]``, 1 on ``[2a, 3a]``, ramp down to 0 at ``4a``."""
    up, dup = smoothstep(s / a - 1)
    dn, ddn = smoothstep(4 - s / a)
    return up * dn, (dup * dn - up * ddn) / a


class TestField:
    """Compactly supported field on R^n with analytic gradient.

    Subclasses implement ``value(X) -> (N, m)`` and ``grad(X) -> (N, m, n)``
    and publish quadrature breakpoints in ``|x'|`` and ``x_n``.  ``radial``
    fields depend only on ``(|x'|, x_n)``.
    """

    n: int = 3
    radial: bool = False
    rho_breaks: np.ndarray
    z_breaks: np.ndarray
    # grade toward these (|x'|, x_n) locations where the weights are singular
    singular_rho0: bool = True
    singular_z0: bool = True

    def value(self, X):  # pragma: no cover - interface
        raise NotImplementedError

    def grad(self, X):  # pragma: no cover - interface
        raise NotImplementedError

    def dilated(self, s: float) -> "TestField":
        return _Dilated(self, s)


class _Dilated(TestField):
    """``x -> u(s x)`` with breakpoints scaled by ``1/s``."""

    def __init__(self, base: TestField, s: float):
        if s <= 0:
            raise ValueError("dilation factor must be positive")
        self.base, self.s = base, float(s)
        self.n, self.radial = base.n, base.radial
        self.rho_breaks = np.asarray(base.rho_breaks) / s
        self.z_breaks = np.asarray(base.z_breaks) / s
        self.singular_rho0, self.singular_z0 = base.singular_rho0, base.singular_z0

    def value(self, X):
        return self.base.value(self.s * np.asarray(X))

    def grad(self, X):
        return self.s * self.base.grad(self.s * np.asarray(X))


class RadialField(TestField):
    """Scalar ``u = f(|x'|) g(x_n)`` from callables returning ``(value, derivative)``."""

    radial = True

    def __init__(self, n, f: Callable, g: Callable, rho_breaks, z_breaks,
                 singular_rho0=True, singular_z0=True):
        self.n = int(n)
        self._f, self._g = f, g
        self.rho_breaks = np.asarray(rho_breaks, dtype=float)
        self.z_breaks = np.asarray(z_breaks, dtype=float)
        self.singular_rho0, self.singular_z0 = singular_rho0, singular_z0

    def _parts(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rho = np.linalg.norm(X[:, :-1], axis=1)
        f, df = self._f(rho)
        g, dg = self._g(X[:, -1])
        return X, rho, f, df, g, dg

    def value(self, X):
        _, _, f, _, g, _ = self._parts(X)
        return (f * g)[:, None]

    def grad(self, X):
        X, rho, f, df, g, dg = self._parts(X)
        out = np.empty((X.shape[0], 1, self.n))
        safe = np.where(rho > 0, rho, 1.0)
        out[:, 0, :-1] = (df * g / safe)[:, None] * X[:, :-1]
        out[:, 0, -1] = f * dg
        return out


def counterexample_field(delta: float, n: int = 3) -> RadialField:
    """``u_delta = f_delta(|x'|) g(x_n)`` built from the quintic smoothstep.

    ``f_delta`` vanishes for ``|x'| <= delta`` and ``|x'| >= 4 delta`` and
    equals 1 on ``[2 delta, 3 delta]``; ``g`` has the same shape in ``|x_n|``
    with ``delta = 1``.  ``|grad f_delta| <= (15/8) / delta``.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")

    def f(rho):
        return _plateau(rho, delta)

    def g(z):
        v, dv = _plateau(np.abs(z), 1.0)
        return v, np.sign(z) * dv

    rb = delta * np.linspace(1.0, 4.0, 7)
    zb = np.linspace(1.0, 4.0, 7)
    return RadialField(n, f, g, rb, np.concatenate([-zb[::-1], zb]),
                       singular_rho0=False, singular_z0=False)


def gaussian_field(n: int = 3, width: float = 1.0, cutoff: float = 6.0) -> RadialField:
    """``exp(-|x|^2 / width^2)`` truncated where it is below ``exp(-cutoff^2)``."""

    def f(rho):
        v = np.exp(-(rho / width) ** 2)
        return v, -2 * rho / width**2 * v

    L = cutoff * width
    return RadialField(n, f, f, np.array([0.0, L]), np.array([-L, 0.0, L]))


# ---------------------------------------------------------------------------
# weighted quadrature
# ---------------------------------------------------------------------------


def _sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^(k+1)."""
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def _panels(breaks, grade_at=None, levels=30, sub=4, order=10):
    """Gauss nodes on ``breaks`` (each interval split in ``sub``), graded at ``grade_at``."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    pts = [np.linspace(a, b, sub + 1) for a, b in zip(breaks[:-1], breaks[1:])]
    br = np.unique(np.concatenate(pts))
    if grade_at is not None:
        extra = []
        for a, b in zip(br[:-1], br[1:]):
            if a == grade_at:
                extra.append(graded_breakpoints(a, b, levels, toward="a"))
            elif b == grade_at:
                extra.append(graded_breakpoints(a, b, levels, toward="b"))
        if extra:
            br = np.unique(np.concatenate([br, *extra]))
    return gauss_legendre_panels(br, order)


@dataclass(frozen=True)
class HardyReport:
    lhs: float
    rhs: float
    ratio: float
    lhs_p: float
    rhs_p: float

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "lhs_p": self.lhs_p, "rhs_p": self.rhs_p}


def weighted_norms(u: TestField, w: WeightParams, *, levels: int = 30, sub: int = 4,
                   n_angle: int = 32) -> HardyReport:
    """Both sides of the weighted inequality by tensor Gauss quadrature.

    Radial fields use the reduced measure ``|S^(n-2)| rho^(n-2) d rho dx_n``;
    other fields (``n = 3`` only) add a uniform azimuthal rule.  Meshes are
    built from the field's own breakpoints, so a dilated field is integrated
    on the correspondingly dilated mesh.
    """
    if u.n != w.n:
        raise DomainError(f"field lives in R^{u.n}, weights in R^{w.n}")
    rho_b = np.asarray(u.rho_breaks)
    rho_b = np.union1d(rho_b, [0.0]) if u.singular_rho0 else rho_b
    z_b = np.asarray(u.z_breaks)
    z_b = np.union1d(z_b, [0.0]) if u.singular_z0 else z_b
    rho, wr = _panels(rho_b, 0.0 if u.singular_rho0 else None, levels, sub)
    z, wz = _panels(z_b, 0.0 if u.singular_z0 else None, levels, sub)
    R, Z = np.meshgrid(rho, z, indexing="ij")
    W = np.outer(wr, wz)
    n, p = w.n, w.p

    if u.radial:
        X = np.zeros((R.size, n))
        X[:, 0] = R.ravel()
        X[:, -1] = Z.ravel()
        W = W.ravel() * _sphere_area(n - 2) * R.ravel() ** (n - 2)
        vals = np.linalg.norm(u.value(X), axis=1)
        grads = np.linalg.norm(u.grad(X).reshape(len(X), -1), axis=1)
        rr, rn = R.ravel(), np.hypot(R.ravel(), Z.ravel())
    else:
        if n != 3:
            raise DomainError("non-radial fields are supported in R^3 only")
        ang = 2 * math.pi * np.arange(n_angle) / n_angle
        Xs = [np.column_stack([R.ravel() * math.cos(a), R.ravel() * math.sin(a), Z.ravel()])
              for a in ang]
        X = np.concatenate(Xs)
        W = np.tile(W.ravel() * R.ravel(), n_angle) * (2 * math.pi / n_angle)
        vals = np.linalg.norm(u.value(X), axis=1)
        grads = np.linalg.norm(u.grad(X).reshape(len(X), -1), axis=1)
        rr, rn = np.tile(R.ravel(), n_angle), np.tile(np.hypot(R.ravel(), Z.ravel()), n_angle)

    with np.errstate(divide="ignore", invalid="ignore"):
        wl = np.where(vals > 0, rn ** (w.beta * p) * rr ** (w.alpha * p) * vals**p, 0.0)
        wg = np.where(grads > 0, rn ** ((w.beta + w.alpha - w.alpha_prime) * p)
                      * rr ** ((w.alpha_prime + 1) * p) * grads**p, 0.0)
    lhs_p = float(W @ wl)
    rhs_p = float(W @ wg)
    lhs, rhs = lhs_p ** (1 / p), rhs_p ** (1 / p)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return HardyReport(lhs, rhs, ratio, lhs_p, rhs_p)


@dataclass(frozen=True)
class ScanResult:
    deltas: list
    lhs_p: list
    rhs_p: list
    ratio: list
    slope_lhs: float
    slope_rhs: float
    r2_lhs: float
    r2_rhs: float
    expected_lhs: float
    expected_rhs: float

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delta", "lhs", "rhs", "ratio"])
        for d, l, r, q in zip(self.deltas, self.lhs_p, self.rhs_p, self.ratio):
            writer.writerow([repr(float(v)) for v in (d, l, r, q)])

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in ("slope_lhs", "slope_rhs", "r2_lhs", "r2_rhs",
                                               "expected_lhs", "expected_rhs")}


def _fit(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss = float(np.sum((y - np.mean(y)) ** 2))
    return float(coef[0]), 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0


def failure_exponent_scan(w: WeightParams, delta_grid: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4)
                          ) -> ScanResult:
    """Fit ``log lhs^p`` and ``log rhs^p`` against ``log delta`` over the counterexamples."""
    d = np.asarray(delta_grid, dtype=float)
    if d.size < 4 or np.any((d <= 0) | (d >= 1)) or math.log10(d.max() / d.min()) < 2:
        raise DomainError("delta_grid needs >= 4 points in (0, 1) spanning two decades")
    reps = [weighted_norms(counterexample_field(float(x), w.n), w) for x in d]
    lp = np.array([r.lhs_p for r in reps])
    rp = np.array([r.rhs_p for r in reps])
    sl, r2l = _fit(np.log(d), np.log(lp))
    sr, r2r = _fit(np.log(d), np.log(rp))
    return ScanResult(
        deltas=d.tolist(), lhs_p=lp.tolist(), rhs_p=rp.tolist(),
        ratio=[r.ratio for r in reps], slope_lhs=sl, slope_rhs=sr, r2_lhs=r2l, r2_rhs=r2r,
        expected_lhs=w.alpha * w.p + w.n - 1, expected_rhs=w.alpha_prime * w.p + w.n - 1,
    )


# ---------------------------------------------------------------------------
# random divergence-free fields and the bilinear form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivergenceFreeField:
    """``v = curl(E A)`` with a polynomial envelope and a trigonometric potential.

    ``E(x) = (1 - |x - c|^2 / a^2)^4`` inside the ball ``|x - c| < a`` (zero
    outside), ``A_k(x) = sum_m amp[k, m] sin(kvec[m] . x + phase[k, m])``.
    Divergence free by construction; ``grad v`` uses exact second derivatives.
    """

    center: np.ndarray
    radius: float
    kvec: np.ndarray         # (M, 3)
    amp: np.ndarray          # (3, M)
    phase: np.ndarray        # (3, M)

    def _envelope(self, X):
        d = X - self.center
        q = 1 - np.sum(d * d, axis=1) / self.radius**2
        inside = q > 0
        q = np.where(inside, q, 0.0)
        E = q**4
        dq = -2 * d / self.radius**2                          # (N, 3)
        dE = (4 * q**3)[:, None] * dq
        d2E = (12 * q**2)[:, None, None] * dq[:, :, None] * dq[:, None, :]
        d2E -= (8 * q**3 / self.radius**2)[:, None, None] * np.eye(3)[None]
        return E, dE, d2E

    def _potential(self, X):
        M = self.kvec.shape[0]
        arg = (X @ self.kvec.T)[:, None, :] + self.phase[None]   # (N, 3, M)
        s = self.amp[None] * np.sin(arg)
        c = self.amp[None] * np.cos(arg)
        A = s.sum(axis=2)
        dA = c @ self.kvec                                       # (N, 3, 3)
        kk = (self.kvec[:, :, None] * self.kvec[:, None, :]).reshape(M, 9)
        d2A = -(s @ kk).reshape(len(X), 3, 3, 3)
        return A, dA, d2A

    def _psi(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        E, dE, d2E = self._envelope(X)
        A, dA, d2A = self._potential(X)
        dpsi = E[:, None, None] * dA + A[:, :, None] * dE[:, None, :]          # [n, k, j] = d_j psi_k
        cross = dA[:, :, :, None] * dE[:, None, None, :]
        d2psi = (E[:, None, None, None] * d2A + cross + cross.transpose(0, 1, 3, 2)
                 + A[:, :, None, None] * d2E[:, None, :, :])                   # [n, k, j, l]
        return dpsi, d2psi

    @staticmethod
    def _curl(dpsi):
        return np.stack([dpsi[:, 2, 1] - dpsi[:, 1, 2],
                         dpsi[:, 0, 2] - dpsi[:, 2, 0],
                         dpsi[:, 1, 0] - dpsi[:, 0, 1]], axis=1)

    def inside(self, X):
        d = X - self.center
        return np.sum(d * d, axis=1) < self.radius**2

    def value(self, X):
        return self._curl(self._psi(X)[0])

    def grad(self, X):
        return self._curl(self._psi(X)[1])

    def value_and_grad(self, X):
        dpsi, d2psi = self._psi(X)
        return self._curl(dpsi), self._curl(d2psi)


def random_divergence_free(rng: np.random.Generator, *, modes: int = 4, radius: float = 1.0,
                           center_spread: float = 0.4, wavenumber: float = 3.0
                           ) -> DivergenceFreeField:
    """Draw a :class:`DivergenceFreeField` whose support ball meets the axis."""
    center = rng.uniform(-center_spread, center_spread, size=3)
    kvec = rng.normal(scale=wavenumber / math.sqrt(3), size=(modes, 3))
    amp = rng.normal(size=(3, modes)) / math.sqrt(modes)
    phase = rng.uniform(0, 2 * math.pi, size=(3, modes))
    return DivergenceFreeField(center, radius, kvec, amp, phase)


@dataclass(frozen=True)
class CylinderGrid:
    """Tensor quadrature on ``rho < rho_max, |x3| < z_max`` graded toward the axis and the origin."""

    rho_max: float = 1.5
    z_max: float = 1.5
    levels: int = 8
    panels: int = 8
    order: int = 6
    n_angle: int = 16

    def nodes(self):
        rb = np.union1d(graded_breakpoints(0.0, self.rho_max, self.levels, toward="a"),
                        np.linspace(0.0, self.rho_max, self.panels + 1))
        zh = np.union1d(graded_breakpoints(0.0, self.z_max, self.levels, toward="a"),
                        np.linspace(0.0, self.z_max, self.panels + 1))
        rho, wr = gauss_legendre_panels(rb, self.order)
        zp, wzp = gauss_legendre_panels(zh, self.order)
        z = np.concatenate([-zp[::-1], zp])
        wz = np.concatenate([wzp[::-1], wzp])
        R, Z = np.meshgrid(rho, z, indexing="ij")
        W2 = (np.outer(wr, wz) * R).ravel()
        ang = 2 * math.pi * np.arange(self.n_angle) / self.n_angle
        return R.ravel(), Z.ravel(), W2 * (2 * math.pi / self.n_angle), ang


class _Background:
    """``grad u`` of the stationary solution on a :class:`CylinderGrid`, per azimuth."""

    def __init__(self, sol: ProfileSolution, grid: CylinderGrid):
        self.R, self.Z, self.W, self.ang = grid.nodes()
        self.points = []
        self.grads = []
        X0 = np.column_stack([self.R, np.zeros_like(self.R), self.Z])
        G0 = None if sol.is_zero else gradient_array(sol, X0)
        for a in self.ang:
            c, s = math.cos(a), math.sin(a)
            Q = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            self.points.append(X0 @ Q.T)
            self.grads.append(None if G0 is None else np.einsum("ik,nkl,jl->nij", Q, G0, Q))
        self.X = np.concatenate(self.points)
        self.G = None if G0 is None else np.concatenate(self.grads)
        self.Wall = np.tile(self.W, len(self.ang))
        self.r = np.linalg.norm(self.X, axis=1)
        self.rho = np.tile(self.R, len(self.ang))


def _pair_integrals(bg: "_Background", v, w):
    """Sums of ``(v . grad u) . w``, ``|grad v|^2``, ``|grad w|^2`` and ``|v|^2/(r rho)``.

    Each field is evaluated only inside its support ball.
    """
    iv, iw = v.inside(bg.X), w.inside(bg.X)
    vv, gv = v.value_and_grad(bg.X[iv])
    ww, gw = w.value_and_grad(bg.X[iw])
    Wv, Ww = bg.Wall[iv], bg.Wall[iw]
    acc = np.zeros(4)
    acc[1] = Wv @ np.sum(gv * gv, axis=(1, 2))
    acc[2] = Ww @ np.sum(gw * gw, axis=(1, 2))
    acc[3] = Wv @ (np.sum(vv * vv, axis=1) / (bg.r[iv] * bg.rho[iv]))
    if bg.G is not None:
        both = iv & iw
        a = vv[both[iv]]
        b = ww[both[iw]]
        acc[0] = bg.Wall[both] @ np.einsum("nj,nij,ni->n", a, bg.G[both], b)
    return acc


def bilinear_form(sol: ProfileSolution, v, w, grid: CylinderGrid = CylinderGrid(), *,
                  _bg: _Background | None = None):
    """``(int (v . grad u) . w, ||grad v||_2, ||grad w||_2)`` for the background ``u``."""
    bg = _bg if _bg is not None else _Background(sol, grid)
    val, gv2, gw2, _ = _pair_integrals(bg, v, w)
    return float(val), math.sqrt(gv2), math.sqrt(gw2)


@dataclass(frozen=True)
class KEstimate:
    K_hat: float
    hardy_functional: float
    samples: int
    seed: int
    ratios: list = field(repr=False, default_factory=list)

    def as_dict(self):
        return {"K_hat": self.K_hat, "hardy_functional": self.hardy_functional,
                "samples": self.samples, "seed": self.seed}


def estimate_K(sol: ProfileSolution, samples: int = 64, seed: int = 0,
               grid: CylinderGrid = CylinderGrid(), *, threads: int | None = None,
               bounds: GammaBounds | None = None) -> KEstimate:
    """Largest ``|int (v . grad u) . w| / (||grad v|| ||grad w||)`` over seeded random pairs.

    Also returns the largest ``int |v|^2 / (|x| |x'|) / ||grad v||^2`` over the
    same fields.  Pairs are drawn up front from ``seed`` and evaluated in a
    thread pool; the result does not depend on the number of workers.
    """
    if not sol.params.in_M(bounds):
        raise DomainError(f"{sol.params} is not in M")
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    pairs = [(random_divergence_free(rng), random_divergence_free(rng)) for _ in range(samples)]
    bg = _Background(sol, grid)

    def one(pair):
        val, gv2, gw2, hardy = _pair_integrals(bg, *pair)
        return abs(val) / math.sqrt(gv2 * gw2), hardy / gv2

    n_workers = threads or thread_count()
    if n_workers == 1:
        out = [one(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            out = list(ex.map(one, pairs))
    ratios = [o[0] for o in out]
    return KEstimate(max(ratios), max(o[1] for o in out), samples, seed, ratios)


def scan_to_json(result: ScanResult) -> str:
    return json.dumps(result.summary(), sort_keys=True)
