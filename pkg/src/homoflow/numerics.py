"""Shared numerical kernels.

* :func:`integrate_adaptive` -- Dormand-Prince 5(4) pair with the standard
  quartic dense output, step rejection on non-finite stages and a
  magnitude cap used to detect finite-time blow-up.
* :func:`quad_log_singular` -- composite 10-point Gauss-Legendre with
  adaptive bisection, pre-graded geometrically toward endpoints that carry
  integrable (logarithmic or weak power) singularities.
* :func:`bisect_predicate` -- bisection on the transition of a boolean
  predicate.

All routines are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidBracket, NoConvergence, NonFiniteState, StepUnderflow

__all__ = [
    "Tolerance",
    "QuadResult",
    "Trajectory",
    "integrate_adaptive",
    "quad_log_singular",
    "gauss_legendre_panels",
    "graded_breakpoints",
    "bisect_predicate",
]


@dataclass(frozen=True)
class Tolerance:
    """Relative/absolute tolerance pair."""

    rel: float = 1e-10
    abs: float = 0.0

    def __post_init__(self):
        if not (self.rel > 0 and math.isfinite(self.rel)):
            raise ValueError(f"Tolerance.rel must be > 0, got {self.rel!r}")
        if not (self.abs >= 0 and math.isfinite(self.abs)):
            raise ValueError(f"Tolerance.abs must be >= 0, got {self.abs!r}")

    def bound(self, value: float) -> float:
        return self.abs + self.rel * abs(value)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights (7 stages, FSAL)
_E = np.array(
    [-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40]
)
# quartic continuous extension: y(t0 + x h) = y0 + h * K^T P [x, x^2, x^3, x^4]
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


class Trajectory:
    """Dense-output solution of an ODE on ``[t_start, t_end]``.

    Calling the object evaluates the state at arbitrary times inside the span
    (vectorized); :meth:`derivative` differentiates the same piecewise quartic.
    """

    def __init__(self, ts, ys, qs, nfev):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self._q = np.asarray(qs, dtype=float).reshape(len(self.ts) - 1, self.ys.shape[1], 4)
        self.nfev = nfev
        self._sign = 1.0 if self.ts[-1] >= self.ts[0] else -1.0

    @property
    def t_start(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1].copy()

    @property
    def n_steps(self) -> int:
        return len(self.ts) - 1

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        key = self._sign * self.ts
        tt = self._sign * t
        lo, hi = key[0], key[-1]
        if np.any(tt < lo - 1e-12 * max(1.0, abs(lo))) or np.any(tt > hi + 1e-12 * max(1.0, abs(hi))):
            raise ValueError("evaluation time outside the integrated span")
        if len(key) == 1:
            return t, np.zeros(t.shape, dtype=int), np.zeros(t.shape), 0.0
        idx = np.clip(np.searchsorted(key, tt, side="right") - 1, 0, len(key) - 2)
        h = self.ts[idx + 1] - self.ts[idx]
        x = (t - self.ts[idx]) / h
        return t, idx, x, h

    def __call__(self, t):
        t, idx, x, h = self._locate(t)
        if self.n_steps == 0:
            return np.broadcast_to(self.ys[0], t.shape + self.ys.shape[1:]).copy()
        powers = np.stack([x, x**2, x**3, x**4], axis=-1)
        q = self._q[idx]
        return self.ys[idx] + h[..., None] * np.einsum("...mk,...k->...m", q, powers)

    def derivative(self, t):
        t, idx, x, h = self._locate(t)
        if self.n_steps == 0:
            return np.zeros(t.shape + self.ys.shape[1:])
        powers = np.stack([np.ones_like(x), 2 * x, 3 * x**2, 4 * x**3], axis=-1)
        return np.einsum("...mk,...k->...m", self._q[idx], powers)


def _rms_norm(x):
    return math.sqrt(float(np.mean(x * x)))


# interior sample points and allowed size (in units of tol) of the dense-output defect
_DEFECT_X = (0.25, 0.5, 0.75)
DEFECT_TARGET = 5.0


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    span,
    tol: Tolerance = Tolerance(1e-10, 1e-14),
    *,
    max_abs: float = 1e6,
    h0: float | None = None,
    max_steps: int = 200_000,
    defect_control: bool = True,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``span`` with error control.

    With ``defect_control`` an accepted step is also checked at three
    interior points of its dense output: the defect ``q'(t) - rhs(t, q(t))``
    must stay within ``DEFECT_TARGET`` times the componentwise tolerance
    (scaled by the largest ``|y|`` on the step, as for the error estimate),
    otherwise the step is retried.  The local error estimate alone lets the
    interpolant's defect exceed the tolerance by a factor ``~1/h``.

    Raises
    ------
    NonFiniteState
        If an accepted state exceeds ``max_abs`` in magnitude (blow-up).
    StepUnderflow
        If the step size collapses below the floating-point floor.
    """
    t0, t1 = float(span[0]), float(span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
        raise ValueError("span must be a nondegenerate finite interval")
    direction = 1.0 if t1 > t0 else -1.0
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    m = y.size

    f = np.asarray(rhs(t0, y), dtype=float).reshape(m)
    nfev = 1
    if not np.all(np.isfinite(f)):
        raise NonFiniteState("rhs not finite at the initial point", t=t0, state=y)

    length = abs(t1 - t0)
    if h0 is None:
        scale = tol.abs + tol.rel * np.abs(y)
        d0, d1 = _rms_norm(y / np.maximum(scale, 1e-300)), _rms_norm(f / np.maximum(scale, 1e-300))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, 0.1 * length)
    else:
        h = min(abs(h0), length)

    ts, ys, qs = [t0], [y.copy()], []
    K = np.empty((7, m))
    t = t0
    for _ in range(max_steps):
        if direction * (t1 - t) <= 0:
            break
        h = min(h, abs(t1 - t))
        floor = 16 * np.finfo(float).eps * max(abs(t), 1e-300)
        if h < floor:
            raise StepUnderflow(f"step size underflow at t={t!r}", t=t, state=y)
        hs = direction * h
        K[0] = f
        finite = True
        for i in range(1, 6):
            dy = hs * (K[:i].T @ np.asarray(_A[i]))
            K[i] = np.asarray(rhs(t + _C[i] * hs, y + dy), dtype=float).reshape(m)
            if not np.all(np.isfinite(K[i])):
                finite = False
                break
        nfev += i
        if finite:
            y_new = y + hs * (K[:6].T @ _B)
            K[6] = np.asarray(rhs(t + hs, y_new), dtype=float).reshape(m)
            nfev += 1
            finite = bool(np.all(np.isfinite(K[6])) and np.all(np.isfinite(y_new)))
        if not finite:
            h *= 0.5
            continue

        err = hs * (K.T @ _E)
        scale = tol.abs + tol.rel * np.maximum(np.abs(y), np.abs(y_new))
        scale = np.where(scale > 0, scale, 1e-300)
        err_norm = _rms_norm(err / scale)
        defect_norm = 0.0
        if err_norm <= 1.0 and defect_control:
            Q = K.T @ _P
            ymag = np.maximum(np.abs(y), np.abs(y_new))
            for x in _DEFECT_X:
                yx = y + hs * (Q @ np.array([x, x * x, x**3, x**4]))
                dq = Q @ np.array([1.0, 2 * x, 3 * x * x, 4 * x**3])
                fx = np.asarray(rhs(t + x * hs, yx), dtype=float).reshape(m)
                nfev += 1
                sc = np.maximum(tol.abs + tol.rel * np.maximum(ymag, np.abs(yx)), 1e-300)
                defect_norm = max(defect_norm, float(np.max(np.abs(dq - fx) / sc)) / DEFECT_TARGET)
            if not math.isfinite(defect_norm):
                h *= 0.5
                continue
        if err_norm <= 1.0 and defect_norm <= 1.0:
            t_new = t1 if abs(t1 - (t + hs)) <= floor else t + hs
            qs.append(K.T @ _P)
            ts.append(t_new)
            ys.append(y_new.copy())
            t, y, f = t_new, y_new, K[6].copy()
            if np.max(np.abs(y)) > max_abs:
                raise NonFiniteState(
                    f"state magnitude {np.max(np.abs(y)):.3g} exceeded cap {max_abs:.3g} at t={t:.6g}",
                    t=t,
                    state=y,
                )
            factor = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm**-0.2)
            if defect_norm > 0:
                factor = min(factor, 0.9 * defect_norm**-0.25)
            h *= max(factor, 0.2)
        elif err_norm > 1.0:
            h *= max(0.2, 0.9 * err_norm**-0.2)
        else:
            # the interpolant's defect scales like h^4
            h *= max(0.2, 0.9 * defect_norm**-0.25)
    else:
        raise StepUnderflow(f"max_steps={max_steps} exhausted at t={t!r}", t=t, state=y)

    return Trajectory(ts, ys, qs if qs else np.zeros((0, m, 4)), nfev)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def gauss_legendre_panels(breaks, order: int = 10):
    """Nodes and weights of composite Gauss-Legendre on consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    if order == 10:
        x, w = _GL_X, _GL_W
    else:
        x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def graded_breakpoints(a: float, b: float, levels: int, ratio: float = 0.5, toward: str = "a"):
    """Breakpoints on [a, b] shrinking geometrically toward one endpoint."""
    k = np.arange(levels + 1)
    frac = np.concatenate([[0.0], ratio ** k[::-1]])
    if toward == "a":
        return a + (b - a) * frac
    return b - (b - a) * frac[::-1]


def _panel_sums(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _GL_X
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise NoConvergence("integrand returned non-finite values")
    return half * (fx @ _GL_W)


def quad_log_singular(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    singular_at_a: bool = False,
    singular_at_b: bool = False,
    tol: Tolerance = Tolerance(1e-10, 1e-14),
    *,
    grading_levels: int = 24,
    max_panels: int = 20_000,
) -> QuadResult:
    """Integrate a vectorized ``f`` over ``(a, b)``.

    Panels next to a flagged endpoint are pre-graded with ratio 1/2; then any
    panel whose 10-point rule disagrees with the rule on its two halves is
    bisected until the summed disagreement meets ``tol``.  The reported value
    uses the refined (half-panel) sums and the summed disagreement is returned
    as the error estimate, which is conservative for smooth panels.
    """
    a, b = float(a), float(b)
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        r = quad_log_singular(f, b, a, singular_at_b, singular_at_a, tol,
                              grading_levels=grading_levels, max_panels=max_panels)
        return QuadResult(-r.value, r.error_estimate, r.evaluations)

    if singular_at_a and singular_at_b:
        m = 0.5 * (a + b)
        left = graded_breakpoints(a, m, grading_levels, toward="a")
        right = graded_breakpoints(m, b, grading_levels, toward="b")
        breaks = np.concatenate([left, right[1:]])
    elif singular_at_a:
        breaks = graded_breakpoints(a, b, grading_levels, toward="a")
    elif singular_at_b:
        breaks = graded_breakpoints(a, b, grading_levels, toward="b")
    else:
        breaks = np.linspace(a, b, 5)

    lo, hi = breaks[:-1].copy(), breaks[1:].copy()
    coarse = _panel_sums(f, lo, hi)
    mid = 0.5 * (lo + hi)
    fl, fr = _panel_sums(f, lo, mid), _panel_sums(f, mid, hi)
    nfev = 30 * lo.size

    while True:
        fine = fl + fr
        # factor 2 covers the first-order convergence of panels touching a log singularity
        err = 2.0 * np.abs(fine - coarse)
        value = float(np.sum(fine))
        total_err = float(np.sum(err))
        target = tol.bound(value)
        if total_err <= target:
            return QuadResult(value, total_err, nfev)
        if lo.size >= max_panels:
            raise NoConvergence(
                f"quadrature error {total_err:.3g} above target {target:.3g} "
                f"after {lo.size} panels (value {value:.12g})"
            )
        # split the panels carrying the largest error until the rest fits in half the target
        order = np.argsort(err)[::-1]
        cum = total_err - np.cumsum(err[order])
        n_split = int(np.searchsorted(-cum, -0.5 * target)) + 1
        n_split = max(1, min(n_split, order.size, max_panels - lo.size))
        split = np.zeros(lo.size, dtype=bool)
        split[order[:n_split]] = True

        s_lo, s_hi, s_mid = lo[split], hi[split], mid[split]
        new_lo = np.concatenate([s_lo, s_mid])
        new_hi = np.concatenate([s_mid, s_hi])
        new_coarse = np.concatenate([fl[split], fr[split]])
        new_mid = 0.5 * (new_lo + new_hi)
        new_fl = _panel_sums(f, new_lo, new_mid)
        new_fr = _panel_sums(f, new_mid, new_hi)
        nfev += 20 * new_lo.size

        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        mid = np.concatenate([mid[keep], new_mid])
        coarse = np.concatenate([coarse[keep], new_coarse])
        fl = np.concatenate([fl[keep], new_fl])
        fr = np.concatenate([fr[keep], new_fr])
        srt = np.argsort(lo)
        lo, hi, mid, coarse, fl, fr = lo[srt], hi[srt], mid[srt], coarse[srt], fl[srt], fr[srt]


# ---------------------------------------------------------------------------
# Bisection
# ---------------------------------------------------------------------------


def bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float,
                     tol: Tolerance = Tolerance(1e-12, 1e-10)) -> float:
    """Locate the point where ``pred`` changes value inside ``[lo, hi]``."""
    p_lo, p_hi = bool(pred(lo)), bool(pred(hi))
    if p_lo == p_hi:
        raise InvalidBracket(f"predicate has the same value {p_lo} at both ends of [{lo}, {hi}]")
    for _ in range(400):
        width = abs(hi - lo)
        if width <= max(tol.abs, tol.rel * max(abs(lo), abs(hi)), 4 * np.finfo(float).eps * max(abs(lo), abs(hi), 1e-300)):
            break
        mid = 0.5 * (lo + hi)
        if bool(pred(mid)) == p_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
