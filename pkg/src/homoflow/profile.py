"""Angular profile of the (-1)-homogeneous axisymmetric no-swirl family.

The profile ``U(y)``, ``y = cos(theta)``, solves the Riccati-type equation

    (1 - y^2) U' + 2 y U + U^2 / 2 = c1 (1 - y) + c2 (1 + y) + c3 (1 - y^2),
    U(0) = gamma,

which is singular at both poles ``y = +-1``.  Each half of ``(-1, 1)`` is
integrated in the distance-to-pole variable ``s = 1 - |y|`` so that
``1 - y^2 = s (2 - s)`` keeps full relative precision down to tiny ``s``.
Inside ``1 - y^2 < matching_width`` the numerical trajectory is replaced by
the local asymptotic expansion at the pole, whose free constant is fitted
to the integrated value at the switch point.

Derivatives are never obtained by differencing: ``U'`` comes from the
equation itself and ``U''`` from its ``y``-derivative

    (1 - y^2) U'' + 2 U + U U' = -c1 + c2 - 2 c3 y.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_float_array
from .errors import BlowUp, DomainError, NonFiniteState, PoleError
from .numerics import Tolerance, Trajectory, bisect_predicate, integrate_adaptive

__all__ = [
    "SolutionParams",
    "GammaBounds",
    "ProfileSolution",
    "ExpansionReport",
    "ProfileSolver",
    "cbar3",
    "solve_profile",
    "gamma_bounds",
    "boundary_values",
    "profile_c0_closed_form",
    "profile_linearized",
    "expansion_report",
    "read_profile_csv",
]

DEFAULT_TOL = Tolerance(1e-10, 1e-14)
DEFAULT_MATCHING_WIDTH = 1e-6
MAGNITUDE_CAP = 1e6


def cbar3(c1: float, c2: float) -> float:
    """Lower edge of the admissible ``c3`` range for given ``(c1, c2)``."""
    if c1 < -1 or c2 < -1:
        raise DomainError(f"cbar3 needs c1 >= -1 and c2 >= -1, got ({c1}, {c2})")
    s = math.sqrt(1 + c1) + math.sqrt(1 + c2)
    return -0.5 * s * (s + 2)


@dataclass(frozen=True)
class SolutionParams:
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    gamma: float = 0.0

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    @property
    def size(self) -> float:
        """``|c| + |gamma|``, the scale appearing in all remainder bounds."""
        return math.sqrt(self.c1**2 + self.c2**2 + self.c3**2) + abs(self.gamma)

    def in_J(self) -> bool:
        if self.c1 < -1 or self.c2 < -1:
            return False
        return self.c3 >= cbar3(self.c1, self.c2)

    def in_M(self, bounds: "GammaBounds | None" = None) -> bool:
        if self.c1 != 0 or self.c2 != 0 or not self.c3 > -4:
            return False
        gb = bounds if bounds is not None else gamma_bounds(self.c)
        return gb.gamma_minus < self.gamma < gb.gamma_plus

    def rhs(self, y, w=None):
        """Right-hand side of the profile equation; ``w`` is ``1 - y^2`` if known."""
        if w is None:
            w = 1.0 - y * y
        return self.c1 * (1 - y) + self.c2 * (1 + y) + self.c3 * w

    def rhs_prime(self, y):
        return -self.c1 + self.c2 - 2.0 * self.c3 * y


@dataclass(frozen=True)
class GammaBounds:
    gamma_minus: float
    gamma_plus: float
    c: tuple[float, float, float]
    tol: Tolerance

    @property
    def gap(self) -> float:
        return self.gamma_plus - self.gamma_minus


# ---------------------------------------------------------------------------
# local expansions at the poles
# ---------------------------------------------------------------------------


def _s_of_w(w):
    """Distance to the pole where ``1 - y^2 = w``, without cancellation."""
    return w / (1.0 + math.sqrt(1.0 - w))


def _series_M_right(s, c3, A):
    """Third-order expansion at y = 1 (s = 1 - y) for c1 = c2 = 0, U(1) = 0."""
    # s log(s)^k -> 0, so the pole value is taken by evaluating at s = 1 instead
    L = np.log(np.where(s > 0, s, 1.0))
    q2 = -c3 * (A + c3 - 1) / 2
    r2 = (A * A + 2 * A * c3 - 2 * A + 2 * c3 * c3 - 2 * c3) / 4
    p30 = (4 * A**3 + 14 * A**2 * c3 - 8 * A**2 + 22 * A * c3**2 - 24 * A * c3
           + 11 * c3**3 - 20 * c3**2 + 8 * c3) / 64
    p31 = -c3 * (6 * A**2 + 14 * A * c3 - 8 * A + 11 * c3**2 - 12 * c3) / 32
    p32 = c3**2 * (6 * A + 7 * c3 - 4) / 32
    p33 = -c3**3 / 16
    return (s * (-c3 * L + A)
            + s**2 * (c3 * c3 / 4 * L**2 + q2 * L + r2)
            + s**3 * (((p33 * L + p32) * L + p31) * L + p30))


@dataclass(frozen=True)
class _PoleExpansion:
    """Continuation of U past the matching point at one pole.

    ``side`` is +1 for y = 1 and -1 for y = -1; ``s`` is the distance to
    the pole.  ``kind`` selects the functional form.
    """

    side: int
    kind: str
    u_end: float
    A: float
    lam: float = 1.0
    B: float = 0.0
    c3: float = 0.0

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "M":
            if self.side > 0:
                return _series_M_right(s, self.c3, self.A)
            return -_series_M_right(s, self.c3, -self.A)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "power":
                v = self.A * s**self.lam + self.B * s
            elif self.kind == "resonant":
                v = self.A * s + self.B * np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
            else:  # "forced": no free homogeneous mode
                v = self.B * s + self.A * s * s
        return self.u_end + v


def _fit_expansion(side: int, params: SolutionParams, s_m: float, u_m: float) -> _PoleExpansion:
    c1, c2, c3 = params.c
    if side > 0:
        cands = (-2 + 2 * math.sqrt(1 + c2), -2 - 2 * math.sqrt(1 + c2))
    else:
        cands = (2 - 2 * math.sqrt(1 + c1), 2 + 2 * math.sqrt(1 + c1))
    u_end = min(cands, key=lambda v: abs(v - u_m))

    if c1 == 0 and c2 == 0 and u_end == 0.0:
        # Newton on the free constant of the third-order series
        A = u_m / s_m + side * c3 * math.log(s_m)
        for _ in range(30):
            r = float(_PoleExpansion(side, "M", 0.0, A, c3=c3)(s_m)) - u_m
            h = 1e-6 * max(1.0, abs(A))
            dr = (float(_PoleExpansion(side, "M", 0.0, A + h, c3=c3)(s_m)) - u_m - r) / h
            step = r / dr
            A -= step
            if abs(step) <= 1e-15 * max(1.0, abs(A)):
                break
        return _PoleExpansion(side, "M", 0.0, A, c3=c3)

    # leading-order Frobenius form: -2 s v_s + k v = D s
    if side > 0:
        k = 2 + u_end
        D = c1 - c2 + 2 * c3 + 2 * u_end
    else:
        k = 2 - u_end
        D = c1 - c2 - 2 * c3 + 2 * u_end
    lam = k / 2
    v_m = u_m - u_end
    if abs(lam - 1) <= 1e-8:
        B = -D / 2
        A = (v_m - B * s_m * math.log(s_m)) / s_m
        return _PoleExpansion(side, "resonant", u_end, A, 1.0, B, c3)
    B = D / (k - 2)
    if lam > 0:
        A = (v_m - B * s_m) / s_m**lam
        return _PoleExpansion(side, "power", u_end, A, lam, B, c3)
    A = (v_m - B * s_m) / s_m**2
    return _PoleExpansion(side, "forced", u_end, A, lam, B, c3)


# ---------------------------------------------------------------------------
# solution object
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileSolution:
    """Immutable profile ``U`` on ``(-1, 1)`` with derivative access.

    ``grid``/``values`` are a Chebyshev-clustered sampling for export; any
    other point is evaluated from the dense output (or pole expansion).
    """

    params: SolutionParams
    grid: np.ndarray
    values: np.ndarray
    endpoint_values: tuple[float, float]
    matching_width: float
    tol: Tolerance
    _right: Trajectory | None = field(repr=False, default=None)
    _left: Trajectory | None = field(repr=False, default=None)
    _exp_right: _PoleExpansion | None = field(repr=False, default=None)
    _exp_left: _PoleExpansion | None = field(repr=False, default=None)

    @property
    def s_match(self) -> float:
        return _s_of_w(self.matching_width)

    @property
    def is_zero(self) -> bool:
        return self._right is None

    def _u_half(self, side: int, s):
        s = np.asarray(s, dtype=float)
        if self.is_zero:
            return np.zeros_like(s)
        traj, exp = (self._right, self._exp_right) if side > 0 else (self._left, self._exp_left)
        out = np.empty_like(s)
        inner = s < self.s_match
        if np.any(inner):
            out[inner] = exp(s[inner])
        if np.any(~inner):
            out[~inner] = traj(np.minimum(s[~inner], 1.0))[..., 0]
        return out

    @staticmethod
    def _split(y, w):
        y = np.asarray(y, dtype=float)
        if w is None:
            ay = np.abs(y)
            s = 1.0 - ay
        else:
            w = np.broadcast_to(np.asarray(w, dtype=float), y.shape)
            s = w / (1.0 + np.sqrt(1.0 - w))
        return y, s

    def u_at(self, y, w=None):
        """U at ``y``; pass ``w = 1 - y^2`` when it is known more accurately."""
        y, s = self._split(y, w)
        if np.any(s < 0):
            raise DomainError("profile evaluated outside [-1, 1]")
        out = np.empty(y.shape)
        pos = y >= 0
        if np.any(pos):
            out[pos] = self._u_half(+1, s[pos])
        if np.any(~pos):
            out[~pos] = self._u_half(-1, s[~pos])
        return out

    def derivatives(self, y, w=None):
        """``(U, U', U'')`` at interior points, derivatives from ODE identities."""
        y, s = self._split(y, w)
        if np.any(s <= 0):
            raise DomainError("derivatives need |y| < 1")
        ww = s * (2.0 - s) if w is None else np.broadcast_to(np.asarray(w, dtype=float), y.shape)
        U = self.u_at(y, ww)
        p = self.params
        dU = (p.rhs(y, ww) - 2.0 * y * U - 0.5 * U * U) / ww
        d2U = (p.rhs_prime(y) - 2.0 * U - U * dU) / ww
        return U, dU, d2U

    def derivatives_s(self, side: int, s):
        """``(U, U', U'')`` at ``y = side * (1 - s)`` (derivatives in ``y``)."""
        s = np.asarray(s, dtype=float)
        w = s * (2.0 - s)
        y = side * (1.0 - s)
        return self.derivatives(y, w)

    def ode_residual(self, y):
        """Residual of the profile equation with ``U'`` taken from the dense output."""
        y = np.asarray(y, dtype=float)
        if self.is_zero:
            return np.zeros_like(y)
        s = 1.0 - np.abs(y)
        w = s * (2.0 - s)
        U = self.u_at(y, w)
        dU = np.empty_like(y)
        for side, traj in ((+1, self._right), (-1, self._left)):
            m = (y >= 0) if side > 0 else (y < 0)
            if np.any(m):
                # d/dy = -side * d/ds
                dU[m] = -side * traj.derivative(s[m])[..., 0]
        return w * dU + 2 * y * U + 0.5 * U * U - self.params.rhs(y, w)

    def table(self):
        U, dU, d2U = self.derivatives(self.grid)
        return np.column_stack([self.grid, U, dU, d2U])

    def to_csv(self, fh, header: dict | None = None):
        """Write ``y,U,Uprime,Uprimeprime`` rows after a ``#``-prefixed JSON header."""
        meta = {
            "params": {"c1": self.params.c1, "c2": self.params.c2, "c3": self.params.c3,
                       "gamma": self.params.gamma},
            "tol": {"rel": self.tol.rel, "abs": self.tol.abs},
            "matching_width": self.matching_width,
            "grid_size": int(self.grid.size),
            "endpoint_values": list(self.endpoint_values),
        }
        if header:
            meta.update(header)
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y", "U", "Uprime", "Uprimeprime"])
        for row in self.table():
            writer.writerow([repr(float(v)) for v in row])


def read_profile_csv(fh):
    """Inverse of :meth:`ProfileSolution.to_csv`: returns ``(header, array)``."""
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    first = fh.readline()
    if not first.startswith("# "):
        raise ValueError("missing JSON header line")
    header = json.loads(first[2:])
    rows = list(csv.reader(fh))
    if rows[0] != ["y", "U", "Uprime", "Uprimeprime"]:
        raise ValueError(f"unexpected columns {rows[0]}")
    return header, np.array([[float(v) for v in r] for r in rows[1:]])


def chebyshev_grid(n: int) -> np.ndarray:
    """``n`` strictly increasing interior Chebyshev points, clustered at +-1."""
    if n < 1:
        raise ValueError("grid_size must be >= 1")
    k = np.arange(1, n + 1)
    g = -np.cos(k * np.pi / (n + 1))
    if n % 2 == 1:
        g[n // 2] = 0.0
    return g


def _half_rhs(params: SolutionParams, side: int):
    c1, c2, c3 = params.c

    def rhs(s, u):
        U = u[0]
        w = s * (2.0 - s)
        y = side * (1.0 - s)
        # overflow near a blow-up is detected by the integrator, not here
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            F = c1 * (1 - y) + c2 * (1 + y) + c3 * w - 2.0 * y * U - 0.5 * U * U
            return np.array([-side * F / w])

    return rhs


# Local error control is kept this much tighter than the requested tolerance
# so that the accumulated global error stays below it.
LOCAL_TOL_FACTOR = 0.05


def _integrate_half(params, side, s_end, tol, max_abs=MAGNITUDE_CAP):
    tol = Tolerance(tol.rel * LOCAL_TOL_FACTOR, tol.abs * LOCAL_TOL_FACTOR)
    try:
        # the interpolant is never differentiated (derivatives come from the ODE), and the
        # 1/w factor near the pole would drive a defect-controlled step to underflow
        return integrate_adaptive(_half_rhs(params, side), [params.gamma], (1.0, s_end), tol,
                                  max_abs=max_abs, defect_control=False)
    except NonFiniteState as exc:
        where = "y -> 1" if side > 0 else "y -> -1"
        y_at = None if exc.t is None else side * (1.0 - exc.t)
        raise BlowUp(
            f"profile with gamma={params.gamma!r} blew up toward {where}"
            + ("" if y_at is None else f" near y={y_at:.6g}"),
            gamma=params.gamma, side=side, t=exc.t, state=exc.state,
        ) from exc


def solve_profile(
    params: SolutionParams,
    grid_size: int = 257,
    tol: Tolerance = DEFAULT_TOL,
    *,
    matching_width: float = DEFAULT_MATCHING_WIDTH,
    check_bounds: bool = True,
) -> ProfileSolution:
    """Solve the profile equation for ``params``.

    Raises
    ------
    DomainError
        ``c`` outside J.
    BlowUp
        The trajectory exceeds the magnitude cap before the matching point,
        or (when ``check_bounds`` and ``c1 = c2 = 0``) gamma lies outside the
        bisected admissible range.
    """
    if not params.in_J():
        raise DomainError(f"c = {params.c} is not in J")
    if not 0 < matching_width < 1:
        raise ValueError("matching_width must lie in (0, 1)")
    grid = chebyshev_grid(grid_size)
    if params.c == (0.0, 0.0, 0.0) and params.gamma == 0.0:
        return ProfileSolution(params, grid, np.zeros_like(grid), (0.0, 0.0), matching_width, tol)

    if check_bounds and params.c1 == 0 and params.c2 == 0:
        gb = gamma_bounds(params.c)
        slack = 10 * gb.tol.abs
        if not gb.gamma_minus - slack <= params.gamma <= gb.gamma_plus + slack:
            raise BlowUp(
                f"gamma={params.gamma!r} outside [{gb.gamma_minus:.10g}, {gb.gamma_plus:.10g}]",
                gamma=params.gamma,
            )

    s_m = _s_of_w(matching_width)
    right = _integrate_half(params, +1, s_m, tol)
    left = _integrate_half(params, -1, s_m, tol)
    exp_r = _fit_expansion(+1, params, s_m, float(right.y_end[0]))
    exp_l = _fit_expansion(-1, params, s_m, float(left.y_end[0]))
    sol = ProfileSolution(params, grid, np.empty(0), (exp_l.u_end, exp_r.u_end), matching_width,
                          tol, right, left, exp_r, exp_l)
    object.__setattr__(sol, "values", sol.u_at(grid))
    return sol


# ---------------------------------------------------------------------------
# admissible gamma range
# ---------------------------------------------------------------------------


def _blows_up(c, gamma, side, s_end, tol):
    try:
        _integrate_half(SolutionParams(*c, gamma), side, s_end, tol)
    except BlowUp:
        return True
    return False


def _transition(pred, start: float, toward: float, tol: Tolerance) -> float:
    """Expand geometrically from ``start`` until ``pred`` flips, then bisect."""
    p0 = pred(start)
    step = toward * (1.0 if not p0 else -1.0)
    a, x = start, start + step
    for _ in range(60):
        if pred(x) != p0:
            break
        a, step = x, 2 * step
        x = x + step
    else:
        raise DomainError("could not bracket the blow-up transition")
    lo, hi = (a, x) if a < x else (x, a)
    return bisect_predicate(pred, lo, hi, tol)


@functools.lru_cache(maxsize=256)
def _gamma_bounds_cached(c, tol, eta):
    s_end = _s_of_w(eta)
    ode_tol = Tolerance(1e-8, 1e-14)
    g_plus = _transition(lambda g: _blows_up(c, g, -1, s_end, ode_tol), 0.0, +1.0, tol)
    g_minus = _transition(lambda g: _blows_up(c, g, +1, s_end, ode_tol), 0.0, -1.0, tol)
    if g_minus > g_plus:
        # only possible within the resolution of the transition at c3 = cbar3
        mid = 0.5 * (g_minus + g_plus)
        g_minus = g_plus = mid
    return GammaBounds(g_minus, g_plus, c, tol)


def gamma_bounds(c: Sequence[float], tol: Tolerance = Tolerance(1e-12, 1e-10), *,
                 eta: float = 1e-22) -> GammaBounds:
    """Admissible range ``[gamma_minus(c), gamma_plus(c)]`` by blow-up bisection.

    ``gamma_plus`` is the largest ``U(0)`` whose trajectory reaches
    ``1 - y^2 = eta`` on the ``y < 0`` side without exceeding the magnitude
    cap; ``gamma_minus`` is the mirror statement on the ``y > 0`` side.
    """
    c = tuple(float(v) for v in c)
    if len(c) != 3:
        raise ValueError("c must be a triple")
    if not SolutionParams(*c).in_J():
        raise DomainError(f"c = {c} is not in J")
    return _gamma_bounds_cached(c, tol, float(eta))


def boundary_values(params: SolutionParams, gb: GammaBounds) -> tuple[float, float]:
    """``(U(-1), U(1))`` from the pole-value table, given the gamma range."""
    slack = 10 * gb.tol.abs
    g = params.gamma
    if not gb.gamma_minus - slack <= g <= gb.gamma_plus + slack:
        raise DomainError(f"gamma={g} outside [{gb.gamma_minus}, {gb.gamma_plus}]")
    r1, r2 = math.sqrt(1 + params.c1), math.sqrt(1 + params.c2)
    at_plus = abs(g - gb.gamma_plus) <= slack
    at_minus = abs(g - gb.gamma_minus) <= slack
    u_left = 2 + 2 * r1 if at_plus else 2 - 2 * r1
    u_right = -2 - 2 * r2 if at_minus else -2 + 2 * r2
    return u_left, u_right


# ---------------------------------------------------------------------------
# closed-form oracles
# ---------------------------------------------------------------------------


def profile_c0_closed_form(gamma: float, y):
    """Exact profile for ``c = 0``: ``gamma (1 - y^2) / (1 + gamma y / 2)``.

    Only ``|gamma| <= 2`` gives a profile that is global on ``[-1, 1]``; for
    larger ``|gamma|`` the formula is still returned away from its pole.
    """
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) > 1):
        raise DomainError("|y| must be <= 1")
    den = 1.0 + 0.5 * gamma * y
    pole = den == 0
    if np.any(pole & (np.abs(y) != 1)):
        raise PoleError(f"1 + gamma*y/2 vanishes inside (-1, 1) for gamma={gamma!r}")
    out = gamma * (1.0 - y * y) / np.where(pole, 1.0, den)
    if np.any(pole):
        # removable: for gamma = 2 sg the profile is 2 sg (1 - sg y)
        sg = math.copysign(1.0, gamma)
        out = np.where(pole, 2 * sg * (1 - sg * y), out)
    return out if out.ndim else float(out)


def profile_linearized(c3: float, gamma: float, y):
    """First-order profile ``(1 - y^2)(gamma + c3 artanh y)`` for ``c1 = c2 = 0``.

    Dropping ``U^2/2`` leaves ``d/dy [U / (1 - y^2)] = c3 / (1 - y^2)``.  Near
    ``y = +-1`` this reproduces ``-(c3/2) sgn(y) (1 - y^2) ln(1 - y^2)``.
    """
    y = np.asarray(y, dtype=float)
    w = 1.0 - y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.abs(y) < 1
        out = np.where(inner, w * (gamma + c3 * np.arctanh(np.where(inner, y, 0.0))), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# expansion check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionReport:
    ratio_U: float
    ratio_dU: float
    ratio_d2U: float
    window: tuple[float, float]

    def as_dict(self):
        return {"ratio_U": self.ratio_U, "ratio_dU": self.ratio_dU,
                "ratio_d2U": self.ratio_d2U, "window": list(self.window)}


def expansion_report(sol: ProfileSolution, window=(0.9, 1 - 1e-6), n_samples: int = 400,
                     bounds: GammaBounds | None = None) -> ExpansionReport:
    """Sup over ``|y|`` in ``window`` of the scaled pole-expansion remainders."""
    p = sol.params
    if not p.in_M(bounds):
        raise DomainError(f"{p} is not in M")
    lo, hi = window
    if not 0 <= lo < hi < 1:
        raise ValueError("window must satisfy 0 <= lo < hi < 1")
    K = p.size
    if K == 0:
        return ExpansionReport(0.0, 0.0, 0.0, (lo, hi))
    d = np.geomspace(1 - lo, 1 - hi, n_samples)
    r1 = r2 = r3 = 0.0
    for side in (+1, -1):
        U, dU, d2U = sol.derivatives_s(side, d)
        w = d * (2 - d)
        y = side * (1 - d)
        Lw = np.log(w)
        lead = -0.5 * p.c3 * side * w * Lw
        r1 = max(r1, float(np.max(np.abs(U - lead) / (K * w))))
        r2 = max(r2, float(np.max(np.abs(dU - p.c3 * Lw) / K)))
        r3 = max(r3, float(np.max(np.abs(d2U + 2 * p.c3 * y / w) / (K * Lw**2))))
    return ExpansionReport(r1, r2, r3, (lo, hi))


# ---------------------------------------------------------------------------
# estimator front end
# ---------------------------------------------------------------------------


class ProfileSolver(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`solve_profile`.

    ``fit`` solves the profile for the configured parameters; ``predict``
    returns ``U(y)`` and ``transform`` returns the columns ``U, U', U''``.
    """

    def __init__(self, c1=0.0, c2=0.0, c3=0.0, gamma=0.0, grid_size=257, rtol=1e-10,
                 atol=1e-14, matching_width=DEFAULT_MATCHING_WIDTH, check_bounds=True):
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3
        self.gamma = gamma
        self.grid_size = grid_size
        self.rtol = rtol
        self.atol = atol
        self.matching_width = matching_width
        self.check_bounds = check_bounds

    def fit(self, X=None, y=None):
        params = SolutionParams(float(self.c1), float(self.c2), float(self.c3), float(self.gamma))
        self.solution_ = solve_profile(params, int(self.grid_size), Tolerance(self.rtol, self.atol),
                                       matching_width=self.matching_width,
                                       check_bounds=self.check_bounds)
        return self

    def predict(self, X):
        check_is_fitted(self, "solution_")
        y = as_float_array(X).ravel()
        return self.solution_.u_at(y)

    def transform(self, X):
        check_is_fitted(self, "solution_")
        y = as_float_array(X).ravel()
        return np.column_stack(self.solution_.derivatives(y))
