"""Three-dimensional velocity, pressure and velocity gradient of u^{c,gamma}.

With ``y = x3/r``, ``rho = |x'|`` and ``v(x) = (x1 x3/(r rho^2), x2 x3/(r rho^2), -1/r)``
the velocity is ``u = U'(y) x / r^2 + U(y) v(x)``, i.e.

    u_i = (x_i / r^2) U' + (x_i x3 / (r rho^2)) U   (i = 1, 2)
    u_3 = (x3 / r^2) U' - U / r

and the pressure is ``p = (U' - U^2 / (2 sin^2 theta) + c3) / r^2``; the
constant ``c3`` is what makes the stress tensor divergence free off the
axis (without it ``div T = grad(-c3 / r^2)``).  The gradient
follows from the chain rule through ``(r, y)``:

    d_j u_i = U'' (d_j y) x_i / r^2 + U' (delta_ij / r^2 - 2 x_i x_j / r^4)
              + U' (d_j y) v_i + U d_j v_i,
    d_j y   = delta_j3 / r - x3 x_j / r^3,
    d_j v_i = delta_ij x3/(r rho^2) + x_i delta_j3/(r rho^2)
              - x_i x3 x_j/(r^3 rho^2) - 2 x_i x3 x_j [j < 3]/(r rho^4)   (i = 1, 2)
    d_j v_3 = x_j / r^3.

Profile values are always requested with ``1 - y^2 = (rho/r)^2`` supplied
directly, which keeps the evaluation accurate right up to the axis floor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_float_array
from .errors import AxisError, DomainError
from .profile import GammaBounds, ProfileSolution, SolutionParams, solve_profile
from .numerics import Tolerance

__all__ = [
    "AXIS_FLOOR",
    "Point",
    "FieldSample",
    "GradientSample",
    "SingularBoundReport",
    "FieldSampler",
    "eval_profile_derivs",
    "velocity_cartesian",
    "pressure",
    "velocity_gradient",
    "velocity_array",
    "gradient_array",
    "singular_bound_report",
    "write_field_csv",
]

# smallest admissible sin(theta) = rho / r
AXIS_FLOOR = 1e-12


@dataclass(frozen=True)
class Point:
    x1: float
    x2: float
    x3: float

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)

    @property
    def r(self) -> float:
        return math.sqrt(self.x1**2 + self.x2**2 + self.x3**2)

    @property
    def rho(self) -> float:
        return math.hypot(self.x1, self.x2)

    @property
    def y(self) -> float:
        return self.x3 / self.r

    @property
    def phi(self) -> float:
        return math.atan2(self.x2, self.x1)

    def spherical_frame(self):
        """Rows ``e_r, e_theta, e_phi``."""
        r, rho = self.r, self.rho
        ct, st = self.x3 / r, rho / r
        cp, sp = (self.x1 / rho, self.x2 / rho) if rho > 0 else (1.0, 0.0)
        return np.array([[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]])

    def cylindrical_frame(self):
        """Rows ``e_rho, e_phi, e_z``."""
        rho = self.rho
        cp, sp = (self.x1 / rho, self.x2 / rho) if rho > 0 else (1.0, 0.0)
        return np.array([[cp, sp, 0.0], [-sp, cp, 0.0], [0.0, 0.0, 1.0]])

    def scaled(self, lam: float) -> "Point":
        return Point(lam * self.x1, lam * self.x2, lam * self.x3)


@dataclass(frozen=True)
class FieldSample:
    u_r: float
    u_theta: float
    u1: float
    u2: float
    u3: float
    p: float

    @property
    def u(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.u3])


@dataclass(frozen=True)
class GradientSample:
    """``grad[i, j] = d u_i / d x_j``."""

    grad: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.grad))


def _as_points(X) -> np.ndarray:
    if isinstance(X, Point):
        X = X.xyz
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    return X


def _geometry(X):
    X = _as_points(X)
    rho2 = X[:, 0] ** 2 + X[:, 1] ** 2
    r2 = rho2 + X[:, 2] ** 2
    if np.any(r2 == 0):
        raise DomainError("fields are undefined at the origin")
    r = np.sqrt(r2)
    rho = np.sqrt(rho2)
    sin_t = rho / r
    if np.any(sin_t < AXIS_FLOOR):
        raise AxisError(f"point within rho/r < {AXIS_FLOOR:g} of the x3-axis")
    return X, r, rho, X[:, 2] / r, sin_t * sin_t


def eval_profile_derivs(sol: ProfileSolution, y, w=None):
    """``(U, U', U'')`` at ``|y| < 1`` from the profile and its ODE identities."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= 1):
        raise DomainError("profile derivatives need |y| < 1")
    U, dU, d2U = sol.derivatives(y, w)
    if U.ndim == 0:
        return float(U), float(dU), float(d2U)
    return U, dU, d2U


def velocity_array(sol: ProfileSolution, X):
    """Vectorized velocity and pressure: returns ``(u (n, 3), p (n,))``."""
    X, r, rho, y, w = _geometry(X)
    U, dU, _ = sol.derivatives(y, w)
    u = np.empty_like(X)
    a = dU / (r * r)
    b = U * X[:, 2] / (r * rho * rho)
    u[:, 0] = X[:, 0] * (a + b)
    u[:, 1] = X[:, 1] * (a + b)
    u[:, 2] = X[:, 2] * a - U / r
    p = (dU - 0.5 * U * U / w + sol.params.c3) / (r * r)
    return u, p


def gradient_array(sol: ProfileSolution, X):
    """Vectorized ``d u_i / d x_j`` with shape ``(n, 3, 3)``."""
    X, r, rho, y, w = _geometry(X)
    U, dU, d2U = sol.derivatives(y, w)
    n = X.shape[0]
    r2, rho2 = r * r, rho * rho
    x3 = X[:, 2]
    e3 = np.array([0.0, 0.0, 1.0])
    eye = np.eye(3)

    dy = e3[None, :] / r[:, None] - (x3 / r**3)[:, None] * X            # (n, j)
    v = np.column_stack([X[:, 0] * x3 / (r * rho2), X[:, 1] * x3 / (r * rho2), -1.0 / r])

    dv = np.empty((n, 3, 3))
    k = 1.0 / (r * rho2)
    for i in range(2):
        xi = X[:, i]
        dv[:, i, :] = (
            (x3 * k)[:, None] * eye[i][None, :]
            + (xi * k)[:, None] * e3[None, :]
            - (xi * x3 * k / r2)[:, None] * X
            - (2.0 * xi * x3 / (r * rho2 * rho2))[:, None] * X * np.array([1.0, 1.0, 0.0])
        )
    dv[:, 2, :] = X / r[:, None] ** 3

    G = (d2U / r2)[:, None, None] * X[:, :, None] * dy[:, None, :]
    G += (dU / r2)[:, None, None] * eye[None]
    G -= (2.0 * dU / r2**2)[:, None, None] * X[:, :, None] * X[:, None, :]
    G += dU[:, None, None] * v[:, :, None] * dy[:, None, :]
    G += U[:, None, None] * dv
    return G


def velocity_cartesian(sol: ProfileSolution, pt: Point) -> FieldSample:
    u, p = velocity_array(sol, pt)
    r, rho = pt.r, pt.rho
    U, dU, _ = sol.derivatives(np.array([pt.y]), np.array([(rho / r) ** 2]))
    return FieldSample(float(dU[0] / r), float(U[0] / rho), *map(float, u[0]), float(p[0]))


def pressure(sol: ProfileSolution, pt: Point) -> float:
    return float(velocity_array(sol, pt)[1][0])


def velocity_gradient(sol: ProfileSolution, pt: Point) -> GradientSample:
    return GradientSample(gradient_array(sol, pt)[0])


@dataclass(frozen=True)
class SingularBoundReport:
    """Sup of the scaled remainders of the near-axis asymptotics over a sample."""

    ratio_u_theta: float
    ratio_u_r: float
    ratio_grad: float
    n_samples: int

    def as_dict(self):
        return {"ratio_u_theta": self.ratio_u_theta, "ratio_u_r": self.ratio_u_r,
                "ratio_grad": self.ratio_grad, "n_samples": self.n_samples}


def singular_bound_report(sol: ProfileSolution, samples, bounds: GammaBounds | None = None
                          ) -> SingularBoundReport:
    """Remainder ratios of the leading near-axis behaviour of ``u_theta``, ``u_r``, ``|grad u|``."""
    prm = sol.params
    if not prm.in_M(bounds):
        raise DomainError(f"{prm} is not in M")
    X, r, rho, y, w = _geometry(samples)
    K = prm.size
    if K == 0:
        return SingularBoundReport(0.0, 0.0, 0.0, len(X))
    c3 = prm.c3
    U, dU, _ = sol.derivatives(y, w)
    u_theta, u_r = U / rho, dU / r
    log_sin = np.log(rho / r)
    lead_t = -c3 * np.sign(X[:, 2]) * rho / r**2 * log_sin
    lead_r = 2 * c3 / r * log_sin
    gnorm = np.linalg.norm(gradient_array(sol, X), axis=(1, 2))
    lead_g = 2 * abs(c3) / (r * rho)
    return SingularBoundReport(
        float(np.max(np.abs(u_theta - lead_t) * r**2 / (K * rho))),
        float(np.max(np.abs(u_r - lead_r) * r / K)),
        float(np.max(np.abs(gnorm - lead_g) * r**2 / (K * -log_sin))),
        len(X),
    )


def write_field_csv(fh, X, u, p, header: str | None = None):
    """Rows ``x1,x2,x3,u1,u2,u3,p`` with round-trippable float formatting."""
    if header is not None:
        fh.write("# " + header + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x1", "x2", "x3", "u1", "u2", "u3", "p"])
    for xi, ui, pi in zip(np.asarray(X), np.asarray(u), np.asarray(p)):
        writer.writerow([repr(float(v)) for v in (*xi, *ui, pi)])


class FieldSampler(TransformerMixin, BaseEstimator):
    """Estimator front end: ``transform`` maps points ``(n, 3)`` to ``[u1, u2, u3, p]``.

    ``fit`` solves the profile unless an existing ``solution`` is given.
    """

    def __init__(self, c1=0.0, c2=0.0, c3=0.0, gamma=0.0, rtol=1e-10, atol=1e-14,
                 solution=None):
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3
        self.gamma = gamma
        self.rtol = rtol
        self.atol = atol
        self.solution = solution

    def fit(self, X=None, y=None):
        if self.solution is not None:
            self.solution_ = self.solution
        else:
            params = SolutionParams(float(self.c1), float(self.c2), float(self.c3), float(self.gamma))
            self.solution_ = solve_profile(params, tol=Tolerance(self.rtol, self.atol))
        return self

    def transform(self, X):
        check_is_fitted(self, "solution_")
        X = as_float_array(X, ensure_2d=True, n_columns=3)
        u, p = velocity_array(self.solution_, X)
        return np.column_stack([u, p])

    def gradient(self, X):
        check_is_fitted(self, "solution_")
        return gradient_array(self.solution_, as_float_array(X, ensure_2d=True, n_columns=3))
