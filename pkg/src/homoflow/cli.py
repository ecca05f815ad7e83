"""Command-line front end: ``homoflow <command> [options]``.

Every command writes a JSON provenance header (resolved configuration,
library versions) followed by its payload, so rerunning the header's
configuration reproduces the output byte for byte.  CSV outputs carry the
header as a leading ``# {...}`` line; JSON outputs nest it under
``"provenance"``.

Options may also come from ``--config FILE`` with ``key = value`` lines
(``#`` starts a comment; keys use the long option name with ``-`` or ``_``).
Flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import platform
import sys

import numpy as np
import scipy
import sklearn

from . import __version__
from .errors import BlowUp, DomainError, HomoflowError
from .numerics import Tolerance

EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict of raw strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str]):
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(cfg) - set(actions))
    if unknown:
        raise DomainError(f"unknown config keys for '{sub.prog}': {', '.join(unknown)}")
    defaults = {}
    for key, raw in cfg.items():
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            defaults[key] = act.type(raw)
        else:
            defaults[key] = raw
        if act.choices is not None and defaults[key] not in act.choices:
            raise DomainError(f"config key {key}: {raw!r} not in {list(act.choices)}")
    sub.set_defaults(**defaults)


def provenance(command: str, args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "out", "config", "command")}
    return {
        "command": command,
        "config": cfg,
        "versions": {"homoflow": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "scikit-learn": sklearn.__version__, "python": platform.python_version()},
    }


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_json(args, command, payload):
    doc = {"provenance": provenance(command, args), "result": payload}
    with _output(args.out) as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _csv_header(args, command, extra=None) -> dict:
    head = provenance(command, args)
    if extra:
        head.update(extra)
    return head


def _write_header(fh, head: dict):
    fh.write("# " + json.dumps(head, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _params(args):
    from .profile import SolutionParams
    return SolutionParams(args.c1, args.c2, args.c3, args.gamma)


def _solve(args):
    from .profile import solve_profile
    return solve_profile(_params(args), tol=Tolerance(args.tol, args.atol))


def cmd_profile(args) -> int:
    from .profile import chebyshev_grid, expansion_report, solve_profile

    params = _params(args)
    try:
        sol = solve_profile(params, grid_size=args.grid, tol=Tolerance(args.tol, args.atol),
                            matching_width=args.matching_width)
    except BlowUp as exc:
        raise BlowUp(f"profile blows up for gamma={params.gamma!r} ({exc})", gamma=params.gamma,
                     side=exc.side) from exc
    extra = {}
    if params.c1 == 0 and params.c2 == 0:
        extra["expansion"] = expansion_report(sol).as_dict()
    if args.nodes == "uniform":
        # interior nodes -1 + 2k/(grid + 1); grid = 255 puts 0 and 1/2 on the grid exactly
        y = -1.0 + 2.0 * np.arange(1, args.grid + 1) / (args.grid + 1)
    else:
        y = chebyshev_grid(args.grid)
    with _output(args.out) as fh:
        head = _csv_header(args, "profile", extra)
        _write_header(fh, head)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y", "U", "Uprime", "Uprimeprime"])
        U, dU, d2U = sol.derivatives(y)
        for row in zip(y, U, dU, d2U):
            writer.writerow([repr(float(v)) for v in row])
    return 0


def cmd_gamma_bounds(args) -> int:
    from .profile import gamma_bounds

    gb = gamma_bounds((args.c1, args.c2, args.c3), Tolerance(args.tol, args.atol))
    _emit_json(args, "gamma-bounds", {"gamma_minus": gb.gamma_minus, "gamma_plus": gb.gamma_plus,
                                      "gap": gb.gap})
    return 0


def _field_points(args) -> np.ndarray:
    if args.points:
        with open(args.points, encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        return np.array([[float(v) for v in r[:3]] for r in rows])
    rng = np.random.default_rng(args.seed)
    X = rng.normal(size=(args.n_points, 3))
    X /= np.linalg.norm(X, axis=1)[:, None]
    return X * rng.uniform(0.5, 2.0, size=(args.n_points, 1))


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_field(args) -> int:
    from .field import velocity_array, write_field_csv

    sol = _solve(args)
    X = _field_points(args)
    u, p = velocity_array(sol, X)
    with _output(args.out) as fh:
        write_field_csv(fh, X, u, p, json.dumps(_csv_header(args, "field"), sort_keys=True))
    return 0


def cmd_force(args) -> int:
    from .force import (BumpTestFunction, force_constant_b, point_force_constant,
                        stress_integrability, weak_residual)

    sol = _solve(args)
    qtol = Tolerance(args.quad_tol, args.quad_tol * 1e-3)
    if args.action == "b":
        b = force_constant_b(sol, qtol)
        bp = point_force_constant(sol, qtol)
        payload = {"b": b.value, "b_error": b.error_estimate,
                   "b_point": bp.value, "b_point_error": bp.error_estimate}
    elif args.action == "weak":
        phi = BumpTestFunction(radius=args.radius, height=args.height, tilt=args.tilt)
        payload = weak_residual(sol, phi, tol=qtol).as_dict()
    else:
        rep = stress_integrability(sol, q=args.q, radius=args.radius)
        payload = rep.as_dict()
    _emit_json(args, "force", payload)
    return 0


def cmd_hardy(args) -> int:
    from .hardy import WeightParams, estimate_K, failure_exponent_scan

    if args.action == "scan":
        w = WeightParams(args.n, args.p, args.alpha, args.beta, args.alpha_prime)
        deltas = [float(s) for s in args.deltas.split(",")]
        res = failure_exponent_scan(w, deltas)
        if args.format == "csv":
            with _output(args.out) as fh:
                _write_header(fh, _csv_header(args, "hardy", {"fit": res.summary()}))
                res.to_csv(fh)
        else:
            payload = res.summary()
            payload.update(delta=res.deltas, lhs=res.lhs_p, rhs=res.rhs_p, ratio=res.ratio)
            _emit_json(args, "hardy", payload)
    else:
        est = estimate_K(_solve(args), samples=args.samples, seed=args.seed)
        payload = est.as_dict()
        size = abs(args.c3) + abs(args.gamma)
        payload["K_hat_over_size"] = est.K_hat / size if size > 0 else 0.0
        _emit_json(args, "hardy", payload)
    return 0


def cmd_simulate(args) -> int:
    from .evolve import DomainSpec, energy_inequality_check, run

    spec = DomainSpec(args.r_min, args.r_max, args.theta_min, args.n_r, args.n_theta)
    dt = "auto" if args.dt == "auto" else float(args.dt)
    hist, _ = run(spec, _params(args), args.kind, args.amplitude, args.t_end, dt,
                  n_samples=args.samples, linearized=not args.nonlinear, seed=args.seed,
                  mode=args.mode, k_samples=args.k_samples)
    check = energy_inequality_check(hist).as_dict()
    summary = {"inequality": check, "run": hist.meta,
               "E_final_over_E0": hist.E[-1] / hist.E[0] if hist.E[0] > 0 else 0.0}
    if args.format == "csv":
        with _output(args.out) as fh:
            _write_header(fh, _csv_header(args, "simulate", summary))
            hist.to_csv(fh)
    else:
        summary.update(t=hist.t, E=hist.E, D=hist.D)
        _emit_json(args, "simulate", summary)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, *, params=True):
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--out", default="-", help="output path (default: stdout)")
    if params:
        p.add_argument("--c1", type=float, default=0.0)
        p.add_argument("--c2", type=float, default=0.0)
        p.add_argument("--c3", type=float, default=0.0)
        p.add_argument("--gamma", type=float, default=0.0)
        p.add_argument("--tol", type=float, default=1e-10, help="relative ODE tolerance")
        p.add_argument("--atol", type=float, default=1e-14, help="absolute ODE tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homoflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"homoflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="solve the profile ODE and tabulate U, U', U''")
    _common(p)
    p.add_argument("--grid", type=int, default=255, help="number of interior output nodes")
    p.add_argument("--nodes", choices=["uniform", "chebyshev"], default="uniform")
    p.add_argument("--matching-width", type=float, default=1e-6)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("gamma-bounds", aliases=["gamma_bounds"], help="admissible gamma interval for c")
    _common(p, params=False)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--c3", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-12, help="relative bisection tolerance")
    p.add_argument("--atol", type=float, default=1e-10, help="absolute bisection tolerance")
    p.set_defaults(func=cmd_gamma_bounds)

    p = sub.add_parser("field", help="velocity and pressure at sample points")
    _common(p)
    p.add_argument("--points", help="CSV of x1,x2,x3 (default: seeded random cloud)")
    p.add_argument("--n-points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("force", help="force constant, weak residual or stress integrability")
    p.add_argument("action", choices=["b", "weak", "integrability"])
    _common(p)
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--height", type=float, default=1.0)
    p.add_argument("--tilt", type=float, default=0.5)
    p.add_argument("--q", type=float, default=1.4, help="integrability exponent (< 3/2)")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("hardy", help="counterexample exponent scan or bilinear constant")
    p.add_argument("action", choices=["scan", "K"])
    _common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=-0.5)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--alpha-prime", type=float, default=0.0)
    p.add_argument("--deltas", default="0.1,0.01,0.001,0.0001")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("simulate", help="perturbation energy history on a spherical shell")
    _common(p)
    p.add_argument("--r-min", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--theta-min", type=float, default=0.05)
    p.add_argument("--n-r", type=int, default=64)
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--kind", choices=["eigenmode", "random"], default="random")
    p.add_argument("--mode", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=0.02)
    p.add_argument("--dt", default="auto", help="time step or 'auto'")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--nonlinear", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-samples", type=int, default=16, help="pairs for the smallness certificate")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
            _apply_config(sub.choices[args.command], read_config(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except HomoflowError as exc:
        print(f"homoflow {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"homoflow {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
