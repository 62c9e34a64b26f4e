"""Command-line front end.

Every subcommand is deterministic given its flags (including --threads) and
writes tables through the fieldgrid exporters.  Repeated value flags form
sweeps; with more than one sweep value the output path gains a
``_<name><value>`` suffix per member so each run maps to one file.

Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 domain or
validity error.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import classical, fieldgrid, gaussian, thermo
from .errors import DomainError, NumericalError, UsageError
from .fieldgrid import GridSpec, export_table
from .gaussian import GaussianEnsembleParams
from .model import HamiltonianKind, PhasePoint, SeparableHamiltonian
from .thermo import ThermalEnsembleParams

_EXIT_OK = 0
_EXIT_NUMERICAL = 1
_EXIT_USAGE = 2
_EXIT_DOMAIN = 3


def _fmt(v):
    return format(float(v), ".12g")


def _say(**kv):
    for key, value in kv.items():
        if isinstance(value, float):
            value = _fmt(value)
        print(f"{key}={value}")


def _sweep_path(base, name, value, multiple):
    if not multiple:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}_{name}{format(value, 'g')}{ext}"


def _measure_period(model, *, eps=None, start=None, step):
    last = None
    for duration in (40.0, 80.0, 160.0, 320.0, 640.0):
        try:
            if start is None:
                spec = classical.OrbitSpec.from_energy(
                    model, eps, step=step, duration=duration)
            else:
                spec = classical.OrbitSpec.from_point(
                    model, start, step=step, duration=duration)
            return classical.orbit_period(spec)
        except NumericalError as exc:
            last = exc
    raise last


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_orbit(args):
    kind = HamiltonianKind.TODA if args.model == "toda" else HamiltonianKind.LV
    model = SeparableHamiltonian(kind, args.a)
    eps_values = args.eps or [2.5]
    multiple = len(eps_values) > 1
    for eps in eps_values:
        if args.x0 is not None or args.k0 is not None:
            start = PhasePoint(args.x0 or 0.0, args.k0 or 0.0)
            eps = classical.energy(model, start)
        else:
            start = classical.section_start(model, eps)
        period = _measure_period(model, start=start, step=args.dt)
        duration = max(args.periods * period, 2.0 * args.dt)
        spec = classical.OrbitSpec.from_point(model, start, step=args.dt,
                                              duration=duration)
        traj = classical.integrate_orbit(spec)
        path = _sweep_path(args.out, "eps", eps, multiple)
        export_table(traj, args.format, path)
        _say(model=args.model, eps=eps, period=period,
             max_energy_drift=traj.max_drift, rows=len(traj), out=path)
    return _EXIT_OK


def cmd_analytic(args):
    eps_values = args.eps
    multiple = len(eps_values) > 1
    summaries = []
    for eps in eps_values:
        closed = classical.toda_closed_period(eps, step=args.dt)
        tau_max = args.tau_max if args.tau_max > 0 else closed.period_ode
        taus = np.linspace(0.0, tau_max, args.samples)
        ys, zs = classical.toda_species_series(eps, taus, step=args.dt)
        rows = [{"tau": float(t), "T": 0.5 * (y + z), "y": y, "z": z}
                for t, y, z in zip(taus, ys, zs)]
        path = _sweep_path(args.out, "eps", eps, multiple)
        export_table(rows, args.format, path)
        summary = {
            "eps": eps, "kappa": closed.kappa, "t_plus": closed.t_plus,
            "t_minus": closed.t_minus, "period_formula": closed.period_formula,
            "period_ode": closed.period_ode, "period_ratio": closed.period_ratio,
            "convention": closed.convention.value, "t_source": closed.t_source,
        }
        summaries.append(summary)
        _say(out=path, **summary)
    stem, _ = os.path.splitext(args.out)
    export_table(summaries, "json", stem + "_summary.json")
    return _EXIT_OK


def cmd_thermo(args):
    a_values = args.a or [1.0]
    if not (args.beta_min > 0.0 and args.beta_max > args.beta_min):
        raise DomainError("need 0 < beta-min < beta-max")
    betas = np.linspace(args.beta_min, args.beta_max, args.steps)
    rows = []
    any_valid = False
    for a in a_values:
        for beta in betas:
            rec = {"a": a, "beta": float(beta)}
            if args.order == "classical":
                obs = thermo.observables(ThermalEnsembleParams(float(beta), a))
                rec.update(z=obs.z0, energy=obs.energy,
                           heat_capacity=obs.heat_capacity, valid=1)
                any_valid = True
            else:
                try:
                    params = ThermalEnsembleParams(float(beta), a, "h2")
                    obs = thermo.observables(params)
                    rec.update(z=obs.z_st, energy=obs.energy,
                               heat_capacity=obs.heat_capacity, valid=1)
                    any_valid = True
                except DomainError:
                    rec.update(z=0.0, energy=0.0, heat_capacity=0.0, valid=0)
            rows.append(rec)
    if not any_valid:
        raise DomainError(
            "the whole requested beta range lies outside the validity domain; "
            + ", ".join(f"beta*(a={a}) = {thermo.beta_star(a):.4f}"
                        for a in a_values))
    export_table(rows, args.format, args.out)
    _say(order=args.order, rows=len(rows), out=args.out)
    for a in a_values:
        _say(**{f"beta_star_a{format(a, 'g')}": thermo.beta_star(a)})
    return _EXIT_OK


def _grid_from_args(args):
    x_lo, x_hi, k_lo, k_hi = args.bbox
    return GridSpec(x_lo, x_hi, k_lo, k_hi, args.grid, args.grid)


def cmd_field(args):
    spec = _grid_from_args(args)
    if args.ensemble == "gaussian":
        sweep = args.alpha or [1.0]
        name = "alpha"

        def make(v):
            return GaussianEnsembleParams(v, args.a)
    else:
        sweep = args.beta or [1.0]
        name = "beta"

        def make(v):
            return ThermalEnsembleParams(v, args.a, args.order)

    multiple = len(sweep) > 1
    for value in sweep:
        grid = fieldgrid.sample_field(make(value), args.quantity, spec,
                                      threads=args.threads)
        path = _sweep_path(args.out, name, value, multiple)
        export_table(grid, args.format, path)
        _say(ensemble=args.ensemble, **{name: value}, quantity=args.quantity,
             rows=spec.nx * spec.nk, out=path)
    return _EXIT_OK


def cmd_stagnation(args):
    bbox = tuple(args.bbox)
    reach = max(abs(v) for v in bbox)
    limit = gaussian.TRUST_FACTOR / args.alpha_max
    if reach > limit:
        raise DomainError(
            f"bbox reach {reach} exceeds the trust region |x|,|k| <= "
            f"{limit:.4f} at alpha-max = {args.alpha_max}")
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.alpha_steps)
    records = []
    for alpha in alphas:
        params = GaussianEnsembleParams(float(alpha), args.a)
        points = gaussian.find_stagnation_points(params, bbox, grid=args.grid)
        rec = {
            "alpha": float(alpha),
            "points": [
                {"x": s.location.x, "k": s.location.k, "residual": s.residual,
                 "circulation": s.circulation, "class": s.kind}
                for s in points
            ],
        }
        if args.emit_envelope:
            spec = GridSpec(*bbox, args.grid, args.grid)
            wgrid = fieldgrid.sample_field(params, "w", spec,
                                           threads=args.threads)
            mag = np.hypot(wgrid.values[..., 0], wgrid.values[..., 1])
            mask = (mag < args.envelope_threshold) & wgrid.valid
            xs, ks = spec.x_nodes(), spec.k_nodes()
            jj, ii = np.nonzero(mask)
            rec["envelope_nodes"] = [[float(xs[i]), float(ks[j])]
                                     for j, i in zip(jj, ii)]
        records.append(rec)
        _say(alpha=float(alpha), stagnation_count=len(points))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")
    _say(out=args.out)
    return _EXIT_OK


def cmd_trajectory(args):
    a_values = args.a or [1.0]
    multiple = len(a_values) > 1
    for a in a_values:
        params = GaussianEnsembleParams(args.alpha, a)
        start = PhasePoint(args.x0, args.k0)
        limit = params.trust_limit()
        if max(abs(start.x), abs(start.k)) > limit:
            raise DomainError(
                f"start point outside the trust region |x|,|k| <= {limit:.4f}")
        model = SeparableHamiltonian(HamiltonianKind.TODA, a)
        at_equilibrium = start.x == 0.0 and start.k == 0.0
        if args.tau_max > 0:
            tau_max = args.tau_max
        elif at_equilibrium:
            tau_max = 10.0
        else:
            tau_max = 10.0 * _measure_period(model, start=start, step=args.dt)
        q, c = gaussian.integrate_quantum_trajectory(params, start, args.dt,
                                                     tau_max)
        rows = []
        for kind, traj in (("quantum", q), ("classical", c)):
            for i in range(len(traj)):
                rows.append({"kind": kind, "tau": traj.tau[i],
                             "x": traj.x[i], "k": traj.k[i],
                             "y": traj.y[i], "z": traj.z[i]})
        path = _sweep_path(args.out, "a", a, multiple)
        export_table(rows, args.format, path)
        _say(alpha=args.alpha, a=a, rows=len(rows), out=path)
        if not at_equilibrium:
            tq, dq = classical.return_to_start(q)
            tc, dc = classical.return_to_start(c)
            _say(quantum_return_time=tq, quantum_closure=dq,
                 classical_return_time=tc, classical_closure=dc,
                 dephasing=abs(tq - tc))
    return _EXIT_OK


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------

def _selftest():
    """Fast oracle suite: every check pits a closed form against an
    independent numerical route."""
    from .specfun import (EllipticConvention, QuadratureSpec, bessel_k,
                          elliptic_k_complete, hermite_odd, im_erf_offset,
                          integrate_1d, jacobi_sn)
    checks = {}

    quad = QuadratureSpec(1e-13, 1e-12, 2000)
    v = integrate_1d(lambda t: math.exp(-math.cosh(t)) if t < 700 else 0.0,
                     0.0, math.inf, quad)
    checks["bessel_vs_quadrature"] = abs(v - bessel_k(0, 1.0)) < 1e-12

    v = integrate_1d(lambda t: 1.0 / math.sqrt(1.0 - 0.5 * math.sin(t) ** 2),
                     0.0, math.pi / 2.0, quad)
    checks["elliptic_vs_quadrature"] = abs(v - elliptic_k_complete(0.5)) < 1e-12

    quarter = elliptic_k_complete(0.3)
    checks["sn_quarter_period"] = abs(jacobi_sn(quarter, 0.3) - 1.0) < 1e-12

    x, y = 2.0, 0.5
    v = (2.0 / math.sqrt(math.pi)) * math.exp(-x * x) * integrate_1d(
        lambda t: math.exp(t * t) * math.cos(2.0 * x * t), 0.0, y, quad)
    checks["im_erf_vs_contour"] = abs(v - im_erf_offset(1.0, 2.0)) < 1e-10

    s, arg = 0.3, 0.7
    total = 0.0
    for eta in range(21):
        order = 2 * eta + 1
        total += hermite_odd(order, arg) * s ** order / math.factorial(order)
    ref = math.exp(-s * s) * math.sinh(2.0 * s * arg)
    checks["hermite_generating"] = abs(total - ref) < 1e-12

    params = ThermalEnsembleParams(1.0, 1.0)
    xm, km = thermo.quadrature_box(1.0, 1.0)
    u, w = np.polynomial.legendre.leggauss(160)
    gx = u * xm
    gk = u * km
    wx = w * xm
    wk = w * km
    grid = np.exp(-(np.cosh(gx)[None, :] + np.cosh(gk)[:, None]))
    z_quad = float(wk @ grid @ wx)
    checks["z0_vs_quadrature"] = (
        abs(z_quad - thermo.z0_closed(1.0, 1.0)) / z_quad < 1e-10)

    g1 = GaussianEnsembleParams(1.0)
    p = PhasePoint(0.7, 0.4)
    srs = gaussian.series_currents(g1, p, 14)
    cls = gaussian.div_currents_closed(g1, p)
    checks["series_vs_closed"] = (
        abs(srs[0] - cls[0]) < 1e-12 and abs(srs[1] - cls[1]) < 1e-12)

    g02 = GaussianEnsembleParams(0.2)
    wv = gaussian.velocity_w(g02, PhasePoint(0.3, 0.2))
    ref = (math.sinh(0.2), -math.sinh(0.3))
    checks["velocity_classical_limit"] = (
        math.hypot(wv[0] - ref[0], wv[1] - ref[1]) < 0.01)

    model = SeparableHamiltonian(HamiltonianKind.TODA, 1.0)
    spec = classical.OrbitSpec.from_energy(model, 2.5, step=1e-3, duration=12.0)
    traj = classical.integrate_orbit(spec)
    checks["orbit_energy_drift"] = traj.max_drift < 1e-10

    ok = True
    for name, passed in checks.items():
        _say(**{f"selftest_{name}": "pass" if passed else "fail"})
        ok = ok and passed
    _say(selftest="pass" if ok else "fail")
    return _EXIT_OK if ok else _EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="wignerflow",
        description="Phase-space dynamics of prey-predator Hamiltonians: "
                    "classical orbits, thermal and Gaussian Wigner flows.")
    parser.add_argument("--selftest", action="store_true",
                        help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command")
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("orbit", formatter_class=fmt,
                       help="integrate a classical orbit and "
                            "measure its period")
    p.add_argument("--model", choices=("toda", "lv"), default="toda",
                   help="Hamiltonian family")
    p.add_argument("--a", type=float, default=1.0,
                   help="anisotropy parameter")
    p.add_argument("--eps", type=float, action="append",
                   help="orbit energy, repeatable for sweeps; "
                        "requires eps > 1 + a")
    p.add_argument("--x0", type=float, default=None,
                   help="explicit start x (overrides --eps)")
    p.add_argument("--k0", type=float, default=None,
                   help="explicit start k (overrides --eps)")
    p.add_argument("--dt", type=float, default=1e-3,
                   help="integration step")
    p.add_argument("--periods", type=float, default=3.0,
                   help="duration in measured periods")
    p.add_argument("--out", default="orbit.csv", help="output table path")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("analytic", formatter_class=fmt,
                       help="closed-form isotropic Toda species solution "
                            "and period summary")
    p.add_argument("--eps", type=float, action="append", required=True,
                   help="energy > 2, repeatable for sweeps")
    p.add_argument("--tau-max", type=float, default=0.0,
                   help="time span; 0 means one measured period")
    p.add_argument("--samples", type=int, default=1000,
                   help="rows in the table")
    p.add_argument("--dt", type=float, default=1e-3,
                   help="integration step for the reference dynamics")
    p.add_argument("--out", default="analytic.csv", help="output table path")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("thermo", formatter_class=fmt,
                       help="thermal-ensemble partition function, internal "
                            "energy, heat capacity")
    p.add_argument("--a", type=float, action="append",
                   help="anisotropy, repeatable")
    p.add_argument("--beta-min", type=float, default=0.05,
                   help="lowest inverse temperature")
    p.add_argument("--beta-max", type=float, default=4.5,
                   help="highest inverse temperature")
    p.add_argument("--steps", type=int, default=90,
                   help="rows per anisotropy value")
    p.add_argument("--order", choices=("classical", "h2"), default="classical",
                   help="expansion order (h2 = quadratic-order corrected)")
    p.add_argument("--out", default="thermo.csv", help="output table path")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=cmd_thermo)

    p = sub.add_parser("field", formatter_class=fmt,
                       help="sample a flow quantity on a grid")
    p.add_argument("--ensemble", choices=("gaussian", "thermal"),
                   default="gaussian", help="ensemble family")
    p.add_argument("--alpha", type=float, action="append",
                   help="Gaussian spread, repeatable")
    p.add_argument("--beta", type=float, action="append",
                   help="inverse temperature, repeatable")
    p.add_argument("--a", type=float, default=1.0, help="anisotropy")
    p.add_argument("--order", choices=("classical", "h2"), default="h2",
                   help="thermal expansion order")
    p.add_argument("--quantity", default="divj",
                   help="gaussian: %s; thermal: %s" % (
                       "|".join(fieldgrid.QUANTITIES["gaussian"]),
                       "|".join(fieldgrid.QUANTITIES["thermal"])))
    p.add_argument("--bbox", type=float, nargs=4,
                   default=[-2.0, 2.0, -2.0, 2.0],
                   metavar=("XLO", "XHI", "KLO", "KHI"),
                   help="sampling window")
    p.add_argument("--grid", type=int, default=101,
                   help="nodes per axis")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads; results do not depend on it")
    p.add_argument("--out", default="field.csv", help="output table path")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("stagnation", formatter_class=fmt,
                       help="stagnation points and circulation classes "
                            "over an alpha sweep")
    p.add_argument("--a", type=float, default=4.0, help="anisotropy")
    p.add_argument("--alpha-min", type=float, default=0.25,
                   help="lowest Gaussian spread")
    p.add_argument("--alpha-max", type=float, default=2.7,
                   help="highest Gaussian spread")
    p.add_argument("--alpha-steps", type=int, default=10,
                   help="sweep members")
    p.add_argument("--bbox", type=float, nargs=4,
                   default=[-2.0, 2.0, -2.0, 2.0],
                   metavar=("XLO", "XHI", "KLO", "KHI"),
                   help="search window; must stay inside the trust region")
    p.add_argument("--grid", type=int, default=200,
                   help="probe density for zero scans")
    p.add_argument("--emit-envelope", action="store_true",
                   help="also list grid nodes with |w| below the threshold")
    p.add_argument("--envelope-threshold", type=float, default=0.08,
                   help="speed bound defining the envelope")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads; results do not depend on it")
    p.add_argument("--out", default="stagnation.json",
                   help="output JSON path")
    p.set_defaults(func=cmd_stagnation)

    p = sub.add_parser("trajectory", formatter_class=fmt,
                       help="semiclassical trajectory of the quantum "
                            "velocity field plus its classical companion")
    p.add_argument("--alpha", type=float, default=1.0, help="Gaussian spread")
    p.add_argument("--a", type=float, action="append",
                   help="anisotropy, repeatable")
    p.add_argument("--x0", type=float, default=0.6, help="start position")
    p.add_argument("--k0", type=float, default=0.0, help="start momentum")
    p.add_argument("--dt", type=float, default=2e-3, help="integration step")
    p.add_argument("--tau-max", type=float, default=0.0,
                   help="time span; 0 means ten classical periods")
    p.add_argument("--out", default="trajectory.csv", help="output table path")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=cmd_trajectory)

    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.selftest:
            return _selftest()
        if not getattr(args, "func", None):
            parser.print_help()
            return _EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return _EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
