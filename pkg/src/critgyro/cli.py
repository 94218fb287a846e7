"""Command-line interface.

Subcommands: curve, catalog, estimate, offset, basis, selftest. Every run
writes its data as CSV (authoritative), optional SVG plots derived from the
CSV content, and a JSON run manifest written atomically last. Exit codes:
0 success, 2 usage, 3 numerical failure, 4 self-check or preset mismatch.
"""

import argparse
import json
import os
import sys
import time
from math import factorial, pi

import numpy as np

from . import __version__
from ._backend import active_backend
from ._svg import line_chart
from .curves import (
    DEFAULT_CATALOG_PAIRS,
    catalog_build,
    catalog_load,
    catalog_save,
    compute_curve,
    curve_diagnostics,
)
from .errors import CritgyroError
from .estimate import (
    DEFAULT_GRID_SIZE,
    ProtocolConfig,
    run_ensemble,
    run_protocol,
)
from .fock import enumerate_basis
from .hamiltonian import ModelParams, assemble
from .melem import ElementCache, default_rule, integral_i1, integral_i2, laguerre
from .observables import adiabatic_time, gap_profile, preparation_hwhm

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_MISMATCH = 4

DEFAULT_OMEGA_PERP_HZ = 200.0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(primary_output, command, details, outputs, t_start) -> str:
    path = str(primary_output) + ".manifest.json"
    payload = {
        "command": command,
        "code_version": __version__,
        "backend": active_backend(),
        "details": details,
        "outputs": [str(o) for o in outputs],
        "wall_clock_s": time.time() - t_start,
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
    os.replace(tmp, path)
    return path


def _build_system(n, n_ll, l_max):
    basis = enumerate_basis(n, n_ll, l_max if l_max is not None else n + 2)
    cache = ElementCache.build(basis.modes)
    return basis, cache


def _parse_grid(spec: str) -> np.ndarray:
    lo, hi, num = spec.split(":")
    return np.linspace(float(lo), float(hi), int(num))


def _parse_pairs(spec: str):
    pairs = []
    for chunk in spec.split(","):
        g, a = chunk.split(":")
        pairs.append((float(g), float(a)))
    return pairs


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

def cmd_curve(args) -> int:
    t0 = time.time()
    if len(args.g) != len(args.A):
        print("error: need one --A per --g", file=sys.stderr)
        return EXIT_USAGE
    basis, cache = _build_system(args.n, args.n_ll, args.l_max)
    outputs = [args.out]
    grid = _parse_grid(args.grid) if args.grid else None

    rows = []
    series = []
    for g, a in zip(args.g, args.A):
        curve = compute_curve(basis, cache, g, a, grid=grid)
        diag = curve_diagnostics(basis, cache, curve)
        for i in range(len(curve.omega)):
            rows.append((
                g, a, curve.omega[i], curve.p0[i], diag.gap[i],
                diag.lam1[i], diag.lam2[i], diag.exp_L[i],
            ))
        series.append((f"g={g} A={a}", curve.omega, curve.p0))
        label = f"(g={g}, A={a})"
        print(f"curve {label}: center={curve.center} width={curve.width}")
    _write_csv(args.out, ("g", "A", "omega", "p0", "gap", "lam1", "lam2", "exp_L"),
               rows)
    if args.svg:
        line_chart(args.svg, series, title="likelihood of the all-zero outcome",
                   xlabel="rotation rate (units of trap frequency)", ylabel="P(0)")
        outputs.append(args.svg)
    if args.dump_basis:
        basis.dump_csv(args.dump_basis)
        outputs.append(args.dump_basis)
    if args.dump_elements:
        cache.dump_csv(args.dump_elements)
        outputs.append(args.dump_elements)
    if args.dump_matrix:
        params = ModelParams(
            n_particles=basis.n_particles, g=args.g[0], anisotropy=args.A[0],
            omega=args.matrix_omega, n_ll=basis.n_ll, l_max=basis.l_max,
        )
        assemble(basis, params, cache).dump_coordinate_text(args.dump_matrix)
        outputs.append(args.dump_matrix)
    _write_manifest(args.out, "curve",
                    {"pairs": list(zip(args.g, args.A)), "n": args.n},
                    outputs, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def cmd_catalog(args) -> int:
    t0 = time.time()
    pairs = _parse_pairs(args.pairs) if args.pairs else list(DEFAULT_CATALOG_PAIRS)
    basis, cache = _build_system(args.n, args.n_ll, args.l_max)
    grid = _parse_grid(args.grid) if args.grid else None
    catalog = catalog_build(basis, cache, pairs, grid=grid)
    catalog_save(catalog, args.out)
    for c in catalog.curves:
        print(f"catalog (g={c.g}, A={c.anisotropy}): "
              f"center={c.center:.6f} width={c.width:.6f}")
    _write_manifest(args.out, "catalog", {"pairs": pairs, "n": args.n},
                    [args.out], t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

_FIG4_VARIANTS = (("untuned", ()), ("one_tuning", (12,)), ("two_tunings", (12, 32)))
_ARRAY_TARGET = 1.8e-4
_ARRAY_FACTOR = 2.0


def _trajectory_rows(result):
    for rec in result.records:
        yield (rec.index, int(rec.zero_outcome), rec.g, rec.anisotropy,
               rec.delta, rec.sigma)


def _write_trajectory(path, result):
    _write_csv(path, ("mu", "outcome", "g", "A", "delta", "sigma"),
               _trajectory_rows(result))


def cmd_estimate(args) -> int:
    t0 = time.time()
    cfg_data = {}
    if args.config:
        with open(args.config) as fh:
            cfg_data = json.load(fh)
    config = ProtocolConfig.from_dict(cfg_data)
    catalog_path = args.catalog or config.catalog_path
    if not catalog_path:
        print("error: no catalog given (--catalog or config catalog_path)",
              file=sys.stderr)
        return EXIT_USAGE
    catalog = catalog_load(catalog_path)
    os.makedirs(args.out_dir, exist_ok=True)
    out = lambda name: os.path.join(args.out_dir, name)
    outputs = []
    details = {"config": config.to_dict(), "preset": args.preset,
               "catalog": str(catalog_path)}
    status = EXIT_OK

    if args.preset == "fig3":
        cfg = ProtocolConfig.from_dict({**config.to_dict(), "schedule": [],
                                        "n_measurements": 100})
        result = run_protocol(cfg, catalog)
        _write_trajectory(out("trajectory.csv"), result)
        outputs.append(out("trajectory.csv"))
        for mu in (1, 10, 100):
            sub = ProtocolConfig.from_dict({**cfg.to_dict(),
                                            "n_measurements": mu})
            snap = run_protocol(sub, catalog, collect_records=False)
            path = out(f"posterior_mu{mu}.csv")
            _write_csv(path, ("omega", "mass"),
                       zip(snap.posterior.omega, snap.posterior.mass))
            outputs.append(path)
        print(f"fig3: mean={result.posterior.mean:.6f} "
              f"sigma={result.final_sigma:.6f} after 100 measurements")
    elif args.preset == "fig4":
        mus = np.arange(1, 101)
        columns = [mus]
        names = ["mu"]
        medians = {}
        for name, schedule in _FIG4_VARIANTS:
            cfg = ProtocolConfig.from_dict({**config.to_dict(),
                                            "schedule": list(schedule),
                                            "n_measurements": 100})
            ens = run_ensemble(cfg, catalog, n_trajectories=args.trajectories)
            med = ens.median_sigma()
            medians[name] = med
            columns.append(med)
            names.append(f"sigma_{name}")
        _write_csv(out("sigma_vs_mu.csv"), names, zip(*columns))
        outputs.append(out("sigma_vs_mu.csv"))
        line_chart(out("sigma_vs_mu.svg"),
                   [(n, mus, medians[n]) for n, _ in _FIG4_VARIANTS],
                   title="posterior width vs measurement count",
                   xlabel="measurements", ylabel="sigma", logy=True)
        outputs.append(out("sigma_vs_mu.svg"))
        factor = medians["untuned"][-1] / medians["two_tunings"][-1]
        print(f"fig4: sigma(100) untuned={medians['untuned'][-1]:.3e} "
              f"one={medians['one_tuning'][-1]:.3e} "
              f"two={medians['two_tunings'][-1]:.3e} "
              f"improvement x{factor:.1f}")
    elif args.preset == "array":
        cfg = ProtocolConfig.from_dict({**config.to_dict(),
                                        "schedule": [200],
                                        "batch_size": 200,
                                        "n_measurements": 400})
        ens = run_ensemble(cfg, catalog, n_trajectories=args.trajectories)
        med = ens.median_sigma()
        _write_csv(out("sigma_vs_mu.csv"), ("mu", "sigma"),
                   zip(np.arange(1, 401), med))
        outputs.append(out("sigma_vs_mu.csv"))
        final = float(med[-1])
        lo, hi = _ARRAY_TARGET / _ARRAY_FACTOR, _ARRAY_TARGET * _ARRAY_FACTOR
        ok = lo <= final <= hi
        print(f"array: median final sigma={final:.3e} "
              f"(reference {_ARRAY_TARGET:.1e}, window [{lo:.1e}, {hi:.1e}]) "
              f"{'OK' if ok else 'MISMATCH'}")
        details["array_final_sigma"] = final
        if not ok:
            status = EXIT_MISMATCH
    else:
        result = run_protocol(config, catalog)
        _write_trajectory(out("trajectory.csv"), result)
        outputs.append(out("trajectory.csv"))
        if config.n_trajectories > 1:
            ens = run_ensemble(config, catalog)
            med = ens.median_sigma()
            _write_csv(out("sigma_vs_mu.csv"), ("mu", "sigma"),
                       zip(np.arange(1, config.n_measurements + 1), med))
            outputs.append(out("sigma_vs_mu.csv"))
        line_chart(out("sigma_vs_mu.svg"),
                   [("trajectory", np.arange(1, config.n_measurements + 1),
                     result.sigma_trace)],
                   title="posterior width vs measurement count",
                   xlabel="measurements", ylabel="sigma", logy=True)
        outputs.append(out("sigma_vs_mu.svg"))
        print(f"estimate: final sigma={result.final_sigma:.6e}")

    _write_manifest(os.path.join(args.out_dir, "run"), "estimate", details,
                    outputs, t0)
    return status


# ---------------------------------------------------------------------------
# offset
# ---------------------------------------------------------------------------

def cmd_offset(args) -> int:
    t0 = time.time()
    catalog = catalog_load(args.catalog)
    try:
        curve = catalog.find(args.g, args.A)
    except KeyError:
        print(f"error: catalog has no curve for (g={args.g}, A={args.A})",
              file=sys.stderr)
        return EXIT_USAGE
    basis, cache = _build_system(args.n, args.n_ll, args.l_max)
    lo, hi, num = args.offsets.split(":")
    offsets = np.linspace(float(lo), float(hi), int(num))

    ramp = np.linspace(curve.center - 0.25, curve.center + 0.02, args.gap_points)
    profile = gap_profile(basis, cache, curve.g, curve.anisotropy, ramp,
                          center=curve.center)
    omega_perp = 2 * pi * args.omega_perp_hz  # rad/s
    rows = []
    for off in offsets:
        hw = preparation_hwhm(curve, off, args.prior_lo, args.prior_hi,
                              DEFAULT_GRID_SIZE)
        t_trap = adiabatic_time(profile, off, eps=args.eps)
        rows.append((off, hw, t_trap, t_trap / omega_perp))
    _write_csv(args.out, ("offset", "hwhm", "time_trap_units", "time_seconds"),
               rows)
    outputs = [args.out]
    if args.svg:
        arr = np.array([(r[0], r[1], r[2]) for r in rows])
        line_chart(args.svg,
                   [("hwhm", arr[:, 0], arr[:, 1]),
                    ("ramp time (trap units)", arr[:, 0], arr[:, 2])],
                   title="preparation offset study",
                   xlabel="offset from resonance center", ylabel="value",
                   logy=False)
        outputs.append(args.svg)
    ratio = rows[-1][2] / rows[0][2] if rows[0][2] > 0 else float("inf")
    print(f"offset study: time({offsets[-1]:+.3f})/time({offsets[0]:+.3f}) "
          f"= {ratio:.3g}")
    _write_manifest(args.out, "offset",
                    {"g": args.g, "A": args.A, "eps": args.eps,
                     "omega_perp_hz": args.omega_perp_hz},
                    outputs, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# basis / selftest
# ---------------------------------------------------------------------------

def cmd_basis(args) -> int:
    t0 = time.time()
    basis = enumerate_basis(args.n, args.n_ll,
                            args.l_max if args.l_max is not None else args.n + 2)
    basis.dump_csv(args.out)
    print(f"basis: {basis.size} states over {len(basis.modes)} modes")
    _write_manifest(args.out, "basis",
                    {"n": args.n, "n_ll": args.n_ll, "l_max": basis.l_max},
                    [args.out], t0)
    return EXIT_OK


def cmd_selftest(args) -> int:
    checks = []
    rule = default_rule()
    checks.append(("quadrature weights sum to 1",
                   abs(rule.weights.sum() - 1.0) < 1e-12))
    checks.append(("quadrature integrates x^9 to 9!",
                   abs(rule.integrate(rule.nodes**9) - factorial(9))
                   < 1e-10 * factorial(9)))
    checks.append(("laguerre L_1^0(2) = -1", laguerre(1, 0, 2.0) == -1.0))
    checks.append(("I1((0,0),(0,2)) = 2", abs(integral_i1((0, 0), (0, 2)) - 2.0)
                   < 1e-10))
    checks.append(("I2(all ground) = 1",
                   abs(integral_i2((0, 0), (0, 0), (0, 0), (0, 0)) - 1.0)
                   < 1e-10))
    basis = enumerate_basis(3, 2, 5)
    checks.append(("3-particle basis size 65", basis.size == 65))
    cache = ElementCache.build(basis.modes)
    params = ModelParams(n_particles=3, g=0.5, anisotropy=0.04, omega=0.3,
                         n_ll=2, l_max=5)
    ham = assemble(basis, params, cache)
    dense = ham.to_dense()
    checks.append(("Hamiltonian symmetric", np.array_equal(dense, dense.T)))
    ok = all(passed for _, passed in checks)
    for name, passed in checks:
        print(f"[{'ok' if passed else 'FAIL'}] {name}")
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critgyro",
        description="Rotating-condensate gyroscope simulator and Bayesian "
                    "rotation estimator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_system_args(p):
        p.add_argument("--n", type=int, default=6, help="particle number")
        p.add_argument("--n-ll", type=int, default=2, dest="n_ll")
        p.add_argument("--l-max", type=int, default=None, dest="l_max")

    p = sub.add_parser("curve", help="compute likelihood curves")
    p.add_argument("--g", type=float, action="append", required=True)
    p.add_argument("--A", type=float, action="append", required=True)
    p.add_argument("--grid", help="explicit grid lo:hi:n")
    p.add_argument("--out", default="curve.csv")
    p.add_argument("--svg")
    p.add_argument("--dump-basis", dest="dump_basis")
    p.add_argument("--dump-elements", dest="dump_elements")
    p.add_argument("--dump-matrix", dest="dump_matrix")
    p.add_argument("--matrix-omega", type=float, default=0.0,
                   dest="matrix_omega")
    add_system_args(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("catalog", help="build and save a curve catalog")
    p.add_argument("--pairs", help="comma list g:A, default standard ladder")
    p.add_argument("--grid", help="explicit grid lo:hi:n (default: auto-located)")
    p.add_argument("--out", default="catalog.json")
    add_system_args(p)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("estimate", help="run the estimation protocol")
    p.add_argument("--config", help="JSON protocol config")
    p.add_argument("--catalog")
    p.add_argument("--preset", choices=("fig3", "fig4", "array"))
    p.add_argument("--trajectories", type=int, default=200,
                   help="ensemble size for presets")
    p.add_argument("--out-dir", default="estimate_out", dest="out_dir")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("offset", help="preparation offset study")
    p.add_argument("--catalog", required=True)
    p.add_argument("--g", type=float, default=0.5)
    p.add_argument("--A", type=float, default=0.04)
    p.add_argument("--offsets", default="-0.1:0:21", help="lo:hi:n")
    p.add_argument("--eps", type=float, default=0.1,
                   help="adiabaticity slack")
    p.add_argument("--omega-perp-hz", type=float, default=DEFAULT_OMEGA_PERP_HZ,
                   dest="omega_perp_hz")
    p.add_argument("--prior-lo", type=float, default=0.87, dest="prior_lo")
    p.add_argument("--prior-hi", type=float, default=0.93, dest="prior_hi")
    p.add_argument("--gap-points", type=int, default=271, dest="gap_points")
    p.add_argument("--out", default="offset.csv")
    p.add_argument("--svg")
    add_system_args(p)
    p.set_defaults(func=cmd_offset)

    p = sub.add_parser("basis", help="dump the truncated basis")
    p.add_argument("--out", default="basis.csv")
    add_system_args(p)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("selftest", help="fast internal consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CritgyroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
