"""Resonance curves P(0|Omega) and the persistent curve catalog.

A curve is computed by sweeping the ground state across the vortex
transition of one (g, A) pair. The sweep grid is auto-located: a coarse
pre-scan brackets the 0.9/0.1 crossings, then a refined uniform grid spans
the transition with generous padding so that the flat extension outside
the grid only ever sees plateau values.
"""

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__ as _code_version
from .errors import ParameterError, RangeError, StaleCatalogError
from .fock import FockBasis, Mode
from .hamiltonian import ModelParams, assemble
from .melem import ElementCache
from .observables import (
    crossing_offset,
    expected_L,
    p_zero,
    spdm,
    spdm_branch_gap,
    transition_width,
)
from .spectrum import sweep_lowest

CATALOG_VERSION = "critgyro-catalog-1"
PRESCAN_RANGE = (0.70, 1.02)
PRESCAN_POINTS = 61
REFINED_POINTS = 601

#: default catalog: the two published operating points plus a width ladder
DEFAULT_CATALOG_PAIRS: tuple[tuple[float, float], ...] = (
    (0.5, 0.04),
    (0.5, 0.032),
    (0.5, 0.028),
    (0.5, 0.024),
    (0.6, 0.025),
    (0.5, 0.02),
    (0.5, 0.017),
    (0.5, 0.015),
    (0.5, 0.013),
    (0.5, 0.012),
)


@dataclass(frozen=True)
class ResonanceCurve:
    g: float
    anisotropy: float
    omega: np.ndarray
    p0: np.ndarray
    center: float | None
    width: float | None

    @classmethod
    def from_values(cls, g, anisotropy, omega, p0) -> "ResonanceCurve":
        omega = np.asarray(omega, dtype=float)
        p0 = np.asarray(p0, dtype=float)
        if omega.ndim != 1 or omega.shape != p0.shape:
            raise ParameterError("omega and p0 must be matching 1-d arrays")
        if np.any(np.diff(omega) <= 0):
            raise ParameterError("omega grid must be strictly ascending")
        if p0.min() < -1e-12 or p0.max() > 1.0 + 1e-12:
            raise ParameterError("p0 values must lie in [0, 1]")
        p0 = np.clip(p0, 0.0, 1.0)
        rel = crossing_offset(omega, p0, 0.5)
        center = None if rel is None else float(omega[0] + rel)
        try:
            width = transition_width(omega, p0)
        except RangeError:
            width = None
        return cls(
            g=float(g), anisotropy=float(anisotropy),
            omega=omega, p0=p0, center=center, width=width,
        )

    @property
    def key(self) -> tuple[float, float]:
        return (self.g, self.anisotropy)

    def offsets(self) -> np.ndarray:
        """Grid relative to its own origin (shift-covariant)."""
        return self.omega - self.omega[0]

    def rel_center(self) -> float:
        """Center as an offset from the grid origin."""
        rel = crossing_offset(self.omega, self.p0, 0.5)
        if rel is None:
            raise RangeError("curve has no 0.5 crossing")
        return float(rel)

    def evaluate(self, points) -> np.ndarray:
        """Linear interpolation with flat extension beyond the grid."""
        return np.interp(points, self.omega, self.p0)


@dataclass(frozen=True)
class CurveDiagnostics:
    """Per-sweep-point observables accompanying a curve."""

    omegas: np.ndarray
    gap: np.ndarray          # E1 - E0
    lam1: np.ndarray         # largest SPDM eigenvalue
    lam2: np.ndarray         # second largest
    branch_gap: np.ndarray   # condensate-branch minus vortex-branch occupation
    exp_L: np.ndarray
    spdm_trace: np.ndarray


def _sweep_p0(basis: FockBasis, cache: ElementCache, g, anisotropy, omegas):
    params = ModelParams(
        n_particles=basis.n_particles, g=g, anisotropy=anisotropy,
        omega=0.0, n_ll=basis.n_ll, l_max=basis.l_max,
    )
    h0 = assemble(basis, params, cache).to_dense()
    try:
        anchor = basis.index_of({Mode(0, 0): basis.n_particles})
    except KeyError:
        anchor = None
    sweep = sweep_lowest(h0, basis.L.astype(float), omegas, k=6, anchor_index=anchor)
    mask = basis.zero_momentum_mask()
    pvals = (sweep.followed[:, mask] ** 2).sum(axis=1)
    return sweep, pvals


def locate_grid(basis: FockBasis, cache: ElementCache, g: float,
                anisotropy: float, prescan=PRESCAN_RANGE,
                prescan_points: int = PRESCAN_POINTS,
                points: int = REFINED_POINTS) -> np.ndarray:
    """Auto-located refined grid spanning the transition, or the pre-scan
    window when the likelihood never crosses 0.5 (e.g. zero anisotropy)."""
    coarse = np.linspace(prescan[0], prescan[1], prescan_points)
    _, pc = _sweep_p0(basis, cache, g, anisotropy, coarse)
    step = coarse[1] - coarse[0]
    rel_hi = crossing_offset(coarse, pc, 0.9)
    rel_lo = crossing_offset(coarse, pc, 0.1)
    if rel_hi is None or rel_lo is None:
        return np.linspace(prescan[0], prescan[1], points)
    span = max(rel_lo - rel_hi, step)
    lo = coarse[0] + rel_hi - span
    hi = coarse[0] + rel_lo + span
    return np.linspace(lo, hi, points)


def compute_curve(basis: FockBasis, cache: ElementCache, g: float,
                  anisotropy: float, grid=None) -> ResonanceCurve:
    """Likelihood curve for one parameter pair on an explicit or auto grid."""
    if grid is None:
        grid = locate_grid(basis, cache, g, anisotropy)
    grid = np.asarray(grid, dtype=float)
    _, pvals = _sweep_p0(basis, cache, g, anisotropy, grid)
    return ResonanceCurve.from_values(g, anisotropy, grid, pvals)


def curve_diagnostics(basis: FockBasis, cache: ElementCache,
                      curve: ResonanceCurve) -> CurveDiagnostics:
    """Gap, SPDM spectrum and <L> along an existing curve's grid."""
    sweep, _ = _sweep_p0(basis, cache, curve.g, curve.anisotropy, curve.omega)
    n = len(curve.omega)
    lam1 = np.empty(n)
    lam2 = np.empty(n)
    branch = np.empty(n)
    expl = np.empty(n)
    trace = np.empty(n)
    for i in range(n):
        vec = sweep.followed[i]
        dens = spdm(vec, basis)
        lam1[i] = dens.eigenvalues[0]
        lam2[i] = dens.eigenvalues[1] if len(dens.eigenvalues) > 1 else 0.0
        branch[i] = spdm_branch_gap(dens, basis)
        expl[i] = expected_L(vec, basis)
        trace[i] = np.trace(dens.matrix)
    return CurveDiagnostics(
        omegas=curve.omega.copy(),
        gap=sweep.energies[:, 1] - sweep.energies[:, 0],
        lam1=lam1, lam2=lam2, branch_gap=branch, exp_L=expl,
        spdm_trace=trace,
    )


@dataclass(frozen=True)
class CurveCatalog:
    """Width-sorted resonance curves plus provenance of their computation."""

    curves: tuple[ResonanceCurve, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = [c.key for c in self.curves]
        if len(set(keys)) != len(keys):
            raise ParameterError("duplicate (g, anisotropy) keys in catalog")
        for c in self.curves:
            if c.width is None or c.width <= 0:
                raise ParameterError(
                    f"catalog curves need positive widths, offender {c.key}"
                )
        object.__setattr__(
            self, "curves",
            tuple(sorted(self.curves, key=lambda c: c.width)),
        )

    def widest(self) -> ResonanceCurve:
        return self.curves[-1]

    def find(self, g: float, anisotropy: float) -> ResonanceCurve:
        for c in self.curves:
            if c.key == (g, anisotropy):
                return c
        raise KeyError(f"no curve for (g={g}, anisotropy={anisotropy})")


def lookup_by_width(catalog: CurveCatalog, target_width: float) -> ResonanceCurve:
    """Curve minimizing |width - target|; ties resolve to the steeper curve."""
    if not catalog.curves:
        raise ParameterError("catalog is empty")
    return min(catalog.curves, key=lambda c: (abs(c.width - target_width), c.width))


def catalog_build(basis: FockBasis, cache: ElementCache,
                  pairs: Sequence[tuple[float, float]] = DEFAULT_CATALOG_PAIRS,
                  grid=None) -> CurveCatalog:
    if not pairs:
        raise ParameterError("need at least one (g, anisotropy) pair")
    curves = [
        compute_curve(basis, cache, g, anisotropy, grid=grid)
        for g, anisotropy in pairs
    ]
    provenance = {
        "version": CATALOG_VERSION,
        "code_version": _code_version,
        "solver": {
            "quadrature_order": cache.rule.order,
            "prescan": list(PRESCAN_RANGE) + [PRESCAN_POINTS],
            "points": REFINED_POINTS if grid is None else len(np.asarray(grid)),
            "n_particles": basis.n_particles,
            "n_ll": basis.n_ll,
            "l_max": basis.l_max,
        },
    }
    return CurveCatalog(curves=tuple(curves), provenance=provenance)


def catalog_save(catalog: CurveCatalog, path) -> None:
    payload = {
        "version": CATALOG_VERSION,
        "provenance": catalog.provenance,
        "curves": [
            {
                "g": c.g,
                "anisotropy": c.anisotropy,
                "omega": c.omega.tolist(),
                "p0": c.p0.tolist(),
                "center": c.center,
                "width": c.width,
            }
            for c in catalog.curves
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def catalog_load(path) -> CurveCatalog:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise StaleCatalogError(f"cannot read catalog {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("version") != CATALOG_VERSION:
        raise StaleCatalogError(
            f"catalog {path} has version {payload.get('version')!r}, "
            f"expected {CATALOG_VERSION!r}"
        )
    curves = []
    for entry in payload["curves"]:
        curve = ResonanceCurve.from_values(
            entry["g"], entry["anisotropy"], entry["omega"], entry["p0"]
        )
        stored_center = entry.get("center")
        stored_width = entry.get("width")
        if stored_width is None or curve.width is None or \
                abs(stored_width - curve.width) > 1e-9 or \
                stored_center is None or curve.center is None or \
                abs(stored_center - curve.center) > 1e-9:
            raise StaleCatalogError(
                f"catalog {path}: stored metadata disagrees with recomputation"
            )
        curves.append(curve)
    return CurveCatalog(curves=tuple(curves),
                        provenance=payload.get("provenance", {}))
