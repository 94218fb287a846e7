"""Physical quantities extracted from ground states and likelihood curves.

The measurement likelihood p_zero is the probability that every particle
sits in a zero-angular-momentum mode, i.e. (0,0) or (1,0). The transition
of p_zero from its low-rotation plateau to ~0 defines the resonance whose
center (0.5 crossing) and width (0.9 -> 0.1 crossing separation) drive the
estimation protocol.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError, RangeError
from .fock import FockBasis, Mode, pack_keys
from .hamiltonian import ModelParams, assemble
from .melem import ElementCache
from .spectrum import sweep_lowest

NORM_TOL = 1e-8


def _check_normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise InputError("state vector is not normalized")
    return psi


def p_zero(psi: np.ndarray, basis: FockBasis) -> float:
    """Probability that all particles occupy m = 0 modes."""
    psi = _check_normalized(psi)
    mask = basis.zero_momentum_mask()
    return float(np.sum(psi[mask] ** 2))


def expected_L(psi: np.ndarray, basis: FockBasis) -> float:
    """Mean total angular momentum of the state."""
    psi = _check_normalized(psi)
    return float(np.sum(psi**2 * basis.L))


@dataclass(frozen=True)
class SPDM:
    """Single-particle density matrix rho[k, l] = <a+_l a_k> over the modes."""

    matrix: np.ndarray
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns matching eigenvalues


def spdm(psi: np.ndarray, basis: FockBasis) -> SPDM:
    psi = _check_normalized(psi)
    occ = basis.occupations
    nm = len(basis.modes)
    try:
        keys = pack_keys(occ, max(basis.n_particles, 1))
    except ParameterError:
        keys = None  # too many modes for packed keys; use the index dict
    if keys is not None:
        order = np.argsort(keys, kind="stable")
        keys_sorted = keys[order]
        bits = max(int(basis.n_particles).bit_length(), 1)
        shifts = np.int64(1) << (bits * np.arange(nm - 1, -1, -1, dtype=np.int64))

    def hop_targets(src, k, l):
        """Rows reached from src by moving one particle k -> l, with mask."""
        if keys is not None:
            target_keys = keys[src] - shifts[k] + shifts[l]
            pos = np.searchsorted(keys_sorted, target_keys)
            pos = np.minimum(pos, len(keys_sorted) - 1)
            hit = keys_sorted[pos] == target_keys
            return src[hit], order[pos[hit]]
        kept, targets = [], []
        for s in src:
            row = occ[s].copy()
            row[k] -= 1
            row[l] += 1
            t = basis.index.get(tuple(row))
            if t is not None:
                kept.append(s)
                targets.append(t)
        return np.array(kept, dtype=int), np.array(targets, dtype=int)

    rho = np.zeros((nm, nm))
    for k in range(nm):
        nk = occ[:, k]
        rho[k, k] = np.sum(psi**2 * nk)
        for l in range(k + 1, nm):
            src = np.flatnonzero(nk)
            if len(src) == 0:
                continue
            src, tgt = hop_targets(src, k, l)
            if len(src) == 0:
                continue
            amp = np.sqrt(nk[src] * (occ[src, l] + 1.0))
            val = float(np.sum(psi[src] * amp * psi[tgt]))
            rho[k, l] = val
            rho[l, k] = val
    evals, evecs = np.linalg.eigh(rho)
    return SPDM(
        matrix=rho,
        eigenvalues=evals[::-1].copy(),
        eigenvectors=evecs[:, ::-1].copy(),
    )


def spdm_branch_gap(density: SPDM, basis: FockBasis) -> float:
    """Occupation difference (condensate branch) - (vortex branch).

    The two leading natural orbitals are classified by their weight on the
    m = 0 versus m = 1 lowest modes; the sign of the difference flips where
    the two macroscopic occupations swap.
    """
    i00 = basis.modes.index(Mode(0, 0))
    try:
        i01 = basis.modes.index(Mode(0, 1))
    except ValueError:
        i01 = None
    v = density.eigenvectors
    lam = density.eigenvalues
    if v.shape[1] < 2:
        return float(lam[0])

    def condensate_score(col):
        score = v[i00, col] ** 2
        if i01 is not None:
            score -= v[i01, col] ** 2
        return score

    if condensate_score(0) >= condensate_score(1):
        return float(lam[0] - lam[1])
    return float(lam[1] - lam[0])


# ---------------------------------------------------------------------------
# Curve geometry (crossings are interpolated between grid points)
# ---------------------------------------------------------------------------

def crossing_offset(omega: np.ndarray, values: np.ndarray, threshold: float):
    """Grid offset of the first downward crossing, or None.

    Works relative to omega[0] so that rigidly shifted inputs give
    bit-identical offsets.
    """
    x = omega - omega[0]
    v = np.asarray(values, dtype=float)
    for i in range(len(v) - 1):
        if v[i] >= threshold > v[i + 1]:
            frac = (v[i] - threshold) / (v[i] - v[i + 1])
            return x[i] + frac * (x[i + 1] - x[i])
    return None


def _curve_arrays(curve_or_omega, p0):
    if p0 is None:
        return np.asarray(curve_or_omega.omega), np.asarray(curve_or_omega.p0)
    return np.asarray(curve_or_omega), np.asarray(p0)


def critical_frequency(curve_or_omega, p0=None) -> float:
    """Rotation rate of the first downward 0.5 crossing of the likelihood."""
    omega, p = _curve_arrays(curve_or_omega, p0)
    rel = crossing_offset(omega, p, 0.5)
    if rel is None:
        raise RangeError("likelihood never crosses 0.5 within the grid")
    return float(omega[0] + rel)


def transition_width(curve_or_omega, p0=None, hi: float = 0.9,
                     lo: float = 0.1) -> float:
    """Separation of the interpolated hi -> lo downward crossings."""
    omega, p = _curve_arrays(curve_or_omega, p0)
    rel_hi = crossing_offset(omega, p, hi)
    rel_lo = crossing_offset(omega, p, lo)
    if rel_hi is None or rel_lo is None:
        raise RangeError(
            f"likelihood does not cross both thresholds ({hi}, {lo})"
        )
    return float(rel_lo - rel_hi)


def preparation_hwhm(curve, offset: float, prior_lo: float, prior_hi: float,
                     gridsize: int = 2001) -> float:
    """Half width of the single zero-outcome posterior when the preparation
    ramp stops at center + offset.

    The likelihood is the curve truncated at the ramp endpoint (flat at the
    endpoint value beyond it), shifted so the flat prior's midpoint maps onto
    the endpoint. A proxy for the attainable single-shot resolution.
    """
    end = curve.center + offset
    p_end = float(curve.evaluate(end))
    omega = np.linspace(prior_lo, prior_hi, gridsize)
    mass = np.full(gridsize, 1.0 / gridsize)
    delta = end - float(mass @ omega)
    pos = omega + delta
    like = np.where(pos <= end, curve.evaluate(pos), p_end)
    mass = mass * like
    mass /= mass.sum()
    return hwhm_points(omega, mass)


def hwhm_points(omega: np.ndarray, density: np.ndarray) -> float:
    """Half width of the half-maximum region of a gridded distribution.

    The region is [first, last] interpolated crossing of max/2; edges of the
    support bound it when the density never falls below half maximum.
    """
    omega = np.asarray(omega, dtype=float)
    d = np.asarray(density, dtype=float)
    half = d.max() / 2.0
    peak = int(np.argmax(d))
    left = omega[0]
    for i in range(peak, 0, -1):
        if d[i - 1] < half <= d[i]:
            frac = (half - d[i - 1]) / (d[i] - d[i - 1])
            left = omega[i - 1] + frac * (omega[i] - omega[i - 1])
            break
    right = omega[-1]
    for i in range(peak, len(d) - 1):
        if d[i] >= half > d[i + 1]:
            frac = (d[i] - half) / (d[i] - d[i + 1])
            right = omega[i] + frac * (omega[i + 1] - omega[i])
            break
    return float((right - left) / 2.0)


# ---------------------------------------------------------------------------
# Energy gap along the rotation ramp and the adiabatic time budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapProfile:
    """First excitation gap and |<1|L|0>| along a rotation grid."""

    omegas: np.ndarray
    gap: np.ndarray
    l01: np.ndarray
    center: float  # resonance center the ramp aims at


def gap_profile(basis: FockBasis, cache: ElementCache, g: float,
                anisotropy: float, omegas: np.ndarray,
                center: float) -> GapProfile:
    if anisotropy <= 0:
        raise ParameterError("gap profile needs a positive anisotropy")
    params = ModelParams(
        n_particles=basis.n_particles, g=g, anisotropy=anisotropy,
        omega=0.0, n_ll=basis.n_ll, l_max=basis.l_max,
    )
    h0 = assemble(basis, params, cache).to_dense()
    l_diag = basis.L.astype(float)
    sweep = sweep_lowest(h0, l_diag, omegas, k=2)
    gap = sweep.energies[:, 1] - sweep.energies[:, 0]
    l01 = np.abs(np.einsum("ij,j,ij->i", sweep.vec1, l_diag, sweep.vec0))
    return GapProfile(
        omegas=np.asarray(omegas, dtype=float),
        gap=gap, l01=l01, center=float(center),
    )


def adiabatic_time(profile: GapProfile, offset: float,
                   eps: float = 0.1) -> float:
    """Ramp duration (units 1/w_perp) from the grid start to center+offset.

    Local adiabaticity: T = integral |<1|L|0>| / (eps * gap^2) dOmega with
    slack parameter eps.
    """
    if eps <= 0:
        raise ParameterError("adiabaticity slack eps must be positive")
    end = profile.center + offset
    om = profile.omegas
    if end < om[0] or end > om[-1]:
        raise RangeError(
            f"ramp endpoint {end} outside profile grid [{om[0]}, {om[-1]}]"
        )
    integrand = profile.l01 / (eps * profile.gap**2)
    mask = om <= end
    t = float(np.trapezoid(integrand[mask], om[mask]))
    # partial last interval up to the endpoint
    i = int(np.count_nonzero(mask)) - 1
    if i < len(om) - 1 and end > om[i]:
        frac = (end - om[i]) / (om[i + 1] - om[i])
        f_end = integrand[i] + frac * (integrand[i + 1] - integrand[i])
        t += 0.5 * (integrand[i] + f_end) * (end - om[i])
    return t
