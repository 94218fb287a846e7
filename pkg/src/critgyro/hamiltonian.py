"""Sparse many-body Hamiltonian over a truncated Fock basis.

In units of hbar * w_perp the Hamiltonian reads

    H = sum_k (2 n_k + |m_k|) N_k  -  Omega L  +  N
        + sum_{k1 k2} V_{k1 k2} a+_{k1} a_{k2}
        + 1/2 sum_{k1 k2 l1 l2} U_{k1 k2 l1 l2} a+_{k1} a+_{k2} a_{l1} a_{l2}

with V the quadrupolar trap-deformation elements and U the contact
interaction elements from `melem`. The constant axial zero-point energy is
dropped. Matrices are real symmetric and stored as the upper triangle, so
hermiticity holds by construction.
"""

import warnings
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import ParameterError, StructureError
from .fock import FockBasis, pack_keys
from .melem import ElementCache, canonical_quad

HBAR = 1.054571817e-34  # J s

#: entries below this magnitude are numerical noise and dropped
SPARSITY_EPS = 1e-14

#: anisotropies at or above this value undermine basis convergence
ANISOTROPY_WARN = 0.1


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model inputs; l_max defaults to n_particles + 2."""

    n_particles: int
    g: float
    anisotropy: float
    omega: float
    n_ll: int = 2
    l_max: int | None = None

    def __post_init__(self):
        if self.n_particles < 0:
            raise ParameterError("n_particles must be >= 0")
        if self.g < 0:
            raise ParameterError("interaction g must be >= 0")
        if self.anisotropy < 0:
            raise ParameterError("anisotropy must be >= 0")
        if self.n_ll < 1:
            raise ParameterError("n_ll must be >= 1")
        if self.l_max is None:
            object.__setattr__(self, "l_max", self.n_particles + 2)
        if self.anisotropy >= ANISOTROPY_WARN:
            warnings.warn(
                f"anisotropy {self.anisotropy} >= {ANISOTROPY_WARN}: basis "
                "truncation may not converge",
                stacklevel=2,
            )


@dataclass
class SparseHamiltonian:
    """Real symmetric matrix in upper-triangle coordinate storage."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    _csr: sp.csr_matrix | None = field(default=None, repr=False)

    def to_csr(self) -> sp.csr_matrix:
        """Full (mirrored) matrix in CSR form."""
        if self._csr is None:
            off = self.rows != self.cols
            r = np.concatenate([self.rows, self.cols[off]])
            c = np.concatenate([self.cols, self.rows[off]])
            v = np.concatenate([self.vals, self.vals[off]])
            self._csr = sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.dim,):
            raise StructureError(
                f"vector length {vec.shape} does not match dimension {self.dim}"
            )
        return self.to_csr() @ vec

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dim)
        on = self.rows == self.cols
        diag[self.rows[on]] = self.vals[on]
        return diag

    def dump_coordinate_text(self, path) -> None:
        """Write full symmetric entries as 'row col value' lines."""
        m = self.to_csr().tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(m.row, m.col, m.data):
                fh.write(f"{r} {c} {v!r}\n")


def _interaction_tables(basis: FockBasis, cache: ElementCache, g: float):
    """Flatten cache entries into the kernel's per-annihilation-pair layout."""
    nm = len(basis.modes)
    ms = [mode.m for mode in basis.modes]
    pairs_by_total: dict[int, list[tuple[int, int]]] = {}
    for a in range(nm):
        for b in range(nm):
            pairs_by_total.setdefault(ms[a] + ms[b], []).append((a, b))

    lp_start = np.zeros(nm * nm, dtype=np.int64)
    lp_end = np.zeros(nm * nm, dtype=np.int64)
    q_a: list[int] = []
    q_b: list[int] = []
    q_val: list[float] = []
    for c in range(nm):
        for d in range(nm):
            lp_start[c * nm + d] = len(q_a)
            for a, b in pairs_by_total[ms[c] + ms[d]]:
                raw = cache.u_raw[canonical_quad(a, b, c, d)]
                if raw == 0.0:
                    continue
                q_a.append(a)
                q_b.append(b)
                q_val.append(0.5 * g * raw)
            lp_end[c * nm + d] = len(q_a)
    return (
        lp_start, lp_end,
        np.array(q_a, dtype=np.int64),
        np.array(q_b, dtype=np.int64),
        np.array(q_val, dtype=np.float64),
    )


def assemble(basis: FockBasis, params: ModelParams,
             cache: ElementCache) -> SparseHamiltonian:
    """Build the Hamiltonian matrix for one parameter set."""
    if tuple(cache.modes) != tuple(basis.modes):
        raise StructureError("element cache was built over a different mode list")
    occ = basis.occupations
    ns, nm = occ.shape

    keys = pack_keys(occ, basis.n_particles)
    order = np.argsort(keys, kind="stable").astype(np.int64)
    keys_sorted = keys[order]
    bits = max(int(basis.n_particles).bit_length(), 1)

    v_scaled = params.anisotropy * cache.v_raw
    v_i, v_j = np.nonzero(v_scaled)
    v_val = v_scaled[v_i, v_j]

    lp_start, lp_end, q_a, q_b, q_val = _interaction_tables(basis, cache, params.g)
    sqrt_tab = np.sqrt(np.arange(basis.n_particles + 1, dtype=np.float64))

    rows, cols, vals = _kernels.assemble_entries(
        occ, keys_sorted, order, bits,
        v_i.astype(np.int64), v_j.astype(np.int64), v_val.astype(np.float64),
        lp_start, lp_end, q_a, q_b, q_val,
        sqrt_tab,
    )

    # one-body diagonal, rotation term and total-number term
    mode_n = np.array([mode.n for mode in basis.modes], dtype=np.int64)
    mode_m = np.array([mode.m for mode in basis.modes], dtype=np.int64)
    diag = (
        occ @ (2 * mode_n + np.abs(mode_m)).astype(np.float64)
        - params.omega * basis.L.astype(np.float64)
        + basis.n_particles
    )
    rows = np.concatenate([rows, np.arange(ns, dtype=np.int64)])
    cols = np.concatenate([cols, np.arange(ns, dtype=np.int64)])
    vals = np.concatenate([vals, diag])

    # coalesce duplicates, keep the upper triangle, drop numerical noise
    upper = rows <= cols
    r, c, v = rows[upper], cols[upper], vals[upper]
    lin = r * ns + c
    order2 = np.argsort(lin, kind="stable")
    lin, v = lin[order2], v[order2]
    boundary = np.flatnonzero(np.diff(lin)) + 1
    starts = np.concatenate([[0], boundary])
    summed = np.add.reduceat(v, starts)
    lin_u = lin[starts]
    keep = np.abs(summed) >= SPARSITY_EPS
    return SparseHamiltonian(
        dim=ns,
        rows=(lin_u[keep] // ns).astype(np.int64),
        cols=(lin_u[keep] % ns).astype(np.int64),
        vals=summed[keep],
    )


def matvec(ham: SparseHamiltonian, vec: np.ndarray) -> np.ndarray:
    """H @ v honoring the symmetric storage."""
    return ham.matvec(vec)


def physical_to_g(scattering_length_m: float, mass_kg: float,
                  omega_z_rad_s: float) -> float:
    """Dimensionless interaction strength a_s * sqrt(8 pi M w_z / hbar)."""
    if scattering_length_m < 0:
        raise ParameterError("scattering length must be >= 0")
    if mass_kg <= 0 or omega_z_rad_s <= 0:
        raise ParameterError("mass and axial frequency must be positive")
    return scattering_length_m * sqrt(8 * pi * mass_kg * omega_z_rad_s / HBAR)
