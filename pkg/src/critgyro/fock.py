"""Single-particle modes and the truncated many-body Fock basis.

A mode is labelled k = (n, m): radial (Landau) index n and angular momentum
m in units of hbar. Two truncations define the basis of N-boson states:

  * Landau-level cap: 1 + sum over particles of [n + (|m| - m)/2] <= n_LL,
  * total angular momentum L = sum(m_k N_k) <= L_max.

With the default n_LL = 2 the whole state may carry at most one unit of
radial excitation or one particle at m = -1.
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ParameterError


class Mode(NamedTuple):
    n: int
    m: int


#: A many-body state as occupation counts per mode.
FockState = Mapping[Mode, int]


def landau_weight(mode: Mode) -> int:
    """Landau index n + (|m| - m)/2 of a single-particle mode."""
    n, m = mode
    return n + (abs(m) - m) // 2


def enumerate_modes(n_ll: int, l_max: int) -> list[Mode]:
    """All modes with landau_weight <= n_ll - 1 and m <= l_max, sorted by (n, m)."""
    if n_ll < 1:
        raise ParameterError(f"n_ll must be >= 1, got {n_ll}")
    if l_max < 0:
        raise ParameterError(f"l_max must be >= 0, got {l_max}")
    modes = []
    for n in range(n_ll):
        # negative m costs (|m| - m)/2 = -m units of weight, so m >= n - (n_ll - 1)
        for m in range(-(n_ll - 1 - n), l_max + 1):
            modes.append(Mode(n, m))
    return sorted(modes)


def total_L(state: FockState) -> int:
    """Total angular momentum sum(m_k * N_k) of an occupation mapping."""
    return sum(Mode(*k).m * c for k, c in state.items())


def state_weight(state: FockState) -> int:
    """Summed Landau weight of all particles in the state."""
    return sum(landau_weight(Mode(*k)) * c for k, c in state.items())


@dataclass(frozen=True)
class FockBasis:
    """Ordered truncated basis with fast occupation -> index lookup."""

    n_particles: int
    n_ll: int
    l_max: int
    modes: tuple[Mode, ...]
    occupations: np.ndarray          # (size, n_modes) int64
    L: np.ndarray                    # (size,) int64 total angular momentum
    index: dict = field(repr=False)  # occupation tuple -> row

    @property
    def size(self) -> int:
        return self.occupations.shape[0]

    def index_of(self, state) -> int:
        """Row of a state given as occupation tuple or Mode->count mapping."""
        if isinstance(state, Mapping):
            occ = [0] * len(self.modes)
            pos = {mode: i for i, mode in enumerate(self.modes)}
            for k, c in state.items():
                occ[pos[Mode(*k)]] = c
            state = tuple(occ)
        return self.index[tuple(state)]

    def state_occupations(self, i: int) -> dict[Mode, int]:
        """Occupation mapping of basis state i (nonzero entries only)."""
        row = self.occupations[i]
        return {self.modes[j]: int(row[j]) for j in np.nonzero(row)[0]}

    def zero_momentum_mask(self) -> np.ndarray:
        """Boolean mask of states whose particles all sit at m = 0."""
        nonzero_m = np.array([mode.m != 0 for mode in self.modes])
        return ~(self.occupations[:, nonzero_m].any(axis=1))

    def dump_csv(self, path) -> None:
        """Write (index, L, occupations) rows for debugging."""
        with open(path, "w") as fh:
            fh.write("index,L,occupations\n")
            for i in range(self.size):
                occ = ";".join(
                    f"{mode.n}:{mode.m}:{c}"
                    for mode, c in self.state_occupations(i).items()
                )
                fh.write(f"{i},{self.L[i]},{occ}\n")


def enumerate_basis(n_particles: int, n_ll: int, l_max: int) -> FockBasis:
    """Enumerate every N-particle state surviving both truncations.

    States are ordered by (total L, lexicographic occupations over the sorted
    mode list), which keeps the L blocks contiguous.
    """
    if n_particles < 0:
        raise ParameterError(f"n_particles must be >= 0, got {n_particles}")
    modes = enumerate_modes(n_ll, l_max)
    weights = [landau_weight(mode) for mode in modes]
    ms = [mode.m for mode in modes]
    n_modes = len(modes)
    # suffix extrema of m for pruning the L bound during the scan
    suf_min = [0] * (n_modes + 1)
    suf_max = [0] * (n_modes + 1)
    for i in range(n_modes - 1, -1, -1):
        suf_min[i] = min(ms[i], suf_min[i + 1]) if i < n_modes - 1 else ms[i]
        suf_max[i] = max(ms[i], suf_max[i + 1]) if i < n_modes - 1 else ms[i]

    found: list[tuple[int, tuple[int, ...]]] = []
    occ = [0] * n_modes

    def scan(i: int, left: int, wleft: int, lsum: int) -> None:
        if left == 0:
            if lsum <= l_max:
                found.append((lsum, tuple(occ)))
            return
        if i == n_modes:
            return
        if lsum + left * suf_min[i] > l_max:
            return  # even all-minimal-m placements overshoot L_max
        max_count = left if weights[i] == 0 else min(left, wleft // weights[i])
        for c in range(max_count + 1):
            occ[i] = c
            scan(i + 1, left - c, wleft - c * weights[i], lsum + c * ms[i])
        occ[i] = 0

    scan(0, n_particles, n_ll - 1, 0)
    found.sort()
    occupations = np.array([s for _, s in found], dtype=np.int64).reshape(
        len(found), n_modes
    )
    L = np.array([l for l, _ in found], dtype=np.int64)
    index = {s: i for i, (_, s) in enumerate(found)}
    return FockBasis(
        n_particles=n_particles,
        n_ll=n_ll,
        l_max=l_max,
        modes=tuple(modes),
        occupations=occupations,
        L=L,
        index=index,
    )


def pack_keys(occupations: np.ndarray, n_particles: int) -> np.ndarray:
    """Encode occupation rows as int64 keys (for kernel-side lookup).

    Requires bits_per_mode * n_modes <= 62; the N = 6 production basis uses
    3 * 19 = 57 bits.
    """
    bits = max(int(n_particles).bit_length(), 1)
    n_modes = occupations.shape[1]
    if bits * n_modes > 62:
        raise ParameterError(
            f"cannot pack {n_modes} modes at {bits} bits each into int64"
        )
    keys = np.zeros(occupations.shape[0], dtype=np.int64)
    for j in range(n_modes):
        keys = (keys << bits) | occupations[:, j].astype(np.int64)
    return keys
