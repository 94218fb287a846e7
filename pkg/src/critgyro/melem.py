"""Laguerre polynomials, Gauss-Laguerre quadrature and matrix elements.

All integrands here are polynomials times exp(-x), so a fixed-order rule
integrates them exactly (to roundoff). Two families of elements feed the
many-body Hamiltonian:

  * V(k1, k2; A): one-body element of the quadrupolar trap deformation
    (A/2) M w_perp^2 (x^2 - y^2), nonzero only for m2 = m1 +- 2,
  * U(k1, k2, l1, l2; g): two-body contact element (g hbar^2/M) delta2(r)
    for bosons frozen in the lowest axial state, nonzero only when
    m_k1 + m_k2 = m_l1 + m_l2.

In trap units the condensate self-element is U(0000) = g / (2 pi) and the
lowest quadrupole element is V((0,0),(0,2)) = A / (2 sqrt 2) * I1 = A sqrt2/4.
Raw cached values exclude the g and A factors so one cache serves every
parameter combination.
"""

from dataclasses import dataclass, field
from math import factorial, pi, sqrt

import numpy as np

from .errors import ParameterError
from .fock import Mode

DEFAULT_QUADRATURE_ORDER = 40

#: selection distance of the quadrupole coupling, in units of m
_QUAD_DELTA_M = 2


def laguerre(n: int, alpha: int, x):
    """Generalized Laguerre polynomial L_n^alpha(x) by the stable recurrence."""
    if n < 0 or alpha < 0:
        raise ParameterError(f"need n >= 0 and alpha >= 0, got ({n}, {alpha})")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre nodes/weights for the weight exp(-x) on [0, inf)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values: np.ndarray) -> float:
        """Sum of weights * values, i.e. integral of f with f(nodes)=values."""
        return float(np.dot(self.weights, values))


def make_rule(order: int = DEFAULT_QUADRATURE_ORDER) -> QuadratureRule:
    if order < 1:
        raise ParameterError(f"quadrature order must be >= 1, got {order}")
    nodes, weights = np.polynomial.laguerre.laggauss(order)
    return QuadratureRule(nodes=nodes, weights=weights, order=order)


_DEFAULT_RULE: QuadratureRule | None = None


def default_rule() -> QuadratureRule:
    global _DEFAULT_RULE
    if _DEFAULT_RULE is None:
        _DEFAULT_RULE = make_rule()
    return _DEFAULT_RULE


def integral_i1(k1: Mode, k2: Mode, rule: QuadratureRule | None = None) -> float:
    """Radial overlap integral of two modes against x^((|m1|+|m2|+2)/2) e^-x."""
    rule = rule or default_rule()
    n1, m1 = k1
    n2, m2 = k2
    x = rule.nodes
    power = (abs(m1) + abs(m2) + 2) / 2
    vals = x**power * laguerre(n1, abs(m1), x) * laguerre(n2, abs(m2), x)
    return rule.integrate(vals)


def integral_i2(
    k1: Mode, k2: Mode, l1: Mode, l2: Mode, rule: QuadratureRule | None = None
) -> float:
    """Four-mode contact overlap against x^(sum|m|/2) e^-x with half-argument Laguerres."""
    rule = rule or default_rule()
    ms = [abs(k[1]) for k in (k1, k2, l1, l2)]
    x = rule.nodes
    vals = x ** (sum(ms) / 2)
    for (n, _), am in zip((k1, k2, l1, l2), ms):
        vals = vals * laguerre(n, am, x / 2)
    return rule.integrate(vals)


def _norm_factor(mode: Mode) -> float:
    n, m = mode
    return factorial(n) / factorial(n + abs(m))


def v_element(k1: Mode, k2: Mode, anisotropy: float,
              rule: QuadratureRule | None = None) -> float:
    """Quadrupole deformation element between modes k1 and k2."""
    if abs(k2[1] - k1[1]) != _QUAD_DELTA_M:
        return 0.0
    pref = sqrt(_norm_factor(Mode(*k1)) * _norm_factor(Mode(*k2)))
    return 0.25 * anisotropy * pref * integral_i1(k1, k2, rule)


def u_element(k1: Mode, k2: Mode, l1: Mode, l2: Mode, interaction: float,
              rule: QuadratureRule | None = None) -> float:
    """Contact interaction element for creation pair (k1,k2), annihilation (l1,l2)."""
    if k1[1] + k2[1] != l1[1] + l2[1]:
        return 0.0
    total_am = sum(abs(k[1]) for k in (k1, k2, l1, l2))
    pref = sqrt(
        _norm_factor(Mode(*k1)) * _norm_factor(Mode(*k2))
        * _norm_factor(Mode(*l1)) * _norm_factor(Mode(*l2))
    )
    i2 = integral_i2(k1, k2, l1, l2, rule)
    return interaction / (2 * pi) * 2.0 ** (-total_am / 2) * pref * i2


def canonical_quad(a: int, b: int, c: int, d: int) -> tuple[int, int, int, int]:
    """Lexicographically smallest image under the two-body symmetries.

    The raw element is invariant under swapping within the creation pair,
    within the annihilation pair, and swapping the two pairs.
    """
    return min(
        (a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
        (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a),
    )


@dataclass
class ElementCache:
    """Parameter-free element tables over a fixed mode list.

    v_raw[i, j] carries everything of the deformation element except the
    anisotropy A; u_raw maps canonical index quadruples to the contact
    element with the interaction g divided out. Both stay valid for every
    (g, A) pair.
    """

    modes: tuple[Mode, ...]
    rule: QuadratureRule
    v_raw: np.ndarray
    u_raw: dict = field(repr=False)

    @classmethod
    def build(cls, modes, rule: QuadratureRule | None = None) -> "ElementCache":
        modes = tuple(Mode(*k) for k in modes)
        rule = rule or default_rule()
        nm = len(modes)
        x = rule.nodes

        # Laguerre value tables per distinct (n, |m|), at x and x/2
        tab_full: dict[tuple[int, int], np.ndarray] = {}
        tab_half: dict[tuple[int, int], np.ndarray] = {}
        for n, m in modes:
            key = (n, abs(m))
            if key not in tab_full:
                tab_full[key] = laguerre(n, abs(m), x)
                tab_half[key] = laguerre(n, abs(m), x / 2)
        max_power = max(abs(m) for _, m in modes) * 2 + 2
        xpow = np.array([x**p for p in range(max_power + 1)])

        v_raw = np.zeros((nm, nm))
        for i, ki in enumerate(modes):
            for j, kj in enumerate(modes):
                if abs(kj.m - ki.m) != _QUAD_DELTA_M:
                    continue
                p = (abs(ki.m) + abs(kj.m) + 2) // 2
                integ = rule.integrate(
                    xpow[p] * tab_full[(ki.n, abs(ki.m))] * tab_full[(kj.n, abs(kj.m))]
                )
                v_raw[i, j] = 0.25 * sqrt(_norm_factor(ki) * _norm_factor(kj)) * integ

        pairs_by_total: dict[int, list[tuple[int, int]]] = {}
        for a in range(nm):
            for b in range(nm):
                pairs_by_total.setdefault(modes[a].m + modes[b].m, []).append((a, b))

        u_raw: dict[tuple[int, int, int, int], float] = {}
        for pairs in pairs_by_total.values():
            for a, b in pairs:
                for c, d in pairs:
                    key = canonical_quad(a, b, c, d)
                    if key in u_raw:
                        continue
                    quad = [modes[t] for t in key]
                    total_am = sum(abs(k.m) for k in quad)
                    vals = xpow[total_am // 2].copy()
                    pref = 1.0
                    for k in quad:
                        vals *= tab_half[(k.n, abs(k.m))]
                        pref *= _norm_factor(k)
                    u_raw[key] = (
                        2.0 ** (-total_am / 2) / (2 * pi)
                        * sqrt(pref) * rule.integrate(vals)
                    )
        return cls(modes=modes, rule=rule, v_raw=v_raw, u_raw=u_raw)

    def v_of(self, i: int, j: int, anisotropy: float) -> float:
        return anisotropy * self.v_raw[i, j]

    def u_of(self, a: int, b: int, c: int, d: int, interaction: float) -> float:
        ms = [self.modes[t].m for t in (a, b, c, d)]
        if ms[0] + ms[1] != ms[2] + ms[3]:
            return 0.0
        return interaction * self.u_raw[canonical_quad(a, b, c, d)]

    def dump_csv(self, path) -> None:
        """Write raw V and U tables keyed by mode indices."""
        with open(path, "w") as fh:
            fh.write("kind,i,j,k,l,raw\n")
            nm = len(self.modes)
            for i in range(nm):
                for j in range(nm):
                    if self.v_raw[i, j] != 0.0:
                        fh.write(f"V,{i},{j},,,{self.v_raw[i, j]!r}\n")
            for (a, b, c, d), val in sorted(self.u_raw.items()):
                fh.write(f"U,{a},{b},{c},{d},{val!r}\n")
