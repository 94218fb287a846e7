import numpy as np
import pytest
from math import factorial, pi, sqrt
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre

from critgyro.errors import ParameterError
from critgyro.fock import Mode, enumerate_modes
from critgyro.melem import (
    ElementCache,
    canonical_quad,
    default_rule,
    integral_i1,
    integral_i2,
    laguerre,
    make_rule,
    u_element,
    v_element,
)
from oracle import oracle_i1, oracle_i2, oracle_u, oracle_v


def test_laguerre_basics():
    assert laguerre(0, 3, 17.2) == 1.0
    assert laguerre(1, 0, 2.0) == -1.0
    assert laguerre(1, 1, 1.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=8),
    alpha=st.integers(min_value=0, max_value=8),
    x=st.floats(min_value=0.0, max_value=50.0),
)
def test_laguerre_matches_scipy(n, alpha, x):
    ours = laguerre(n, alpha, x)
    ref = float(eval_genlaguerre(n, alpha, x))
    assert ours == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_laguerre_vectorized():
    x = np.linspace(0, 10, 7)
    vals = laguerre(2, 1, x)
    assert vals.shape == x.shape
    assert np.allclose(vals, [float(eval_genlaguerre(2, 1, xi)) for xi in x])


def test_laguerre_rejects_negative():
    with pytest.raises(ParameterError):
        laguerre(-1, 0, 1.0)


def test_rule_weights_sum_to_one():
    rule = default_rule()
    assert abs(rule.weights.sum() - 1.0) < 1e-12


def test_rule_monomial_exactness_spot():
    rule = make_rule(40)
    for k in (0, 1, 7, 20, 50, 79):
        quad = rule.integrate(rule.nodes**k)
        assert quad == pytest.approx(float(factorial(k)), rel=1e-10)


def test_i1_examples():
    # pinned from the exact Gamma-expansion oracle
    assert oracle_i1((0, 0), (0, 2)) == 2.0
    assert oracle_i1((0, 1), (0, 3)) == 6.0
    assert oracle_i1((1, 0), (0, 2)) == -4.0
    assert integral_i1(Mode(0, 0), Mode(0, 2)) == pytest.approx(2.0, abs=1e-10)
    assert integral_i1(Mode(0, 1), Mode(0, 3)) == pytest.approx(6.0, abs=1e-10)
    assert integral_i1(Mode(1, 0), Mode(0, 2)) == pytest.approx(-4.0, abs=1e-10)


def test_i2_examples():
    assert oracle_i2((0, 0), (0, 0), (0, 0), (0, 0)) == 1.0
    assert oracle_i2((0, 0), (0, 1), (0, 1), (0, 0)) == 1.0
    assert oracle_i2((0, 2), (0, 0), (0, 1), (0, 1)) == 2.0
    g = Mode(0, 0)
    assert integral_i2(g, g, g, g) == pytest.approx(1.0, abs=1e-12)
    assert integral_i2(g, Mode(0, 1), Mode(0, 1), g) == pytest.approx(1.0, abs=1e-12)
    assert integral_i2(Mode(0, 2), g, Mode(0, 1), Mode(0, 1)) == pytest.approx(
        2.0, abs=1e-12
    )


def test_v_selection_rule_and_zero_anisotropy():
    assert v_element(Mode(0, 0), Mode(0, 1), 0.5) == 0.0
    assert v_element(Mode(0, 0), Mode(0, 3), 0.5) == 0.0
    assert v_element(Mode(0, 0), Mode(0, 2), 0.0) == 0.0


def test_v_element_value():
    # quadrupole element between the condensate mode and m = 2:
    # (A/4) * sqrt(1/2) * 2 = A * sqrt(2)/4, cross-checked by the oracle
    expect = 0.04 * sqrt(2) / 4
    assert oracle_v((0, 0), (0, 2), 0.04) == pytest.approx(expect, rel=1e-12)
    assert v_element(Mode(0, 0), Mode(0, 2), 0.04) == pytest.approx(
        expect, rel=1e-10
    )


def test_u_conservation_and_values():
    m0 = Mode(0, 0)
    m1 = Mode(0, 1)
    assert u_element(m0, m0, m0, m1, 0.5) == 0.0
    # condensate self-interaction: g / (2 pi)
    assert u_element(m0, m0, m0, m0, 0.5) == pytest.approx(
        0.5 / (2 * pi), rel=1e-12
    )
    assert oracle_u((0, 0), (0, 0), (0, 0), (0, 0), 0.5) == pytest.approx(
        0.5 / (2 * pi), rel=1e-12
    )
    # one unit of angular momentum exchanged: extra factor 1/2
    assert u_element(m0, m1, m1, m0, 0.5) == pytest.approx(
        0.5 / (4 * pi), rel=1e-12
    )


def test_u_symmetries():
    rng = np.random.default_rng(3)
    modes = enumerate_modes(2, 4)
    for _ in range(40):
        k1, k2, l1, l2 = (modes[i] for i in rng.integers(0, len(modes), 4))
        if k1.m + k2.m != l1.m + l2.m:
            continue
        base = u_element(k1, k2, l1, l2, 0.7)
        assert u_element(k2, k1, l1, l2, 0.7) == pytest.approx(base, rel=1e-12, abs=1e-15)
        assert u_element(k1, k2, l2, l1, 0.7) == pytest.approx(base, rel=1e-12, abs=1e-15)
        assert u_element(l1, l2, k1, k2, 0.7) == pytest.approx(base, rel=1e-12, abs=1e-15)


def test_v_symmetric_and_linear():
    a = v_element(Mode(0, 1), Mode(0, 3), 0.03)
    b = v_element(Mode(0, 3), Mode(0, 1), 0.03)
    assert a == pytest.approx(b, rel=1e-12)
    assert v_element(Mode(0, 1), Mode(0, 3), 0.06) == pytest.approx(2 * a, rel=1e-12)


def test_u_linear_in_g():
    m0, m2 = Mode(0, 0), Mode(0, 2)
    one = u_element(m2, m0, Mode(0, 1), Mode(0, 1), 1.0)
    assert u_element(m2, m0, Mode(0, 1), Mode(0, 1), 0.25) == pytest.approx(
        0.25 * one, rel=1e-12
    )


def test_quadrature_matches_oracle_over_small_mode_set():
    modes = enumerate_modes(2, 4)
    rule = default_rule()
    for k1 in modes:
        for k2 in modes:
            if (abs(k1.m) + abs(k2.m)) % 2:
                continue
            assert integral_i1(k1, k2, rule) == pytest.approx(
                oracle_i1(k1, k2), rel=1e-9, abs=1e-9
            )


def test_cache_matches_free_functions():
    modes = enumerate_modes(2, 3)
    cache = ElementCache.build(modes)
    for i, k1 in enumerate(modes):
        for j, k2 in enumerate(modes):
            assert cache.v_of(i, j, 0.05) == pytest.approx(
                v_element(k1, k2, 0.05), rel=1e-12, abs=1e-15
            )
    rng = np.random.default_rng(11)
    hits = 0
    while hits < 30:
        a, b, c, d = rng.integers(0, len(modes), 4)
        if modes[a].m + modes[b].m != modes[c].m + modes[d].m:
            assert cache.u_of(a, b, c, d, 0.5) == 0.0
            continue
        hits += 1
        assert cache.u_of(a, b, c, d, 0.5) == pytest.approx(
            u_element(modes[a], modes[b], modes[c], modes[d], 0.5),
            rel=1e-12, abs=1e-15,
        )


def test_cache_is_parameter_free():
    modes = enumerate_modes(2, 3)
    cache = ElementCache.build(modes)
    i, j = modes.index(Mode(0, 0)), modes.index(Mode(0, 2))
    assert cache.v_of(i, j, 0.08) == pytest.approx(2 * cache.v_of(i, j, 0.04))
    assert cache.u_of(0, 0, 0, 0, 1.0) == pytest.approx(2 * cache.u_of(0, 0, 0, 0, 0.5))


def test_canonical_quad_is_invariant():
    images = [
        (1, 2, 3, 4), (2, 1, 3, 4), (1, 2, 4, 3), (2, 1, 4, 3),
        (3, 4, 1, 2), (4, 3, 1, 2), (3, 4, 2, 1), (4, 3, 2, 1),
    ]
    assert len({canonical_quad(*img) for img in images}) == 1


def test_cache_dump(tmp_path):
    modes = enumerate_modes(2, 2)
    cache = ElementCache.build(modes)
    path = tmp_path / "elements.csv"
    cache.dump_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "kind,i,j,k,l,raw"
    assert any(line.startswith("V,") for line in lines[1:])
    assert any(line.startswith("U,") for line in lines[1:])
