import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkz.dr import (
    InsertionList,
    Lattice,
    LatticeMismatch,
    MukaiVector,
    dr_from_json,
    dr_rhs_series,
    extract_gw,
    kkv,
    kkv_kernel,
    mukai_pairing,
    set_partitions_le2,
)
from qkz.jacobi import fourier_to_taylor
from qkz.modular import delta, eisenstein
from qkz.phi import phi_ode, phi_pair_ode

U = Lattice([[0, 1], [1, 0]])


def test_lattice_and_pairing():
    b = MukaiVector(0, (1, 1), 0, U)
    assert mukai_pairing(MukaiVector(1, (0, 0), 0, U), MukaiVector(1, (0, 0), 0, U)) == 0
    assert mukai_pairing(MukaiVector(1, (0, 0), 0, U), MukaiVector(0, (0, 0), 3, U)) == 3
    assert mukai_pairing(b, b) == -2
    with pytest.raises(ValueError):
        MukaiVector(1, (1, 0), 0, U)  # mixed degrees
    with pytest.raises(LatticeMismatch):
        MukaiVector(0, (1, 0, 0), 0, U)
    with pytest.raises(LatticeMismatch):
        mukai_pairing(b, MukaiVector(0, (1,), 0, Lattice([[2]])))
    with pytest.raises(ValueError):
        Lattice([[0, 1], [2, 0]])


def test_insertion_validation():
    g = MukaiVector(0, (1, 0), 0, U)
    with pytest.raises(ValueError):
        InsertionList([(1, g)], (1, 0), U)  # profile does not sum to zero
    with pytest.raises(ValueError):
        InsertionList([(0, g)], (1, 0), U)  # a = 0 with positive degree
    ins = InsertionList([(1, g), (-1, g)], (1, 2), U)
    assert ins.h == 3
    with pytest.warns(UserWarning):
        InsertionList([], (2, 2), U)


def test_set_partitions_count():
    # telephone numbers 1, 1, 2, 4, 10, 26
    assert [sum(1 for _ in set_partitions_le2(list(range(n)))) for n in range(6)] == [1, 1, 2, 4, 10, 26]


def test_zero_insertions_is_kernel():
    ins = InsertionList([], (1, 0), U)
    s = dr_rhs_series(ins, 10, 6)
    k = kkv_kernel(10, 6)
    assert s.truncate(z_order=10, q_order=6) == k.truncate(z_order=10, q_order=6)
    assert s.z_valuation == -2
    assert s.coefficient(-2, -1) == 1


def test_kkv_against_eta_oracles():
    table = kkv(5, 12)
    inv = delta(8).invert()
    g2_over = eisenstein(2, 8) * inv * 2
    for h in range(6):
        assert table[h][0] == inv.coefficient(h - 1)
        assert table[h][1] == g2_over.coefficient(h - 1)
    assert [table[h][0] for h in range(6)] == [1, 24, 324, 3200, 25650, 176256]
    assert table[0][2] == Fraction(1, 240)


def _random_insertions(rng, n):
    while True:
        entries = []
        for _ in range(n):
            deg = rng.randrange(3)
            a = rng.choice([-3, -2, -1, 1, 2, 3]) if deg else rng.randrange(-3, 4)
            if deg == 0:
                g = MukaiVector(rng.randrange(1, 3), (0, 0), 0, U)
            elif deg == 1:
                g = MukaiVector(0, (rng.randrange(-2, 3), rng.randrange(-2, 3)), 0, U)
                if g.is_zero():
                    g = MukaiVector(0, (1, 0), 0, U)
            else:
                g = MukaiVector(0, (0, 0), rng.randrange(1, 3), U)
            entries.append((a, g))
        rest = -sum(a for a, _ in entries[:-1])
        a_last, g_last = entries[-1]
        if rest == 0 and g_last.degree > 0:
            continue
        entries[-1] = (rest, g_last)
        return entries


@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_permutation_invariance(seed, n):
    rng = random.Random(seed)
    entries = _random_insertions(rng, n)
    beta = (1, rng.randrange(0, 3))
    base = dr_rhs_series(InsertionList(entries, beta, U), 6, 3)
    perm = entries[:]
    rng.shuffle(perm)
    assert dr_rhs_series(InsertionList(perm, beta, U), 6, 3) == base


@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_sign_law(seed, n):
    rng = random.Random(seed)
    entries = _random_insertions(rng, n)
    ins = InsertionList(entries, (1, rng.randrange(0, 3)), U)
    sign = (-1) ** (sum(g.degree for _, g in entries) + n)
    h = ins.h
    a = extract_gw(dr_rhs_series(ins, 8, h + 1), h, n)
    b = extract_gw(dr_rhs_series(ins.negated(), 8, h + 1), h, n)
    assert b == {g: v * sign for g, v in a.items()}


def test_divisor_pair_prefactor():
    # D = (1, -1): D.D = -2, D.beta = -1 for beta = (1, 0); prefactor 1/(1 * (-1)) = -1
    D = MukaiVector(0, (1, -1), 0, U)
    ins = InsertionList([(1, D), (-1, D)], (1, 0), U)
    z, q = 8, 2
    got = dr_rhs_series(ins, z, q)
    k = kkv_kernel(z, q)
    pair = fourier_to_taylor(phi_pair_ode(1, -1, q + 1), z + 2)
    p1 = fourier_to_taylor(phi_ode(1, q + 1), z + 2)
    pm = fourier_to_taylor(phi_ode(-1, q + 1), z + 2)
    want = -(k * pair * 2 + k * p1 * pm)
    assert got == want


def test_json_round_trip():
    data = {
        "gram": [[0, 1], [1, 0]],
        "beta": [1, 1],
        "insertions": [
            {"a": 2, "gamma": {"D": [1, 0]}},
            {"a": -1, "gamma": {"n": 1}},
            {"a": -1, "gamma": {"r": 1}},
        ],
        "z_order": 8,
        "h_max": 1,
    }
    out = dr_from_json(data)
    assert out["h_beta"] == 2
    assert out["series"]["1"] == {"1": "1", "2": "-1/4", "3": "1/40"}
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dr_from_json(data)
