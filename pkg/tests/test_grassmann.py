"""Grassmann payload arithmetic."""

import numpy as np

from nullframe.grassmann import (
    Grass,
    gadd,
    gbody,
    gconj,
    gmul,
    gnorm,
    gparity_sign,
    merge_sign,
)


def test_merge_signs():
    assert merge_sign(0b01, 0b10) == 1     # t0 t1 already sorted
    assert merge_sign(0b10, 0b01) == -1    # t1 t0 -> -t0 t1
    assert merge_sign(0b01, 0b01) == 0     # square of a generator
    assert merge_sign(0b110, 0b001) == 1   # t1 t2 t0 -> two jumps
    assert merge_sign(0b011, 0b100) == 1


def test_anticommutation_and_nilpotency():
    t0, t1 = Grass.gen(0), Grass.gen(1)
    ab = gmul(t0, t1)
    ba = gmul(t1, t0)
    assert gnorm(gadd(ab, ba)) == 0.0
    assert gnorm(gmul(t0, t0)) == 0.0
    # product of more odd factors than generators vanishes
    g = Grass.body(1.0)
    for k in range(4):
        g = gmul(g, Grass.gen(k % 3))
    assert gnorm(g) == 0.0


def test_cross_sign():
    t = Grass.gen(0, 2.0)
    assert gmul(Grass.body(1.0), t, cross=1).terms == {1: -2.0}
    assert gmul(Grass.body(1.0), t, cross=2).terms == {1: 2.0}
    assert gparity_sign(t, 1).terms == {1: -2.0}
    even = gmul(Grass.gen(0), Grass.gen(1))
    assert gparity_sign(even, 1).terms == even.terms


def test_mixed_parity_and_body():
    g = gadd(Grass.body(3.0), Grass.gen(2, 1.5))
    assert g.parity is None
    assert gbody(g) == 3.0
    assert gbody(2.5) == 2.5


def test_array_payloads():
    arr = np.array([1.0, -2.0])
    g = Grass.gen(0, arr)
    h = gmul(g, Grass.gen(1, arr))
    np.testing.assert_allclose(h.terms[0b11], arr * arr)
    assert gnorm(h) == 4.0


def test_conj_reverses_monomials():
    t01 = gmul(Grass.gen(0, 1j), Grass.gen(1))
    c = gconj(t01)
    # (i t0 t1)* = -i t1* t0* = +i ... sign: reversal of a 2-monomial gives -1
    assert c.terms[0b11] == 1j
