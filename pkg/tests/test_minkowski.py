"""Internal exterior algebra: dimensions, signs, contraction, pairing, trace."""

import numpy as np
import pytest

from nullframe.minkowski import (
    DIM_V,
    ETA_DIAG,
    InternalMultivector as IV,
    contract_internal,
    dim_lambda,
    pair_bivectors,
    subsets,
    trace_top,
    wedge_internal,
)


def test_fiber_dimensions():
    assert [dim_lambda(j) for j in range(5)] == [1, 4, 6, 4, 1]
    for j in range(5):
        assert len(subsets(DIM_V, j)) == dim_lambda(j)


def test_wedge_basis_and_antisymmetry():
    u1, u2 = IV.basis([0]), IV.basis([1])
    w = wedge_internal(u1, u2)
    assert w.c == {0b0011: 1.0}
    assert wedge_internal(u1, u1).norm() == 0.0
    # (u1+u2)^(u1-u2) = -2 u1^u2
    a = u1.add(u2)
    b = u1.add(u2.scale(-1.0))
    w = wedge_internal(a, b)
    assert abs(w.get(0b0011) + 2.0) < 1e-15


def test_wedge_graded_anticommutativity_exhaustive():
    # all basis pairs in all degrees with j+l <= 4
    for j in range(5):
        for l in range(5 - j):
            for m1 in subsets(DIM_V, j):
                for m2 in subsets(DIM_V, l):
                    a = IV(j, {m1: 1.0})
                    b = IV(l, {m2: 1.0})
                    ab = wedge_internal(a, b)
                    ba = wedge_internal(b, a)
                    sgn = (-1) ** (j * l)
                    diff = ab.add(ba.scale(-sgn))
                    assert diff.norm() == 0.0


def test_wedge_degree_overflow_rejected():
    a = IV.basis([0, 1, 2])
    b = IV.basis([0, 3])
    with pytest.raises(ValueError):
        wedge_internal(a, b)


def test_contraction_examples():
    u1, u2, u4 = IV.basis([0]), IV.basis([1]), IV.basis([3])
    # iota_{u2}(u1^u2) = -eta_22 u1 = -u1  (first-slot convention)
    w = wedge_internal(u1, u2)
    c = contract_internal(w, u2)
    assert abs(c.get(0b0001) + 1.0) < 1e-15
    # iota_{u4}(u4) = eta_44 = -1
    c = contract_internal(u4, u4)
    assert abs(c.get(0) + 1.0) < 1e-15
    # orthogonal direction gives zero
    c = contract_internal(wedge_internal(u1, u2), IV.basis([2]))
    assert c.norm() == 0.0
    with pytest.raises(ValueError):
        contract_internal(IV(0, {0: 1.0}), u1)


def test_contraction_antiderivation_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(120):
        j = rng.integers(1, 3)
        l = rng.integers(1, 4 - j + 1)
        a = IV(j, {m: rng.normal() for m in subsets(DIM_V, j)})
        b = IV(l, {m: rng.normal() for m in subsets(DIM_V, l)})
        x = IV(1, {m: rng.normal() for m in subsets(DIM_V, 1)})
        lhs = contract_internal(wedge_internal(a, b), x)
        rhs = wedge_internal(contract_internal(a, x), b)
        rhs = rhs.add(wedge_internal(a, contract_internal(b, x)).scale((-1.0) ** j))
        assert lhs.add(rhs.scale(-1.0)).norm() < 1e-14


def test_pair_bivectors_against_double_contraction_oracle():
    # oracle: (a,b) = iota-contract b twice into a with eta
    def oracle(m1, m2):
        a = IV(2, {m1: 1.0})
        i1, i2 = [IV.basis([p]) for p in sorted(
            [q for q in range(DIM_V) if (m2 >> q) & 1])]
        # (a, u_c ^ u_d) = iota_{u_d} iota_{u_c} a ; this slot order gives
        # the canonical pairing (eta_ac eta_bd - eta_ad eta_bc)
        v = contract_internal(contract_internal(a, i1), i2)
        return v.get(0)

    for m1 in subsets(DIM_V, 2):
        for m2 in subsets(DIM_V, 2):
            a = IV(2, {m1: 1.0})
            b = IV(2, {m2: 1.0})
            got = pair_bivectors(a, b)
            want = oracle(m1, m2)
            assert abs(got - want) < 1e-15
            # symmetry
            assert abs(pair_bivectors(b, a) - got) < 1e-15


def test_pair_bivector_values():
    b12 = IV.basis([0, 1])
    b34 = IV.basis([2, 3])
    assert abs(pair_bivectors(b12, b12) - 1.0) < 1e-15   # eta11 eta22
    assert abs(pair_bivectors(b34, b34) + 1.0) < 1e-15   # eta33 eta44
    assert abs(pair_bivectors(b12, b34)) < 1e-15
    with pytest.raises(ValueError):
        pair_bivectors(b12, IV.basis([0]))


def test_trace_top():
    top = IV.basis([0, 1, 2, 3])
    assert trace_top(top) == 1.0
    swapped = IV.basis([1, 0, 2, 3])
    assert trace_top(swapped) == -1.0
    assert trace_top(IV(4)) == 0.0
    assert float(ETA_DIAG[3]) == -1.0
