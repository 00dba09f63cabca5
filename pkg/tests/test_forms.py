"""Mixed-form algebra: graded symmetry, bracket anchors, Leibniz structure."""

import numpy as np
import pytest

from nullframe.grassmann import Grass
from nullframe.forms import (
    MixedForm as MF,
    VectorField,
    apply_internal,
    fiber_dim,
    fiber_keys,
    gen_bracket,
    interior_internal,
    interior_tangent,
    pair_internal,
    trace_top,
    wedge,
)
from nullframe.minkowski import ETA_DIAG, subsets

RNG = np.random.default_rng(11)


def rand_form(i, j, rng=RNG, odd=False):
    out = MF.zero(i, j)
    for key in fiber_keys(i, j):
        v = rng.normal()
        if odd:
            v = Grass({1 << rng.integers(0, 4): v})
        out.c[key] = v
    return out


def total(par_form):
    return par_form.i + par_form.j


def test_fiber_dimensions():
    assert fiber_dim(1, 1) == 12
    assert fiber_dim(2, 2) == 18
    assert fiber_dim(0, 2) == 6
    assert fiber_dim(1, 3) == 12
    assert fiber_dim(2, 1) == 12
    assert fiber_dim(1, 2) == 18


def test_wedge_graded_symmetry_exhaustive_basis():
    for i in range(3):
        for j in range(4):
            for k in range(3 - i + 1):
                for l in range(4 - j + 1):
                    a = rand_form(i, j)
                    b = rand_form(k, l)
                    ab = wedge(a, b)
                    ba = wedge(b, a)
                    sgn = (-1.0) ** ((i + j) * (k + l))
                    assert ab.sub(ba.scale(sgn)).norm() < 1e-13


def test_wedge_graded_symmetry_with_odd_coefficients():
    rng = np.random.default_rng(3)
    cases = [((0, 2), (0, 2)), ((1, 2), (1, 1)), ((0, 1), (1, 0)), ((1, 3), (2, 1))]
    for (i, j), (k, l) in cases:
        a = rand_form(i, j, rng, odd=True)
        b = rand_form(k, l, rng, odd=True)
        sgn = (-1.0) ** ((i + j + 1) * (k + l + 1))
        assert wedge(a, b).sub(wedge(b, a).scale(sgn)).norm() < 1e-13


def test_wedge_overflow_rejected():
    e = rand_form(1, 1)
    with pytest.raises(ValueError):
        wedge(wedge(wedge(e, e), e), e)  # spacetime degree 4 on a 3-dim base


def test_bracket_fundamental_action():
    # [u1^u2, u2] = eta_22 u1 = u1
    a = MF.basis(0, 2, 0, 0b0011)
    v = MF.basis(0, 1, 0, 0b0010)
    br = gen_bracket(a, v)
    assert abs(br.get(0, 0b0001) - 1.0) < 1e-15
    assert len(br.prune(1e-15).c) == 1
    # general formula [u_a^u_b, u_c] = eta_bc u_a - eta_ac u_b
    for ab in subsets(4, 2):
        xs = [p for p in range(4) if (ab >> p) & 1]
        for cidx in range(4):
            br = gen_bracket(MF.basis(0, 2, 0, ab), MF.basis(0, 1, 0, 1 << cidx))
            want = np.zeros(4)
            a_, b_ = xs
            if cidx == b_:
                want[a_] += ETA_DIAG[b_]
            if cidx == a_:
                want[b_] -= ETA_DIAG[a_]
            got = np.array([br.get(0, 1 << p) for p in range(4)], dtype=complex)
            assert np.max(np.abs(got - want)) < 1e-15


def so_matrix(biv: MF) -> np.ndarray:
    """dro(biv): the endomorphism v -> [biv, v] of V."""
    m = np.zeros((4, 4), dtype=complex)
    for c in range(4):
        out = gen_bracket(biv, MF.basis(0, 1, 0, 1 << c))
        for r in range(4):
            m[r, c] = out.get(0, 1 << r)
    return m


def test_bracket_matches_so31_commutator_all_basis_pairs():
    basis = [MF.basis(0, 2, 0, m) for m in subsets(4, 2)]
    for a in basis:
        for b in basis:
            lhs = so_matrix(gen_bracket(a, b))
            rhs = so_matrix(a) @ so_matrix(b) - so_matrix(b) @ so_matrix(a)
            assert np.max(np.abs(lhs - rhs)) < 1e-14
    # the matrices are eta-antisymmetric, confirming so(3,1)
    eta = np.diag(ETA_DIAG)
    for a in basis:
        m = so_matrix(a)
        assert np.max(np.abs((eta @ m).T + eta @ m)) < 1e-14


def test_bracket_orthogonal_indices_vanish():
    a = MF.basis(1, 2, 0b001, 0b0011)
    b = MF.basis(0, 2, 0, 0b1100)
    assert gen_bracket(a, b).norm() == 0.0


def test_bracket_leibniz_for_lie_slots_fuzz():
    """so(3,1)-valued slots act as total-degree derivations:

    [X, Y^Z] = [X,Y]^Z + (-1)^{|X||Y|} Y^[X,Z]  for X of internal degree 2,
    fuzzed over >= 100 random triples.
    """
    rng = np.random.default_rng(23)
    count = 0
    while count < 120:
        i1 = rng.integers(0, 3)
        j1 = 2
        i2, j2 = rng.integers(0, 2), rng.integers(1, 3)
        i3, j3 = rng.integers(0, 2), rng.integers(1, 3)
        if i1 + i2 + i3 > 3 or j2 + j3 > 4:
            continue
        count += 1
        x = rand_form(i1, j1, rng)
        y = rand_form(i2, j2, rng)
        z = rand_form(i3, j3, rng)
        lhs = gen_bracket(x, wedge(y, z))
        rhs = wedge(gen_bracket(x, y), z)
        sgn = (-1.0) ** ((i1 + j1) * (i2 + j2))
        rhs = rhs.add(wedge(y, gen_bracket(x, z)).scale(sgn))
        scale = max(lhs.norm(), 1.0)
        assert lhs.sub(rhs).norm() / scale < 1e-12


def test_bracket_graded_symmetry():
    """Spacetime and internal index groups swap independently:

    [a,b] = (-1)^{i1 i2 + (j1+1)(j2+1)} [b,a].
    """
    rng = np.random.default_rng(5)
    for (i1, j1), (i2, j2) in [((0, 2), (0, 2)), ((1, 2), (1, 1)), ((0, 1), (1, 1)),
                               ((1, 3), (1, 1)), ((0, 1), (0, 1)), ((1, 2), (1, 2)),
                               ((0, 2), (1, 2)), ((1, 1), (1, 1)), ((1, 3), (0, 2))]:
        a = rand_form(i1, j1, rng)
        b = rand_form(i2, j2, rng)
        sgn = (-1.0) ** (i1 * i2 + (j1 + 1) * (j2 + 1))
        assert gen_bracket(a, b).sub(gen_bracket(b, a).scale(sgn)).norm() < 1e-13


def test_bracket_jacobi_for_curvature():
    """[w,[w,a]] = 1/2 [[w,w],a] -- what d_omega^2 = [F_omega, .] needs."""
    rng = np.random.default_rng(9)
    for (ia, ja) in [(1, 1), (0, 2), (1, 2), (0, 1)]:
        w = rand_form(1, 2, rng)
        a = rand_form(ia, ja, rng)
        lhs = gen_bracket(w, gen_bracket(w, a))
        rhs = gen_bracket(gen_bracket(w, w), a).scale(0.5)
        assert lhs.sub(rhs).norm() < 1e-12


def test_odd_self_bracket_nonzero():
    """[c,c] with Grassmann-odd c is the polarization and must not vanish."""
    rng = np.random.default_rng(13)
    c0, c1 = rand_form(0, 2, rng), rand_form(0, 2, rng)
    c = c0.mul_payload(Grass.gen(0)).add(c1.mul_payload(Grass.gen(1)))
    cc = gen_bracket(c, c)
    assert cc.norm() > 1e-3
    # even version of the same combination brackets to zero with itself
    ceven = c0.add(c1)
    assert gen_bracket(ceven, ceven).norm() < 1e-14


def test_interior_tangent():
    a = MF.basis(1, 1, 0b001, 0b0001)
    xi = VectorField([1.0, 0.0, 0.0])
    assert interior_tangent(xi, a).get(0, 0b0001) == 1.0
    b = MF.basis(2, 0, 0b011, 0)
    xi3 = VectorField([0.0, 0.0, 1.0])
    assert interior_tangent(xi3, b).norm() == 0.0
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = rand_form(2, 1, rng)
        xi = VectorField(list(rng.normal(size=3)))
        twice = interior_tangent(xi, interior_tangent(xi, f))
        assert twice.norm() < 1e-14
    with pytest.raises(ValueError):
        interior_tangent(xi, MF.basis(0, 1, 0, 1))


def test_interior_internal_matches_minkowski():
    x = MF.basis(0, 1, 0, 0b0010)
    a = MF.basis(1, 2, 0b010, 0b0011)
    out = interior_internal(x, a)
    # iota_{u2}(u1^u2) = -u1, carried on the same dx factor
    assert abs(out.get(0b010, 0b0001) + 1.0) < 1e-15


def test_pair_internal_examples():
    b12 = MF.basis(0, 2, 0, 0b0011)
    b34 = MF.basis(0, 2, 0, 0b1100)
    assert pair_internal(b12, b12).get(0, 0) == 1.0
    assert pair_internal(b34, b34).get(0, 0) == -1.0
    assert pair_internal(b12, b34).norm() == 0.0


def test_trace_top_and_internal_rep():
    top = MF.basis(3, 4, 0b111, 0b1111)
    assert trace_top(top) == 1.0
    # internal rotation by the identity leaves forms alone
    mats = [np.eye(1), np.eye(4), np.eye(6), np.eye(4), np.eye(1)]
    f = rand_form(1, 2)
    assert apply_internal(f, mats).sub(f).norm() == 0.0
