"""Clifford module: gamma relation, spin map, brackets, displayed identities."""

import numpy as np
import pytest

from nullframe.clifford import (
    GAMMA,
    SpinorForm,
    bilinear,
    bracket_cospinor,
    bracket_spinor,
    build_gamma,
    clifford_relation_residual,
    gamma_current,
    spin_matrix,
    verify_drho_quarter_bracket,
    verify_identity_A,
    verify_switch_bracket,
)
from nullframe.forms import MixedForm as MF, fiber_keys, gen_bracket, wedge
from nullframe.grassmann import Grass
from nullframe.minkowski import ETA_DIAG, subsets


def rand_form(i, j, rng, odd=False, gens=(0,)):
    out = MF.zero(i, j)
    for key in fiber_keys(i, j):
        if odd:
            out.c[key] = Grass({1 << g: rng.normal() for g in gens})
        else:
            out.c[key] = rng.normal()
    return out


def rand_spinor(rng, row=False, gens=(4,)):
    comps = [Grass({1 << g: rng.normal() + 1j * rng.normal() for g in gens})
             for _ in range(4)]
    return SpinorForm.plain(comps, row=row)


def test_clifford_relation_exact():
    assert clifford_relation_residual() == 0.0
    rep = build_gamma()
    # {g4, g4} = +2 id since eta^44 = -1
    acm = rep.gamma[3] @ rep.gamma[3] * 2
    assert np.max(np.abs(acm - 2 * np.eye(4))) == 0.0
    # trace(g^a g^b) = -4 eta^{ab}
    for a in range(4):
        for b in range(4):
            tr = np.trace(GAMMA[a] @ GAMMA[b])
            want = -4.0 * (ETA_DIAG[a] if a == b else 0.0)
            assert abs(tr - want) < 1e-14


def test_drho_quarter_bracket_exact():
    assert verify_drho_quarter_bracket() == 0.0
    # linearity: random bivector acts as the matching matrix
    rng = np.random.default_rng(0)
    biv = rand_form(0, 2, rng)
    m = spin_matrix(biv)
    psi = SpinorForm.plain([1.0, -2.0, 0.5, 1j])
    got = bracket_spinor(biv, psi)
    want = psi.matrix_apply(m)
    assert got.sub(want).norm() < 1e-13


def test_spin_connection_action():
    """[w, psi] = -1/4 w^{ab} g_a g_b psi for a (1,2) connection fiber."""
    rng = np.random.default_rng(1)
    w = rand_form(1, 2, rng)
    psi = rand_spinor(rng)
    got = bracket_spinor(w, psi)
    # oracle: per dx component, matrix -1/4 w^{ab}[g_a g_b] acting on psi
    from nullframe.clifford import GAMMA_LOWER
    for mu in range(3):
        m = np.zeros((4, 4), dtype=complex)
        for (s, mask), c in w.c.items():
            if s != 1 << mu:
                continue
            a, b = [p for p in range(4) if (mask >> p) & 1]
            m += complex(c) * (-0.25) * (GAMMA_LOWER[a] @ GAMMA_LOWER[b]
                                         - GAMMA_LOWER[b] @ GAMMA_LOWER[a])
        for r in range(4):
            comp = got.comps[r].get(1 << mu, 0)
            want = None
            for s in range(4):
                term = psi.comps[s].get(0, 0)
                if m[r, s] == 0.0:
                    continue
                scaled = Grass({k: m[r, s] * v for k, v in term.terms.items()})
                want = scaled if want is None else Grass(
                    {k: want.terms.get(k, 0) + scaled.terms.get(k, 0)
                     for k in set(want.terms) | set(scaled.terms)})
            if want is None:
                want = Grass({})
            diff = {k: (comp.terms.get(k, 0) if comp != 0 else 0) - want.terms.get(k, 0)
                    for k in set(getattr(comp, "terms", {})) | set(want.terms)}
            assert all(abs(v) < 1e-13 for v in diff.values())


def test_cospinor_bracket_conjugation():
    """d_w psibar = conj(d_w psi): [w, bar(psi)] = bar([w, psi]) for real even w."""
    rng = np.random.default_rng(2)
    w = rand_form(1, 2, rng)
    psi = rand_spinor(rng)
    lhs = bracket_cospinor(w, psi.bar())
    rhs = bracket_spinor(w, psi).bar()
    assert lhs.sub(rhs).norm() < 1e-13


def test_bracket_zero_and_degree_errors():
    psi = SpinorForm.plain([1.0, 0.0, 0.0, 0.0])
    chi = MF.zero(1, 2)
    assert bracket_spinor(chi, psi).norm() == 0.0
    with pytest.raises(ValueError):
        bracket_spinor(MF.basis(0, 1, 0, 1), psi)


def test_basis_bivector_bracket_example():
    """[e_a^e_b, psi] = -1/4 [g_a, g_b] psi (the eta-lowered double contraction)."""
    psi = SpinorForm.plain([1.0, 2.0, -1.0, 0.5])
    from nullframe.clifford import GAMMA_LOWER
    for mask in subsets(4, 2):
        a, b = [p for p in range(4) if (mask >> p) & 1]
        got = bracket_spinor(MF.basis(0, 2, 0, mask), psi)
        m = -0.25 * (GAMMA_LOWER[a] @ GAMMA_LOWER[b] - GAMMA_LOWER[b] @ GAMMA_LOWER[a])
        want = psi.matrix_apply(m)
        assert got.sub(want).norm() < 1e-14


def test_identity_A_lemma():
    """gamma iota iota A = (-1)^{|A|}(iota iota A gamma + 4(i-1)[gamma,A]),
    over >= 100 random inputs including Grassmann-odd ones."""
    rng = np.random.default_rng(3)
    count = 0
    worst = 0.0
    while count < 108:
        i = int(rng.integers(2, 5))
        k = int(rng.integers(0, 4))
        odd = bool(rng.integers(0, 2))
        a = rand_form(k, i, rng, odd=odd, gens=(int(rng.integers(0, 4)),))
        worst = max(worst, verify_identity_A(a))
        count += 1
    assert worst < 1e-12


def test_identity_A_zero_input():
    assert verify_identity_A(MF.zero(1, 2)) == 0.0


def _random_degenerate_frame(rng):
    """Random degenerate vielbein: internal null rotation + coordinate mix
    applied to the diagonal model; i*g keeps rank 2, e_n completes the basis."""
    from nullframe.forms import apply_internal
    from nullframe.minkowski import subsets
    e0 = MF(1, 1, {(0b001, 1): 1.0, (0b010, 2): 1.0, (0b100, 4): 1.0, (0b100, 8): -1.0})
    en0 = MF(0, 1, {(0, 4): 1.0, (0, 8): 1.0})
    # Lorentz transform built from an exact null rotation (nilpotent generator)
    b = np.zeros((4, 4))
    v = rng.normal(size=2)
    # generator of a null rotation in the (v, u3-u4) plane
    for k in range(2):
        b[k, 2] = v[k]; b[k, 3] = v[k]
        b[2, k] = v[k]; b[3, k] = -v[k]
    rot = np.eye(4) + b + b @ b / 2.0
    mats = [None] * 5
    for j in range(5):
        basis = subsets(4, j)
        m = np.zeros((len(basis), len(basis)), dtype=complex)
        for col, mask in enumerate(basis):
            vec = MF(0, j, {(0, mask): 1.0})
            out = vec
            # apply rot to each internal index by expanding through wedges
            comps = [p for p in range(4) if (mask >> p) & 1]
            acc = MF(0, 0, {(0, 0): 1.0})
            from nullframe.forms import wedge as wg
            for p in comps:
                leg = MF(0, 1, {(0, 1 << q): rot[q, p] for q in range(4) if rot[q, p] != 0.0})
                acc = wg(acc, leg)
            for row, mask2 in enumerate(basis):
                m[row, col] = acc.get(0, mask2)
        mats[j] = m
    e = apply_internal(e0, mats)
    en = apply_internal(en0, mats)
    return e, en


def test_switch_bracket_null_instance():
    """Switch lemma on its application family, >=100 random draws with odd data."""
    from nullframe.clifford import verify_switch_null_instance
    from nullframe.forms import to_vector, from_vector
    rng = np.random.default_rng(5)
    worst = 0.0
    count = 0
    while count < 102:
        e, en = _random_degenerate_frame(rng)
        keys = fiber_keys(1, 2)
        W = np.zeros((len(fiber_keys(2, 3)), len(keys)), dtype=complex)
        for k, key in enumerate(keys):
            W[:, k] = to_vector(wedge(e, MF(1, 2, {key: 1.0})))
        u, s, vt = np.linalg.svd(W)
        null = vt[np.sum(s > 1e-9 * s[0]):]
        for _ in range(6):
            coef = rng.normal(size=null.shape[0])
            beta = from_vector(1, 2, coef @ null.conj())
            if rng.integers(0, 2):
                beta = beta.mul_payload(Grass.gen(int(rng.integers(0, 3)), 1.0))
            psi = rand_spinor(rng, gens=(4,))
            psibar = rand_spinor(rng, row=True, gens=(5,))
            worst = max(worst, verify_switch_null_instance(e, en, beta, psi, psibar))
            count += 1
    assert worst < 1e-12


def test_switch_bracket_degree_guard():
    rng = np.random.default_rng(6)
    psi = rand_spinor(rng)
    psibar = rand_spinor(rng, row=True, gens=(5,))
    A = rand_form(0, 3, rng)
    B = rand_form(0, 3, rng)
    with pytest.raises(ValueError):
        verify_switch_bracket(A, B, psi, psibar)


def test_total_bracket_consistency():
    """[A, psibar gamma psi] relates to psibar gamma [A,psi] + [A,psibar] gamma psi.

    The displayed identity holds with the single ordering factor (-1)^{g_A}
    (moving psibar past an odd A):

        [A, J] = (-1)^{g_A} ( psibar gamma [A,psi] + [A,psibar] gamma psi ).
    """
    rng = np.random.default_rng(7)
    psi = rand_spinor(rng, gens=(4,))
    psibar = rand_spinor(rng, row=True, gens=(5,))
    J = gamma_current(psibar, psi)
    worst = 0.0
    for (k, i) in [(0, 2), (1, 2), (0, 3), (1, 3), (2, 2), (0, 4), (2, 3)]:
        for odd in (False, True):
            g = 1 if odd else 0
            A = rand_form(k, i, rng, odd=odd, gens=(2,))
            lhs = gen_bracket(A, J)
            rhs = bilinear(psibar, bracket_spinor(A, psi), insert_gamma=True)
            rhs = rhs.add(
                bilinear(bracket_cospinor(A, psibar), psi, insert_gamma=True))
            rhs = rhs.scale((-1.0) ** (g % 2))
            worst = max(worst, lhs.sub(rhs).norm())
    assert worst < 1e-12


def test_grassmann_saturation():
    """Products of more odd factors than generators vanish; parity multiplies."""
    rng = np.random.default_rng(8)
    from nullframe.grassmann import gmul, gnorm
    g = Grass.body(1.0)
    for k in range(7):
        g = gmul(g, Grass.gen(k % 6, rng.normal()))
    assert gnorm(g) == 0.0
