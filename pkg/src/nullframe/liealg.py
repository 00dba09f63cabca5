"""su(n) coefficients for the gauge coupling.

Gauge-field-valued objects are expanded over a fixed real basis {T_a} of
anti-hermitian traceless n x n matrices; everything bilinear the constraints
need reduces to the Gram matrix K_ab = Tr(T_a T_b) and the real structure
constants [T_a, T_b] = f_abc T_c.  The default is su(2) with T_a = -i
sigma_a / 2, so K = -1/2 * id and f_abc = epsilon_abc.
"""

import numpy as np

from .forms import MixedForm, gen_bracket, pair_internal, wedge


def su_basis(n: int):
    """Anti-hermitian traceless basis of su(n), shape (n^2-1, n, n)."""
    mats = []
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = 1.0
            m[k, j] = -1.0
            mats.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = 1j
            m[k, j] = 1j
            mats.append(m)
    for j in range(1, n):
        m = np.zeros((n, n), dtype=complex)
        for k in range(j):
            m[k, k] = 1j
        m[j, j] = -1j * j
        m /= np.sqrt(j * (j + 1) / 2.0)
        mats.append(m)
    return np.array(mats) / 2.0


class SuAlgebra:
    """Structure data of su(n) over a fixed basis."""

    def __init__(self, n: int = 2):
        self.n = n
        if n == 2:
            # T_a = -i sigma_a / 2
            sx = np.array([[0, 1], [1, 0]], dtype=complex)
            sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
            sz = np.array([[1, 0], [0, -1]], dtype=complex)
            self.basis = np.array([-0.5j * sx, -0.5j * sy, -0.5j * sz])
        else:
            self.basis = su_basis(n)
        self.dim = len(self.basis)
        self.gram = np.real(np.einsum("aij,bji->ab", self.basis, self.basis))
        # [T_a, T_b] = f_{abc} T_c, solved through the Gram matrix
        comm = np.einsum("aij,bjk->abik", self.basis, self.basis)
        comm = comm - np.transpose(comm, (1, 0, 2, 3))
        rhs = np.real(np.einsum("abik,cki->abc", comm, self.basis))
        self.f = np.einsum("abc,cd->abd", rhs, np.linalg.inv(self.gram))

    def __repr__(self):
        return "SuAlgebra(n=%d, dim=%d)" % (self.n, self.dim)


class LieForm:
    """su(n)-valued mixed form: one MixedForm per basis generator."""

    __slots__ = ("alg", "comps")

    def __init__(self, alg: SuAlgebra, comps):
        if len(comps) != alg.dim:
            raise ValueError("wrong number of Lie-algebra components")
        self.alg = alg
        self.comps = list(comps)

    @classmethod
    def zero(cls, alg, i, j, bw=0):
        return cls(alg, [MixedForm.zero(i, j, bw) for _ in range(alg.dim)])

    @property
    def i(self):
        return self.comps[0].i

    @property
    def j(self):
        return self.comps[0].j

    @property
    def bw(self):
        return max(c.bw for c in self.comps)

    def add(self, other):
        return LieForm(self.alg, [a.add(b) for a, b in zip(self.comps, other.comps)])

    def sub(self, other):
        return LieForm(self.alg, [a.sub(b) for a, b in zip(self.comps, other.comps)])

    def neg(self):
        return LieForm(self.alg, [a.neg() for a in self.comps])

    def scale(self, s):
        return LieForm(self.alg, [a.scale(s) for a in self.comps])

    def map(self, fn):
        return LieForm(self.alg, [fn(a) for a in self.comps])

    def norm(self):
        return max(a.norm() for a in self.comps)

    def wedge_plain(self, other: MixedForm, left: bool = False):
        """Wedge each component with a plain form (other on the right/left)."""
        if left:
            return LieForm(self.alg, [wedge(other, a) for a in self.comps])
        return LieForm(self.alg, [wedge(a, other) for a in self.comps])


def lie_bracket(a: LieForm, b: LieForm) -> LieForm:
    """su(n) commutator combined with the wedge of the form parts."""
    alg = a.alg
    out = None
    f = alg.f
    comps = [None] * alg.dim
    for c in range(alg.dim):
        acc = None
        for x in range(alg.dim):
            for y in range(alg.dim):
                w = f[x, y, c]
                if abs(w) < 1e-14:
                    continue
                t = wedge(a.comps[x], b.comps[y]).scale(w)
                acc = t if acc is None else acc.add(t)
        if acc is None:
            acc = MixedForm.zero(a.i + b.i, a.j + b.j)
        comps[c] = acc
    out = LieForm(alg, comps)
    return out


def gram_trace_wedge(a: LieForm, b: LieForm) -> MixedForm:
    """Tr(a ^ b) over su(n): K_ab-weighted wedge of components."""
    alg = a.alg
    acc = MixedForm.zero(a.i + b.i, a.j + b.j)
    for x in range(alg.dim):
        for y in range(alg.dim):
            w = alg.gram[x, y]
            if abs(w) < 1e-14:
                continue
            acc = acc.add(wedge(a.comps[x], b.comps[y]).scale(w))
    return acc


def gram_trace_pair(a: LieForm, b: LieForm) -> MixedForm:
    """Tr(a, b): Gram over su(n) combined with the internal eta pairing."""
    alg = a.alg
    acc = MixedForm.zero(a.i + b.i, 0)
    for x in range(alg.dim):
        for y in range(alg.dim):
            w = alg.gram[x, y]
            if abs(w) < 1e-14:
                continue
            acc = acc.add(pair_internal(a.comps[x], b.comps[y]).scale(w))
    return acc


def pair_lie(a: LieForm, b: MixedForm) -> LieForm:
    """Internal eta pairing of each su-component with a plain form."""
    return LieForm(a.alg, [pair_internal(c, b) for c in a.comps])


def bracket_plain(a: LieForm, b: MixedForm) -> LieForm:
    """Generalized internal bracket of each su-component with a plain form."""
    return LieForm(a.alg, [gen_bracket(c, b) for c in a.comps])
