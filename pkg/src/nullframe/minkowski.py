"""Exterior algebra over the internal Minkowski space V.

V is 4-dimensional with reference metric eta = diag(1,1,1,-1) (mostly-plus,
the timelike direction is the 4th basis vector u_4).  Multivectors in
Lambda^j V are stored over ascending-index basis monomials u_{i1}^..^u_{ik},
encoded as bitmasks; all signs flow from this single ordering convention.

The trace on Lambda^4 V is Tr[u_1^u_2^u_3^u_4] = +1 (the orientation choice),
and the bivector pairing is (u_a^u_b, u_c^u_d) = eta_ac eta_bd - eta_ad eta_bc.
"""

import itertools
import math

import numpy as np

from .grassmann import gadd, gmul, gneg, gnorm, gparity_sign, gscale

DIM_V = 4
ETA_DIAG = (1.0, 1.0, 1.0, -1.0)
ETA = np.diag(ETA_DIAG)
TOP_MASK = (1 << DIM_V) - 1


# ---------------------------------------------------------------------------
# bitmask combinatorics (shared by the internal and the spacetime factor)
# ---------------------------------------------------------------------------

def bits(mask: int):
    """Ascending list of set bit positions."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def subsets(n: int, k: int):
    """All k-subsets of range(n) as bitmasks, in lexicographic index order."""
    return [sum(1 << i for i in c) for c in itertools.combinations(range(n), k)]


def merge_bits(b1: int, b2: int):
    """(mask, sign) for concatenating two ascending monomials; sign 0 on overlap."""
    if b1 & b2:
        return 0, 0
    sign = 1
    rest = b2
    while rest:
        low = rest & -rest
        if (b1 & ~(low - 1) & ~low).bit_count() & 1:
            sign = -sign
        rest ^= low
    return b1 | b2, sign


def extract_sign(mask: int, p: int) -> int:
    """Sign for pulling index p to the front of the ascending monomial `mask`."""
    return -1 if (mask & ((1 << p) - 1)).bit_count() & 1 else 1


def eta_product(mask: int) -> float:
    """Product of eta_pp over the indices of mask."""
    out = 1.0
    for p in bits(mask):
        out *= ETA_DIAG[p]
    return out


def perm_sign(seq) -> int:
    """Sign of the permutation sorting seq ascending; 0 on repeats."""
    seq = list(seq)
    n = len(seq)
    if len(set(seq)) != n:
        return 0
    sign = 1
    for i in range(n):
        for j in range(i + 1, n):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# internal multivectors
# ---------------------------------------------------------------------------

class InternalMultivector:
    """Element of Lambda^j V: {bitmask: coefficient}.

    Coefficients may be real, complex, or Grassmann payloads.
    """

    __slots__ = ("j", "c")

    def __init__(self, j: int, coeffs=None):
        if not 0 <= j <= DIM_V:
            raise ValueError("internal degree out of range: %d" % j)
        self.j = j
        self.c = {}
        if coeffs:
            for m, v in coeffs.items():
                if m.bit_count() != j:
                    raise ValueError("mask %s has wrong degree for j=%d" % (bin(m), j))
                self.c[m] = v

    @classmethod
    def basis(cls, indices):
        """u_{i1}^...^u_{ik} for ascending indices (0-based)."""
        idx = list(indices)
        mask = 0
        for i in idx:
            mask |= 1 << i
        sign = perm_sign(idx)
        if sign == 0:
            return cls(len(idx))
        return cls(len(idx), {mask: float(sign)})

    @classmethod
    def vector(cls, comps):
        return cls(1, {1 << a: comps[a] for a in range(DIM_V) if gnorm(comps[a]) != 0.0})

    def get(self, mask: int):
        return self.c.get(mask, 0.0)

    def add(self, other):
        if other.j != self.j:
            raise ValueError("degree mismatch in add")
        out = dict(self.c)
        for m, v in other.c.items():
            out[m] = gadd(out[m], v) if m in out else v
        return InternalMultivector(self.j, out)

    def scale(self, s):
        return InternalMultivector(self.j, {m: gscale(v, s) for m, v in self.c.items()})

    def norm(self) -> float:
        return max((gnorm(v) for v in self.c.values()), default=0.0)

    def __repr__(self):
        return "InternalMultivector(j=%d, %r)" % (self.j, self.c)


def wedge_internal(a: InternalMultivector, b: InternalMultivector) -> InternalMultivector:
    """Graded product on Lambda V; rejects degree overflow."""
    j = a.j + b.j
    if j > DIM_V:
        raise ValueError("wedge degree overflow: %d + %d > %d" % (a.j, b.j, DIM_V))
    out = {}
    for m1, c1 in a.c.items():
        for m2, c2 in b.c.items():
            m, s = merge_bits(m1, m2)
            if s == 0:
                continue
            v = gmul(c1, c2, cross=a.j)
            if s < 0:
                v = gneg(v)
            out[m] = gadd(out[m], v) if m in out else v
    return InternalMultivector(j, out)


def contract_internal(a: InternalMultivector, x: InternalMultivector) -> InternalMultivector:
    """iota_X a: contraction on the first slot, the index lowered with eta.

    (iota_X a)^{i2..ik} = eta_{ab} X^a a^{b i2..ik}; requires deg(a) >= 1.
    """
    if a.j < 1:
        raise ValueError("cannot contract a 0-vector")
    if x.j != 1:
        raise ValueError("contraction direction must have degree 1")
    out = {}
    for p in range(DIM_V):
        xp = x.get(1 << p)
        if gnorm(xp) == 0.0:
            continue
        w = ETA_DIAG[p]
        for m, c in a.c.items():
            if not (m >> p) & 1:
                continue
            s = extract_sign(m, p) * w
            v = gmul(xp, gparity_sign(c, 1), cross=0)
            v = gscale(v, s)
            mm = m & ~(1 << p)
            out[mm] = gadd(out[mm], v) if mm in out else v
    return InternalMultivector(a.j - 1, out)


def pair_bivectors(a: InternalMultivector, b: InternalMultivector):
    """Canonical pairing on Lambda^2 V: (u_a^u_b, u_c^u_d) = eta_ac eta_bd - eta_ad eta_bc."""
    if a.j != 2 or b.j != 2:
        raise ValueError("pair_bivectors needs two bivectors")
    out = 0.0
    for m, ca in a.c.items():
        cb = b.c.get(m)
        if cb is None:
            continue
        out = gadd(out, gscale(gmul(ca, cb), eta_product(m)))
    return out


def trace_top(a: InternalMultivector):
    """Tr on Lambda^4 V: coefficient of u_1^u_2^u_3^u_4 (epsilon_{1234} = +1)."""
    if a.j != DIM_V:
        raise ValueError("trace_top needs a top-degree multivector")
    return a.get(TOP_MASK)


def dim_lambda(j: int) -> int:
    return math.comb(DIM_V, j)
