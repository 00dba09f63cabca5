"""Finite Grassmann algebra with numeric or grid-valued coefficients.

Odd gauge parameters, spinor components and their products live in a real
Grassmann algebra over a small pool of anticommuting generators theta_0,
theta_1, ...  An element is stored as a dict mapping a generator bitmask to a
coefficient; the coefficient may be a python/numpy scalar or an ndarray of
values on a spatial grid.  Products of bitmask monomials pick up the usual
reordering sign, and the square of any odd monomial vanishes because masks
with common bits annihilate.

Everything downstream treats "payload" values uniformly: a payload is either
a plain number/ndarray (a body value) or a Grass element.  The helpers below
(gmul, gadd, ...) dispatch on that distinction so the form algebra never has
to care which case it is handling.
"""

import numpy as np

MAX_GENERATORS = 16


def merge_sign(b1: int, b2: int) -> int:
    """Sign of sorting theta^{b1} theta^{b2} into ascending order, 0 on overlap."""
    if b1 & b2:
        return 0
    sign = 1
    rest = b1
    while rest:
        low = rest & -rest
        # generators of b2 below this bit of b1 must be jumped over
        if (b2 & (low - 1)).bit_count() & 1:
            sign = -sign
        rest ^= low
    return sign


def _parity(mask: int) -> int:
    return mask.bit_count() & 1


class Grass:
    """Element of the Grassmann algebra: {bitmask: coefficient}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @classmethod
    def gen(cls, k: int, coeff=1.0):
        """coeff * theta_k"""
        return cls({1 << k: coeff})

    @classmethod
    def body(cls, coeff):
        return cls({0: coeff})

    def copy(self):
        return Grass(self.terms)

    @property
    def parity(self):
        """0, 1, or None for a mixed-parity element."""
        seen = {_parity(m) for m in self.terms}
        if not seen:
            return 0
        if len(seen) == 1:
            return seen.pop()
        return None

    def __repr__(self):
        return "Grass(%r)" % (self.terms,)


def is_grass(x) -> bool:
    return isinstance(x, Grass)


def gadd(a, b):
    if not is_grass(a) and not is_grass(b):
        return a + b
    ga = a if is_grass(a) else Grass.body(a)
    gb = b if is_grass(b) else Grass.body(b)
    out = dict(ga.terms)
    for m, c in gb.terms.items():
        out[m] = out[m] + c if m in out else c
    return Grass(out)


def gneg(a):
    if not is_grass(a):
        return -a
    return Grass({m: -c for m, c in a.terms.items()})


def gsub(a, b):
    return gadd(a, gneg(b))


def gmul(a, b, cross: int = 0):
    """Product a*b.

    cross is the form degree the coefficient b has to jump over before it
    reaches its own basis element (Koszul rule); each monomial of b of odd
    generator parity then contributes an extra (-1)^cross.
    """
    if not is_grass(a) and not is_grass(b):
        return a * b
    ga = a if is_grass(a) else Grass.body(a)
    gb = b if is_grass(b) else Grass.body(b)
    out = {}
    odd_cross = cross & 1
    for m1, c1 in ga.terms.items():
        for m2, c2 in gb.terms.items():
            s = merge_sign(m1, m2)
            if s == 0:
                continue
            if odd_cross and _parity(m2):
                s = -s
            m = m1 | m2
            v = s * (c1 * c2) if s != 1 else c1 * c2
            out[m] = out[m] + v if m in out else v
    return Grass(out)


def gscale(a, s):
    """Scale by an ordinary (body) number."""
    if not is_grass(a):
        return a * s
    return Grass({m: c * s for m, c in a.terms.items()})


def gparity_sign(a, m: int):
    """Multiply each monomial by (-1)^{m * parity(monomial)}.

    Used when an odd operator (d, iota, internal contraction) crosses the
    coefficient on its way to the form part.
    """
    if not (m & 1) or not is_grass(a):
        return a
    return Grass({k: (-c if _parity(k) else c) for k, c in a.terms.items()})


def gconj(a):
    """Complex conjugation with monomial reversal: (t1 t2)* = t2* t1*."""
    if not is_grass(a):
        return np.conj(a)
    out = {}
    for m, c in a.terms.items():
        k = m.bit_count()
        s = -1 if (k * (k - 1) // 2) & 1 else 1
        out[m] = s * np.conj(c)
    return Grass(out)


def gbody(a):
    if not is_grass(a):
        return a
    return a.terms.get(0, 0.0)


def gcoeff(a, mask: int):
    if not is_grass(a):
        return a if mask == 0 else 0.0
    return a.terms.get(mask, 0.0)


def gnorm(a) -> float:
    """Max absolute value over monomials (and grid points)."""
    if not is_grass(a):
        return float(np.max(np.abs(a))) if np.ndim(a) else abs(a)
    if not a.terms:
        return 0.0
    return max(float(np.max(np.abs(c))) for c in a.terms.values())


def gmean(a):
    """Mean over grid axes, monomial-wise; scalars pass through."""
    if not is_grass(a):
        return np.mean(a) if np.ndim(a) else a
    return Grass({m: (np.mean(c) if np.ndim(c) else c) for m, c in a.terms.items()})


def gmap(a, fn):
    """Apply fn to every raw coefficient (body or per monomial)."""
    if not is_grass(a):
        return fn(a)
    return Grass({m: fn(c) for m, c in a.terms.items()})


def gprune(a, tol: float = 0.0):
    if not is_grass(a):
        return a
    return Grass({m: c for m, c in a.terms.items() if gnorm(c) > tol})


def gmonomials(a):
    """Sorted list of generator masks carried by a payload."""
    if not is_grass(a):
        return [0]
    return sorted(a.terms)
