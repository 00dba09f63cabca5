"""Mixed forms: boundary i-forms valued in Lambda^j V.

A MixedForm of bidegree (i,j) stores coefficients over pairs (spacetime
subset, internal subset), both encoded as ascending-index bitmasks over
{dx^1,dx^2,dx^3} and {u_1..u_4}.  The algebra is the graded tensor product of
the two exterior algebras with the total degree governing all Koszul signs,
which is exactly what the graded symmetry

    alpha ^ beta = (-1)^{(i+j)(k+l)} beta ^ alpha

demands.  Coefficients may carry Grassmann generators (odd gauge parameters,
spinor bilinears); their parities enter every reordering sign monomial-wise.

The generalized bracket [ , ] : (i,j) x (k,l) -> (i+k, j+l-2) contracts one
internal index pair with eta and wedges everything else:

    [X, Y] = - sum_p eta_pp  del_p(X) ^ del_p(Y),

where del_p is first-slot contraction on the internal factor, acting as an
odd derivation of the whole algebra.  The overall normalization and sign are
pinned by two requirements: on (0,2)x(0,1) the bracket is the fundamental
so(3,1) action u_a^u_b . u_c = eta_bc u_a - eta_ac u_b, and on (0,2)x(0,2) it
matches the commutator of the corresponding so(3,1) matrices.  The same
normalization reproduces d_omega psi = d psi - 1/4 omega^{ab} gamma_a gamma_b
psi through the spin representation (see clifford.py).
"""

import numpy as np

from .grassmann import (
    Grass,
    gadd,
    gbody,
    gcoeff,
    gconj,
    gmap,
    gmonomials,
    gmul,
    gneg,
    gnorm,
    gparity_sign,
    gprune,
    gscale,
    is_grass,
)
from .minkowski import (
    DIM_V,
    ETA_DIAG,
    bits,
    eta_product,
    extract_sign,
    merge_bits,
    subsets,
)

DIM_S = 3  # boundary dimension
S_TOP = (1 << DIM_S) - 1
I_TOP = (1 << DIM_V) - 1


class MixedForm:
    """(i,j)-form fiber or field; coefficients keyed by (smask, imask)."""

    __slots__ = ("i", "j", "c", "bw")

    def __init__(self, i: int, j: int, coeffs=None, bw: int = 0):
        if not (0 <= i <= DIM_S and 0 <= j <= DIM_V):
            raise ValueError("bidegree out of range: (%d,%d)" % (i, j))
        self.i = i
        self.j = j
        self.bw = bw
        self.c = dict(coeffs) if coeffs else {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, i, j, bw=0):
        return cls(i, j, None, bw)

    @classmethod
    def basis(cls, i, j, smask, imask, coeff=1.0, bw=0):
        if smask.bit_count() != i or imask.bit_count() != j:
            raise ValueError("mask degrees do not match bidegree")
        return cls(i, j, {(smask, imask): coeff}, bw)

    @classmethod
    def from_internal(cls, iv, bw=0):
        """Wrap an InternalMultivector as a (0,j)-form."""
        return cls(0, iv.j, {(0, m): v for m, v in iv.c.items()}, bw)

    def copy(self):
        return MixedForm(self.i, self.j, self.c, self.bw)

    # -- linear structure ----------------------------------------------------

    def add(self, other):
        if (self.i, self.j) != (other.i, other.j):
            raise ValueError("bidegree mismatch in add")
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = gadd(out[k], v) if k in out else v
        return MixedForm(self.i, self.j, out, max(self.bw, other.bw))

    def sub(self, other):
        return self.add(other.neg())

    def neg(self):
        return MixedForm(self.i, self.j, {k: gneg(v) for k, v in self.c.items()}, self.bw)

    def scale(self, s):
        """Scale by an ordinary number."""
        return MixedForm(self.i, self.j, {k: gscale(v, s) for k, v in self.c.items()}, self.bw)

    def mul_payload(self, p, bw=0, cross=0):
        """Left multiplication by a scalar payload (possibly odd)."""
        out = {k: gmul(p, v, cross=cross) for k, v in self.c.items()}
        return MixedForm(self.i, self.j, out, self.bw + bw)

    def get(self, smask, imask):
        return self.c.get((smask, imask), 0.0)

    def norm(self) -> float:
        return max((gnorm(v) for v in self.c.values()), default=0.0)

    def prune(self, tol=0.0):
        out = {}
        for k, v in self.c.items():
            v = gprune(v, tol)
            if gnorm(v) > tol:
                out[k] = v
        return MixedForm(self.i, self.j, out, self.bw)

    @property
    def gparity(self):
        """Grassmann parity of the coefficients: 0, 1, or None if mixed."""
        seen = set()
        for v in self.c.values():
            if is_grass(v):
                p = v.parity
                if p is None:
                    return None
                seen.add(p)
            else:
                seen.add(0)
        if not seen:
            return 0
        if len(seen) > 1:
            return None
        return seen.pop()

    def parity_part(self, p: int):
        """Restrict coefficients to Grassmann parity p."""
        out = {}
        for k, v in self.c.items():
            if is_grass(v):
                terms = {m: c for m, c in v.terms.items() if (m.bit_count() & 1) == p}
                if terms:
                    out[k] = Grass(terms)
            elif p == 0:
                out[k] = v
        return MixedForm(self.i, self.j, out, self.bw)

    def map_coeffs(self, fn):
        return MixedForm(self.i, self.j, {k: gmap(v, fn) for k, v in self.c.items()}, self.bw)

    def conj(self):
        return MixedForm(self.i, self.j, {k: gconj(v) for k, v in self.c.items()}, self.bw)

    def __repr__(self):
        return "MixedForm(%d,%d; %d terms)" % (self.i, self.j, len(self.c))


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def wedge(a: MixedForm, b: MixedForm) -> MixedForm:
    """Graded product; rejects bidegree overflow."""
    i, j = a.i + b.i, a.j + b.j
    if i > DIM_S or j > DIM_V:
        raise ValueError("wedge overflow: (%d,%d)^(%d,%d)" % (a.i, a.j, b.i, b.j))
    koszul = -1 if (a.j * b.i) & 1 else 1
    cross = (a.i + a.j) & 1
    out = {}
    for (s1, m1), c1 in a.c.items():
        for (s2, m2), c2 in b.c.items():
            s, ssgn = merge_bits(s1, s2)
            if ssgn == 0:
                continue
            m, msgn = merge_bits(m1, m2)
            if msgn == 0:
                continue
            sgn = koszul * ssgn * msgn
            v = gmul(c1, c2, cross=cross)
            if sgn < 0:
                v = gneg(v)
            key = (s, m)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(i, j, out, a.bw + b.bw)


def wedge_many(*forms) -> MixedForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def wedge_power(a: MixedForm, k: int) -> MixedForm:
    out = a
    for _ in range(k - 1):
        out = wedge(out, a)
    return out


def internal_del(a: MixedForm, p: int) -> MixedForm:
    """First-slot internal contraction del_p (no metric, no crossing signs)."""
    if a.j < 1:
        raise ValueError("internal degree 0 cannot be contracted")
    out = {}
    pbit = 1 << p
    for (s, m), c in a.c.items():
        if not m & pbit:
            continue
        v = c if extract_sign(m, p) > 0 else gneg(c)
        key = (s, m & ~pbit)
        out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(a.i, a.j - 1, out, a.bw)


def gen_bracket(a: MixedForm, b: MixedForm) -> MixedForm:
    """Generalized Lie bracket: one eta contraction, wedge on the rest.

    Per coefficient pair and contracted index p the term sign is

        - eta_pp * ext(m1,p) * ext(m2,p) * merge(s1,s2) * merge(m1',m2'),

    i.e. the spacetime and internal index groups are shuffled independently
    (the permutation-sum structure of the definition), with no interleaving
    factor between the groups.  This is the unique extension of the internal
    bracket (so(3,1) commutator on bivectors, fundamental action on vectors)
    for which [omega, .] is an odd derivation and [w,[w,a]] = 1/2 [[w,w],a],
    so that d_omega^2 = [F_omega, .] holds.

    Grassmann coefficients cross the internal degree of the first factor
    only (spacetime factors are ghost-inert in the bracket), so that the
    polarization identity [w, Y] + [Y, w] = 2[w, Y] holds for odd Y against
    an even connection, as the curvature variation requires.  On top of
    that the whole bracket carries the Clifford-parity Koszul factor

        (-1)^{(j1+g1)(j2+g2)}

    (internal degree plus ghost parity per slot).  It is invisible on the
    so(3,1)-valued slots that drive d_omega and the gauge algebra, and it is
    forced on the odd slots by the displayed gamma identity
    gamma iota iota A = (-1)^{|A|}(iota iota A gamma + 4(i-1)[gamma, A]).
    """
    if a.j < 1 or b.j < 1:
        raise ValueError("gen_bracket needs internal degree >= 1 on both sides")
    g1, g2 = a.gparity, b.gparity
    if g1 is None or g2 is None:
        ae, ao = a.parity_part(0), a.parity_part(1)
        be, bo = b.parity_part(0), b.parity_part(1)
        out = gen_bracket(ae, be)
        for x, y in ((ae, bo), (ao, be), (ao, bo)):
            out = out.add(gen_bracket(x, y))
        return out
    i, j = a.i + b.i, a.j + b.j - 2
    if i > DIM_S or j > DIM_V:
        raise ValueError("gen_bracket overflow")
    cross = a.j & 1
    twist = -1.0 if ((a.j + g1) * (b.j + g2)) & 1 else 1.0
    acc = {}
    for (s1, m1), c1 in a.c.items():
        for (s2, m2), c2 in b.c.items():
            both = m1 & m2
            if not both:
                continue
            s, ssgn = merge_bits(s1, s2)
            if ssgn == 0:
                continue
            v0 = gmul(c1, c2, cross=cross)
            for p in bits(both):
                if ETA_DIAG[p] == 0.0:
                    continue
                pbit = 1 << p
                mm, msgn = merge_bits(m1 & ~pbit, m2 & ~pbit)
                if msgn == 0:
                    continue
                sgn = -twist * ETA_DIAG[p] * extract_sign(m1, p) * extract_sign(m2, p) * ssgn * msgn
                key = (s, mm)
                v = gscale(v0, sgn)
                acc[key] = gadd(acc[key], v) if key in acc else v
    return MixedForm(i, j, acc, a.bw + b.bw)


def null_bracket(a: MixedForm, b: MixedForm) -> MixedForm:
    """Single-contraction bracket with flat (delta) index weights.

    The diagonal-model identities of the appendix (e_n [tau, e] = 0 and
    e_n [tau, e] = tau [e_n, ehat]) hold with this slot contraction; the
    curvature/so(3,1) sector always uses gen_bracket.  Used only for those
    reported diagnostics.
    """
    if a.j < 1 or b.j < 1:
        raise ValueError("null_bracket needs internal degree >= 1 on both sides")
    i, j = a.i + b.i, a.j + b.j - 2
    if i > DIM_S or j > DIM_V:
        raise ValueError("null_bracket overflow")
    cross = (a.i + a.j) & 1
    acc = {}
    for (s1, m1), c1 in a.c.items():
        for (s2, m2), c2 in b.c.items():
            both = m1 & m2
            if not both:
                continue
            s, ssgn = merge_bits(s1, s2)
            if ssgn == 0:
                continue
            v0 = gmul(c1, c2, cross=cross)
            for p in bits(both):
                pbit = 1 << p
                mm, msgn = merge_bits(m1 & ~pbit, m2 & ~pbit)
                if msgn == 0:
                    continue
                sgn = -extract_sign(m1, p) * extract_sign(m2, p) * ssgn * msgn
                key = (s, mm)
                v = gscale(v0, sgn)
                acc[key] = gadd(acc[key], v) if key in acc else v
    return MixedForm(i, j, acc, a.bw + b.bw)


def interior_tangent(xi, a: MixedForm, strict: bool = True) -> MixedForm:
    """iota_xi on the spacetime factor; xi has payload components xi[0..2].

    Spacetime-ghost-inert: the contraction does not cross Grassmann parity
    (matching the exterior derivative's convention).
    """
    if a.i < 1:
        if strict:
            raise ValueError("spacetime degree 0 cannot be contracted")
        return MixedForm.zero(0, a.j, a.bw)
    comps = xi.comps if hasattr(xi, "comps") else xi
    xbw = getattr(xi, "bw", 0)
    out = {}
    for (s, m), c in a.c.items():
        cc = c  # ghost-inert spacetime contraction
        for mu in bits(s):
            xmu = comps[mu]
            if gnorm(xmu) == 0.0:
                continue
            sgn = extract_sign(s, mu)
            v = gmul(xmu, cc, cross=0)
            if sgn < 0:
                v = gneg(v)
            key = (s & ~(1 << mu), m)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(a.i - 1, a.j, out, a.bw + xbw)


def interior_internal(x: MixedForm, a: MixedForm) -> MixedForm:
    """iota_X on the internal factor: first-slot contraction with eta-lowered X.

    Delegates to the fiber contraction per spacetime coefficient; the
    operator crosses the coefficient with (-1)^{|c|} like its fiber version.
    """
    if x.i != 0 or x.j != 1:
        raise ValueError("internal contraction direction must be a (0,1)-form")
    if a.j < 1:
        raise ValueError("internal degree 0 cannot be contracted")
    out = {}
    for p in range(DIM_V):
        xp = x.get(0, 1 << p)
        if gnorm(xp) == 0.0:
            continue
        w = ETA_DIAG[p]
        pbit = 1 << p
        for (s, m), c in a.c.items():
            if not m & pbit:
                continue
            sgn = extract_sign(m, p) * w
            v = gmul(xp, gparity_sign(c, 1), cross=0)
            v = gscale(v, sgn)
            key = (s, m & ~pbit)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(a.i, a.j - 1, out, a.bw + x.bw)


def pair_internal(a: MixedForm, b: MixedForm) -> MixedForm:
    """Full eta-contraction of the internal factors (equal internal degree).

    ( , ) on Lambda^j extends the canonical bivector pairing; the spacetime
    factors are wedged.  Used for (e^2, B), (e, Pi), (Pi, Pi) and friends.
    """
    if a.j != b.j:
        raise ValueError("pair_internal needs matching internal degrees")
    i = a.i + b.i
    if i > DIM_S:
        raise ValueError("pair_internal spacetime overflow")
    cross = (a.i + a.j) & 1
    out = {}
    for (s1, m1), c1 in a.c.items():
        for (s2, m2), c2 in b.c.items():
            if m1 != m2:
                continue
            s, ssgn = merge_bits(s1, s2)
            if ssgn == 0:
                continue
            v = gmul(c1, c2, cross=cross)
            v = gscale(v, ssgn * eta_product(m1))
            key = (s, 0)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(i, 0, out, a.bw + b.bw)


def trace_top(a: MixedForm):
    """Coefficient of dx^123 (x) u^1234; requires bidegree (3,4)."""
    if (a.i, a.j) != (DIM_S, DIM_V):
        raise ValueError("trace_top needs bidegree (3,4)")
    return a.get(S_TOP, I_TOP)


def apply_internal(a: MixedForm, mats) -> MixedForm:
    """Apply a linear map on the internal factor, given matrices per degree.

    mats[j] is the representation matrix on Lambda^j V in the ascending mask
    basis (numeric entries; payload coefficients pass through linearly).
    """
    mat = mats[a.j]
    basis_masks = subsets(DIM_V, a.j)
    index = {m: k for k, m in enumerate(basis_masks)}
    out = {}
    for (s, m), c in a.c.items():
        col = index[m]
        for row, mm in enumerate(basis_masks):
            t = mat[row, col]
            if t == 0.0:
                continue
            key = (s, mm)
            v = gscale(c, t)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(a.i, a.j, out, a.bw)


# ---------------------------------------------------------------------------
# fiber <-> vector
# ---------------------------------------------------------------------------

_FIBER_CACHE = {}


def fiber_keys(i: int, j: int):
    """Canonical ordered coefficient keys of the (i,j) fiber."""
    try:
        return _FIBER_CACHE[(i, j)]
    except KeyError:
        keys = [(s, m) for s in subsets(DIM_S, i) for m in subsets(DIM_V, j)]
        _FIBER_CACHE[(i, j)] = keys
        return keys


def fiber_dim(i: int, j: int) -> int:
    return len(fiber_keys(i, j))


def to_vector(a: MixedForm) -> np.ndarray:
    """Numeric fiber coefficients as a complex vector (body values only)."""
    keys = fiber_keys(a.i, a.j)
    out = np.zeros(len(keys), dtype=complex)
    for k, key in enumerate(keys):
        v = a.c.get(key, 0.0)
        out[k] = gbody(v) if is_grass(v) else v
    return out


def from_vector(i: int, j: int, vec, bw: int = 0) -> MixedForm:
    keys = fiber_keys(i, j)
    return MixedForm(i, j, {keys[k]: vec[k] for k in range(len(keys)) if vec[k] != 0.0}, bw)


def coeff_payloads(a: MixedForm):
    """Fiber coefficients as a list of payloads in canonical key order."""
    keys = fiber_keys(a.i, a.j)
    return [a.c.get(key, 0.0) for key in keys]


def from_payloads(i: int, j: int, payloads, bw: int = 0) -> MixedForm:
    keys = fiber_keys(i, j)
    out = {}
    for k, key in enumerate(keys):
        if gnorm(payloads[k]) != 0.0:
            out[key] = payloads[k]
    return MixedForm(i, j, out, bw)


def grass_coefficient(a: MixedForm, mask: int) -> MixedForm:
    """Extract the coefficient form of a Grassmann monomial theta^mask."""
    out = {}
    for k, v in a.c.items():
        w = gcoeff(v, mask)
        if gnorm(w) != 0.0:
            out[k] = w
    return MixedForm(a.i, a.j, out, a.bw)


def grass_monomials(a: MixedForm):
    masks = set()
    for v in a.c.values():
        masks.update(gmonomials(v))
    return sorted(masks)


# ---------------------------------------------------------------------------
# tangent vector fields on the boundary patch (fiber-level container)
# ---------------------------------------------------------------------------

class VectorField:
    """Tangent field xi = xi^mu d_mu with payload components."""

    __slots__ = ("comps", "bw", "parity")

    def __init__(self, comps, bw: int = 0, parity: int = 0):
        self.comps = tuple(comps)
        self.bw = bw
        self.parity = parity

    def scale(self, s):
        return VectorField([gscale(v, s) for v in self.comps], self.bw, self.parity)

    def add(self, other):
        return VectorField(
            [gadd(a, b) for a, b in zip(self.comps, other.comps)],
            max(self.bw, other.bw),
            self.parity if self.parity == other.parity else None,
        )

    def norm(self):
        return max(gnorm(v) for v in self.comps)
