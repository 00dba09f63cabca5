"""Vielbein-induced linear operators on mixed-form fibers.

The wedge maps W_k = e^k ^ . , the bracket maps rho = [e, .] and the
degenerate-sector map whose kernel cuts out S, together with their kernels,
images, orthogonal projectors (w.r.t. the identity metric on canonical fiber
coefficients) and the subspaces T, S, K, W of the boundary reduction.

Everything here is plain dense linear algebra on fibers of dimension <= 18;
rank decisions use a relative singular-value threshold (default 1e-9).
"""

import numpy as np

from .forms import (
    MixedForm,
    fiber_dim,
    fiber_keys,
    from_vector,
    gen_bracket,
    pair_internal,
    to_vector,
    wedge,
    wedge_power,
)
from .minkowski import DIM_V, ETA_DIAG, subsets

RANK_TOL = 1e-9


# ---------------------------------------------------------------------------
# dense services
# ---------------------------------------------------------------------------

def svd_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def rref_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    """Independent rank oracle: Gaussian elimination with partial pivoting."""
    a = np.array(m, dtype=complex)
    if a.size == 0:
        return 0
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        pivot = rank + np.argmax(np.abs(a[rank:, col]))
        if abs(a[pivot, col]) <= tol * scale:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = a[rank] / a[rank, col]
        for r in range(rows):
            if r != rank and a[r, col] != 0.0:
                a[r] = a[r] - a[r, col] * a[rank]
        rank += 1
    return rank


def _canonicalize(basis: np.ndarray) -> np.ndarray:
    """Deterministic orientation: largest-|entry| component made real positive."""
    out = []
    for v in basis:
        k = int(np.argmax(np.abs(v)))
        piv = v[k]
        if abs(piv) > 0:
            v = v * (abs(piv) / piv)
        out.append(v)
    return np.array(out) if out else basis


def kernel_vectors(m: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal kernel basis as rows, deterministically oriented."""
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=complex)
    u, s, vt = np.linalg.svd(m)
    rank = int(np.sum(s > tol * (s[0] if s.size and s[0] > 0 else 1.0)))
    null = vt[rank:].conj()
    return _canonicalize(null)


def image_vectors(m: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal column-space basis as rows of the transpose (codomain vectors)."""
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > tol * (s[0] if s.size and s[0] > 0 else 1.0)))
    return _canonicalize(u[:, :rank].T)


def projector_from_rows(rows: np.ndarray, dim: int) -> np.ndarray:
    if rows.size == 0:
        return np.zeros((dim, dim), dtype=complex)
    b = rows.T
    return b @ b.conj().T


# perturbation formulas for orthogonal projectors (constant rank)

def d_projector_ker(m, dm, pinv_m, p_ker):
    """Directional derivative of the orthoprojector onto Ker(m)."""
    t = pinv_m @ dm @ p_ker
    return -(t + t.conj().T)


def d_projector_im(m, dm, pinv_m, q_im):
    """Directional derivative of the orthoprojector onto Im(m)."""
    n = np.eye(q_im.shape[0], dtype=complex) - q_im
    t = n @ dm @ pinv_m
    return t + t.conj().T


# ---------------------------------------------------------------------------
# operator and subspace containers
# ---------------------------------------------------------------------------

class OperatorMatrix:
    """Dense matrix of a linear map between mixed-form fibers."""

    __slots__ = ("dom", "cod", "m", "_svd", "tol")

    def __init__(self, dom, cod, m, tol=RANK_TOL):
        self.dom = dom
        self.cod = cod
        self.m = np.asarray(m, dtype=complex)
        self.tol = tol
        self._svd = None
        expect = (fiber_dim(*cod), fiber_dim(*dom))
        if self.m.shape != expect:
            raise ValueError("operator shape %s != %s" % (self.m.shape, expect))

    def svd(self):
        if self._svd is None:
            self._svd = np.linalg.svd(self.m)
        return self._svd

    @property
    def rank(self):
        u, s, vt = self.svd()
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.sum(s > self.tol * s[0]))

    @property
    def kernel_dim(self):
        return self.m.shape[1] - self.rank

    def is_injective(self):
        return self.kernel_dim == 0

    def is_surjective(self):
        return self.rank == self.m.shape[0]

    def pinv(self):
        u, s, vt = self.svd()
        cut = self.tol * (s[0] if s.size and s[0] > 0 else 1.0)
        sinv = np.array([1.0 / x if x > cut else 0.0 for x in s])
        k = len(s)
        return (vt[:k].conj().T * sinv) @ u[:, :k].conj().T

    def apply(self, form: MixedForm) -> MixedForm:
        return from_vector(*self.cod, self.m @ to_vector(form))


class Subspace:
    """Orthonormal-basis subspace of a mixed-form fiber."""

    __slots__ = ("bidegree", "basis")

    def __init__(self, bidegree, basis_rows):
        self.bidegree = tuple(bidegree)
        self.basis = np.asarray(basis_rows, dtype=complex).reshape(-1, fiber_dim(*bidegree))

    @property
    def dim(self):
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return projector_from_rows(self.basis, fiber_dim(*self.bidegree))

    def project(self, form: MixedForm) -> MixedForm:
        return from_vector(*self.bidegree, self.projector() @ to_vector(form))

    def forms(self):
        return [from_vector(*self.bidegree, row) for row in self.basis]

    def contains(self, form: MixedForm, tol=1e-10) -> bool:
        v = to_vector(form)
        n = np.linalg.norm(v)
        if n == 0.0:
            return True
        return np.linalg.norm(v - self.projector() @ v) <= tol * max(1.0, n)


def operator_matrix(fn, dom, cod, tol=RANK_TOL) -> OperatorMatrix:
    """Assemble the dense matrix of a fiber map given as a callable."""
    keys = fiber_keys(*dom)
    m = np.zeros((fiber_dim(*cod), len(keys)), dtype=complex)
    for k, key in enumerate(keys):
        out = fn(MixedForm(dom[0], dom[1], {key: 1.0}))
        m[:, k] = to_vector(out)
    return OperatorMatrix(dom, cod, m, tol)


def kernel_basis(op: OperatorMatrix) -> Subspace:
    return Subspace(op.dom, kernel_vectors(op.m, op.tol))


def image_basis(op: OperatorMatrix) -> Subspace:
    return Subspace(op.cod, image_vectors(op.m, op.tol))


def image_intersection_dim(a: OperatorMatrix, b: OperatorMatrix, tol=RANK_TOL) -> int:
    """dim(Im a  intersect  Im b), both sitting in the same codomain fiber."""
    ia = image_vectors(a.m, tol)
    ib = image_vectors(b.m, tol)
    if ia.size == 0 or ib.size == 0:
        return 0
    stacked = np.vstack([ia, ib])
    return ia.shape[0] + ib.shape[0] - svd_rank(stacked, tol)


# ---------------------------------------------------------------------------
# vielbeins
# ---------------------------------------------------------------------------

def spacetime_rep(mat3: np.ndarray, i: int) -> np.ndarray:
    """Matrix of the induced map on Lambda^i of the dx coefficients.

    A tangent-basis change w' = w . mix acts on form coefficients by mix^T;
    this is its wedge power in the ascending-mask basis.
    """
    from .minkowski import merge_bits as _mb, subsets as _subs
    basis = _subs(3, i)
    a = mat3.T
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, mask in enumerate(basis):
        idx = [p for p in range(3) if (mask >> p) & 1]
        acc = {0: 1.0}
        for p in idx:
            new = {}
            for mask0, c0 in acc.items():
                for q in range(3):
                    w = a[q, p]
                    if w == 0.0 or (mask0 >> q) & 1:
                        continue
                    mm, sgn = _mb(mask0, 1 << q)
                    new[mm] = new.get(mm, 0.0) + sgn * c0 * w
            acc = new
        for row, rmask in enumerate(basis):
            if rmask in acc:
                m[row, col] = acc[rmask]
    return m


class FiberTransport:
    """Fiber representation of a (Lorentz, coordinate-mix) frame transport."""

    def __init__(self, rot: np.ndarray, mix: np.ndarray):
        self.rot = np.asarray(rot, dtype=complex)
        self.mix = np.asarray(mix, dtype=complex)
        self._internal = internal_rep_matrices(self.rot)
        self._space = [spacetime_rep(self.mix, i) for i in range(4)]
        self._cache = {}

    def rep(self, bidegree) -> np.ndarray:
        key = tuple(bidegree)
        m = self._cache.get(key)
        if m is None:
            i, j = key
            m = np.kron(self._space[i], self._internal[j])
            self._cache[key] = m
        return m

    def rep_inv(self, bidegree) -> np.ndarray:
        key = ("inv",) + tuple(bidegree)
        m = self._cache.get(key)
        if m is None:
            m = np.linalg.inv(self.rep(bidegree))
            self._cache[key] = m
        return m

    def push(self, f: MixedForm) -> MixedForm:
        from .forms import coeff_payloads, from_payloads
        return _apply_fiber_matrix(self.rep((f.i, f.j)), f)

    def pull(self, f: MixedForm) -> MixedForm:
        return _apply_fiber_matrix(self.rep_inv((f.i, f.j)), f)


def _apply_fiber_matrix(m: np.ndarray, f: MixedForm) -> MixedForm:
    from .forms import coeff_payloads, from_payloads
    from .grassmann import gadd, gscale
    pls = coeff_payloads(f)
    out = []
    for r in range(m.shape[0]):
        acc = 0.0
        for c in range(m.shape[1]):
            if m[r, c] != 0.0:
                acc = gadd(acc, gscale(pls[c], m[r, c]))
        out.append(acc)
    return from_payloads(f.i, f.j, out, f.bw)


class Vielbein:
    """Boundary coframe fiber: e in the (1,1) fiber plus the completion e_n.

    Carries the induced boundary metric g_{mu nu} = (e_mu, e_nu)_eta, the
    degeneracy data (kernel direction of i*g, adapted tangent frame with the
    third leg spanning the kernel), and the split e = e^ + e~ into the
    non-degenerate and degenerate parts.  Degenerate vielbeins built as
    frame transports of the diagonal model carry the transport, which fixes
    the auxiliary Riemannian structure used by the projectors (transported
    identity metric).
    """

    def __init__(self, e: MixedForm, e_n: MixedForm, tol=RANK_TOL, transport=None):
        self.transport = transport
        if (e.i, e.j) != (1, 1) or (e_n.i, e_n.j) != (0, 1):
            raise ValueError("vielbein needs e in (1,1) and e_n in (0,1)")
        self.e = e
        self.e_n = e_n
        self.tol = tol
        # legs as internal vectors: E[a, mu] = e^a_mu
        self.legs = np.zeros((DIM_V, 3), dtype=complex)
        for (s, m), c in e.c.items():
            mu = s.bit_length() - 1
            a = m.bit_length() - 1
            self.legs[a, mu] = c
        self.n_comp = np.zeros(DIM_V, dtype=complex)
        for (s, m), c in e_n.c.items():
            self.n_comp[m.bit_length() - 1] = c
        eta = np.array(ETA_DIAG)
        self.g = np.real(self.legs.T @ np.diag(eta) @ self.legs)
        basis_mat = np.column_stack([self.legs, self.n_comp])
        self.basis_det = complex(np.linalg.det(basis_mat))
        if abs(self.basis_det) < 1e-12:
            raise ValueError("{e(v_1),e(v_2),e(v_3),e_n} does not span V")
        self.frame_inv = np.linalg.inv(basis_mat)
        # degeneracy of the induced metric
        w, v = np.linalg.eigh(self.g)
        small = np.abs(w) <= self.tol * max(1.0, np.max(np.abs(w)))
        self.degenerate = bool(np.any(small))
        if np.sum(small) > 1:
            raise ValueError("induced metric rank < 2 is out of scope")
        if self.degenerate:
            w3 = v[:, int(np.argmax(small))]
            k = int(np.argmax(np.abs(w3)))
            w3 = w3 * (abs(w3[k]) / w3[k])
            others = [v[:, i] for i in range(3) if not small[i]]
            self.frame = np.column_stack(others + [w3])
        else:
            self.frame = np.eye(3)
        # degenerate part: e composed with the euclidean projector onto ker(i*g)
        if self.degenerate:
            w3 = self.frame[:, 2]
            pk = np.outer(w3, w3.conj()) / np.vdot(w3, w3).real
            tilde_legs = self.legs @ pk
        else:
            tilde_legs = np.zeros_like(self.legs)
        self.etilde = self._legs_to_form(tilde_legs)
        self.ehat = e.sub(self.etilde)

    @staticmethod
    def _legs_to_form(legs) -> MixedForm:
        out = MixedForm.zero(1, 1)
        for mu in range(3):
            for a in range(DIM_V):
                v = legs[a, mu]
                if v != 0.0:
                    out.c[(1 << mu, 1 << a)] = v
        return out

    @property
    def adapted_legs(self):
        """Internal frame vectors e_a = e(w_a) in the adapted tangent basis."""
        return self.legs @ self.frame

    def frame_components(self, x: MixedForm):
        """Components of a (0,1) fiber in the basis {e_1,e_2,e_3,e_n}."""
        vec = np.zeros(DIM_V, dtype=object)
        comps = [x.get(0, 1 << a) for a in range(DIM_V)]
        basis = np.column_stack([self.adapted_legs, self.n_comp])
        inv = np.linalg.inv(basis)
        from .grassmann import gadd, gscale
        out = []
        for r in range(DIM_V):
            acc = 0.0
            for a in range(DIM_V):
                if inv[r, a] != 0.0:
                    acc = gadd(acc, gscale(comps[a], inv[r, a]))
            out.append(acc)
        return out  # [c1, c2, c3, cn]


def diagonal_degenerate_vielbein() -> Vielbein:
    """The diagonal model: e_1 = u_1, e_2 = u_2, e_+ = u_3 - u_4, e_n = u_3 + u_4."""
    e = MixedForm(1, 1, {(0b001, 0b0001): 1.0, (0b010, 0b0010): 1.0,
                         (0b100, 0b0100): 1.0, (0b100, 0b1000): -1.0})
    en = MixedForm(0, 1, {(0, 0b0100): 1.0, (0, 0b1000): 1.0})
    return Vielbein(e, en, transport=FiberTransport(np.eye(4), np.eye(3)))


def lorentz_from_so_params(rng, scale=0.4) -> np.ndarray:
    """Random SO(3,1) matrix from elementary rotations and boosts (exact)."""
    m = np.eye(4)
    for (a, b) in ((0, 1), (0, 2), (1, 2)):
        th = scale * rng.normal()
        r = np.eye(4)
        r[a, a] = r[b, b] = np.cos(th)
        r[a, b] = -np.sin(th)
        r[b, a] = np.sin(th)
        m = m @ r
    for a in range(3):
        ch = scale * rng.normal()
        r = np.eye(4)
        r[a, a] = r[3, 3] = np.cosh(ch)
        r[a, 3] = r[3, a] = np.sinh(ch)
        m = m @ r
    return m


def internal_rep_matrices(rot: np.ndarray):
    """Matrices of a V-map on every Lambda^j V in the ascending-mask basis."""
    mats = []
    for j in range(DIM_V + 1):
        basis = subsets(DIM_V, j)
        m = np.zeros((len(basis), len(basis)), dtype=complex)
        for col, mask in enumerate(basis):
            acc = MixedForm(0, 0, {(0, 0): 1.0})
            for p in [q for q in range(DIM_V) if (mask >> q) & 1]:
                leg = MixedForm(0, 1, {(0, 1 << q): rot[q, p]
                                       for q in range(DIM_V) if rot[q, p] != 0.0})
                acc = wedge(acc, leg)
            for row, mask2 in enumerate(basis):
                m[row, col] = acc.get(0, mask2)
        mats.append(m)
    return mats


def random_nondegenerate_vielbein(rng) -> Vielbein:
    legs = np.eye(4)[:, :3] + 0.3 * rng.normal(size=(4, 3))
    e = Vielbein._legs_to_form(legs)
    en = MixedForm(0, 1, {(0, 0b1000): 1.0})
    vb = Vielbein(e, en)
    if vb.degenerate:
        return random_nondegenerate_vielbein(rng)
    return vb


def random_degenerate_vielbein(rng, mix_scale=0.3) -> Vielbein:
    """Lorentz transform + coordinate mix of the diagonal model (i*g keeps rank 2)."""
    rot = lorentz_from_so_params(rng)
    mix = np.eye(3) + mix_scale * rng.normal(size=(3, 3))
    if abs(np.linalg.det(mix)) < 0.2:
        return random_degenerate_vielbein(rng, mix_scale)
    base = diagonal_degenerate_vielbein()
    legs = rot @ base.legs @ mix
    n = rot @ base.n_comp
    e = Vielbein._legs_to_form(legs)
    en = MixedForm(0, 1, {(0, 1 << a): n[a] for a in range(DIM_V) if n[a] != 0.0})
    return Vielbein(e, en, transport=FiberTransport(rot, mix))


# ---------------------------------------------------------------------------
# the boundary maps
# ---------------------------------------------------------------------------

def assemble_W(k: int, bidegree, vb: Vielbein, tol=RANK_TOL) -> OperatorMatrix:
    """Matrix of alpha -> e^k ^ alpha on the (i,j) fiber."""
    i, j = bidegree
    if i + k > 3 or j + k > DIM_V:
        raise ValueError("W_%d overflows from (%d,%d)" % (k, i, j))
    ek = wedge_power(vb.e, k)
    return operator_matrix(lambda a: wedge(ek, a), bidegree, (i + k, j + k), tol)


def assemble_rho(bidegree, vb: Vielbein, tol=RANK_TOL) -> OperatorMatrix:
    """Matrix of alpha -> [e, alpha]."""
    i, j = bidegree
    return operator_matrix(lambda a: gen_bracket(vb.e, a), bidegree, (i + 1, j - 1), tol)


def assemble_rho_tilde(bidegree, vb: Vielbein, tol=RANK_TOL) -> OperatorMatrix:
    """Matrix of alpha -> [e~, alpha] with the degenerate part e~."""
    i, j = bidegree
    return operator_matrix(lambda a: gen_bracket(vb.etilde, a), bidegree, (i + 1, j - 1), tol)


def assemble_rho_hat(bidegree, vb: Vielbein, tol=RANK_TOL) -> OperatorMatrix:
    """Matrix of alpha -> [alpha, e^] with the non-degenerate part e^.

    The kernel of this map (inside Ker W_1) is the space S whose component
    relations the diagonal-model proposition lists.
    """
    i, j = bidegree
    return operator_matrix(lambda a: gen_bracket(a, vb.ehat), bidegree, (i + 1, j - 1), tol)


def assemble_en_wedge(bidegree, vb: Vielbein, tol=RANK_TOL) -> OperatorMatrix:
    i, j = bidegree
    return operator_matrix(lambda a: wedge(vb.e_n, a), bidegree, (i, j + 1), tol)


# ---------------------------------------------------------------------------
# the subspaces T, S, K, W
# ---------------------------------------------------------------------------

def complement_J(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """Orthogonal complement (identity fiber metric) of rho(Ker W_1^{(1,2)})."""
    w12 = assemble_W(1, (1, 2), vb, tol)
    ker = kernel_vectors(w12.m, tol)
    rho = assemble_rho((1, 2), vb, tol)
    if ker.size == 0:
        return Subspace((2, 1), np.eye(fiber_dim(2, 1), dtype=complex))
    img = rho.m @ ker.T  # columns span rho(Ker W)
    rows = image_vectors(img, tol)
    q = projector_from_rows(rows, fiber_dim(2, 1))
    return Subspace((2, 1), kernel_vectors(q, tol))


def oblique_projector_T(vb: Vielbein, tol=RANK_TOL) -> np.ndarray:
    """Projector onto T along the transported complement.

    For a transported vielbein this is R p_T0 R^{-1}, the projector that is
    orthogonal in the transported auxiliary metric; the fixing lemmas hold
    with this choice at every frame image of the diagonal model.
    """
    if not vb.degenerate:
        return np.zeros((fiber_dim(2, 1), fiber_dim(2, 1)), dtype=complex)
    if vb.transport is not None:
        p0 = _diagonal_pT()
        r = vb.transport.rep((2, 1))
        return r @ p0 @ np.linalg.inv(r)
    return subspace_T(vb, tol).projector()


_DIAG_CACHE = {}


def _diagonal_pT():
    p = _DIAG_CACHE.get("pT")
    if p is None:
        vb0 = Vielbein(
            MixedForm(1, 1, {(0b001, 0b0001): 1.0, (0b010, 0b0010): 1.0,
                             (0b100, 0b0100): 1.0, (0b100, 0b1000): -1.0}),
            MixedForm(0, 1, {(0, 0b0100): 1.0, (0, 0b1000): 1.0}))
        p = subspace_T(vb0).projector()
        _DIAG_CACHE["pT"] = p
    return p


def subspace_T(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """T = Ker W_1^{(2,1)} intersect J (J: transported orthogonal complement)."""
    if not vb.degenerate:
        return Subspace((2, 1), np.zeros((0, fiber_dim(2, 1))))
    if vb.transport is not None and not _is_identity_transport(vb):
        p = oblique_projector_T(vb, tol)
        return Subspace((2, 1), image_vectors(p, tol))
    w21 = assemble_W(1, (2, 1), vb, tol)
    w12 = assemble_W(1, (1, 2), vb, tol)
    rho = assemble_rho((1, 2), vb, tol)
    ker12 = kernel_vectors(w12.m, tol)
    img = rho.m @ ker12.T
    rows = image_vectors(img, tol)
    q = projector_from_rows(rows, fiber_dim(2, 1))
    stacked = np.vstack([w21.m, q])
    return Subspace((2, 1), kernel_vectors(stacked, tol))


def _is_identity_transport(vb) -> bool:
    t = vb.transport
    return (t is not None and np.allclose(t.rot, np.eye(4), atol=1e-14)
            and np.allclose(t.mix, np.eye(3), atol=1e-14))


_PAIRING_13_21 = None


def pairing_13_21() -> np.ndarray:
    """Matrix of the top pairing (1,3) x (2,1) -> scalars."""
    global _PAIRING_13_21
    if _PAIRING_13_21 is None:
        from .forms import trace_top
        k13 = fiber_keys(1, 3)
        k21 = fiber_keys(2, 1)
        p = np.zeros((len(k13), len(k21)), dtype=complex)
        for i, ka in enumerate(k13):
            fa = MixedForm(1, 3, {ka: 1.0})
            for j, kb in enumerate(k21):
                p[i, j] = trace_top(wedge(fa, MixedForm(2, 1, {kb: 1.0})))
        _PAIRING_13_21 = p
    return _PAIRING_13_21


def subspace_S(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """S: the pairing dual of T in the (1,3) fiber.

    Defined so that p_T alpha = 0 iff trace(tau ^ alpha) = 0 for all tau
    in S (the integral form of the degeneracy constraint); this makes the
    class-invariance of R_tau automatic and reproduces the diagonal-model
    component relations exactly.
    """
    if not vb.degenerate:
        return Subspace((1, 3), np.zeros((0, fiber_dim(1, 3))))
    pT = oblique_projector_T(vb, tol)
    if svd_rank(pT, tol) == 0:
        return Subspace((1, 3), np.zeros((0, fiber_dim(1, 3))))
    ker_pT = kernel_vectors(pT, tol)
    rows = (pairing_13_21() @ ker_pT.T).T
    return Subspace((1, 3), kernel_vectors(rows, tol))


def subspace_S_kernel_route(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """Equivalent route at the diagonal model: Ker W_1^{(1,3)} ^ Ker [., e^]."""
    if not vb.degenerate:
        return Subspace((1, 3), np.zeros((0, fiber_dim(1, 3))))
    w13 = assemble_W(1, (1, 3), vb, tol)
    rh = assemble_rho_hat((1, 3), vb, tol)
    stacked = np.vstack([w13.m, rh.m])
    return Subspace((1, 3), kernel_vectors(stacked, tol))


def oblique_projector_S(vb: Vielbein, tol=RANK_TOL) -> np.ndarray:
    """Projector onto S along the transported complement (R p_S0 R^{-1})."""
    if not vb.degenerate:
        return np.zeros((fiber_dim(1, 3), fiber_dim(1, 3)), dtype=complex)
    if vb.transport is not None and not _is_identity_transport(vb):
        p0 = _diag_cached("pS", lambda vb0: subspace_S(vb0).projector())
        r = vb.transport.rep((1, 3))
        return r @ p0 @ np.linalg.inv(r)
    return subspace_S(vb, tol).projector()


def oblique_projector_K(vb: Vielbein, tol=RANK_TOL) -> np.ndarray:
    """Projector onto K along the transported complement (R p_K0 R^{-1})."""
    if not vb.degenerate:
        return np.zeros((fiber_dim(1, 2), fiber_dim(1, 2)), dtype=complex)
    if vb.transport is not None and not _is_identity_transport(vb):
        p0 = _diag_cached("pK", lambda vb0: subspace_K(vb0).projector())
        r = vb.transport.rep((1, 2))
        return r @ p0 @ np.linalg.inv(r)
    return subspace_K(vb, tol).projector()


def _diag_cached(key, builder):
    p = _DIAG_CACHE.get(key)
    if p is None:
        vb0 = Vielbein(
            MixedForm(1, 1, {(0b001, 0b0001): 1.0, (0b010, 0b0010): 1.0,
                             (0b100, 0b0100): 1.0, (0b100, 0b1000): -1.0}),
            MixedForm(0, 1, {(0, 0b0100): 1.0, (0, 0b1000): 1.0}))
        p = builder(vb0)
        _DIAG_CACHE[key] = p
    return p


def subspace_K(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """K = Ker W_1^{(1,2)} intersect Ker rho^{(1,2)}."""
    if not vb.degenerate:
        return Subspace((1, 2), np.zeros((0, fiber_dim(1, 2))))
    w12 = assemble_W(1, (1, 2), vb, tol)
    rho = assemble_rho((1, 2), vb, tol)
    stacked = np.vstack([w12.m, rho.m])
    return Subspace((1, 2), kernel_vectors(stacked, tol))


def subspace_Wdeg(vb: Vielbein, tol=RANK_TOL) -> Subspace:
    """W = e(Ker(i*g)) inside the (0,1) fiber; zero subspace when non-degenerate."""
    if not vb.degenerate:
        return Subspace((0, 1), np.zeros((0, DIM_V)))
    w3 = vb.frame[:, 2]
    leg = vb.legs @ w3
    leg = leg / np.linalg.norm(leg)
    return Subspace((0, 1), leg.reshape(1, -1))


def projector(sub: Subspace) -> OperatorMatrix:
    return OperatorMatrix(sub.bidegree, sub.bidegree, sub.projector())


# ---------------------------------------------------------------------------
# brute-force oracle for S at the diagonal model
# ---------------------------------------------------------------------------

def diagonal_S_relations_matrix() -> np.ndarray:
    """The proposition's component relations as rows over the (1,3) fiber.

    tau_+^{abc} = 0; tau_mu^{123} = tau_mu^{124} = 0 (mu = 1,2);
    tau_1^{234} = tau_2^{134}; tau_1^{134} = -tau_2^{234}.
    """
    keys = fiber_keys(1, 3)
    idx = {key: k for k, key in enumerate(keys)}
    rows = []

    def row(entries):
        r = np.zeros(len(keys))
        for (mu, mask), w in entries:
            r[idx[(1 << mu, mask)]] = w
        rows.append(r)

    m123, m124, m134, m234 = 0b0111, 0b1011, 0b1101, 0b1110
    for mask in (m123, m124, m134, m234):
        row([((2, mask), 1.0)])            # tau_+ = 0 (third coordinate)
    for mu in (0, 1):
        row([((mu, m123), 1.0)])
        row([((mu, m124), 1.0)])
    row([((0, m234), 1.0), ((1, m134), -1.0)])
    row([((0, m134), 1.0), ((1, m234), 1.0)])
    return np.array(rows)


def diagonal_S_oracle(tol=RANK_TOL) -> Subspace:
    rel = diagonal_S_relations_matrix()
    return Subspace((1, 3), kernel_vectors(rel, tol))
