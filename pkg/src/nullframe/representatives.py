"""Unique decompositions and representative fixing.

The two decomposition corollaries,

    gamma = e sigma + e_n alpha   (gamma in (2,2), alpha in Ker W_1^{(2,1)})
    theta = e c + e_n beta        (theta in (1,3), beta in Ker W_1^{(1,2)})

and the affine conditions that pick unique representatives of the reduced
boundary fields:

    omega:  e_n(d_omega e - p_T d_omega e) in Im W_1^{(1,1)},  p_K omega = 0
    Pi:     d phi - (e, Pi) = 0 on the non-degenerate directions,  p_W Pi = 0
    B:      F_A + 1/2 (e^2, B) = 0 on non-degenerate pairs,  p_{Omega^W} B = 0

All solves are pointwise (fiber) least-squares with residual assertions; the
right-hand sides may carry Grassmann payloads (spinor bilinears shift the
torsion source), in which case the same body-valued system is solved per
monomial.
"""

import numpy as np

from .forms import (
    MixedForm,
    fiber_dim,
    fiber_keys,
    from_payloads,
    from_vector,
    gen_bracket,
    coeff_payloads,
    pair_internal,
    to_vector,
    wedge,
)
from .grassmann import Grass, gadd, gcoeff, gmonomials, gmul, gneg, gnorm, gscale, is_grass
from .minkowski import DIM_V, ETA_DIAG
from .operators import (
    RANK_TOL,
    OperatorMatrix,
    Subspace,
    assemble_W,
    assemble_en_wedge,
    image_vectors,
    kernel_basis,
    kernel_vectors,
    operator_matrix,
    projector_from_rows,
    subspace_K,
    subspace_T,
    subspace_Wdeg,
)


# ---------------------------------------------------------------------------
# payload-valued linear solves
# ---------------------------------------------------------------------------

def payload_vector(form: MixedForm):
    return coeff_payloads(form)


def solve_payload_lstsq(a: np.ndarray, rhs_payloads, tol=RANK_TOL):
    """Least-squares solve A x = rhs where rhs entries may be Grassmann.

    Returns (solution payload list, max residual over monomials).
    """
    masks = set()
    for p in rhs_payloads:
        masks.update(gmonomials(p))
    masks = sorted(masks) or [0]
    rhs = np.zeros((a.shape[0], len(masks)), dtype=complex)
    for r, p in enumerate(rhs_payloads):
        for c, mask in enumerate(masks):
            rhs[r, c] = gcoeff(p, mask)
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = float(np.max(np.abs(a @ sol - rhs))) if rhs.size else 0.0
    out = []
    for k in range(a.shape[1]):
        if len(masks) == 1 and masks[0] == 0:
            out.append(sol[k, 0])
        else:
            terms = {masks[c]: sol[k, c] for c in range(len(masks))
                     if abs(sol[k, c]) > 0.0}
            out.append(Grass(terms))
    return out, resid


# ---------------------------------------------------------------------------
# cached per-vielbein fixture
# ---------------------------------------------------------------------------

class BoundaryFixture:
    """All fiber matrices the solvers need, built once per vielbein."""

    def __init__(self, vb, tol=RANK_TOL):
        self.vb = vb
        self.tol = tol
        self.W11 = assemble_W(1, (1, 1), vb, tol)
        self.W21 = assemble_W(1, (2, 1), vb, tol)
        self.W12 = assemble_W(1, (1, 2), vb, tol)
        self.ker21 = kernel_basis(self.W21)
        self.ker12 = kernel_basis(self.W12)
        self.en21 = assemble_en_wedge((2, 1), vb, tol)
        self.en12 = assemble_en_wedge((1, 2), vb, tol)
        self.T = subspace_T(vb, tol)
        self.K = subspace_K(vb, tol)
        self.Wdeg = subspace_Wdeg(vb, tol)
        from .operators import oblique_projector_K, oblique_projector_T
        self.pT = oblique_projector_T(vb, tol)
        self.pK = oblique_projector_K(vb, tol)
        # rows whose kernel is Im W_1^{(1,1)} (membership conditions)
        u, s, vtm = np.linalg.svd(self.W11.m)
        rank = int(np.sum(s > tol * s[0]))
        self.im11_ann = u[:, rank:].conj().T
        # bracket map omega -> [omega, e] on the (1,2) fiber
        self.rho_omega = operator_matrix(
            lambda a: gen_bracket(a, vb.e), (1, 2), (2, 1), tol)
        # structural operator on kappa coordinates
        i18 = np.eye(fiber_dim(2, 1), dtype=complex)
        self.struct_rows = self.im11_ann @ self.en21.m @ (i18 - self.pT)
        kb = self.ker12.basis  # rows
        self.kappa_cols = kb.T
        self.fix_matrix = np.vstack([
            self.struct_rows @ self.rho_omega.m @ self.kappa_cols,
            self.pK @ self.kappa_cols,
        ])


_FIXTURES = {}


def fixture_for(vb, tol=RANK_TOL) -> BoundaryFixture:
    key = id(vb)
    fx = _FIXTURES.get(key)
    if fx is None or fx.vb is not vb:
        fx = BoundaryFixture(vb, tol)
        _FIXTURES[key] = fx
    return fx


# ---------------------------------------------------------------------------
# unique decompositions
# ---------------------------------------------------------------------------

def decompose_gamma(gamma: MixedForm, vb, tol=RANK_TOL):
    """gamma = e sigma + e_n alpha, alpha in Ker W_1^{(2,1)}; returns
    (sigma, alpha, residual)."""
    if (gamma.i, gamma.j) != (2, 2):
        raise ValueError("decompose_gamma expects a (2,2) fiber")
    fx = fixture_for(vb, tol)
    a = np.hstack([fx.W11.m, fx.en21.m @ fx.ker21.basis.T])
    sol, resid = solve_payload_lstsq(a, payload_vector(gamma), tol)
    n1 = fiber_dim(1, 1)
    sigma = from_payloads(1, 1, sol[:n1])
    alpha_coords = sol[n1:]
    alpha_payloads = [None] * fiber_dim(2, 1)
    basis = fx.ker21.basis
    for k in range(fiber_dim(2, 1)):
        acc = 0.0
        for r in range(basis.shape[0]):
            if basis[r, k] != 0.0:
                acc = gadd(acc, gscale(alpha_coords[r], basis[r, k]))
        alpha_payloads[k] = acc
    alpha = from_payloads(2, 1, alpha_payloads)
    return sigma, alpha, resid


def decompose_theta(theta: MixedForm, vb, tol=RANK_TOL):
    """theta = e c + e_n beta, beta in Ker W_1^{(1,2)}; returns (c, beta, residual)."""
    if (theta.i, theta.j) != (1, 3):
        raise ValueError("decompose_theta expects a (1,3) fiber")
    fx = fixture_for(vb, tol)
    w02 = assemble_W(1, (0, 2), vb, tol)
    a = np.hstack([w02.m, fx.en12.m @ fx.ker12.basis.T])
    sol, resid = solve_payload_lstsq(a, payload_vector(theta), tol)
    n1 = fiber_dim(0, 2)
    c = from_payloads(0, 2, sol[:n1])
    coords = sol[n1:]
    basis = fx.ker12.basis
    beta_payloads = []
    for k in range(fiber_dim(1, 2)):
        acc = 0.0
        for r in range(basis.shape[0]):
            if basis[r, k] != 0.0:
                acc = gadd(acc, gscale(coords[r], basis[r, k]))
        beta_payloads.append(acc)
    beta = from_payloads(1, 2, beta_payloads)
    return c, beta, resid


# ---------------------------------------------------------------------------
# structural report
# ---------------------------------------------------------------------------

class StructuralReport:
    """Membership tests of the structural/degeneracy constraint system."""

    __slots__ = ("in_kernel", "structural", "degeneracy", "residuals", "norm_alpha")

    def __init__(self, in_kernel, structural, degeneracy, residuals, norm_alpha):
        self.in_kernel = in_kernel
        self.structural = structural
        self.degeneracy = degeneracy
        self.residuals = residuals
        self.norm_alpha = norm_alpha

    @property
    def all_pass(self):
        return self.in_kernel and self.structural and self.degeneracy

    def __repr__(self):
        return ("StructuralReport(ker=%s struct=%s degen=%s |alpha|=%.3e)"
                % (self.in_kernel, self.structural, self.degeneracy, self.norm_alpha))


def check_structural(vb, alpha: MixedForm, tol=1e-10) -> StructuralReport:
    if (alpha.i, alpha.j) != (2, 1):
        raise ValueError("structural check expects a (2,1) fiber")
    fx = fixture_for(vb)
    v = to_vector(alpha)
    scale = max(1.0, float(np.linalg.norm(v)))
    r_ker = float(np.linalg.norm(fx.W21.m @ v)) / scale
    r_deg = float(np.linalg.norm(fx.pT @ v)) / scale
    r_str = float(np.linalg.norm(fx.struct_rows @ v)) / scale
    return StructuralReport(r_ker <= tol, r_str <= tol, r_deg <= tol,
                            {"kernel": r_ker, "structural": r_str, "degeneracy": r_deg},
                            float(np.linalg.norm(v)))


# ---------------------------------------------------------------------------
# representative fixing
# ---------------------------------------------------------------------------

def fix_omega(vb, omega_seed: MixedForm, torsion_src: MixedForm,
              pk_shift=None, tol=RANK_TOL):
    """Unique representative of [omega].

    torsion_src is the omega-independent part of the torsion at the point
    (d e for the pure theory, d e + spinor bilinear for the spinor theory).
    Solves for kappa in Ker W_1^{(1,2)} such that omega + kappa satisfies
    the structural condition and p_K(omega + kappa) (+ pk_shift) = 0.
    Returns (omega_fixed, residual).
    """
    if (omega_seed.i, omega_seed.j) != (1, 2):
        raise ValueError("fix_omega expects a (1,2) seed")
    fx = fixture_for(vb, tol)
    torsion = torsion_src.add(gen_bracket(omega_seed, vb.e))
    rhs_top = [gneg(p) for p in _apply_rows(fx.struct_rows, payload_vector(torsion))]
    pk_seed = _apply_rows(fx.pK, payload_vector(omega_seed))
    if pk_shift is not None:
        pk_seed = [gadd(a, b) for a, b in zip(pk_seed, payload_vector(pk_shift))]
    rhs = rhs_top + [gneg(p) for p in pk_seed]
    sol, resid = solve_payload_lstsq(fx.fix_matrix, rhs, tol)
    kappa_payloads = []
    basis = fx.ker12.basis
    for k in range(fiber_dim(1, 2)):
        acc = 0.0
        for r in range(basis.shape[0]):
            if basis[r, k] != 0.0:
                acc = gadd(acc, gscale(sol[r], basis[r, k]))
        kappa_payloads.append(acc)
    kappa = from_payloads(1, 2, kappa_payloads)
    return omega_seed.add(kappa), resid


def _apply_rows(matrix: np.ndarray, payloads):
    out = []
    for r in range(matrix.shape[0]):
        acc = 0.0
        for c in range(matrix.shape[1]):
            w = matrix[r, c]
            if w != 0.0:
                acc = gadd(acc, gscale(payloads[c], w))
        out.append(acc)
    return out


def omega_conditions_residual(vb, omega: MixedForm, torsion_src: MixedForm,
                              pk_shift=None) -> float:
    """Max residual of the two fixing conditions at a representative."""
    fx = fixture_for(vb)
    torsion = torsion_src.add(gen_bracket(omega, vb.e))
    r1 = max((gnorm(p) for p in _apply_rows(fx.struct_rows, payload_vector(torsion))),
             default=0.0)
    pk = _apply_rows(fx.pK, payload_vector(omega))
    if pk_shift is not None:
        pk = [gadd(a, b) for a, b in zip(pk, payload_vector(pk_shift))]
    r2 = max((gnorm(p) for p in pk), default=0.0)
    return max(r1, r2)


def fix_scalar_momentum(vb, dphi: MixedForm, pi_n, tol=1e-10):
    """Unique representative of [Pi] given the class datum pi_n.

    dphi is the (1,0) fiber of the scalar gradient; it must satisfy the
    degeneracy compatibility iota_X dphi = 0 for X spanning Ker(i*g).
    Returns the (0,1) fiber Pi = pi^n e_n + pi^a e_a.
    """
    if (dphi.i, dphi.j) != (1, 0):
        raise ValueError("fix_scalar_momentum expects a (1,0) gradient fiber")
    if not vb.degenerate:
        raise ValueError("scalar momentum fixing is the degenerate-case lemma")
    frame = vb.frame  # columns w_1, w_2, w_3 (w_3 spans Ker i*g)
    comps = [dphi.get(1 << mu, 0) for mu in range(3)]

    def against(w):
        acc = 0.0
        for mu in range(3):
            if w[mu] != 0.0:
                acc = gadd(acc, gscale(comps[mu], w[mu]))
        return acc

    d3 = against(frame[:, 2])
    if gnorm(d3) > tol:
        raise ValueError("field data violates degeneracy compatibility "
                         "(iota_X dphi != 0, |.| = %.3e)" % gnorm(d3))
    d_frame = [against(frame[:, 0]), against(frame[:, 1])]
    legs = vb.adapted_legs  # internal vectors e_1, e_2, e_3
    eta = np.diag(ETA_DIAG)
    gblock = np.real(legs[:, :2].conj().T @ eta @ legs[:, :2])
    ginv = np.linalg.inv(gblock)
    gan = np.real(legs[:, :2].conj().T @ eta @ vb.n_comp)
    # pi^b = g^{ba}(D_a - pi_n g_{an}),  b = 1,2
    pi = [0.0, 0.0, 0.0]
    for b in range(2):
        acc = 0.0
        for a in range(2):
            term = gadd(d_frame[a], gneg(gmul(pi_n, Grass.body(gan[a])
                                              if is_grass(pi_n) else gan[a])))
            acc = gadd(acc, gscale(term, ginv[b, a]))
        pi[b] = acc
    # p_W Pi = 0: euclidean projection onto span{e_3} vanishes
    e3 = legs[:, 2]
    denom = float(np.real(np.vdot(e3, e3)))
    num = 0.0
    for a in range(2):
        w = float(np.real(np.vdot(e3, legs[:, a])))
        if w != 0.0:
            num = gadd(num, gscale(pi[a], w))
    wn = float(np.real(np.vdot(e3, vb.n_comp)))
    if wn != 0.0:
        num = gadd(num, gscale(pi_n, wn))
    pi[2] = gscale(gneg(num), 1.0 / denom)
    # assemble Pi = pi^n e_n + pi^a e_a
    payloads = [0.0] * DIM_V
    for a in range(DIM_V):
        acc = gscale(pi_n, vb.n_comp[a]) if vb.n_comp[a] != 0.0 else 0.0
        for b in range(3):
            if legs[a, b] != 0.0:
                acc = gadd(acc, gscale(pi[b], legs[a, b]))
        payloads[a] = acc
    return from_payloads(0, 1, payloads)


def scalar_momentum_residual(vb, pi_form: MixedForm, dphi: MixedForm) -> float:
    """Residuals of p_W Pi = 0 and (dphi - (e,Pi)) on the non-degenerate directions."""
    legs = vb.adapted_legs
    e3 = legs[:, 2]
    comps = [pi_form.get(0, 1 << a) for a in range(DIM_V)]
    num = 0.0
    for a in range(DIM_V):
        w = float(np.real(e3.conj()[a]))
        if w != 0.0:
            num = gadd(num, gscale(comps[a], w))
    r_pw = gnorm(num) / float(np.real(np.vdot(e3, e3)))
    # (e, Pi) as a 1-form minus dphi, contracted with w_1, w_2
    pair = pair_internal(vb.e, pi_form)
    diff = dphi.sub(pair)
    worst = 0.0
    for a in range(2):
        w = vb.frame[:, a]
        acc = 0.0
        for mu in range(3):
            v = diff.get(1 << mu, 0)
            if w[mu] != 0.0:
                acc = gadd(acc, gscale(v, w[mu]))
        worst = max(worst, gnorm(acc))
    return max(float(r_pw), worst)


def fix_ym_B(vb, f_vals, b_an, tol=1e-10):
    """Unique representative of [B] for one su(n) component.

    f_vals: the field-strength fiber as a (2,0) MixedForm (values of F_A);
    must satisfy iota_X F = 0 along the degenerate direction.  b_an: payload
    coefficients (b^{1n}, b^{2n}, b^{3n}) of the class datum.  Returns the
    (0,2) fiber B = b^{an} e_a e_n + 1/2 b^{ab} e_a e_b.
    """
    if (f_vals.i, f_vals.j) != (2, 0):
        raise ValueError("fix_ym_B expects a (2,0) field-strength fiber")
    if not vb.degenerate:
        raise ValueError("B fixing is the degenerate-case lemma")
    frame = vb.frame
    legs = vb.adapted_legs

    def leg_form(vec):
        return from_vector(0, 1, vec)

    e_forms = [leg_form(legs[:, a]) for a in range(3)]
    en_form = leg_form(vb.n_comp)
    basis_an = [wedge(e_forms[a], en_form) for a in range(3)]
    pairs = [(0, 1), (0, 2), (1, 2)]
    basis_ab = [wedge(e_forms[a], e_forms[b]) for (a, b) in pairs]

    # F contracted on the non-degenerate frame pair (w_1, w_2)
    def f_on(wa, wb):
        acc = 0.0
        for mu in range(3):
            for nu in range(mu + 1, 3):
                v = f_vals.get((1 << mu) | (1 << nu), 0)
                if v == 0 or gnorm(v) == 0.0:
                    continue
                acc = gadd(acc, gscale(v, np.real(wa[mu] * wb[nu] - wa[nu] * wb[mu])))
        return acc

    f12 = f_on(frame[:, 0], frame[:, 1])
    f3 = [f_on(frame[:, 2], frame[:, a]) for a in range(2)]
    for r in f3:
        if gnorm(r) > tol:
            raise ValueError("field data violates degeneracy compatibility "
                             "(iota_X F_A != 0)")

    e2 = wedge(vb.e, vb.e)

    def cond_vec(bform):
        """(F + 1/2 (e^2,B))(w_1,w_2) and the two W-plane projections."""
        pairf = pair_internal(e2, bform).scale(0.5)
        c1 = 0.0
        w1, w2 = frame[:, 0], frame[:, 1]
        for mu in range(3):
            for nu in range(3):
                if mu >= nu:
                    continue
                smask = (1 << mu) | (1 << nu)
                v = pairf.get(smask, 0)
                if v == 0 or gnorm(v) == 0.0:
                    continue
                c1 = gadd(c1, gscale(v, np.real(w1[mu] * w2[nu] - w1[nu] * w2[mu])))
        out = [c1]
        # euclidean projections onto e_a ^ e_3 (a = 1,2)
        for a in range(2):
            ref = wedge(e_forms[a], e_forms[2])
            acc = 0.0
            for key, v in ref.c.items():
                w = bform.get(*key)
                if w == 0 or gnorm(w) == 0.0:
                    continue
                acc = gadd(acc, gscale(w, np.conj(complex(v))))
            out.append(acc)
        return out

    # linear system over the unknowns b^{12}, b^{13}, b^{23}
    a_mat = np.zeros((3, 3), dtype=complex)
    for k, bb in enumerate(basis_ab):
        col = cond_vec(bb)
        for r in range(3):
            a_mat[r, k] = complex(col[r]) if not is_grass(col[r]) else complex(
                gcoeff(col[r], 0))
    given = None
    for a in range(3):
        term = basis_an[a].mul_payload(b_an[a])
        given = term if given is None else given.add(term)
    rhs_vec = cond_vec(given)
    rhs_vec[0] = gadd(rhs_vec[0], f12)
    rhs = [gneg(p) for p in rhs_vec]
    sol, resid = solve_payload_lstsq(a_mat, rhs, RANK_TOL)
    out = given
    for k, bb in enumerate(basis_ab):
        out = out.add(bb.mul_payload(sol[k]))
    return out, resid


def ym_B_residual(vb, bform: MixedForm, f_vals: MixedForm) -> float:
    """Residual of F + 1/2 (e^2,B) on the non-degenerate pair and of the
    W-plane projection conditions."""
    frame = vb.frame
    legs = vb.adapted_legs
    e2 = wedge(vb.e, vb.e)
    pairf = pair_internal(e2, bform).scale(0.5)
    total = pairf.add(f_vals)
    w1, w2 = frame[:, 0], frame[:, 1]
    acc = 0.0
    for mu in range(3):
        for nu in range(3):
            if mu >= nu:
                continue
            v = total.get((1 << mu) | (1 << nu), 0)
            if v == 0 or gnorm(v) == 0.0:
                continue
            acc = gadd(acc, gscale(v, np.real(w1[mu] * w2[nu] - w1[nu] * w2[mu])))
    worst = gnorm(acc)
    for a in range(2):
        ref = wedge(from_vector(0, 1, legs[:, a]), from_vector(0, 1, legs[:, 2]))
        acc = 0.0
        for key, v in ref.c.items():
            w = bform.get(*key)
            if w == 0 or gnorm(w) == 0.0:
                continue
            acc = gadd(acc, gscale(w, np.conj(complex(v))))
        worst = max(worst, gnorm(acc))
    return float(worst)
