"""Band-limited fields on a periodic boundary patch with exact calculus.

Fields live on the 3-torus [0,2pi)^3, sampled on an odd N^3 grid.  All field
content is a trigonometric polynomial of known bandwidth, so FFT
differentiation is exact (grid dense enough to resolve the spectrum) and the
integral is the grid mean times (2pi)^3 (exact as long as the bandwidth is
below N).  Mixed forms carry their bandwidth bound through every operation;
the derivative and the quadrature assert their own exactness conditions.

The test configurations are gauge images of the flat diagonal model under
exact null rotations: the Lorentz generator is nilpotent, so the rotation,
its action on every wedge power, and its spin representation are polynomial
in the band-limited gauge profile.  These configurations are degenerate,
torsion free, and exactly band-limited, with all pointwise solves available
as rotations of constant-coefficient solves at the diagonal model.
"""

import numpy as np

from .clifford import GAMMA_LOWER, SpinorForm, bracket_spinor, spin_matrix
from .forms import (
    MixedForm,
    VectorField,
    fiber_keys,
    from_payloads,
    coeff_payloads,
    gen_bracket,
    interior_tangent,
    to_vector,
    trace_top,
    wedge,
)
from .grassmann import (
    Grass,
    gadd,
    gmap,
    gmonomials,
    gmul,
    gneg,
    gnorm,
    gparity_sign,
    gcoeff,
    gscale,
    is_grass,
)
from .liealg import LieForm, SuAlgebra, lie_bracket
from .minkowski import DIM_V, subsets
from .operators import (
    FiberTransport,
    Vielbein,
    diagonal_degenerate_vielbein,
    internal_rep_matrices,
)

TWO_PI = 2.0 * np.pi


class Grid:
    """Odd N^3 sampling grid on the periodic patch."""

    def __init__(self, n: int = 17):
        if n % 2 == 0:
            raise ValueError("grid size must be odd for exact FFT derivatives")
        self.n = n
        x = np.arange(n) * (TWO_PI / n)
        self.axes = np.meshgrid(x, x, x, indexing="ij")
        self.k = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers

    def deriv(self, arr: np.ndarray, axis: int) -> np.ndarray:
        spec = np.fft.fft(arr, axis=axis)
        shape = [1, 1, 1]
        shape[axis] = self.n
        spec *= 1j * self.k.reshape(shape)
        return np.fft.ifft(spec, axis=axis)

    def mean(self, arr) -> complex:
        return complex(np.mean(arr)) if np.ndim(arr) else complex(arr)

    def zeros(self):
        return np.zeros((self.n, self.n, self.n), dtype=complex)

    def rand_field(self, rng, bw: int = 1, axes=(0, 1, 2), scale=1.0):
        """Random real trig polynomial with per-axis bandwidth <= bw."""
        out = self.zeros()
        out += rng.normal() * scale
        for ax in axes:
            for m in range(1, bw + 1):
                c, s = rng.normal(size=2) * scale
                out += c * np.cos(m * self.axes[ax]) + s * np.sin(m * self.axes[ax])
        # one mixed harmonic keeps the field generic
        if len(axes) >= 2 and bw >= 1:
            a, b = axes[0], axes[1]
            out += rng.normal() * scale * np.cos(self.axes[a] + self.axes[b])
        return out


def dpayload(grid: Grid, payload, axis: int):
    if not is_grass(payload):
        return grid.deriv(payload, axis) if np.ndim(payload) else 0.0
    return Grass({m: (grid.deriv(c, axis) if np.ndim(c) else 0.0)
                  for m, c in payload.terms.items()})


def dform(grid: Grid, f: MixedForm) -> MixedForm:
    """Exterior derivative; exact because fields are band limited."""
    if f.i >= 3:
        raise ValueError("spacetime degree 3 has no exterior derivative here")
    if 2 * f.bw + 1 > grid.n:
        f = tighten_bw(grid, f)
    if 2 * f.bw + 1 > grid.n:
        raise ValueError("grid too coarse to differentiate bandwidth %d" % f.bw)
    from .minkowski import merge_bits
    out = {}
    for (s, m), c in f.c.items():
        cc = c  # ghost-inert: dx crossings ignore Grassmann parity
        for mu in range(3):
            if (s >> mu) & 1:
                continue
            dc = dpayload(grid, cc, mu)
            if gnorm(dc) == 0.0:
                continue
            ss, sgn = merge_bits(1 << mu, s)
            v = dc if sgn > 0 else gneg(dc)
            key = (ss, m)
            out[key] = gadd(out[key], v) if key in out else v
    return MixedForm(f.i + 1, f.j, out, f.bw)


def covariant_d(grid: Grid, omega: MixedForm, f: MixedForm) -> MixedForm:
    """d_omega f = d f + [omega, f]."""
    return dform(grid, f).add(gen_bracket(omega, f))


def curvature(grid: Grid, omega: MixedForm) -> MixedForm:
    """F_omega = d omega + 1/2 [omega, omega]."""
    return dform(grid, omega).add(gen_bracket(omega, omega).scale(0.5))


def covariant_d_lie(grid: Grid, a_field: LieForm, x: LieForm) -> LieForm:
    """d_A x = d x + [A, x] for su(n)-valued forms."""
    d = LieForm(x.alg, [dform(grid, c) for c in x.comps])
    return d.add(lie_bracket(a_field, x))


def curvature_lie(grid: Grid, a_field: LieForm) -> LieForm:
    d = LieForm(a_field.alg, [dform(grid, c) for c in a_field.comps])
    return d.add(lie_bracket(a_field, a_field).scale(0.5))


def covariant_d_spinor(grid: Grid, omega: MixedForm, psi: SpinorForm) -> SpinorForm:
    """d_omega psi = d psi + [omega, psi] (row spinors use the cobracket)."""
    from .clifford import bracket_cospinor
    d = SpinorForm([dform(grid, c) for c in psi.comps], psi.row)
    if omega.norm() == 0.0:
        return d
    br = bracket_cospinor(omega, psi) if psi.row else bracket_spinor(omega, psi)
    return d.add(br)


def lie_cov(grid: Grid, xi: VectorField, omega0, f: MixedForm) -> MixedForm:
    """Covariant Lie derivative iota_xi d_w0 + d_w0 iota_xi."""
    def dcov(x):
        out = dform(grid, x)
        if omega0 is not None and omega0.norm() != 0.0 and x.j >= 1:
            out = out.add(gen_bracket(omega0, x))
        return out

    if f.i >= 3:
        return dcov(interior_tangent(xi, f))  # top degree: d f = 0
    term1 = interior_tangent(xi, dcov(f), strict=False)
    if f.i >= 1:
        term2 = dcov(interior_tangent(xi, f))
        return term1.add(term2)
    return term1


def lie_cov_lie(grid: Grid, xi: VectorField, a0, x: LieForm) -> LieForm:
    def dcov(y):
        out = LieForm(x.alg, [dform(grid, c) for c in y.comps])
        if a0 is not None and a0.norm() != 0.0:
            out = out.add(lie_bracket(a0, y))
        return out

    t1 = LieForm(x.alg, [interior_tangent(xi, c, strict=False) for c in dcov(x).comps])
    if x.i >= 1:
        inner = LieForm(x.alg, [interior_tangent(xi, c) for c in x.comps])
        return t1.add(dcov(inner))
    return t1


def lie_cov_spinor(grid: Grid, xi: VectorField, omega0, psi: SpinorForm) -> SpinorForm:
    d = covariant_d_spinor(grid, omega0 if omega0 is not None else MixedForm.zero(1, 2), psi)
    t1 = SpinorForm([interior_tangent(xi, c, strict=False) for c in d.comps], psi.row)
    if psi.i >= 1:
        inner = SpinorForm([interior_tangent(xi, c) for c in psi.comps], psi.row)
        return t1.add(covariant_d_spinor(grid, omega0, inner))
    return t1


def vf_bracket(grid: Grid, xi: VectorField, zeta: VectorField) -> VectorField:
    """Lie bracket of tangent fields, graded by Grassmann parity."""
    comps = []
    sgn = -1.0 if (xi.parity and zeta.parity) else -1.0
    sgn = -(-1.0) ** ((xi.parity or 0) * (zeta.parity or 0))
    for mu in range(3):
        acc = 0.0
        for nu in range(3):
            t1 = gmul(xi.comps[nu], dpayload(grid, zeta.comps[mu], nu))
            t2 = gmul(zeta.comps[nu], dpayload(grid, xi.comps[mu], nu))
            acc = gadd(acc, gadd(t1, gscale(t2, sgn)))
        comps.append(acc)
    par = None
    if xi.parity is not None and zeta.parity is not None:
        par = (xi.parity + zeta.parity) % 2
    return VectorField(comps, xi.bw + zeta.bw, par)


def integrate(grid: Grid, f: MixedForm):
    """Integral over the patch of a (3,4) density (traced) or a scalar 3-form."""
    if f.bw >= grid.n:
        f = tighten_bw(grid, f)
    if f.bw >= grid.n:
        raise ValueError("grid too coarse to integrate bandwidth %d" % f.bw)
    if (f.i, f.j) == (3, 4):
        payload = trace_top(f)
    elif (f.i, f.j) == (3, 0):
        payload = f.get(0b111, 0)
    else:
        raise ValueError("integrate expects a (3,4) or (3,0) form")
    vol = TWO_PI ** 3
    if not is_grass(payload):
        return complex(grid.mean(payload)) * vol
    return Grass({m: complex(grid.mean(c)) * vol for m, c in payload.terms.items()})


# ---------------------------------------------------------------------------
# array-valued internal representations (pointwise rotations)
# ---------------------------------------------------------------------------

def nilpotent_series(mat: np.ndarray, f: np.ndarray):
    """exp(f * mat) for a nilpotent matrix: finite matrix-of-fields series."""
    dim = mat.shape[0]
    out = np.zeros((dim, dim) + f.shape, dtype=complex)
    term = np.eye(dim, dtype=complex)
    out += term[..., None, None, None] * np.ones_like(f)
    power = np.ones_like(f, dtype=complex)
    coeff = 1.0
    k = 1
    cur = term
    order = 0
    scale = max(1.0, float(np.max(np.abs(mat))))
    while True:
        cur = cur @ mat
        if np.max(np.abs(cur)) < 1e-13 * scale ** (order + 1):
            break
        power = power * f
        coeff /= k
        out += cur[..., None, None, None] * (coeff * power)
        k += 1
        order += 1
        if k > dim + 1:
            break
    return out, order


def apply_matfield(mats: np.ndarray, f: MixedForm, bw_add: int, j: int) -> MixedForm:
    """Apply an array-valued matrix on the Lambda^j factor of f."""
    if f.j != j:
        raise ValueError("internal degree mismatch")
    basis = subsets(DIM_V, j)
    index = {m: k for k, m in enumerate(basis)}
    smasks = sorted({s for (s, _) in f.c})
    out = {}
    for s in smasks:
        cols = [f.c.get((s, m), 0.0) for m in basis]
        for r, mr in enumerate(basis):
            acc = 0.0
            for c, mc in enumerate(basis):
                w = mats[r, c]
                if gnorm(cols[c]) == 0.0:
                    continue
                if np.ndim(w) and np.max(np.abs(w)) == 0.0:
                    continue
                acc = gadd(acc, _mul_payload_field(w, cols[c]))
            if gnorm(acc) != 0.0:
                out[(s, mr)] = acc
    return MixedForm(f.i, f.j, out, f.bw + bw_add)


def _mul_payload_field(w, payload):
    """Multiply a payload by a plain field array (body weight)."""
    if not is_grass(payload):
        return payload * w
    return Grass({m: c * w for m, c in payload.terms.items()})


class EquivariantFrame:
    """Exact null-rotation gauge frame Lambda(x) and its representations.

    The generator is f(x) * B with B a null-rotation so(3,1) matrix (B^3 = 0),
    so Lambda = 1 + f B + f^2 B^2/2 is polynomial in the band-limited profile
    f, and so is every wedge-power and the spin representation.
    """

    def __init__(self, grid: Grid, f: np.ndarray, direction=(1.0, 0.0), f_bw=1):
        self.grid = grid
        self.f = f
        self.f_bw = f_bw
        v = np.array([direction[0], direction[1], 0.0, 0.0])
        v = v / np.linalg.norm(v)
        # bivector b = v ^ n with n = u3 + u4 (null), v spacelike orthogonal
        biv = MixedForm.zero(0, 2)
        ncomp = np.array([0.0, 0.0, 1.0, 1.0])
        from .minkowski import merge_bits
        for a in range(DIM_V):
            for b in range(DIM_V):
                w = v[a] * ncomp[b]
                if w == 0.0:
                    continue
                mm, sgn = merge_bits(1 << a, 1 << b)
                if sgn == 0:
                    continue
                key = (0, mm)
                biv.c[key] = biv.c.get(key, 0.0) + sgn * w
        self.bivector = biv
        # matrix of the so-action on V
        bmat = np.zeros((4, 4), dtype=complex)
        for ccol in range(4):
            out = gen_bracket(biv, MixedForm.basis(0, 1, 0, 1 << ccol))
            for r in range(4):
                bmat[r, ccol] = out.get(0, 1 << r)
        self.bmat = bmat
        self.reps = {}
        self.reps_inv = {}
        self.rep_bw = {}
        for j in range(DIM_V + 1):
            ad = _ad_on_lambda(bmat, j)
            m, order = nilpotent_series(ad, f)
            mi, _ = nilpotent_series(ad, -f)
            self.reps[j] = m
            self.reps_inv[j] = mi
            self.rep_bw[j] = order * f_bw
        s_b = spin_matrix(biv)
        self.spin, self.spin_order = nilpotent_series(s_b, f)
        self.spin_inv, _ = nilpotent_series(s_b, -f)
        self.spin_bw = self.spin_order * f_bw

    def rotate(self, form: MixedForm, inverse=False) -> MixedForm:
        mats = self.reps_inv[form.j] if inverse else self.reps[form.j]
        return apply_matfield(mats, form, self.rep_bw[form.j], form.j)

    def rotate_spinor(self, psi: SpinorForm, inverse=False) -> SpinorForm:
        mats = self.spin_inv if inverse else self.spin
        comps = [MixedForm.zero(psi.i, psi.j, c.bw + self.spin_bw) for c in psi.comps]
        for r in range(4):
            acc = comps[r]
            for c in range(4):
                w = mats[c, r] if psi.row else mats[r, c]
                if np.max(np.abs(w)) == 0.0:
                    continue
                src = psi.comps[c]
                for key, p in src.c.items():
                    v = _mul_payload_field(w, p)
                    acc.c[key] = gadd(acc.c[key], v) if key in acc.c else v
        return SpinorForm(comps, psi.row)


def _ad_on_lambda(bmat: np.ndarray, j: int) -> np.ndarray:
    """Derivation matrix of a so-generator on Lambda^j V (ascending masks)."""
    basis = subsets(DIM_V, j)
    dim = len(basis)
    out = np.zeros((dim, dim), dtype=complex)
    if j == 0:
        return out
    from .minkowski import extract_sign, merge_bits
    for col, mask in enumerate(basis):
        for p in [q for q in range(DIM_V) if (mask >> q) & 1]:
            sgn0 = extract_sign(mask, p)
            rest = mask & ~(1 << p)
            for r in range(DIM_V):
                w = bmat[r, p]
                if w == 0.0 or (rest >> r) & 1:
                    continue
                mm, sgn = merge_bits(1 << r, rest)
                out[basis.index(mm), col] += sgn0 * sgn * w
    return out


# ---------------------------------------------------------------------------
# boundary configurations
# ---------------------------------------------------------------------------

THEORIES = ("pc", "scalar", "ym", "spinor")


class BoundaryConfig:
    """A band-limited field multiplet on the patch, representative-fixed.

    Built either flat (constant diagonal frame) or as an exact null-rotation
    gauge image of it.  Carries the constant diagonal fiber data (vielbein
    and solver fixture) plus the pointwise rotation, so every fiber solve
    of the engine is a rotation of a constant-coefficient solve.
    """

    def __init__(self, theory, grid, frame, e, e_n, omega, lam=0.0, seed=None):
        if theory not in THEORIES:
            raise ValueError("unknown theory %r" % theory)
        self.theory = theory
        self.grid = grid
        self.frame = frame  # EquivariantFrame or None
        self.e = e
        self.e_n = e_n
        self.omega = omega
        self.omega0 = None  # reference connection, defaults to zero
        self.a0 = None
        self.lam = lam
        self.seed = seed
        self.vb0 = diagonal_degenerate_vielbein()
        self.matter = {}
        self.su = None
        self.torsion_free = True

    # -- pointwise rotation plumbing ---------------------------------------

    def rotate(self, form, inverse=False):
        if self.frame is None:
            return form
        return self.frame.rotate(form, inverse=inverse)

    def rotate_spinor(self, psi, inverse=False):
        if self.frame is None:
            return psi
        return self.frame.rotate_spinor(psi, inverse=inverse)

    def conj_apply(self, matrix, form, out_bidegree=None):
        """Apply a constant diagonal-frame fiber matrix pointwise: R M0 R^{-1}."""
        from .operators import _apply_fiber_matrix
        pulled = self.rotate(form, inverse=True)
        if out_bidegree is None or tuple(out_bidegree) == (form.i, form.j):
            applied = _apply_fiber_matrix(matrix, pulled)
        else:
            applied = _matrix_map(matrix, pulled, out_bidegree)
        return self.rotate(applied)

    def tau_section(self, k: int):
        """The k-th canonical S-section: rotated diagonal S-basis element."""
        from .operators import subspace_S
        tau0 = subspace_S(self.vb0).forms()[k]
        return self.rotate(tau0)

    def pS_apply(self, form):
        from .operators import oblique_projector_S
        return self.conj_apply(oblique_projector_S(self.vb0), form)

    def torsion(self):
        return dform(self.grid, self.e).add(gen_bracket(self.omega, self.e))

    def curvature(self):
        return curvature(self.grid, self.omega)

    def matter_fields(self):
        return dict(self.matter)


def _matrix_map(matrix, form, out_bidegree):
    from .forms import from_payloads
    pls = coeff_payloads(form)
    out = []
    for r in range(matrix.shape[0]):
        acc = 0.0
        for c in range(matrix.shape[1]):
            w = matrix[r, c]
            if w != 0.0:
                acc = gadd(acc, gscale(pls[c], w))
        out.append(acc)
    return from_payloads(out_bidegree[0], out_bidegree[1], out, form.bw)


def constant_field_form(fiber: MixedForm) -> MixedForm:
    """A fiber used as a constant field (scalar payloads broadcast)."""
    return MixedForm(fiber.i, fiber.j, dict(fiber.c), 0)


def _scalar_fix_units(vb0):
    """Unit solutions of the scalar momentum fixing at the diagonal model."""
    from .representatives import fix_scalar_momentum
    d1 = MixedForm(1, 0, {(0b001, 0): 1.0})
    d2 = MixedForm(1, 0, {(0b010, 0): 1.0})
    return (fix_scalar_momentum(vb0, d1, 0.0),
            fix_scalar_momentum(vb0, d2, 0.0),
            fix_scalar_momentum(vb0, MixedForm.zero(1, 0), 1.0))


def _ym_fix_units(vb0):
    """Unit solutions of the B fixing at the diagonal model."""
    from .representatives import fix_ym_B
    funit = MixedForm(2, 0, {(0b011, 0): 1.0})
    bf, _ = fix_ym_B(vb0, funit, [0.0, 0.0, 0.0])
    outs = [bf]
    for a in range(3):
        unit = [0.0, 0.0, 0.0]
        unit[a] = 1.0
        ba, _ = fix_ym_B(vb0, MixedForm.zero(2, 0), unit)
        outs.append(ba)
    return outs


_OMEGA_MAPS = {}


def omega_fix_maps(vb0):
    """Linear maps (torsion source, seed) -> kappa for the diagonal fixture."""
    key = id(vb0)
    maps = _OMEGA_MAPS.get(key)
    if maps is None:
        from .forms import fiber_dim, from_vector
        from .representatives import fix_omega
        import numpy as _np
        m_src = _np.zeros((fiber_dim(1, 2), fiber_dim(2, 1)), dtype=complex)
        for k in range(fiber_dim(2, 1)):
            unit = from_vector(2, 1, _np.eye(fiber_dim(2, 1))[k])
            om, _ = fix_omega(vb0, MixedForm.zero(1, 2), unit)
            m_src[:, k] = to_vector(om)
        m_seed = _np.zeros((fiber_dim(1, 2), fiber_dim(1, 2)), dtype=complex)
        for k in range(fiber_dim(1, 2)):
            unit = from_vector(1, 2, _np.eye(fiber_dim(1, 2))[k])
            om, _ = fix_omega(vb0, unit, MixedForm.zero(2, 1))
            m_seed[:, k] = to_vector(om) - _np.eye(fiber_dim(1, 2))[k]
        maps = (m_src, m_seed)
        _OMEGA_MAPS[key] = maps
    return maps


def batched_fix_omega(cfg: BoundaryConfig, seed: MixedForm, torsion_src: MixedForm):
    """Pointwise representative fixing: rotate, constant solve, rotate back."""
    m_src, m_seed = omega_fix_maps(cfg.vb0)
    src0 = cfg.rotate(torsion_src, inverse=True)
    seed0 = cfg.rotate(seed, inverse=True)
    kappa0 = _matrix_map(m_src, src0, (1, 2)).add(_matrix_map(m_seed, seed0, (1, 2)))
    out = seed.add(cfg.rotate(kappa0))
    return tighten_bw(cfg.grid, out.prune(1e-14))


def spinor_torsion_source(cfg: BoundaryConfig, psi, psibar) -> MixedForm:
    """(i/4)(psibar gamma [e^2,psi] - [e^2,psibar] gamma psi), the extra
    torsion of the spinor theory's structural constraint."""
    from .clifford import switch_combination
    e2 = wedge(cfg.e, cfg.e)
    return switch_combination(e2, psi, psibar).scale(0.25j)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _diag_e_field():
    return MixedForm(1, 1, {(0b001, 0b0001): 1.0, (0b010, 0b0010): 1.0,
                            (0b100, 0b0100): 1.0, (0b100, 0b1000): -1.0}, 0)


def _diag_en_field():
    return MixedForm(0, 1, {(0, 0b0100): 1.0, (0, 0b1000): 1.0}, 0)


def flat_onshell_config(theory="pc", grid=None, lam=0.0) -> BoundaryConfig:
    """Constant diagonal degenerate frame, omega = 0, matter = 0."""
    grid = grid or Grid(9)
    cfg = BoundaryConfig(theory, grid, None, _diag_e_field(), _diag_en_field(),
                         MixedForm.zero(1, 2), lam=lam)
    if theory == "scalar":
        cfg.matter = {"phi": MixedForm.zero(0, 0), "pi": MixedForm.zero(0, 1),
                      "pi_n": 0.0}
    elif theory == "ym":
        cfg.su = SuAlgebra(2)
        cfg.matter = {"A": LieForm.zero(cfg.su, 1, 0), "B": LieForm.zero(cfg.su, 0, 2)}
    elif theory == "spinor":
        cfg.matter = {"psi": SpinorForm.zero(0, 0), "psibar": SpinorForm.zero(0, 0, row=True)}
    return cfg


def gauge_flat_config(theory, grid, rng, gauge_scale=0.3, matter_scale=0.4,
                      lam=0.0, with_matter=True, const_connection=True,
                      extra_omega=0.0, su_n=2) -> BoundaryConfig:
    """Exact null-rotation gauge image of the flat configuration.

    d_omega e = 0 holds exactly (up to the nilpotent spinor correction in the
    spinor theory); i*g = diag(1,1,0) pointwise; all representative-fixing
    conditions hold.  extra_omega adds a generic band-limited connection
    perturbation (breaking torsion-freeness) for the rows that allow it.
    """
    if gauge_scale == 0.0:
        frame = None
        rng.uniform(0, TWO_PI)  # keep the stream aligned across scales
        e = _diag_e_field()
        en = _diag_en_field()
    else:
        f = gauge_scale * grid.rand_field(rng, bw=1)
        ang = rng.uniform(0, TWO_PI)
        frame = EquivariantFrame(grid, f, direction=(np.cos(ang), np.sin(ang)))
        e = frame.rotate(_diag_e_field())
        en = frame.rotate(_diag_en_field())
    # gauge-transformed zero connection: omega = -df (x) b
    if frame is not None:
        f_form = MixedForm(0, 0, {(0, 0): f}, 1)
        df = dform(grid, f_form)
        omega = wedge(df, frame.bivector).scale(-1.0)
    else:
        omega = MixedForm.zero(1, 2)
    if const_connection:
        # add the gauge image of a constant connection commuting with e0
        from .operators import assemble_rho, kernel_vectors
        from .forms import from_vector, fiber_dim
        vb0 = diagonal_degenerate_vielbein()
        rho = np.zeros((fiber_dim(2, 1), fiber_dim(1, 2)), dtype=complex)
        for k in range(fiber_dim(1, 2)):
            unit = from_vector(1, 2, np.eye(fiber_dim(1, 2))[k])
            rho[:, k] = to_vector(gen_bracket(unit, vb0.e))
        null = kernel_vectors(rho)
        coef = rng.normal(size=null.shape[0]) * 0.4
        om_c = from_vector(1, 2, coef @ null.conj())
        om_field = constant_field_form(om_c)
        omega = omega.add(frame.rotate(om_field) if frame is not None else om_field)
    cfg = BoundaryConfig(theory, grid, frame, e, en, omega, lam=lam,
                         seed=int(rng.integers(0, 2**31)))
    # matter
    if theory == "scalar" and with_matter:
        phi = matter_scale * grid.rand_field(rng, bw=1, axes=(0, 1))
        pin = matter_scale * grid.rand_field(rng, bw=1)
        phi_form = MixedForm(0, 0, {(0, 0): phi}, 1)
        dphi = dform(grid, phi_form)
        u1, u2, u3 = _scalar_fix_units(cfg.vb0)
        d1 = dphi.get(0b001, 0)
        d2 = dphi.get(0b010, 0)
        pi0 = constant_field_form(u1).mul_payload(d1, bw=1)
        pi0 = pi0.add(constant_field_form(u2).mul_payload(d2, bw=1))
        pi0 = pi0.add(constant_field_form(u3).mul_payload(pin, bw=1))
        cfg.matter = {"phi": phi_form, "pi": cfg.rotate(pi0), "pi_n": pin}
    elif theory == "ym" and with_matter:
        cfg.su = SuAlgebra(su_n)
        comps = []
        for _ in range(cfg.su.dim):
            c = MixedForm.zero(1, 0, 1)
            c.c[(0b001, 0)] = matter_scale * grid.rand_field(rng, bw=1, axes=(0, 1))
            c.c[(0b010, 0)] = matter_scale * grid.rand_field(rng, bw=1, axes=(0, 1))
            comps.append(c)
        a_field = LieForm(cfg.su, comps)
        f_str = curvature_lie(grid, a_field)
        units = _ym_fix_units(cfg.vb0)
        bcomps = []
        for g in range(cfg.su.dim):
            f12 = f_str.comps[g].get(0b011, 0)
            acc = constant_field_form(units[0]).mul_payload(f12, bw=f_str.comps[g].bw)
            for a in range(3):
                ban = matter_scale * grid.rand_field(rng, bw=1)
                acc = acc.add(constant_field_form(units[1 + a]).mul_payload(ban, bw=1))
            bcomps.append(cfg.rotate(acc))
        cfg.matter = {"A": a_field, "B": LieForm(cfg.su, bcomps)}
    elif theory == "spinor" and with_matter:
        def odd_spinor(row, gens):
            comps = []
            for r in range(4):
                terms = {}
                for g in gens:
                    terms[1 << g] = matter_scale * (
                        grid.rand_field(rng, bw=1) + 1j * grid.rand_field(rng, bw=1))
                comps.append(Grass(terms))
            return SpinorForm([MixedForm(0, 0, {(0, 0): c}, 1) for c in comps], row)
        psi = odd_spinor(False, (2, 3))
        psibar = odd_spinor(True, (4, 5))
        cfg.matter = {"psi": psi, "psibar": psibar}
    # representative fixing: structural condition + p_K omega = 0
    torsion_src = dform(grid, cfg.e)
    if theory == "spinor" and with_matter:
        torsion_src = torsion_src.add(
            spinor_torsion_source(cfg, cfg.matter["psi"], cfg.matter["psibar"]))
    cfg.omega = batched_fix_omega(cfg, cfg.omega, torsion_src)
    cfg.e = tighten_bw(grid, cfg.e)
    cfg.e_n = tighten_bw(grid, cfg.e_n)
    for key, v in list(cfg.matter.items()):
        if isinstance(v, MixedForm):
            cfg.matter[key] = tighten_bw(grid, v)
        elif isinstance(v, LieForm):
            cfg.matter[key] = LieForm(v.alg, [tighten_bw(grid, c) for c in v.comps])
        elif isinstance(v, SpinorForm):
            cfg.matter[key] = SpinorForm([tighten_bw(grid, c) for c in v.comps], v.row)
    if extra_omega:
        pert = MixedForm.zero(1, 2, 1)
        for key in fiber_keys(1, 2):
            pert.c[key] = extra_omega * grid.rand_field(rng, bw=1)
        cfg.omega = cfg.omega.add(pert)
        cfg.torsion_free = False
    return cfg


# ---------------------------------------------------------------------------
# serialization (documented plain-JSON format, bit-exact round trip)
# ---------------------------------------------------------------------------

def _num_to_json(x):
    x = complex(x)
    return [x.real, x.imag]


def _payload_to_json(p, n):
    if is_grass(p):
        return {"grass": {str(m): _payload_to_json(c, n) for m, c in p.terms.items()}}
    if np.ndim(p):
        arr = np.asarray(p, dtype=complex)
        return {"field": [arr.real.ravel().tolist(), arr.imag.ravel().tolist()]}
    return {"const": _num_to_json(p)}


def _payload_from_json(d, n):
    if "grass" in d:
        return Grass({int(m): _payload_from_json(c, n) for m, c in d["grass"].items()})
    if "field" in d:
        re = np.array(d["field"][0]).reshape(n, n, n)
        im = np.array(d["field"][1]).reshape(n, n, n)
        return re + 1j * im
    return complex(d["const"][0], d["const"][1])


def form_to_json(f: MixedForm, n: int):
    return {"i": f.i, "j": f.j, "bw": f.bw,
            "c": {"%d,%d" % key: _payload_to_json(v, n) for key, v in sorted(f.c.items())}}


def form_from_json(d, n) -> MixedForm:
    out = MixedForm(d["i"], d["j"], None, d.get("bw", 0))
    for key, v in d["c"].items():
        s, m = key.split(",")
        out.c[(int(s), int(m))] = _payload_from_json(v, n)
    return out


def config_to_jsonable(cfg: BoundaryConfig) -> dict:
    n = cfg.grid.n
    out = {
        "theory": cfg.theory,
        "n": n,
        "lam": cfg.lam,
        "seed": cfg.seed,
        "torsion_free": cfg.torsion_free,
        "e": form_to_json(cfg.e, n),
        "e_n": form_to_json(cfg.e_n, n),
        "omega": form_to_json(cfg.omega, n),
    }
    if cfg.frame is not None:
        out["frame"] = {"f": _payload_to_json(cfg.frame.f, n),
                        "bivector": form_to_json(cfg.frame.bivector, n),
                        "f_bw": cfg.frame.f_bw}
    m = {}
    for key, v in cfg.matter.items():
        if isinstance(v, MixedForm):
            m[key] = {"form": form_to_json(v, n)}
        elif isinstance(v, LieForm):
            m[key] = {"lie": [form_to_json(c, n) for c in v.comps]}
        elif isinstance(v, SpinorForm):
            m[key] = {"spinor": [form_to_json(c, n) for c in v.comps], "row": v.row}
        else:
            m[key] = {"payload": _payload_to_json(v, n)}
    out["matter"] = m
    if cfg.su is not None:
        out["su_n"] = cfg.su.n
    return out


def config_from_jsonable(d) -> BoundaryConfig:
    grid = Grid(d["n"])
    frame = None
    if "frame" in d:
        f = _payload_from_json(d["frame"]["f"], d["n"])
        biv = form_from_json(d["frame"]["bivector"], d["n"])
        # rebuild from the stored bivector: recover the spacelike direction
        frame = EquivariantFrame.__new__(EquivariantFrame)
        frame.grid = grid
        frame.f = np.real(f)
        frame.f_bw = d["frame"]["f_bw"]
        frame.bivector = biv
        bmat = np.zeros((4, 4), dtype=complex)
        for c in range(4):
            outv = gen_bracket(biv, MixedForm.basis(0, 1, 0, 1 << c))
            for r in range(4):
                bmat[r, c] = outv.get(0, 1 << r)
        frame.bmat = bmat
        frame.reps, frame.reps_inv, frame.rep_bw = {}, {}, {}
        for j in range(DIM_V + 1):
            ad = _ad_on_lambda(bmat, j)
            m, order = nilpotent_series(ad, frame.f)
            mi, _ = nilpotent_series(ad, -frame.f)
            frame.reps[j] = m
            frame.reps_inv[j] = mi
            frame.rep_bw[j] = order * frame.f_bw
        s_b = spin_matrix(biv)
        frame.spin, frame.spin_order = nilpotent_series(s_b, frame.f)
        frame.spin_inv, _ = nilpotent_series(s_b, -frame.f)
        frame.spin_bw = frame.spin_order * frame.f_bw
    cfg = BoundaryConfig(d["theory"], grid, frame,
                         form_from_json(d["e"], d["n"]),
                         form_from_json(d["e_n"], d["n"]),
                         form_from_json(d["omega"], d["n"]),
                         lam=d["lam"], seed=d.get("seed"))
    cfg.torsion_free = d.get("torsion_free", True)
    if "su_n" in d:
        cfg.su = SuAlgebra(d["su_n"])
    for key, v in d.get("matter", {}).items():
        if "form" in v:
            cfg.matter[key] = form_from_json(v["form"], d["n"])
        elif "lie" in v:
            cfg.matter[key] = LieForm(cfg.su, [form_from_json(c, d["n"]) for c in v["lie"]])
        elif "spinor" in v:
            cfg.matter[key] = SpinorForm([form_from_json(c, d["n"]) for c in v["spinor"]],
                                         row=v["row"])
        else:
            cfg.matter[key] = _payload_from_json(v["payload"], d["n"])
    return cfg


def _payload_bw(grid: Grid, payload, rel=1e-12) -> int:
    """Measured per-axis bandwidth bound of a payload (exact FFT spectrum)."""
    if not is_grass(payload):
        if not np.ndim(payload):
            return 0
        spec = np.abs(np.fft.fftn(payload))
        top = spec.max()
        if top == 0.0:
            return 0
        cut = rel * top
        kmax = 0
        half = grid.n // 2
        ks = np.abs(np.fft.fftfreq(grid.n, d=1.0 / grid.n)).astype(int)
        mask = spec > cut
        for ax in range(3):
            idx = np.any(mask, axis=tuple(a for a in range(3) if a != ax))
            if idx.any():
                kmax = max(kmax, int(ks[idx].max()))
        return kmax
    return max((_payload_bw(grid, c, rel) for c in payload.terms.values()), default=0)


def tighten_bw(grid: Grid, form: MixedForm) -> MixedForm:
    """Replace the tracked bandwidth bound by the measured spectrum bound.

    The bound is conservative (it sums along every product); the measured
    per-axis spectrum is exact whenever the true content is resolvable,
    which every construction here maintains (the conservative bound may
    exceed it only through rotation round trips that cancel).
    """
    if form.bw >= grid.n:
        return form
    bw = max((_payload_bw(grid, v) for v in form.c.values()), default=0)
    out = form.copy()
    out.bw = min(form.bw, bw)
    return out
