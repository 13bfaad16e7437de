"""Truncated Dirac operators and spectral-triple checks.

Operators act on the spinor-mode basis {modes |k| <= M} x spinor module.
Circle operators are small and dense; torus operators are kept sparse
(their residual checks reduce to exact cancellations, and eigenvalues come
from the per-mode blocks analytically).

Operator-norm and spectrum statements are restricted to the interior band
|k| <= M - B: multiplication operators couple modes across the cutoff, and
the interior block is exact for band-limited generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .bases import (
    CatalogError,
    CircleModes,
    FiniteSet,
    FourierCircle,
    FourierTorus,
    TorusModes,
)
from .clifford import CliffordRep, SpinLift
from .groupoids import ActionGroupoid, CechActionGroupoid, trivial_groupoid
from .morita import QuotientCovering
from .transport import (
    invariant_mode_indices,
    pullback_modes_section,
    solve_downstairs_twist,
)

DEFAULT_BUFFER = 2


# ---------------------------------------------------------------------------
# spinor mode spaces


@dataclass(frozen=True, eq=False)
class SpinorModeSpace:
    base: object  # FourierCircle | FourierTorus
    cutoff: int
    twist: tuple  # one Fraction per circle factor
    rep: CliffordRep

    @property
    def n(self):
        return self.base.dim

    @property
    def mode_list(self):
        M = self.cutoff
        if self.n == 1:
            return [(k,) for k in range(-M, M + 1)]
        rng = range(-M, M + 1)
        return [(k1, k2) for k1 in rng for k2 in rng]

    @property
    def dim(self):
        return len(self.mode_list) * self.rep.spinor_dim

    def mode_index(self, k):
        M = self.cutoff
        if self.n == 1:
            return k[0] + M
        return (k[0] + M) * (2 * M + 1) + (k[1] + M)

    def freq(self, k):
        if self.n == 1:
            return ((2.0 * np.pi / self.base.circumference) * (k[0] + float(self.twist[0])),)
        return tuple(
            (2.0 * np.pi / L) * (ki + float(ti))
            for L, ki, ti in zip(self.base.circumferences, k, self.twist)
        )

    def interior_modes(self, buffer):
        M = self.cutoff
        return [k for k in self.mode_list if max(abs(x) for x in k) <= M - buffer]

    def interior_indices(self, buffer):
        d = self.rep.spinor_dim
        out = []
        for k in self.interior_modes(buffer):
            base = self.mode_index(k) * d
            out.extend(range(base, base + d))
        return np.array(out, dtype=int)


# ---------------------------------------------------------------------------
# Dirac specifications


@dataclass(eq=False)
class DiracSpec:
    groupoid: ActionGroupoid
    lift: SpinLift
    twist: tuple
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 8:
            raise CatalogError("mode cutoff must be at least 8")
        self.twist = tuple(Fraction(t) for t in self.twist)
        if any(t not in (Fraction(0), Fraction(1, 2)) for t in self.twist):
            raise CatalogError("twists must be 0 or 1/2 per circle factor")
        n = self.groupoid.base.dim
        if len(self.twist) != n or self.lift.rep.dimension != n:
            raise CatalogError("twist/representation dimension mismatch")
        if self.lift.groupoid is not self.groupoid:
            raise CatalogError("lift was built for a different groupoid")
        self._action_cache = {}

    @property
    def space(self):
        return SpinorModeSpace(self.groupoid.base, self.cutoff, self.twist, self.lift.rep)

    def with_cutoff(self, cutoff) -> "DiracSpec":
        base = self.groupoid.base
        if isinstance(base, FourierCircle):
            new_base = FourierCircle(base.circumference, cutoff)
        else:
            new_base = FourierTorus(base.circumferences, cutoff)
        G = ActionGroupoid(self.groupoid.group, new_base, dict(self.groupoid.iso), self.groupoid.name)
        lift = SpinLift(G, self.lift.rep, dict(self.lift.signs), self.lift.strict)
        return DiracSpec(G, lift, self.twist, cutoff)


# ---------------------------------------------------------------------------
# operator builders


def _phase_vector(M, twist, turns) -> np.ndarray:
    """unit_phase((k + twist) * turns) for k = -M..M, vectorized exactly.

    Fractional parts are computed in integer arithmetic so that full turns
    give exactly 1.0 and half turns exactly -1.0.
    """
    t = Fraction(turns) % 1
    if t == 0:
        return np.ones(2 * M + 1, dtype=complex)
    tw = Fraction(twist)
    ks = np.arange(-M, M + 1, dtype=np.int64)
    numerators = (ks * tw.denominator + tw.numerator) * t.numerator
    den = t.denominator * tw.denominator
    residues = np.mod(numerators, den)
    out = np.empty(2 * M + 1, dtype=complex)
    special = {0: 1.0, den / 2: -1.0, den / 4: 1j, 3 * den / 4: -1j}
    generic = np.exp(2j * np.pi * (residues / float(den)))
    out[:] = generic
    for res, val in special.items():
        out[residues == res] = val
    return out


def _scalar_pullback_inverse(space: SpinorModeSpace, iso):
    """Sparse matrix of psi -> psi o iso^{-1} on scalar mode coefficients."""
    M = space.cutoff
    inv = iso.inverse()
    if space.n == 1:
        return sp.diags(_phase_vector(M, space.twist[0], inv.turns), format="csr")
    e = -1 if inv.negate else 1
    size = (2 * M + 1) ** 2
    shift_terms = [(e - 1) * space.twist[0], (e - 1) * space.twist[1]]
    if any(s % 1 != 0 for s in shift_terms):
        raise CatalogError("negation does not preserve this twist lattice")
    ks = np.arange(-M, M + 1, dtype=np.int64)
    o1 = e * ks + int(shift_terms[0])
    o2 = e * ks + int(shift_terms[1])
    if np.abs(o1).max() > M or np.abs(o2).max() > M:
        raise CatalogError("pullback leaves the truncation window")
    p1 = _phase_vector(M, space.twist[0], inv.shift[0])
    p2 = _phase_vector(M, space.twist[1], inv.shift[1])
    idx_in = (ks[:, None] + M) * (2 * M + 1) + (ks[None, :] + M)
    idx_out = (o1[:, None] + M) * (2 * M + 1) + (o2[None, :] + M)
    vals = p1[:, None] * p2[None, :]
    return sp.csr_matrix(
        (vals.reshape(-1), (idx_out.reshape(-1), idx_in.reshape(-1))),
        shape=(size, size),
    )


def action_matrix(spec: DiracSpec, g) -> sp.csr_matrix:
    """The lifted unitary of one group element on the truncated spinors.

    Cached per spec: representation and projector builders reuse these.
    """
    cache = getattr(spec, "_action_cache", None)
    if cache is None:
        cache = spec._action_cache = {}
    if g not in cache:
        space = spec.space
        P = _scalar_pullback_inverse(space, spec.groupoid.iso[g])
        S = sp.csr_matrix(spec.lift.matrix(g))
        cache[g] = sp.kron(P, S, format="csr")
    return cache[g]


def mult_operator(space: SpinorModeSpace, f) -> sp.csr_matrix:
    """Pointwise multiplication by a band-limited scalar function.

    Rows and columns outside the shared truncation window are dropped; the
    interior band of any derived operator stays exact as long as the
    buffer covers the generator degree.
    """
    d = space.rep.spinor_dim
    M = space.cutoff
    rows, cols, vals = [], [], []
    if space.n == 1:
        if not isinstance(f, CircleModes):
            raise CatalogError("circle space needs CircleModes data")
        for l in f.modes:
            c = f.coeffs[l + f.cutoff]
            if abs(c) == 0:
                continue
            for k in range(-M, M + 1):
                if abs(k + l) > M:
                    continue
                rows.append(k + int(l) + M)
                cols.append(k + M)
                vals.append(c)
        mode_mat = sp.csr_matrix((vals, (rows, cols)), shape=(2 * M + 1, 2 * M + 1))
    else:
        if not isinstance(f, TorusModes):
            raise CatalogError("torus space needs TorusModes data")
        size = (2 * M + 1) ** 2
        for (l1, l2) in f.nonzero_modes():
            c = f.coeffs[l1 + f.cutoff, l2 + f.cutoff]
            for k1 in range(-M, M + 1):
                if abs(k1 + l1) > M:
                    continue
                for k2 in range(-M, M + 1):
                    if abs(k2 + l2) > M:
                        continue
                    rows.append((k1 + l1 + M) * (2 * M + 1) + (k2 + l2 + M))
                    cols.append((k1 + M) * (2 * M + 1) + (k2 + M))
                    vals.append(c)
        mode_mat = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    return sp.kron(mode_mat, sp.identity(d, format="csr"), format="csr")


def chirality_matrix(space: SpinorModeSpace) -> sp.csr_matrix:
    if space.rep.chirality is None:
        raise CatalogError("chirality needs an even-dimensional base")
    n_modes = len(space.mode_list)
    return sp.kron(sp.identity(n_modes, format="csr"), sp.csr_matrix(space.rep.chirality), format="csr")


# ---------------------------------------------------------------------------
# assembled Dirac operators


@dataclass(eq=False)
class TruncatedDirac:
    spec: DiracSpec
    matrix: sp.csr_matrix

    @property
    def space(self):
        return self.spec.space

    def dense(self):
        return self.matrix.toarray()

    def hermiticity_residual(self) -> float:
        diff = (self.matrix - self.matrix.getH()).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def eigenvalues(self) -> np.ndarray:
        """Analytic spectrum of the per-mode blocks, sorted ascending."""
        space = self.space
        vals = []
        for k in space.mode_list:
            w = space.freq(k)
            if space.n == 1:
                vals.append(w[0])
            else:
                r = float(np.hypot(w[0], w[1]))
                vals.extend([r, -r])
        return np.sort(np.asarray(vals))

    def interior_eigenvalues(self, buffer=DEFAULT_BUFFER) -> np.ndarray:
        space = self.space
        vals = []
        for k in space.interior_modes(buffer):
            w = space.freq(k)
            if space.n == 1:
                vals.append(w[0])
            else:
                r = float(np.hypot(w[0], w[1]))
                vals.extend([r, -r])
        return np.sort(np.asarray(vals))


def assemble_dirac(spec: DiracSpec) -> TruncatedDirac:
    """Sum of gamma(frame) x mode frequency over the truncation window.

    Validates Hermiticity (1e-14) and invariance against every lifted
    group element (1e-12); a failure of the latter is a lift/action
    mismatch and raises.
    """
    space = spec.space
    d = space.rep.spinor_dim
    n_modes = len(space.mode_list)
    blocks_rows, blocks_cols, blocks_vals = [], [], []
    for k in space.mode_list:
        w = space.freq(k)
        block = sum(w[i] * space.rep.gammas[i] for i in range(space.n))
        base = space.mode_index(k) * d
        for i in range(d):
            for j in range(d):
                v = block[i, j]
                if v != 0:
                    blocks_rows.append(base + i)
                    blocks_cols.append(base + j)
                    blocks_vals.append(v)
    D = sp.csr_matrix(
        (blocks_vals, (blocks_rows, blocks_cols)), shape=(n_modes * d, n_modes * d)
    )
    out = TruncatedDirac(spec, D)
    if out.hermiticity_residual() > 1e-14:
        raise CatalogError("assembled Dirac is not Hermitian")
    for g in spec.groupoid.group.elements:
        U = action_matrix(spec, g)
        res = _max_abs(D @ U - U @ D)
        if res > 1e-12:
            raise CatalogError(f"lift/action mismatch: [D, U({g!r})] residual {res:.2e}")
    return out


def _max_abs(mat) -> float:
    coo = sp.coo_matrix(mat)
    return float(np.max(np.abs(coo.data))) if coo.nnz else 0.0


def invariant_projector(spec: DiracSpec) -> sp.csr_matrix:
    """P = average of the lifted action matrices; needs a strict lift."""
    if not spec.lift.strict:
        raise CatalogError("invariant projector needs a strict (cocycle) lift")
    G = spec.groupoid.group
    P = None
    for g in G.elements:
        U = action_matrix(spec, g)
        P = U if P is None else P + U
    P = P * (1.0 / G.order)
    if _max_abs(P @ P - P) > 1e-12:
        raise CatalogError("projector does not square to itself")
    return sp.csr_matrix(P)


# ---------------------------------------------------------------------------
# orbifold integration


@dataclass
class Chart:
    """One orbifold chart: a localized finite group and a partition weight.

    The catalog charts are the whole base; different decompositions differ
    in their invariant partition functions.  ``principal_rank`` is the
    isotropy rank on the principal stratum.
    """

    name: str
    group_order: int
    principal_rank: int
    partition: object  # CircleModes | TorusModes | dict for finite bases

    @property
    def weight(self):
        return self.principal_rank / self.group_order


@dataclass
class OrbifoldMeasure:
    base: object  # FourierCircle | FourierTorus | FiniteSet
    charts: list

    def validate(self, groupoid: ActionGroupoid | None = None, tol=1e-10):
        if isinstance(self.base, FiniteSet):
            for x in self.base.points:
                total = sum(ch.partition[x] for ch in self.charts)
                if abs(total - 1.0) > tol:
                    raise CatalogError(f"partition of unity fails at {x!r}")
            return self
        total = None
        for ch in self.charts:
            vals = ch.partition.grid_values()
            total = vals if total is None else total + vals
            if groupoid is not None:
                for g in groupoid.group.elements:
                    moved = _partition_pullback(ch.partition, groupoid.iso[g])
                    if np.max(np.abs(moved.grid_values() - vals)) > tol:
                        raise CatalogError(
                            f"chart {ch.name!r} partition is not invariant under {g!r}"
                        )
        if np.max(np.abs(total - 1.0)) > tol:
            raise CatalogError("partition of unity does not sum to one")
        return self

    def volume_element(self):
        if isinstance(self.base, FourierCircle):
            return self.base.circumference
        if isinstance(self.base, FourierTorus):
            return self.base.circumferences[0] * self.base.circumferences[1]
        return 1.0  # counting measure


def _partition_pullback(p, iso):
    if isinstance(p, CircleModes):
        return p.rotate_pullback(iso.turns)
    return p.pullback(iso)


def uniform_measure(base, group_order, principal_rank, cutoff=None, name="whole") -> OrbifoldMeasure:
    """Single whole-base chart with the constant partition function."""
    if isinstance(base, FiniteSet):
        part = {x: 1.0 for x in base.points}
    elif isinstance(base, FourierCircle):
        part = CircleModes.mode(base, cutoff or base.mode_cutoff, 0)
    else:
        part = TorusModes.mode(base, cutoff or base.mode_cutoff, (0, 0))
    return OrbifoldMeasure(base, [Chart(name, group_order, principal_rank, part)])


def orbifold_integral(measure: OrbifoldMeasure, f) -> complex:
    """Chart-weighted integral sum_a (k_a/|G_a|) int rho_a f dvol.

    Chart integrals are grid means times the flat volume, exact for
    band-limited data; finite bases use counting measure.
    """
    if isinstance(measure.base, FiniteSet):
        total = 0.0
        for ch in measure.charts:
            total += ch.weight * sum(ch.partition[x] * f[x] for x in measure.base.points)
        return total
    vol = measure.volume_element()
    total = 0.0
    fv = f.grid_values() if not isinstance(f, np.ndarray) else f
    for ch in measure.charts:
        pv = ch.partition.grid_values()
        total = total + ch.weight * vol * np.mean(pv * fv)
    return complex(total)


def orbifold_inner(measure: OrbifoldMeasure, psi1, psi2) -> complex:
    """<psi1, psi2> as the orbifold integral of the pointwise pairing."""
    v1 = psi1.grid_values()
    v2 = psi2.grid_values()
    if v1.ndim == 1:
        pair = np.conj(v1) * v2
    else:
        pair = np.einsum("...i,...i->...", np.conj(v1), v2)
    return orbifold_integral(measure, pair)


# ---------------------------------------------------------------------------
# induced Dirac through a covering quotient


@dataclass
class InducedDirac:
    upstairs: TruncatedDirac
    downstairs: TruncatedDirac
    unitary: np.ndarray  # invariant modes -> downstairs modes
    invariant_modes: list
    down_twist: Fraction
    conjugation_residual: float
    branch_residual: float


def induced_dirac(cov: QuotientCovering, spec: DiracSpec) -> InducedDirac:
    """Quotient-circle Dirac with the unitary matching the invariant part.

    The downstairs twist is solved from the invariant spectrum, never
    assumed.  The unitary is the mode relabeling (k + t) = m (j + t');
    its conjugation residual against the downstairs Dirac is reported.
    """
    if spec.groupoid is not cov.upstairs:
        raise CatalogError("spec groupoid is not the covering's upstairs groupoid")
    if spec.groupoid.base.dim != 1:
        raise CatalogError("covering family is one-dimensional")
    up = assemble_dirac(spec)
    signs = {g: float(spec.lift.signs[g]) for g in spec.groupoid.group.elements}
    ks = invariant_mode_indices(cov, spec.twist[0], signs)
    tw = solve_downstairs_twist(cov, spec.twist[0], signs)
    m = cov.degree
    down_cut = max(8, max(abs(int((Fraction(k) + spec.twist[0]) / m - tw)) for k in ks))
    down_circle = FourierCircle(cov.downstairs.circumference, down_cut)
    down_group = trivial_groupoid(down_circle)
    down_lift = SpinLift(down_group, spec.lift.rep, {0: 1}, strict=True)
    down_spec = DiracSpec(down_group, down_lift, (tw,), down_cut)
    down = assemble_dirac(down_spec)

    U = np.zeros((2 * down_cut + 1, 2 * spec.cutoff + 1), dtype=complex)
    for k in ks:
        j = (Fraction(k) + spec.twist[0]) / m - tw
        j = int(j)
        if abs(j) <= down_cut:
            U[j + down_cut, k + spec.cutoff] = 1.0
    D_up = up.matrix.toarray()
    D_dn = down.matrix.toarray()
    conj = U @ D_up @ np.conj(U.T)
    mask = (np.abs(U) > 0).any(axis=1)
    residual = float(np.max(np.abs((conj - D_dn)[np.ix_(mask, mask)]))) if mask.any() else 0.0

    branch = _branch_agreement_residual(cov, spec, down_spec)
    return InducedDirac(
        upstairs=up,
        downstairs=down,
        unitary=U,
        invariant_modes=ks,
        down_twist=tw,
        conjugation_residual=residual,
        branch_residual=branch,
    )


def conjugated_multiplication_residual(
    ind: InducedDirac, f: CircleModes, f_down: CircleModes, buffer=DEFAULT_BUFFER
) -> float:
    """Residual of U mult(f) U* = mult(pushforward f) on the interior band.

    Together with the spectrum match this witnesses the full unitary
    equivalence of the two triples: the transported algebra action is the
    quotient algebra action.
    """
    up_op = mult_operator(ind.upstairs.space, f).toarray()
    down_op = mult_operator(ind.downstairs.space, f_down).toarray()
    U = ind.unitary
    conj = U @ up_op @ np.conj(U.T)
    down_cut = ind.downstairs.spec.cutoff
    keep = []
    for j in range(-down_cut, down_cut + 1):
        if abs(j) > down_cut - buffer:
            continue
        if np.abs(U[j + down_cut]).sum() > 0:
            keep.append(j + down_cut)
    keep = np.array(keep, dtype=int)
    if keep.size == 0:
        return 0.0
    diff = (conj - down_op)[np.ix_(keep, keep)]
    return float(np.max(np.abs(diff)))


def matched_interior_spectra(ind: InducedDirac, buffer=DEFAULT_BUFFER):
    """Invariant upstairs spectrum and downstairs spectrum on a shared window.

    The window is the smaller of the two interior-band edges, so both
    truncations are exact on it; the two sorted lists must agree
    elementwise for covering-family scenarios.
    """
    up_space = ind.upstairs.space
    dn_space = ind.downstairs.space
    edge = min(_interior_edge(up_space, buffer), _interior_edge(dn_space, buffer))
    up_vals = np.sort(
        [
            up_space.freq((k,))[0]
            for k in ind.invariant_modes
            if abs(up_space.freq((k,))[0]) <= edge + 1e-12
        ]
    )
    dn_vals = ind.downstairs.eigenvalues()
    dn_vals = np.sort(dn_vals[np.abs(dn_vals) <= edge + 1e-12])
    return up_vals, dn_vals


def _branch_agreement_residual(cov: QuotientCovering, spec: DiracSpec, down_spec: DiracSpec) -> float:
    """Compare local Dirac representatives through two covering branches."""
    signs = {g: float(spec.lift.signs[g]) for g in spec.groupoid.group.elements}
    rng = np.random.default_rng(3)
    zeta = CircleModes.random(
        down_spec.groupoid.base, down_spec.cutoff, rng, twist=down_spec.twist[0], degree=max(2, down_spec.cutoff // 2)
    )
    psi = pullback_modes_section(cov, zeta, up_twist=spec.twist[0])
    # the invariant extension matching branch 0; D psi is invariant again
    freqs = psi.frequencies().reshape(-1)
    dpsi = CircleModes(psi.circle, psi.cutoff, freqs * psi.coeffs, psi.twist)
    ys = down_spec.groupoid.base.grid()
    worst = 0.0
    L = spec.groupoid.base.circumference
    base = dpsi.evaluate(ys)
    for branch in range(cov.degree):
        g = cov.deck_element(0, branch)
        h = signs[g]
        # branch representative: the h(g)-rescaled invariant extension read
        # along the branch; scalar conjugation makes all branches agree
        vals = h * dpsi.evaluate(ys + branch * L / cov.degree)
        worst = max(worst, float(np.max(np.abs(vals - base))))
    return worst


# ---------------------------------------------------------------------------
# spectral triple reports


@dataclass
class SpectralTripleReport:
    label: str
    cutoff: int
    buffer: int
    hermiticity_residual: float
    eigenvalues: np.ndarray | None = None  # interior band, sorted
    commutator_norms: dict = field(default_factory=dict)
    commutator_drift: dict = field(default_factory=dict)
    frame_identity_residuals: dict = field(default_factory=dict)
    growth_exponent: float | None = None
    growth_target: int | None = None
    chirality_square_residual: float | None = None
    chirality_anticommutator: float | None = None
    chirality_commutators: dict = field(default_factory=dict)
    symmetry_residual: float | None = None
    representation_residual: float | None = None
    faithfulness_note: str = ""

    def as_dict(self):
        out = {
            "label": self.label,
            "cutoff": self.cutoff,
            "buffer": self.buffer,
            "hermiticity_residual": self.hermiticity_residual,
            "eigenvalues": [float(v) for v in self.eigenvalues]
            if self.eigenvalues is not None
            else None,
            "commutator_norms": dict(sorted(self.commutator_norms.items())),
            "commutator_drift": dict(sorted(self.commutator_drift.items())),
            "frame_identity_residuals": dict(sorted(self.frame_identity_residuals.items())),
        }
        for key in (
            "growth_exponent",
            "growth_target",
            "chirality_square_residual",
            "chirality_anticommutator",
            "symmetry_residual",
            "representation_residual",
        ):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.chirality_commutators:
            out["chirality_commutators"] = dict(sorted(self.chirality_commutators.items()))
        if self.faithfulness_note:
            out["faithfulness_note"] = self.faithfulness_note
        return out


def compress_interior(space: SpinorModeSpace, mat, buffer) -> np.ndarray:
    idx = space.interior_indices(buffer)
    sub = sp.csr_matrix(mat)[idx][:, idx]
    return sub.toarray()


def operator_norm(mat) -> float:
    arr = np.asarray(mat)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def interior_norm(space: SpinorModeSpace, mat, buffer) -> float:
    dim = mat.shape[0]
    if dim <= 4000:
        return operator_norm(compress_interior(space, mat, buffer))
    idx = space.interior_indices(buffer)
    sub = sp.csr_matrix(mat)[idx][:, idx]
    if sub.nnz == 0:
        return 0.0
    one = float(np.max(np.abs(sub).sum(axis=0)))
    inf = float(np.max(np.abs(sub).sum(axis=1)))
    return float(np.sqrt(one * inf))  # upper bound, tight enough for residuals


def growth_exponent(eigenvalues, lam_max, lam_min=None) -> float:
    """Least-squares slope of log N(lambda) against log lambda."""
    mags = np.sort(np.abs(np.asarray(eigenvalues)))
    lam_min = max(1.0, lam_max / 8.0) if lam_min is None else lam_min
    levels = np.unique(mags[(mags >= lam_min) & (mags <= lam_max)])
    if len(levels) < 3:
        raise CatalogError("not enough distinct eigenvalue levels for a growth fit")
    counts = np.searchsorted(mags, levels, side="right")
    slope = np.polyfit(np.log(levels), np.log(counts), 1)[0]
    return float(slope)


def generator_degree(f) -> int:
    return f.degree()


def _scalar_part(f):
    """The plain function content of a generator, when it has one.

    Bare mode data qualifies directly; a convolution element qualifies
    when it is supported on the identity component (its representation is
    then plain multiplication and the flat frame identity applies).
    """
    if isinstance(f, (CircleModes, TorusModes)):
        return f if f.fibre_shape == () and _is_untwisted(f) else None
    data = getattr(f, "data", None)
    groupoid = getattr(f, "groupoid", None)
    if isinstance(data, dict) and groupoid is not None and len(data) == 1:
        ((g, part),) = data.items()
        if g == groupoid.group.identity and isinstance(part, (CircleModes, TorusModes)):
            return part if part.fibre_shape == () and _is_untwisted(part) else None
    return None


def _frame_identity_rhs(space: SpinorModeSpace, f) -> sp.csr_matrix:
    """sum_i  mult(-i d_i f) x gamma_i, the flat-space commutator value."""
    terms = []
    if space.n == 1:
        df = f.derivative()
        terms.append((CircleModes(f.circle, f.cutoff, -1j * df.coeffs, f.twist), 0))
    else:
        for axis in range(2):
            fr = (2.0 * np.pi / space.base.circumferences[axis])
            coeffs = np.zeros_like(f.coeffs)
            for (l1, l2) in f.nonzero_modes():
                w = fr * (l1 if axis == 0 else l2)
                coeffs[l1 + f.cutoff, l2 + f.cutoff] = w * f.coeffs[l1 + f.cutoff, l2 + f.cutoff]
            terms.append((TorusModes(f.torus, f.cutoff, coeffs, f.twist), axis))
    total = None
    d = space.rep.spinor_dim
    for tf, axis in terms:
        scalar = mult_operator(space, tf)
        gamma = sp.kron(
            sp.identity(scalar.shape[0] // d, format="csr"),
            sp.csr_matrix(space.rep.gammas[axis]),
            format="csr",
        )
        term = scalar @ gamma
        total = term if total is None else total + term
    return total


def check_spectral_triple(
    spec: DiracSpec,
    generators,
    *,
    buffer=None,
    measure: OrbifoldMeasure | None = None,
    invariant_pairs=None,
    operator_builder=None,
    label="invariant-triple",
    growth_window=None,
) -> SpectralTripleReport:
    """Run the truncation-level spectral-triple checks.

    ``generators`` is a list of (name, band-limited function); they are
    represented by multiplication unless ``operator_builder(spec, gen)``
    supplies something else (the convolution module does).  Commutator
    norms are computed on the interior band at the spec cutoff and again
    at double cutoff to witness stability.
    """
    gens = list(generators)
    max_deg = max([generator_degree(f) for _, f in gens], default=0)
    if max_deg >= spec.cutoff:
        raise CatalogError(
            f"generator of degree {max_deg} is not representable at cutoff {spec.cutoff}"
        )
    buffer = max(DEFAULT_BUFFER, max_deg) if buffer is None else buffer
    dirac = assemble_dirac(spec)
    space = spec.space
    build = operator_builder or (lambda sp_, f: mult_operator(sp_.space, f))

    report = SpectralTripleReport(
        label=label,
        cutoff=spec.cutoff,
        buffer=buffer,
        hermiticity_residual=dirac.hermiticity_residual(),
        eigenvalues=dirac.interior_eigenvalues(buffer),
    )

    double = spec.with_cutoff(2 * spec.cutoff)
    dirac2 = assemble_dirac(double)
    for name, f in gens:
        op = build(spec, f)
        comm = dirac.matrix @ op - op @ dirac.matrix
        norm1 = interior_norm(space, comm, buffer)
        f2 = _regrade(f, double)
        op2 = build(double, f2)
        comm2 = dirac2.matrix @ op2 - op2 @ dirac2.matrix
        norm2 = interior_norm(double.space, comm2, buffer)
        report.commutator_norms[name] = norm1
        report.commutator_drift[name] = abs(norm2 - norm1) / max(1e-30, abs(norm1)) if norm1 else abs(norm2)
        scalar = _scalar_part(f)
        if scalar is not None:
            rhs = _frame_identity_rhs(space, scalar)
            resid = interior_norm(space, dirac.matrix @ op - op @ dirac.matrix - rhs, buffer)
            report.frame_identity_residuals[name] = resid

    lam_edge = _interior_edge(space, buffer)
    window = growth_window or (None, lam_edge)
    report.growth_exponent = growth_exponent(dirac.eigenvalues(), window[1], window[0])
    report.growth_target = space.n

    if space.rep.chirality is not None:
        omega = chirality_matrix(space)
        eye = sp.identity(omega.shape[0], format="csr")
        report.chirality_square_residual = _max_abs(omega @ omega - eye)
        report.chirality_anticommutator = interior_norm(
            space, dirac.matrix @ omega + omega @ dirac.matrix, buffer
        )
        for name, f in gens:
            op = build(spec, f)
            report.chirality_commutators[name] = interior_norm(
                space, omega @ op - op @ omega, buffer
            )

    if measure is not None and invariant_pairs:
        worst = 0.0
        for psi1, psi2 in invariant_pairs:
            d1 = _apply_dirac_modes(space, psi1)
            d2 = _apply_dirac_modes(space, psi2)
            lhs = orbifold_inner(measure, d1, psi2)
            rhs = orbifold_inner(measure, psi1, d2)
            worst = max(worst, abs(lhs - rhs))
        report.symmetry_residual = worst
    return report


def _interior_edge(space: SpinorModeSpace, buffer) -> float:
    if space.n == 1:
        return (2.0 * np.pi / space.base.circumference) * (space.cutoff - buffer)
    return min(
        (2.0 * np.pi / L) * (space.cutoff - buffer) for L in space.base.circumferences
    )


def _is_untwisted(f) -> bool:
    tw = f.twist
    if isinstance(tw, tuple):
        return all(t == 0 for t in tw)
    return tw == 0


def _regrade(f, spec2: DiracSpec):
    """Re-express a generator over the doubled-cutoff base space."""
    base = spec2.groupoid.base
    if isinstance(f, CircleModes):
        out = CircleModes.zero(base, f.cutoff, f.fibre_shape, f.twist)
        out.coeffs[...] = f.coeffs
        return out
    if isinstance(f, TorusModes):
        out = TorusModes.zero(base, f.cutoff, f.fibre_shape, f.twist)
        out.coeffs[...] = f.coeffs
        return out
    data = getattr(f, "data", None)
    if isinstance(data, dict):
        return type(f)(spec2.groupoid, {g: _regrade(p, spec2) for g, p in data.items()})
    raise CatalogError(f"cannot regrade generator {f!r}")


def _apply_dirac_modes(space: SpinorModeSpace, psi):
    """Apply the analytic Dirac to band-limited spinor data (circle)."""
    if space.n != 1:
        raise CatalogError("mode-level Dirac application is one-dimensional here")
    freqs = psi.frequencies().reshape((-1,) + (1,) * len(psi.fibre_shape))
    return CircleModes(psi.circle, psi.cutoff, freqs * psi.coeffs, psi.twist)


# ---------------------------------------------------------------------------
# tangent cocycles and spin-structure transport


def tangent_cocycle(cech: CechActionGroupoid) -> dict:
    """Differentials of the localized action, indexed by Cech arrows."""
    return {
        (g, a, b): cech.parent.iso[g].differential()
        for (g, a, b) in cech.arrows
    }


def induced_tangent_cocycle(cov: QuotientCovering, cover_down, branch_of_sheet) -> dict:
    """Tangent cocycle transported to the quotient circle's Cech cover.

    Downstairs arrows are overlap germs (i, j); the associated upstairs
    deck elements are computed per overlap sample point and must give a
    single differential per arrow (rotations: always [[1]]).
    """
    n = cov.downstairs.grid_size
    pts = [Fraction(t, n) for t in range(n)]
    entries = {}
    for i in cover_down.indices():
        for j in cover_down.indices():
            overlap = [t for t in pts if cover_down.member(i, t) and cover_down.member(j, t)]
            if not overlap:
                continue
            vals = []
            for t in overlap:
                g = cov.deck_element(branch_of_sheet[j], branch_of_sheet[i])
                vals.append(cov.upstairs.iso[g].differential())
            first = vals[0]
            if not all(np.array_equal(v, first) for v in vals):
                raise CatalogError(f"induced tangent entry not constant on overlap ({i},{j})")
            entries[(i, j)] = first
    return entries


def downstairs_tangent_cocycle(cov: QuotientCovering, cover_down) -> dict:
    """Unit-groupoid tangent data: identity germs on every overlap."""
    n = cov.downstairs.grid_size
    pts = [Fraction(t, n) for t in range(n)]
    entries = {}
    for i in cover_down.indices():
        for j in cover_down.indices():
            if any(cover_down.member(i, t) and cover_down.member(j, t) for t in pts):
                entries[(i, j)] = np.array([[1.0]])
    return entries


def spin_structure_transport(cov: QuotientCovering, lifts, twist=Fraction(0)) -> dict:
    """Map each strict upstairs lift to the downstairs twist it induces."""
    out = {}
    for lift in lifts:
        signs = {g: float(lift.signs[g]) for g in cov.upstairs.group.elements}
        out[lift.describe()] = solve_downstairs_twist(cov, twist, signs)
    return out
