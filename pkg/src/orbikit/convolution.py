"""The convolution algebra of a groupoid with the counting Haar system.

Elements are finitely supported functions on arrows (finite flavor) or,
for Fourier action groupoids, one band-limited function on the base per
group element, read at the arrow's source.  The product is fixed by the
representation law: with the representation

    (f . psi)(x) = sum over arrows sigma into x of
                   f(sigma) * transport(sigma) psi(src sigma)

the product (f1 * f2)(sigma) = sum over factorizations sigma = tau kappa
of f1(tau) f2(kappa) satisfies act(f1 * f2) = act(f1) o act(f2) with no
opposite-algebra twist.  Worked three-arrow example (translation action,
arrows written (a, y): y -> y + a):

    delta_(1,0) * delta_(1,2) = delta_(2,2)   since (1, 0) o (1, 2)
    composes (first (1,2): 2 -> 0, then (1,0): 0 -> 1) and
    delta_(1,0) * delta_(1,1) = 0             (endpoints do not meet).

The counting system makes every lambda-density of a kernel witness equal
to one, so kernel elements are exact difference vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import sympy

from .bases import BandLimitError, CatalogError, CircleModes, TorusModes
from .cocycles import ReconstructedBundle, trivial_bundle
from .groupoids import ActionGroupoid, FiniteGroupoid, is_effective
from .spectral import DiracSpec, action_matrix, check_spectral_triple, interior_norm, mult_operator
from .transport import BundleSection


@dataclass(eq=False)
class ConvolutionElement:
    groupoid: object  # FiniteGroupoid | ActionGroupoid
    data: dict  # finite: arrow -> value; action: group element -> mode data

    @property
    def flavor(self):
        return "finite" if isinstance(self.groupoid, FiniteGroupoid) else "fourier"

    def degree(self):
        if self.flavor == "finite":
            return 0
        return max((f.degree() for f in self.data.values()), default=0)


def delta(G, arrow, value=1.0) -> ConvolutionElement:
    return ConvolutionElement(G, {arrow: value})


def unit_element(G: FiniteGroupoid) -> ConvolutionElement:
    return ConvolutionElement(G, {G.unit[x]: 1.0 for x in G.objects})


def fourier_element(G: ActionGroupoid, parts: dict) -> ConvolutionElement:
    """parts: group element -> CircleModes | TorusModes on the base."""
    return ConvolutionElement(G, dict(parts))


def fourier_unit(G: ActionGroupoid, cutoff=None) -> ConvolutionElement:
    base = G.base
    cutoff = base.mode_cutoff if cutoff is None else cutoff
    if base.dim == 1:
        one = CircleModes.mode(base, cutoff, 0)
    else:
        one = TorusModes.mode(base, cutoff, (0, 0))
    return fourier_element(G, {G.group.identity: one})


# ---------------------------------------------------------------------------
# the product


def convolve(f1: ConvolutionElement, f2: ConvolutionElement) -> ConvolutionElement:
    if f1.groupoid is not f2.groupoid:
        raise CatalogError("convolution factors live on different groupoids")
    G = f1.groupoid
    if f1.flavor == "finite":
        out = {}
        for tau, v1 in f1.data.items():
            for kappa, v2 in f2.data.items():
                if G.src[tau] != G.tgt[kappa]:
                    continue
                arrow = G.compose(tau, kappa)
                out[arrow] = out.get(arrow, 0.0) + v1 * v2
        return ConvolutionElement(G, {a: v for a, v in out.items() if v != 0})
    # action flavor: (f1 * f2)_g = sum over g = g1 g2 of (f1_g1 o phi_g2) f2_g2
    group = G.group
    out = {}
    cutoff = max(
        [f.cutoff for f in f1.data.values()] + [f.cutoff for f in f2.data.values()]
    )
    if f1.degree() + f2.degree() > cutoff:
        raise BandLimitError("convolution leaves the declared band")
    for g1, p1 in f1.data.items():
        for g2, p2 in f2.data.items():
            g = group.mul(g1, g2)
            moved = _compose_with_action(p1, G, g2)
            term = moved.mul(p2)
            term = _with_cutoff_any(term, cutoff)
            if g in out:
                out[g] = out[g] + term
            else:
                out[g] = term
    return ConvolutionElement(G, out)


def _compose_with_action(p, G: ActionGroupoid, g):
    """p o phi_g as mode data (exact pullback under the isometry)."""
    iso = G.iso[g]
    if isinstance(p, CircleModes):
        return p.rotate_pullback(iso.turns)
    return p.pullback(iso)


def _with_cutoff_any(p, cutoff):
    if isinstance(p, CircleModes):
        return p.with_cutoff(cutoff)
    out = TorusModes.zero(p.torus, cutoff, p.fibre_shape, p.twist)
    lo = min(p.cutoff, cutoff)
    src = p.coeffs[p.cutoff - lo : p.cutoff + lo + 1, p.cutoff - lo : p.cutoff + lo + 1]
    out.coeffs[cutoff - lo : cutoff + lo + 1, cutoff - lo : cutoff + lo + 1] = src
    return out


# ---------------------------------------------------------------------------
# the representation


def act(f: ConvolutionElement, psi: BundleSection) -> BundleSection:
    """Counting-measure representation on sections of a finite bundle."""
    G = f.groupoid
    bundle = psi.bundle
    if bundle.groupoid is not G:
        raise CatalogError("section bundle lives on a different groupoid")
    values = {x: np.zeros(bundle.rank, dtype=complex) for x in G.objects}
    for sigma, v in f.data.items():
        x = G.tgt[sigma]
        transport = np.asarray(bundle.action[sigma], dtype=complex)
        values[x] = values[x] + v * (transport @ psi.vector(G.src[sigma]))
    return BundleSection(bundle, values)


def act_modes(spec: DiracSpec, f: ConvolutionElement, psi):
    """Representation on band-limited spinor data over an action groupoid."""
    G = spec.groupoid
    if f.groupoid is not G:
        raise CatalogError("element lives on a different groupoid")
    if f.degree() + psi.degree() > psi.cutoff:
        raise BandLimitError("generator degree plus section degree exceeds the cutoff")
    total = None
    for g, part in f.data.items():
        term = part.mul(psi)
        term = _with_cutoff_any(term, psi.cutoff)
        # transport along g: lift sign/spin matrix times pullback by g^{-1}
        S = spec.lift.matrix(g)
        iso = G.iso[g].inverse()
        if isinstance(term, CircleModes):
            moved = term.rotate_pullback(iso.turns)
        else:
            moved = term.pullback(iso)
        if moved.fibre_shape == ():
            moved = moved * complex(S[0, 0])
        else:
            moved = _apply_spin(moved, S)
        total = moved if total is None else total + moved
    return total


def _apply_spin(modes, S):
    coeffs = np.einsum("...j,ij->...i", modes.coeffs, np.asarray(S))
    if isinstance(modes, CircleModes):
        return CircleModes(modes.circle, modes.cutoff, coeffs, modes.twist)
    return TorusModes(modes.torus, modes.cutoff, coeffs, modes.twist)


def representation_matrix(spec: DiracSpec, f: ConvolutionElement) -> sp.csr_matrix:
    """pi(f) = sum_g U(g) mult(f_g) on the truncated spinor space."""
    if f.groupoid is not spec.groupoid:
        raise CatalogError("element lives on a different groupoid")
    space = spec.space
    total = None
    for g, part in f.data.items():
        term = action_matrix(spec, g) @ mult_operator(space, part)
        total = term if total is None else total + term
    if total is None:
        dim = space.dim
        total = sp.csr_matrix((dim, dim), dtype=complex)
    return sp.csr_matrix(total)


# ---------------------------------------------------------------------------
# faithfulness


@dataclass
class FaithfulnessReport:
    faithful: bool
    kernel_dim: int
    witness: ConvolutionElement | None
    matches_effectiveness: bool
    detail: str = ""


def faithfulness_probe(G, bundle_or_spec=None, generator_degree=2) -> FaithfulnessReport:
    """Kernel of the representation, exactly (finite) or within band.

    Finite flavor solves the exact rational nullspace of the linear map
    sending an element to its action matrix.  Fourier flavor probes the
    span of single-mode elements per group element up to
    ``generator_degree``.  The outcome is compared against effectiveness.
    """
    effective, _ = is_effective(G)
    if isinstance(G, FiniteGroupoid):
        bundle = bundle_or_spec or trivial_bundle(G, 1)
        return _finite_probe(G, bundle, effective)
    if isinstance(G, ActionGroupoid):
        if not isinstance(bundle_or_spec, DiracSpec):
            raise CatalogError("fourier probe needs a DiracSpec")
        return _fourier_probe(G, bundle_or_spec, generator_degree, effective)
    raise CatalogError(f"unsupported groupoid {G!r}")


def _finite_probe(G: FiniteGroupoid, bundle: ReconstructedBundle, effective) -> FaithfulnessReport:
    k = bundle.rank
    n = len(G.objects)
    index = {x: i for i, x in enumerate(G.objects)}
    cols = []
    for sigma in G.arrows:
        mat = np.zeros((n * k, n * k))
        transport = np.asarray(bundle.action[sigma], dtype=float)
        r, c = index[G.tgt[sigma]], index[G.src[sigma]]
        mat[r * k : r * k + k, c * k : c * k + k] = transport
        cols.append(mat.reshape(-1))
    A = sympy.Matrix([[sympy.nsimplify(v, rational=True) for v in row] for row in np.array(cols).T])
    null = A.nullspace()
    kernel_dim = len(null)
    witness = None
    if null:
        vec = null[0]
        data = {
            a: complex(vec[i]) for i, a in enumerate(G.arrows) if vec[i] != 0
        }
        witness = ConvolutionElement(G, data)
    return FaithfulnessReport(
        faithful=kernel_dim == 0,
        kernel_dim=kernel_dim,
        witness=witness,
        matches_effectiveness=(kernel_dim == 0) == effective,
        detail=f"exact rational nullspace over {len(G.arrows)} arrows",
    )


def _fourier_probe(G: ActionGroupoid, spec: DiracSpec, degree, effective) -> FaithfulnessReport:
    base = G.base
    params = []
    for g in G.group.elements:
        if base.dim == 1:
            for l in range(-degree, degree + 1):
                params.append((g, (l,)))
        else:
            for l1 in range(-degree, degree + 1):
                for l2 in range(-degree, degree + 1):
                    params.append((g, (l1, l2)))
    space = spec.space
    # a kernel element of the full operator also kills the interior block,
    # so solving on the block and verifying candidates on the full matrix
    # is sound in both directions
    idx = space.interior_indices(max(2, spec.cutoff - degree - 2))
    ops = []
    cols = []
    for g, l in params:
        if base.dim == 1:
            part = CircleModes.mode(base, base.mode_cutoff, l[0])
        else:
            part = TorusModes.mode(base, base.mode_cutoff, l)
        op = representation_matrix(spec, fourier_element(G, {g: part}))
        ops.append(op)
        cols.append(op[idx][:, idx].toarray().reshape(-1))
    A = np.array(cols).T
    _, s, vh = np.linalg.svd(A, full_matrices=False)
    tol = 1e-10 * (s[0] if len(s) else 1.0)
    candidates = [vh[i] for i in range(len(s)) if s[i] < tol]
    kernel_vectors = []
    for vec in candidates:
        combo = None
        for c, op in zip(vec, ops):
            term = complex(c) * op
            combo = term if combo is None else combo + term
        combo = sp.coo_matrix(combo)
        resid = float(np.max(np.abs(combo.data))) if combo.nnz else 0.0
        if resid <= 1e-9:
            kernel_vectors.append(vec)
    kernel_dim = len(kernel_vectors)
    witness = None
    if kernel_vectors:
        vec = kernel_vectors[0]
        data = {}
        for (g, l), c in zip(params, vec):
            if abs(c) < 1e-9:
                continue
            if base.dim == 1:
                part = CircleModes.mode(base, base.mode_cutoff, l[0], amplitude=c)
            else:
                part = TorusModes.mode(base, base.mode_cutoff, l, amplitude=c)
            if g in data:
                data[g] = data[g] + part
            else:
                data[g] = part
        witness = fourier_element(G, data)
    return FaithfulnessReport(
        faithful=kernel_dim == 0,
        kernel_dim=kernel_dim,
        witness=witness,
        matches_effectiveness=(kernel_dim == 0) == effective,
        detail=f"band-limited probe, degree {degree}, smallest singular value "
        f"{float(s[-1]) if len(s) else float('nan'):.3e}",
    )


# ---------------------------------------------------------------------------
# the convolution spectral triple


def _ensure_element(spec: DiracSpec, f) -> ConvolutionElement:
    """Wrap bare mode data as a unit-component element of the right groupoid."""
    if isinstance(f, ConvolutionElement):
        return f
    return fourier_element(spec.groupoid, {spec.groupoid.group.identity: f})


def convolution_triple_report(spec: DiracSpec, generators, *, buffer=None, label="convolution-triple"):
    """Spectral-triple checks with pi = the convolution representation.

    Adds the representation-law residual over generator pairs and an
    effectiveness note (a non-effective groupoid still produces a report,
    flagged as a non-faithful representation).  The chirality commutators
    of the shared report double as the even-structure check: the induced
    chirality must commute with every represented generator.
    """
    effective, _ = is_effective(spec.groupoid)
    elements = [(name, _ensure_element(spec, f)) for name, f in generators]
    report = check_spectral_triple(
        spec,
        elements,
        buffer=buffer,
        operator_builder=lambda sp_, f: representation_matrix(sp_, _ensure_element(sp_, f)),
        label=label,
    )
    space = spec.space
    worst = 0.0
    for _, f1 in elements:
        for _, f2 in elements:
            if f1.degree() + f2.degree() > spec.cutoff:
                continue
            lhs = representation_matrix(spec, convolve(f1, f2))
            rhs = representation_matrix(spec, f1) @ representation_matrix(spec, f2)
            worst = max(worst, interior_norm(space, lhs - rhs, report.buffer))
    report.representation_residual = worst
    if not effective:
        report.faithfulness_note = "representation not faithful (groupoid not effective)"
    return report
