from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbikit.bases import BandLimitError, CircleModes, FourierCircle, FourierTorus, TorusModes
from orbikit.clifford import build_clifford, projective_lift, trivial_lift
from orbikit.cocycles import trivial_bundle
from orbikit.convolution import (
    ConvolutionElement,
    act,
    act_modes,
    convolve,
    convolution_triple_report,
    delta,
    faithfulness_probe,
    fourier_element,
    fourier_unit,
    representation_matrix,
    unit_element,
)
from orbikit.groupoids import (
    FiniteGroup,
    cyclic_translation_groupoid,
    group_groupoid,
    negation_torus_groupoid,
    rotation_groupoid,
    trivial_groupoid,
)
from orbikit.clifford import SpinLift
from orbikit.spectral import DiracSpec
from orbikit.transport import BundleSection


def z2():
    return group_groupoid(FiniteGroup.cyclic(2))


def rotation_spec(m=2, M=8, signs=None):
    G = rotation_groupoid(m, FourierCircle(mode_cutoff=M))
    rep = build_clifford(1)
    lift = trivial_lift(G, rep) if signs is None else SpinLift(G, rep, dict(signs), True)
    return DiracSpec(G, lift, (Fraction(0),), M)


# -- the product


def test_group_algebra_of_z2():
    G = z2()
    d = delta(G, 1)
    prod = convolve(d, d)
    assert prod.data == {0: 1.0}


def test_translation_groupoid_delta_product():
    G = cyclic_translation_groupoid(6, 3)
    for (a, y) in G.arrows:
        for (b, z) in G.arrows:
            prod = convolve(delta(G, (a, y)), delta(G, (b, z)))
            if y == (z + b) % 3:
                assert prod.data == {((a + b) % 6, z): 1.0}
            else:
                assert prod.data == {}


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_associativity_on_random_triples(data):
    G = cyclic_translation_groupoid(6, 3)
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    elements = []
    for _ in range(3):
        support = rng.choice(len(G.arrows), size=4, replace=False)
        el = ConvolutionElement(
            G,
            {G.arrows[i]: complex(rng.standard_normal(), rng.standard_normal()) for i in support},
        )
        elements.append(el)
    f1, f2, f3 = elements
    lhs = convolve(convolve(f1, f2), f3)
    rhs = convolve(f1, convolve(f2, f3))
    keys = set(lhs.data) | set(rhs.data)
    for k in keys:
        assert lhs.data.get(k, 0) == pytest.approx(rhs.data.get(k, 0), abs=1e-12)


def test_unit_element_is_neutral():
    G = cyclic_translation_groupoid(6, 3)
    e = unit_element(G)
    f = ConvolutionElement(G, {(1, 0): 2.0, (4, 2): -1.0j})
    for prod in (convolve(e, f), convolve(f, e)):
        assert set(prod.data) == set(f.data)
        for k in f.data:
            assert prod.data[k] == pytest.approx(f.data[k])


# -- the representation (finite)


def test_delta_sum_acts_as_twice_identity_on_z2_point():
    G = z2()
    bundle = trivial_bundle(G, 1)
    psi = BundleSection(bundle, {"*": np.array([1.5 + 0.5j])})
    f = ConvolutionElement(G, {0: 1.0, 1: 1.0})
    out = act(f, psi)
    assert np.allclose(out.vector("*"), 2.0 * psi.vector("*"))


def test_unit_acts_as_identity():
    G = cyclic_translation_groupoid(6, 3)
    bundle = trivial_bundle(G, 1)
    rng = np.random.default_rng(0)
    psi = BundleSection(bundle, {y: rng.standard_normal(1) for y in G.objects})
    out = act(unit_element(G), psi)
    for y in G.objects:
        assert np.allclose(out.vector(y), psi.vector(y))


def test_representation_law_exact_finite():
    G = cyclic_translation_groupoid(6, 3)
    bundle = trivial_bundle(G, 1)
    rng = np.random.default_rng(1)
    f1 = ConvolutionElement(G, {a: complex(*rng.standard_normal(2)) for a in G.arrows[:7]})
    f2 = ConvolutionElement(G, {a: complex(*rng.standard_normal(2)) for a in G.arrows[5:11]})
    psi = BundleSection(bundle, {y: rng.standard_normal(1) + 1j * rng.standard_normal(1) for y in G.objects})
    lhs = act(convolve(f1, f2), psi)
    rhs = act(f1, act(f2, psi))
    for y in G.objects:
        assert np.allclose(lhs.vector(y), rhs.vector(y), atol=1e-12)


# -- the representation (Fourier)


def test_rotation_element_acts_by_shifted_evaluation():
    spec = rotation_spec(2, 8)
    G = spec.groupoid
    base = G.base
    one = CircleModes.mode(base, 8, 0)
    f = fourier_element(G, {1: one})  # supported on the rotation component
    rng = np.random.default_rng(4)
    psi = CircleModes.random(base, 8, rng, degree=4)
    out = act_modes(spec, f, psi)
    xs = base.grid()
    expected = psi.evaluate(xs - np.pi)  # transport pulls back along the rotation
    assert np.max(np.abs(out.evaluate(xs) - expected)) <= 1e-10


def test_fourier_unit_acts_as_identity():
    spec = rotation_spec(2, 8)
    psi = CircleModes.random(spec.groupoid.base, 8, np.random.default_rng(6), degree=5)
    out = act_modes(spec, fourier_unit(spec.groupoid), psi)
    assert np.max(np.abs(out.coeffs - psi.coeffs)) <= 1e-12


def test_band_limit_overflow_raises():
    spec = rotation_spec(2, 8)
    base = spec.groupoid.base
    f = fourier_element(spec.groupoid, {0: CircleModes.mode(base, 8, 6)})
    psi = CircleModes.mode(base, 8, 5)
    with pytest.raises(BandLimitError):
        act_modes(spec, f, psi)


def test_representation_matrix_matches_act_modes():
    spec = rotation_spec(2, 8)
    base = spec.groupoid.base
    parts = {
        0: CircleModes.mode(base, 8, 2, amplitude=0.7),
        1: CircleModes.mode(base, 8, -1, amplitude=1.2j),
    }
    f = fourier_element(spec.groupoid, parts)
    rng = np.random.default_rng(9)
    psi = CircleModes.random(base, 8, rng, degree=5)
    out = act_modes(spec, f, psi)
    mat = representation_matrix(spec, f).toarray()
    vec = mat @ psi.coeffs
    # interior modes agree; the matrix truncates at the window edge
    for k in range(-6, 7):
        assert abs(vec[k + 8] - out.coeffs[k + 8]) <= 1e-12


# -- faithfulness


def test_kernel_witness_for_z2_point():
    G = z2()
    rep = faithfulness_probe(G)
    assert not rep.faithful
    assert rep.matches_effectiveness
    w = rep.witness.data
    assert set(w) == {0, 1}
    assert w[0] == pytest.approx(-w[1])


def test_kernel_witness_for_translation_groupoid():
    G = cyclic_translation_groupoid(6, 3)
    rep = faithfulness_probe(G)
    assert not rep.faithful
    assert rep.kernel_dim == 9  # pairs of arrows acting identically
    assert rep.matches_effectiveness
    # the witness pairs arrows of equal germ: a and a+3 at the same point
    w = rep.witness.data
    assert sum(abs(v) for v in w.values()) > 0
    germs = {((a % 3), y) for (a, y) in w}
    assert len(germs) == 1


def test_unit_groupoid_is_faithful():
    from orbikit.groupoids import unit_groupoid

    G = unit_groupoid(("p", "q"))
    rep = faithfulness_probe(G)
    assert rep.faithful and rep.kernel_dim == 0 and rep.matches_effectiveness


def test_effective_rotation_circle_zero_kernel():
    spec = rotation_spec(2, 8)
    rep = faithfulness_probe(spec.groupoid, spec, generator_degree=2)
    assert rep.faithful
    assert rep.matches_effectiveness


def test_noneffective_rotation_circle_kernel_witness():
    G = rotation_groupoid(4, FourierCircle(mode_cutoff=8), through="1/2")
    lift = SpinLift(G, build_clifford(1), {g: 1 for g in G.group.elements}, True)
    spec = DiracSpec(G, lift, (Fraction(0),), 8)
    rep = faithfulness_probe(G, spec, generator_degree=1)
    assert not rep.faithful
    assert rep.matches_effectiveness
    assert rep.witness is not None
    # witness combines the two elements acting by the same rotation
    assert len(rep.witness.data) >= 2


# -- convolution spectral triples


def test_commutator_norm_of_unit_component_exponential():
    spec = rotation_spec(2, 12)
    base = spec.groupoid.base
    f = fourier_element(spec.groupoid, {0: CircleModes.mode(base, 12, 2)})
    report = convolution_triple_report(spec, [("e2", f)])
    assert report.commutator_norms["e2"] == pytest.approx(2.0, abs=1e-12)
    assert report.frame_identity_residuals["e2"] <= 1e-12
    assert report.representation_residual <= 1e-12
    assert report.faithfulness_note == ""


def test_unit_generator_commutes():
    spec = rotation_spec(2, 8)
    report = convolution_triple_report(spec, [("unit", fourier_unit(spec.groupoid))])
    assert report.commutator_norms["unit"] == 0.0
    assert report.representation_residual <= 1e-12


def test_pillowcase_convolution_triple_even_structure():
    M = 12
    G = negation_torus_groupoid(FourierTorus((2 * np.pi, 2 * np.pi), M))
    rep2 = build_clifford(2)
    spec = DiracSpec(G, projective_lift(G, rep2), (Fraction(0), Fraction(0)), M)
    base = G.base
    sym = TorusModes.zero(base, M)
    sym.coeffs[1 + M, 0 + M] = 0.5
    sym.coeffs[-1 + M, 0 + M] = 0.5  # cos(x1), negation invariant
    flip_part = TorusModes.mode(base, M, (0, 0))
    gens = [
        ("cos10", fourier_element(G, {0: sym})),
        ("flip", fourier_element(G, {1: flip_part})),
    ]
    report = convolution_triple_report(spec, gens, label="pillowcase-convolution")
    assert report.chirality_square_residual == 0.0
    assert report.chirality_anticommutator <= 1e-12
    assert max(report.chirality_commutators.values()) <= 1e-12
    assert abs(report.growth_exponent - 2.0) / 2.0 <= 0.15
    assert report.faithfulness_note == ""  # negation action is effective


def test_noneffective_scenario_is_flagged():
    G = rotation_groupoid(4, FourierCircle(mode_cutoff=8), through="1/2")
    lift = SpinLift(G, build_clifford(1), {g: 1 for g in G.group.elements}, True)
    spec = DiracSpec(G, lift, (Fraction(0),), 8)
    report = convolution_triple_report(spec, [("unit", fourier_unit(G))])
    assert "not faithful" in report.faithfulness_note


def test_kernel_dimension_invariant_under_two_morphisms():
    from orbikit.cocycles import induced_bundle, reconstruct_bundle, sign_cocycle
    from orbikit.morita import Bitorsor, double_cover_bitorsor

    theta, xi, b = double_cover_bitorsor(3)
    shift = {q: (q + 2) % 6 for q in b.carrier}
    b2 = Bitorsor(
        left=theta, right=xi,
        carrier=tuple(shift[q] for q in b.carrier),
        rho={shift[q]: b.rho[q] for q in b.carrier},
        alpha={shift[q]: b.alpha[q] for q in b.carrier},
        left_act={(s, shift[q]): shift[v] for (s, q), v in b.left_act.items()},
        right_act={(shift[q], t): shift[v] for (q, t), v in b.right_act.items()},
        name="relabeled",
    )
    sign = reconstruct_bundle(sign_cocycle(theta, lambda a: -1 if a == 1 else 1))
    dims = []
    for phi in (b, b2):
        bundle = induced_bundle(phi, sign)
        dims.append(faithfulness_probe(xi, bundle).kernel_dim)
    assert dims[0] == dims[1]
