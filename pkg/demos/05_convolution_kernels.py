"""Convolution algebras, their representations, and faithfulness.

Counting-measure convolution on arrows represents on bundle sections; the
representation has a kernel exactly when two distinct arrows share a
germ.  Both directions are shown: exact kernel witnesses for the
two-element group over a point and the translation groupoid, and an
empty kernel for the effective half-turn rotation.
"""

from fractions import Fraction

import numpy as np

from orbikit.bases import FourierCircle
from orbikit.clifford import build_clifford, trivial_lift
from orbikit.cocycles import trivial_bundle
from orbikit.convolution import (
    ConvolutionElement,
    act,
    convolve,
    faithfulness_probe,
    unit_element,
)
from orbikit.groupoids import (
    FiniteGroup,
    cyclic_translation_groupoid,
    group_groupoid,
    is_effective,
    rotation_groupoid,
)
from orbikit.spectral import DiracSpec
from orbikit.transport import BundleSection

G = cyclic_translation_groupoid(6, 3)
rng = np.random.default_rng(0)
f1 = ConvolutionElement(G, {a: complex(*rng.standard_normal(2)) for a in G.arrows[:5]})
f2 = ConvolutionElement(G, {a: complex(*rng.standard_normal(2)) for a in G.arrows[4:9]})
bundle = trivial_bundle(G, 1)
psi = BundleSection(bundle, {y: rng.standard_normal(1) for y in G.objects})
lhs = act(convolve(f1, f2), psi)
rhs = act(f1, act(f2, psi))
worst = max(np.max(np.abs(lhs.vector(y) - rhs.vector(y))) for y in G.objects)
print(f"representation law residual on random elements: {worst:.2e}")
print("unit element acts as the identity:",
      all(np.allclose(act(unit_element(G), psi).vector(y), psi.vector(y)) for y in G.objects))

print("\n-- kernels and effectiveness --")
for name, H in (
    ("two-element group over a point", group_groupoid(FiniteGroup.cyclic(2))),
    ("translation groupoid Z6 x Z3", G),
):
    rep = faithfulness_probe(H)
    print(f"{name}: effective={is_effective(H)[0]}, faithful={rep.faithful}, "
          f"kernel dim {rep.kernel_dim}")
    if rep.witness:
        terms = ", ".join(
            f"{v.real:+.0f}*delta[{a}]"
            for a, v in sorted(rep.witness.data.items(), key=repr)
        )
        print(f"  witness: {terms}")

R = rotation_groupoid(2, FourierCircle(mode_cutoff=8))
spec = DiracSpec(R, trivial_lift(R, build_clifford(1)), (Fraction(0),), 8)
rep = faithfulness_probe(R, spec, generator_degree=2)
print(f"half-turn rotation circle: effective={is_effective(R)[0]}, "
      f"faithful={rep.faithful} ({rep.detail})")
