"""Bitorsors between groupoids: verification, composition, localization.

A generalized homomorphism from a left groupoid (arrows Theta over X) to a
right groupoid (arrows Xi over Y) is a carrier Q with anchors rho: Q -> X
and alpha: Q -> Y, a left Theta-action along rho and a right Xi-action
along alpha.  Conventions, matching the composition rule
``compose(tau, sigma) = "sigma then tau"``:

* ``sigma . q`` is defined iff src(sigma) == rho(q); then
  rho(sigma . q) == tgt(sigma) and alpha is unchanged.
* ``q . tau`` is defined iff tgt(tau) == alpha(q); then
  alpha(q . tau) == src(tau) and rho is unchanged.

The structure is a Morita bitorsor when the right action is free and
transitive on rho-fibres and the left action is free and transitive on
alpha-fibres.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .bases import CatalogError, FourierCircle
from .groupoids import (
    ActionGroupoid,
    CechCover,
    FiniteGroupoid,
    cech_groupoid,
    group_groupoid,
    cyclic_translation_groupoid,
    FiniteGroup,
    isotropy,
    validate_cover,
)
from .reports import ValidationReport

INCONCLUSIVE = object()  # sentinel returned by capped searches


@dataclass(frozen=True, eq=False)
class Bitorsor:
    left: FiniteGroupoid
    right: FiniteGroupoid
    carrier: tuple
    rho: dict
    alpha: dict
    left_act: dict  # (sigma, q) -> q'
    right_act: dict  # (q, tau) -> q'
    name: str = "bitorsor"

    def rho_fibre(self, x):
        return [q for q in self.carrier if self.rho[q] == x]

    def alpha_fibre(self, y):
        return [q for q in self.carrier if self.alpha[q] == y]

    def act_left(self, sigma, q):
        return self.left_act[(sigma, q)]

    def act_right(self, q, tau):
        return self.right_act[(q, tau)]


# ---------------------------------------------------------------------------
# torsor witnesses


def left_witness(b: Bitorsor, q, q2):
    """The unique left arrow with sigma . q == q2 (same alpha-fibre)."""
    hits = [s for s in b.left.arrows if b.left_act.get((s, q)) == q2]
    if len(hits) != 1:
        raise CatalogError(
            f"left torsor witness for {q!r} -> {q2!r} is not unique: {hits!r}"
        )
    return hits[0]


def right_witness(b: Bitorsor, q, q2):
    """The unique right arrow with q . tau == q2 (same rho-fibre)."""
    hits = [t for t in b.right.arrows if b.right_act.get((q, t)) == q2]
    if len(hits) != 1:
        raise CatalogError(
            f"right torsor witness for {q!r} -> {q2!r} is not unique: {hits!r}"
        )
    return hits[0]


# ---------------------------------------------------------------------------
# validation


def validate_generalized_hom(b: Bitorsor, mode: str = "bitorsor") -> ValidationReport:
    """Exhaustive check of the generalized-homomorphism / bitorsor axioms.

    mode "generalized" checks the one-sided (right torsor over X) axioms;
    mode "bitorsor" additionally checks the left torsor condition over Y.
    Violations are report entries naming the failing pair or fibre.
    """
    if mode not in ("generalized", "bitorsor"):
        raise ValueError(f"unknown mode {mode!r}")
    rep = ValidationReport(subject=f"{mode} {b.name}")
    L, R = b.left, b.right

    for q in b.carrier:
        if q not in b.rho or q not in b.alpha:
            rep.add(f"anchors: {q!r} missing rho or alpha")
            return rep
        if b.rho[q] not in L.objects:
            rep.add(f"anchors: rho({q!r}) not an object of the left groupoid")
        if b.alpha[q] not in R.objects:
            rep.add(f"anchors: alpha({q!r}) not an object of the right groupoid")

    # action domains and anchor compatibility
    for s in L.arrows:
        for q in b.carrier:
            defined = (s, q) in b.left_act
            if defined != (L.src[s] == b.rho[q]):
                rep.add(f"left domain: ({s!r},{q!r}) defined={defined}")
                continue
            if defined:
                q2 = b.left_act[(s, q)]
                if q2 not in set(b.carrier):
                    rep.add(f"left action: ({s!r},{q!r}) leaves the carrier")
                elif b.rho[q2] != L.tgt[s] or b.alpha[q2] != b.alpha[q]:
                    rep.add(f"left anchors: ({s!r},{q!r}) moved anchors wrongly")
    for t in R.arrows:
        for q in b.carrier:
            defined = (q, t) in b.right_act
            if defined != (R.tgt[t] == b.alpha[q]):
                rep.add(f"right domain: ({q!r},{t!r}) defined={defined}")
                continue
            if defined:
                q2 = b.right_act[(q, t)]
                if q2 not in set(b.carrier):
                    rep.add(f"right action: ({q!r},{t!r}) leaves the carrier")
                elif b.alpha[q2] != R.src[t] or b.rho[q2] != b.rho[q]:
                    rep.add(f"right anchors: ({q!r},{t!r}) moved anchors wrongly")

    # unit and associativity laws
    for q in b.carrier:
        if b.left_act.get((L.unit[b.rho[q]], q)) != q:
            rep.add(f"left unit: unit does not fix {q!r}")
        if b.right_act.get((q, R.unit[b.alpha[q]])) != q:
            rep.add(f"right unit: unit does not fix {q!r}")
    for (tau, sigma) in L.composable_pairs():
        for q in b.carrier:
            if L.src[sigma] != b.rho[q]:
                continue
            two_step = b.left_act.get((tau, b.left_act[(sigma, q)]))
            one_step = b.left_act.get((L.compose(tau, sigma), q))
            if two_step != one_step:
                rep.add(f"left action law: ({tau!r},{sigma!r}) on {q!r}")
    for (tau, kappa) in R.composable_pairs():
        for q in b.carrier:
            if R.tgt[tau] != b.alpha[q]:
                continue
            two_step = b.right_act.get((b.right_act[(q, tau)], kappa))
            one_step = b.right_act.get((q, R.compose(tau, kappa)))
            if two_step != one_step:
                rep.add(f"right action law: ({tau!r},{kappa!r}) on {q!r}")

    # commutativity
    for s in L.arrows:
        for q in b.carrier:
            if (s, q) not in b.left_act:
                continue
            for t in R.arrows:
                if (q, t) not in b.right_act:
                    continue
                a = b.right_act.get((b.left_act[(s, q)], t))
                c = b.left_act.get((s, b.right_act[(q, t)]))
                if a != c or a is None:
                    rep.add(f"commutativity: ({s!r},{q!r},{t!r})")

    # right torsor over X: rho surjective, Xi free and transitive on rho-fibres
    for x in L.objects:
        fibre = b.rho_fibre(x)
        if not fibre:
            rep.add(f"rho surjectivity: empty fibre over {x!r}")
        for q, q2 in itertools.product(fibre, fibre):
            hits = [t for t in R.arrows if b.right_act.get((q, t)) == q2]
            if len(hits) != 1:
                rep.add(
                    f"right torsor: {len(hits)} arrows carry {q!r} to {q2!r} over {x!r}"
                )
    if mode == "generalized":
        return rep

    # left torsor over Y
    for y in R.objects:
        fibre = b.alpha_fibre(y)
        if not fibre:
            rep.add(f"alpha surjectivity: empty fibre over {y!r}")
        for q, q2 in itertools.product(fibre, fibre):
            hits = [s for s in L.arrows if b.left_act.get((s, q)) == q2]
            if len(hits) != 1:
                rep.add(
                    f"left torsor: {len(hits)} arrows carry {q!r} to {q2!r} over {y!r}"
                )
    return rep


# ---------------------------------------------------------------------------
# canonical constructions


def identity_bitorsor(G: FiniteGroupoid) -> Bitorsor:
    """G as a bitorsor over itself: carrier = arrows, anchors (tgt, src).

    Composition acts on both sides; this is the unit of bitorsor
    composition (a carrier of bare objects fails freeness as soon as the
    groupoid has isotropy).
    """
    carrier = tuple(G.arrows)
    left_act = {}
    right_act = {}
    for q in carrier:
        for s in G.arrows:
            if G.src[s] == G.tgt[q]:
                left_act[(s, q)] = G.compose(s, q)
        for t in G.arrows:
            if G.tgt[t] == G.src[q]:
                right_act[(q, t)] = G.compose(q, t)
    return Bitorsor(
        left=G,
        right=G,
        carrier=carrier,
        rho=dict(G.tgt),
        alpha=dict(G.src),
        left_act=left_act,
        right_act=right_act,
        name=f"id({G.name})",
    )


def inverse_bitorsor(b: Bitorsor) -> Bitorsor:
    """Swap the two sides; actions are re-anchored through arrow inverses."""
    left_act = {
        (t, q): b.right_act[(q, b.right.inv[t])]
        for q in b.carrier
        for t in b.right.arrows
        if (q, b.right.inv[t]) in b.right_act
    }
    right_act = {
        (q, s): b.left_act[(b.left.inv[s], q)]
        for q in b.carrier
        for s in b.left.arrows
        if (b.left.inv[s], q) in b.left_act
    }
    return Bitorsor(
        left=b.right,
        right=b.left,
        carrier=b.carrier,
        rho=dict(b.alpha),
        alpha=dict(b.rho),
        left_act=left_act,
        right_act=right_act,
        name=f"inv({b.name})",
    )


def double_cover_bitorsor(N: int):
    """Cyclic discretization of the double-cover example at scale N.

    Left groupoid: the two-element group over a point.  Right groupoid:
    Z_{2N} translating Z_N.  Carrier Z_{2N}; the nontrivial left element
    shifts by N, the right action subtracts the acting group element.
    Returns (theta, xi, bitorsor).
    """
    theta = group_groupoid(FiniteGroup.cyclic(2), name="Z2 over point")
    xi = cyclic_translation_groupoid(2 * N, N)
    carrier = tuple(range(2 * N))
    rho = {q: "*" for q in carrier}
    alpha = {q: q % N for q in carrier}
    left_act = {}
    for q in carrier:
        left_act[(0, q)] = q
        left_act[(1, q)] = (q + N) % (2 * N)
    right_act = {}
    for q in carrier:
        for (a, y) in xi.arrows:
            if (y + a) % N == q % N:  # tgt of the arrow meets alpha(q)
                right_act[(q, (a, y))] = (q - a) % (2 * N)
    return theta, xi, Bitorsor(
        left=theta,
        right=xi,
        carrier=carrier,
        rho=rho,
        alpha=alpha,
        left_act=left_act,
        right_act=right_act,
        name=f"a2(N={N})",
    )


# ---------------------------------------------------------------------------
# composition and 2-morphisms


def compose_homs(b1: Bitorsor, b2: Bitorsor) -> Bitorsor:
    """Compose X<->Y with Y<->Z through the shared middle groupoid.

    Carrier: pairs (q1, q2) with alpha1(q1) == rho2(q2), modulo
    (q1, q2) ~ (q1 . sigma, sigma^-1 . q2).  Classes are stored as
    canonical frozensets of pairs.
    """
    if b1.right is not b2.left:
        raise CatalogError("middle groupoids differ; cannot compose")
    mid = b1.right
    pairs = [
        (q1, q2)
        for q1 in b1.carrier
        for q2 in b2.carrier
        if b1.alpha[q1] == b2.rho[q2]
    ]
    # close each pair under the middle action
    cls_of = {}
    classes = []
    for p in pairs:
        if p in cls_of:
            continue
        block = {p}
        stack = [p]
        while stack:
            (q1, q2) = stack.pop()
            for s in mid.arrows:
                if (q1, s) in b1.right_act and (mid.inv[s], q2) in b2.left_act:
                    nxt = (b1.right_act[(q1, s)], b2.left_act[(mid.inv[s], q2)])
                    if nxt not in block:
                        block.add(nxt)
                        stack.append(nxt)
        block = frozenset(block)
        classes.append(block)
        for m in block:
            cls_of[m] = block
    carrier = tuple(sorted(classes, key=lambda c: sorted(map(repr, c))))
    rho = {c: b1.rho[next(iter(c))[0]] for c in carrier}
    alpha = {c: b2.alpha[next(iter(c))[1]] for c in carrier}
    # anchors are class invariants; guard while building
    for c in carrier:
        for (q1, q2) in c:
            if b1.rho[q1] != rho[c] or b2.alpha[q2] != alpha[c]:
                raise CatalogError("composite anchors are not class invariants")
    left_act = {}
    right_act = {}
    for c in carrier:
        q1, q2 = next(iter(c))
        for s in b1.left.arrows:
            if (s, q1) in b1.left_act:
                left_act[(s, c)] = cls_of[(b1.left_act[(s, q1)], q2)]
        for t in b2.right.arrows:
            if (q2, t) in b2.right_act:
                right_act[(c, t)] = cls_of[(q1, b2.right_act[(q2, t)])]
    return Bitorsor(
        left=b1.left,
        right=b2.right,
        carrier=carrier,
        rho=rho,
        alpha=alpha,
        left_act=left_act,
        right_act=right_act,
        name=f"({b1.name} * {b2.name})",
    )


@dataclass
class TwoMorphism:
    mapping: dict  # carrier of b1 -> carrier of b2

    def check(self, b1: Bitorsor, b2: Bitorsor) -> bool:
        T = self.mapping
        if set(T.values()) != set(b2.carrier) or len(T) != len(b2.carrier):
            return False
        for q in b1.carrier:
            if b1.rho[q] != b2.rho[T[q]] or b1.alpha[q] != b2.alpha[T[q]]:
                return False
        for (s, q), q2 in b1.left_act.items():
            if b2.left_act.get((s, T[q])) != T[q2]:
                return False
        for (q, t), q2 in b1.right_act.items():
            if b2.right_act.get((T[q], t)) != T[q2]:
                return False
        return True


def find_two_morphism(b1: Bitorsor, b2: Bitorsor, node_cap: int = 10**6):
    """Search for an equivariant bijection between two carriers.

    Returns a TwoMorphism, None when provably absent, or INCONCLUSIVE when
    the backtracking search exceeds ``node_cap`` nodes.  Equivariance
    propagates through both actions, so a single seed per connected block
    forces the rest.
    """
    if b1.left is not b2.left or b1.right is not b2.right:
        return None
    if len(b1.carrier) != len(b2.carrier):
        return None

    order = list(b1.carrier)
    nodes = 0

    def propagate(assign, q0, image):
        """Close assign under both actions starting from q0; None on clash."""
        stack = [q0]
        assign = dict(assign)
        assign[q0] = image
        if len(set(assign.values())) != len(assign):
            return None
        while stack:
            q = stack.pop()
            for (s, p), p2 in b1.left_act.items():
                if p != q:
                    continue
                t2 = b2.left_act.get((s, assign[q]))
                if t2 is None:
                    return None
                if p2 in assign:
                    if assign[p2] != t2:
                        return None
                else:
                    assign[p2] = t2
                    stack.append(p2)
            for (p, t), p2 in b1.right_act.items():
                if p != q:
                    continue
                t2 = b2.right_act.get((assign[q], t))
                if t2 is None:
                    return None
                if p2 in assign:
                    if assign[p2] != t2:
                        return None
                else:
                    assign[p2] = t2
                    stack.append(p2)
        if len(set(assign.values())) != len(assign):
            return None
        return assign

    def extend(assign):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            return INCONCLUSIVE
        missing = [q for q in order if q not in assign]
        if not missing:
            tm = TwoMorphism(dict(assign))
            return tm if tm.check(b1, b2) else None
        q0 = missing[0]
        taken = set(assign.values())
        for cand in b2.carrier:
            if cand in taken:
                continue
            if b2.rho[cand] != b1.rho[q0] or b2.alpha[cand] != b1.alpha[q0]:
                continue
            closed = propagate(assign, q0, cand)
            if closed is None:
                continue
            res = extend(closed)
            if res is INCONCLUSIVE or res is not None:
                return res
        return None

    return extend({})


# ---------------------------------------------------------------------------
# Cech localization


def localize_cech(b: Bitorsor, cover_x: CechCover, cover_y: CechCover):
    """Restrict a bitorsor to Cech groupoids of covers on both bases.

    Carrier points are tagged (q, a, i) with rho(q) in sheet a and
    alpha(q) in sheet i.  Returns (localized bitorsor, cech_x, cech_y).
    """
    validate_cover(b.left, cover_x).raise_if_invalid()
    validate_cover(b.right, cover_y).raise_if_invalid()
    cech_x = cech_groupoid(b.left, cover_x)
    cech_y = cech_groupoid(b.right, cover_y)
    carrier = tuple(
        (q, a, i)
        for q in b.carrier
        for a in cover_x.indices()
        for i in cover_y.indices()
        if cover_x.member(a, b.rho[q]) and cover_y.member(i, b.alpha[q])
    )
    for q in b.carrier:
        if not any(c[0] == q for c in carrier):
            raise CatalogError(f"cover mismatch: carrier point {q!r} lies in no sheet pair")
    rho = {(q, a, i): (b.rho[q], a) for (q, a, i) in carrier}
    alpha = {(q, a, i): (b.alpha[q], i) for (q, a, i) in carrier}
    left_act = {}
    for (s, a, bb) in cech_x.arrows:
        for (q, c, i) in carrier:
            if c == bb and (s, q) in b.left_act:
                left_act[((s, a, bb), (q, c, i))] = (b.left_act[(s, q)], a, i)
    right_act = {}
    for (q, a, i) in carrier:
        for (t, ii, j) in cech_y.arrows:
            if ii == i and (q, t) in b.right_act:
                right_act[((q, a, i), (t, ii, j))] = (b.right_act[(q, t)], a, j)
    localized = Bitorsor(
        left=cech_x,
        right=cech_y,
        carrier=carrier,
        rho=rho,
        alpha=alpha,
        left_act=left_act,
        right_act=right_act,
        name=f"Cech({b.name})",
    )
    return localized, cech_x, cech_y


def cech_bitorsor(G: FiniteGroupoid, cover: CechCover) -> Bitorsor:
    """The canonical equivalence between G and its Cech groupoid.

    Carrier: arrows with source inside a sheet, tagged by the sheet; the
    left G-action composes, the right Cech-action composes through the
    untagged arrow.
    """
    cech = cech_groupoid(G, cover)
    carrier = tuple(
        (s, a) for s in G.arrows for a in cover.indices() if cover.member(a, G.src[s])
    )
    rho = {(s, a): G.tgt[s] for (s, a) in carrier}
    alpha = {(s, a): (G.src[s], a) for (s, a) in carrier}
    left_act = {}
    for (s, a) in carrier:
        for r in G.arrows:
            if G.src[r] == G.tgt[s]:
                left_act[(r, (s, a))] = (G.compose(r, s), a)
    right_act = {}
    for (s, a) in carrier:
        for (t, aa, bb) in cech.arrows:
            if aa == a and G.tgt[t] == G.src[s]:
                right_act[((s, a), (t, aa, bb))] = (G.compose(s, t), bb)
    return Bitorsor(
        left=G,
        right=cech,
        carrier=carrier,
        rho=rho,
        alpha=alpha,
        left_act=left_act,
        right_act=right_act,
        name=f"cech-bitorsor({G.name})",
    )


# ---------------------------------------------------------------------------
# bisection lifts


@dataclass
class BisectionLift:
    """A lift of the local diffeomorphism of one arrow to the carrier."""

    side: str  # "left" or "right"
    arrow: object
    mapping: dict  # carrier point -> carrier point
    intertwines: bool


def lift_bisection(b: Bitorsor, arrow, q, side: str = "left") -> BisectionLift:
    """Lift the bisection through ``arrow`` to the carrier near ``q``.

    Left side: domain is the rho-fibre of src(arrow); the lift acts by the
    left action and satisfies rho o lift = (germ of arrow) o rho.  Right
    side: domain is the alpha-fibre of tgt(arrow); the inverse of the lift
    pushes alpha forward along the arrow's germ.
    """
    if side == "left":
        if b.rho[q] != b.left.src[arrow]:
            raise CatalogError("anchor mismatch: rho(q) is not the arrow's source")
        domain = b.rho_fibre(b.left.src[arrow])
        mapping = {p: b.left_act[(arrow, p)] for p in domain}
        ok = all(b.rho[mapping[p]] == b.left.tgt[arrow] for p in domain)
        return BisectionLift("left", arrow, mapping, ok)
    if side == "right":
        if b.alpha[q] != b.right.tgt[arrow]:
            raise CatalogError("anchor mismatch: alpha(q) is not the arrow's target")
        domain = b.alpha_fibre(b.right.tgt[arrow])
        mapping = {p: b.right_act[(p, arrow)] for p in domain}
        # alpha o mapping^-1 sends src(arrow) to tgt(arrow), the arrow's germ
        ok = all(b.alpha[mapping[p]] == b.right.src[arrow] for p in domain)
        return BisectionLift("right", arrow, mapping, ok)
    raise ValueError(f"unknown side {side!r}")


# ---------------------------------------------------------------------------
# weak equivalence pairs (appendix construction)


@dataclass
class StrictMorphism:
    source: FiniteGroupoid
    target: FiniteGroupoid
    obj_map: dict
    arr_map: dict

    def check_functor(self) -> ValidationReport:
        rep = ValidationReport(subject="strict morphism")
        S, T = self.source, self.target
        for a in S.arrows:
            img = self.arr_map.get(a)
            if img is None:
                rep.add(f"totality: no image for arrow {a!r}")
                continue
            if T.src[img] != self.obj_map[S.src[a]] or T.tgt[img] != self.obj_map[S.tgt[a]]:
                rep.add(f"endpoints: image of {a!r} has wrong endpoints")
        for (tau, sigma) in S.composable_pairs():
            lhs = self.arr_map[S.compose(tau, sigma)]
            rhs = T.compose(self.arr_map[tau], self.arr_map[sigma])
            if lhs != rhs:
                rep.add(f"functoriality: ({tau!r},{sigma!r})")
        for x in S.objects:
            if self.arr_map[S.unit[x]] != T.unit[self.obj_map[x]]:
                rep.add(f"units: image of unit at {x!r} is not a unit")
        return rep

    def check_weak_equivalence(self) -> ValidationReport:
        """Surjectivity on objects plus the cartesian arrow condition."""
        rep = self.check_functor()
        S, T = self.source, self.target
        if set(self.obj_map[x] for x in S.objects) != set(T.objects):
            rep.add("weak equivalence: object map is not surjective")
        # arrows q -> q' must biject with target arrows between the images
        for q in S.objects:
            for q2 in S.objects:
                here = [a for a in S.arrows if S.src[a] == q and S.tgt[a] == q2]
                there = [
                    t
                    for t in T.arrows
                    if T.src[t] == self.obj_map[q] and T.tgt[t] == self.obj_map[q2]
                ]
                images = [self.arr_map[a] for a in here]
                if len(images) != len(there) or set(images) != set(there) or len(
                    set(images)
                ) != len(images):
                    rep.add(
                        f"cartesian: arrows {q!r}->{q2!r} do not match the base arrows"
                    )
        return rep


@dataclass
class WeakEquivalencePair:
    middle: FiniteGroupoid
    to_left: StrictMorphism
    to_right: StrictMorphism

    def check(self) -> ValidationReport:
        rep = ValidationReport(subject="weak equivalence pair")
        for side, mor in (("left", self.to_left), ("right", self.to_right)):
            sub = mor.check_weak_equivalence()
            for v in sub.violations:
                rep.add(f"{side}: {v}")
        return rep


def weak_equivalence_pair(b: Bitorsor) -> WeakEquivalencePair:
    """Realize a bitorsor as a span of weak equivalences.

    The middle groupoid has the carrier as objects and arrows
    (sigma, q, tau) with src(sigma) == rho(q) and tgt(tau) == alpha(q),
    read as q -> (sigma . q) . tau.  One projection keeps sigma, the other
    keeps tau^-1.  This is one valid realization; nothing downstream may
    depend on the arrow labels.
    """
    L, R = b.left, b.right
    arrows = tuple(
        (s, q, t)
        for q in b.carrier
        for s in L.arrows
        if (s, q) in b.left_act
        for t in R.arrows
        if R.tgt[t] == b.alpha[q]
    )

    def target(arrow):
        s, q, t = arrow
        return b.right_act[(b.left_act[(s, q)], t)]

    src = {a: a[1] for a in arrows}
    tgt = {a: target(a) for a in arrows}
    cmp = {}
    for a2 in arrows:
        for a1 in arrows:
            if src[a2] != tgt[a1]:
                continue
            s2, _, t2 = a2
            s1, q1, t1 = a1
            cmp[(a2, a1)] = (L.compose(s2, s1), q1, R.compose(t1, t2))
    inv = {}
    for a in arrows:
        s, q, t = a
        inv[a] = (L.inv[s], tgt[a], R.inv[t])
    unit = {q: (L.unit[b.rho[q]], q, R.unit[b.alpha[q]]) for q in b.carrier}
    middle = FiniteGroupoid(
        objects=b.carrier,
        arrows=arrows,
        src=src,
        tgt=tgt,
        cmp=cmp,
        inv=inv,
        unit=unit,
        name=f"middle({b.name})",
    )
    to_left = StrictMorphism(
        source=middle,
        target=L,
        obj_map={q: b.rho[q] for q in b.carrier},
        arr_map={a: a[0] for a in arrows},
    )
    to_right = StrictMorphism(
        source=middle,
        target=R,
        obj_map={q: b.alpha[q] for q in b.carrier},
        arr_map={a: R.inv[a[2]] for a in arrows},
    )
    return WeakEquivalencePair(middle, to_left, to_right)


# ---------------------------------------------------------------------------
# fibre structure (isotropy bookkeeping across the equivalence)


@dataclass
class FibrePartition:
    y: object
    blocks: list
    block_sizes: list
    isotropy_rank: int
    rho_constant_on_blocks: bool
    rho_values: list
    left_ranks_match: bool

    def ok(self) -> bool:
        return (
            all(s == self.isotropy_rank for s in self.block_sizes)
            and self.rho_constant_on_blocks
            and self.left_ranks_match
        )


def fibre_partition_report(b: Bitorsor, y) -> FibrePartition:
    """Partition an alpha-fibre into isotropy orbits and compare ranks."""
    if y not in b.right.objects:
        raise KeyError(f"unknown object {y!r}")
    iso = isotropy(b.right, y)
    fibre = b.alpha_fibre(y)
    blocks = []
    seen = set()
    for q in fibre:
        if q in seen:
            continue
        block = sorted(
            {b.right_act[(q, t)] for t in iso.arrows} | {q}, key=repr
        )
        blocks.append(tuple(block))
        seen.update(block)
    sizes = [len(blk) for blk in blocks]
    rho_vals = [sorted({b.rho[q] for q in blk}, key=repr) for blk in blocks]
    constant = all(len(v) == 1 for v in rho_vals)
    ranks_ok = all(
        isotropy(b.left, b.rho[blk[0]]).rank == iso.rank for blk in blocks
    )
    return FibrePartition(
        y=y,
        blocks=blocks,
        block_sizes=sizes,
        isotropy_rank=iso.rank,
        rho_constant_on_blocks=constant,
        rho_values=[v[0] for v in rho_vals] if constant else rho_vals,
        left_ranks_match=ranks_ok,
    )


# ---------------------------------------------------------------------------
# the covering family (free rotation quotients)


@dataclass(frozen=True, eq=False)
class QuotientCovering:
    """Morita equivalence between a free rotation groupoid and its quotient.

    Upstairs: Z_m acting freely on a circle by rotations.  The carrier is
    the upstairs circle itself; rho is the identity and alpha the covering
    projection onto the quotient circle of circumference L/m.  This is the
    only mixed Fourier carrier family in the catalog; anything else is
    rejected at construction time.
    """

    upstairs: ActionGroupoid
    degree: int
    downstairs: FourierCircle

    @classmethod
    def of(cls, G: ActionGroupoid, cutoff=None) -> "QuotientCovering":
        if not isinstance(G.base, FourierCircle):
            raise CatalogError("covering family needs a circle base")
        m = G.group.order
        turns = sorted(G.iso[g].turns for g in G.group.elements)
        if turns != [Fraction(k, m) for k in range(m)]:
            raise CatalogError(
                "covering family needs a free rotation action (turns k/m); "
                f"got {turns!r}"
            )
        cutoff = G.base.mode_cutoff if cutoff is None else cutoff
        down = FourierCircle(G.base.circumference / m, max(2, cutoff))
        return cls(upstairs=G, degree=m, downstairs=down)

    def project_turns(self, t: Fraction) -> Fraction:
        """alpha in turns: upstairs turns t -> downstairs turns m*t mod 1."""
        return (Fraction(t) * self.degree) % 1

    def branch_turns(self, t_down: Fraction, branch: int) -> Fraction:
        """Section of alpha: downstairs turns -> upstairs turns, one branch."""
        return (Fraction(t_down) + branch) / self.degree % 1

    def deck_element(self, branch_from: int, branch_to: int):
        """Group element whose rotation carries one branch onto another."""
        diff = (branch_to - branch_from) % self.degree
        for g in self.upstairs.group.elements:
            if self.upstairs.iso[g].turns == Fraction(diff, self.degree):
                return g
        raise CatalogError("no deck element between branches")
