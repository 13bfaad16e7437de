"""Groupoids of the two catalog flavors and their combinatorics.

A finite groupoid is stored as explicit tables (objects, arrows, source,
target, composition, inverse, units).  An action groupoid stores a finite
group acting by exact catalog isometries on a base; when the base is a
finite label set it can be expanded into explicit tables.

Composition is written ``compose(tau, sigma)`` = "sigma, then tau" and is
defined exactly when ``src(tau) == tgt(sigma)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .bases import (
    CatalogError,
    CircleRotation,
    FiniteSet,
    FourierCircle,
    FourierTorus,
    LabelPermutation,
    TorusIsometry,
    identity_isometry,
)
from .reports import ValidationReport


# ---------------------------------------------------------------------------
# finite groups


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    elements: tuple
    table: dict  # (g, h) -> g*h
    identity: object

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        els = tuple(range(n))
        table = {(g, h): (g + h) % n for g in els for h in els}
        return cls(els, table, 0)

    def mul(self, g, h):
        return self.table[(g, h)]

    def inv(self, g):
        for h in self.elements:
            if self.mul(g, h) == self.identity:
                return h
        raise CatalogError(f"group element {g!r} has no inverse in the table")

    @property
    def order(self):
        return len(self.elements)


# ---------------------------------------------------------------------------
# finite groupoids


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    objects: tuple
    arrows: tuple
    src: dict
    tgt: dict
    cmp: dict  # (tau, sigma) -> tau after sigma
    inv: dict
    unit: dict  # object -> unit arrow
    base: object = None  # optional BaseSpace (FiniteSet) for flavor checks
    name: str = "groupoid"

    # -- structure access

    def compose(self, tau, sigma):
        return self.cmp[(tau, sigma)]

    def is_unit(self, arrow):
        return arrow == self.unit[self.src[arrow]]

    def composable_pairs(self):
        for tau in self.arrows:
            for sigma in self.arrows:
                if self.src[tau] == self.tgt[sigma]:
                    yield tau, sigma

    def arrows_from(self, x):
        return [a for a in self.arrows if self.src[a] == x]

    def arrows_into(self, y):
        return [a for a in self.arrows if self.tgt[a] == y]

    def arrows_between(self, x, y):
        return [a for a in self.arrows if self.src[a] == x and self.tgt[a] == y]


def group_groupoid(group: FiniteGroup, point="*", name=None) -> FiniteGroupoid:
    """The one-object groupoid of a finite group."""
    arrows = group.elements
    return FiniteGroupoid(
        objects=(point,),
        arrows=arrows,
        src={g: point for g in arrows},
        tgt={g: point for g in arrows},
        cmp={(g, h): group.mul(g, h) for g in arrows for h in arrows},
        inv={g: group.inv(g) for g in arrows},
        unit={point: group.identity},
        base=FiniteSet((point,)),
        name=name or f"group({group.order})",
    )


def unit_groupoid(points, name=None) -> FiniteGroupoid:
    points = tuple(points)
    arrows = tuple(("id", p) for p in points)
    return FiniteGroupoid(
        objects=points,
        arrows=arrows,
        src={a: a[1] for a in arrows},
        tgt={a: a[1] for a in arrows},
        cmp={(a, a): a for a in arrows},
        inv={a: a for a in arrows},
        unit={p: ("id", p) for p in points},
        base=FiniteSet(points),
        name=name or "unit",
    )


def finite_action_groupoid(group: FiniteGroup, points, act, name=None) -> FiniteGroupoid:
    """Action groupoid tables for a group acting on a finite label set.

    ``act(g, x)`` is the action; arrows are (g, x) with source x and
    target act(g, x).
    """
    points = tuple(points)
    arrows = tuple((g, x) for g in group.elements for x in points)
    src = {a: a[1] for a in arrows}
    tgt = {a: act(a[0], a[1]) for a in arrows}
    cmp = {}
    for (g, y), (h, x) in itertools.product(arrows, arrows):
        if y == act(h, x):
            cmp[((g, y), (h, x))] = (group.mul(g, h), x)
    inv = {(g, x): (group.inv(g), act(g, x)) for (g, x) in arrows}
    unit = {x: (group.identity, x) for x in points}
    return FiniteGroupoid(
        objects=points,
        arrows=arrows,
        src=src,
        tgt=tgt,
        cmp=cmp,
        inv=inv,
        unit=unit,
        base=FiniteSet(points),
        name=name or f"action({group.order}x{len(points)})",
    )


def cyclic_translation_groupoid(order: int, n_points: int, name=None) -> FiniteGroupoid:
    """Z_order acting on Z_n by a.y = y + (a mod n); the finite workhorse."""
    group = FiniteGroup.cyclic(order)
    return finite_action_groupoid(
        group,
        range(n_points),
        lambda a, y: (y + a) % n_points,
        name=name or f"Z{order}xZ{n_points}",
    )


# ---------------------------------------------------------------------------
# action groupoids on Fourier bases


@dataclass(frozen=True, eq=False)
class ActionGroupoid:
    """A finite group acting by exact catalog isometries on a Fourier base.

    Arrows are conceptually pairs (g, x); they are never materialized.
    Pointwise checks run on the base's uniform sample grid, which catalog
    isometries map to itself.
    """

    group: FiniteGroup
    base: object  # FourierCircle | FourierTorus
    iso: dict  # g -> CircleRotation | TorusIsometry
    name: str = "action groupoid"

    def isometry(self, g):
        return self.iso[g]

    def grid_turns(self):
        n = self.base.grid_size
        if isinstance(self.base, FourierCircle):
            return [Fraction(j, n) for j in range(n)]
        return [
            (Fraction(i, n), Fraction(j, n)) for i in range(n) for j in range(n)
        ]

    def apply(self, g, t):
        return self.iso[g].apply_turns(t)


def rotation_groupoid(m: int, circle: FourierCircle, through=None, name=None) -> ActionGroupoid:
    """Z_m acting on a circle by rotations.

    ``through`` optionally remaps generator -> turns; default is the free
    rotation by 1/m of a turn.
    """
    group = FiniteGroup.cyclic(m)
    step = Fraction(1, m) if through is None else Fraction(through)
    iso = {a: CircleRotation(step * a) for a in group.elements}
    return ActionGroupoid(group, circle, iso, name=name or f"Z{m} rotation circle")


def negation_torus_groupoid(torus: FourierTorus, name=None) -> ActionGroupoid:
    group = FiniteGroup.cyclic(2)
    iso = {0: TorusIsometry(), 1: TorusIsometry(negate=True)}
    return ActionGroupoid(group, torus, iso, name=name or "Z2 negation torus")


def trivial_groupoid(base, name=None) -> ActionGroupoid:
    """The unit groupoid of a Fourier base, as a trivial-group action."""
    group = FiniteGroup.cyclic(1)
    return ActionGroupoid(group, base, {0: identity_isometry(base)}, name=name or "unit")


# ---------------------------------------------------------------------------
# germs and effectiveness


@dataclass(frozen=True)
class GermAction:
    """Germ data of the local diffeomorphism attached to one arrow."""

    arrow: object
    source: object
    data: object  # finite base: the target point; Fourier: the isometry


def germ_of(G, arrow) -> GermAction:
    if isinstance(G, FiniteGroupoid):
        return GermAction(arrow, G.src[arrow], G.tgt[arrow])
    if isinstance(G, ActionGroupoid):
        g, x = arrow
        return GermAction(arrow, x, G.iso[g])
    raise CatalogError(f"unsupported groupoid {G!r}")


def is_effective(G):
    """Whether distinct arrows always carry distinct germs.

    Returns (flag, witness); witness is a pair of arrows sharing a germ
    when the flag is False.
    """
    if isinstance(G, FiniteGroupoid):
        seen = {}
        for a in G.arrows:
            key = (G.src[a], G.tgt[a])
            if key in seen:
                return False, (seen[key], a)
            seen[key] = a
        return True, None
    if isinstance(G, ActionGroupoid):
        seen = {}
        for g in G.group.elements:
            key = G.iso[g]
            if key in seen:
                x0 = G.grid_turns()[0]
                return False, ((seen[key], x0), (g, x0))
            seen[key] = g
        return True, None
    raise CatalogError(f"unsupported groupoid {G!r}")


# ---------------------------------------------------------------------------
# orbits and isotropy


@dataclass
class OrbitPartition:
    blocks: list
    note: str = ""

    @property
    def count(self):
        return len(self.blocks)


def orbits(G) -> OrbitPartition:
    if isinstance(G, FiniteGroupoid):
        parent = {x: x for x in G.objects}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in G.arrows:
            rx, ry = find(G.src[a]), find(G.tgt[a])
            if rx != ry:
                parent[ry] = rx
        blocks = {}
        for x in G.objects:
            blocks.setdefault(find(x), []).append(x)
        return OrbitPartition([tuple(b) for b in blocks.values()])
    if isinstance(G, ActionGroupoid):
        pts = G.grid_turns()
        index = {p: i for i, p in enumerate(pts)}
        parent = list(range(len(pts)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g in G.group.elements:
            for p in pts:
                q = G.apply(g, p)
                ri, rj = find(index[p]), find(index[q])
                if ri != rj:
                    parent[rj] = ri
        blocks = {}
        for i, p in enumerate(pts):
            blocks.setdefault(find(i), []).append(p)
        note = "orbits of the uniform sample grid (exact for catalog isometries)"
        if len(blocks) == 1:
            note = "transitive on sampled points"
        return OrbitPartition([tuple(b) for b in blocks.values()], note=note)
    raise CatalogError(f"unsupported groupoid {G!r}")


@dataclass
class IsotropyGroup:
    point: object
    arrows: tuple

    @property
    def rank(self):
        return len(self.arrows)


def isotropy(G, x) -> IsotropyGroup:
    if isinstance(G, FiniteGroupoid):
        if x not in G.objects:
            raise KeyError(f"unknown object {x!r}")
        return IsotropyGroup(x, tuple(G.arrows_between(x, x)))
    if isinstance(G, ActionGroupoid):
        loops = tuple(
            (g, x) for g in G.group.elements if G.apply(g, x) == x
        )
        return IsotropyGroup(x, loops)
    raise CatalogError(f"unsupported groupoid {G!r}")


# ---------------------------------------------------------------------------
# validation


def validate_groupoid(G) -> ValidationReport:
    if isinstance(G, FiniteGroupoid):
        return _validate_finite(G)
    if isinstance(G, ActionGroupoid):
        return _validate_action(G)
    raise CatalogError(f"unsupported groupoid {G!r}")


def _validate_finite(G: FiniteGroupoid) -> ValidationReport:
    rep = ValidationReport(subject=f"groupoid {G.name}")
    for x in G.objects:
        u = G.unit.get(x)
        if u is None or G.src.get(u) != x or G.tgt.get(u) != x:
            rep.add(f"unit law: unit({x!r}) missing or not a loop at {x!r}")
    for a in G.arrows:
        b = G.inv.get(a)
        if b is None or G.src.get(b) != G.tgt[a] or G.tgt.get(b) != G.src[a]:
            rep.add(f"inverse law: inverse({a!r}) missing or endpoints wrong")
            continue
        if G.cmp.get((b, a)) != G.unit[G.src[a]] or G.cmp.get((a, b)) != G.unit[G.tgt[a]]:
            rep.add(f"inverse law: {a!r} composed with its inverse is not a unit")
    for tau, sigma in G.composable_pairs():
        c = G.cmp.get((tau, sigma))
        if c is None:
            rep.add(f"totality: compose({tau!r},{sigma!r}) undefined")
            continue
        if G.src[c] != G.src[sigma] or G.tgt[c] != G.tgt[tau]:
            rep.add(f"endpoint law: compose({tau!r},{sigma!r}) has wrong endpoints")
    for (tau, sigma) in list(G.cmp):
        if G.src[tau] != G.tgt[sigma]:
            rep.add(f"domain law: compose({tau!r},{sigma!r}) defined but not composable")
    for a in G.arrows:
        u_t, u_s = G.unit[G.tgt[a]], G.unit[G.src[a]]
        if G.cmp.get((u_t, a)) != a or G.cmp.get((a, u_s)) != a:
            rep.add(f"unit law: units do not act neutrally on {a!r}")
    for rho, tau, sigma in itertools.product(G.arrows, repeat=3):
        if G.src[rho] == G.tgt[tau] and G.src[tau] == G.tgt[sigma]:
            left = G.cmp.get((G.cmp.get((rho, tau)), sigma))
            right = G.cmp.get((rho, G.cmp.get((tau, sigma))))
            if left != right:
                rep.add(f"associativity: triple ({rho!r},{tau!r},{sigma!r}) fails")
    return rep


def _validate_action(G: ActionGroupoid) -> ValidationReport:
    rep = ValidationReport(subject=f"action groupoid {G.name}")
    ident = identity_isometry(G.base)
    if G.iso.get(G.group.identity) != ident:
        rep.add("homomorphism: identity element does not act as the identity isometry")
    for g in G.group.elements:
        iso = G.iso.get(g)
        if iso is None:
            rep.add(f"totality: no isometry for {g!r}")
            continue
        expected = (CircleRotation if isinstance(G.base, FourierCircle) else TorusIsometry
                    if isinstance(G.base, FourierTorus) else LabelPermutation)
        if not isinstance(iso, expected):
            rep.add(f"flavor: isometry for {g!r} does not match the base")
    for g in G.group.elements:
        for h in G.group.elements:
            gh = G.group.mul(g, h)
            if G.iso[gh] != G.iso[g].after(G.iso[h]):
                rep.add(f"homomorphism: act({g!r}*{h!r}) != act({g!r}) o act({h!r})")
    return rep


# ---------------------------------------------------------------------------
# covers and Cech groupoids


@dataclass(frozen=True)
class CircleArc:
    """Open arc given by center and half width, in turns."""

    center: Fraction
    half_width: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center) % 1)
        object.__setattr__(self, "half_width", Fraction(self.half_width))
        if not 0 < self.half_width <= Fraction(1, 2):
            raise CatalogError("arc half width must be in (0, 1/2] turns")

    def contains(self, t: Fraction) -> bool:
        d = (Fraction(t) - self.center) % 1
        if d > Fraction(1, 2):
            d -= 1
        return abs(d) < self.half_width


@dataclass(frozen=True)
class CechCover:
    sheets: tuple  # finite flavor: tuples of labels; circle flavor: CircleArcs

    def __post_init__(self):
        object.__setattr__(
            self,
            "sheets",
            tuple(s if isinstance(s, CircleArc) else tuple(s) for s in self.sheets),
        )

    def sheet(self, a):
        return self.sheets[a]

    def indices(self):
        return range(len(self.sheets))

    def member(self, a, x) -> bool:
        s = self.sheets[a]
        if isinstance(s, CircleArc):
            return s.contains(x)
        return x in s

    def sheets_containing(self, x):
        return [a for a in self.indices() if self.member(a, x)]


def trivial_cover(G) -> CechCover:
    if isinstance(G, FiniteGroupoid):
        return CechCover((tuple(G.objects),))
    return CechCover((CircleArc(Fraction(0), Fraction(1, 2)),))


def validate_cover(G, cover: CechCover) -> ValidationReport:
    rep = ValidationReport(subject="cover")
    for a in cover.indices():
        s = cover.sheet(a)
        if not isinstance(s, CircleArc) and len(s) == 0:
            rep.add(f"sheet {a} is empty")
    if isinstance(G, FiniteGroupoid):
        for x in G.objects:
            if not cover.sheets_containing(x):
                rep.add(f"object {x!r} not covered")
    elif isinstance(G, ActionGroupoid):
        for t in G.grid_turns():
            if not cover.sheets_containing(t):
                rep.add(f"sample point {t} not covered")
    return rep


def cech_groupoid(G, cover: CechCover):
    """Localize a groupoid to a cover.

    Finite flavor returns explicit tables with objects (x, a) and arrows
    (sigma, a, b) for sigma with source in sheet b and target in sheet a.
    Fourier action groupoids return a symbolic Cech groupoid.
    """
    validate_cover(G, cover).raise_if_invalid()
    if isinstance(G, ActionGroupoid):
        return CechActionGroupoid(G, cover)
    objects = tuple((x, a) for a in cover.indices() for x in cover.sheet(a))
    arrows = tuple(
        (s, a, b)
        for s in G.arrows
        for a in cover.indices()
        for b in cover.indices()
        if cover.member(a, G.tgt[s]) and cover.member(b, G.src[s])
    )
    src = {(s, a, b): (G.src[s], b) for (s, a, b) in arrows}
    tgt = {(s, a, b): (G.tgt[s], a) for (s, a, b) in arrows}
    cmp = {}
    for (s1, a1, b1) in arrows:
        for (s2, a2, b2) in arrows:
            if b1 == a2 and G.src[s1] == G.tgt[s2]:
                cmp[((s1, a1, b1), (s2, a2, b2))] = (G.compose(s1, s2), a1, b2)
    inv = {(s, a, b): (G.inv[s], b, a) for (s, a, b) in arrows}
    unit = {(x, a): (G.unit[x], a, a) for (x, a) in objects}
    return FiniteGroupoid(
        objects=objects,
        arrows=arrows,
        src=src,
        tgt=tgt,
        cmp=cmp,
        inv=inv,
        unit=unit,
        base=None,
        name=f"Cech({G.name})",
    )


@dataclass(frozen=True, eq=False)
class CechActionGroupoid:
    """Symbolic Cech localization of a Fourier action groupoid.

    Arrows are (g, a, b): the action of g restricted to sheet b with image
    meeting sheet a.  Domains are tracked on the sample grid.
    """

    parent: ActionGroupoid
    cover: CechCover
    arrows: tuple = field(init=False)

    def __post_init__(self):
        arrs = []
        pts = self.parent.grid_turns()
        for g in self.parent.group.elements:
            for a in self.cover.indices():
                for b in self.cover.indices():
                    dom = [
                        t
                        for t in pts
                        if self.cover.member(b, t)
                        and self.cover.member(a, self.parent.apply(g, t))
                    ]
                    if dom:
                        arrs.append((g, a, b))
        object.__setattr__(self, "arrows", tuple(arrs))

    def domain(self, arrow):
        g, a, b = arrow
        return [
            t
            for t in self.parent.grid_turns()
            if self.cover.member(b, t) and self.cover.member(a, self.parent.apply(g, t))
        ]

    def composable_pairs(self):
        group = self.parent.group
        for (g1, a1, b1) in self.arrows:
            for (g2, a2, b2) in self.arrows:
                if b1 != a2:
                    continue
                # need a sample point moved by g2 from sheet b2 into the
                # domain of (g1, a1, b1)
                dom = [
                    t
                    for t in self.domain((g2, a2, b2))
                    if self.cover.member(a1, self.parent.apply(group.mul(g1, g2), t))
                ]
                if dom:
                    yield (g1, a1, b1), (g2, a2, b2), (group.mul(g1, g2), a1, b2)
