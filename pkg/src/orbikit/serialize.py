"""JSON file formats for groupoids, bitorsors, cocycles, mode data.

Conventions: complex numbers are [re, im] pairs, exact fractions are
"p/q" strings, tuples become JSON arrays and are restored as tuples on
load.  Labels must be built from strings, integers and tuples thereof;
within that family round-trips are lossless.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .bases import (
    CircleModes,
    CircleRotation,
    FiniteSet,
    FourierCircle,
    FourierTorus,
    LabelPermutation,
    TorusIsometry,
    TorusModes,
)
from .cocycles import Cocycle
from .convolution import ConvolutionElement
from .groupoids import (
    ActionGroupoid,
    CechCover,
    CircleArc,
    FiniteGroup,
    FiniteGroupoid,
)
from .morita import Bitorsor

SCHEMAS = {
    "groupoid": "orbikit/groupoid/1",
    "bitorsor": "orbikit/bitorsor/1",
    "cocycle": "orbikit/cocycle/1",
    "modes": "orbikit/modes/1",
    "convolution": "orbikit/convolution/1",
    "cover": "orbikit/cover/1",
}


def _freeze(value):
    """Lists decoded from JSON become tuples, recursively."""
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _uncplx(pair) -> complex:
    return complex(pair[0], pair[1])


def _frn(f) -> str:
    return str(Fraction(f))


def _unfrn(s) -> Fraction:
    return Fraction(s)


# ---------------------------------------------------------------------------
# groupoids


def groupoid_to_dict(G, covers=()) -> dict:
    doc = _groupoid_body(G)
    if covers:
        doc["covers"] = [cover_to_dict(c) for c in covers]
    return doc


def covers_from_groupoid_doc(doc: dict):
    return [cover_from_dict(c) for c in doc.get("covers", [])]


def _groupoid_body(G) -> dict:
    if isinstance(G, FiniteGroupoid):
        arrows = list(G.arrows)
        a_index = {a: i for i, a in enumerate(arrows)}
        return {
            "schema": SCHEMAS["groupoid"],
            "flavor": "finite",
            "name": G.name,
            "objects": [_thaw(x) for x in G.objects],
            "arrows": [_thaw(a) for a in arrows],
            "src": [_thaw(G.src[a]) for a in arrows],
            "tgt": [_thaw(G.tgt[a]) for a in arrows],
            "compose": sorted(
                [a_index[t], a_index[s], a_index[r]] for (t, s), r in G.cmp.items()
            ),
            "inverse": [a_index[G.inv[a]] for a in arrows],
            "unit": [a_index[G.unit[x]] for x in G.objects],
        }
    if isinstance(G, ActionGroupoid):
        base = G.base
        if isinstance(base, FourierCircle):
            base_doc = {
                "kind": "circle",
                "circumference": base.circumference,
                "mode_cutoff": base.mode_cutoff,
            }
        elif isinstance(base, FourierTorus):
            base_doc = {
                "kind": "torus",
                "circumferences": list(base.circumferences),
                "mode_cutoff": base.mode_cutoff,
            }
        else:
            base_doc = {"kind": "finite", "points": [_thaw(p) for p in base.points]}
        action = []
        for g in G.group.elements:
            iso = G.iso[g]
            if isinstance(iso, CircleRotation):
                action.append({"element": _thaw(g), "kind": "rotation", "turns": _frn(iso.turns)})
            elif isinstance(iso, TorusIsometry):
                action.append(
                    {
                        "element": _thaw(g),
                        "kind": "torus",
                        "negate": iso.negate,
                        "shift": [_frn(s) for s in iso.shift],
                    }
                )
            else:
                action.append(
                    {
                        "element": _thaw(g),
                        "kind": "permutation",
                        "pairs": [[_thaw(x), _thaw(y)] for x, y in iso.pairs],
                    }
                )
        els = list(G.group.elements)
        return {
            "schema": SCHEMAS["groupoid"],
            "flavor": "fourier_action",
            "name": G.name,
            "base": base_doc,
            "group": {
                "elements": [_thaw(g) for g in els],
                "table": [[_thaw(G.group.mul(g, h)) for h in els] for g in els],
                "identity": _thaw(G.group.identity),
            },
            "action": action,
        }
    raise TypeError(f"cannot serialize {G!r}")


def groupoid_from_dict(doc: dict):
    if doc.get("schema") != SCHEMAS["groupoid"]:
        raise ValueError(f"not a groupoid document: schema {doc.get('schema')!r}")
    if doc["flavor"] == "finite":
        objects = tuple(_freeze(x) for x in doc["objects"])
        arrows = tuple(_freeze(a) for a in doc["arrows"])
        src = {a: _freeze(x) for a, x in zip(arrows, doc["src"])}
        tgt = {a: _freeze(x) for a, x in zip(arrows, doc["tgt"])}
        cmp = {
            (arrows[t], arrows[s]): arrows[r] for t, s, r in doc["compose"]
        }
        inv = {a: arrows[i] for a, i in zip(arrows, doc["inverse"])}
        unit = {x: arrows[i] for x, i in zip(objects, doc["unit"])}
        return FiniteGroupoid(
            objects=objects,
            arrows=arrows,
            src=src,
            tgt=tgt,
            cmp=cmp,
            inv=inv,
            unit=unit,
            base=FiniteSet(objects),
            name=doc.get("name", "groupoid"),
        )
    if doc["flavor"] == "fourier_action":
        b = doc["base"]
        if b["kind"] == "circle":
            base = FourierCircle(b["circumference"], b["mode_cutoff"])
        elif b["kind"] == "torus":
            base = FourierTorus(tuple(b["circumferences"]), b["mode_cutoff"])
        else:
            base = FiniteSet(tuple(_freeze(p) for p in b["points"]))
        els = tuple(_freeze(g) for g in doc["group"]["elements"])
        table = {
            (g, h): _freeze(doc["group"]["table"][i][j])
            for i, g in enumerate(els)
            for j, h in enumerate(els)
        }
        group = FiniteGroup(els, table, _freeze(doc["group"]["identity"]))
        iso = {}
        for entry in doc["action"]:
            g = _freeze(entry["element"])
            if entry["kind"] == "rotation":
                iso[g] = CircleRotation(_unfrn(entry["turns"]))
            elif entry["kind"] == "torus":
                iso[g] = TorusIsometry(entry["negate"], tuple(_unfrn(s) for s in entry["shift"]))
            else:
                iso[g] = LabelPermutation(tuple((_freeze(x), _freeze(y)) for x, y in entry["pairs"]))
        return ActionGroupoid(group, base, iso, name=doc.get("name", "action groupoid"))
    raise ValueError(f"unknown groupoid flavor {doc['flavor']!r}")


# ---------------------------------------------------------------------------
# covers


def cover_to_dict(cover: CechCover) -> dict:
    sheets = []
    for s in cover.sheets:
        if isinstance(s, CircleArc):
            sheets.append({"kind": "arc", "center": _frn(s.center), "half_width": _frn(s.half_width)})
        else:
            sheets.append({"kind": "finite", "members": [_thaw(x) for x in s]})
    return {"schema": SCHEMAS["cover"], "sheets": sheets}


def cover_from_dict(doc: dict) -> CechCover:
    if doc.get("schema") != SCHEMAS["cover"]:
        raise ValueError("not a cover document")
    sheets = []
    for s in doc["sheets"]:
        if s["kind"] == "arc":
            sheets.append(CircleArc(_unfrn(s["center"]), _unfrn(s["half_width"])))
        else:
            sheets.append(tuple(_freeze(x) for x in s["members"]))
    return CechCover(tuple(sheets))


# ---------------------------------------------------------------------------
# bitorsors (finite flavor; groupoids referenced by name)


def bitorsor_to_dict(b: Bitorsor, left_name: str, right_name: str) -> dict:
    return {
        "schema": SCHEMAS["bitorsor"],
        "name": b.name,
        "left": left_name,
        "right": right_name,
        "carrier": [_thaw(q) for q in b.carrier],
        "rho": [[_thaw(q), _thaw(b.rho[q])] for q in b.carrier],
        "alpha": [[_thaw(q), _thaw(b.alpha[q])] for q in b.carrier],
        "left_act": sorted(
            ([_thaw(s), _thaw(q), _thaw(v)] for (s, q), v in b.left_act.items()),
            key=json.dumps,
        ),
        "right_act": sorted(
            ([_thaw(q), _thaw(t), _thaw(v)] for (q, t), v in b.right_act.items()),
            key=json.dumps,
        ),
    }


def bitorsor_from_dict(doc: dict, resolve: dict) -> Bitorsor:
    if doc.get("schema") != SCHEMAS["bitorsor"]:
        raise ValueError("not a bitorsor document")
    left = resolve[doc["left"]]
    right = resolve[doc["right"]]
    return Bitorsor(
        left=left,
        right=right,
        carrier=tuple(_freeze(q) for q in doc["carrier"]),
        rho={_freeze(q): _freeze(x) for q, x in doc["rho"]},
        alpha={_freeze(q): _freeze(y) for q, y in doc["alpha"]},
        left_act={(_freeze(s), _freeze(q)): _freeze(v) for s, q, v in doc["left_act"]},
        right_act={(_freeze(q), _freeze(t)): _freeze(v) for q, t, v in doc["right_act"]},
        name=doc.get("name", "bitorsor"),
    )


# ---------------------------------------------------------------------------
# cocycles


def cocycle_to_dict(g: Cocycle) -> dict:
    entries = []
    for a in g.groupoid.arrows:
        m = np.asarray(g.entries[a], dtype=complex)
        sheets = list(a[1:]) if isinstance(a, tuple) and len(a) == 3 else None
        entries.append(
            {
                "arrow": _thaw(a),
                "sheets": sheets,
                "matrix": [[_cplx(v) for v in row] for row in m],
            }
        )
    return {
        "schema": SCHEMAS["cocycle"],
        "name": g.name,
        "rank": g.rank,
        "entries": entries,
    }


def cocycle_from_dict(doc: dict, groupoid) -> Cocycle:
    if doc.get("schema") != SCHEMAS["cocycle"]:
        raise ValueError("not a cocycle document")
    entries = {}
    for e in doc["entries"]:
        arrow = _freeze(e["arrow"])
        entries[arrow] = np.array([[_uncplx(v) for v in row] for row in e["matrix"]])
    return Cocycle(groupoid, doc["rank"], entries, name=doc.get("name", "cocycle"))


# ---------------------------------------------------------------------------
# mode data


def modes_to_dict(m) -> dict:
    if isinstance(m, CircleModes):
        return {
            "schema": SCHEMAS["modes"],
            "kind": "circle",
            "circumference": m.circle.circumference,
            "cutoff": m.cutoff,
            "twist": _frn(m.twist),
            "fibre_shape": list(m.fibre_shape),
            "coeffs": [_cplx(v) for v in m.coeffs.reshape(-1)],
        }
    if isinstance(m, TorusModes):
        return {
            "schema": SCHEMAS["modes"],
            "kind": "torus",
            "circumferences": list(m.torus.circumferences),
            "cutoff": m.cutoff,
            "twist": [_frn(t) for t in m.twist],
            "fibre_shape": list(m.fibre_shape),
            "coeffs": [_cplx(v) for v in m.coeffs.reshape(-1)],
        }
    raise TypeError(f"cannot serialize {m!r}")


def modes_from_dict(doc: dict):
    if doc.get("schema") != SCHEMAS["modes"]:
        raise ValueError("not a mode-data document")
    fibre = tuple(doc["fibre_shape"])
    flat = np.array([_uncplx(v) for v in doc["coeffs"]])
    if doc["kind"] == "circle":
        n = 2 * doc["cutoff"] + 1
        circle = FourierCircle(doc["circumference"], max(2, doc["cutoff"]))
        return CircleModes(circle, doc["cutoff"], flat.reshape((n, *fibre)), _unfrn(doc["twist"]))
    n = 2 * doc["cutoff"] + 1
    torus = FourierTorus(tuple(doc["circumferences"]), max(2, doc["cutoff"]))
    return TorusModes(
        torus,
        doc["cutoff"],
        flat.reshape((n, n, *fibre)),
        tuple(_unfrn(t) for t in doc["twist"]),
    )


# ---------------------------------------------------------------------------
# convolution elements


def convolution_to_dict(f: ConvolutionElement) -> dict:
    if f.flavor == "finite":
        terms = sorted(
            ({"arrow": _thaw(a), "value": _cplx(v)} for a, v in f.data.items()),
            key=json.dumps,
        )
        return {"schema": SCHEMAS["convolution"], "flavor": "finite", "terms": terms}
    terms = [
        {"element": _thaw(g), "modes": modes_to_dict(part)} for g, part in sorted(f.data.items(), key=lambda kv: json.dumps(_thaw(kv[0])))
    ]
    return {"schema": SCHEMAS["convolution"], "flavor": "fourier", "terms": terms}


def convolution_from_dict(doc: dict, groupoid) -> ConvolutionElement:
    if doc.get("schema") != SCHEMAS["convolution"]:
        raise ValueError("not a convolution document")
    if doc["flavor"] == "finite":
        data = {_freeze(t["arrow"]): _uncplx(t["value"]) for t in doc["terms"]}
        return ConvolutionElement(groupoid, data)
    data = {_freeze(t["element"]): modes_from_dict(t["modes"]) for t in doc["terms"]}
    return ConvolutionElement(groupoid, data)


# ---------------------------------------------------------------------------
# file helpers


def save_json(path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
