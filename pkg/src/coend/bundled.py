"""Small named instances shipped with the package."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .encoding import ComputableStructure, structure_over_nat, succ_even_structure
from .errors import LoadError
from .presheaf import FinitePresheaf
from .relational import RelStructure, load_structure, structure_from_json


def _data(name: str) -> dict:
    return json.loads(resources.files("coend").joinpath("data", name).read_text())


@dataclass(frozen=True)
class BundledStructure:
    name: str
    file: str
    description: str
    # expected outcomes of the rigidity suite: mode -> holds, checked up to SUITE_N_MAX
    expected: dict

    def load(self) -> RelStructure:
        return structure_from_json(_data(self.file))


SUITE_N_MAX = 3

STRUCTURES = {
    s.name: s
    for s in [
        BundledStructure(
            "one-in-three",
            "one_in_three.json",
            "{0,1} with the ternary 1-in-3 relation",
            {"rigid": True, "lex": True, "inhabited-lex": True},
        ),
        BundledStructure(
            "two-point",
            "two_point.json",
            "{0,1} with no relations",
            {"rigid": False, "lex": False, "inhabited-lex": False},
        ),
        BundledStructure(
            "point",
            "point.json",
            "one point, empty language",
            {"rigid": True, "lex": False, "inhabited-lex": False},
        ),
        BundledStructure(
            "tournament3",
            "tournament3.json",
            "transitive tournament on three vertices (min is a polymorphism)",
            {"rigid": True, "lex": False, "inhabited-lex": False},
        ),
    ]
}


def one_in_three() -> RelStructure:
    return STRUCTURES["one-in-three"].load()


def two_point() -> RelStructure:
    return STRUCTURES["two-point"].load()


def resolve_structure(spec: str) -> RelStructure:
    """``bundled:NAME`` or a path to a JSON structure file."""
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        if name not in STRUCTURES:
            raise LoadError(f"unknown bundled structure {name!r}; known: {sorted(STRUCTURES)}")
        return STRUCTURES[name].load()
    return load_structure(spec)


NAT_STRUCTURES = {
    "succ-even": succ_even_structure,
    "path": lambda: structure_over_nat(_data("path_nat.json")),
}


def resolve_nat_structure(spec: str) -> ComputableStructure:
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        if name not in NAT_STRUCTURES:
            raise LoadError(f"unknown bundled structure over N {name!r}; known: {sorted(NAT_STRUCTURES)}")
        return NAT_STRUCTURES[name]()
    text = Path(spec).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(exc.msg, spec, exc.lineno, exc.colno) from None
    try:
        return structure_over_nat(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"invalid structure over N: {exc}", spec) from None


def structure_presheaf(A: RelStructure) -> FinitePresheaf:
    """Main object ``v`` with the carrier, one object per symbol holding its
    tuples, and arrows ``e_<symbol>_<j>`` projecting a tuple to its j-th entry."""
    objects = ["v"] + [f"v_{s}" for s in A.language.names]
    carriers = {"v": list(A.carrier)}
    arrows, actions = {}, {}
    for s, arity in A.language.symbols:
        tuples = sorted(A.relations[s], key=repr)
        carriers[f"v_{s}"] = tuples
        for j in range(arity):
            arrows[f"e_{s}_{j}"] = (f"v_{s}", "v")
            actions[f"e_{s}_{j}"] = [t[j] for t in tuples]
    return FinitePresheaf(objects, arrows, carriers, actions)


PRESHEAVES = {
    "rigid-one-in-three": lambda: structure_presheaf(one_in_three()),
    "two-point": lambda: FinitePresheaf.discrete({"v": ["x", "y"]}),
    "point": lambda: FinitePresheaf.discrete({"v": ["*"]}),
}


def resolve_presheaf(spec: str) -> FinitePresheaf:
    name = spec.split(":", 1)[1] if spec.startswith("bundled:") else spec
    if name not in PRESHEAVES:
        raise LoadError(f"unknown bundled presheaf {name!r}; known: {sorted(PRESHEAVES)}")
    return PRESHEAVES[name]()
