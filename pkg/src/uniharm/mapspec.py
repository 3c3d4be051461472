"""JSON map specifications and canonical JSON output.

A map file looks like::

    {"kind": "polyharmonic", "p": 2,
     "components": [
        {"type": "polyzzbar", "terms": [[0, 0, 0.3, 0]]},
        {"type": "harmonic", "h": [[0, 0], [1, 0]], "g": [[0, 0]]}]}

``components[j-1]`` is ``G_j``: the first entry carries the heaviest weight
``|z|^(2(p-1))`` and the last entry is the unweighted ``G_p``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from numbers import Integral, Real

import numpy as np

from .core import AlmansiMap, HarmonicComponent, LogPHarmonicMap, PolyZZbar

KINDS = ("polyharmonic", "log-p-harmonic")
TOP_KEYS = {"kind", "p", "components", "name", "notes"}


class SpecError(ValueError):
    """Invalid map file; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


# canonical JSON ------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def canonical_dumps(obj) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits, complex as [re, im]."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (Integral, np.integer)):
        return str(int(obj))
    if isinstance(obj, (Real, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return canonical_dumps([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + canonical_dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(canonical_dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# parsing -------------------------------------------------------------------

@dataclass(frozen=True)
class MapSpec:
    kind: str
    p: int
    components: tuple
    name: str | None = None
    notes: str | None = None

    def to_map(self):
        if self.kind == "log-p-harmonic":
            return LogPHarmonicMap(self.p, self.components)
        return AlmansiMap(self.p, self.components)

    def to_obj(self) -> dict:
        out = {"kind": self.kind, "p": self.p,
               "components": [_component_obj(c) for c in self.components]}
        if self.name is not None:
            out["name"] = self.name
        if self.notes is not None:
            out["notes"] = self.notes
        return out

    def canonical(self) -> str:
        return canonical_dumps(self.to_obj())

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("ascii")).hexdigest()


def _pair(c: complex) -> list:
    return [c.real, c.imag]


def _component_obj(c) -> dict:
    if isinstance(c, HarmonicComponent):
        return {"type": "harmonic", "h": [_pair(x) for x in c.h], "g": [_pair(x) for x in c.g]}
    return {"type": "polyzzbar",
            "terms": [[m, n, c.real, c.imag] for m, n, c in c.terms]}


def _number(x, path) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SpecError(path, f"expected a number, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise SpecError(path, "coefficient is not finite")
    return x


def _coeff_list(raw, path) -> tuple:
    if not isinstance(raw, list):
        raise SpecError(path, "expected a list of [re, im] pairs")
    out = []
    for i, pair in enumerate(raw):
        here = f"{path}[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise SpecError(here, "expected [re, im]")
        out.append(complex(_number(pair[0], here + "[0]"), _number(pair[1], here + "[1]")))
    return tuple(out)


def _exponent(x, path) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SpecError(path, "exponent must be an integer")
    if x < 0:
        raise SpecError(path, "exponent must be nonnegative")
    return x


def _component(raw, path):
    if not isinstance(raw, dict):
        raise SpecError(path, "component must be an object")
    ctype = raw.get("type")
    if ctype == "harmonic":
        extra = set(raw) - {"type", "h", "g"}
        if extra:
            raise SpecError(f"{path}.{sorted(extra)[0]}", "unknown key")
        for key in ("h", "g"):
            if key not in raw:
                raise SpecError(f"{path}.{key}", "missing")
        return HarmonicComponent(_coeff_list(raw["h"], f"{path}.h"),
                                 _coeff_list(raw["g"], f"{path}.g"))
    if ctype == "polyzzbar":
        extra = set(raw) - {"type", "terms"}
        if extra:
            raise SpecError(f"{path}.{sorted(extra)[0]}", "unknown key")
        terms = raw.get("terms")
        if not isinstance(terms, list):
            raise SpecError(f"{path}.terms", "expected a list of [m, n, re, im]")
        out = []
        for i, t in enumerate(terms):
            here = f"{path}.terms[{i}]"
            if not isinstance(t, list) or len(t) != 4:
                raise SpecError(here, "expected [m, n, re, im]")
            out.append((_exponent(t[0], here + "[0]"), _exponent(t[1], here + "[1]"),
                        complex(_number(t[2], here + "[2]"), _number(t[3], here + "[3]"))))
        return PolyZZbar(out)
    raise SpecError(f"{path}.type", f"unknown component type {ctype!r}")


def spec_from_obj(obj) -> MapSpec:
    if not isinstance(obj, dict):
        raise SpecError("", "top level must be an object")
    extra = set(obj) - TOP_KEYS
    if extra:
        raise SpecError(sorted(extra)[0], "unknown key")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise SpecError("kind", f"must be one of {', '.join(KINDS)}")
    p = obj.get("p")
    if isinstance(p, bool) or not isinstance(p, int):
        raise SpecError("p", "must be an integer")
    if p < 1:
        raise SpecError("p", "must be >= 1")
    comps = obj.get("components")
    if not isinstance(comps, list):
        raise SpecError("components", "must be a list")
    if len(comps) != p:
        raise SpecError("components", f"components length {len(comps)} ≠ p {p}")
    parsed = tuple(_component(c, f"components[{i}]") for i, c in enumerate(comps))
    if kind == "log-p-harmonic":
        for i, c in enumerate(parsed):
            if not c.lower().is_harmonic():
                raise SpecError(f"components[{i}]", "log-p-harmonic components must be harmonic")
    for key in ("name", "notes"):
        if key in obj and not isinstance(obj[key], str):
            raise SpecError(key, "must be a string")
    return MapSpec(kind, p, parsed, obj.get("name"), obj.get("notes"))


def parse_spec_text(text: str) -> MapSpec:
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise SpecError("", f"parse error: {exc}") from None
    return spec_from_obj(obj)


def parse_spec(path) -> MapSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read())
