"""JSON readers and writers for embedded graphs and function specs."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .elliptic import EllipticFunction, Lattice, ZeroPoleData, canonical
from .errors import ConstraintUnsatisfiable, MalformedRotation
from .torus_graph import ANTICLOCKWISE, EmbeddedGraph, build


def graph_to_json(g: EmbeddedGraph) -> dict:
    return g.to_dict()


def graph_from_json(data: dict) -> EmbeddedGraph:
    try:
        return build(data["vertices"], data["edges"], data["rotation"],
                     data.get("orientation", ANTICLOCKWISE))
    except (KeyError, TypeError) as exc:
        raise MalformedRotation(f"bad graph JSON: {exc!r}") from None


def _cplx(x, what) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ConstraintUnsatisfiable(f"{what}: expected [re, im], got {x!r}")


def _pair(z: complex) -> list:
    return [z.real, z.imag]


def function_from_spec(data: dict, **kwargs) -> EllipticFunction:
    """Build the sigma quotient described by a function spec."""
    try:
        tau = _cplx(data["tau"], "tau")
        zeros = tuple(_cplx(a, "zero") for a in data["zeros"])
        poles = tuple(None if b == "auto" else _cplx(b, "pole") for b in data["poles"])
    except KeyError as exc:
        raise ConstraintUnsatisfiable(f"function spec is missing {exc}") from None
    scale = _cplx(data.get("scale", [1.0, 0.0]), "scale")
    for z in zeros + tuple(p for p in poles if p is not None) + (tau, scale):
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ConstraintUnsatisfiable("non-finite number in function spec")
    return canonical(ZeroPoleData(zeros, poles), Lattice.from_tau(tau), scale, **kwargs)


def function_to_spec(f: EllipticFunction) -> dict:
    """Spec with every pole explicit; reading it back gives the same function."""
    if f.lattice.omega1 != 1:
        raise ConstraintUnsatisfiable("only lattices with omega1 = 1 have a spec form")
    return {
        "tau": _pair(f.lattice.tau),
        "zeros": [_pair(a) for a in f.zeros],
        "poles": [_pair(b) for b in f.sigma_poles],
        "scale": _pair(complex(f.scale)),
    }


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False, default=_default) + "\n"


def _default(o):
    if isinstance(o, complex):
        return _pair(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load_graph(path) -> EmbeddedGraph:
    return graph_from_json(read_json(path))


def load_function(path, **kwargs) -> EllipticFunction:
    return function_from_spec(read_json(path), **kwargs)
