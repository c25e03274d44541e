"""Newton graphs on the torus and the elliptic Newton flows that realise them.

Submodules:

- ``torus_graph``: embedded toroidal graphs, duals, refinement, equivalence
- ``newton_props``: Euler and angle properties, Hall condition, certificates
- ``elliptic``: sigma/zeta evaluation and sigma-quotient elliptic functions
- ``flow``: desingularized Newton flow, separatrices, graph extraction
- ``cli``: the ``newton-graphs`` command

Public names are re-exported lazily so ``import newton_graphs`` stays cheap.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "torus_graph": ("EmbeddedGraph", "build", "faces", "dual", "negate", "refine",
                    "equivalent", "self_dual_check", "verify_witness"),
    "newton_props": ("e_property", "hall_condition", "a_property", "is_newton_graph",
                     "verify_angles", "verify_stiemke", "max_margin_angles"),
    "elliptic": ("Lattice", "ZeroPoleData", "EllipticFunction", "canonical", "sigma",
                 "zeta", "wp", "log_derivative", "critical_points", "random_data"),
    "flow": ("FlowField", "field", "integrate", "classify_equilibria",
             "trace_separatrices", "extract_graphs", "extract", "newton_roundtrip"),
    "corpus": ("enumerate_candidates", "g2", "torus_rose"),
}
_WHERE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_WHERE)


def __getattr__(name):
    mod = _WHERE.get(name)
    if mod is None:
        raise AttributeError(f"module 'newton_graphs' has no attribute {name!r}")
    return getattr(import_module(f".{mod}", __name__), name)
