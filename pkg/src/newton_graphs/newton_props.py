"""Euler property, Hall condition, angle assignments and the Newton-graph decision.

The angle property is decided combinatorially: a strictly positive solution
of "every vertex's angles sum to 1 and every face's angles sum to 1" exists
exactly when each nonempty proper set ``J`` of faces touches more than
``|J|`` vertices.  The positive witness is built from transversals; the
negative one is a Stiemke vector read off a violating face set.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ForcedPairNotIncident, HallFails, OrderMismatch, StructureMismatch
from .matching import BipartiteMatcher
from .torus_graph import EmbeddedGraph, dual, parse_dart_ref

ROW_TOL = 1e-9
MIN_ANGLE = 1e-6


# -- E-property --------------------------------------------------------------

@dataclass(frozen=True)
class EPropertyResult:
    holds: bool
    offending_face: Optional[tuple]  # darts of the first non-Eulerian walk
    dual_loop_free: bool

    def __bool__(self):
        return self.holds


def e_property(g: EmbeddedGraph) -> EPropertyResult:
    """Every facial walk traverses each of its edges exactly once.

    Cross-checked against loop-freeness of the dual; the two must agree.
    """
    offending = None
    for w in g.face_walks:
        if len(set(w.edges)) != len(w.edges):
            offending = w.darts
            break
    holds = offending is None
    dual_ok = not dual(g).has_loops()
    if holds != dual_ok:
        raise AssertionError("E-property and dual loop-freeness disagree")
    if holds:
        for w in g.face_walks:
            ends = Counter()
            for e in w.edges:
                v, x = g.ends[e]
                ends[v] += 1
                ends[x] += 1
            assert all(c % 2 == 0 for c in ends.values()), "odd degree on a face boundary"
    return EPropertyResult(holds, offending, dual_ok)


# -- incidence helpers -------------------------------------------------------

def face_incidence(g: EmbeddedGraph) -> dict:
    """Face id -> vertices on its boundary, in vertex order."""
    order = {v: i for i, v in enumerate(g.vertices)}
    return {w.face_id: sorted(set(w.vertices), key=order.__getitem__) for w in g.face_walks}


def _covered(inc, J):
    out = set()
    for j in J:
        out.update(inc[j])
    return out


# -- Hall condition ------------------------------------------------------------

@dataclass(frozen=True)
class HallCertificate:
    passed: bool
    violating_set: Optional[tuple] = None  # face ids, on failure
    violating_vertices: Optional[tuple] = None  # V(G(J)), on failure
    transversal: Optional[dict] = None  # face id -> vertex, on success
    matching_calls: int = 0

    @property
    def outcome(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        d = {"outcome": self.outcome, "matching_calls": self.matching_calls}
        if self.passed:
            d["transversal"] = dict(self.transversal or {})
        else:
            d["violating_set"] = list(self.violating_set)
            d["violating_vertices"] = list(self.violating_vertices)
        return d


def _minimalize(inc, J):
    J = list(J)
    changed = True
    while changed:
        changed = False
        for j in list(J):
            K = [x for x in J if x != j]
            if K and len(_covered(inc, K)) <= len(K):
                J = K
                changed = True
                break
    return J


def find_hall_violation(g: EmbeddedGraph):
    """Return ``(J, matching_calls)`` with ``J`` violating ``|J| < |V(G(J))|``, or ``(None, calls)``.

    For each excluded face ``f0`` the remaining faces must be matchable into
    the vertices with any single vertex removed (strong Hall property).
    Every nonempty proper ``J`` misses some face, so all are covered.
    """
    if g.n_faces != g.n_vertices:
        raise OrderMismatch(f"{g.n_faces} faces but {g.n_vertices} vertices")
    inc = face_incidence(g)
    faces = list(g.face_ids)
    calls = 0
    for f0 in faces:
        X = [f for f in faces if f != f0]
        m = BipartiteMatcher({f: inc[f] for f in X})
        m.maximum()
        free = [x for x in X if x not in m.match_left]
        if free:
            J = m.alternating_reach(free[0])
            calls += m.calls
            return _minimalize(inc, sorted(J, key=faces.index)), calls
        for y in g.vertices:
            x = m.match_right.get(y)
            if x is None:
                continue
            m.unmatch(x)
            if m.augment_from(x, banned={y}):
                # restore a matching that uses y again is unnecessary: the
                # new one is still maximum and saturates X
                continue
            J = m.alternating_reach(x, banned={y})
            calls += m.calls
            return _minimalize(inc, sorted(J, key=faces.index)), calls
        calls += m.calls
    return None, calls


def transversal_extend(g: EmbeddedGraph, forced, check_hall=True) -> dict:
    """Bijection face -> boundary vertex with the forced pair ``(v0, F0)``."""
    v0, f0 = forced
    inc = face_incidence(g)
    if f0 not in inc or v0 not in inc[f0]:
        raise ForcedPairNotIncident(f"vertex {v0!r} is not on the boundary of face {f0!r}")
    if check_hall:
        J, _ = find_hall_violation(g)
        if J is not None:
            raise HallFails(f"Hall condition fails for faces {J}")
    X = [f for f in g.face_ids if f != f0]
    m = BipartiteMatcher({f: [v for v in inc[f] if v != v0] for f in X})
    mm = m.maximum()
    if len(mm) != len(X):
        raise HallFails("forced pair cannot be extended to a transversal")
    out = {f0: v0}
    out.update(mm)
    return {f: out[f] for f in g.face_ids}


def default_forced_pair(g: EmbeddedGraph):
    """First vertex in the graph's order with the first face on which it lies."""
    v0 = g.vertices[0]
    inc = face_incidence(g)
    f0 = next(f for f in g.face_ids if v0 in inc[f])
    return v0, f0


def hall_condition(g: EmbeddedGraph) -> HallCertificate:
    J, calls = find_hall_violation(g)
    if J is not None:
        inc = face_incidence(g)
        cov = _covered(inc, J)
        assert 0 < len(J) < g.n_faces and len(cov) <= len(J)
        return HallCertificate(False, tuple(J),
                               tuple(v for v in g.vertices if v in cov), None, calls)
    T = transversal_extend(g, default_forced_pair(g), check_hall=False)
    return HallCertificate(True, None, None, T, calls + 1)


def hall_brute_force(g: EmbeddedGraph, both_sides=False) -> list:
    """All nonempty proper face sets violating ``|J| < |V(G(J))|`` by enumeration.

    With ``both_sides`` the interior bound ``|Int G(J)| < |J|`` is checked too
    and a set is reported if either inequality fails.
    """
    inc = face_incidence(g)
    faces = list(g.face_ids)
    r = len(faces)
    bad = []
    for k in range(1, r):
        for J in itertools.combinations(faces, k):
            cov = _covered(inc, J)
            fail = not (len(J) < len(cov))
            if both_sides and not fail:
                rest = _covered(inc, [f for f in faces if f not in J])
                interior = cov - rest
                fail = not (len(interior) < len(J))
            if fail:
                bad.append(J)
    return bad


# -- angle assignments -------------------------------------------------------

@dataclass(frozen=True)
class AngleAssignment:
    angles: dict  # sector key -> value (Fraction or float)
    exact: bool

    @property
    def margin(self) -> float:
        return float(min(self.angles.values()))

    def as_floats(self) -> dict:
        return {k: float(v) for k, v in self.angles.items()}

    def to_dict(self) -> dict:
        d = {"margin": self.margin, "exact": self.exact, "values": self.as_floats()}
        if self.exact:
            d["rational"] = {k: str(v) for k, v in self.angles.items()}
        return d


@dataclass(frozen=True)
class StiemkeCertificate:
    z: tuple  # vertices (graph order) then faces (face order)
    face_set: tuple = ()

    def to_dict(self) -> dict:
        return {"z": list(self.z), "face_set": list(self.face_set)}


def sector_matrix(g: EmbeddedGraph):
    """The ``2r x 4r`` vertex/face incidence matrix of the sectors."""
    vi = {v: i for i, v in enumerate(g.vertices)}
    fi = {f: i for i, f in enumerate(g.face_ids)}
    r_v, r_f = len(vi), len(fi)
    keys = [k for k, _, _ in g.sectors]
    M = np.zeros((r_v + r_f, len(keys)))
    for lam, (_, v, f) in enumerate(g.sectors):
        M[vi[v], lam] = 1
        M[r_v + fi[f], lam] = 1
    return M, keys


def angles_from_transversals(g: EmbeddedGraph) -> AngleAssignment:
    """Exact witness: average of one transversal per associated (vertex, face) pair.

    The average is a doubly stochastic vertex-by-face matrix that is
    positive on every associated pair; each entry is shared equally among
    the sectors of that vertex lying in that face.
    """
    pairs = sorted({(v, f) for _, v, f in g.sectors},
                   key=lambda p: (g.vertices.index(p[0]), g.face_ids.index(p[1])))
    weight = defaultdict(Fraction)
    cache = {}
    for v, f in pairs:
        if (v, f) in cache:
            T = cache[(v, f)]
        else:
            T = transversal_extend(g, (v, f), check_hall=False)
            for ff, vv in T.items():
                cache.setdefault((vv, ff), T)
        for ff, vv in T.items():
            weight[(vv, ff)] += Fraction(1, len(pairs))
    count = Counter((v, f) for _, v, f in g.sectors)
    angles = {key: weight[(v, f)] / count[(v, f)] for key, v, f in g.sectors}
    return AngleAssignment(angles, exact=True)


def angles_by_scaling(g: EmbeddedGraph, sweeps=10_000, tol=1e-13) -> Optional[AngleAssignment]:
    """Float witness by alternating vertex-row / face-row normalisation.

    Starts from ``1/deg(v)`` per sector.  Returns ``None`` if the iteration
    does not settle within ``sweeps``.
    """
    M, keys = sector_matrix(g)
    r = g.n_vertices
    V, F = M[:r], M[r:]
    x = (V / V.sum(axis=1, keepdims=True)).sum(axis=0)
    for _ in range(sweeps):
        x = x / (V.T @ (V @ x))
        x = x / (F.T @ (F @ x))
        if np.max(np.abs(V @ x - 1)) < tol:
            break
    else:
        return None
    return AngleAssignment(dict(zip(keys, x.tolist())), exact=False)


def max_margin_angles(g: EmbeddedGraph):
    """Maximise ``eps`` s.t. all row sums are 1 and every angle >= eps (LP).

    Returns ``(eps, AngleAssignment or None)``; a positive ``eps`` means the
    angle system is feasible.
    """
    from scipy.optimize import linprog

    M, keys = sector_matrix(g)
    n = M.shape[1]
    # variables (x_1..x_n, eps); minimise -eps
    c = np.zeros(n + 1)
    c[-1] = -1
    A_eq = np.hstack([M, np.zeros((M.shape[0], 1))])
    b_eq = np.ones(M.shape[0])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, 1)] * n + [(None, 1)], method="highs")
    if res.status != 0:
        return float("-inf"), None
    eps = float(res.x[-1])
    if eps <= 0:
        return eps, None
    return eps, AngleAssignment(dict(zip(keys, res.x[:n].tolist())), exact=False)


def verify_angles(g: EmbeddedGraph, a: AngleAssignment, tol=ROW_TOL, min_angle=MIN_ANGLE) -> bool:
    """Check conditions A1-A3 by walking rotations and facial walks directly."""
    ang = a.angles
    if len(ang) != g.n_darts:
        return False
    exact = a.exact
    zero = Fraction(0) if exact else 0.0

    def ok(total):
        return total == 1 if exact else abs(total - 1) <= tol

    for v in g.vertices:
        cyc = g.rotation[v]
        total = zero
        for i, x in enumerate(cyc):
            key = f"{v}:{x}:{cyc[(i + 1) % len(cyc)]}"
            if key not in ang or not ang[key] > 0 or float(ang[key]) < min_angle:
                return False
            total += ang[key]
        if not ok(total):
            return False
    for w in g.face_walks:
        total = zero
        n = len(w.darts)
        for i in range(n):
            d_in = w.darts[i]
            d_out = w.darts[(i + 1) % n]
            e, s = parse_dart_ref(d_in)
            arrive = f"{e}{'-' if s == 0 else '+'}"
            key = f"{w.vertices[(i + 1) % n]}:{arrive}:{d_out}"
            if key not in ang:
                return False
            total += ang[key]
        if not ok(total):
            return False
    return True


def stiemke_from_violation(g: EmbeddedGraph, J) -> StiemkeCertificate:
    """``z = +1`` on the vertices of ``G(J)``, ``-1`` on the faces of ``J``."""
    cov = _covered(face_incidence(g), J)
    z = [1 if v in cov else 0 for v in g.vertices]
    z += [-1 if f in J else 0 for f in g.face_ids]
    return StiemkeCertificate(tuple(z), tuple(J))


def associated_pairs(g: EmbeddedGraph) -> set:
    """Index pairs ``(i, j)`` such that vertex ``i`` and face ``j`` share an angle."""
    vi = {v: i for i, v in enumerate(g.vertices)}
    fi = {f: j for j, f in enumerate(g.face_ids)}
    out = set()
    for w in g.face_walks:
        for v in w.vertices:
            out.add((vi[v], fi[w.face_id]))
    return out


def verify_stiemke(g: EmbeddedGraph, cert: StiemkeCertificate) -> bool:
    """``z_i + z_{r+j} >= 0`` on associated pairs, ``sum z <= 0``, one strict."""
    r = g.n_vertices
    z = cert.z
    if len(z) != r + g.n_faces:
        return False
    strict = False
    for i, j in associated_pairs(g):
        s = z[i] + z[r + j]
        if s < 0:
            return False
        strict |= s > 0
    total = sum(z)
    if total > 0:
        return False
    return strict or total < 0


@dataclass(frozen=True)
class APropertyResult:
    holds: bool
    angles: Optional[AngleAssignment]
    stiemke: Optional[StiemkeCertificate]
    hall: HallCertificate

    def __bool__(self):
        return self.holds


def check_structure(g: EmbeddedGraph) -> list:
    """Reasons why ``g`` is not a Newton candidate (empty list if it is)."""
    r = g.n_vertices
    problems = []
    if g.has_loops():
        problems.append(f"loops: {sorted(g.loops())}")
    if g.n_edges != 2 * r:
        problems.append(f"|E| = {g.n_edges}, expected 2|V| = {2 * r}")
    if g.n_faces != r:
        problems.append(f"|F| = {g.n_faces}, expected |V| = {r}")
    if r < 2:
        problems.append("order below 2")
    return problems


def a_property(g: EmbeddedGraph, mode="rational") -> APropertyResult:
    """Decide the angle property; attach a verified witness either way.

    ``mode`` is ``"rational"`` (exact transversal average) or ``"float"``
    (row scaling with an LP fallback).
    """
    problems = check_structure(g)
    if problems:
        raise StructureMismatch("; ".join(problems))
    hall = hall_condition(g)
    if not hall.passed:
        cert = stiemke_from_violation(g, hall.violating_set)
        if not verify_stiemke(g, cert):
            raise AssertionError("Stiemke certificate failed verification")
        return APropertyResult(False, None, cert, hall)
    if mode == "rational":
        angles = angles_from_transversals(g)
    else:
        angles = angles_by_scaling(g)
        if angles is None or not verify_angles(g, angles):
            _, angles = max_margin_angles(g)
    if angles is None or not verify_angles(g, angles):
        raise AssertionError("angle witness failed verification")
    return APropertyResult(True, angles, None, hall)


@dataclass(frozen=True)
class NewtonReport:
    is_newton: bool
    loop_free: bool
    connected: bool
    toroidal: bool
    counts: tuple  # (r, |E|, |F|)
    problems: tuple
    e_property: Optional[EPropertyResult] = None
    hall: Optional[HallCertificate] = None
    angles: Optional[AngleAssignment] = None
    stiemke: Optional[StiemkeCertificate] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "is_newton": self.is_newton,
            "loop_free": self.loop_free,
            "connected": self.connected,
            "toroidal": self.toroidal,
            "counts": {"r": self.counts[0], "edges": self.counts[1], "faces": self.counts[2]},
            "problems": list(self.problems),
            "e_property": None,
            "hall": self.hall.to_dict() if self.hall else None,
            "angles": self.angles.as_floats() if self.angles else None,
            "stiemke": list(self.stiemke.z) if self.stiemke else None,
        }
        if self.e_property is not None:
            d["e_property"] = {"holds": self.e_property.holds,
                               "offending_face": (list(self.e_property.offending_face)
                                                  if self.e_property.offending_face else None)}
        if self.angles is not None:
            d["angle_margin"] = self.angles.margin
            if self.angles.exact:
                d["angles_exact"] = {k: str(v) for k, v in self.angles.angles.items()}
        if self.stiemke is not None:
            d["stiemke_face_set"] = list(self.stiemke.face_set)
        d.update(self.extra)
        return d


def is_newton_graph(g: EmbeddedGraph, mode="rational") -> NewtonReport:
    """Aggregate structural checks, the E-property and the A-property."""
    counts = (g.n_vertices, g.n_edges, g.n_faces)
    problems = check_structure(g)
    e = e_property(g)
    if not e.holds:
        problems = problems + [f"E-property fails on face walk {list(e.offending_face)}"]
    hall = angles = stiemke = None
    if not check_structure(g):
        a = a_property(g, mode)
        hall, angles, stiemke = a.hall, a.angles, a.stiemke
        if not a.holds:
            problems.append(f"Hall condition fails for faces {list(a.hall.violating_set)}")
    elif g.n_faces == g.n_vertices:
        hall = hall_condition(g)
    return NewtonReport(
        is_newton=not problems,
        loop_free=not g.has_loops(),
        connected=True,
        toroidal=g.euler_characteristic() == 0,
        counts=counts,
        problems=tuple(problems),
        e_property=e,
        hall=hall,
        angles=angles,
        stiemke=stiemke,
    )


def interior_exterior(g: EmbeddedGraph, J) -> tuple:
    """Vertices touching only faces in ``J`` and those touching faces on both sides."""
    J = set(J)
    at = defaultdict(set)
    for _, v, f in g.sectors:
        at[v].add(f)
    interior = tuple(v for v in g.vertices if at[v] and at[v] <= J)
    exterior = tuple(v for v in g.vertices if at[v] & J and at[v] - J)
    return interior, exterior
