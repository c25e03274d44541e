"""Graphs cellularly embedded in the torus, stored as combinatorial maps.

Each edge ``e`` has two darts (edge-ends): ``e+`` at ``ends[0]`` and ``e-`` at
``ends[1]``.  Internally darts are integers, ``2k`` for ``e_k+`` and ``2k+1``
for ``e_k-``, so the end-swapping involution is ``d ^ 1``.  The rotation at
a vertex lists its darts in the order given by the caller; the
``orientation`` flag records whether that listing is anti-clockwise (the
geometric convention for primal graphs) or clockwise (the listing produced
by :func:`dual`).

Face traversal uses the listed rotation: leaving along dart ``d`` the walk
arrives at ``d ^ 1`` and continues with ``rotation(d ^ 1)``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .errors import (
    LoopObstruction,
    MalformedRotation,
    NotConnected,
    NotToroidal,
    PreconditionFailed,
)

ANTICLOCKWISE = "anticlockwise"
CLOCKWISE = "clockwise"


def dart_ref(edge_id: str, sign: int) -> str:
    return f"{edge_id}{'+' if sign == 0 else '-'}"


def parse_dart_ref(ref: str):
    ref = ref.strip().replace("−", "-")
    if len(ref) < 2 or ref[-1] not in "+-":
        raise MalformedRotation(f"bad dart reference {ref!r}; expected 'edgeId+' or 'edgeId-'")
    return ref[:-1], 0 if ref[-1] == "+" else 1


@dataclass(frozen=True)
class Dart:
    id: str
    edge: str
    vertex: str


@dataclass(frozen=True)
class FaceWalk:
    """A facial walk as the cyclic sequence of darts it leaves along."""

    face_id: str
    darts: tuple  # dart refs, cyclically normalised
    vertices: tuple  # tail vertex of each dart

    @property
    def length(self) -> int:
        return len(self.darts)

    @property
    def edges(self) -> tuple:
        return tuple(parse_dart_ref(d)[0] for d in self.darts)

    @property
    def sequence(self) -> tuple:
        """Alternating vertex/dart sequence ``v1 d1 v2 d2 ...``."""
        out = []
        for v, d in zip(self.vertices, self.darts):
            out.extend((v, d))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class EmbeddedGraph:
    """Connected graph with a rotation system whose faces tile a torus.

    Use :func:`build` to construct validated instances.
    """

    vertices: tuple
    edges: tuple  # ((edge_id, (v, w)), ...)
    rotation: dict  # vertex -> tuple of dart refs
    orientation: str = ANTICLOCKWISE
    _cache: dict = field(default_factory=dict, repr=False)

    # -- internal permutation view ----------------------------------------

    @cached_property
    def edge_ids(self) -> tuple:
        return tuple(e for e, _ in self.edges)

    @cached_property
    def edge_index(self) -> dict:
        return {e: k for k, e in enumerate(self.edge_ids)}

    @cached_property
    def ends(self) -> dict:
        return {e: tuple(vw) for e, vw in self.edges}

    @property
    def n_darts(self) -> int:
        return 2 * len(self.edges)

    def dart_index(self, ref: str) -> int:
        e, s = parse_dart_ref(ref)
        return 2 * self.edge_index[e] + s

    def dart_name(self, d: int) -> str:
        return dart_ref(self.edge_ids[d >> 1], d & 1)

    @cached_property
    def dart_vertex(self) -> tuple:
        out = []
        for _, (v, w) in self.edges:
            out.extend((v, w))
        return tuple(out)

    @cached_property
    def sigma(self) -> tuple:
        """Listed rotation as a permutation of dart indices."""
        perm = [None] * self.n_darts
        for v in self.vertices:
            cyc = [self.dart_index(x) for x in self.rotation[v]]
            for i, d in enumerate(cyc):
                perm[d] = cyc[(i + 1) % len(cyc)]
        return tuple(perm)

    @cached_property
    def sigma_inv(self) -> tuple:
        inv = [0] * self.n_darts
        for d, s in enumerate(self.sigma):
            inv[s] = d
        return tuple(inv)

    @cached_property
    def phi(self) -> tuple:
        """Face permutation: successor of a dart along its facial walk."""
        s = self.sigma
        return tuple(s[d ^ 1] for d in range(self.n_darts))

    @cached_property
    def darts(self) -> tuple:
        return tuple(Dart(self.dart_name(d), self.edge_ids[d >> 1], self.dart_vertex[d])
                     for d in range(self.n_darts))

    # -- basic invariants --------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.face_walks)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def degree(self, v) -> int:
        return len(self.rotation[v])

    def degrees(self) -> Counter:
        return Counter(len(self.rotation[v]) for v in self.vertices)

    def loops(self) -> list:
        return [e for e, (v, w) in self.edges if v == w]

    def has_loops(self) -> bool:
        return bool(self.loops())

    # -- faces -------------------------------------------------------------

    @cached_property
    def _face_orbits(self) -> tuple:
        """Face orbits as tuples of dart indices, least rotation first."""
        phi = self.phi
        seen = [False] * self.n_darts
        orbits = []
        for d0 in range(self.n_darts):
            if seen[d0]:
                continue
            cyc = []
            d = d0
            while not seen[d]:
                seen[d] = True
                cyc.append(d)
                d = phi[d]
            orbits.append(_least_rotation(cyc))
        orbits.sort()
        return tuple(orbits)

    @cached_property
    def face_walks(self) -> tuple:
        out = []
        for k, orb in enumerate(self._face_orbits):
            out.append(FaceWalk(f"F{k}", tuple(self.dart_name(d) for d in orb),
                                tuple(self.dart_vertex[d] for d in orb)))
        return tuple(out)

    @cached_property
    def face_ids(self) -> tuple:
        return tuple(w.face_id for w in self.face_walks)

    @cached_property
    def dart_face(self) -> tuple:
        """Face id of the walk that leaves along each dart."""
        out = [None] * self.n_darts
        for w, orb in zip(self.face_walks, self._face_orbits):
            for d in orb:
                out[d] = w.face_id
        return tuple(out)

    def face_vertices(self, face_id) -> set:
        return set(self.face_walk(face_id).vertices)

    def face_walk(self, face_id) -> FaceWalk:
        return self.face_walks[self.face_ids.index(face_id)]

    # -- sectors -----------------------------------------------------------

    @cached_property
    def sectors(self) -> tuple:
        """One sector per dart ``x``: between ``x`` and its rotation successor.

        Returns tuples ``(key, vertex, face_id)`` with key ``"v:x:next"``.
        The sector belongs to the face whose walk arrives along ``x``.
        """
        out = []
        for v in self.vertices:
            for ref in self.rotation[v]:
                x = self.dart_index(ref)
                nxt = self.dart_name(self.sigma[x])
                out.append((f"{v}:{ref}:{nxt}", v, self.dart_face[x ^ 1]))
        return tuple(out)

    # -- conversions -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "ends": list(vw)} for e, vw in self.edges],
            "rotation": {v: list(self.rotation[v]) for v in self.vertices},
            "orientation": self.orientation,
        }

    def with_orientation(self, orientation: str) -> "EmbeddedGraph":
        return EmbeddedGraph(self.vertices, self.edges, dict(self.rotation), orientation)

    def __eq__(self, other):
        if not isinstance(other, EmbeddedGraph):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.vertices, self.edges, self.orientation,
                     tuple(tuple(self.rotation[v]) for v in self.vertices)))

    def __repr__(self):
        return (f"EmbeddedGraph(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces}, {self.orientation})")


def _least_rotation(seq):
    n = len(seq)
    i = min(range(n), key=lambda k: seq[k:] + seq[:k])
    return tuple(seq[i:] + seq[:i])


def build(vertices, edges, rotation, orientation=ANTICLOCKWISE) -> EmbeddedGraph:
    """Validate and build an embedded toroidal graph.

    ``edges`` is a sequence of ``(id, (v, w))`` pairs or ``{"id":..., "ends":[v, w]}``
    dicts; ``rotation`` maps each vertex to its cyclic list of dart refs.
    """
    vertices = tuple(str(v) for v in vertices)
    if len(set(vertices)) != len(vertices):
        raise MalformedRotation("duplicate vertex ids")
    norm_edges = []
    for e in edges:
        if isinstance(e, dict):
            eid, ends = e["id"], e["ends"]
        else:
            eid, ends = e
        if len(ends) != 2:
            raise MalformedRotation(f"edge {eid!r} must have exactly two ends")
        v, w = (str(x) for x in ends)
        for x in (v, w):
            if x not in vertices:
                raise MalformedRotation(f"edge {eid!r} references unknown vertex {x!r}")
        norm_edges.append((str(eid), (v, w)))
    ids = [e for e, _ in norm_edges]
    if len(set(ids)) != len(ids):
        raise MalformedRotation("duplicate edge ids")
    if orientation not in (ANTICLOCKWISE, CLOCKWISE):
        raise MalformedRotation(f"unknown orientation {orientation!r}")
    ends = dict(norm_edges)
    rot = {}
    seen = set()
    for v in vertices:
        if v not in rotation:
            raise MalformedRotation(f"no rotation given for vertex {v!r}")
        cyc = tuple(str(x).replace("−", "-") for x in rotation[v])
        for ref in cyc:
            eid, s = parse_dart_ref(ref)
            if eid not in ends:
                raise MalformedRotation(f"dart {ref!r} at {v!r} references unknown edge")
            if ends[eid][s] != v:
                raise MalformedRotation(f"dart {ref!r} is not incident with {v!r}")
            if ref in seen:
                raise MalformedRotation(f"dart {ref!r} listed twice")
            seen.add(ref)
        rot[v] = cyc
    extra = set(rotation) - set(vertices)
    if extra:
        raise MalformedRotation(f"rotation given for unknown vertices {sorted(extra)}")
    if len(seen) != 2 * len(norm_edges):
        missing = sorted({dart_ref(e, s) for e in ids for s in (0, 1)} - seen)
        raise MalformedRotation(f"darts missing from the rotation: {missing}")
    g = EmbeddedGraph(vertices, tuple(norm_edges), rot, orientation)
    if not _connected(g):
        raise NotConnected("graph is not connected")
    chi = g.euler_characteristic()
    if chi != 0:
        raise NotToroidal(f"Euler characteristic V - E + F = {chi}, expected 0")
    return g


def _connected(g: EmbeddedGraph) -> bool:
    if not g.vertices:
        return False
    adj = {v: set() for v in g.vertices}
    for _, (v, w) in g.edges:
        adj[v].add(w)
        adj[w].add(v)
    seen = {g.vertices[0]}
    todo = [g.vertices[0]]
    while todo:
        v = todo.pop()
        for w in adj[v] - seen:
            seen.add(w)
            todo.append(w)
    return len(seen) == len(g.vertices)


def faces(g: EmbeddedGraph) -> list:
    """Facial walks of ``g``, each cyclically normalised, in a deterministic order."""
    return list(g.face_walks)


def dual(g: EmbeddedGraph) -> EmbeddedGraph:
    """Geometric dual: a vertex per face, edge ``e`` crossing primal edge ``e``.

    The rotation at a dual vertex is the order of its facial walk; that walk
    runs clockwise around the face, so the orientation flag is flipped.
    Dart ``e+`` of the dual sits in the face whose walk leaves along ``e+``.
    """
    df = g.dart_face
    edges = tuple((e, (df[2 * k], df[2 * k + 1])) for k, e in enumerate(g.edge_ids))
    rotation = {w.face_id: tuple(w.darts) for w in g.face_walks}
    flag = CLOCKWISE if g.orientation == ANTICLOCKWISE else ANTICLOCKWISE
    return build(g.face_ids, edges, rotation, flag)


def negate(g: EmbeddedGraph) -> EmbeddedGraph:
    """``-g``: same rotation listing, opposite orientation convention."""
    flag = CLOCKWISE if g.orientation == ANTICLOCKWISE else ANTICLOCKWISE
    return g.with_orientation(flag)


def as_anticlockwise(g: EmbeddedGraph) -> EmbeddedGraph:
    """Same embedded graph with its rotation listed anti-clockwise."""
    if g.orientation == ANTICLOCKWISE:
        return g
    rot = {v: (c[:1] + tuple(reversed(c[1:]))) for v, c in g.rotation.items()}
    return EmbeddedGraph(g.vertices, g.edges, rot, ANTICLOCKWISE)


def relabel(g: EmbeddedGraph, vertex_map=None, edge_map=None, reverse=False,
            flip_edges=()) -> EmbeddedGraph:
    """Rename vertices/edges; optionally reverse every rotation or swap edge ends."""
    vm = vertex_map or {v: v for v in g.vertices}
    em = edge_map or {e: e for e in g.edge_ids}
    flip = set(flip_edges)
    edges = []
    for e, (v, w) in g.edges:
        a, b = (w, v) if e in flip else (v, w)
        edges.append((em[e], (vm[a], vm[b])))

    def ref(r):
        e, s = parse_dart_ref(r)
        if e in flip:
            s ^= 1
        return dart_ref(em[e], s)

    rot = {}
    for v in g.vertices:
        cyc = tuple(ref(r) for r in g.rotation[v])
        if reverse:
            cyc = cyc[:1] + tuple(reversed(cyc[1:]))
        rot[vm[v]] = cyc
    return build([vm[v] for v in g.vertices], edges, rot, g.orientation)


# -- common refinement -----------------------------------------------------

@dataclass(frozen=True)
class RefinedGraph:
    """Three-level common refinement of a graph and its dual."""

    graph: EmbeddedGraph
    levels: dict  # vertex id -> 1, 2 or 3
    quad_faces: tuple  # (level1 vertex, level2 vertex, level3 vertex, level2 vertex)

    @property
    def directed_edges(self) -> tuple:
        return tuple((v, w) for _, (v, w) in self.graph.edges)


def refine(g: EmbeddedGraph) -> RefinedGraph:
    """Build the common refinement of ``g`` and ``dual(g)``.

    Level-2 vertex ``s:e`` sits where ``e`` crosses its dual edge; its four
    neighbours in anti-clockwise order are the head of ``e``, the face on the
    left of ``e``, the tail of ``e`` and the face on its right.
    """
    g = as_anticlockwise(g)
    d = dual(g)
    if g.has_loops() or d.has_loops():
        raise LoopObstruction("refinement needs a loop-free graph with a loop-free dual")
    df = g.dart_face
    vertices = list(g.vertices) + [f"s:{e}" for e in g.edge_ids] + list(g.face_ids)
    levels = {v: 1 for v in g.vertices}
    levels.update({f"s:{e}": 2 for e in g.edge_ids})
    levels.update({f: 3 for f in g.face_ids})
    edges = []
    rot = {v: [] for v in vertices}
    for k, e in enumerate(g.edge_ids):
        u, w = g.ends[e]
        right, left = df[2 * k], df[2 * k + 1]
        s = f"s:{e}"
        # level-2 -> level-1 edges, level-3 -> level-2 edges
        edges += [(f"{e}.u", (s, u)), (f"{e}.w", (s, w)),
                  (f"{e}.r", (right, s)), (f"{e}.l", (left, s))]
        rot[s] = [f"{e}.w+", f"{e}.l-", f"{e}.u+", f"{e}.r-"]
    for v in g.vertices:
        for ref in g.rotation[v]:
            e, sgn = parse_dart_ref(ref)
            rot[v].append(f"{e}.{'u' if sgn == 0 else 'w'}-")
    for walk in g.face_walks:
        # anti-clockwise around the face is the reversed walk
        cyc = []
        for ref in reversed(walk.darts):
            e, sgn = parse_dart_ref(ref)
            cyc.append(f"{e}.{'r' if sgn == 0 else 'l'}+")
        rot[walk.face_id] = cyc
    p = build(vertices, edges, rot)
    quads = []
    for w in p.face_walks:
        if w.length != 4:
            raise PreconditionFailed(f"refinement face of length {w.length}")
        by_level = sorted(w.vertices, key=lambda x: levels[x])
        if [levels[x] for x in by_level] != [1, 2, 2, 3]:
            raise PreconditionFailed("refinement face is not a Level 1-2-3-2 quadrilateral")
        i = [levels[x] for x in w.vertices].index(1)
        vs = w.vertices[i:] + w.vertices[:i]
        quads.append(tuple(vs))
    return RefinedGraph(p, levels, tuple(quads))


# -- equivalence -------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceWitness:
    vertex_map: dict
    edge_map: dict
    orientation: str  # "preserving" | "reversing"
    dart_map: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"orientation": self.orientation,
                "vertex_map": dict(sorted(self.vertex_map.items())),
                "edge_map": dict(sorted(self.edge_map.items())),
                "dart_map": dict(sorted(self.dart_map.items()))}


def _effective_sigma(g: EmbeddedGraph):
    return g.sigma if g.orientation == ANTICLOCKWISE else g.sigma_inv


def _code(sig, root, n):
    """Breadth-first relabelling of the map (sig, d^1) from ``root``."""
    label = {root: 0}
    order = [root]
    q = deque([root])
    code = []
    while q:
        x = q.popleft()
        for y in (sig[x], x ^ 1):
            if y not in label:
                label[y] = len(order)
                order.append(y)
                q.append(y)
        code.append((label[sig[x]], label[x ^ 1]))
    if len(order) != n:
        return None, None
    return tuple(code), order


def canonical_code(g: EmbeddedGraph, senses=("preserving", "reversing")) -> tuple:
    """Least breadth-first code over all roots (and the allowed senses)."""
    key = ("code", senses)
    if key not in g._cache:
        sig = _effective_sigma(g)
        inv = [0] * len(sig)
        for d, s in enumerate(sig):
            inv[s] = d
        best = None
        for sense in senses:
            s = sig if sense == "preserving" else tuple(inv)
            for r in range(g.n_darts):
                c, _ = _code(s, r, g.n_darts)
                if c is not None and (best is None or c < best):
                    best = c
        g._cache[key] = best
    return g._cache[key]


def equivalent(g: EmbeddedGraph, h: EmbeddedGraph, sense: Optional[str] = None):
    """Orientation-aware isomorphism of embedded graphs.

    Rotations are compared in their anti-clockwise reading.  With
    ``sense=None`` a preserving witness is preferred over a reversing one.
    Returns an :class:`EquivalenceWitness` or ``None``.
    """
    if (g.n_vertices, g.n_edges, g.n_faces) != (h.n_vertices, h.n_edges, h.n_faces):
        return None
    if g.degrees() != h.degrees():
        return None
    senses = ("preserving", "reversing") if sense is None else (sense,)
    sg = _effective_sigma(g)
    code_g, order_g = _code(sg, 0, g.n_darts)
    sh = _effective_sigma(h)
    sh_inv = [0] * len(sh)
    for d, s in enumerate(sh):
        sh_inv[s] = d
    for sn in senses:
        s = sh if sn == "preserving" else tuple(sh_inv)
        for r in range(h.n_darts):
            c, order_h = _code(s, r, h.n_darts)
            if c == code_g:
                dmap = {order_g[i]: order_h[i] for i in range(len(order_g))}
                vmap = {g.dart_vertex[x]: h.dart_vertex[y] for x, y in dmap.items()}
                emap = {g.edge_ids[x >> 1]: h.edge_ids[y >> 1] for x, y in dmap.items()}
                names = {g.dart_name(x): h.dart_name(y) for x, y in dmap.items()}
                return EquivalenceWitness(vmap, emap, sn, names)
    return None


def equivalence_senses(g: EmbeddedGraph, h: EmbeddedGraph) -> set:
    """Subset of ``{"preserving", "reversing"}`` for which ``g ~ h``."""
    return {s for s in ("preserving", "reversing") if equivalent(g, h, s) is not None}


def verify_witness(g: EmbeddedGraph, h: EmbeddedGraph, w: EquivalenceWitness) -> bool:
    """Check that a witness commutes with the (anti-clockwise) rotations."""
    dm = {g.dart_index(a): h.dart_index(b) for a, b in w.dart_map.items()}
    if sorted(dm.values()) != list(range(h.n_darts)) or len(dm) != g.n_darts:
        return False
    sg, sh = _effective_sigma(g), _effective_sigma(h)
    if w.orientation == "reversing":
        inv = [0] * len(sh)
        for d, s in enumerate(sh):
            inv[s] = d
        sh = inv
    for x, y in dm.items():
        if dm[x ^ 1] != y ^ 1 or dm[sg[x]] != sh[y]:
            return False
        if w.vertex_map[g.dart_vertex[x]] != h.dart_vertex[y]:
            return False
    return True


# -- self duality ------------------------------------------------------------

@dataclass(frozen=True)
class SelfDualResult:
    degree_test: bool
    direct_test: bool
    witness: Optional[EquivalenceWitness]
    primal_degrees: tuple
    dual_degrees: tuple

    @property
    def agree(self) -> bool:
        return self.degree_test == self.direct_test

    def to_dict(self) -> dict:
        return {"degree_test": self.degree_test, "direct_test": self.direct_test,
                "primal_degrees": list(self.primal_degrees),
                "dual_degrees": list(self.dual_degrees),
                "witness": None if self.witness is None else self.witness.to_dict()}


def self_dual_check(g: EmbeddedGraph) -> SelfDualResult:
    """Compare ``g`` with ``-dual(g)`` by degree multisets and by direct equivalence."""
    d = dual(g)
    if g.has_loops() or d.has_loops():
        raise PreconditionFailed("self-duality test needs a loop-free graph with the E-property")
    dg = tuple(sorted(g.degree(v) for v in g.vertices))
    dd = tuple(sorted(d.degree(v) for v in d.vertices))
    w = equivalent(g, negate(d))
    return SelfDualResult(dg == dd, w is not None, w, dg, dd)
