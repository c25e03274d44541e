"""Exhaustive enumeration of small Newton candidates and seeded fixtures.

A candidate of order ``r`` is a connected, loop-free multigraph with ``r``
vertices and ``2r`` edges together with a rotation system whose faces tile
a torus (so there are ``r`` faces).  Candidates are returned one per
equivalence class (orientation-preserving or -reversing).
"""

from __future__ import annotations

import itertools
import random

from .torus_graph import EmbeddedGraph, build, canonical_code, dart_ref


def _connected(r, pairs, mult):
    adj = {i: set() for i in range(r)}
    for (i, j), m in zip(pairs, mult):
        if m:
            adj[i].add(j)
            adj[j].add(i)
    seen = {0}
    todo = [0]
    while todo:
        x = todo.pop()
        for y in adj[x] - seen:
            seen.add(y)
            todo.append(y)
    return len(seen) == r


def multigraphs(r: int):
    """Connected loop-free multigraphs on ``r`` vertices with ``2r`` edges, up to relabelling.

    Each is a tuple of edge multiplicities over the vertex pairs ``(i, j), i < j``.
    """
    pairs = list(itertools.combinations(range(r), 2))
    index = {p: k for k, p in enumerate(pairs)}
    perms = list(itertools.permutations(range(r)))
    seen = set()
    out = []
    for comb in itertools.combinations_with_replacement(range(len(pairs)), 2 * r):
        mult = [0] * len(pairs)
        for c in comb:
            mult[c] += 1
        if not _connected(r, pairs, mult):
            continue
        best = None
        for p in perms:
            m2 = [0] * len(pairs)
            for (i, j), m in zip(pairs, mult):
                a, b = sorted((p[i], p[j]))
                m2[index[(a, b)]] = m
            t = tuple(m2)
            if best is None or t > best:
                best = t
        if best not in seen:
            seen.add(best)
            out.append(best)
    return pairs, sorted(out, reverse=True)


def _count_faces(sigma):
    n = len(sigma)
    seen = bytearray(n)
    faces = 0
    for d0 in range(n):
        if seen[d0]:
            continue
        faces += 1
        d = d0
        while not seen[d]:
            seen[d] = 1
            d = sigma[d ^ 1]
    return faces


def _anchored_orders(darts, cls):
    """Cyclic orders of ``darts`` up to relabelling parallel edges.

    ``cls[d]`` is the parallel class of dart ``d``; within a class the
    darts must appear in increasing order, and the first dart is fixed.
    """
    first, rest = darts[0], darts[1:]
    for perm in itertools.permutations(rest):
        last = {}
        ok = True
        last[cls[first]] = first
        for d in perm:
            c = cls[d]
            if c in last and d < last[c]:
                ok = False
                break
            last[c] = d
        if ok:
            yield (first,) + perm


def _rotation_systems(r, pairs, mult):
    """Yield ``(edge_list, per-vertex dart cycles)`` for toroidal rotations."""
    edges = []
    for (i, j), m in zip(pairs, mult):
        edges.extend([(i, j)] * m)
    n = 2 * len(edges)
    at = [[] for _ in range(r)]
    cls = {}
    for k, (i, j) in enumerate(edges):
        at[i].append(2 * k)
        at[j].append(2 * k + 1)
        cls[2 * k] = cls[2 * k + 1] = (i, j)
    anchor = max(range(r), key=lambda v: (len(at[v]), -v))
    choices = []
    for v in range(r):
        ds = at[v]
        if v == anchor:
            choices.append(list(_anchored_orders(ds, cls)))
        else:
            choices.append([(ds[0],) + p for p in itertools.permutations(ds[1:])])
    sigma = [0] * n
    for combo in itertools.product(*choices):
        for cyc in combo:
            L = len(cyc)
            for i in range(L):
                sigma[cyc[i]] = cyc[(i + 1) % L]
        if _count_faces(sigma) == r:
            yield edges, combo


def _to_graph(edges, combo) -> EmbeddedGraph:
    r = len(combo)
    names = [f"v{i + 1}" for i in range(r)]
    eids = [f"e{k + 1}" for k in range(len(edges))]
    es = [(eids[k], (names[i], names[j])) for k, (i, j) in enumerate(edges)]
    rot = {names[v]: [dart_ref(eids[d >> 1], d & 1) for d in combo[v]] for v in range(r)}
    return build(names, es, rot)


def enumerate_candidates(r: int) -> list:
    """All order-``r`` Newton candidates, one per equivalence class, deterministic order."""
    pairs, graphs = multigraphs(r)
    out = []
    seen = set()
    for mult in graphs:
        for edges, combo in _rotation_systems(r, pairs, mult):
            g = _to_graph(edges, combo)
            key = canonical_code(g)
            if key in seen:
                continue
            seen.add(key)
            out.append(g)
    return out


def search_space_size(r: int) -> int:
    """Number of rotation systems examined by :func:`enumerate_candidates`."""
    pairs, graphs = multigraphs(r)
    total = 0
    for mult in graphs:
        edges = []
        for (i, j), m in zip(pairs, mult):
            edges.extend([(i, j)] * m)
        at = [[] for _ in range(r)]
        cls = {}
        for k, (i, j) in enumerate(edges):
            at[i].append(2 * k)
            at[j].append(2 * k + 1)
            cls[2 * k] = cls[2 * k + 1] = (i, j)
        anchor = max(range(r), key=lambda v: (len(at[v]), -v))
        n = 1
        for v in range(r):
            if v == anchor:
                n *= sum(1 for _ in _anchored_orders(at[v], cls))
            else:
                n *= max(1, _factorial(len(at[v]) - 1))
        total += n
    return total


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


# -- fixtures ------------------------------------------------------------------

def torus_rose() -> EmbeddedGraph:
    """One vertex, two loops, boundary word ``a b a^-1 b^-1``."""
    return build(["v"], [("a", ("v", "v")), ("b", ("v", "v"))], {"v": ["a+", "b+", "a-", "b-"]})


def g2() -> EmbeddedGraph:
    """The order-2 Newton graph: two vertices joined by four parallel edges."""
    edges = [(e, ("v1", "v2")) for e in "abcd"]
    return build(["v1", "v2"], edges,
                 {"v1": ["a+", "b+", "c+", "d+"], "v2": ["a-", "b-", "c-", "d-"]})


def random_relabel(g: EmbeddedGraph, seed=0, reverse=False) -> EmbeddedGraph:
    """Random renaming of vertices and edges (and rotation start points)."""
    rng = random.Random(seed)
    vs = list(g.vertices)
    new_v = [f"x{i}" for i in range(len(vs))]
    rng.shuffle(new_v)
    es = list(g.edge_ids)
    new_e = [f"y{i}" for i in range(len(es))]
    rng.shuffle(new_e)
    vm = dict(zip(vs, new_v))
    em = dict(zip(es, new_e))
    edges = [(em[e], (vm[v], vm[w])) for e, (v, w) in g.edges]
    rot = {}
    for v in vs:
        cyc = [f"{em[r[:-1]]}{r[-1]}" for r in g.rotation[v]]
        if reverse:
            cyc = cyc[:1] + cyc[1:][::-1]
        k = rng.randrange(len(cyc))
        rot[vm[v]] = cyc[k:] + cyc[:k]
    order = list(range(len(edges)))
    rng.shuffle(order)
    vorder = list(vs)
    rng.shuffle(vorder)
    return build([vm[v] for v in vorder], [edges[i] for i in order], rot, g.orientation)


def random_toroidal_graph(n_vertices: int, n_edges: int, seed=0, loops=True,
                          max_tries=100_000) -> EmbeddedGraph:
    """Random connected toroidal map by rejection sampling of rotation systems."""
    rng = random.Random(seed)
    for _ in range(max_tries):
        edges = []
        # spanning tree first so the graph is connected
        for v in range(1, n_vertices):
            edges.append((rng.randrange(v), v))
        while len(edges) < n_edges:
            i = rng.randrange(n_vertices)
            j = rng.randrange(n_vertices)
            if i == j and not loops:
                continue
            edges.append((i, j))
        at = [[] for _ in range(n_vertices)]
        for k, (i, j) in enumerate(edges):
            at[i].append(2 * k)
            at[j].append(2 * k + 1)
        sigma = [0] * (2 * n_edges)
        for ds in at:
            rng.shuffle(ds)
            for i, d in enumerate(ds):
                sigma[d] = ds[(i + 1) % len(ds)]
        if n_vertices - n_edges + _count_faces(sigma) == 0:
            return _to_graph(edges, [tuple(ds) for ds in at])
    raise RuntimeError("no toroidal rotation system found")


def _face_corners(at, edges):
    """Faces as lists of corners ``(vertex, position)``; a corner sits right after that dart."""
    where = {}
    for v, ds in enumerate(at):
        for i, d in enumerate(ds):
            where[d] = (v, i)
    seen = set()
    out = []
    for d0 in where:
        if d0 in seen:
            continue
        corners = []
        d = d0
        while d not in seen:
            seen.add(d)
            v, i = where[d ^ 1]
            corners.append((v, i))
            d = at[v][(i + 1) % len(at[v])]
        out.append(corners)
    return out


def random_newton_candidate(r: int, seed=0) -> EmbeddedGraph:
    """Random loop-free toroidal map with ``r`` vertices, ``2r`` edges and ``r`` faces.

    Grows the order-2 map by vertex splits followed by a face diagonal
    between distinct vertices; both moves keep the surface a torus, so no
    rejection step is needed and large orders are cheap.
    """
    if r < 2:
        raise ValueError("order must be at least 2")
    rng = random.Random(seed)
    edges = [(0, 1)] * 4
    at = [[0, 2, 4, 6], [1, 3, 5, 7]]
    while len(at) < r:
        v = max(range(len(at)), key=lambda x: (len(at[x]), rng.random()))
        ds = at[v]
        k = len(ds)
        # a proper arc keeps every degree at least 2
        start, length = rng.randrange(k), rng.randrange(1, k)
        rolled = ds[start:] + ds[:start]
        moved, kept = rolled[:length], rolled[length:]
        w = len(at)
        for d in moved:
            ends = list(edges[d >> 1])
            ends[d & 1] = w
            edges[d >> 1] = tuple(ends)
        e = len(edges)
        edges.append((v, w))
        at[v] = kept + [2 * e]
        at.append(moved + [2 * e + 1])
        faces = [c for c in _face_corners(at, edges) if len({x for x, _ in c}) > 1]
        corners = max(faces, key=lambda c: (len(c), rng.random()))
        while True:
            (a, i), (b, j) = rng.sample(corners, 2)
            if a != b:
                break
        e = len(edges)
        edges.append((a, b))
        at[a].insert(i + 1, 2 * e)
        at[b].insert(j + 1, 2 * e + 1)
    sigma = [0] * (2 * len(edges))
    for ds in at:
        for i, d in enumerate(ds):
            sigma[d] = ds[(i + 1) % len(ds)]
    if len(at) - len(edges) + _count_faces(sigma) != 0:  # pragma: no cover
        raise RuntimeError("growth step left the torus")
    return _to_graph(edges, [tuple(ds) for ds in at])
