"""Bipartite matching (Hopcroft-Karp) and Koenig-style deficiency sets."""

from __future__ import annotations

from collections import deque

INF = float("inf")


class BipartiteMatcher:
    """Maximum matching of ``left`` into ``right`` for adjacency ``adj``.

    ``adj`` maps each left vertex to an ordered list of right vertices; the
    order fixes which maximum matching is returned.
    """

    def __init__(self, adj):
        self.adj = {x: list(ys) for x, ys in adj.items()}
        self.left = list(self.adj)
        self.match_left = {}
        self.match_right = {}
        self.calls = 0

    def _bfs(self, banned):
        dist = {}
        q = deque()
        for x in self.left:
            if x not in self.match_left:
                dist[x] = 0
                q.append(x)
        found = INF
        while q:
            x = q.popleft()
            if dist[x] >= found:
                continue
            for y in self.adj[x]:
                if y in banned:
                    continue
                x2 = self.match_right.get(y)
                if x2 is None:
                    found = min(found, dist[x] + 1)
                elif x2 not in dist:
                    dist[x2] = dist[x] + 1
                    q.append(x2)
        return dist, found

    def _dfs(self, x, dist, found, banned):
        for y in self.adj[x]:
            if y in banned:
                continue
            x2 = self.match_right.get(y)
            if x2 is None:
                if dist[x] + 1 == found:
                    self.match_left[x] = y
                    self.match_right[y] = x
                    return True
            elif dist.get(x2) == dist[x] + 1 and self._dfs(x2, dist, found, banned):
                self.match_left[x] = y
                self.match_right[y] = x
                return True
        dist[x] = INF
        return False

    def maximum(self, banned=frozenset()) -> dict:
        """Hopcroft-Karp phases until no augmenting path remains."""
        self.calls += 1
        while True:
            dist, found = self._bfs(banned)
            if found == INF:
                break
            for x in self.left:
                if x not in self.match_left:
                    self._dfs(x, dist, found, banned)
        return dict(self.match_left)

    def augment_from(self, x, banned=frozenset()) -> bool:
        """Single augmenting-path search from the free left vertex ``x``."""
        self.calls += 1
        seen = set()

        def visit(u):
            for y in self.adj[u]:
                if y in banned or y in seen:
                    continue
                seen.add(y)
                u2 = self.match_right.get(y)
                if u2 is None or visit(u2):
                    self.match_left[u] = y
                    self.match_right[y] = u
                    return True
            return False

        return visit(x)

    def unmatch(self, x):
        y = self.match_left.pop(x, None)
        if y is not None:
            del self.match_right[y]
        return y

    def force(self, x, y):
        self.match_left[x] = y
        self.match_right[y] = x

    def alternating_reach(self, x, banned=frozenset()) -> set:
        """Left vertices reachable from ``x`` by alternating paths (x free)."""
        reach = {x}
        q = deque([x])
        while q:
            u = q.popleft()
            for y in self.adj[u]:
                if y in banned:
                    continue
                u2 = self.match_right.get(y)
                if u2 is not None and u2 not in reach:
                    reach.add(u2)
                    q.append(u2)
        return reach
