"""Multihypergraph representation, modification operators, and diagnostics.

Vertices are integers ``0..num_vertices-1``.  The edge multiset is kept in a
canonical sorted order; copies of the same edge are distinct objects
identified by their position in :attr:`Multihypergraph.edges` (the "edge
id"), so self-avoiding walks can tell parallel edges apart.  Empty edges are
allowed and carry multiplicity like any other edge.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass

__all__ = [
    "Multihypergraph",
    "SAW",
    "TreeLikeReport",
    "degree_stats",
    "enumerate_saws",
    "is_linear_hypertree",
    "relabel_vertices",
    "parse_hypergraph",
    "write_hypergraph",
]


class Multihypergraph:
    """A vertex count plus a multiset of hyperedges.

    Each edge is stored as a strictly increasing tuple of vertex indices;
    the edge list itself is sorted, so equal multihypergraphs compare equal
    and edge ids are reproducible.  Instances are immutable: every operator
    returns a new graph.
    """

    __slots__ = ("num_vertices", "edges")

    def __init__(self, num_vertices, edges=()):
        num_vertices = int(num_vertices)
        if num_vertices < 0:
            raise ValueError("num_vertices must be non-negative")
        canon = []
        for e in edges:
            t = tuple(sorted(int(u) for u in e))
            for u in t:
                if not 0 <= u < num_vertices:
                    raise ValueError(f"vertex {u} out of range [0, {num_vertices})")
            if any(t[i] == t[i + 1] for i in range(len(t) - 1)):
                raise ValueError(f"repeated vertex inside edge {t}")
            canon.append(t)
        canon.sort()
        object.__setattr__(self, "num_vertices", num_vertices)
        object.__setattr__(self, "edges", tuple(canon))

    def __setattr__(self, name, value):
        raise AttributeError("Multihypergraph is immutable")

    def __eq__(self, other):
        if not isinstance(other, Multihypergraph):
            return NotImplemented
        return self.num_vertices == other.num_vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.num_vertices, self.edges))

    def __repr__(self):
        return f"Multihypergraph({self.num_vertices}, {list(map(list, self.edges))})"

    @property
    def num_edges(self):
        """Edge count with multiplicity."""
        return len(self.edges)

    def edge_multiplicities(self):
        """Counter mapping each distinct edge (tuple) to its multiplicity."""
        return Counter(self.edges)

    def degrees(self):
        """Vertex degrees with multiplicity, as a list of length num_vertices."""
        deg = [0] * self.num_vertices
        for e in self.edges:
            for u in e:
                deg[u] += 1
        return deg

    def incident_edge_ids(self):
        """For each vertex, the sorted list of ids of edges containing it."""
        inc = [[] for _ in range(self.num_vertices)]
        for i, e in enumerate(self.edges):
            for u in e:
                inc[u].append(i)
        return inc

    def uniformity(self):
        """The common edge size k, or None if edges have mixed sizes.

        An edgeless graph has no witnessed size and also returns None.
        """
        sizes = {len(e) for e in self.edges}
        if len(sizes) == 1:
            return sizes.pop()
        return None

    def max_edge_size(self):
        return max((len(e) for e in self.edges), default=0)

    # -- modification operators -------------------------------------------

    def _index_map(self, removed):
        keep = [v for v in range(self.num_vertices) if v not in removed]
        return {old: new for new, old in enumerate(keep)}

    def remove_vertices(self, vertices):
        """Delete a vertex set and every edge meeting it.

        Returns ``(graph, index_map)`` where ``index_map`` sends surviving
        old vertex indices to their new dense indices.
        """
        removed = frozenset(int(v) for v in vertices)
        for v in removed:
            if not 0 <= v < self.num_vertices:
                raise ValueError(f"vertex {v} out of range")
        imap = self._index_map(removed)
        new_edges = [
            tuple(imap[u] for u in e)
            for e in self.edges
            if not removed.intersection(e)
        ]
        return Multihypergraph(len(imap), new_edges), imap

    def contract_vertices(self, vertices):
        """Remove a vertex set from the vertex set and from every edge.

        In Gibbs terms this conditions on the given vertices being occupied:
        each edge keeps only its surviving endpoints and may shrink to the
        empty edge.  Returns ``(graph, index_map)``.
        """
        removed = frozenset(int(v) for v in vertices)
        for v in removed:
            if not 0 <= v < self.num_vertices:
                raise ValueError(f"vertex {v} out of range")
        imap = self._index_map(removed)
        new_edges = [tuple(imap[u] for u in e if u not in removed) for e in self.edges]
        return Multihypergraph(len(imap), new_edges), imap

    def remove_edges(self, edge_lists):
        """Delete a sub-multiset of edges (given as vertex lists).

        Raises ValueError if the argument is not a sub-multiset of the edge
        multiset.  Vertices are unchanged.
        """
        to_remove = Counter(tuple(sorted(int(u) for u in e)) for e in edge_lists)
        have = self.edge_multiplicities()
        for e, m in to_remove.items():
            if have[e] < m:
                raise ValueError(f"edge {e} with multiplicity {m} is not present")
        remaining = []
        seen = Counter()
        for e in self.edges:
            if seen[e] < to_remove.get(e, 0):
                seen[e] += 1
            else:
                remaining.append(e)
        return Multihypergraph(self.num_vertices, remaining)


@dataclass(frozen=True)
class SAW:
    """A self-avoiding walk: alternating distinct vertices and edge ids.

    ``vertices`` has one more entry than ``edge_ids``; consecutive vertices
    both lie in the connecting edge.  Copies of a multi-edge count as
    distinct edges.
    """

    vertices: tuple
    edge_ids: tuple

    @property
    def length(self):
        return len(self.edge_ids)

    @property
    def end(self):
        return self.vertices[-1]


@dataclass(frozen=True)
class TreeLikeReport:
    """Degree/codegree statistics quantifying how tree-like a hypergraph is.

    ``ratios`` holds the diagnostic quotients whose asymptotic behaviour
    defines a tree-like sequence; finite instances only expose the raw
    numbers and leave thresholds to the caller.
    """

    delta: int
    delta_min: int
    delta_ell: dict
    gamma: int
    edge_vertex_ratio: float
    ratios: dict


def degree_stats(graph, k=None):
    """Exact maximum ell-degrees and maximum (k-1)-codegree of a k-uniform graph.

    ``delta_ell[ell]`` is the maximum, over vertex sets S of size ell, of the
    number of edges containing S (with multiplicity); only subsets occurring
    inside an edge can have positive count, so a per-edge subset scan is
    exact.  ``gamma`` is the maximum over vertex pairs v != v' of the number
    of distinct (k-1)-sets S with both S+{v} and S+{v'} present as edges.
    Memory is O(sum_e 2^k).
    """
    if k is None:
        k = graph.uniformity()
        if k is None:
            raise ValueError("graph has mixed edge sizes; pass k explicitly")
    if k < 2:
        raise ValueError("k must be >= 2")
    if any(len(e) != k for e in graph.edges):
        raise ValueError("graph is not k-uniform")

    deg = graph.degrees()
    delta = max(deg, default=0)
    delta_min = min(deg, default=0)

    delta_ell = {}
    for ell in range(2, k):
        counts = Counter()
        for e in graph.edges:
            for s in itertools.combinations(e, ell):
                counts[s] += 1
        delta_ell[ell] = max(counts.values(), default=0)

    # For each (k-1)-set S, collect the distinct vertices completing it to an
    # edge; every unordered pair of completions contributes one to their
    # codegree.
    completions = {}
    for e in set(graph.edges):
        for v in e:
            s = tuple(u for u in e if u != v)
            completions.setdefault(s, set()).add(v)
    pair_codegree = Counter()
    for s, verts in completions.items():
        for v, w in itertools.combinations(sorted(verts), 2):
            pair_codegree[(v, w)] += 1
    gamma = max(pair_codegree.values(), default=0)

    n = graph.num_vertices
    m = graph.num_edges
    evr = m / n if n else 0.0
    if delta:
        ell_ratio = max(
            (delta_ell[ell] / delta ** ((k - ell) / (k - 1)) for ell in delta_ell),
            default=0.0,
        )
    else:
        ell_ratio = 0.0
    ratios = {
        "inv_max_degree": 1.0 / delta if delta else float("inf"),
        "ell_degree_ratio": ell_ratio,
        "codegree_ratio": gamma / delta if delta else 0.0,
        "density_ratio": evr / delta if delta else 0.0,
    }
    return TreeLikeReport(delta, delta_min, delta_ell, gamma, evr, ratios)


def enumerate_saws(graph, start, max_len=None):
    """All self-avoiding walks from ``start`` of length <= max_len.

    The length-0 walk ``(start)`` is included.  Parallel copies of an edge
    are explored separately.  ``max_len=None`` means unbounded (the walk
    count is finite since vertices and edges may not repeat).
    """
    if not 0 <= start < graph.num_vertices:
        raise ValueError("start vertex out of range")
    if max_len is not None and max_len < 0:
        raise ValueError("max_len must be >= 0")
    inc = graph.incident_edge_ids()
    out = []
    stack = [(SAW((start,), ()), frozenset((start,)), frozenset())]
    while stack:
        walk, used_v, used_e = stack.pop()
        out.append(walk)
        if max_len is not None and walk.length >= max_len:
            continue
        x = walk.end
        for eid in inc[x]:
            if eid in used_e:
                continue
            for u in graph.edges[eid]:
                if u in used_v:
                    continue
                nxt = SAW(walk.vertices + (u,), walk.edge_ids + (eid,))
                stack.append((nxt, used_v | {u}, used_e | {eid}))
    out.sort(key=lambda w: (w.length, w.vertices, w.edge_ids))
    return out


def is_linear_hypertree(graph):
    """True iff the graph is linear and every vertex pair has a unique SAW.

    Equivalently (for edges of size >= 2) the vertex/edge incidence graph is
    a tree spanning all vertices.  Edges of size one may repeat with
    multiplicity, and empty edges are ignored; parallel copies of a larger
    edge always fail linearity.
    """
    big = [(i, e) for i, e in enumerate(graph.edges) if len(e) >= 2]
    for (_, e), (_, f) in itertools.combinations(big, 2):
        if len(set(e) & set(f)) > 1:
            return False
    n = graph.num_vertices
    if n == 0:
        return True
    if sum(len(e) - 1 for _, e in big) != n - 1:
        return False
    # connectivity over size->=2 edges
    adj = [[] for _ in range(n)]
    for _, e in big:
        for u in e:
            adj[u].append(e)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for e in adj[u]:
            for w in e:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return len(seen) == n


def relabel_vertices(graph, perm):
    """Rename vertex v to perm[v]; perm must be a permutation of range(n)."""
    if sorted(perm) != list(range(graph.num_vertices)):
        raise ValueError("perm is not a permutation of the vertex range")
    return Multihypergraph(
        graph.num_vertices, [tuple(perm[u] for u in e) for e in graph.edges]
    )


def parse_hypergraph(text):
    """Parse the plain-text format: first line ``N M``, then M edge lines.

    Each edge line is a space-separated vertex list; a blank line is the
    empty edge.  ``#`` starts a comment; lines that are comments only are
    skipped entirely.
    """
    lines = []
    for raw in text.splitlines():
        if "#" in raw:
            stripped = raw.split("#", 1)[0]
            if not stripped.strip():
                continue  # pure comment line
            lines.append(stripped)
        else:
            lines.append(raw)
    it = iter(lines)
    header = None
    for line in it:
        if line.strip():
            header = line
            break
    if header is None:
        raise ValueError("empty hypergraph file")
    parts = header.split()
    if len(parts) != 2:
        raise ValueError(f"expected header 'N M', got {header!r}")
    n, m = int(parts[0]), int(parts[1])
    edges = []
    for line in it:
        if len(edges) == m:
            break
        edges.append(tuple(int(tok) for tok in line.split()))
    if len(edges) != m:
        raise ValueError(f"expected {m} edge lines, found {len(edges)}")
    return Multihypergraph(n, edges)


def write_hypergraph(graph):
    """Canonical text form; parse(write(G)) == G and write is idempotent."""
    lines = [f"{graph.num_vertices} {graph.num_edges}"]
    for e in graph.edges:
        lines.append(" ".join(str(u) for u in e))
    return "\n".join(lines) + "\n"
