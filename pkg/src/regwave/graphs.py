"""Simple d-regular graphs: representation, uniform sampling, local balls.

Graphs are stored as an ``(n, d)`` array of sorted neighbor lists.  The
sampler is the pairing (configuration) model with whole-graph rejection,
which is exactly uniform over simple d-regular graphs.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from regwave.errors import IntegrityError, ParameterError, SamplingError

DEFAULT_MAX_TRIES = 100_000


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """Immutable simple d-regular graph on vertices ``0..n-1``."""

    n: int
    d: int
    neighbors: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=np.int64)
        if nb.shape != (self.n, self.d):
            raise IntegrityError(f"neighbor array has shape {nb.shape}, expected {(self.n, self.d)}")
        nb = np.sort(nb, axis=1)
        nb.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)

    # construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n, edges, seed=None):
        """Build from an undirected edge list; raises if not simple regular."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        degrees = {len(a) for a in adj}
        if len(degrees) != 1:
            raise IntegrityError(f"edge list is not regular (degrees {sorted(degrees)})")
        g = cls(n, degrees.pop(), np.array(adj, dtype=np.int64).reshape(n, -1), seed)
        g.validate()
        return g

    @classmethod
    def from_adjacency(cls, adjacency, seed=None):
        adjacency = [list(a) for a in adjacency]
        n = len(adjacency)
        d = len(adjacency[0]) if n else 0
        g = cls(n, d, np.array(adjacency, dtype=np.int64).reshape(n, d), seed)
        g.validate()
        return g

    # queries ------------------------------------------------------------

    @property
    def adjacency(self):
        return [row.tolist() for row in self.neighbors]

    def edges(self):
        """Undirected edges as an ``(n d / 2, 2)`` array with ``u < v``, sorted."""
        u = np.repeat(np.arange(self.n), self.d)
        v = self.neighbors.ravel()
        keep = u < v
        return np.column_stack([u[keep], v[keep]])

    def directed_edges(self):
        """All ``n d`` oriented edges ``(b, c)``."""
        return np.column_stack([np.repeat(np.arange(self.n), self.d), self.neighbors.ravel()])

    def has_edge(self, u, v):
        row = self.neighbors[u]
        k = np.searchsorted(row, v)
        return bool(k < self.d and row[k] == v)

    def adjacency_matrix(self, sparse=False):
        e = self.directed_edges()
        A = sp.csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        return A if sparse else A.toarray()

    def validate(self):
        """Check regularity, simplicity and symmetry; raise IntegrityError on failure."""
        nb = self.neighbors
        if self.n <= 0 or self.d < 0:
            raise IntegrityError("empty graph")
        if (self.n * self.d) % 2:
            raise IntegrityError("n*d must be even")
        if nb.size and (nb.min() < 0 or nb.max() >= self.n):
            raise IntegrityError("neighbor id out of range")
        if np.any(nb == np.arange(self.n)[:, None]):
            raise IntegrityError("self-loop")
        if self.d > 1 and np.any(np.diff(nb, axis=1) == 0):
            raise IntegrityError("multi-edge")
        A = self.adjacency_matrix(sparse=True)
        if (A != A.T).nnz:
            raise IntegrityError("adjacency is not symmetric")
        return True

    def is_connected(self):
        ncomp, _ = sp.csgraph.connected_components(self.adjacency_matrix(sparse=True), directed=False)
        return ncomp == 1

    # serialization ------------------------------------------------------

    def to_json(self):
        return json.dumps({"n": self.n, "d": self.d, "seed": self.seed, "adjacency": self.adjacency})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        g = cls.from_adjacency(obj["adjacency"], seed=obj.get("seed"))
        if g.n != obj["n"] or g.d != obj["d"]:
            raise IntegrityError("header does not match adjacency")
        return g

    def to_edge_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for u, v in self.edges():
            w.writerow([int(u), int(v)])
        return buf.getvalue()

    @classmethod
    def from_edge_csv(cls, text, n=None):
        rows = [tuple(map(int, r)) for r in csv.reader(io.StringIO(text)) if r]
        if n is None:
            n = 1 + max(max(r) for r in rows)
        return cls.from_edges(n, rows)

    def __eq__(self, other):
        return (
            isinstance(other, RegularGraph)
            and self.n == other.n
            and self.d == other.d
            and np.array_equal(self.neighbors, other.neighbors)
        )

    def __hash__(self):
        return hash((self.n, self.d, self.neighbors.tobytes()))


def check_parameters(n, d):
    if d < 3 or d >= n:
        raise ParameterError(f"need 3 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise ParameterError(f"n*d must be even, got n={n}, d={d}")


def _pairing_attempt(n, d, rng):
    stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
    u = stubs.min(axis=1)
    v = stubs.max(axis=1)
    if np.any(u == v):
        return None
    codes = u * n + v
    if np.unique(codes).size != codes.size:
        return None
    return np.column_stack([u, v])


def sample_regular_graph(n, d, rng, max_tries=DEFAULT_MAX_TRIES):
    """Uniform simple d-regular graph by pairing model with rejection.

    ``rng`` is a ``numpy.random.Generator`` (or an int seed).
    """
    check_parameters(n, d)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    for _ in range(max_tries):
        edges = _pairing_attempt(n, d, rng)
        if edges is None:
            continue
        nb = np.empty((n, d), dtype=np.int64)
        order = np.argsort(np.concatenate([edges[:, 0], edges[:, 1]]), kind="stable")
        other = np.concatenate([edges[:, 1], edges[:, 0]])[order]
        nb[:] = other.reshape(n, d)
        return RegularGraph(n, d, nb, seed=None if seed is None else int(seed))
    raise SamplingError(f"pairing model rejected {max_tries} consecutive attempts")


# --------------------------------------------------------------------------
# balls


@dataclass(frozen=True)
class TreeBall:
    center: int
    radius: int
    vertices: tuple
    local_edges: tuple
    depth: dict
    is_tree: bool
    excess: int
    d: int | None = None
    target_degree: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vertices)

    @property
    def index(self):
        return {v: k for k, v in enumerate(self.vertices)}

    def local_adjacency(self):
        idx = self.index
        A = np.zeros((len(self.vertices), len(self.vertices)))
        for u, v in self.local_edges:
            A[idx[u], idx[v]] = A[idx[v], idx[u]] = 1.0
        return A

    def distance_matrix(self):
        """Pairwise graph distances inside the ball (shortest paths in its induced graph)."""
        A = sp.csr_matrix(self.local_adjacency())
        return sp.csgraph.shortest_path(A, unweighted=True, directed=False).astype(int)


def bfs_distances(neighbors, sources, radius, blocked=(), extra_edges=()):
    """Distances (<= radius) from a vertex set.

    ``neighbors`` is indexable by vertex; ``blocked`` vertices are removed from
    the graph; ``extra_edges`` are added on top.
    """
    blocked = set(blocked)
    extra = {}
    for u, v in extra_edges:
        extra.setdefault(u, []).append(v)
        extra.setdefault(v, []).append(u)
    dist = {}
    queue = deque()
    for s in sources:
        if s not in blocked and s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        x = queue.popleft()
        if dist[x] == radius:
            continue
        for y in itertools.chain(neighbors[x], extra.get(x, ())):
            y = int(y)
            if y not in dist and y not in blocked:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def induced_edges(neighbors, vertex_set, blocked=(), extra_edges=()):
    vs = set(vertex_set)
    blocked = set(blocked)
    out = set()
    for u in vs:
        for v in neighbors[u]:
            v = int(v)
            if v in vs and v not in blocked and u not in blocked and u < v:
                out.add((u, v))
    multi = 0
    for u, v in extra_edges:
        if u in vs and v in vs:
            key = (min(u, v), max(u, v))
            if key in out or u == v:
                multi += 1
            out.add(key)
    return sorted(out), multi


def cycle_excess(num_vertices, edges, extra_parallel=0):
    """|E| - |V| + #components, with ``extra_parallel`` loops/parallel edges added to |E|."""
    parent = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            parent[x], x = root, parent.get(x, x)
        return root

    merges = 0
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            merges += 1
    # each merge removes one component; |V| - merges components remain
    return len(edges) - merges + extra_parallel


def ball(g, center, radius):
    """BFS ball of ``radius`` around ``center`` with induced edges and excess."""
    if not 0 <= center < g.n or radius < 0:
        raise ParameterError("center out of range or negative radius")
    dist = bfs_distances(g.neighbors, [center], radius)
    order = _bfs_order(g.neighbors, center, dist)
    edges, _ = induced_edges(g.neighbors, order)
    excess = cycle_excess(len(order), edges)
    return TreeBall(
        center=int(center),
        radius=int(radius),
        vertices=tuple(order),
        local_edges=tuple(edges),
        depth={v: dist[v] for v in order},
        is_tree=excess == 0,
        excess=excess,
        d=g.d,
    )


def _bfs_order(neighbors, center, dist):
    seen = {center}
    order = [center]
    queue = deque([center])
    while queue:
        x = queue.popleft()
        for y in neighbors[x]:
            y = int(y)
            if y in dist and y not in seen and dist[y] == dist[x] + 1:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order


def tree_ball_size(d, radius):
    if radius == 0:
        return 1
    return 1 + d * ((d - 1) ** radius - 1) // (d - 2)


def omega_bar_radius(n, d, c_frak):
    """Floor of (c/4) log_{d-1} n, clamped to at least 1."""
    return max(1, int(math.floor(c_frak / 4 * math.log(n) / math.log(d - 1))))


def classify_omega_bar(g, c_frak, omega_d=1, radius=None):
    """Return ``(flag, bad_vertex_count, max_excess)`` for the locally-tree-like event."""
    R = omega_bar_radius(g.n, g.d, c_frak) if radius is None else radius
    bad = 0
    max_excess = 0
    for v in range(g.n):
        b = ball(g, v, R)
        bad += not b.is_tree
        max_excess = max(max_excess, b.excess)
    flag = bad <= g.n**c_frak and max_excess <= omega_d
    return flag, bad, max_excess


# --------------------------------------------------------------------------
# exhaustive enumeration and isomorphism classes for tiny n


@lru_cache(maxsize=None)
def _pair_index(n):
    idx = -np.ones((n, n), dtype=np.int64)
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            idx[u, v] = idx[v, u] = k
            k += 1
    return idx


def edge_mask(g):
    """Bitmask over vertex pairs; a labeled-graph key for n <= 11."""
    idx = _pair_index(g.n)
    e = g.edges()
    return int(np.bitwise_or.reduce(np.left_shift(np.int64(1), idx[e[:, 0], e[:, 1]])))


def mask_to_graph(mask, n):
    idx = _pair_index(n)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if mask >> int(idx[u, v]) & 1]
    return RegularGraph.from_edges(n, edges)


def enumerate_regular_graphs(n, d):
    """All labeled simple d-regular graphs on n vertices, as edge masks (backtracking)."""
    idx = _pair_index(n)
    deg = [0] * n
    adj = [set() for _ in range(n)]
    out = []

    def rec(mask):
        u = next((x for x in range(n) if deg[x] < d), None)
        if u is None:
            out.append(mask)
            return
        last = max((w for w in adj[u] if w > u), default=u)
        need = d - deg[u]
        for w in range(last + 1, n):
            if deg[w] < d and w not in adj[u] and n - w >= need:
                adj[u].add(w)
                adj[w].add(u)
                deg[u] += 1
                deg[w] += 1
                rec(mask | (1 << int(idx[u, w])))
                deg[u] -= 1
                deg[w] -= 1
                adj[u].discard(w)
                adj[w].discard(u)

    rec(0)
    return out


class IsomorphismClasses:
    """Isomorphism classes of labeled d-regular graphs for n <= 8.

    Each orbit is generated by applying all n! vertex permutations; the
    canonical form of a graph is the minimum mask in its orbit.
    """

    def __init__(self, n, d):
        if n > 8:
            raise ParameterError("brute-force isomorphism supports n <= 8 only")
        self.n, self.d = n, d
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
        idx = _pair_index(n)
        all_masks = enumerate_regular_graphs(n, d)
        self.total = len(all_masks)
        self.class_of = {}
        self.canonical = []
        sizes = []
        for mask in all_masks:
            if mask in self.class_of:
                continue
            g = mask_to_graph(mask, n)
            e = g.edges()
            bits = np.left_shift(np.int64(1), idx[perms[:, e[:, 0]], perms[:, e[:, 1]]])
            orbit = np.unique(np.bitwise_or.reduce(bits, axis=1))
            cid = len(self.canonical)
            self.canonical.append(int(orbit.min()))
            sizes.append(len(orbit))
            for m in orbit.tolist():
                self.class_of[m] = cid
        self.orbit_sizes = np.array(sizes)
        self.probabilities = self.orbit_sizes / self.total

    def __len__(self):
        return len(self.canonical)

    def classify(self, g):
        return self.class_of[edge_mask(g)]
