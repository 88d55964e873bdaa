"""Local resampling by simple switchings around a center vertex."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from regwave.errors import IntegrityError, ParameterError, SamplingError
from regwave.graphs import RegularGraph, ball, bfs_distances, cycle_excess, induced_edges


@dataclass(frozen=True)
class ResamplingData:
    center: int
    radius_ell: int
    boundary: tuple
    proposals: tuple
    admissible: tuple = ()
    R: int = 0

    @property
    def mu(self):
        return len(self.boundary)

    def triple(self, alpha):
        (_, a), (b, c) = self.boundary[alpha], self.proposals[alpha]
        return a, b, c

    def to_json(self):
        return json.dumps(
            {
                "center": self.center,
                "ell": self.radius_ell,
                "R": self.R,
                "boundary": [list(e) for e in self.boundary],
                "proposals": [list(e) for e in self.proposals],
                "admissible": list(self.admissible),
            }
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(
            center=obj["center"],
            radius_ell=obj["ell"],
            boundary=tuple(tuple(e) for e in obj["boundary"]),
            proposals=tuple(tuple(e) for e in obj["proposals"]),
            admissible=tuple(obj["admissible"]),
            R=obj.get("R", 0),
        )


def boundary_edges(g, tball):
    """Oriented edges (l, a) leaving the ball, sorted."""
    inside = set(tball.vertices)
    out = [(int(l), int(a)) for l in tball.vertices for a in g.neighbors[l] if int(a) not in inside]
    return sorted(out)


def complement_directed_edges(g, vertex_set):
    """Oriented edges of g with neither endpoint in ``vertex_set``."""
    mask = np.zeros(g.n, dtype=bool)
    mask[list(vertex_set)] = True
    e = g.directed_edges()
    return e[~(mask[e[:, 0]] | mask[e[:, 1]])]


def sample_resampling_data(g, center, radius_ell, R, rng):
    rng = np.random.default_rng(rng)
    tball = ball(g, center, radius_ell)
    boundary = boundary_edges(g, tball)
    pool = complement_directed_edges(g, tball.vertices)
    if len(pool) == 0:
        raise SamplingError("the graph outside the ball has no edges")
    picks = pool[rng.integers(len(pool), size=len(boundary))]
    data = ResamplingData(
        center=int(center),
        radius_ell=int(radius_ell),
        boundary=tuple(boundary),
        proposals=tuple((int(b), int(c)) for b, c in picks),
        R=int(R),
    )
    return replace(data, admissible=admissible_set(g, data, R, tball.vertices))


def admissible_set(g, data, R, ball_vertices=None):
    if ball_vertices is None:
        ball_vertices = ball(g, data.center, data.radius_ell).vertices
    T = frozenset(ball_vertices)
    return tuple(a for a in range(data.mu) if admissibility_indicator(g, data, a, R, _T=T))


def admissibility_indicator(g, data, alpha, R, _T=None):
    """Tree and isolation conditions at radius floor(R/4) in the graph with the ball removed."""
    if not 0 <= alpha < data.mu:
        raise ParameterError("alpha out of range")
    T = _T if _T is not None else frozenset(ball(g, data.center, data.radius_ell).vertices)
    r = R // 4
    a, b, c = data.triple(alpha)
    triple = {a, b, c}
    dist = bfs_distances(g.neighbors, triple, r, blocked=T)
    edges, parallel = induced_edges(g.neighbors, dist.keys(), blocked=T, extra_edges=[(a, b)])
    if cycle_excess(len(dist), edges, parallel) != 0:
        return False
    for beta in range(data.mu):
        if beta != alpha and any(x in dist for x in data.triple(beta)):
            return False
    return True


def _switch(edges, l, a, b, c):
    old1, old2 = frozenset((l, a)), frozenset((b, c))
    new1, new2 = frozenset((l, c)), frozenset((a, b))
    if len({l, a, b, c}) != 4:
        raise IntegrityError(f"switching vertices not distinct: {(l, a, b, c)}")
    if old1 not in edges or old2 not in edges:
        raise IntegrityError("switching edge missing from graph")
    if new1 in edges or new2 in edges:
        raise IntegrityError("switching would create a multi-edge")
    edges -= {old1, old2}
    edges |= {new1, new2}


def apply_switchings(g, data, order=None):
    """Apply the admissible switchings (ascending alpha unless ``order`` given)."""
    if not data.admissible:
        return g
    edges = {frozenset((int(u), int(v))) for u, v in g.edges()}
    for alpha in order if order is not None else sorted(data.admissible):
        (l, a), (b, c) = data.boundary[alpha], data.proposals[alpha]
        _switch(edges, l, a, b, c)
    out = RegularGraph.from_edges(g.n, [tuple(e) for e in edges])
    if out.d != g.d:
        raise IntegrityError("switching changed the degree")
    return out


def switched_data(data):
    """Resampling data after switching: (l, c) on the boundary, (b, a) proposed.

    Applying the switchings encoded by the result to the switched graph
    restores the original graph.
    """
    boundary = list(data.boundary)
    proposals = list(data.proposals)
    for alpha in data.admissible:
        (l, a), (b, c) = boundary[alpha], proposals[alpha]
        boundary[alpha] = (l, c)
        proposals[alpha] = (b, a)
    return replace(data, boundary=tuple(boundary), proposals=tuple(proposals))


def resample(g, center, radius_ell, R, rng):
    """One local resampling step; returns ``(T_S(g), data)``."""
    data = sample_resampling_data(g, center, radius_ell, R, rng)
    return apply_switchings(g, data), data


def far_field_indicator(g, data, anchor_edge, R):
    """Indicator that the anchor edge and all proposals are far apart with tree neighborhoods.

    Every listed pair must be an edge; for each pair (b, c) every vertex
    within ``radius_ell`` of c has a radius-R tree ball; distinct list
    positions have c-endpoints at distance at least 3R.
    """
    i, o = anchor_edge
    F = [(int(i), int(o))] + [tuple(p) for p in data.proposals]
    if not all(g.has_edge(b, c) for b, c in F):
        return False
    tree_cache = {}
    for _, c in F:
        for x in bfs_distances(g.neighbors, [c], data.radius_ell):
            if x not in tree_cache:
                tree_cache[x] = ball(g, x, R).is_tree
            if not tree_cache[x]:
                return False
    cs = [c for _, c in F]
    for k, c in enumerate(cs):
        near = bfs_distances(g.neighbors, [c], 3 * R - 1)
        if any(c2 in near for c2 in cs[k + 1 :]):
            return False
    return True
