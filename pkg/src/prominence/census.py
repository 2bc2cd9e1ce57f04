"""Triad-position census (node prominence profiles) and triad statistics.

Positions, per undirected triad on three nodes:

* triad 1, one edge plus a node adjacent to neither end:
  position 1 = an edge endpoint, position 2 = the detached node;
* triad 2, open wedge: position 3 = a wedge end, position 4 = the centre;
* triad 3, triangle: position 5.

Triples with no edge carry no position and are not counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .tgraph import GraphSnapshot, TemporalGraph, snapshot_at

POSITIONS = ("p1", "p2", "p3", "p4", "p5")


class NppVector(NamedTuple):
    p1: int
    p2: int
    p3: int
    p4: int
    p5: int


def triangle_counts(s: GraphSnapshot) -> np.ndarray:
    """Triangles at each node index.

    Forward algorithm: orient every edge from lower to higher (degree, index)
    rank and intersect out-neighbourhoods, so each triangle is seen once.
    """
    n = s.n
    tri = np.zeros(n, dtype=np.int64)
    if n < 3:
        return tri
    deg = s.degrees
    rank = np.lexsort((np.arange(n), deg))
    pos = np.empty(n, dtype=np.int64)
    pos[rank] = np.arange(n)
    out = [frozenset(j for j in nb if pos[j] > pos[i]) for i, nb in enumerate(s.adj)]
    for u in range(n):
        ou = out[u]
        if not ou:
            continue
        for v in ou:
            common = ou & out[v]
            if common:
                k = len(common)
                tri[u] += k
                tri[v] += k
                for w in common:
                    tri[w] += 1
    return tri


def triangles_per_node(s: GraphSnapshot) -> dict[str, int]:
    tri = triangle_counts(s)
    return {v: int(tri[i]) for i, v in enumerate(s.nodes)}


def npp_matrix(s: GraphSnapshot) -> np.ndarray:
    """(n, 5) int64 array of position counts, row order = ``s.nodes``."""
    n, m = s.n, s.m
    if n == 0:
        return np.zeros((0, 5), dtype=np.int64)
    deg = s.degrees
    tri = triangle_counts(s)
    # S(v) = sum over neighbours u of (deg(u) - 1)
    S = np.array([deg[list(nb)].sum() for nb in s.adj], dtype=np.int64) - deg
    wedges = deg * (deg - 1) // 2
    # sum_{u in N(v)} [(n-2) - (deg(v)-1) - (deg(u)-1) + common(u,v)],
    # using sum_{u in N(v)} common(u,v) = 2 tri(v)
    p1 = deg * (n - 2) - deg * (deg - 1) - S + 2 * tri
    p2 = m - deg - (S - tri)
    p3 = S - 2 * tri
    p4 = wedges - tri
    p5 = tri
    return np.stack([p1, p2, p3, p4, p5], axis=1)


def npp_census(s: GraphSnapshot) -> dict[str, NppVector]:
    mat = npp_matrix(s)
    return {v: NppVector(*(int(x) for x in mat[i])) for i, v in enumerate(s.nodes)}


def balance_rate(s: GraphSnapshot) -> float:
    """3 * triangles / connected triples (global transitivity); 0 when no triples."""
    deg = s.degrees
    w = int((deg * (deg - 1) // 2).sum())
    if w == 0:
        return 0.0
    t = int(triangle_counts(s).sum()) // 3
    return 3 * t / w


@dataclass(frozen=True)
class EvolutionRate:
    triad_type: int
    population: int
    sampled: int
    evolved: int
    rate: float | None
    seed: int

    def to_dict(self) -> dict:
        return {
            "type": self.triad_type,
            "population": self.population,
            "sampled": self.sampled,
            "evolved": self.evolved,
            "rate": self.rate,
            "seed": self.seed,
        }


def _pick(population: int, cap: int, rng: np.random.Generator) -> np.ndarray:
    if population <= cap:
        return np.arange(population, dtype=np.int64)
    return np.sort(rng.choice(population, size=cap, replace=False)).astype(np.int64)


def _kth_missing(k: int, excluded: list[int]) -> int:
    """k-th (0-based) non-negative integer not in the ascending list ``excluded``."""
    for x in excluded:
        if x <= k:
            k += 1
        else:
            break
    return k


def _type1_instances(s: GraphSnapshot, picks: np.ndarray, counts: np.ndarray, edges):
    cum = np.cumsum(counts)
    starts = cum - counts
    for r in picks:
        e = int(np.searchsorted(cum, r, side="right"))
        i, j = edges[e]
        excluded = sorted(set(s.adj[i]) | set(s.adj[j]) | {i, j})
        yield i, j, _kth_missing(int(r - starts[e]), excluded)


def _type2_instances(s: GraphSnapshot, picks: np.ndarray, counts: np.ndarray):
    cum = np.cumsum(counts)
    starts = cum - counts
    by_centre: dict[int, list[int]] = {}
    for r in picks:
        c = int(np.searchsorted(cum, r, side="right"))
        by_centre.setdefault(c, []).append(int(r - starts[c]))
    for c, ranks in by_centre.items():
        want = set(ranks)
        nb = s.adj[c]
        sets = s.neighbor_sets
        k = 0
        for x in range(len(nb)):
            a = nb[x]
            for y in range(x + 1, len(nb)):
                b = nb[y]
                if b in sets[a]:
                    continue
                if k in want:
                    yield c, a, b
                k += 1


def triad_evolution_rate(
    g: TemporalGraph,
    t: int,
    dt: int,
    triad_type: int,
    sample_cap: int = 100_000,
    seed: int = 0,
) -> EvolutionRate:
    """Fraction of type-1 or type-2 triads at ``t`` that gain an internal edge by ``t + dt``.

    Instances are ordered canonically (edge or wedge centre in node order,
    then third node / neighbour pair ascending) and sampled uniformly without
    replacement when the population exceeds ``sample_cap``.
    """
    if triad_type not in (1, 2):
        raise ValueError("triad_type must be 1 or 2 (closed triads cannot gain internal edges)")
    if sample_cap < 1:
        raise ValueError("sample_cap must be >= 1")
    before = snapshot_at(g, t)
    after = snapshot_at(g, t + dt)
    rng = np.random.default_rng(seed)

    if triad_type == 1:
        edges = list(before.edges())
        counts = np.array(
            [before.n - len(set(before.adj[i]) | set(before.adj[j]) | {i, j}) for i, j in edges],
            dtype=np.int64,
        )
    else:
        deg = before.degrees
        counts = deg * (deg - 1) // 2 - triangle_counts(before)
    population = int(counts.sum()) if len(counts) else 0
    if population == 0:
        return EvolutionRate(triad_type, 0, 0, 0, None, seed)

    picks = _pick(population, sample_cap, rng)
    ids = before.nodes
    later = after.index
    later_sets = after.neighbor_sets

    def linked(a, b):
        return later[ids[b]] in later_sets[later[ids[a]]]

    evolved = 0
    if triad_type == 1:
        for i, j, k in _type1_instances(before, picks, counts, edges):
            if linked(i, k) or linked(j, k):
                evolved += 1
    else:
        for _, a, b in _type2_instances(before, picks, counts):
            if linked(a, b):
                evolved += 1
    return EvolutionRate(triad_type, population, len(picks), evolved, evolved / len(picks), seed)


def position_conditional_prob(
    npp: Mapping[str, NppVector], i: int, j: int, weighted: bool = False
) -> float | None:
    """Prob(i | j): share of nodes occupying position ``j`` that also occupy ``i``.

    With ``weighted`` each node counts with its position-``j`` multiplicity.
    Returns None when no node occupies position ``j``.
    """
    if not (1 <= i <= 5 and 1 <= j <= 5):
        raise ValueError("positions are numbered 1..5")
    num = den = 0
    for vec in npp.values():
        pj = vec[j - 1]
        if pj <= 0:
            continue
        w = pj if weighted else 1
        den += w
        if vec[i - 1] > 0:
            num += w
    if den == 0:
        return None
    return num / den
