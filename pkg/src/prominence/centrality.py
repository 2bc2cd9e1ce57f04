"""Degree, PageRank, betweenness and closeness on graph snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tgraph import GraphSnapshot

MEASURES = ("degree", "pagerank", "betweenness", "closeness")

DEFAULT_PARAMS = {
    "pagerank": {"damping": 0.85, "tol": 1e-10, "max_iter": 200},
    "closeness": {"variant": "standard", "wf_scaling": False},
    "betweenness": {"batch": 256},
    "degree": {},
}


@dataclass
class CentralityScores:
    measure: str
    scores: dict[str, float]
    params: dict = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0


def _params(measure, params):
    if measure not in DEFAULT_PARAMS:
        raise ValueError(f"unknown centrality measure {measure!r}; choose from {', '.join(MEASURES)}")
    merged = dict(DEFAULT_PARAMS[measure])
    for k, v in (params or {}).items():
        if k not in merged:
            raise ValueError(f"unknown parameter {k!r} for {measure}")
        merged[k] = v
    return merged


def pagerank_array(s: GraphSnapshot, damping=0.85, tol=1e-10, max_iter=200):
    """Power iteration; each undirected edge is a pair of arcs and the mass
    of isolated nodes is spread uniformly. Returns (scores, converged, iters)."""
    n = s.n
    if n == 0:
        return np.zeros(0), True, 0
    deg = s.degrees.astype(np.float64)
    dangling = deg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / deg[~dangling]
    A = s.csr
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        spread = A @ (x * inv)
        new = damping * (spread + x[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        change = np.abs(new - x).sum()
        x = new
        if change < tol:
            return x, True, it
    return x, False, max_iter


def _bfs_batch(A, sources, n):
    """Level-synchronous BFS from several sources at once.

    Returns (dist, sigma, depth) with rows per source; dist = -1 when
    unreachable and sigma counting shortest paths.
    """
    k = len(sources)
    rows = np.arange(k)
    dist = np.full((k, n), -1, dtype=np.int64)
    sigma = np.zeros((k, n))
    dist[rows, sources] = 0
    sigma[rows, sources] = 1.0
    frontier = sigma.copy()
    d = 0
    while True:
        reach = (A @ frontier.T).T
        new = (dist < 0) & (reach > 0)
        if not new.any():
            break
        d += 1
        dist[new] = d
        sigma[new] = reach[new]
        frontier = np.where(new, sigma, 0.0)
    return dist, sigma, d


def _brandes(s: GraphSnapshot, batch=256, need_betweenness=True):
    """Exact betweenness (unordered pairs counted once) and BFS distance
    rows, accumulated batch-by-batch over all sources."""
    n = s.n
    bc = np.zeros(n)
    reach_cnt = np.zeros(n, dtype=np.int64)
    dist_sum = np.zeros(n, dtype=np.int64)
    harmonic = np.zeros(n)
    if n == 0:
        return bc, reach_cnt, dist_sum, harmonic
    A = s.csr
    for lo in range(0, n, batch):
        sources = np.arange(lo, min(n, lo + batch))
        dist, sigma, depth = _bfs_batch(A, sources, n)
        pos = dist > 0
        reach_cnt[sources] = pos.sum(axis=1)
        dist_sum[sources] = np.where(pos, dist, 0).sum(axis=1)
        with np.errstate(divide="ignore"):
            harmonic[sources] = np.where(pos, 1.0 / np.where(pos, dist, 1), 0.0).sum(axis=1)
        if not need_betweenness:
            continue
        delta = np.zeros_like(sigma)
        for d in range(depth, 0, -1):
            at_d = dist == d
            coeff = np.where(at_d, (1.0 + delta) / np.where(at_d, sigma, 1.0), 0.0)
            back = (A @ coeff.T).T
            prev = dist == d - 1
            delta += np.where(prev, sigma * back, 0.0)
        delta[np.arange(len(sources)), sources] = 0.0
        bc += delta.sum(axis=0)
    return bc / 2.0, reach_cnt, dist_sum, harmonic


def closeness_from(reach_cnt, dist_sum, harmonic, n, variant="standard", wf_scaling=False):
    if variant == "harmonic":
        return harmonic.copy()
    if variant != "standard":
        raise ValueError(f"unknown closeness variant {variant!r}")
    out = np.zeros(len(reach_cnt))
    ok = dist_sum > 0
    out[ok] = reach_cnt[ok] / dist_sum[ok]
    if wf_scaling and n > 1:
        out *= reach_cnt / (n - 1)
    return out


def centrality_arrays(s: GraphSnapshot, measures, params=None) -> dict[str, np.ndarray]:
    """Scores per measure in ``s.nodes`` order, sharing one BFS sweep
    between betweenness and closeness."""
    params = params or {}
    out = {}
    sweep = None
    for measure in measures:
        p = _params(measure, params.get(measure))
        if measure == "degree":
            out[measure] = s.degrees.astype(np.float64)
        elif measure == "pagerank":
            out[measure] = pagerank_array(s, p["damping"], p["tol"], p["max_iter"])[0]
        else:
            if sweep is None:
                batch = _params("betweenness", params.get("betweenness"))["batch"]
                sweep = _brandes(s, batch, need_betweenness="betweenness" in measures)
            bc, reach_cnt, dist_sum, harmonic = sweep
            if measure == "betweenness":
                out[measure] = bc
            else:
                out[measure] = closeness_from(reach_cnt, dist_sum, harmonic, s.n, p["variant"], p["wf_scaling"])
    return out


def compute_centrality(s: GraphSnapshot, measure: str, params: dict | None = None) -> CentralityScores:
    p = _params(measure, params)
    converged, iters = True, 0
    if measure == "degree":
        scores = {v: int(d) for v, d in zip(s.nodes, s.degrees)}
        return CentralityScores(measure, scores, p)
    if measure == "pagerank":
        arr, converged, iters = pagerank_array(s, p["damping"], p["tol"], p["max_iter"])
    elif measure == "betweenness":
        arr = _brandes(s, p["batch"])[0]
    else:
        _, reach_cnt, dist_sum, harmonic = _brandes(s, need_betweenness=False)
        arr = closeness_from(reach_cnt, dist_sum, harmonic, s.n, p["variant"], p["wf_scaling"])
    scores = {v: float(x) for v, x in zip(s.nodes, arr)}
    return CentralityScores(measure, scores, p, converged, iters)
