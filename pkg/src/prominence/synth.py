"""Seeded growth model mixing preferential attachment and triadic closure.

One node arrives per tick and links to ``m_new`` existing nodes (the first by
preferential attachment, later ones to a neighbour of the first with
probability ``p_triadic``). Each tick also carries about ``activity`` events
among existing nodes: a repeat of an existing interaction, the closure of a
uniformly chosen open wedge, or a degree-preferential link from a uniformly
chosen initiator.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def growth_stream(
    n_nodes: int = 3000,
    seed: int = 0,
    m_new: int = 2,
    activity: float = 2.0,
    p_triadic: float = 0.5,
    p_repeat: float = 0.15,
) -> list[tuple[str, str, int]]:
    if n_nodes < m_new + 2:
        raise ValueError("need more nodes than the seed clique")
    rng = np.random.default_rng(seed)
    core = m_new + 1
    nbrs: list[set[int]] = [set() for _ in range(n_nodes)]
    deg = np.zeros(n_nodes, dtype=np.float64)
    ends: list[int] = []
    edges: list[tuple[int, int]] = []
    events: list[tuple[int, int, int]] = []

    def link(a, b, t):
        if a == b:
            return False
        if b in nbrs[a]:
            events.append((a, b, t))
            return True
        nbrs[a].add(b)
        nbrs[b].add(a)
        deg[a] += 1
        deg[b] += 1
        ends.extend((a, b))
        edges.append((a, b))
        events.append((a, b, t))
        return True

    for a in range(core):
        for b in range(a + 1, core):
            link(a, b, 0)

    def pa_target():
        return ends[rng.integers(len(ends))]

    def close_wedge(t, alive):
        w = deg[:alive] * (deg[:alive] - 1)
        total = w.sum()
        if total <= 0:
            return False
        for _ in range(10):
            c = int(np.searchsorted(np.cumsum(w), rng.random() * total, side="right"))
            c = min(c, alive - 1)
            nb = sorted(nbrs[c])
            if len(nb) < 2:
                continue
            i, j = rng.choice(len(nb), size=2, replace=False)
            a, b = nb[i], nb[j]
            if b not in nbrs[a]:
                return link(a, b, t)
        return False

    for x in range(core, n_nodes):
        t = x - core + 1
        first = pa_target()
        link(x, first, t)
        for _ in range(m_new - 1):
            cand = None
            if rng.random() < p_triadic:
                pool = sorted(nbrs[first] - nbrs[x] - {x})
                if pool:
                    cand = pool[rng.integers(len(pool))]
            if cand is None:
                for _try in range(20):
                    c = pa_target()
                    if c != x and c not in nbrs[x]:
                        cand = c
                        break
            if cand is not None:
                link(x, cand, t)
        alive = x + 1
        for _ in range(rng.poisson(activity)):
            r = rng.random()
            if r < p_repeat:
                a, b = edges[rng.integers(len(edges))]
                link(a, b, t)
            elif r < p_repeat + (1 - p_repeat) * p_triadic:
                close_wedge(t, alive)
            else:
                a = int(rng.integers(alive))
                b = pa_target()
                if b not in nbrs[a]:
                    link(a, b, t)
    return [(str(a), str(b), t) for a, b, t in events]


def write_stream_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "ts"])
        w.writerows(records)


def default_windows(n_nodes: int, core: int = 3) -> dict:
    """Join window, observation length and horizon suited to a stream of
    ``n_nodes`` one-per-tick arrivals."""
    last = n_nodes - core
    return {
        "join_start": int(last * 0.3),
        "join_end": int(last * 0.5),
        "obs_duration": max(1, int(last * 0.05)),
        "horizon": last,
    }
