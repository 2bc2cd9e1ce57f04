"""Slow, obviously-correct reference implementations used only by tests."""

from collections import deque
from itertools import combinations, product

import numpy as np


def brute_npp(nodes, edges):
    """Position counts by enumerating every node triple."""
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    out = {v: [0, 0, 0, 0, 0] for v in nodes}
    for a, b, c in combinations(sorted(nodes), 3):
        tri = (a, b, c)
        links = [(x, y) for x, y in combinations(tri, 2) if y in adj[x]]
        if len(links) == 1:
            x, y = links[0]
            (z,) = set(tri) - {x, y}
            out[x][0] += 1
            out[y][0] += 1
            out[z][1] += 1
        elif len(links) == 2:
            for v in tri:
                if sum(v in e for e in links) == 2:
                    out[v][3] += 1
                else:
                    out[v][2] += 1
        elif len(links) == 3:
            for v in tri:
                out[v][4] += 1
    return {v: tuple(x) for v, x in out.items()}


def brute_triangles(nodes, edges):
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return sum(1 for a, b, c in combinations(sorted(nodes), 3) if b in adj[a] and c in adj[a] and c in adj[b])


def connected_triples(nodes, edges):
    """Paths of length two, counted by explicit enumeration of centre + pair."""
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return sum(1 for c in nodes for _ in combinations(sorted(adj[c]), 2))


def _bfs(adj, s):
    dist = {s: 0}
    sigma = {s: 1}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def naive_betweenness(nodes, edges):
    """Sum over unordered pairs s<t of the share of shortest paths through v."""
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    info = {s: _bfs(adj, s) for s in nodes}
    bc = {v: 0.0 for v in nodes}
    for s, t in combinations(sorted(nodes), 2):
        ds, ss = info[s]
        if t not in ds:
            continue
        dt, st = info[t]
        for v in nodes:
            if v in (s, t) or v not in ds or v not in dt:
                continue
            if ds[v] + dt[v] == ds[t]:
                bc[v] += ss[v] * st[v] / ss[t]
    return bc


def naive_closeness(nodes, edges):
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    out = {}
    for v in nodes:
        dist, _ = _bfs(adj, v)
        total = sum(dist.values())
        out[v] = (len(dist) - 1) / total if total else 0.0
    return out


def sweep_auroc(scores, labels):
    """Trapezoidal ROC area from an explicit threshold sweep."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels, int)
    P, N = labels.sum(), len(labels) - labels.sum()
    pts = [(0.0, 0.0)]
    for thr in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= thr
        pts.append(((pred & (labels == 0)).sum() / N, (pred & (labels == 1)).sum() / P))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area


def sweep_ap(scores, labels):
    """Sum of recall increments times precision over a threshold sweep."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels, int)
    P = labels.sum()
    prev_recall = 0.0
    ap = 0.0
    for thr in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= thr
        tp = (pred & (labels == 1)).sum()
        recall = tp / P
        precision = tp / pred.sum()
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def weak_orders(n):
    """Every ranking of n items with ties: tuples whose values are exactly 0..k-1."""
    for ranks in product(range(n), repeat=n):
        if set(ranks) == set(range(max(ranks) + 1)):
            yield ranks


def tie_patterns(n):
    """Every (scores, labels) of size n up to reordering within equal scores.

    Each pattern is a sequence of score blocks, each holding p positives and
    q negatives with p + q >= 1; block i gets score i.
    """

    def rec(left):
        if left == 0:
            yield ()
            return
        for size in range(1, left + 1):
            for p in range(size + 1):
                for rest in rec(left - size):
                    yield ((p, size - p),) + rest

    for blocks in rec(n):
        scores, labels = [], []
        for i, (p, q) in enumerate(blocks):
            scores += [float(i)] * (p + q)
            labels += [1] * p + [0] * q
        yield scores, labels
