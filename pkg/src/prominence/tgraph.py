"""Temporal graph model, edge-stream ingestion and snapshot extraction."""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import sparse

log = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"line {lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


def pair_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class TemporalGraph:
    """Growing undirected multigraph.

    ``join_time`` maps node -> arrival tick. ``edge_log`` maps an unordered
    pair (stored lexicographically) to the sorted tuple of its interaction
    ticks, repeats included.
    """

    join_time: Mapping[str, int]
    edge_log: Mapping[tuple[str, str], tuple[int, ...]]

    @cached_property
    def nodes(self) -> frozenset:
        return frozenset(self.join_time)

    @cached_property
    def partners(self) -> dict[str, dict[str, tuple[int, ...]]]:
        out: dict[str, dict[str, tuple[int, ...]]] = defaultdict(dict)
        for (u, v), times in self.edge_log.items():
            out[u][v] = times
            out[v][u] = times
        return dict(out)

    def first_contact(self, u: str, v: str) -> int | None:
        times = self.edge_log.get(pair_key(u, v))
        return times[0] if times else None

    @property
    def last_time(self) -> int:
        ts = [times[-1] for times in self.edge_log.values()]
        ts.extend(self.join_time.values())
        return max(ts) if ts else 0

    def events(self):
        """Yield (u, v, t) per logged interaction in canonical order."""
        rows = [(t, u, v) for (u, v), times in self.edge_log.items() for t in times]
        rows.sort()
        for t, u, v in rows:
            yield u, v, t

    def truncate(self, t: int) -> "TemporalGraph":
        """Drop every event later than ``t`` (nodes that joined later go too)."""
        log_ = {}
        for key, times in self.edge_log.items():
            kept = tuple(x for x in times if x <= t)
            if kept:
                log_[key] = kept
        joins = {v: jt for v, jt in self.join_time.items() if jt <= t}
        return TemporalGraph(joins, log_)


@dataclass
class IngestReport:
    events: int = 0
    nodes: int = 0
    pairs: int = 0
    skipped_self_loops: int = 0
    duplicate_events: int = 0
    arrivals_clamped: int = 0
    filtered_nodes: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ingest_edge_stream(
    records: Iterable[tuple[str, str, int]],
    arrivals: Mapping[str, int] | None = None,
    record_filter: Callable[[str, str, int], bool] | None = None,
) -> tuple[TemporalGraph, IngestReport]:
    """Build a TemporalGraph from (u, v, t) records.

    Join times default to each node's first event; an ``arrivals`` entry
    replaces it unless it is later than the node's first edge, in which case
    the first edge wins and ``arrivals_clamped`` is incremented.
    """
    report = IngestReport()
    log_: dict[tuple[str, str], list[int]] = defaultdict(list)
    first_seen: dict[str, int] = {}
    seen = Counter()
    for u, v, t in records:
        if t < 0:
            raise ParseError(f"negative timestamp {t}")
        if u == v:
            report.skipped_self_loops += 1
            continue
        if record_filter is not None and not record_filter(u, v, t):
            continue
        key = pair_key(u, v)
        if seen[(key, t)]:
            report.duplicate_events += 1
        seen[(key, t)] += 1
        log_[key].append(t)
        report.events += 1
        for x in key:
            if x not in first_seen or t < first_seen[x]:
                first_seen[x] = t
    if report.skipped_self_loops:
        log.warning("skipped %d self-loop records", report.skipped_self_loops)

    join = dict(first_seen)
    for node, t in (arrivals or {}).items():
        if node in first_seen and t > first_seen[node]:
            report.arrivals_clamped += 1
            continue
        join[node] = t

    edge_log = {k: tuple(sorted(ts)) for k, ts in log_.items()}
    report.nodes = len(join)
    report.pairs = len(edge_log)
    return TemporalGraph(join, edge_log), report


def _open_table(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    text = path.read_text()
    first = text.split("\n", 1)[0]
    delim = "\t" if "\t" in first else ","
    return csv.reader(io.StringIO(text), delimiter=delim)


def _parse_int(raw, lineno, path, what="timestamp"):
    try:
        value = int(raw.strip())
    except (ValueError, AttributeError):
        raise ParseError(f"{what} {raw!r} is not an integer", lineno, path) from None
    if value < 0:
        raise ParseError(f"negative {what} {value}", lineno, path)
    return value


def read_edge_records(path) -> list[tuple[str, str, int]]:
    """Parse a ``src,dst,ts`` CSV/TSV (header required)."""
    reader = _open_table(path)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty file", None, path)
    cols = [h.strip() for h in header]
    try:
        iu, iv, it = cols.index("src"), cols.index("dst"), cols.index("ts")
    except ValueError:
        raise ParseError(f"header must contain src,dst,ts (got {','.join(cols)})", 1, path) from None
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(row)}", lineno, path)
        out.append((row[iu].strip(), row[iv].strip(), _parse_int(row[it], lineno, path)))
    return out


def read_node_arrivals(path) -> dict[str, int]:
    """Parse an optional ``node,ts`` arrival file."""
    reader = _open_table(path)
    header = next(reader, None)
    cols = [h.strip() for h in header or []]
    if "node" not in cols or "ts" not in cols:
        raise ParseError("header must contain node,ts", 1, path)
    inode, it = cols.index("node"), cols.index("ts")
    out = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(row)}", lineno, path)
        node = row[inode].strip()
        t = _parse_int(row[it], lineno, path)
        out[node] = min(t, out.get(node, t))
    return out


def load_temporal_graph(edges_path, nodes_path=None, min_node_events=0):
    """Read files and ingest. ``min_node_events`` is the pre-filter hook:
    nodes with fewer events are dropped along with all their records."""
    records = read_edge_records(edges_path)
    arrivals = read_node_arrivals(nodes_path) if nodes_path else None
    keep = None
    dropped = 0
    if min_node_events > 0:
        counts = Counter()
        for u, v, _ in records:
            if u != v:
                counts[u] += 1
                counts[v] += 1
        ok = {x for x, c in counts.items() if c >= min_node_events}
        dropped = len(counts) - len(ok)
        keep = lambda u, v, t: u in ok and v in ok  # noqa: E731
        if arrivals:
            arrivals = {k: t for k, t in arrivals.items() if k in ok or k not in counts}
    g, report = ingest_edge_stream(records, arrivals, keep)
    report.filtered_nodes = dropped
    return g, report


def write_events_csv(g: TemporalGraph, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "ts"])
        for u, v, t in g.events():
            w.writerow([u, v, t])


@dataclass(frozen=True, eq=False)
class GraphSnapshot:
    """Static simple undirected graph.

    Nodes are held in a canonical (sorted-id) order; ``adj[i]`` is the
    ascending tuple of neighbour indices of node ``nodes[i]``.
    """

    nodes: tuple[str, ...]
    adj: tuple[tuple[int, ...], ...]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {v: i for i, v in enumerate(self.nodes)})

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        ids = tuple(sorted(set(nodes)))
        idx = {v: i for i, v in enumerate(ids)}
        nbrs: list[set[int]] = [set() for _ in ids]
        for u, v in edges:
            if u == v:
                continue
            a, b = idx[u], idx[v]
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(ids, tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=self.n)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adj)

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbor_sets[i]

    def edges(self):
        """Index pairs (i, j) with i < j, in canonical order."""
        for i, nb in enumerate(self.adj):
            for j in nb:
                if j > i:
                    yield i, j

    def edge_ids(self) -> set[tuple[str, str]]:
        return {pair_key(self.nodes[i], self.nodes[j]) for i, j in self.edges()}

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter((j for nb in self.adj for j in nb), dtype=np.int64, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.float64)
        return sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def same_graph(self, other: "GraphSnapshot") -> bool:
        return self.nodes == other.nodes and self.adj == other.adj


def snapshot_at(g: TemporalGraph, t: int) -> GraphSnapshot:
    """Simple graph of nodes joined by ``t`` and pairs first linked by ``t`` (inclusive)."""
    nodes = [v for v, jt in g.join_time.items() if jt <= t]
    edges = [key for key, times in g.edge_log.items() if times[0] <= t]
    return GraphSnapshot.from_edges(nodes, edges)


def induced_subgraph(s: GraphSnapshot, nodes: Iterable[str]) -> GraphSnapshot:
    keep = set(nodes)
    for v in sorted(keep):
        if v not in s.index:
            raise KeyError(f"node {v!r} is not in the snapshot")
    if len(keep) == s.n:
        return s
    ids = tuple(sorted(keep))
    old = [s.index[v] for v in ids]
    remap = {o: k for k, o in enumerate(old)}
    adj = tuple(tuple(remap[j] for j in s.adj[o] if j in remap) for o in old)
    return GraphSnapshot(ids, adj)


def cohort_join(g: TemporalGraph, t_lo: int, t_hi: int) -> set[str]:
    if t_lo > t_hi:
        raise ValueError(f"empty join window [{t_lo}, {t_hi}]")
    return {v for v, jt in g.join_time.items() if t_lo <= jt <= t_hi}
