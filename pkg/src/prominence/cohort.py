"""Pareto importance labels and supervised examples for newly arrived nodes."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .census import POSITIONS, npp_matrix
from .centrality import MEASURES, CentralityScores, centrality_arrays
from .learn import Dataset
from .tgraph import GraphSnapshot, TemporalGraph, cohort_join, snapshot_at

FEATURE_SETS = {
    "PA": ("degree",),
    "TC": ("p3",),
    "All": ("degree", "pagerank", "betweenness", "closeness"),
    "NPP": POSITIONS,
}


@dataclass(frozen=True)
class ImportanceLabeling:
    measure: str
    threshold: float
    important: frozenset
    non_important: frozenset

    def is_important(self, v) -> bool:
        return v in self.important

    def __contains__(self, v) -> bool:
        return v in self.important or v in self.non_important


def label_nodes(scores: CentralityScores | Mapping[str, float], threshold: float = 0.8, measure=None):
    """Pareto split: v is important iff the share of nodes scoring <= M(v)
    is at least ``threshold``; every other node is non-important."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    if isinstance(scores, CentralityScores):
        measure = measure or scores.measure
        scores = scores.scores
    if not scores:
        raise ValueError("cannot label an empty score map")
    ordered = sorted(scores.values())
    n = len(ordered)
    important, rest = set(), set()
    for v, x in scores.items():
        (important if bisect.bisect_right(ordered, x) / n >= threshold else rest).add(v)
    return ImportanceLabeling(measure or "custom", threshold, frozenset(important), frozenset(rest))


def label_snapshot(s: GraphSnapshot, measure="degree", threshold=0.8, params=None) -> ImportanceLabeling:
    arr = centrality_arrays(s, [measure], params)[measure]
    return label_nodes(dict(zip(s.nodes, arr.tolist())), threshold, measure)


def feature_matrix(s: GraphSnapshot, nodes, names, params=None) -> np.ndarray:
    """Rows for ``nodes`` (ids in ``s``), columns ``names`` drawn from the
    census positions and centrality measures."""
    idx = np.array([s.index[v] for v in nodes], dtype=np.int64)
    cols = {}
    if any(n in POSITIONS for n in names):
        mat = npp_matrix(s)
        for k, p in enumerate(POSITIONS):
            cols[p] = mat[:, k].astype(np.float64)
    wanted = [n for n in names if n in MEASURES]
    cols.update(centrality_arrays(s, wanted, params))
    unknown = [n for n in names if n not in cols]
    if unknown:
        raise ValueError(f"unknown feature(s): {', '.join(unknown)}")
    if len(idx) == 0:
        return np.zeros((0, len(names)))
    return np.column_stack([cols[n][idx] for n in names])


@dataclass
class CohortExample:
    node: str
    features: dict[str, float]
    label: int
    meta: dict = field(default_factory=dict)


@dataclass
class Cohort:
    feature_names: tuple[str, ...]
    examples: list[CohortExample]
    meta: dict
    diagnostics: dict

    def __len__(self):
        return len(self.examples)

    def to_dataset(self) -> Dataset:
        X = np.array([[ex.features[f] for f in self.feature_names] for ex in self.examples], dtype=np.float64)
        X = X.reshape(len(self.examples), len(self.feature_names))
        y = np.array([ex.label for ex in self.examples], dtype=np.int64)
        return Dataset(self.feature_names, X, y, ids=tuple(ex.node for ex in self.examples))


def build_cohort(
    g: TemporalGraph,
    join_window: tuple[int, int],
    obs_duration: int,
    horizon: int,
    feature_set: str = "NPP",
    label_measure: str = "degree",
    threshold: float = 0.8,
    centrality_params: dict | None = None,
) -> Cohort:
    """Examples for nodes joining in ``join_window``.

    Features come from the snapshot at ``join_window[1] + obs_duration``;
    labels from the Pareto split of ``label_measure`` over the whole snapshot
    at ``horizon``.
    """
    lo, hi = join_window
    obs_end = hi + obs_duration
    if horizon <= obs_end:
        raise ValueError(f"horizon {horizon} must be later than the observation end {obs_end}")
    if feature_set in FEATURE_SETS:
        names = FEATURE_SETS[feature_set]
    else:
        names = tuple(n.strip() for n in feature_set.split("+"))
    meta = {
        "join_window": [lo, hi],
        "obs_end": obs_end,
        "horizon": horizon,
        "feature_set": feature_set,
        "label_measure": label_measure,
        "threshold": threshold,
    }
    members = sorted(cohort_join(g, lo, hi))
    diagnostics = {"joined": len(members), "nodes_at_horizon": 0, "important": 0}
    if not members:
        return Cohort(names, [], meta, diagnostics)

    final = snapshot_at(g, horizon)
    labeling = label_snapshot(final, label_measure, threshold, centrality_params)
    members = [v for v in members if v in final.index]
    diagnostics["nodes_at_horizon"] = final.n

    observed = snapshot_at(g, obs_end)
    X = feature_matrix(observed, members, names, centrality_params)
    examples = []
    for v, row in zip(members, X):
        y = int(labeling.is_important(v))
        examples.append(CohortExample(v, dict(zip(names, row.tolist())), y, {"join_time": g.join_time[v]}))
    diagnostics["important"] = sum(ex.label for ex in examples)
    return Cohort(names, examples, meta, diagnostics)
