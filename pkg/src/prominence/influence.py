"""Link actions, link-influence detection and event-code distributions."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

from .tgraph import TemporalGraph, pair_key

CODES = tuple("".join(bits) for bits in product("01", repeat=3))
WILDCARDS = ("1XX", "0XX", "X1X", "X0X", "XX1", "XX0", "11X", "00X", "10X", "01X")


@dataclass(frozen=True, order=True)
class InfluenceEvent:
    u: str
    v: str
    w: str
    t: int
    t_prime: int
    sigma_used: float


@dataclass
class InfluenceScan:
    events: list[tuple[InfluenceEvent, str]]
    diagnostics: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


def _partners(g: TemporalGraph, u):
    if u not in g.join_time:
        raise KeyError(f"unknown node {u!r}")
    return g.partners.get(u, {})


def link_actions(g: TemporalGraph, u: str) -> list[tuple[str, int]]:
    """Every (partner, tick) interaction of ``u``, repeats included, by time."""
    acts = [(w, t) for w, times in _partners(g, u).items() for t in times]
    acts.sort(key=lambda a: (a[1], a[0]))
    return acts


def _delay(pu, pv, common, mode):
    if not common:
        return None
    if mode == "first":
        return sum(abs(pv[w][0] - pu[w][0]) for w in common) / len(common)
    if mode == "all":
        diffs = [abs(b - a) for w in common for a in pu[w] for b in pv[w]]
        return sum(diffs) / len(diffs)
    raise ValueError(f"unknown delay mode {mode!r}")


def average_action_delay(g: TemporalGraph, u: str, v: str, mode: str = "first") -> float | None:
    """Mean |first(v,w) - first(u,w)| over common partners w; None without any.

    ``mode="all"`` averages over every pair of interactions instead.
    """
    pu, pv = _partners(g, u), _partners(g, v)
    if v not in pu:
        raise ValueError(f"{u!r} and {v!r} never interact")
    common = sorted(set(pu) & set(pv))
    return _delay(pu, pv, common, mode)


def importance_code(labeling, *nodes) -> str:
    bits = []
    for x in nodes:
        if x not in labeling:
            raise KeyError(f"node {x!r} has no importance label")
        bits.append("1" if labeling.is_important(x) else "0")
    return "".join(bits)


def detect_influence_events(
    g: TemporalGraph,
    labeling,
    sigma_mode: str = "pair",
    sigma: float | None = None,
    match: str = "first",
    delay_mode: str = "first",
) -> InfluenceScan:
    """Scan every adjacent pair in both directions for link influences.

    u influences v through w when u acts on w at t, v acts on w at t', and
    first(u, v) < t < t' with t' - t < sigma (all strict). ``sigma_mode`` is
    "pair" (average action delay of u, v) or "global" (the fixed ``sigma``).
    ``match="first"`` uses first interactions per partner, ``"all"`` every
    interaction pair.
    """
    if sigma_mode == "global":
        if sigma is None:
            raise ValueError("global sigma mode needs a sigma value")
    elif sigma_mode != "pair":
        raise ValueError(f"unknown sigma mode {sigma_mode!r}")
    if match not in ("first", "all"):
        raise ValueError(f"unknown match mode {match!r}")

    partners = g.partners
    events = []
    scanned = skipped = 0
    for (a, b), times in sorted(g.edge_log.items()):
        pa, pb = partners[a], partners[b]
        common = sorted(set(pa) & set(pb))
        scanned += 1
        s = sigma if sigma_mode == "global" else _delay(pa, pb, common, delay_mode)
        if s is None:
            skipped += 1
            continue
        base = times[0]
        for u, v, pu, pv in ((a, b, pa, pb), (b, a, pb, pa)):
            for w in common:
                if match == "first":
                    pairs = [(pu[w][0], pv[w][0])]
                else:
                    pairs = [(t, tp) for t in pu[w] for tp in pv[w]]
                for t, tp in pairs:
                    if base < t < tp and tp - t < s:
                        events.append((InfluenceEvent(u, v, w, t, tp, s), importance_code(labeling, u, v, w)))
    events.sort()
    diagnostics = {"pairs_scanned": scanned, "pairs_undefined_sigma": skipped, "events": len(events)}
    return InfluenceScan(events, diagnostics)


def _matches(code, pattern):
    return all(p in ("X", c) for c, p in zip(code, pattern))


def event_distribution(events: Iterable) -> dict[str, int]:
    """Counts per exact code and per wildcard pattern (X = either digit)."""
    codes = [e[1] if isinstance(e, tuple) else e for e in events]
    out = {c: 0 for c in CODES}
    for c in codes:
        out[c] += 1
    for pat in WILDCARDS:
        out[pat] = sum(n for c, n in out.items() if c in CODES and _matches(c, pat))
    return out


def influence_predicate(g: TemporalGraph, ev: InfluenceEvent) -> bool:
    """Re-check one event against the raw edge log."""
    base = g.edge_log[pair_key(ev.u, ev.v)][0]
    uw = g.edge_log.get(pair_key(ev.u, ev.w), ())
    vw = g.edge_log.get(pair_key(ev.v, ev.w), ())
    return (
        ev.w not in (ev.u, ev.v)
        and ev.t in uw
        and ev.t_prime in vw
        and base < ev.t < ev.t_prime
        and ev.t_prime - ev.t < ev.sigma_used
    )
