"""Flat ``key = value`` experiment configuration."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class ConfigError(ValueError):
    pass


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _opt_float(raw: str):
    return None if raw.strip() == "" else float(raw)


# key -> (default, parser, help)
SCHEMA = {
    "name": ("", str, "dataset name used in transfer tables (default: edge file stem)"),
    "edges": ("builtin:toy", str, "edge stream CSV/TSV with src,dst,ts header, or builtin:toy"),
    "nodes": ("", str, "optional node,ts arrival file"),
    "min_node_events": (0, int, "drop nodes with fewer events before ingest (0 = keep all)"),
    "join_start": (179, int, "first tick of the cohort join window"),
    "join_end": (298, int, "last tick of the cohort join window (inclusive)"),
    "obs_duration": (29, int, "ticks observed after join_end; features use the snapshot at join_end + obs_duration"),
    "horizon": (597, int, "tick at which importance labels are taken"),
    "label_measure": ("degree", str, "centrality used for the Pareto importance split"),
    "threshold": (0.8, float, "Pareto cumulative-share threshold for important nodes"),
    "feature_set": ("NPP", str, "PA | TC | All | NPP | compare"),
    "lambda": (1e-3, float, "L2 penalty on standardised weights"),
    "bags": (25, int, "bagged logistic models"),
    "seed": (0, int, "seed for splitting, bootstrap and triad sampling"),
    "test_fraction": (0.3, float, "stratified held-out share"),
    "tol": (1e-8, float, "gradient infinity-norm stopping tolerance"),
    "max_iter": (20000, int, "optimizer iteration cap"),
    "wald": ("univariate", str, "univariate | joint | off (joint is singular for NPP: p2 is affine in p1,p3,p4,p5)"),
    "pagerank.damping": (0.85, float, "PageRank damping"),
    "pagerank.tol": (1e-10, float, "PageRank L1 convergence tolerance"),
    "pagerank.max_iter": (200, int, "PageRank iteration cap"),
    "closeness.variant": ("standard", str, "standard | harmonic"),
    "closeness.wf_scaling": (False, _bool, "scale closeness by reachable share (Wasserman-Faust)"),
    "evolution.sample_cap": (100000, int, "max triads examined per type"),
    "positions.scope": ("all", str, "all | cohort: nodes entering the conditional-probability table"),
    "positions.weighted": (False, _bool, "weight nodes by their conditioning-position count"),
    "influence.sigma_mode": ("pair", str, "pair | global"),
    "influence.sigma": (None, _opt_float, "fixed delay threshold for global mode"),
    "influence.match": ("first", str, "first | all interactions matched per partner"),
    "influence.delay_mode": ("first", str, "first | all interactions in the average action delay"),
    "output_dir": ("out", str, "directory receiving all outputs"),
}

CHOICES = {
    "feature_set": ("PA", "TC", "All", "NPP", "compare"),
    "wald": ("joint", "univariate", "off"),
    "closeness.variant": ("standard", "harmonic"),
    "positions.scope": ("all", "cohort"),
    "influence.sigma_mode": ("pair", "global"),
    "influence.match": ("first", "all"),
    "influence.delay_mode": ("first", "all"),
    "label_measure": ("degree", "pagerank", "betweenness", "closeness"),
}


def defaults() -> dict:
    return {k: v[0] for k, v in SCHEMA.items()}


def format_defaults() -> str:
    lines = []
    for key, (value, _, help_) in SCHEMA.items():
        lines.append(f"# {help_}")
        lines.append(f"{key} = {_render(value)}")
    return "\n".join(lines) + "\n"


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


@dataclass
class ExperimentConfig:
    values: dict
    base_dir: Path

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def config_hash(self) -> str:
        # output location does not change results
        kept = {k: v for k, v in self.values.items() if k != "output_dir"}
        blob = json.dumps(kept, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def name(self) -> str:
        if self.values["name"]:
            return self.values["name"]
        edges = self.values["edges"]
        return edges.split(":", 1)[1] if edges.startswith("builtin:") else Path(edges).stem

    def resolve(self, key) -> Path | None:
        raw = self.values[key]
        if not raw:
            return None
        if raw.startswith("builtin:"):
            ref = resources.files("prominence") / "data" / f"{raw.split(':', 1)[1]}_edges.csv"
            return Path(str(ref))
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p

    def centrality_params(self) -> dict:
        return {
            "pagerank": {
                "damping": self["pagerank.damping"],
                "tol": self["pagerank.tol"],
                "max_iter": self["pagerank.max_iter"],
            },
            "closeness": {"variant": self["closeness.variant"], "wf_scaling": self["closeness.wf_scaling"]},
        }

    def windows(self):
        return (self["join_start"], self["join_end"]), self["obs_duration"], self["horizon"]

    @property
    def obs_end(self) -> int:
        return self["join_end"] + self["obs_duration"]


def parse_config_text(text: str, origin="<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        out[key] = raw
    return out


def _coerce(key, raw):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser = SCHEMA[key][1]
    if not isinstance(raw, str):
        return raw
    try:
        value = parser(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None
    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError(f"{key} must be one of {', '.join(CHOICES[key])} (got {value!r})")
    return value


def load_config(path=None, overrides: dict | None = None, seed: int | None = None) -> ExperimentConfig:
    """Defaults, then the file, then ``overrides``, then ``seed``; validated."""
    values = defaults()
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        base = path.resolve().parent
        for k, raw in parse_config_text(path.read_text(), str(path)).items():
            values[k] = _coerce(k, raw)
    for k, raw in (overrides or {}).items():
        values[k] = _coerce(k, raw)
    if seed is not None:
        values["seed"] = int(seed)
    cfg = ExperimentConfig(values, base)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    v = cfg.values
    for key in ("edges", "nodes"):
        p = cfg.resolve(key)
        if p is not None and not p.exists():
            raise ConfigError(f"{key} file not found: {p}")
    if v["join_start"] > v["join_end"]:
        raise ConfigError("join_start must not exceed join_end")
    if v["obs_duration"] < 0:
        raise ConfigError("obs_duration must be non-negative")
    if v["horizon"] <= cfg.obs_end:
        raise ConfigError("horizon must be later than join_end + obs_duration")
    if not 0 < v["threshold"] < 1:
        raise ConfigError("threshold must lie strictly between 0 and 1")
    if not 0 < v["test_fraction"] < 1:
        raise ConfigError("test_fraction must lie strictly between 0 and 1")
    if v["bags"] < 1:
        raise ConfigError("bags must be at least 1")
    if v["lambda"] < 0:
        raise ConfigError("lambda must be non-negative")
    if v["influence.sigma_mode"] == "global" and v["influence.sigma"] is None:
        raise ConfigError("influence.sigma is required when influence.sigma_mode = global")
