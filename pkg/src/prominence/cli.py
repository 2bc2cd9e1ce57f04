"""Command-line entry point.

Exit codes: 0 success, 1 computation error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .census import POSITIONS, balance_rate, npp_census, position_conditional_prob, triad_evolution_rate
from .centrality import MEASURES, compute_centrality
from .cohort import build_cohort, label_nodes, label_snapshot
from .config import ConfigError, format_defaults, load_config
from .evaluate import aupr, auroc, roc_points, safe_metric, transfer_matrix
from .influence import detect_influence_events, event_distribution
from .learn import bagging_train, predict_proba, stratified_split, wald_report
from .synth import growth_stream, write_stream_csv
from .tgraph import ParseError, induced_subgraph, load_temporal_graph, snapshot_at, write_events_csv

log = logging.getLogger("prominence")


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _csv_dump(header, rows, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x):
    return "undefined" if x is None else x


def _args_hash(args) -> str:
    skip = {"func", "out", "verbose"}
    blob = json.dumps({k: str(v) for k, v in sorted(vars(args).items()) if k not in skip}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class Bundle:
    """Tracks output files and writes MANIFEST.json on exit, marking the
    run incomplete if any stage failed."""

    def __init__(self, out_dir: Path, config_hash: str, seed, command: str, config: dict | None = None):
        self.dir = out_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.seed = seed
        self.command = command
        self.config = config
        self.files: list[str] = []
        self.stages: list[str] = []
        self.failed: str | None = None

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.dir / name

    def json(self, name, obj):
        obj = dict(obj, config_hash=self.config_hash, seed=self.seed)
        _json_dump(obj, self.path(name))

    def csv(self, name, header, rows):
        _csv_dump(header, rows, self.path(name))

    @contextlib.contextmanager
    def stage(self, name):
        try:
            yield
        except (StageError, UsageError, ConfigError, ParseError, FileNotFoundError) as exc:
            self.failed = getattr(exc, "stage", name)
            raise
        except Exception as exc:
            self.failed = name
            raise StageError(name, exc) from exc
        self.stages.append(name)

    def close(self):
        files = {}
        for name in sorted(set(self.files)):
            p = self.dir / name
            if p.exists():
                files[name] = hashlib.sha256(p.read_bytes()).hexdigest()
        manifest = {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "complete": self.failed is None,
            "failed_stage": self.failed,
            "stages": self.stages,
            "files": files,
            "version": __version__,
        }
        if self.config is not None:
            manifest["config"] = self.config
        _json_dump(manifest, self.dir / "MANIFEST.json")


@contextlib.contextmanager
def bundle_for(out_dir, config_hash, seed, command, config=None):
    b = Bundle(Path(out_dir), config_hash, seed, command, config)
    try:
        yield b
    finally:
        b.close()


def _load_graph(edges, nodes=None, min_node_events=0):
    return load_temporal_graph(edges, nodes, min_node_events)


def _graph_from_config(cfg):
    return _load_graph(cfg.resolve("edges"), cfg.resolve("nodes"), cfg["min_node_events"])[0]


# ----------------------------------------------------------------- commands


def cmd_ingest(args):
    g, report = _load_graph(args.edges, args.nodes, args.min_node_events)
    rep = report.to_dict()
    if args.out:
        with bundle_for(args.out, _args_hash(args), None, "ingest") as b:
            write_events_csv(g, b.path("events.csv"))
            b.json("ingest_report.json", rep)
    print(json.dumps(rep, sort_keys=True))
    return 0


def _snapshot_for(args):
    g, _ = _load_graph(args.edges, args.nodes)
    t = g.last_time if args.time is None else args.time
    return g, snapshot_at(g, t)


def _emit(header, rows, out):
    if out:
        _csv_dump(header, rows, Path(out))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_census(args):
    _, s = _snapshot_for(args)
    npp = npp_census(s)
    _emit(["node", *POSITIONS], [[v, *npp[v]] for v in s.nodes], args.out)
    return 0


def _centrality_params(args):
    return {
        "pagerank": {"damping": args.damping, "tol": args.tol},
        "closeness": {"variant": args.closeness_variant},
    }


def cmd_centrality(args):
    _, s = _snapshot_for(args)
    measures = MEASURES if args.measure == "all" else (args.measure,)
    params = _centrality_params(args)
    rows = []
    for m in measures:
        res = compute_centrality(s, m, params.get(m))
        if not res.converged:
            log.warning("pagerank did not converge after %d iterations", res.iterations)
        rows.extend([v, m, res.scores[v]] for v in s.nodes)
    _emit(["node", "measure", "score"], rows, args.out)
    return 0


def cmd_label(args):
    _, s = _snapshot_for(args)
    res = compute_centrality(s, args.measure, _centrality_params(args).get(args.measure))
    lab = label_nodes(res, args.threshold)
    rows = [[v, res.scores[v], "IN" if lab.is_important(v) else "NIN"] for v in s.nodes]
    _emit(["node", "score", "label"], rows, args.out)
    return 0


def cmd_generate(args):
    records = growth_stream(args.nodes, seed=args.seed, p_triadic=args.p_triadic, activity=args.activity)
    write_stream_csv(records, args.out)
    return 0


def cmd_print_defaults(args):
    sys.stdout.write(format_defaults())
    return 0


def _config(args, path=None):
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    return load_config(path if path is not None else args.config, overrides, args.seed)


def _public(cfg):
    return {k: v for k, v in cfg.values.items() if k != "output_dir"}


def _out_dir(cfg):
    p = Path(cfg["output_dir"])
    return p if p.is_absolute() else Path.cwd() / p


def _cohort_rows(cohort):
    return [[ex.node, *(ex.features[f] for f in cohort.feature_names), ex.label] for ex in cohort.examples]


def _fit_one(cfg, g, fs, b=None):
    """Cohort -> split -> bagged model -> held-out scores for one feature set."""
    ctx = b.stage if b else (lambda _name: contextlib.nullcontext())
    with ctx(f"cohort[{fs}]"):
        cohort = build_cohort(
            g, *cfg.windows(), feature_set=fs, label_measure=cfg["label_measure"],
            threshold=cfg["threshold"], centrality_params=cfg.centrality_params(),
        )
        if not len(cohort):
            raise ValueError(f"empty cohort: {cohort.meta} {cohort.diagnostics}")
        data = cohort.to_dataset()
    with ctx(f"split[{fs}]"):
        train_idx, test_idx = stratified_split(data.y, cfg["test_fraction"], cfg["seed"])
        train, test = data.subset(train_idx), data.subset(test_idx)
    with ctx(f"train[{fs}]"):
        model = bagging_train(train, cfg["bags"], cfg["lambda"], cfg["seed"], tol=cfg["tol"], max_iter=cfg["max_iter"])
    return cohort, data, train, test, model


def cmd_run(args):
    cfg = _config(args)
    sets = ("PA", "TC", "All", "NPP") if cfg["feature_set"] == "compare" else (cfg["feature_set"],)
    results = {}
    with bundle_for(_out_dir(cfg), cfg.config_hash, cfg["seed"], "run", _public(cfg)) as b:
        with b.stage("load"):
            g = _graph_from_config(cfg)
        for fs in sets:
            cohort, data, train, test, model = _fit_one(cfg, g, fs, b)
            with b.stage(f"evaluate[{fs}]"):
                scores = predict_proba(model, test)
                res = {
                    "auroc": safe_metric(auroc, scores, test.y),
                    "aupr": safe_metric(aupr, scores, test.y),
                    "n_cohort": len(data),
                    "n_train": len(train),
                    "n_test": len(test),
                    "positives_train": int(train.y.sum()),
                    "positives_test": int(test.y.sum()),
                    "features": list(data.feature_names),
                }
                results[fs] = res
                wald = None if cfg["wald"] == "off" else wald_report(
                    train, cfg["lambda"], cfg["wald"], tol=cfg["tol"], max_iter=cfg["max_iter"]
                )
            with b.stage(f"write[{fs}]"):
                b.csv(f"cohort_{fs}.csv", ["node", *data.feature_names, "label"], _cohort_rows(cohort))
                b.json(f"cohort_{fs}.meta.json", {**cohort.meta, "diagnostics": cohort.diagnostics,
                                                  "test_fraction": cfg["test_fraction"]})
                b.json(f"model_{fs}.json", {"feature_set": fs, "model": model.to_dict(), "lambda": cfg["lambda"]})
                if res["auroc"] is not None:
                    b.csv(f"roc_{fs}.csv", ["fpr", "tpr", "threshold"], roc_points(scores, test.y))
                if wald is not None:
                    b.csv(
                        f"wald_{fs}.csv",
                        ["feature", "z", "p", "stars", "mode"],
                        [[k, _fmt(r.z), _fmt(r.p_value), r.stars, cfg["wald"]] for k, r in wald.items()],
                    )
        with b.stage("metrics"):
            payload = {"feature_sets": results, "dataset": cfg.name}
            if len(sets) == 1:
                payload.update({"auroc": results[sets[0]]["auroc"], "aupr": results[sets[0]]["aupr"]})
            b.json("metrics.json", payload)
    print(json.dumps({fs: {k: r[k] for k in ("auroc", "aupr")} for fs, r in results.items()}, sort_keys=True))
    return 0


def cmd_transfer(args):
    if len(args.configs) < 2:
        raise UsageError("transfer requires >= 2 datasets")
    cfgs = [_config(args, p) for p in args.configs]
    sets = {c["feature_set"] for c in cfgs}
    if len(sets) != 1 or "compare" in sets:
        raise UsageError(f"all transfer configs need one shared feature_set (got {sorted(sets)})")
    names, seen = [], {}
    for c in cfgs:
        base = c.name
        seen[base] = seen.get(base, 0) + 1
        names.append(base if seen[base] == 1 else f"{base}_{seen[base]}")
    lead = cfgs[0]
    combined = hashlib.sha256("".join(c.config_hash for c in cfgs).encode()).hexdigest()[:16]
    models, tests = {}, {}
    with bundle_for(_out_dir(lead), combined, lead["seed"], "transfer",
                    {n: _public(c) for n, c in zip(names, cfgs)}) as b:
        for name, c in zip(names, cfgs):
            with b.stage(f"load[{name}]"):
                g = _graph_from_config(c)
            fs = c["feature_set"]
            _, _, _, test, model = _fit_one(c, g, fs, b)
            models[name], tests[name] = model, test
        with b.stage("transfer"):
            tm = transfer_matrix(models, tests)
        with b.stage("write"):
            for metric in ("aupr", "auroc"):
                b.csv(f"transfer_loss_{metric}.csv", ["train", *names],
                      [[a, *(_fmt(tm.loss[metric][a][x]) for x in names)] for a in names])
                raw = getattr(tm, metric)
                b.csv(f"transfer_raw_{metric}.csv", ["train", *names],
                      [[a, *(_fmt(raw[a][x]) for x in names)] for a in names])
            b.json("transfer.json", {**tm.to_dict(), "feature_set": lead["feature_set"]})
    print(json.dumps(tm.loss["aupr"], sort_keys=True))
    return 0


def cmd_analyze(args):
    cfg = _config(args)
    kind = args.analysis
    with bundle_for(_out_dir(cfg), cfg.config_hash, cfg["seed"], f"analyze {kind}", _public(cfg)) as b:
        with b.stage("load"):
            g = _graph_from_config(cfg)
        t, horizon = cfg.obs_end, cfg["horizon"]
        if kind == "balance":
            with b.stage("balance"):
                final = snapshot_at(g, horizon)
                lab = label_snapshot(final, cfg["label_measure"], cfg["threshold"], cfg.centrality_params())
                lo, hi = cfg.windows()[0]
                members = {v for v, jt in g.join_time.items() if lo <= jt <= hi and v in final.index}
                groups = {"IN": members & lab.important, "NIN": members & lab.non_important}
                out = {"t": t, "horizon": horizon, "groups": {}}
                early = snapshot_at(g, t)
                for key, nodes in groups.items():
                    at_t = induced_subgraph(early, nodes & set(early.index))
                    at_h = induced_subgraph(final, nodes)
                    out["groups"][key] = {
                        "nodes": len(nodes),
                        "edges_t": at_t.m,
                        "edges_horizon": at_h.m,
                        "balance_t": balance_rate(at_t),
                        "balance_horizon": balance_rate(at_h),
                    }
                b.json("balance.json", out)
        elif kind == "evolution":
            with b.stage("evolution"):
                rates = [
                    triad_evolution_rate(g, t, horizon - t, k, cfg["evolution.sample_cap"], cfg["seed"]).to_dict()
                    for k in (1, 2)
                ]
                b.json("evolution.json", {"t": t, "dt": horizon - t, "rates": rates})
        elif kind == "positions":
            with b.stage("positions"):
                s = snapshot_at(g, t)
                npp = npp_census(s)
                if cfg["positions.scope"] == "cohort":
                    lo, hi = cfg.windows()[0]
                    npp = {v: x for v, x in npp.items() if lo <= g.join_time[v] <= hi}
                rows, table = [], {}
                for i in range(1, 6):
                    for j in range(1, 6):
                        p = position_conditional_prob(npp, i, j, cfg["positions.weighted"])
                        rows.append([i, j, _fmt(p)])
                        table[f"Prob({i}|{j})"] = p
                b.csv("positions.csv", ["position", "given", "prob"], rows)
                b.json("positions.json", {"t": t, "nodes": len(npp), "weighted": cfg["positions.weighted"],
                                          "probabilities": table})
        elif kind == "influence":
            with b.stage("influence"):
                gh = g.truncate(horizon)
                lab = label_snapshot(snapshot_at(gh, horizon), cfg["label_measure"], cfg["threshold"],
                                     cfg.centrality_params())
                scan = detect_influence_events(gh, lab, cfg["influence.sigma_mode"], cfg["influence.sigma"],
                                               cfg["influence.match"], cfg["influence.delay_mode"])
                b.csv("influence_events.csv", ["u", "v", "w", "t", "t_prime", "sigma", "code"],
                      [[e.u, e.v, e.w, e.t, e.t_prime, e.sigma_used, code] for e, code in scan])
                b.json("influence_distribution.json", {"distribution": event_distribution(scan),
                                                       "diagnostics": scan.diagnostics,
                                                       "important": len(lab.important),
                                                       "non_important": len(lab.non_important)})
    return 0


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prominence", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_args(sp, with_time=True):
        sp.add_argument("edges", help="src,dst,ts edge stream (CSV or TSV)")
        sp.add_argument("--nodes", help="optional node,ts arrival file")
        if with_time:
            sp.add_argument("--time", type=int, help="snapshot tick (default: last event)")
        sp.add_argument("--out", help="output CSV (default: stdout)")

    def cent_args(sp):
        sp.add_argument("--damping", type=float, default=0.85)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--closeness-variant", choices=("standard", "harmonic"), default="standard")

    def cfg_args(sp):
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--seed", type=int, help="override every seed")
        sp.add_argument("--out", help="output directory (overrides output_dir)")

    sp = sub.add_parser("ingest", help="normalise an edge stream and report counts")
    sp.add_argument("edges")
    sp.add_argument("--nodes")
    sp.add_argument("--min-node-events", type=int, default=0)
    sp.add_argument("--out", help="directory for events.csv and ingest_report.json")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("census", help="per-node triad position counts")
    graph_args(sp)
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("centrality", help="centrality scores")
    graph_args(sp)
    sp.add_argument("--measure", choices=(*MEASURES, "all"), default="all")
    cent_args(sp)
    sp.set_defaults(func=cmd_centrality)

    sp = sub.add_parser("label", help="Pareto IN/NIN labels")
    graph_args(sp)
    sp.add_argument("--measure", choices=MEASURES, default="degree")
    sp.add_argument("--threshold", type=float, default=0.8)
    cent_args(sp)
    sp.set_defaults(func=cmd_label)

    sp = sub.add_parser("analyze", help="balance, evolution, positions or influence analysis")
    sp.add_argument("analysis", choices=("balance", "evolution", "positions", "influence"))
    sp.add_argument("--config")
    cfg_args(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("run", help="cohort -> bagged logistic regression -> AUROC/AUPR")
    sp.add_argument("--config")
    cfg_args(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("transfer", help="cross-dataset transfer matrix")
    sp.add_argument("configs", nargs="*")
    cfg_args(sp)
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("config", help="configuration helpers")
    csub = sp.add_subparsers(dest="config_command", required=True)
    csub.add_parser("print-defaults").set_defaults(func=cmd_print_defaults)

    sp = sub.add_parser("generate", help="write a synthetic growth stream")
    sp.add_argument("--nodes", type=int, default=3000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--p-triadic", type=float, default=0.5)
    sp.add_argument("--activity", type=float, default=2.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"prominence: error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"prominence: parse error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"prominence: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"prominence: computation error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
