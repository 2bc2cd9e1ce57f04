"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict; the lines are printed in the
pytest terminal summary (see conftest.py) and also when this file is run as a
script.
"""

import time
from functools import lru_cache
from itertools import permutations

import networkx as nx
import numpy as np
import pytest
from conftest import complete, er_graph, snap
from oracles import brute_npp, brute_triangles, connected_triples, sweep_ap, sweep_auroc, tie_patterns
from scipy.stats import binomtest

from prominence.census import balance_rate, npp_census
from prominence.cohort import build_cohort, label_snapshot
from prominence.evaluate import aupr, auroc, transfer_matrix
from prominence.influence import detect_influence_events, event_distribution
from prominence.learn import (
    Dataset,
    bagging_train,
    logistic_grad,
    logistic_loss,
    predict_proba,
    stratified_split,
    train_logistic,
)
from prominence.synth import default_windows, growth_stream
from prominence.tgraph import ingest_edge_stream, snapshot_at

RESULTS: dict[int, str] = {}

N_SYNTH = 3000
SEEDS = range(20)


def record(k, ok, detail):
    RESULTS[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    assert ok, RESULTS[k]


# ------------------------------------------------------------------ shared


def _er_cases():
    rng = np.random.default_rng(2024)
    for i in range(200):
        n = int(rng.integers(5, 61))
        p = (0.1, 0.3, 0.6)[i % 3]
        yield er_graph(n, p, 10_000 + i)


@lru_cache(maxsize=None)
def _synth(seed):
    g, _ = ingest_edge_stream(growth_stream(N_SYNTH, seed=seed))
    return g


@lru_cache(maxsize=None)
def _fit(seed, feature_set):
    """Cohort -> stratified split -> 25 bagged models, as the run command does."""
    w = default_windows(N_SYNTH)
    cohort = build_cohort(_synth(seed), (w["join_start"], w["join_end"]), w["obs_duration"], w["horizon"], feature_set)
    data = cohort.to_dataset()
    tr, te = stratified_split(data.y, 0.3, seed)
    train, test = data.subset(tr), data.subset(te)
    model = bagging_train(train, 25, 1e-3, seed)
    return model, test


# -------------------------------------------------------------- criteria


def test_criterion_1_census_matches_enumeration():
    start = time.perf_counter()
    bad = 0
    for nodes, edges in _er_cases():
        bad += npp_census(snap(edges, nodes)) != brute_npp(nodes, edges)
    took = time.perf_counter() - start
    record(1, bad == 0 and took < 60, f"200 ER graphs, {bad} mismatches, {took:.1f}s (limit 60s)")


def test_criterion_2_global_identities():
    graphs = list(_er_cases()) + [complete(k) for k in range(3, 9)]
    graphs += [er_graph(n, 0.05, n) for n in (80, 120)]
    bad = 0
    for nodes, edges in graphs:
        npp = npp_census(snap(edges, nodes)).values()
        T, W = brute_triangles(nodes, edges), connected_triples(nodes, edges)
        sums = (sum(v.p5 for v in npp), sum(v.p4 for v in npp), sum(v.p3 for v in npp))
        bad += sums != (3 * T, W - 3 * T, 2 * (W - 3 * T))
    record(2, bad == 0, f"{len(graphs)} graphs, {bad} identity violations")


def test_criterion_3_balance_rate():
    fails = []
    for k in range(3, 9):
        if balance_rate(snap(complete(k)[1])) != 1.0:
            fails.append(f"K{k}")
    for seed in range(20):
        r = np.random.default_rng(seed)
        tree = [(str(i), str(int(r.integers(i)))) for i in range(1, 5 + 3 * seed)]
        if balance_rate(snap(tree)) != 0.0:
            fails.append(f"tree{seed}")
    pend = balance_rate(snap([("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")]))
    if abs(pend - 0.6) > 1e-12:
        fails.append("pendant")
    worst = 0.0
    for seed in range(60):
        nodes, edges = er_graph(10 + seed, (0.05, 0.2, 0.5)[seed % 3], 500 + seed)
        G = nx.Graph()
        G.add_nodes_from(nodes)
        G.add_edges_from(edges)
        worst = max(worst, abs(balance_rate(snap(edges, nodes)) - nx.transitivity(G)))
    record(3, not fails and worst <= 1e-12,
           f"cliques/trees/pendant failures {fails or 'none'}, max |diff| vs transitivity {worst:.1e} (tol 1e-12)")


def test_criterion_4_metric_oracles():
    checked = worst = 0
    for n in range(1, 10):
        for s, y in tie_patterns(n):
            if sum(y):
                worst = max(worst, abs(aupr(s, y) - sweep_ap(s, y)))
            if 0 < sum(y) < n:
                worst = max(worst, abs(auroc(s, y) - sweep_auroc(s, y)))
            checked += 1
    rng = np.random.default_rng(7)
    for n in (10, 11, 12):
        for _ in range(3000):
            s = rng.integers(0, rng.integers(1, n + 1), n).astype(float)
            y = rng.integers(0, 2, n)
            if 0 < y.sum() < n:
                worst = max(worst, abs(auroc(s, y) - sweep_auroc(s, y)), abs(aupr(s, y) - sweep_ap(s, y)))
                checked += 1
    rng = np.random.default_rng(0)
    scores = rng.normal(size=200)
    y = np.array([1] * 100 + [0] * 100)
    mean_roc = float(np.mean([auroc(scores, rng.permutation(y)) for _ in range(100)]))
    ok = worst <= 1e-12 and abs(mean_roc - 0.5) <= 0.05
    record(4, ok, f"{checked} instances (every tie pattern n<=9, random n=10..12), max |diff| {worst:.1e}; "
                  f"shuffled AUROC mean {mean_roc:.4f} (0.5 +/- 0.05)")


def test_criterion_5_learning():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        n, k = int(rng.integers(10, 80)), int(rng.integers(1, 7))
        Z = rng.normal(size=(n, k)) * rng.uniform(0.5, 3)
        yv = rng.integers(0, 2, n).astype(float)
        theta = rng.normal(size=k + 1)
        lam = float(10 ** rng.uniform(-5, 1))
        g = logistic_grad(theta, Z, yv, lam)
        fd = np.empty_like(theta)
        for j in range(k + 1):
            e = np.zeros_like(theta)
            e[j] = 1e-6
            fd[j] = (logistic_loss(theta + e, Z, yv, lam) - logistic_loss(theta - e, Z, yv, lam)) / 2e-6
        worst = max(worst, float(np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g)))))
    big = 0.0
    for seed in range(5):
        r = np.random.default_rng(seed)
        X = r.normal(size=(300, 4)) * [1, 10, 100, 0.1]
        yv = (X[:, 0] + r.normal(size=300) > 0).astype(int)
        big = max(big, float(np.max(np.abs(train_logistic(Dataset(("a", "b", "c", "d"), X, yv), lam=1e6).weights))))
    record(5, worst <= 1e-6 and big < 1e-3,
           f"gradient max rel err {worst:.1e} on 50 instances (tol 1e-6); max |w| at lambda=1e6 {big:.1e} (< 1e-3)")


def test_criterion_6_trend_reproduction():
    start = time.perf_counter()
    res = {fs: [] for fs in ("PA", "TC", "NPP")}
    for seed in SEEDS:
        for fs in res:
            model, test = _fit(seed, fs)
            res[fs].append(aupr(predict_proba(model, test), test.y))
    took = time.perf_counter() - start
    npp, pa, tc = (np.array(res[k]) for k in ("NPP", "PA", "TC"))
    out = []
    ok = took < 600
    for name, other in (("PA", pa), ("TC", tc)):
        wins, losses = int((npp > other).sum()), int((npp < other).sum())
        p = binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue if wins + losses else 1.0
        ok &= npp.mean() >= other.mean() and p < 0.05
        out.append(f"vs {name} {wins}-{losses} sign p={p:.2g}")
    record(6, bool(ok), f"mean AUPR NPP {npp.mean():.3f} PA {pa.mean():.3f} TC {tc.mean():.3f}; "
                        f"{'; '.join(out)}; {took:.0f}s (limit 600s)")


def test_criterion_7_influence_direction():
    hits = 0
    detail = []
    for seed in SEEDS:
        g = _synth(seed)
        horizon = default_windows(N_SYNTH)["horizon"]
        lab = label_snapshot(snapshot_at(g, horizon))
        d = event_distribution(detect_influence_events(g.truncate(horizon), lab))
        ok = d["1XX"] > d["0XX"] and d["X1X"] > d["X0X"]
        hits += ok
        detail.append(d["1XX"] / max(1, d["0XX"]))
    record(7, hits >= 16, f"{hits}/20 seeds with |1XX|>|0XX| and |X1X|>|X0X| (need 16); "
                          f"median |1XX|/|0XX| {np.median(detail):.1f}")


def test_criterion_8_transfer():
    losses, diag_ok, finite = [], True, True
    for trial in range(10):
        a, b = 2 * trial, 2 * trial + 1
        models = {f"s{a}": _fit(a, "NPP")[0], f"s{b}": _fit(b, "NPP")[0]}
        tests = {f"s{a}": _fit(a, "NPP")[1], f"s{b}": _fit(b, "NPP")[1]}
        tm = transfer_matrix(models, tests)
        for key in ("aupr", "auroc"):
            diag_ok &= all(tm.loss[key][x][x] == 0.0 for x in tm.names)
        off = [tm.loss["aupr"][x][z] for x, z in permutations(tm.names, 2)]
        finite &= all(v is not None and np.isfinite(v) for v in off)
        losses += off
    mean = float(np.mean(losses))
    record(8, diag_ok and finite and mean < 0.25,
           f"diagonal exactly 0: {diag_ok}; off-diagonal finite: {finite}; "
           f"mean off-diagonal AUPR loss {mean:.3f} (< 0.25)")


def test_criterion_9_cli_determinism(tmp_path, capsys):
    from prominence.cli import main

    edges = tmp_path / "edges.csv"
    assert main(["generate", "--nodes", "400", "--seed", "3", "--out", str(edges)]) == 0
    edges2 = tmp_path / "edges2.csv"
    assert main(["generate", "--nodes", "400", "--seed", "3", "--out", str(edges2)]) == 0
    cfg = tmp_path / "a.cfg"
    cfg.write_text(f"edges = {edges}\njoin_start = 119\njoin_end = 198\nobs_duration = 19\nhorizon = 397\nbags = 5\n")
    other = tmp_path / "b.cfg"
    assert main(["generate", "--nodes", "400", "--seed", "4", "--out", str(tmp_path / "e4.csv")]) == 0
    other.write_text(cfg.read_text().replace(str(edges), str(tmp_path / "e4.csv")))

    def outputs(tag):
        d = tmp_path / tag
        d.mkdir()
        cmds = {
            "ingest": ["ingest", str(edges), "--out", str(d / "ingest")],
            "census": ["census", str(edges), "--time", "200", "--out", str(d / "census.csv")],
            "centrality": ["centrality", str(edges), "--out", str(d / "centrality.csv")],
            "label": ["label", str(edges), "--out", str(d / "label.csv")],
            "run": ["run", "--config", str(cfg), "--set", "feature_set=compare", "--out", str(d / "run")],
            "transfer": ["transfer", str(cfg), str(other), "--out", str(d / "transfer")],
            "print-defaults": ["config", "print-defaults"],
            **{f"analyze-{k}": ["analyze", k, "--config", str(cfg), "--out", str(d / k)]
               for k in ("balance", "evolution", "positions", "influence")},
        }
        got = {}
        for name, argv in cmds.items():
            capsys.readouterr()
            code = main(argv)
            got[name] = (code, capsys.readouterr().out)
        for p in sorted(d.rglob("*")):
            if p.is_file():
                got[str(p.relative_to(d))] = p.read_bytes()
        return got

    first, second = outputs("one"), outputs("two")
    codes_ok = all(first[k][0] == 0 for k in first if isinstance(first[k], tuple))
    same = first == second and edges.read_bytes() == edges2.read_bytes()
    diff = sorted(k for k in first if first.get(k) != second.get(k))
    files = sum(1 for v in first.values() if isinstance(v, bytes))
    record(9, codes_ok and same, f"12 commands, {files} output files byte-identical: {same} {diff or ''}".rstrip())


if __name__ == "__main__":
    import sys

    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
