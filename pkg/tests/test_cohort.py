import pytest
from conftest import temporal
from hypothesis import given, settings
from hypothesis import strategies as st

from prominence.centrality import CentralityScores
from prominence.cohort import FEATURE_SETS, build_cohort, label_nodes
from prominence.synth import default_windows, growth_stream
from prominence.tgraph import ingest_edge_stream


def test_pareto_top_three_of_ten():
    scores = {f"v{d}": d for d in range(1, 11)}
    lab = label_nodes(scores, 0.8)
    assert lab.important == {"v8", "v9", "v10"}
    assert lab.non_important == {f"v{d}" for d in range(1, 8)}


def test_ties_make_everyone_important():
    lab = label_nodes({"a": 2, "b": 2, "c": 2}, 0.8)
    assert lab.important == {"a", "b", "c"} and not lab.non_important


def test_single_node_is_important():
    assert label_nodes({"a": 0.0}).important == {"a"}


def test_accepts_centrality_scores():
    lab = label_nodes(CentralityScores("degree", {"a": 1, "b": 5}), 0.8)
    assert lab.measure == "degree" and lab.important == {"b"}


@pytest.mark.parametrize("bad", [0, 1, -0.1, 1.5])
def test_threshold_range(bad):
    with pytest.raises(ValueError):
        label_nodes({"a": 1}, bad)


def test_empty_scores():
    with pytest.raises(ValueError):
        label_nodes({})


score_maps = st.dictionaries(st.text("abcdefgh", min_size=1, max_size=3), st.integers(0, 6), min_size=1, max_size=40)


@settings(max_examples=100, deadline=None)
@given(score_maps, st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_partition_and_monotone(scores, t1, t2):
    lo, hi = sorted((t1, t2))
    a, b = label_nodes(scores, lo), label_nodes(scores, hi)
    assert b.important <= a.important
    for lab in (a, b):
        assert lab.important | lab.non_important == set(scores)
        assert not lab.important & lab.non_important
    assert len(b.important) / len(scores) >= 1 - hi - 1e-12


# ----------------------------------------------------------------- cohorts


@pytest.fixture(scope="module")
def grown():
    g, _ = ingest_edge_stream(growth_stream(400, seed=5))
    return g, default_windows(400)


def _cohort(g, w, fs, **kw):
    return build_cohort(g, (w["join_start"], w["join_end"]), w["obs_duration"], w["horizon"], fs, **kw)


@pytest.mark.parametrize("fs,names", [("PA", ("degree",)), ("NPP", ("p1", "p2", "p3", "p4", "p5")),
                                      ("TC", ("p3",)), ("All", FEATURE_SETS["All"])])
def test_feature_schemas(grown, fs, names):
    c = _cohort(*grown, fs)
    assert c.feature_names == names
    assert all(tuple(ex.features) == names for ex in c.examples)
    assert len(c) == grown[1]["join_end"] - grown[1]["join_start"] + 1


def test_no_label_leakage(grown):
    g, w = grown
    obs_end = w["join_end"] + w["obs_duration"]
    full = _cohort(g, w, "NPP")
    cut = _cohort(g.truncate(obs_end), w, "NPP")
    assert [ex.features for ex in full.examples] == [ex.features for ex in cut.examples]


def test_labels_follow_horizon_pareto(grown):
    from prominence.cohort import label_snapshot
    from prominence.tgraph import snapshot_at

    g, w = grown
    c = _cohort(g, w, "PA")
    lab = label_snapshot(snapshot_at(g, w["horizon"]))
    assert all(ex.label == (ex.node in lab.important) for ex in c.examples)
    assert c.diagnostics["important"] == sum(ex.label for ex in c.examples)


def test_cold_arrival_is_kept():
    g = temporal([("a", "b", 1), ("a", "c", 2), ("b", "c", 30)], {"x": 5})
    c = build_cohort(g, (5, 5), 3, 40, "PA")
    assert [ex.node for ex in c.examples] == ["x"]
    assert c.examples[0].features == {"degree": 0.0}
    assert build_cohort(g, (5, 5), 3, 40, "TC").examples[0].features == {"p3": 0.0}
    # position 2 counts edges the node is detached from, so it is not zero
    npp = build_cohort(g, (5, 5), 3, 40, "NPP").examples[0].features
    assert npp == {"p1": 0.0, "p2": 2.0, "p3": 0.0, "p4": 0.0, "p5": 0.0}


def test_cold_arrival_in_empty_graph_is_zero_vector():
    g = temporal([("a", "b", 50)], {"x": 5})
    c = build_cohort(g, (5, 5), 3, 60, "NPP")
    assert list(c.examples[0].features.values()) == [0.0] * 5


def test_empty_cohort_has_diagnostics(grown):
    g, w = grown
    c = build_cohort(g, (10_000, 10_001), 1, 20_000, "PA")
    assert len(c) == 0
    assert c.diagnostics["joined"] == 0 and c.meta["join_window"] == [10_000, 10_001]


def test_horizon_must_follow_observation(grown):
    with pytest.raises(ValueError, match="horizon"):
        build_cohort(grown[0], (10, 20), 5, 25, "PA")


def test_to_dataset(grown):
    d = _cohort(*grown, "NPP").to_dataset()
    assert d.X.shape == (len(d.y), 5)
    assert set(d.y.tolist()) == {0, 1}
