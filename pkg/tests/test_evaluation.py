import numpy as np
import pytest

from citerec.graph import CitationGraph
from citerec.embedding import TrainParams, init_model
from citerec.evaluation import (ExperimentConfig, Query, build_queries,
                                check_no_time_leakage, hidden_count,
                                read_queries, recall_at_k, run_experiment,
                                write_queries, write_report)
from conftest import make_synthetic_citation_corpus_graph


def test_hidden_count_arithmetic():
    assert hidden_count(20, 0.10) == 2
    assert hidden_count(20, 0.95) == 19
    assert hidden_count(3, 0.01) == 1          # floor of one hidden
    assert hidden_count(2, 0.99) == 1          # at least one seed remains


def test_query_validation():
    with pytest.raises(ValueError):
        Query("q", 2005, seeds=["a"], hidden=["a"], hidden_ratio=0.1)
    with pytest.raises(ValueError):
        Query("q", 2005, seeds=[], hidden=["a"], hidden_ratio=0.1)


def eval_graph():
    return make_synthetic_citation_corpus_graph(
        n_papers=800, year_lo=1998, year_hi=2010, refs_lo=4, refs_hi=20,
        seed=21)


def eval_config(**kw):
    defaults = dict(hidden_ratios=(0.1,), n_queries=40, ref_range=(4, 20),
                    year_range=(2005, 2010), k_values=(10, 50),
                    methods=("simavg", "paperrank"), seed=5)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_build_queries_contract():
    g = eval_graph()
    cfg = eval_config()
    queries = build_queries(g, cfg, 0.1)
    assert 0 < len(queries) <= cfg.n_queries
    for q in queries:
        assert not set(q.seeds) & set(q.hidden)
        assert len(q.hidden) >= 1 and len(q.seeds) >= 1
        year = g.year_of(q.query_id)
        assert cfg.year_range[0] <= year <= cfg.year_range[1]
        refs = set(g.neighbors(q.query_id, "refs"))
        assert set(q.seeds) | set(q.hidden) <= refs
        # every used reference survives the slice at year-1
        for tok in q.seeds + q.hidden:
            assert g.year_of(tok) is not None and g.year_of(tok) <= year - 1
        assert len(q.hidden) == hidden_count(len(q.seeds) + len(q.hidden), 0.1)


def test_build_queries_deterministic():
    g = eval_graph()
    cfg = eval_config()
    q1 = build_queries(g, cfg, 0.1)
    q2 = build_queries(g, cfg, 0.1)
    assert [(q.query_id, q.seeds, q.hidden) for q in q1] == \
           [(q.query_id, q.seeds, q.hidden) for q in q2]


def test_build_queries_warns_when_pool_small(caplog):
    g = eval_graph()
    cfg = eval_config(n_queries=100000)
    with caplog.at_level("WARNING"):
        queries = build_queries(g, cfg, 0.1)
    assert len(queries) < 100000
    assert any("eligible queries" in r.message for r in caplog.records)


def test_recall_at_k():
    ranked = [(f"p{i}", 1.0 - i / 100) for i in range(100)]
    assert recall_at_k(ranked, {"p3", "nothere"}, 10) == 0.5
    assert recall_at_k(ranked, {"p0", "p1"}, 10) == 1.0
    with pytest.raises(ValueError):
        recall_at_k(ranked, set(), 10)


def test_recall_monotone_in_k():
    rng = np.random.default_rng(0)
    for _ in range(200):
        order = rng.permutation(50)
        ranked = [(f"p{i}", 0.0) for i in order]
        hidden = {f"p{int(i)}" for i in rng.choice(50, size=5, replace=False)}
        recalls = [recall_at_k(ranked, hidden, k) for k in (1, 5, 10, 25, 50)]
        assert all(a <= b for a, b in zip(recalls, recalls[1:]))


def _slices_and_models(g, cfg, ratios=(0.1,), dim=8):
    queries_by_ratio = {r: build_queries(g, cfg, r) for r in ratios}
    years = {q.year - 1 for qs in queries_by_ratio.values() for q in qs}
    graphs = {y: g.time_slice(y) for y in years}
    tparams = TrainParams(dim=dim, seed=1)
    models = {y: init_model(graphs[y], tparams) for y in years}
    return queries_by_ratio, graphs, models


def test_run_experiment_shapes_and_consistency():
    g = eval_graph()
    cfg = eval_config(methods=("simavg", "simref"), n_queries=15)
    queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
    records, aggregates = run_experiment(g, cfg, graphs, models,
                                         queries_by_ratio=queries_by_ratio)
    assert len(aggregates) == 2 * 2  # methods x k grid, one ratio
    for row in aggregates:
        assert 0.0 <= row["mean_recall"] <= 1.0


def test_run_experiment_identical_methods_agree():
    # with a single seed, simavg and simref produce identical rankings
    g = eval_graph()
    cfg = eval_config(methods=("simavg", "simref"), n_queries=10)
    queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
    single_seeded = {}
    for r, qs in queries_by_ratio.items():
        single_seeded[r] = [
            Query(q.query_id, q.year, [q.seeds[0]], q.hidden, q.hidden_ratio)
            for q in qs]
    _, aggregates = run_experiment(g, cfg, graphs, models,
                                   queries_by_ratio=single_seeded)
    by_method = {}
    for row in aggregates:
        by_method.setdefault(row["method"], []).append(row["mean_recall"])
    assert by_method["simavg"] == by_method["simref"]


def test_run_experiment_missing_year_errors():
    g = eval_graph()
    cfg = eval_config(n_queries=10)
    queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
    victim = next(iter(graphs))
    del graphs[victim]
    with pytest.raises(ValueError, match=str(victim)):
        run_experiment(g, cfg, graphs, models,
                       queries_by_ratio=queries_by_ratio)


def test_random_control_matches_hypergeometric_expectation():
    g = eval_graph()
    cfg = eval_config(methods=("random",), n_queries=40, k_values=(10,))
    queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
    records, aggregates = run_experiment(g, cfg, graphs, models,
                                         queries_by_ratio=queries_by_ratio)
    # E[recall@k] per query = k / (N_slice - |S|); averaged over queries
    expected, var_sum = 0.0, 0.0
    queries = queries_by_ratio[0.1]
    k = 10
    for q in queries:
        n_cand = graphs[q.year - 1].n - len(q.seeds)
        p = k / n_cand
        expected += p
        var_sum += p * (1 - p) / len(q.hidden)   # binomial upper bound
    nq = len(queries)
    expected /= nq
    sigma = np.sqrt(var_sum) / nq
    observed = [r["mean_recall"] for r in aggregates if r["k"] == 10][0]
    assert abs(observed - expected) <= 3 * sigma + 1e-12, (observed, expected)


def test_run_experiment_bit_reproducible(tmp_path):
    g = eval_graph()
    cfg = eval_config(n_queries=10, methods=("simavg", "cf"))
    for name in ("a.csv", "b.csv"):
        queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
        _, aggregates = run_experiment(g, cfg, graphs, models,
                                       queries_by_ratio=queries_by_ratio)
        write_report(tmp_path / name, aggregates)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_no_time_leakage_check():
    g = eval_graph()
    cfg = eval_config(n_queries=10)
    queries_by_ratio, graphs, models = _slices_and_models(g, cfg)
    queries = queries_by_ratio[0.1]
    check_no_time_leakage(graphs, g, queries)     # must not raise
    # poison one slice with a future paper
    year = queries[0].year - 1
    g2 = CitationGraph.from_edges([], years={**{t: g.year_of(t) for t in graphs[year].ids},
                                             "future": year + 5})
    with pytest.raises(ValueError, match="time leakage"):
        check_no_time_leakage({year: g2, **{y: v for y, v in graphs.items()
                                            if y != year}}, g2, queries[:1])


def test_query_file_roundtrip(tmp_path):
    queries = [Query("q1", 2006, ["a", "b"], ["c"], 0.1),
               Query("q2", 2007, ["d"], ["e", "f"], 0.5)]
    write_queries(tmp_path / "q.tsv", queries)
    loaded = read_queries(tmp_path / "q.tsv")
    assert [(q.query_id, q.year, q.seeds, q.hidden, q.hidden_ratio)
            for q in loaded] == \
           [(q.query_id, q.year, q.seeds, q.hidden, q.hidden_ratio)
            for q in queries]


def test_report_format(tmp_path):
    write_report(tmp_path / "r.csv", [
        {"method": "simavg", "hidden_ratio": 0.1, "k": 10,
         "mean_recall": 0.25, "n_queries": 100}])
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "method,hidden_ratio,k,mean_recall,n_queries"
    assert lines[1] == "simavg,0.1,10,0.250000,100"


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(hidden_ratios=(1.5,))
    with pytest.raises(ValueError):
        ExperimentConfig(ref_range=(10, 5))
