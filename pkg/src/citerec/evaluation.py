"""Random-hide evaluation: hide a fraction of a query paper's references,
rank candidates from the rest, and measure recall@k.

Queries published in year y are always served by the graph slice and
embedding for year y-1, so no model input postdates the query.
"""

from __future__ import annotations

import math
import logging
from dataclasses import dataclass

import numpy as np

from .graph import CitationGraph, YEAR_UNKNOWN
from .baselines import PageRankParams
from .ranking import recommend

log = logging.getLogger(__name__)

ALL_METHODS = ("simavg", "simwgd", "simref", "citmod", "paperrank", "cf")


@dataclass
class Query:
    query_id: str
    year: int
    seeds: list
    hidden: list
    hidden_ratio: float

    def __post_init__(self):
        if set(self.seeds) & set(self.hidden):
            raise ValueError("seed and hidden sets overlap")
        if not self.seeds or not self.hidden:
            raise ValueError("need at least one seed and one hidden paper")


@dataclass(frozen=True)
class ExperimentConfig:
    hidden_ratios: tuple = (0.1,)
    n_queries: int = 2500
    ref_range: tuple = (20, 200)
    year_range: tuple = (2005, 2010)
    k_values: tuple = (10, 25, 50, 100)
    methods: tuple = ALL_METHODS
    seed: int = 0

    def __post_init__(self):
        for r in self.hidden_ratios:
            if not 0 < r < 1:
                raise ValueError("hidden ratios must lie in (0, 1)")
        if self.ref_range[0] > self.ref_range[1] or self.year_range[0] > self.year_range[1]:
            raise ValueError("empty range")


def hidden_count(n_refs, ratio):
    """ceil(ratio * n_refs), clamped so both sides stay non-empty."""
    return min(max(math.ceil(ratio * n_refs), 1), n_refs - 1)


def build_queries(g: CitationGraph, cfg: ExperimentConfig, ratio, rng=None):
    """Sample eligible query papers and split their surviving references.

    Eligible papers have a known year inside cfg.year_range and a reference
    count inside cfg.ref_range.  References are restricted to the slice at
    year-1 before the hide; papers with fewer than 2 surviving references
    are skipped.
    """
    if rng is None:
        rng = np.random.default_rng([cfg.seed, int(round(ratio * 1000))])
    if not g.has_years:
        raise ValueError("query building requires year metadata")
    y_lo, y_hi = cfg.year_range
    r_lo, r_hi = cfg.ref_range
    ref_counts = np.diff(g.ref_indptr)
    eligible = np.flatnonzero(
        (g.years != YEAR_UNKNOWN)
        & (g.years >= y_lo) & (g.years <= y_hi)
        & (ref_counts >= r_lo) & (ref_counts <= r_hi))
    order = rng.permutation(eligible)

    slices = {}
    queries = []
    for v in order:
        if len(queries) == cfg.n_queries:
            break
        v = int(v)
        year = int(g.years[v])
        if year - 1 not in slices:
            sl = g.time_slice(year - 1)
            slices[year - 1] = {tok for tok in sl.ids}
        alive = slices[year - 1]
        refs = [g.ids[r] for r in g.refs(v) if g.ids[r] in alive]
        if len(refs) < 2:
            continue
        n_hide = hidden_count(len(refs), ratio)
        hide_pos = rng.choice(len(refs), size=n_hide, replace=False)
        hide_set = set(int(i) for i in hide_pos)
        queries.append(Query(
            query_id=g.ids[v],
            year=year,
            seeds=[r for i, r in enumerate(refs) if i not in hide_set],
            hidden=[refs[i] for i in sorted(hide_set)],
            hidden_ratio=ratio,
        ))
    if len(queries) < cfg.n_queries:
        log.warning("only %d eligible queries (requested %d)",
                    len(queries), cfg.n_queries)
    return queries


def recall_at_k(ranked, hidden, k):
    """Fraction of hidden papers appearing in the top k of ``ranked``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hidden = set(hidden)
    if not hidden:
        raise ValueError("hidden set must be non-empty")
    top = {tok for tok, _ in ranked[:k]}
    return len(top & hidden) / len(hidden)


def check_no_time_leakage(models_or_graphs, full_graph: CitationGraph, queries):
    """Every node available to the model serving a query must predate the
    query year.  Raises on violation."""
    for q in queries:
        serving = models_or_graphs[q.year - 1]
        ids = serving.ids
        for tok in ids:
            y = full_graph.year_of(tok)
            if y is None or y > q.year - 1:
                raise ValueError(
                    f"time leakage: {tok!r} (year {y}) serves query "
                    f"{q.query_id!r} of year {q.year}")


def run_experiment(g: CitationGraph, cfg: ExperimentConfig, graphs, models,
                   pr_params: PageRankParams = None, queries_by_ratio=None):
    """Evaluate every configured method on random-hide queries.

    ``graphs`` maps slice year -> CitationGraph, ``models`` maps slice year
    -> EmbeddingModel; queries of year y use the entries for y-1.  Returns
    (per-query records, aggregate rows); aggregates are one row per
    (method, hidden_ratio, k).
    """
    needed = set()
    if queries_by_ratio is None:
        queries_by_ratio = {
            r: build_queries(g, cfg, r) for r in cfg.hidden_ratios}
    for qs in queries_by_ratio.values():
        needed.update(q.year - 1 for q in qs)
    missing = sorted(y for y in needed if y not in graphs)
    embedding_needed = any(m in ("simavg", "simwgd", "simref", "citmod")
                           for m in cfg.methods)
    if embedding_needed:
        missing = sorted(set(missing) | {y for y in needed if y not in models})
    if missing:
        raise ValueError(f"missing sliced graph/model for years: {missing}")

    max_k = max(cfg.k_values)
    records = []
    for ratio, queries in sorted(queries_by_ratio.items()):
        for qi, q in enumerate(queries):
            sl = graphs[q.year - 1]
            model = models.get(q.year - 1)
            seeds = [s for s in q.seeds if s in sl]
            if not seeds:
                continue
            for method in cfg.methods:
                rng = (np.random.default_rng([cfg.seed, 0x72616E64, qi])
                       if method == "random" else None)
                ranked = recommend(method, seeds, max_k, model=model,
                                   graph=sl, pr_params=pr_params, rng=rng)
                rec = {"method": method, "hidden_ratio": ratio,
                       "query_id": q.query_id, "year": q.year}
                for k in cfg.k_values:
                    rec[f"recall@{k}"] = recall_at_k(ranked, q.hidden, k)
                records.append(rec)

    aggregates = []
    for ratio in sorted(queries_by_ratio):
        for method in cfg.methods:
            rows = [r for r in records
                    if r["method"] == method and r["hidden_ratio"] == ratio]
            for k in cfg.k_values:
                mean = (sum(r[f"recall@{k}"] for r in rows) / len(rows)
                        if rows else float("nan"))
                aggregates.append({
                    "method": method, "hidden_ratio": ratio, "k": k,
                    "mean_recall": mean, "n_queries": len(rows)})
    return records, aggregates


def write_report(path, aggregates):
    """Aggregate CSV: method,hidden_ratio,k,mean_recall,n_queries."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("method,hidden_ratio,k,mean_recall,n_queries\n")
        for row in aggregates:
            f.write(f"{row['method']},{row['hidden_ratio']:g},{row['k']},"
                    f"{row['mean_recall']:.6f},{row['n_queries']}\n")


def write_queries(path, queries):
    """One record per line: query_id, year, seeds, hidden (tab-separated;
    id lists comma-separated)."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# query_id\tyear\thidden_ratio\tseeds\thidden\n")
        for q in queries:
            f.write(f"{q.query_id}\t{q.year}\t{q.hidden_ratio:g}\t"
                    f"{','.join(q.seeds)}\t{','.join(q.hidden)}\n")


def read_queries(path):
    queries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields")
            queries.append(Query(
                query_id=parts[0], year=int(parts[1]),
                hidden_ratio=float(parts[2]),
                seeds=parts[3].split(","), hidden=parts[4].split(",")))
    return queries
