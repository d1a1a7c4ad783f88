"""Score and rank candidate papers against a seed set.

Three embedding-based schemes (cosine against seeds, degree-weighted
cosine, cosine against the mean seed vector) and one model-based scheme
that runs the trained predictor with the seeds as context.
"""

from __future__ import annotations

import numpy as np

from .embedding import EmbeddingModel, forward
from .graph import CitationGraph

COSINE_METHODS = ("simavg", "simwgd", "simref")
EMBEDDING_METHODS = COSINE_METHODS + ("citmod",)


def _seed_rows(m: EmbeddingModel, seeds):
    rows = np.array(sorted(m.index_of(s) for s in seeds), dtype=np.int64)
    if rows.size == 0:
        raise ValueError("seed set must be non-empty")
    return rows


def _cosine_to_all(m: EmbeddingModel, vec):
    """Cosine of every input-matrix row against vec; zero vectors score 0."""
    norms = np.linalg.norm(m.w_in, axis=1)
    vnorm = np.linalg.norm(vec)
    if vnorm == 0:
        return np.zeros(m.n)
    denom = norms * vnorm
    out = np.zeros(m.n)
    nz = denom > 0
    out[nz] = (m.w_in[nz] @ vec) / denom[nz]
    return out


def sim_avg(m: EmbeddingModel, seeds):
    """Mean cosine similarity to the seed vectors, for every candidate."""
    rows = _seed_rows(m, seeds)
    scores = np.zeros(m.n)
    for r in rows:
        scores += _cosine_to_all(m, m.w_in[r])
    return scores / rows.size


def sim_wgd(m: EmbeddingModel, g: CitationGraph, seeds):
    """Like sim_avg but each seed weighted by 1/degree in the training
    graph; isolated seeds contribute nothing."""
    rows = _seed_rows(m, seeds)
    scores = np.zeros(m.n)
    for r, tok in zip(rows, (m.ids[r] for r in rows)):
        delta = g.degree(g.index_of(tok))
        if delta == 0:
            continue
        scores += _cosine_to_all(m, m.w_in[r]) / delta
    return scores / rows.size


def sim_ref(m: EmbeddingModel, seeds):
    """Cosine similarity to the mean of the seed vectors."""
    rows = _seed_rows(m, seeds)
    return _cosine_to_all(m, m.w_in[rows].mean(axis=0))


def cit_mod(m: EmbeddingModel, seeds):
    """Model prediction with the seeds as context: a probability
    distribution over every paper in the vocabulary."""
    return forward(m, _seed_rows(m, seeds))


def rank_scores(ids, scores, exclude, k=None):
    """Descending-score order, ties broken by ascending internal index,
    excluded ids removed, truncated to k."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.size
    order = np.lexsort((np.arange(n), -scores))
    excluded = set(exclude)
    out = []
    for i in order:
        tok = ids[i]
        if tok in excluded:
            continue
        out.append((tok, float(scores[i])))
        if k is not None and len(out) == k:
            break
    return out


def recommend(method, seeds, k, model: EmbeddingModel = None,
              graph: CitationGraph = None, pr_params=None, rng=None):
    """Ranked (paper_id, score) list for one of the six scoring methods.

    Seeds are always excluded from the output.
    """
    from . import baselines

    if k < 1:
        raise ValueError("k must be >= 1")
    seeds = list(dict.fromkeys(seeds))
    if method in EMBEDDING_METHODS:
        if model is None:
            raise ValueError(f"method {method!r} requires an embedding model")
        if method == "simavg":
            scores = sim_avg(model, seeds)
        elif method == "simwgd":
            if graph is None:
                raise ValueError("simwgd requires the training graph")
            scores = sim_wgd(model, graph, seeds)
        elif method == "simref":
            scores = sim_ref(model, seeds)
        else:
            scores = cit_mod(model, seeds)
        return rank_scores(model.ids, scores, seeds, k)
    if method in ("paperrank", "cf", "random"):
        if graph is None:
            raise ValueError(f"method {method!r} requires a graph")
        if method == "paperrank":
            scores = baselines.paperrank(graph, seeds, pr_params)
        elif method == "cf":
            scores = baselines.cf_scores(graph, seeds)
        else:
            if rng is None:
                raise ValueError("random control requires an RNG")
            scores = rng.permutation(graph.n).astype(np.float64)
        return rank_scores(graph.ids, scores, seeds, k)
    raise ValueError(f"unknown ranking method: {method!r}")


def write_ranked_csv(path, ranked):
    """CSV ``rank,paper_id,score`` with 6-decimal scores."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("rank,paper_id,score\n")
        for rank, (tok, score) in enumerate(ranked, 1):
            f.write(f"{rank},{tok},{score:.6f}\n")
