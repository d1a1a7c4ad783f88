"""Classic comparators: seed-personalized PageRank over the undirected
citation graph, and item-based collaborative filtering on the citing-paper
by cited-paper incidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CitationGraph


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85
    tol: float = 1e-10        # L1 convergence threshold
    max_iter: int = 200

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError("damping must be in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


def _segment_sums(values, indptr):
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return csum[indptr[1:]] - csum[indptr[:-1]]


def paperrank(g: CitationGraph, seeds, params: PageRankParams = None):
    """Random walk with restart to the seed set, on the undirected view.

    Dangling (zero-degree) probability mass is redistributed to the restart
    vector; the result is a probability distribution over all nodes.
    """
    if params is None:
        params = PageRankParams()
    seed_rows = np.array(sorted({g.index_of(s) for s in seeds}), dtype=np.int64)
    if seed_rows.size == 0:
        raise ValueError("seed set must be non-empty")
    lam = params.damping
    restart = np.zeros(g.n)
    restart[seed_rows] = 1.0 / seed_rows.size
    deg = g.degrees.astype(np.float64)
    dangling = deg == 0
    safe_deg = np.where(dangling, 1.0, deg)

    x = restart.copy()
    for _ in range(params.max_iter):
        contrib = x / safe_deg
        spread = _segment_sums(contrib[g.adj_indices], g.adj_indptr)
        dangling_mass = x[dangling].sum()
        x_new = lam * (spread + dangling_mass * restart) + (1 - lam) * restart
        if np.abs(x_new - x).sum() < params.tol:
            x = x_new
            break
        x = x_new
    return x


def cf_scores(g: CitationGraph, seeds):
    """Item-based CF: citing papers act as users, cited papers as items.

    score(d) = sum over seeds s of |Cit(s) ∩ Cit(d)| / (sqrt|Cit(s)| *
    sqrt|Cit(d)|); items nobody cites score 0.
    """
    seed_rows = sorted({g.index_of(s) for s in seeds})
    if not seed_rows:
        raise ValueError("seed set must be non-empty")
    cit_counts = np.diff(g.cit_indptr).astype(np.float64)
    norms = np.sqrt(cit_counts)
    cited = cit_counts > 0

    scores = np.zeros(g.n)
    for s in seed_rows:
        citers = g.cits(s)
        if citers.size == 0:
            continue
        co = np.zeros(g.n)
        for u in citers:
            co[g.refs(int(u))] += 1.0
        scores[cited] += co[cited] / (norms[cited] * norms[s])
    return scores
