import numpy as np
import pytest

from citerec.graph import CitationGraph


@pytest.fixture
def toy_graph():
    # A cites B and C; B cites C
    return CitationGraph.from_edges([("A", "B"), ("A", "C"), ("B", "C")])


def make_planted_graph(n_clusters=4, targets=150, citers=100, refs=10, seed=7):
    """Citation graph with planted co-citation communities.

    Each cluster has `targets` cited papers and `citers` citing papers;
    every citer references `refs` random targets of its own cluster.
    """
    rng = np.random.default_rng(seed)
    edges = []
    years = {}
    target_names = {}
    for c in range(n_clusters):
        names = [f"t{c}_{i}" for i in range(targets)]
        target_names[c] = names
        for t in names:
            years[t] = 2000
        for j in range(citers):
            u = f"c{c}_{j}"
            years[u] = 2005
            for t in rng.choice(targets, size=refs, replace=False):
                edges.append((u, names[int(t)]))
    return CitationGraph.from_edges(edges, years), target_names


def make_synthetic_citation_corpus_graph(n_papers=2000, n_communities=4,
                                         year_lo=1995, year_hi=2010,
                                         refs_lo=5, refs_hi=25,
                                         mix=0.1, seed=11):
    """Growing citation graph: each paper cites earlier papers, mostly from
    its own community, with a `mix` fraction of cross-community citations."""
    rng = np.random.default_rng(seed)
    years_arr = np.sort(rng.integers(year_lo, year_hi + 1, size=n_papers))
    comm = rng.integers(n_communities, size=n_papers)
    by_comm = {c: [] for c in range(n_communities)}
    edges = []
    years = {}
    for i in range(n_papers):
        tok = f"p{i}"
        years[tok] = int(years_arr[i])
        pool_own = by_comm[comm[i]]
        pool_all = i
        if pool_all > 0:
            want = int(rng.integers(refs_lo, refs_hi + 1))
            chosen = set()
            for _ in range(want):
                if pool_own and rng.random() > mix:
                    j = pool_own[int(rng.integers(len(pool_own)))]
                else:
                    j = int(rng.integers(pool_all))
                chosen.add(j)
            for j in chosen:
                edges.append((tok, f"p{j}"))
        by_comm[comm[i]].append(i)
    return CitationGraph.from_edges(edges, years)
