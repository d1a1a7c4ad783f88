"""Directed citation graph with CSR adjacency and per-node year metadata.

An edge (u, w) means paper u cites paper w.  Ref(v) is the set of papers v
cites (out-neighbors), Cit(v) the set of papers citing v (in-neighbors) and
Adj(v) their union.  All three neighborhoods are stored contiguously per
node (CSR layout) and sorted by internal index, so the graph stays compact
and membership tests are O(log degree).

Graphs are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)

YEAR_UNKNOWN = -1


class GraphFormatError(ValueError):
    """Malformed edge or node record (carries the offending line number)."""


class GraphError(ValueError):
    """Invalid graph operation (unknown node, missing metadata, ...)."""


def _csr_from_pairs(src, dst, n):
    """Build (indptr, indices) for pairs already sorted by (src, dst)."""
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst.astype(np.int64, copy=True)


class CitationGraph:
    """Immutable directed citation graph over dense node indices 0..N-1.

    External paper ids (opaque tokens) map bijectively to internal indices;
    the mapping is fixed at construction and preserved by the binary cache.
    """

    def __init__(self, ids, years, edges_u, edges_w, self_loops_dropped=0,
                 duplicate_edges_dropped=0):
        self.ids = list(ids)
        self.n = len(self.ids)
        self.years = np.asarray(years, dtype=np.int64)
        if self.years.shape != (self.n,):
            raise GraphError("years array must have one entry per node")
        self._index = {tok: i for i, tok in enumerate(self.ids)}
        if len(self._index) != self.n:
            raise GraphError("duplicate paper ids")
        self.self_loops_dropped = int(self_loops_dropped)
        self.duplicate_edges_dropped = int(duplicate_edges_dropped)

        u = np.asarray(edges_u, dtype=np.int64)
        w = np.asarray(edges_w, dtype=np.int64)
        keep = u != w
        dropped = int((~keep).sum())
        if dropped:
            self.self_loops_dropped += dropped
            log.warning("dropped %d self-loop edge(s)", dropped)
            u, w = u[keep], w[keep]
        if u.size:
            keys = np.unique(u * np.int64(self.n) + w)
            dups = u.size - keys.size
            if dups:
                self.duplicate_edges_dropped += dups
            u = keys // self.n
            w = keys % self.n
        self.m = int(u.size)

        # out-edges sorted by (citing, cited): exactly the unique-key order
        self.ref_indptr, self.ref_indices = _csr_from_pairs(u, w, self.n)
        # in-edges sorted by (cited, citing)
        order = np.lexsort((u, w))
        self.cit_indptr, self.cit_indices = _csr_from_pairs(w[order], u[order], self.n)
        # undirected union, deduplicated (mutual citations collapse to one)
        if self.m:
            du = np.concatenate([u, w])
            dw = np.concatenate([w, u])
            ukeys = np.unique(du * np.int64(self.n) + dw)
            au = ukeys // self.n
            aw = ukeys % self.n
        else:
            au = aw = np.zeros(0, dtype=np.int64)
        self.adj_indptr, self.adj_indices = _csr_from_pairs(au, aw, self.n)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, edge_pairs, years=None):
        """Build a graph from (citing_id, cited_id) token pairs.

        ``years`` maps token -> publication year; tokens present only in
        ``years`` become isolated nodes, tokens present only in edges get
        an unknown year.
        """
        index = {}
        ids = []

        def idx(tok):
            i = index.get(tok)
            if i is None:
                i = len(ids)
                index[tok] = i
                ids.append(tok)
            return i

        u, w = [], []
        for citing, cited in edge_pairs:
            u.append(idx(citing))
            w.append(idx(cited))
        if years:
            for tok in years:
                idx(tok)
        year_arr = np.full(len(ids), YEAR_UNKNOWN, dtype=np.int64)
        if years:
            for tok, y in years.items():
                year_arr[index[tok]] = y
        return cls(ids, year_arr, u, w)

    # -- accessors --------------------------------------------------------

    def __contains__(self, token):
        return token in self._index

    def index_of(self, token):
        try:
            return self._index[token]
        except KeyError:
            raise GraphError(f"unknown paper id: {token!r}") from None

    def refs(self, i):
        """Out-neighbors Ref(i) as a sorted index array."""
        return self.ref_indices[self.ref_indptr[i]:self.ref_indptr[i + 1]]

    def cits(self, i):
        """In-neighbors Cit(i) as a sorted index array."""
        return self.cit_indices[self.cit_indptr[i]:self.cit_indptr[i + 1]]

    def adj(self, i):
        """Undirected neighborhood Adj(i) = Ref(i) ∪ Cit(i), sorted."""
        return self.adj_indices[self.adj_indptr[i]:self.adj_indptr[i + 1]]

    def degree(self, i):
        """Undirected degree δ(i) = |Adj(i)|."""
        return int(self.adj_indptr[i + 1] - self.adj_indptr[i])

    @property
    def degrees(self):
        return np.diff(self.adj_indptr)

    def neighbors(self, token, mode="adj"):
        """Neighbor tokens of ``token`` in ascending internal-index order."""
        i = self.index_of(token)
        if mode == "refs":
            rows = self.refs(i)
        elif mode == "cits":
            rows = self.cits(i)
        elif mode == "adj":
            rows = self.adj(i)
        else:
            raise GraphError(f"unknown neighbor mode: {mode!r}")
        return [self.ids[j] for j in rows]

    @property
    def has_years(self):
        return bool(np.any(self.years != YEAR_UNKNOWN))

    def year_of(self, token):
        y = int(self.years[self.index_of(token)])
        return None if y == YEAR_UNKNOWN else y

    # -- time slicing -----------------------------------------------------

    def time_slice(self, year):
        """Subgraph of papers with a known publication year <= ``year``.

        Nodes with unknown year are removed along with all incident edges.
        """
        if not self.has_years:
            raise GraphError("time-slice requires years")
        keep = (self.years != YEAR_UNKNOWN) & (self.years <= year)
        new_of_old = np.full(self.n, -1, dtype=np.int64)
        new_of_old[keep] = np.arange(int(keep.sum()))
        ids = [tok for tok, k in zip(self.ids, keep) if k]
        years = self.years[keep]
        if self.m:
            u = np.repeat(np.arange(self.n), np.diff(self.ref_indptr))
            w = self.ref_indices
            emask = keep[u] & keep[w]
            u = new_of_old[u[emask]]
            w = new_of_old[w[emask]]
        else:
            u = w = np.zeros(0, dtype=np.int64)
        return CitationGraph(ids, years, u, w)

    # -- serialization ----------------------------------------------------

    def edge_list(self):
        """All directed edges as (citing_index, cited_index) arrays."""
        u = np.repeat(np.arange(self.n), np.diff(self.ref_indptr))
        return u, self.ref_indices.copy()

    def save_cache(self, path):
        """Binary cache; round-trips ids, years and edges exactly."""
        u, w = self.edge_list()
        np.savez_compressed(
            path,
            ids=np.array(self.ids, dtype=object),
            years=self.years,
            edges_u=u,
            edges_w=w,
        )

    @classmethod
    def load_cache(cls, path):
        with np.load(path, allow_pickle=True) as z:
            return cls(list(z["ids"]), z["years"], z["edges_u"], z["edges_w"])

    def save_edges(self, edges_path, nodes_path=None):
        """Write the tab-separated edge file (and optional node-year file)."""
        u, w = self.edge_list()
        with open(edges_path, "w", encoding="utf-8") as f:
            for a, b in zip(u, w):
                f.write(f"{self.ids[a]}\t{self.ids[b]}\n")
        if nodes_path is not None:
            with open(nodes_path, "w", encoding="utf-8") as f:
                for tok, y in zip(self.ids, self.years):
                    if y != YEAR_UNKNOWN:
                        f.write(f"{tok}\t{y}\n")


def load_graph(edges_path, nodes_path=None):
    """Load a graph from an edge file and an optional node-year file.

    Edge file: one ``<citing_id>\\t<cited_id>`` record per line.
    Node file: one ``<paper_id>\\t<year>`` record per line.
    """
    edges = []
    with open(edges_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphFormatError(
                    f"{edges_path}:{lineno}: expected <citing>\\t<cited>, got {line!r}")
            edges.append((parts[0], parts[1]))
    years = None
    if nodes_path is not None:
        years = {}
        with open(nodes_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0]:
                    raise GraphFormatError(
                        f"{nodes_path}:{lineno}: expected <paper_id>\\t<year>, got {line!r}")
                try:
                    years[parts[0]] = int(parts[1])
                except ValueError:
                    raise GraphFormatError(
                        f"{nodes_path}:{lineno}: year is not an integer: {parts[1]!r}") from None
    return CitationGraph.from_edges(edges, years)
