"""CBOW-style embedding trainer: predict a target paper from the mean of
its context papers' vectors.

Two objectives are supported.  Exact softmax optimizes -log Pr(target |
context) with a full softmax over the vocabulary; it is the reference mode
and is gradient-checked in the test suite.  Negative sampling optimizes the
usual sampled surrogate (k negatives drawn from a unigram^0.75 noise
distribution over corpus frequencies) and scales to large graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CitationGraph
from .sampling import WalkCorpus


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainParams:
    dim: int = 128
    window: int = 10
    epochs: int = 5
    lr: float = 0.025
    lr_min: float = 0.0001
    mode: str = "exact"      # "exact" | "neg"
    negatives: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.epochs < 0:
            raise ValueError("dim, window must be >= 1 and epochs >= 0")
        if not self.lr > self.lr_min >= 0:
            raise ValueError("need lr > lr_min >= 0")
        if self.mode not in ("exact", "neg"):
            raise ValueError(f"unknown objective mode: {self.mode!r}")


class EmbeddingModel:
    """Input matrix (row v = embedding of paper v), output matrix (row i
    produces the logit of paper i) and the paper-id vocabulary."""

    def __init__(self, ids, w_in, w_out):
        self.ids = list(ids)
        self.w_in = np.asarray(w_in, dtype=np.float64)
        self.w_out = np.asarray(w_out, dtype=np.float64)
        if self.w_in.shape != self.w_out.shape or self.w_in.shape[0] != len(self.ids):
            raise ValueError("matrix shapes disagree with vocabulary size")
        self._index = {tok: i for i, tok in enumerate(self.ids)}

    @property
    def n(self):
        return self.w_in.shape[0]

    @property
    def dim(self):
        return self.w_in.shape[1]

    def __contains__(self, token):
        return token in self._index

    def index_of(self, token):
        try:
            return self._index[token]
        except KeyError:
            raise KeyError(f"paper id not in vocabulary: {token!r}") from None

    def vector(self, token):
        return self.w_in[self.index_of(token)]


def init_model(g: CitationGraph, params: TrainParams):
    """W_in ~ U(-0.5/d, 0.5/d) from the seeded RNG, W_out all zeros."""
    if g.n == 0:
        raise ValueError("cannot initialize a model on an empty graph")
    rng = np.random.default_rng(params.seed)
    scale = 0.5 / params.dim
    w_in = rng.uniform(-scale, scale, size=(g.n, params.dim))
    w_out = np.zeros((g.n, params.dim))
    return EmbeddingModel(g.ids, w_in, w_out)


def extract_windows(sequences, w):
    """Yield (target, context array) for every position of every sequence.

    Context is the symmetric window of half-width w around the target,
    target excluded, duplicates kept.  Positions with an empty context are
    skipped.
    """
    if w < 1:
        raise ValueError("window must be >= 1")
    for seq in sequences:
        seq = np.asarray(seq)
        ln = len(seq)
        if ln < 2:
            continue
        for i in range(ln):
            lo = max(0, i - w)
            ctx = np.concatenate([seq[lo:i], seq[i + 1:i + w + 1]])
            if ctx.size:
                yield int(seq[i]), ctx


def softmax(logits):
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def forward(m: EmbeddingModel, context):
    """Probability of every paper given a context (indices or tokens)."""
    rows = np.array([m.index_of(c) if isinstance(c, str) else int(c)
                     for c in np.atleast_1d(np.asarray(context, dtype=object))])
    if rows.size == 0:
        raise ValueError("context must be non-empty")
    if rows.min() < 0 or rows.max() >= m.n:
        raise KeyError("context index out of vocabulary range")
    h = m.w_in[rows].mean(axis=0)
    return softmax(m.w_out @ h)


def exact_loss(m: EmbeddingModel, target, ctx):
    return -float(np.log(forward(m, ctx)[target]))


def exact_gradients(m: EmbeddingModel, target, ctx):
    """Analytic gradients of -log Pr(target | ctx), exact-softmax mode.

    Returns (loss, dW_in, dW_out) as dense matrices; the test suite checks
    them against central finite differences.
    """
    rows = np.asarray(ctx, dtype=np.int64)
    h = m.w_in[rows].mean(axis=0)
    probs = softmax(m.w_out @ h)
    loss = -float(np.log(probs[target]))
    dlogits = probs.copy()
    dlogits[target] -= 1.0
    d_w_out = np.outer(dlogits, h)
    dh = m.w_out.T @ dlogits
    d_w_in = np.zeros_like(m.w_in)
    np.add.at(d_w_in, rows, dh / rows.size)
    return loss, d_w_in, d_w_out


def _noise_distribution(sequences, n):
    freq = np.zeros(n)
    for seq in sequences:
        np.add.at(freq, np.asarray(seq, dtype=np.int64), 1.0)
    noise = freq ** 0.75
    total = noise.sum()
    if total == 0:
        raise TrainingError("empty corpus: no noise distribution")
    return noise / total


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def train(m: EmbeddingModel, corpus: WalkCorpus, params: TrainParams):
    """SGD over shuffled context windows; returns the updated model.

    Learning rate decays linearly from lr to lr_min over all steps.
    Deterministic for a fixed seed (single sequential update stream).
    """
    windows = list(extract_windows(corpus.sequences, params.window))
    if not windows and params.epochs > 0:
        raise TrainingError("corpus produced no context windows")
    rng = np.random.default_rng([params.seed, 0x7472])
    w_in, w_out = m.w_in, m.w_out

    if params.mode == "neg":
        noise = _noise_distribution(corpus.sequences, m.n)
        noise_cdf = np.cumsum(noise)

    total = max(params.epochs * len(windows), 1)
    step = 0
    for _ in range(params.epochs):
        for wi in rng.permutation(len(windows)):
            target, rows = windows[wi]
            lr = params.lr - (params.lr - params.lr_min) * (step / total)
            h = w_in[rows].mean(axis=0)
            if params.mode == "exact":
                probs = softmax(w_out @ h)
                loss = -np.log(probs[target])
                dlogits = probs
                dlogits[target] -= 1.0
                dh = w_out.T @ dlogits
                w_out -= lr * np.outer(dlogits, h)
            else:
                negs = np.searchsorted(noise_cdf, rng.random(params.negatives))
                out_rows = np.concatenate(([target], negs))
                labels = np.zeros(out_rows.size)
                labels[0] = 1.0
                scores = _sigmoid(w_out[out_rows] @ h)
                loss = -np.log(np.abs(1.0 - labels - scores) + 1e-12).sum()
                derr = scores - labels
                dh = derr @ w_out[out_rows]
                w_out[out_rows] -= lr * np.outer(derr, h)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at step {step} (lr={lr:.6g})")
            np.add.at(w_in, rows, -lr * dh / rows.size)
            step += 1
    if not (np.isfinite(w_in).all() and np.isfinite(w_out).all()):
        raise TrainingError("non-finite parameters after training")
    return m


def save_model(m: EmbeddingModel, path_in, path_out=None):
    """Text format: header ``N d`` then one ``<paper_id> <f_1> ... <f_d>``
    row per node; a companion file holds W_out in the same layout."""
    if path_out is None:
        path_out = str(path_in) + ".out"
    for path, mat in ((path_in, m.w_in), (path_out, m.w_out)):
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{m.n} {m.dim}\n")
            for tok, row in zip(m.ids, mat):
                f.write(tok + " " + " ".join(f"{x:.9g}" for x in row) + "\n")


def _load_matrix(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: expected header '<N> <d>'")
        n, d = int(header[0]), int(header[1])
        ids, rows = [], []
        for lineno, line in enumerate(f, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != d + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {d + 1} fields, found {len(parts)}")
            ids.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
        if len(ids) != n:
            raise ValueError(
                f"{path}: header declares {n} rows, found {len(ids)}")
    return ids, np.array(rows, dtype=np.float64).reshape(len(ids), d)


def load_model(path_in, path_out=None):
    if path_out is None:
        path_out = str(path_in) + ".out"
    ids, w_in = _load_matrix(path_in)
    ids_out, w_out = _load_matrix(path_out)
    if ids != ids_out:
        raise ValueError("input/output matrix files disagree on vocabulary")
    return EmbeddingModel(ids, w_in, w_out)
