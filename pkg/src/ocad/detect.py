"""Object anomaly scoring: Isolation Forest, Local Outlier Factor, ranks.

Score conventions follow the presentation of anomaly scores as negative
numbers: the lower (more negative) the score, the more anomalous the object.
Isolation Forest emits ``0.5 - s(x)`` with the standard anomaly measure
``s(x) = 2^(-E[h(x)]/c(psi))``; LOF emits the negated factor.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from math import ceil, log2
from pathlib import Path

import numpy as np

from .errors import DegenerateMatrixWarning, KTooLarge, TooFewRows

DEFAULT_N_TREES = 100
DEFAULT_SUBSAMPLE = 256
DEFAULT_LOF_K = 20

# Floor for mean reachability so coincident clusters (zero reach) get a huge
# finite density instead of an infinite one; their density ratios are then
# exactly 1, and scores stay finite everywhere.
_REACH_FLOOR = 1e-300


@dataclass(frozen=True)
class ScoreVector:
    """Per-object anomaly scores; lower means more anomalous."""

    object_ids: tuple[str, ...]
    scores: np.ndarray
    method: str  # "IF" | "LOF"
    params: dict


@dataclass(frozen=True)
class RankVector:
    """Injective ranks 0..n-1 aligned with ``object_ids``; 0 = most anomalous."""

    object_ids: tuple[str, ...]
    ranks: np.ndarray


def _path_length_adjustments(max_size: int) -> np.ndarray:
    """c(m) = 2*H(m-1) - 2*(m-1)/m for m = 0..max_size, with exact harmonic
    numbers (c(0) = c(1) = 0, c(2) = 1)."""
    c = np.zeros(max_size + 1)
    if max_size >= 2:
        m = np.arange(2, max_size + 1, dtype=np.float64)
        harmonic = np.cumsum(1.0 / np.arange(1, max_size, dtype=np.float64))
        c[2:] = 2.0 * harmonic - 2.0 * (m - 1.0) / m
    return c


def _build_tree(X: np.ndarray, idx: np.ndarray, depth: int, limit: int, rng) -> tuple:
    """Nodes are ("leaf", size) or ("split", feature, threshold, left, right)."""
    if depth >= limit or len(idx) <= 1:
        return ("leaf", len(idx))
    f = int(rng.integers(X.shape[1]))
    col = X[idx, f]
    lo, hi = col.min(), col.max()
    p = float(rng.uniform(lo, hi))
    mask = col < p
    left = _build_tree(X, idx[mask], depth + 1, limit, rng)
    right = _build_tree(X, idx[~mask], depth + 1, limit, rng)
    return ("split", f, p, left, right)


def _tree_path_lengths(node: tuple, X: np.ndarray, idx: np.ndarray, depth: int, out: np.ndarray, c: np.ndarray) -> None:
    if node[0] == "leaf":
        out[idx] = depth + c[node[1]]
        return
    _, f, p, left, right = node
    mask = X[idx, f] < p
    _tree_path_lengths(left, X, idx[mask], depth + 1, out, c)
    _tree_path_lengths(right, X, idx[~mask], depth + 1, out, c)


def isolation_forest(
    F,
    n_trees: int = DEFAULT_N_TREES,
    subsample: int = DEFAULT_SUBSAMPLE,
    seed: int = 0,
) -> ScoreVector:
    """Score every row with an ensemble of random isolation trees.

    Each tree is grown on a random subsample of ``min(subsample, n)`` rows by
    splitting on a uniformly random feature at a uniformly random value in
    the node's [min, max] range, down to single-point nodes or height
    ``ceil(log2(psi))``; truncated leaves contribute the average-path
    adjustment c(size). Identical rows yield identical scores and trigger a
    :class:`DegenerateMatrixWarning`.
    """
    X = np.asarray(F.values, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise TooFewRows("isolation forest needs at least 2 rows")
    if d < 1:
        raise ValueError("isolation forest needs at least 1 column")
    if np.all(X == X[0]):
        warnings.warn("all rows identical; every object gets the same score", DegenerateMatrixWarning)

    psi = min(subsample, n)
    limit = ceil(log2(psi))
    c = _path_length_adjustments(max(psi, 2))
    rng = np.random.default_rng(seed)

    total = np.zeros(n)
    all_idx = np.arange(n)
    path = np.zeros(n)
    for _ in range(n_trees):
        sample = rng.choice(n, size=psi, replace=False)
        tree = _build_tree(X, sample, 0, limit, rng)
        _tree_path_lengths(tree, X, all_idx, 0, path, c)
        total += path
    expected = total / n_trees
    s = np.power(2.0, -expected / c[psi])
    return ScoreVector(
        object_ids=tuple(F.row_ids),
        scores=0.5 - s,
        method="IF",
        params={"n_trees": n_trees, "subsample": subsample, "psi": psi, "height_limit": limit, "seed": seed},
    )


def lof(F, k: int = DEFAULT_LOF_K) -> ScoreVector:
    """Local Outlier Factor with Euclidean distances, emitted negated.

    Neighborhoods include every point within the k-distance (ties kept).
    Reachability of a from b is max(k-dist(b), d(a, b)); local reachability
    density is the reciprocal mean reachability; the factor is the mean
    neighbor-to-self density ratio. Coincident clusters of more than k points
    get factor 1 via the reachability floor.
    """
    X = np.asarray(F.values, dtype=np.float64)
    n = X.shape[0]
    if n < k + 1:
        raise TooFewRows(f"lof with k={k} needs at least {k + 1} rows, got {n}")

    sq = (X * X).sum(axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    D = np.sqrt(D2)
    np.fill_diagonal(D, np.inf)

    kdist = np.partition(D, k - 1, axis=1)[:, k - 1]
    neighbors = [np.flatnonzero(D[i] <= kdist[i]) for i in range(n)]

    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(kdist[neighbors[i]], D[i, neighbors[i]])
        lrd[i] = 1.0 / max(reach.mean(), _REACH_FLOOR)

    factor = np.empty(n)
    for i in range(n):
        factor[i] = (lrd[neighbors[i]] / lrd[i]).mean()

    return ScoreVector(
        object_ids=tuple(F.row_ids),
        scores=-factor,
        method="LOF",
        params={"k": k, "distance": "euclidean"},
    )


def rank(scores: ScoreVector) -> RankVector:
    """Injective rank: ascending by (score, object id); rank 0 is the most
    anomalous object, ties broken lexicographically."""
    order = sorted(range(len(scores.object_ids)), key=lambda i: (scores.scores[i], scores.object_ids[i]))
    ranks = np.empty(len(order), dtype=np.int64)
    for r, i in enumerate(order):
        ranks[i] = r
    return RankVector(object_ids=scores.object_ids, ranks=ranks)


def bottom_k(ranks: RankVector, k: int) -> list[str]:
    """The k most anomalous object ids, most anomalous first."""
    n = len(ranks.object_ids)
    if k > n:
        raise KTooLarge(f"k={k} exceeds {n} ranked objects")
    by_rank = sorted(range(n), key=lambda i: ranks.ranks[i])
    return [ranks.object_ids[i] for i in by_rank[:k]]


# ------------------------------------------------------------------- output

def score_csv_bytes(scores: ScoreVector) -> bytes:
    """Two-column CSV, most anomalous first."""
    order = sorted(range(len(scores.object_ids)), key=lambda i: (scores.scores[i], scores.object_ids[i]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object_id", "score"])
    for i in order:
        w.writerow([scores.object_ids[i], repr(float(scores.scores[i]))])
    return buf.getvalue().encode("utf-8")


def rank_csv_bytes(ranks: RankVector) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object_id", "rank"])
    by_rank = sorted(range(len(ranks.object_ids)), key=lambda i: ranks.ranks[i])
    for i in by_rank:
        w.writerow([ranks.object_ids[i], int(ranks.ranks[i])])
    return buf.getvalue().encode("utf-8")


def write_score_csv(scores: ScoreVector, path: str | Path) -> None:
    Path(path).write_bytes(score_csv_bytes(scores))


def write_rank_csv(ranks: RankVector, path: str | Path) -> None:
    Path(path).write_bytes(rank_csv_bytes(ranks))


def render_score_table(vectors: list[ScoreVector]) -> str:
    """Aligned text table of one or more score vectors over the same objects,
    sorted by the first vector's scores (most anomalous first)."""
    ids = vectors[0].object_ids
    for v in vectors[1:]:
        if v.object_ids != ids:
            raise ValueError("score vectors are not aligned")
    order = sorted(range(len(ids)), key=lambda i: (vectors[0].scores[i], ids[i]))
    header = ["Object ID"] + [f"{v.method} Score" for v in vectors]
    rows = [[ids[i]] + [f"{v.scores[i]:.6f}" for v in vectors] for i in order]
    widths = [max(len(h), *(len(r[c]) for r in rows)) if rows else len(h) for c, h in enumerate(header)]
    lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header))]
    for r in rows:
        lines.append("  ".join(x.rjust(widths[c]) if c else x.ljust(widths[c]) for c, x in enumerate(r)))
    return "\n".join(lines) + "\n"
