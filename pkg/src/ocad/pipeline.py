"""Composable pipeline steps shared by the CLI, the scripts and the tests."""

from __future__ import annotations

from dataclasses import dataclass

from .detect import (
    DEFAULT_LOF_K,
    DEFAULT_N_TREES,
    DEFAULT_SUBSAMPLE,
    RankVector,
    ScoreVector,
    isolation_forest,
    lof,
    rank,
)
from .errors import AllColumnsDropped
from .features import (
    DEFAULT_EPSILON,
    ExtractionConfig,
    NormalizedFeatureMatrix,
    extract_features,
    normalize,
    propagate_features,
    variance_filter,
)
from .ocel import OcelLog
from .reduce import DEFAULT_FASTMAP_K, DEFAULT_PIVOT_ITERS, fastmap, pca


@dataclass(frozen=True)
class PipelineParams:
    """Resolved knobs of one detection run; everything the manifest needs."""

    object_type: str
    detector: str = "iforest"  # iforest | lof
    reducer: str = "none"  # none | pca | fastmap
    propagate_from: str | None = None
    agg: str = "mean"
    min_variance: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    reduce_k: int = DEFAULT_FASTMAP_K
    pivot_iters: int = DEFAULT_PIVOT_ITERS
    n_trees: int = DEFAULT_N_TREES
    subsample: int = DEFAULT_SUBSAMPLE
    lof_k: int = DEFAULT_LOF_K
    seed: int = 0
    include_cobirth_codeath: bool = False


def build_matrix(log: OcelLog, params: PipelineParams) -> NormalizedFeatureMatrix:
    """extract -> optional propagate -> normalize -> variance filter.

    Falls back to the unfiltered normalized matrix when the variance filter
    would drop every column.
    """
    cfg = ExtractionConfig(include_cobirth_codeath=params.include_cobirth_codeath)
    F = extract_features(log, params.object_type, cfg)
    if params.propagate_from:
        neighbor = extract_features(log, params.propagate_from, cfg)
        F = propagate_features(log, F, neighbor, agg=params.agg)
    Fn = normalize(F, epsilon=params.epsilon)
    try:
        return variance_filter(Fn, params.min_variance)
    except AllColumnsDropped:
        return Fn


def score_matrix(Fn: NormalizedFeatureMatrix, params: PipelineParams) -> ScoreVector:
    """Optional reduction followed by the chosen detector."""
    data = Fn
    if params.reducer == "pca":
        k = min(params.reduce_k, len(Fn.row_ids), len(Fn.columns))
        data = pca(Fn, k)
    elif params.reducer == "fastmap":
        k = min(params.reduce_k, len(Fn.row_ids), len(Fn.columns))
        data = fastmap(Fn, k, pivot_iters=params.pivot_iters, seed=params.seed)
    elif params.reducer != "none":
        raise ValueError(f"unknown reducer {params.reducer!r}")

    if params.detector == "iforest":
        return isolation_forest(data, n_trees=params.n_trees, subsample=params.subsample, seed=params.seed)
    if params.detector == "lof":
        return lof(data, k=params.lof_k)
    raise ValueError(f"unknown detector {params.detector!r}")


def detect_objects(log: OcelLog, params: PipelineParams) -> tuple[NormalizedFeatureMatrix, ScoreVector, RankVector]:
    Fn = build_matrix(log, params)
    scores = score_matrix(Fn, params)
    return Fn, scores, rank(scores)
