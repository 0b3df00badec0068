"""Feature maps over the objects of one type.

Each object of the chosen type becomes one row of a dense numeric matrix.
Column families and their naming scheme:

* ``numvalue<att>``            numeric common attribute, as-is
* ``strvalue<att>_<v>``        one-hot per observed value of a string common attribute
* ``lifecyclecontains<a>``     occurrences of activity ``a`` in the lifecycle
* ``lifecyclestartswith<a>``   one-hot of the start activity
* ``lifecyclestarttime`` / ``lifecycleendtime`` / ``lifecycleduration``
* ``dfg_<a1>_<a2>``            directly-follows edge counts between activities
* ``interactions<ot>`` / ``creation<ot>``   interaction / creation counts per type
* ``cobirth<ot>`` / ``codeath<ot>``         optional, behind a config flag
* ``prop<name>``               aggregated neighbor feature added by propagation

Objects with an empty lifecycle get zeros for all lifecycle-derived columns.
Columns that would be all-zero across every row are omitted, which keeps the
matrix finite without an explicit activity/type whitelist.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    AllColumnsDropped,
    EmptyKeepSet,
    MixedAttributeType,
    NoObjectsOfType,
    RowMismatch,
    TypeMismatch,
)
from .ocel import OcelLog

DEFAULT_EPSILON = 1e-9

AGGREGATIONS = ("mean", "median", "min", "max", "sum")


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs for :func:`extract_features`.

    ``include_cobirth_codeath`` adds per-type co-birth/co-death count columns
    (objects starting or ending their lifecycle simultaneously); they are not
    part of the default feature set.
    """

    include_cobirth_codeath: bool = False


@dataclass(frozen=True)
class FeatureMatrix:
    """Named numeric feature columns over the objects of one type."""

    object_type: str
    row_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray  # shape (len(row_ids), len(columns)), float64

    def __post_init__(self):
        assert self.values.shape == (len(self.row_ids), len(self.columns))

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select_columns(self, keep: Sequence[int]) -> "FeatureMatrix":
        keep = list(keep)
        return replace(
            self,
            columns=tuple(self.columns[i] for i in keep),
            values=self.values[:, keep],
        )


@dataclass(frozen=True)
class NormalizedFeatureMatrix:
    """Feature matrix rescaled per column into [-1, 1].

    Keeps the per-column (min, max) and epsilon of the rescaling plus the raw
    source values, so downstream consumers (feature-score support counts) can
    refer back to the original scale.
    """

    object_type: str
    row_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray
    epsilon: float
    col_min: np.ndarray
    col_max: np.ndarray
    source_values: np.ndarray = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select_columns(self, keep: Sequence[int]) -> "NormalizedFeatureMatrix":
        keep = list(keep)
        return replace(
            self,
            columns=tuple(self.columns[i] for i in keep),
            values=self.values[:, keep],
            col_min=self.col_min[keep],
            col_max=self.col_max[keep],
            source_values=self.source_values[:, keep],
        )


def _common_attribute_columns(log: OcelLog, ot: str, objs: tuple[str, ...]):
    """Numeric and one-hot string columns for the attributes shared by every
    object of the type. Mixed numeric/string use of one attribute is an
    error rather than a silent coercion."""
    names: list[str] = []
    cols: list[np.ndarray] = []
    n = len(objs)
    for att in sorted(log.common_attributes(ot)):
        values = [log.ovmap[o][att] for o in objs]
        kinds = {isinstance(v, str) for v in values}
        if len(kinds) > 1:
            raise MixedAttributeType(
                f"attribute {att!r} of type {ot!r} is numeric for some objects and string for others"
            )
        if kinds == {False}:
            names.append(f"numvalue{att}")
            cols.append(np.asarray(values, dtype=np.float64))
        else:
            for v in sorted(set(values)):
                names.append(f"strvalue{att}_{v}")
                col = np.zeros(n)
                for i, got in enumerate(values):
                    if got == v:
                        col[i] = 1.0
                cols.append(col)
    return names, cols


def extract_features(
    log: OcelLog, ot: str, cfg: ExtractionConfig | None = None
) -> FeatureMatrix:
    """Build the feature matrix for all objects of type ``ot``."""
    cfg = cfg or ExtractionConfig()
    objs = log.objects_of_type(ot)
    if not objs:
        raise NoObjectsOfType(f"no objects of type {ot!r} in the log")
    n = len(objs)

    names, cols = _common_attribute_columns(log, ot, objs)

    lifecycles = [log.lifecycle(o) for o in objs]
    act_counts = [Counter(log.act[e] for e in lc) for lc in lifecycles]
    observed_acts = sorted(set().union(*[set(c) for c in act_counts]) if act_counts else set())
    for a in observed_acts:
        names.append(f"lifecyclecontains{a}")
        cols.append(np.asarray([c.get(a, 0) for c in act_counts], dtype=np.float64))

    start_acts = [log.act[lc[0]] if lc else None for lc in lifecycles]
    for a in sorted({a for a in start_acts if a is not None}):
        names.append(f"lifecyclestartswith{a}")
        cols.append(np.asarray([1.0 if sa == a else 0.0 for sa in start_acts]))

    starts = np.asarray([log.time[lc[0]] if lc else 0.0 for lc in lifecycles])
    ends = np.asarray([log.time[lc[-1]] if lc else 0.0 for lc in lifecycles])
    names += ["lifecyclestarttime", "lifecycleendtime", "lifecycleduration"]
    cols += [starts, ends, ends - starts]

    dfg_counts: list[Counter] = []
    for lc in lifecycles:
        dfg_counts.append(Counter((log.act[e1], log.act[e2]) for e1, e2 in zip(lc, lc[1:])))
    observed_edges = sorted(set().union(*[set(c) for c in dfg_counts]) if dfg_counts else set())
    for a1, a2 in observed_edges:
        names.append(f"dfg_{a1}_{a2}")
        cols.append(np.asarray([c.get((a1, a2), 0) for c in dfg_counts], dtype=np.float64))

    sets_by_type = {
        ot2: [log.interaction_sets(o, ot2) for o in objs] for ot2 in log.object_types
    }
    for ot2 in log.object_types:
        names.append(f"interactions{ot2}")
        cols.append(np.asarray([len(s.interact) for s in sets_by_type[ot2]], dtype=np.float64))
    for ot2 in log.object_types:
        names.append(f"creation{ot2}")
        cols.append(np.asarray([len(s.creation) for s in sets_by_type[ot2]], dtype=np.float64))
    if cfg.include_cobirth_codeath:
        for ot2 in log.object_types:
            names.append(f"cobirth{ot2}")
            cols.append(np.asarray([len(s.cobirth) for s in sets_by_type[ot2]], dtype=np.float64))
        for ot2 in log.object_types:
            names.append(f"codeath{ot2}")
            cols.append(np.asarray([len(s.codeath) for s in sets_by_type[ot2]], dtype=np.float64))

    values = np.column_stack(cols) if cols else np.zeros((n, 0))
    nonzero = [i for i in range(values.shape[1]) if np.any(values[:, i] != 0.0)]
    return FeatureMatrix(
        object_type=ot,
        row_ids=objs,
        columns=tuple(names[i] for i in nonzero),
        values=values[:, nonzero],
    )


def propagate_features(
    log: OcelLog, base: FeatureMatrix, neighbor: FeatureMatrix, agg: str = "mean"
) -> FeatureMatrix:
    """Extend ``base`` with aggregated columns of interacting ``neighbor``
    objects. For each neighbor column ``c`` a column ``prop<c>`` is added
    holding ``agg`` over the values of the interacting neighbor-type objects;
    objects with no neighbors get 0.
    """
    if base.object_type == neighbor.object_type:
        raise TypeMismatch("propagation requires two distinct object types")
    if agg not in AGGREGATIONS:
        raise ValueError(f"agg must be one of {AGGREGATIONS}, got {agg!r}")
    fn = {"mean": np.mean, "median": np.median, "min": np.min, "max": np.max, "sum": np.sum}[agg]

    neighbor_row = {o: i for i, o in enumerate(neighbor.row_ids)}
    prop = np.zeros((len(base.row_ids), len(neighbor.columns)))
    for i, o in enumerate(base.row_ids):
        partners = log.interaction_sets(o, neighbor.object_type).interact
        if not partners:
            continue
        try:
            rows = [neighbor_row[p] for p in sorted(partners)]
        except KeyError as exc:
            raise RowMismatch(
                f"object {exc.args[0]!r} interacts with {o!r} but is missing from the neighbor matrix"
            ) from exc
        prop[i, :] = fn(neighbor.values[rows, :], axis=0)

    return FeatureMatrix(
        object_type=base.object_type,
        row_ids=base.row_ids,
        columns=base.columns + tuple(f"prop{c}" for c in neighbor.columns),
        values=np.hstack([base.values, prop]),
    )


def normalize(F: FeatureMatrix, epsilon: float = DEFAULT_EPSILON) -> NormalizedFeatureMatrix:
    """Rescale each column to [-1, 1]:  -1 + 2*(v - min) / (max - min + eps).

    The per-column minimum maps to exactly -1; constant columns map uniformly
    to -1. The map is strictly increasing, so value order within a column is
    preserved.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if F.values.shape[0] == 0:
        raise NoObjectsOfType("cannot normalize an empty matrix")
    lo = F.values.min(axis=0) if F.values.shape[1] else np.zeros(0)
    hi = F.values.max(axis=0) if F.values.shape[1] else np.zeros(0)
    out = -1.0 + 2.0 * (F.values - lo) / (hi - lo + epsilon)
    return NormalizedFeatureMatrix(
        object_type=F.object_type,
        row_ids=F.row_ids,
        columns=F.columns,
        values=out,
        epsilon=epsilon,
        col_min=lo,
        col_max=hi,
        source_values=F.values,
    )


def variance_filter(F, min_variance: float = 0.0):
    """Keep columns whose population variance exceeds ``min_variance``.

    Works on raw and normalized matrices alike and preserves column order.
    Raises :class:`AllColumnsDropped` when nothing survives, so callers can
    fall back to the unfiltered matrix.
    """
    var = F.values.var(axis=0)
    keep = [i for i in range(len(F.columns)) if var[i] > min_variance]
    if not keep:
        raise AllColumnsDropped(
            f"no column has variance > {min_variance} (out of {len(F.columns)})"
        )
    return F.select_columns(keep)


def filter_activities(log: OcelLog, keep: set[str]) -> OcelLog:
    """New log restricted to events whose activity is in ``keep``. Objects
    are retained even if their lifecycle becomes empty."""
    if not keep:
        raise EmptyKeepSet("keep set must be nonempty")
    events = [
        (e, log.act[e], log.time[e], log.omap[e], log.vmap[e])
        for e in log.events
        if log.act[e] in keep
    ]
    objects = [(o, log.otyp[o], log.ovmap[o]) for o in log.objects]
    return OcelLog.build(events, objects)


def _format_value(v: float) -> str:
    return format(v, "g")


def explode_values(F: FeatureMatrix, max_distinct: int = 20) -> FeatureMatrix:
    """Replace each discrete column by per-value indicator columns ``(c=v)``.

    Columns taking more than ``max_distinct`` distinct values are treated as
    continuous and passed through unchanged.
    """
    names: list[str] = []
    cols: list[np.ndarray] = []
    for i, name in enumerate(F.columns):
        col = F.values[:, i]
        distinct = np.unique(col)
        if len(distinct) > max_distinct:
            names.append(name)
            cols.append(col)
            continue
        for v in distinct:
            names.append(f"({name}={_format_value(v)})")
            cols.append((col == v).astype(np.float64))
    return FeatureMatrix(
        object_type=F.object_type,
        row_ids=F.row_ids,
        columns=tuple(names),
        values=np.column_stack(cols) if cols else np.zeros((len(F.row_ids), 0)),
    )


# ----------------------------------------------------------------------- CSV

def feature_csv_bytes(F) -> bytes:
    """CSV with an ``object_id`` first column; floats keep full round-trip
    precision. Accepts raw and normalized matrices."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object_id", *F.columns])
    for i, o in enumerate(F.row_ids):
        w.writerow([o, *(repr(float(x)) for x in F.values[i, :])])
    return buf.getvalue().encode("utf-8")


def write_feature_csv(F, path: str | Path) -> None:
    Path(path).write_bytes(feature_csv_bytes(F))


def read_feature_csv(path: str | Path, object_type: str = "") -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    return FeatureMatrix(
        object_type=object_type,
        row_ids=tuple(r[0] for r in data),
        columns=tuple(header[1:]),
        values=np.asarray([[float(x) for x in r[1:]] for r in data], dtype=np.float64)
        if data
        else np.zeros((0, len(header) - 1)),
    )
