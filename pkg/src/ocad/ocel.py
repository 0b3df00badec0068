"""Object-centric event log model.

An event can relate to any number of objects of different types, so the log
keeps separate maps for activities, timestamps, event-to-object relations and
attribute values instead of a flat case table. Events are totally ordered by
(timestamp, event id); all per-object derivations (lifecycle, follows graphs,
interaction sets) are defined relative to that order.

Timestamps are real seconds since the Unix epoch. Serialization re-emits them
as ISO-8601 UTC with millisecond precision, so parse(serialize(log)) is the
identity for logs whose timestamps are millisecond-quantized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import cached_property
from typing import Iterable, Mapping, Union

from .errors import DanglingReference, DuplicateId, MalformedDocument, UnknownObject

AttributeValue = Union[float, str]

_EPOCH_ISO = "1970-01-01T00:00:00.000Z"


@dataclass(frozen=True)
class InteractionSets:
    """Objects of one target type related to a reference object.

    ``interact`` holds every object of the target type sharing at least one
    event with the reference object (the reference object itself never counts
    as its own interaction partner). The remaining sets refine ``interact``
    by comparing lifecycle boundary timestamps:

    * ``creation``: start strictly after the reference object's start
    * ``continuation``: start time equals the reference object's end time
    * ``cobirth``: equal start times
    * ``codeath``: equal end times

    Comparisons are exact equality on the stored float timestamps.
    """

    interact: frozenset[str]
    creation: frozenset[str]
    continuation: frozenset[str]
    cobirth: frozenset[str]
    codeath: frozenset[str]


@dataclass(frozen=True)
class OcelLog:
    """Immutable object-centric event log.

    ``events`` is the total order: sorted by (timestamp, lexicographic event
    id). All dict fields are keyed exactly by the event/object ids they
    describe. Instances must be built via :meth:`build` or
    :func:`parse_ocel_json`, which enforce the invariants; after construction
    the log is never mutated and all derivations are pure reads.
    """

    events: tuple[str, ...]
    objects: tuple[str, ...]
    otyp: dict[str, str]
    act: dict[str, str]
    time: dict[str, float]
    omap: dict[str, frozenset[str]]
    vmap: dict[str, dict[str, AttributeValue]]
    ovmap: dict[str, dict[str, AttributeValue]]

    @staticmethod
    def build(
        event_records: Iterable[tuple[str, str, float, Iterable[str], Mapping[str, AttributeValue]]],
        object_records: Iterable[tuple[str, str, Mapping[str, AttributeValue]]],
    ) -> "OcelLog":
        """Construct a log from (id, activity, time, object ids, attrs) event
        records and (id, type, attrs) object records, validating uniqueness
        and reference integrity and establishing the total event order."""
        otyp: dict[str, str] = {}
        ovmap: dict[str, dict[str, AttributeValue]] = {}
        for oid, ot, attrs in object_records:
            if oid in otyp:
                raise DuplicateId(f"duplicate object id {oid!r}")
            otyp[oid] = ot
            ovmap[oid] = dict(attrs)

        act: dict[str, str] = {}
        time: dict[str, float] = {}
        omap: dict[str, frozenset[str]] = {}
        vmap: dict[str, dict[str, AttributeValue]] = {}
        for eid, activity, ts, oids, attrs in event_records:
            if eid in act:
                raise DuplicateId(f"duplicate event id {eid!r}")
            related = frozenset(oids)
            for oid in related:
                if oid not in otyp:
                    raise DanglingReference(f"event {eid!r} references unknown object {oid!r}")
            act[eid] = activity
            time[eid] = float(ts)
            omap[eid] = related
            vmap[eid] = dict(attrs)

        ordered = tuple(sorted(act, key=lambda e: (time[e], e)))
        return OcelLog(
            events=ordered,
            objects=tuple(sorted(otyp)),
            otyp=otyp,
            act=act,
            time=time,
            omap=omap,
            vmap=vmap,
            ovmap=ovmap,
        )

    # ------------------------------------------------------------------ views

    @cached_property
    def object_types(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.otyp.values())))

    @cached_property
    def activities(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.act.values())))

    def objects_of_type(self, ot: str) -> tuple[str, ...]:
        return tuple(o for o in self.objects if self.otyp[o] == ot)

    @cached_property
    def _lifecycles(self) -> dict[str, tuple[str, ...]]:
        per_object: dict[str, list[str]] = {o: [] for o in self.objects}
        for e in self.events:
            for o in self.omap[e]:
                per_object[o].append(e)
        return {o: tuple(es) for o, es in per_object.items()}

    @cached_property
    def _event_pos(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.events)}

    def _require_object(self, o: str) -> None:
        if o not in self.otyp:
            raise UnknownObject(f"unknown object id {o!r}")

    # ------------------------------------------------------------ derivations

    def lifecycle(self, o: str) -> tuple[str, ...]:
        """All events relating to ``o``, in total order. Empty when no event
        references the object."""
        self._require_object(o)
        return self._lifecycles[o]

    def start_event(self, o: str) -> str | None:
        lc = self.lifecycle(o)
        return lc[0] if lc else None

    def end_event(self, o: str) -> str | None:
        lc = self.lifecycle(o)
        return lc[-1] if lc else None

    def object_graphs(self, o: str) -> tuple[frozenset[tuple[str, str]], frozenset[tuple[str, str]]]:
        """Directly-follows and eventually-follows graphs over the lifecycle.

        Returns ``(dfg, efg)``. ``efg`` contains every ordered lifecycle pair
        (e1 before e2); ``dfg`` keeps only pairs with no lifecycle event in
        between, i.e. consecutive lifecycle events.
        """
        lc = self.lifecycle(o)
        efg = frozenset((lc[i], lc[j]) for i in range(len(lc)) for j in range(i + 1, len(lc)))
        dfg = frozenset(zip(lc, lc[1:]))
        return dfg, efg

    def interacting(self, o: str) -> frozenset[str]:
        """All objects (any type) sharing at least one event with ``o``,
        excluding ``o`` itself."""
        self._require_object(o)
        partners: set[str] = set()
        for e in self._lifecycles[o]:
            partners |= self.omap[e]
        partners.discard(o)
        return frozenset(partners)

    def interaction_sets(self, o: str, ot: str) -> InteractionSets:
        """Interaction, creation, continuation, co-birth and co-death sets of
        ``o`` restricted to objects of type ``ot``."""
        self._require_object(o)
        interact = frozenset(p for p in self.interacting(o) if self.otyp[p] == ot)
        lc = self._lifecycles[o]
        if not lc or not interact:
            empty = frozenset()
            return InteractionSets(interact, empty, empty, empty, empty)
        t_start = self.time[lc[0]]
        t_end = self.time[lc[-1]]
        creation, continuation, cobirth, codeath = set(), set(), set(), set()
        for p in interact:
            plc = self._lifecycles[p]
            p_start = self.time[plc[0]]
            p_end = self.time[plc[-1]]
            if t_start < p_start:
                creation.add(p)
            if t_end == p_start:
                continuation.add(p)
            if t_start == p_start:
                cobirth.add(p)
            if t_end == p_end:
                codeath.add(p)
        return InteractionSets(
            interact,
            frozenset(creation),
            frozenset(continuation),
            frozenset(cobirth),
            frozenset(codeath),
        )

    def common_attributes(self, ot: str) -> frozenset[str]:
        """Attribute names present on every object of type ``ot``. Empty when
        the type has no objects (rather than "all names")."""
        objs = self.objects_of_type(ot)
        if not objs:
            return frozenset()
        names = set(self.ovmap[objs[0]])
        for o in objs[1:]:
            names &= set(self.ovmap[o])
        return frozenset(names)


# --------------------------------------------------------------------- JSON

def _parse_iso(ts: str) -> float:
    s = ts.strip()
    if s.endswith("Z") or s.endswith("z"):
        s = s[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(s)
    except ValueError as exc:
        raise MalformedDocument(f"bad ISO-8601 timestamp {ts!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def format_iso(t: float) -> str:
    ms_total = round(t * 1000)
    secs, ms = divmod(ms_total, 1000)
    dt = datetime.fromtimestamp(secs, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms:03d}Z"


def _coerce_value(v: object, where: str) -> AttributeValue:
    # JSON booleans are neither numeric nor string attribute values.
    if isinstance(v, bool):
        raise MalformedDocument(f"boolean attribute value in {where}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        return v
    raise MalformedDocument(f"unsupported attribute value {v!r} in {where}")


def parse_ocel_json(data: bytes | str) -> OcelLog:
    """Parse an OCEL 2.0 JSON document.

    Expects top-level ``objects`` and ``events`` lists (``objectTypes`` and
    ``eventTypes`` declarations are accepted and ignored; types are derived
    from the instances). Object attributes may carry change timestamps; the
    latest value per attribute name is kept. Event relationship qualifiers
    are parsed and ignored.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be a JSON object")
    for key in ("objects", "events"):
        if key not in doc or not isinstance(doc[key], list):
            raise MalformedDocument(f"missing required top-level list {key!r}")

    object_records = []
    for entry in doc["objects"]:
        try:
            oid = entry["id"]
            ot = entry["type"]
        except (TypeError, KeyError) as exc:
            raise MalformedDocument(f"object entry missing id/type: {entry!r}") from exc
        latest: dict[str, tuple[float, int, AttributeValue]] = {}
        for seq, att in enumerate(entry.get("attributes") or []):
            try:
                name = att["name"]
                value = _coerce_value(att["value"], f"object {oid!r}")
            except (TypeError, KeyError) as exc:
                raise MalformedDocument(f"bad attribute on object {oid!r}") from exc
            at = _parse_iso(att["time"]) if "time" in att else 0.0
            prev = latest.get(name)
            if prev is None or (at, seq) >= prev[:2]:
                latest[name] = (at, seq, value)
        object_records.append((oid, ot, {k: v for k, (_, _, v) in latest.items()}))

    event_records = []
    for entry in doc["events"]:
        try:
            eid = entry["id"]
            activity = entry["type"]
            ts = _parse_iso(entry["time"])
        except (TypeError, KeyError) as exc:
            raise MalformedDocument(f"event entry missing id/type/time: {entry!r}") from exc
        attrs = {}
        for att in entry.get("attributes") or []:
            try:
                attrs[att["name"]] = _coerce_value(att["value"], f"event {eid!r}")
            except (TypeError, KeyError) as exc:
                raise MalformedDocument(f"bad attribute on event {eid!r}") from exc
        oids = []
        for rel in entry.get("relationships") or []:
            try:
                oids.append(rel["objectId"])
            except (TypeError, KeyError) as exc:
                raise MalformedDocument(f"bad relationship on event {eid!r}") from exc
        event_records.append((eid, activity, ts, oids, attrs))

    return OcelLog.build(event_records, object_records)


def _value_type_name(v: AttributeValue) -> str:
    return "float" if isinstance(v, float) else "string"


def serialize_ocel_json(log: OcelLog) -> bytes:
    """Serialize back to OCEL 2.0 JSON (UTF-8, millisecond timestamps).

    Object attribute change times are not modeled, so object attributes are
    emitted with the epoch as their time.
    """
    otype_attrs: dict[str, dict[str, str]] = {ot: {} for ot in log.object_types}
    for o in log.objects:
        bucket = otype_attrs[log.otyp[o]]
        for name, value in log.ovmap[o].items():
            bucket.setdefault(name, _value_type_name(value))
    etype_attrs: dict[str, dict[str, str]] = {a: {} for a in log.activities}
    for e in log.events:
        bucket = etype_attrs[log.act[e]]
        for name, value in log.vmap[e].items():
            bucket.setdefault(name, _value_type_name(value))

    doc = {
        "objectTypes": [
            {"name": ot, "attributes": [{"name": n, "type": t} for n, t in sorted(attrs.items())]}
            for ot, attrs in sorted(otype_attrs.items())
        ],
        "eventTypes": [
            {"name": a, "attributes": [{"name": n, "type": t} for n, t in sorted(attrs.items())]}
            for a, attrs in sorted(etype_attrs.items())
        ],
        "objects": [
            {
                "id": o,
                "type": log.otyp[o],
                "attributes": [
                    {"name": n, "time": _EPOCH_ISO, "value": v}
                    for n, v in sorted(log.ovmap[o].items())
                ],
            }
            for o in log.objects
        ],
        "events": [
            {
                "id": e,
                "type": log.act[e],
                "time": format_iso(log.time[e]),
                "attributes": [
                    {"name": n, "value": v} for n, v in sorted(log.vmap[e].items())
                ],
                "relationships": [
                    {"objectId": o, "qualifier": ""} for o in sorted(log.omap[e])
                ],
            }
            for e in log.events
        ],
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
