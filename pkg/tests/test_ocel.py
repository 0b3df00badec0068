"""Log model: parsing, serialization, total order and the per-object derivations."""

import json

import pytest

from ocad.errors import (
    DanglingReference,
    DuplicateId,
    MalformedDocument,
    UnknownObject,
)
from ocad.ocel import OcelLog, parse_ocel_json, serialize_ocel_json

from conftest import build_log, ocel_doc, random_log
from oracles import NaiveDerivations


def _event(eid, etype, time, objs=(), attrs=()):
    return {
        "id": eid,
        "type": etype,
        "time": time,
        "attributes": [{"name": n, "value": v} for n, v in attrs],
        "relationships": [{"objectId": o, "qualifier": "involves"} for o in objs],
    }


def _object(oid, otype, attrs=()):
    return {
        "id": oid,
        "type": otype,
        "attributes": [{"name": n, "time": "1970-01-01T00:00:00Z", "value": v} for n, v in attrs],
    }


# ---------------------------------------------------------------- parsing

def test_parse_empty_document():
    log = parse_ocel_json(ocel_doc())
    assert log.events == ()
    assert log.objects == ()


def test_parse_minimal_log():
    doc = ocel_doc(
        events=[_event("e1", "A", "2024-05-01T12:00:00Z", objs=["o1"])],
        objects=[_object("o1", "order")],
    )
    log = parse_ocel_json(doc)
    assert log.act["e1"] == "A"
    assert log.omap["e1"] == frozenset({"o1"})
    assert log.otyp["o1"] == "order"


def test_parse_order_breaks_time_ties_lexicographically():
    # two of the five events share a timestamp; the raw-record sort is the oracle
    records = [
        ("e5", "2024-01-01T00:00:02Z"),
        ("e1", "2024-01-01T00:00:05Z"),
        ("e4", "2024-01-01T00:00:02Z"),
        ("e2", "2024-01-01T00:00:01Z"),
        ("e3", "2024-01-01T00:00:09Z"),
    ]
    doc = ocel_doc(events=[_event(e, "A", t) for e, t in records], objects=[])
    log = parse_ocel_json(doc)
    expected = [e for e, _ in sorted(records, key=lambda r: (r[1], r[0]))]
    assert list(log.events) == expected
    assert log.events.index("e4") + 1 == log.events.index("e5")


def test_parse_rejects_bad_json():
    with pytest.raises(MalformedDocument):
        parse_ocel_json(b"{not json")


def test_parse_rejects_missing_required_keys():
    with pytest.raises(MalformedDocument):
        parse_ocel_json(json.dumps({"objects": []}).encode())


def test_parse_rejects_dangling_reference():
    doc = ocel_doc(events=[_event("e1", "A", "2024-01-01T00:00:00Z", objs=["ghost"])])
    with pytest.raises(DanglingReference):
        parse_ocel_json(doc)


def test_parse_rejects_duplicate_event_id():
    doc = ocel_doc(
        events=[
            _event("e1", "A", "2024-01-01T00:00:00Z"),
            _event("e1", "B", "2024-01-01T00:00:01Z"),
        ]
    )
    with pytest.raises(DuplicateId):
        parse_ocel_json(doc)


def test_parse_rejects_duplicate_object_id():
    doc = ocel_doc(objects=[_object("o1", "a"), _object("o1", "b")])
    with pytest.raises(DuplicateId):
        parse_ocel_json(doc)


def test_parse_rejects_boolean_attribute():
    doc = ocel_doc(objects=[{"id": "o1", "type": "a", "attributes": [{"name": "x", "time": "1970-01-01T00:00:00Z", "value": True}]}])
    with pytest.raises(MalformedDocument):
        parse_ocel_json(doc)


def test_parse_keeps_latest_object_attribute_value():
    doc = ocel_doc(
        objects=[
            {
                "id": "o1",
                "type": "a",
                "attributes": [
                    {"name": "x", "time": "2024-01-02T00:00:00Z", "value": 2.0},
                    {"name": "x", "time": "2024-01-01T00:00:00Z", "value": 1.0},
                ],
            }
        ]
    )
    assert parse_ocel_json(doc).ovmap["o1"]["x"] == 2.0


def test_parse_accepts_offset_and_naive_timestamps():
    doc = ocel_doc(
        events=[
            _event("e1", "A", "2024-01-01T01:00:00+01:00"),
            _event("e2", "A", "2024-01-01T00:00:00"),
        ]
    )
    log = parse_ocel_json(doc)
    assert log.time["e1"] == log.time["e2"]


def test_event_attributes_parsed_into_vmap():
    doc = ocel_doc(events=[_event("e1", "A", "2024-01-01T00:00:00Z", attrs=[("user", "alice"), ("n", 3)])])
    log = parse_ocel_json(doc)
    assert log.vmap["e1"] == {"user": "alice", "n": 3.0}


# ----------------------------------------------------------- derivations

def test_lifecycle_empty_for_unreferenced_object():
    log = build_log([("e1", "A", 1.0, [])], [("o1", "t")])
    assert log.lifecycle("o1") == ()


def test_lifecycle_direct():
    log = build_log(
        [("e1", "A", 1.0, ["o1"]), ("e2", "B", 2.0, []), ("e3", "C", 3.0, ["o1"])],
        [("o1", "t")],
    )
    assert log.lifecycle("o1") == ("e1", "e3")


def test_lifecycle_unknown_object():
    log = build_log([], [])
    with pytest.raises(UnknownObject):
        log.lifecycle("nope")


def test_lifecycle_matches_membership_scan_on_synthetic_log():
    log = random_log(seed=3, n_events=20)
    naive = NaiveDerivations(log)
    for o in log.objects:
        assert list(log.lifecycle(o)) == naive.lifecycle(o)


def test_object_graphs_single_event():
    log = build_log([("e1", "A", 1.0, ["o1"])], [("o1", "t")])
    assert log.object_graphs("o1") == (frozenset(), frozenset())


def test_object_graphs_three_chain():
    log = build_log(
        [("e1", "A", 1.0, ["o1"]), ("e2", "B", 2.0, ["o1"]), ("e3", "C", 3.0, ["o1"])],
        [("o1", "t")],
    )
    dfg, efg = log.object_graphs("o1")
    assert dfg == {("e1", "e2"), ("e2", "e3")}
    assert efg == dfg | {("e1", "e3")}


def test_object_graphs_match_pairwise_enumeration():
    log = build_log(
        [(f"e{i}", "A", float(i), ["o1"] if i % 3 else ["o1", "o2"]) for i in range(8)],
        [("o1", "t"), ("o2", "t")],
    )
    naive = NaiveDerivations(log)
    for o in ("o1", "o2"):
        dfg, efg = log.object_graphs(o)
        assert set(dfg) == naive.dfg(o)
        assert set(efg) == naive.efg(o)
        n = len(log.lifecycle(o))
        assert len(efg) == n * (n - 1) // 2
        assert len(dfg) == max(n - 1, 0)


def test_interaction_sets_no_shared_events():
    log = build_log(
        [("e1", "A", 1.0, ["o1"]), ("e2", "A", 2.0, ["o2"])],
        [("o1", "t"), ("o2", "t")],
    )
    s = log.interaction_sets("o1", "t")
    assert s.interact == s.creation == s.continuation == s.cobirth == s.codeath == frozenset()


def test_interaction_sets_single_shared_event():
    # a single shared event forces equal start and end times, so the partner
    # lands in cobirth, codeath and (end(o) time == start(o') time) continuation
    log = build_log([("e1", "A", 5.0, ["o1", "o2"])], [("o1", "t"), ("o2", "t")])
    s = log.interaction_sets("o1", "t")
    assert s.interact == {"o2"}
    assert s.cobirth == {"o2"}
    assert s.codeath == {"o2"}
    assert s.creation == frozenset()
    assert s.continuation == {"o2"}


def test_continuation_is_timestamp_equality_not_event_identity():
    # o1 ends at t=7, o2 starts at t=7 in a different event: still continuation
    log = build_log(
        [("e1", "A", 5.0, ["o1"]), ("e2", "B", 7.0, ["o1"]), ("e3", "C", 7.0, ["o2"])],
        [("o1", "t"), ("o2", "t")],
    )
    log2 = build_log(
        [("e1", "A", 5.0, ["o1"]), ("e2", "B", 7.0, ["o1", "o2"]), ("e3", "C", 7.5, ["o2"])],
        [("o1", "t"), ("o2", "t")],
    )
    assert log.interaction_sets("o1", "t").continuation == frozenset()  # no shared event
    assert log2.interaction_sets("o1", "t").continuation == {"o2"}


def test_interaction_sets_match_brute_force_on_p2p(p2p_small):
    log, _ = p2p_small
    naive = NaiveDerivations(log)
    for o in log.objects_of_type("order"):
        for ot in log.object_types:
            s = log.interaction_sets(o, ot)
            interact, creation, continuation, cobirth, codeath = naive.interaction_sets(o, ot)
            assert s.interact == interact
            assert s.creation == creation
            assert s.continuation == continuation
            assert s.cobirth == cobirth
            assert s.codeath == codeath


def test_interaction_subsets_invariant(p2p_small):
    log, _ = p2p_small
    for o in log.objects:
        for ot in log.object_types:
            s = log.interaction_sets(o, ot)
            assert s.creation | s.continuation | s.cobirth | s.codeath <= s.interact
            assert not (s.cobirth & s.creation)


def test_interact_symmetry():
    log = random_log(seed=9)
    for o in log.objects:
        for p in log.objects:
            if o == p:
                continue
            assert (p in log.interaction_sets(o, log.otyp[p]).interact) == (
                o in log.interaction_sets(p, log.otyp[o]).interact
            )


def test_common_attributes_intersection():
    log = build_log(
        [],
        [
            ("o1", "order", {"amount": 1.0}),
            ("o2", "order", {"amount": 2.0, "vendor": "acme"}),
        ],
    )
    assert log.common_attributes("order") == {"amount"}


def test_common_attributes_single_object():
    log = build_log([], [("o1", "t", {"a": 1.0, "b": "x"})])
    assert log.common_attributes("t") == {"a", "b"}


def test_common_attributes_empty_type_is_empty_set():
    log = build_log([], [])
    assert log.common_attributes("ghost") == frozenset()


def test_common_attributes_match_fold_intersection():
    log = random_log(seed=21, n_objects=50, n_events=40)
    naive = NaiveDerivations(log)
    for ot in log.object_types:
        assert log.common_attributes(ot) == naive.common_attributes(ot)


# -------------------------------------------------------------- invariants

def test_total_order_is_strict():
    log = random_log(seed=5)
    positions = {e: i for i, e in enumerate(log.events)}
    assert len(positions) == len(log.events)
    for e1 in log.events:
        for e2 in log.events:
            if e1 == e2:
                continue
            key1 = (log.time[e1], e1)
            key2 = (log.time[e2], e2)
            assert (key1 < key2) == (positions[e1] < positions[e2])


def test_lifecycle_sorted_start_end():
    log = random_log(seed=6)
    positions = {e: i for i, e in enumerate(log.events)}
    for o in log.objects:
        lc = log.lifecycle(o)
        assert list(lc) == sorted(lc, key=positions.get)
        if lc:
            assert log.start_event(o) == min(lc, key=positions.get)
            assert log.end_event(o) == max(lc, key=positions.get)


def test_dfg_transitive_closure_is_efg():
    log = random_log(seed=7)
    for o in log.objects:
        dfg, efg = log.object_graphs(o)
        assert dfg <= efg
        closure = set(dfg)
        changed = True
        while changed:
            changed = False
            for (a, b) in list(closure):
                for (c, d) in list(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        assert closure == set(efg)


def test_round_trip_identity(p2p_small):
    log, _ = p2p_small
    assert parse_ocel_json(serialize_ocel_json(log)) == log


def test_round_trip_random_logs():
    for seed in range(4):
        log = random_log(seed=seed)
        again = parse_ocel_json(serialize_ocel_json(log))
        assert again == log
        assert serialize_ocel_json(again) == serialize_ocel_json(log)


def test_build_permits_empty_omap():
    log = build_log([("e1", "A", 1.0, [])], [("o1", "t")])
    assert log.omap["e1"] == frozenset()
    assert log.lifecycle("o1") == ()
