"""Deterministic synthetic purchase-to-pay log generator with planted anomalies.

Every order drives a chain of requisition, order, invoice and payment objects
linked through shared events. A configurable fraction of orders is planted
with one anomaly kind each; the generator returns the log together with the
ground-truth labels so detectors can be evaluated against a known answer.

Timestamps are drawn from seeded exponential gaps and quantized to
milliseconds, so serialization round-trips exactly. The generator is a pure
function of its config.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .ocel import OcelLog

ACT_CREATE_REQ = "Create Requisition"
ACT_APPROVE_REQ = "Approve Requisition"
ACT_CREATE_PO = "Create Purchase Order"
ACT_SUBMIT_PO = "Submit Purchase Order for Approval"
ACT_APPROVE_PO = "Approve Purchase Order"
ACT_RECEIVE_INVOICE = "Receive Invoice"
ACT_PAY_INVOICE = "Pay Invoice"
ACT_CHANGE_REQ = "Change Requisition"
ACT_CLOSE_PO = "Close Purchase Order"
ACT_REOPEN_PO = "(Re)Open Purchase Order"

_VENDORS = ("Acme Corp", "Globex", "Initech", "Umbrella")
_USERS = ("alice", "bob", "carol", "dave")

# 2024-01-01T00:00:00Z
DEFAULT_TIME_ORIGIN = 1704067200.0
DEFAULT_MEAN_GAP = 3600.0

REOPEN_GAP_FACTOR = 100.0


class AnomalyKind(Enum):
    MAVERICK_BUYING = "MaverickBuying"
    POST_MORTEM_PR_CHANGE = "PostMortemPRChange"
    DOUBLE_INVOICE = "DoubleInvoice"
    REOPEN_LONG_GAP = "ReopenLongGap"
    BLOCKED_INVOICE = "BlockedInvoice"


@dataclass(frozen=True)
class SynthConfig:
    n_orders: int
    anomaly_rates: dict[AnomalyKind, float] = field(default_factory=dict)
    seed: int = 0
    time_origin: float = DEFAULT_TIME_ORIGIN
    mean_gap: float = DEFAULT_MEAN_GAP

    def validate(self) -> None:
        if self.n_orders < 1:
            raise InvalidConfig("n_orders must be >= 1")
        if any(not 0.0 <= r <= 1.0 for r in self.anomaly_rates.values()):
            raise InvalidConfig("anomaly rates must be fractions in [0, 1]")
        if sum(self.anomaly_rates.values()) > 1.0:
            raise InvalidConfig("anomaly rates must sum to at most 1")
        if self.mean_gap <= 0:
            raise InvalidConfig("mean_gap must be positive")


@dataclass(frozen=True)
class SynthGroundTruth:
    """Planted-anomaly labels; an empty set marks a normal object."""

    labels: dict[str, frozenset[AnomalyKind]]

    def labeled(self, kind: AnomalyKind) -> frozenset[str]:
        return frozenset(o for o, kinds in self.labels.items() if kind in kinds)

    def to_csv_bytes(self) -> bytes:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["object_id", "anomaly_kinds"])
        for o in sorted(self.labels):
            w.writerow([o, ";".join(sorted(k.value for k in self.labels[o]))])
        return buf.getvalue().encode("utf-8")

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_csv_bytes())

    @staticmethod
    def from_csv(path: str | Path) -> "SynthGroundTruth":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        labels = {}
        for oid, kinds in rows[1:]:
            labels[oid] = frozenset(AnomalyKind(k) for k in kinds.split(";") if k)
        return SynthGroundTruth(labels=labels)


def _quantize(t: float) -> float:
    return round(t * 1000) / 1000.0


def _assign_kinds(cfg: SynthConfig, rng) -> dict[int, AnomalyKind]:
    """Disjoint per-order anomaly assignment; counts are rate * n rounded."""
    perm = rng.permutation(cfg.n_orders)
    assignment: dict[int, AnomalyKind] = {}
    pos = 0
    for kind in sorted(cfg.anomaly_rates, key=lambda k: k.value):
        count = round(cfg.anomaly_rates[kind] * cfg.n_orders)
        for idx in perm[pos : pos + count]:
            assignment[int(idx)] = kind
        pos += count
    return assignment


def generate_p2p(cfg: SynthConfig) -> tuple[OcelLog, SynthGroundTruth]:
    """Generate a purchase-to-pay log with planted order-level anomalies.

    The happy path per order is a 7-event chain (requisition creation and
    approval, order creation, submission and approval, invoicing, payment).
    Planted kinds deviate as follows:

    * MaverickBuying: invoicing and payment happen before any approval event
    * PostMortemPRChange: a requisition change (linked to the order) occurs
      after the approvals
    * DoubleInvoice: a second invoice+payment chain on the same order
    * ReopenLongGap: the order is closed and reopened after a gap at least
      100x the mean inter-event gap
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    assignment = _assign_kinds(cfg, rng)

    objects: list[tuple[str, str, dict]] = []
    raw_events: list[tuple[float, int, int, str, list[str], dict]] = []
    chain_start = cfg.time_origin

    for i in range(cfg.n_orders):
        chain_start += float(rng.exponential(cfg.mean_gap))
        kind = assignment.get(i)
        req, po = f"req-{i:05d}", f"po-{i:05d}"
        inv, pay = f"inv-{i:05d}", f"pay-{i:05d}"

        amount = round(float(rng.uniform(100.0, 10000.0)), 2)
        vendor = _VENDORS[int(rng.integers(len(_VENDORS)))]
        approver_req = _USERS[int(rng.integers(len(_USERS)))]
        approver_po = _USERS[int(rng.integers(len(_USERS)))]

        objects.append((req, "requisition", {"amount": amount}))
        objects.append((po, "order", {"amount": amount, "vendor": vendor}))
        objects.append((inv, "invoice", {"amount": amount}))
        objects.append((pay, "payment", {"amount": amount}))

        if kind is AnomalyKind.MAVERICK_BUYING:
            chain = [
                (ACT_CREATE_REQ, [req], {}),
                (ACT_CREATE_PO, [req, po], {}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver_po}),
                (ACT_APPROVE_REQ, [req], {"user": approver_req}),
            ]
        elif kind is AnomalyKind.POST_MORTEM_PR_CHANGE:
            chain = [
                (ACT_CREATE_REQ, [req], {}),
                (ACT_APPROVE_REQ, [req], {"user": approver_req}),
                (ACT_CREATE_PO, [req, po], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver_po}),
                (ACT_CHANGE_REQ, [req, po], {}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
            ]
        elif kind is AnomalyKind.DOUBLE_INVOICE:
            inv2, pay2 = f"inv-{i:05d}b", f"pay-{i:05d}b"
            objects.append((inv2, "invoice", {"amount": amount}))
            objects.append((pay2, "payment", {"amount": amount}))
            chain = [
                (ACT_CREATE_REQ, [req], {}),
                (ACT_APPROVE_REQ, [req], {"user": approver_req}),
                (ACT_CREATE_PO, [req, po], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver_po}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
                (ACT_RECEIVE_INVOICE, [po, inv2], {}),
                (ACT_PAY_INVOICE, [inv2, pay2], {}),
            ]
        elif kind is AnomalyKind.REOPEN_LONG_GAP:
            chain = [
                (ACT_CREATE_REQ, [req], {}),
                (ACT_APPROVE_REQ, [req], {"user": approver_req}),
                (ACT_CREATE_PO, [req, po], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver_po}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
                (ACT_CLOSE_PO, [po], {}),
                (ACT_REOPEN_PO, [po], {}),
            ]
        else:
            chain = [
                (ACT_CREATE_REQ, [req], {}),
                (ACT_APPROVE_REQ, [req], {"user": approver_req}),
                (ACT_CREATE_PO, [req, po], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver_po}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
            ]

        t = chain_start
        for seq, (activity, oids, attrs) in enumerate(chain):
            if seq:
                gap = float(rng.exponential(cfg.mean_gap))
                if activity == ACT_REOPEN_PO:
                    gap += REOPEN_GAP_FACTOR * cfg.mean_gap
                t += gap
            raw_events.append((_quantize(t), i, seq, activity, oids, attrs))

    raw_events.sort(key=lambda rec: (rec[0], rec[1], rec[2]))
    event_records = [
        (f"e{n:06d}", activity, t, oids, attrs)
        for n, (t, _, _, activity, oids, attrs) in enumerate(raw_events)
    ]
    log = OcelLog.build(event_records, objects)

    labels = {
        f"po-{i:05d}": (frozenset([assignment[i]]) if i in assignment else frozenset())
        for i in range(cfg.n_orders)
    }
    return log, SynthGroundTruth(labels=labels)


def generate_blocked_invoices(cfg: SynthConfig) -> tuple[OcelLog, SynthGroundTruth]:
    """Variant for studying feature propagation: some orders skip approval,
    and exactly their invoices are labeled blocked.

    Invoice lifecycles are identically distributed for blocked and normal
    invoices, so the label is invisible from invoice features alone; the
    signal lives entirely in the related order's features (missing approval
    activities).
    """
    cfg.validate()
    rate = cfg.anomaly_rates.get(AnomalyKind.BLOCKED_INVOICE, 0.0)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(cfg.n_orders)
    blocked = {int(i) for i in perm[: round(rate * cfg.n_orders)]}

    objects: list[tuple[str, str, dict]] = []
    raw_events: list[tuple[float, int, int, str, list[str], dict]] = []
    chain_start = cfg.time_origin
    labels: dict[str, frozenset[AnomalyKind]] = {}

    for i in range(cfg.n_orders):
        chain_start += float(rng.exponential(cfg.mean_gap))
        po, inv, pay = f"po-{i:05d}", f"inv-{i:05d}", f"pay-{i:05d}"
        amount = round(float(rng.uniform(100.0, 10000.0)), 2)
        approver = _USERS[int(rng.integers(len(_USERS)))]
        objects.append((po, "order", {"amount": amount}))
        objects.append((inv, "invoice", {"amount": amount}))
        objects.append((pay, "payment", {"amount": amount}))

        if i in blocked:
            chain = [
                (ACT_CREATE_PO, [po], {}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
            ]
        else:
            chain = [
                (ACT_CREATE_PO, [po], {}),
                (ACT_SUBMIT_PO, [po], {}),
                (ACT_APPROVE_PO, [po], {"user": approver}),
                (ACT_RECEIVE_INVOICE, [po, inv], {}),
                (ACT_PAY_INVOICE, [inv, pay], {}),
            ]
        # Invoice-local timing is drawn identically for both arms so invoice
        # features carry no label signal.
        invoice_gaps = [float(rng.exponential(cfg.mean_gap)) for _ in range(2)]
        t = chain_start
        for seq, (activity, oids, attrs) in enumerate(chain):
            if seq:
                if activity == ACT_RECEIVE_INVOICE:
                    t += invoice_gaps[0]
                elif activity == ACT_PAY_INVOICE:
                    t += invoice_gaps[1]
                else:
                    t += float(rng.exponential(cfg.mean_gap))
            raw_events.append((_quantize(t), i, seq, activity, oids, attrs))
        labels[inv] = frozenset([AnomalyKind.BLOCKED_INVOICE]) if i in blocked else frozenset()

    raw_events.sort(key=lambda rec: (rec[0], rec[1], rec[2]))
    event_records = [
        (f"e{n:06d}", activity, t, oids, attrs)
        for n, (t, _, _, activity, oids, attrs) in enumerate(raw_events)
    ]
    return OcelLog.build(event_records, objects), SynthGroundTruth(labels=labels)
