#!/usr/bin/env python3
"""Why feature propagation matters: the blocked-invoice scenario.

Invoices of orders that skipped approval are labeled blocked, but their own
lifecycles look perfectly normal. LOF over invoice features alone therefore
ranks them at chance level; propagating the related order's features (mean
aggregation) makes them stand out. The script prints bottom-decile recall
with and without propagation over several seeds.
"""

import argparse

import numpy as np

from ocad.pipeline import PipelineParams, detect_objects
from ocad.synthgen import AnomalyKind, SynthConfig, generate_blocked_invoices


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-orders", type=int, default=400)
    ap.add_argument("--blocked-rate", type=float, default=0.04)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    plain, propagated = [], []
    for seed in range(args.seeds):
        cfg = SynthConfig(
            n_orders=args.n_orders,
            anomaly_rates={AnomalyKind.BLOCKED_INVOICE: args.blocked_rate},
            seed=seed,
        )
        log, truth = generate_blocked_invoices(cfg)
        labeled = truth.labeled(AnomalyKind.BLOCKED_INVOICE)
        decile = max(1, int(0.10 * len(log.objects_of_type("invoice"))))
        row = []
        for source in (None, "order"):
            params = PipelineParams(
                object_type="invoice", detector="lof", propagate_from=source, agg="mean", seed=seed
            )
            _, _, ranks = detect_objects(log, params)
            position = dict(zip(ranks.object_ids, ranks.ranks))
            row.append(sum(1 for o in labeled if position[o] < decile) / len(labeled))
        plain.append(row[0])
        propagated.append(row[1])
        print(f"seed {seed}: invoice features only {row[0]:.2f}   + propagated order features {row[1]:.2f}")

    print(f"\nmean bottom-decile recall: {np.mean(plain):.2f} without propagation, "
          f"{np.mean(propagated):.2f} with propagation")


if __name__ == "__main__":
    main()
