"""Command-line surface.

Subcommands: ``generate`` (synthetic P2P logs), ``features`` (feature matrix
CSV), ``detect`` (object scores, ranks and lifecycle texts for the most
anomalous objects), ``aggregate`` (feature-score report) and ``abstract``
(feature summary plus oracle verdicts).

Every run writes a ``run.json`` manifest with the command, all parameters,
the seed and the input digest; re-running with the manifest's parameters
reproduces the outputs byte-identically. Outputs are written atomically
(temp file + rename) and inputs are never modified. Exit codes: 0 success,
1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .aggregate import anomalous_feature_report
from .detect import bottom_k, rank_csv_bytes, score_csv_bytes
from .errors import OcadError
from .features import ExtractionConfig, extract_features, feature_csv_bytes, propagate_features
from .ocel import OcelLog, parse_ocel_json, serialize_ocel_json
from .oracle import (
    abstract_lifecycle,
    llm_oracle,
    render_feature_table,
    statistical_oracle,
    summarize_features,
)
from .pipeline import PipelineParams, build_matrix, detect_objects
from .prompts import FEATURE_TABLE_PREAMBLE
from .synthgen import AnomalyKind, SynthConfig, generate_blocked_invoices, generate_p2p

LLM_KEY_ENV = "OCAD_LLM_API_KEY"


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_manifest(out: Path, command: str, params: dict, input_digest: str, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "params": params,
        "input_sha256": input_digest,
        "outputs": sorted(outputs),
        "version": __version__,
    }
    _write_atomic(out / "run.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())


def _load_log(path: str) -> tuple[OcelLog, str]:
    data = Path(path).read_bytes()
    return parse_ocel_json(data), _digest(data)


def _pipeline_params(args) -> PipelineParams:
    detector = args.detector
    if detector is None:
        # The effective default pairs the detectors with the features they
        # work best on: LOF over the FastMap embedding, otherwise iForest.
        detector = "lof" if args.reducer == "fastmap" else "iforest"
    return PipelineParams(
        object_type=args.object_type,
        detector=detector,
        reducer=args.reducer,
        propagate_from=args.propagate_from,
        agg=args.agg,
        min_variance=args.min_variance,
        reduce_k=args.reduce_k,
        n_trees=args.n_trees,
        subsample=args.subsample,
        lof_k=args.lof_k,
        seed=args.seed,
        include_cobirth_codeath=args.cobirth_codeath,
    )


def _params_dict(params: PipelineParams, extra: dict | None = None) -> dict:
    d = dataclasses.asdict(params)
    if extra:
        d.update(extra)
    return d


# ------------------------------------------------------------- subcommands

def _cmd_generate(args) -> int:
    rates = {}
    for kind, value in (
        (AnomalyKind.MAVERICK_BUYING, args.maverick_rate),
        (AnomalyKind.POST_MORTEM_PR_CHANGE, args.postmortem_rate),
        (AnomalyKind.DOUBLE_INVOICE, args.double_invoice_rate),
        (AnomalyKind.REOPEN_LONG_GAP, args.reopen_rate),
        (AnomalyKind.BLOCKED_INVOICE, args.blocked_rate),
    ):
        if value > 0:
            rates[kind] = value
    cfg = SynthConfig(n_orders=args.n_orders, anomaly_rates=rates, seed=args.seed, mean_gap=args.mean_gap)
    generator = generate_blocked_invoices if args.variant == "blocked-invoices" else generate_p2p
    log, truth = generator(cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "log.json", serialize_ocel_json(log))
    _write_atomic(out / "ground_truth.csv", truth.to_csv_bytes())
    params = {
        "variant": args.variant,
        "n_orders": args.n_orders,
        "rates": {k.value: v for k, v in rates.items()},
        "seed": args.seed,
        "mean_gap": args.mean_gap,
    }
    _write_manifest(out, "generate", params, _digest(json.dumps(params, sort_keys=True).encode()),
                    ["log.json", "ground_truth.csv"])
    print(f"wrote {out / 'log.json'} ({len(log.events)} events, {len(log.objects)} objects)")
    return 0


def _cmd_features(args) -> int:
    log, digest = _load_log(args.log)
    params = _pipeline_params(args)
    Fn = build_matrix(log, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "features.csv", feature_csv_bytes(Fn))
    _write_manifest(out, "features", _params_dict(params, {"log": args.log}), digest, ["features.csv"])
    print(f"wrote {out / 'features.csv'} ({len(Fn.row_ids)} rows, {len(Fn.columns)} columns)")
    return 0


def _cmd_detect(args) -> int:
    log, digest = _load_log(args.log)
    params = _pipeline_params(args)
    _, scores, ranks = detect_objects(log, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "scores.csv", score_csv_bytes(scores))
    _write_atomic(out / "ranks.csv", rank_csv_bytes(ranks))
    outputs = ["scores.csv", "ranks.csv"]
    lifecycle_dir = out / "lifecycles"
    lifecycle_dir.mkdir(exist_ok=True)
    for r, o in enumerate(bottom_k(ranks, min(args.top_k, len(ranks.object_ids)))):
        name = f"rank{r:03d}_{o}.txt"
        _write_atomic(lifecycle_dir / name, abstract_lifecycle(log, o, max_events=args.max_events).encode())
        outputs.append(f"lifecycles/{name}")
    _write_manifest(out, "detect",
                    _params_dict(params, {"log": args.log, "top_k": args.top_k, "max_events": args.max_events}),
                    digest, outputs)
    print(f"wrote {out / 'ranks.csv'}; lifecycle texts for bottom {args.top_k} objects")
    return 0


def _cmd_aggregate(args) -> int:
    log, digest = _load_log(args.log)
    params = _pipeline_params(args)
    cfg = ExtractionConfig(include_cobirth_codeath=params.include_cobirth_codeath)
    F = extract_features(log, params.object_type, cfg)
    if params.propagate_from:
        F = propagate_features(log, F, extract_features(log, params.propagate_from, cfg), agg=params.agg)
    _, scores, _ = detect_objects(log, params)
    table = anomalous_feature_report(log, F, scores, top_n=args.top_n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "feature_scores.csv", table.to_csv_bytes())
    _write_atomic(out / "feature_scores.txt", table.to_text().encode())
    _write_manifest(out, "aggregate", _params_dict(params, {"log": args.log, "top_n": args.top_n}),
                    digest, ["feature_scores.csv", "feature_scores.txt"])
    print(f"wrote {out / 'feature_scores.csv'} ({len(table.rows)} rows)")
    return 0


def _cmd_abstract(args) -> int:
    log, digest = _load_log(args.log)
    params = _pipeline_params(args)
    Fn = build_matrix(log, params)
    summary = summarize_features(Fn)
    text = summary.render()
    if args.raw_table:
        text += "\n" + render_feature_table(Fn, max_rows=args.max_rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "feature_summary.txt", text.encode())
    outputs = ["feature_summary.txt"]

    if args.oracle == "statistical":
        verdicts = statistical_oracle(summary, whisker=args.whisker)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature", "fence_lo", "fence_hi", "rationale"])
        for v in verdicts:
            w.writerow([v.feature_name, repr(v.fence_lo), repr(v.fence_hi), v.rationale])
        _write_atomic(out / "oracle_verdicts.csv", buf.getvalue().encode())
        outputs.append("oracle_verdicts.csv")
    else:
        reply = llm_oracle(
            endpoint=args.llm_endpoint,
            api_key=os.environ.get(LLM_KEY_ENV, ""),
            prompt=text,
            timeout=args.llm_timeout,
            model=args.llm_model,
            preamble=FEATURE_TABLE_PREAMBLE,
        )
        _write_atomic(out / "llm_reply.txt", reply.encode())
        outputs.append("llm_reply.txt")

    _write_manifest(out, "abstract",
                    _params_dict(params, {"log": args.log, "oracle": args.oracle, "whisker": args.whisker,
                                          "raw_table": args.raw_table}),
                    digest, outputs)
    print(f"wrote {out / 'feature_summary.txt'}")
    return 0


# ------------------------------------------------------------------ parser

def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log", required=True, help="input OCEL 2.0 JSON file")
    p.add_argument("--object-type", required=True, help="object type to analyze")
    p.add_argument("--detector", choices=["iforest", "lof"], default=None,
                   help="default: iforest, or lof when --reducer fastmap")
    p.add_argument("--reducer", choices=["none", "pca", "fastmap"], default="none")
    p.add_argument("--propagate-from", default=None, help="neighbor object type whose features are propagated")
    p.add_argument("--agg", choices=["mean", "median", "min", "max", "sum"], default="mean")
    p.add_argument("--min-variance", type=float, default=0.0)
    p.add_argument("--reduce-k", type=int, default=8)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--subsample", type=int, default=256)
    p.add_argument("--lof-k", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cobirth-codeath", action="store_true", help="include co-birth/co-death count features")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocad", description="Anomaly detection for object-centric event logs")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic P2P log with planted anomalies")
    g.add_argument("--variant", choices=["p2p", "blocked-invoices"], default="p2p")
    g.add_argument("--n-orders", type=int, required=True)
    g.add_argument("--maverick-rate", type=float, default=0.0)
    g.add_argument("--postmortem-rate", type=float, default=0.0)
    g.add_argument("--double-invoice-rate", type=float, default=0.0)
    g.add_argument("--reopen-rate", type=float, default=0.0)
    g.add_argument("--blocked-rate", type=float, default=0.0)
    g.add_argument("--mean-gap", type=float, default=3600.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    f = sub.add_parser("features", help="extract, propagate, normalize and filter features")
    _add_pipeline_flags(f)
    f.set_defaults(func=_cmd_features)

    d = sub.add_parser("detect", help="score and rank objects; write lifecycle texts for the worst")
    _add_pipeline_flags(d)
    d.add_argument("--top-k", type=int, default=10)
    d.add_argument("--max-events", type=int, default=50)
    d.set_defaults(func=_cmd_detect)

    a = sub.add_parser("aggregate", help="aggregate object scores into a feature-score report")
    _add_pipeline_flags(a)
    a.add_argument("--top-n", type=int, default=20)
    a.set_defaults(func=_cmd_aggregate)

    b = sub.add_parser("abstract", help="feature summary text and oracle verdicts")
    _add_pipeline_flags(b)
    b.add_argument("--oracle", choices=["statistical", "llm"], default="statistical")
    b.add_argument("--whisker", type=float, default=1.5)
    b.add_argument("--raw-table", action="store_true", help="append the raw feature table to the summary")
    b.add_argument("--max-rows", type=int, default=200)
    b.add_argument("--llm-endpoint", default="http://localhost:8000/v1/chat/completions")
    b.add_argument("--llm-model", default="gpt-4-turbo")
    b.add_argument("--llm-timeout", type=float, default=60.0)
    b.set_defaults(func=_cmd_abstract)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OcadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
