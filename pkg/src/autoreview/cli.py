"""Command-line entrypoint wiring all pipeline stages.

Data goes to files or standard output; logs and per-stage summary lines
go to standard error as JSON. Exit codes: 0 success, 2 configuration
error, 3 data error, 4 remote-backend failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .core import Strategy
from .corpus import (
    dump_line,
    read_calls,
    read_decisions,
    read_records,
    write_calls,
    write_decisions,
    write_records,
)
from .correction import TrainingError, train_channel_model, train_detector
from .evaluation import ablate_n_alternatives, score_reviews
from .fields import standard_field_specs
from .isolation import isolate_field_utterances
from .pipeline import Models, correct_corpus, review_corpus, train_models
from .pseudolabel import PseudoLabelExample, derive_aed_labels, generate_pseudo_labels
from .remote import RemoteBackendError
from .simulator import ConfigurationError, SimConfig, generate_corpus

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_REMOTE = 4

STRATEGIES = {
    "verify": Strategy.DIRECT_VERIFICATION,
    "extract": Strategy.DIRECT_EXTRACTION,
    "hybrid": Strategy.HYBRID,
}


def _log(stage: str, **fields) -> None:
    payload = {"stage": stage, **fields}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


def _load_sim_config(args) -> SimConfig:
    overrides: dict = {}
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read simulate config: {err}")
    if args.seed is not None:
        overrides["seed"] = args.seed
    if "seed" not in overrides and args.seed is None:
        raise ConfigError("simulate requires --seed or a seed in the config file")
    try:
        return SimConfig(**overrides)
    except TypeError as err:
        raise ConfigError(f"bad simulate config: {err}")


def cmd_simulate(args) -> int:
    cfg = _load_sim_config(args)
    try:
        cfg.validate()
    except ConfigurationError as err:
        raise ConfigError(str(err))
    started = time.time()
    out = Path(args.out)
    corpus = generate_corpus(cfg)
    for split, (calls, records) in corpus.items():
        write_calls(out / f"{split}.calls.jsonl", calls)
        write_records(out / f"{split}.records.jsonl", records)
        _log(
            "simulate",
            split=split,
            calls=len(calls),
            records=len(records),
            seconds=round(time.time() - started, 2),
        )
    return EXIT_OK


def cmd_isolate(args) -> int:
    specs = standard_field_specs()
    if args.field not in specs:
        raise ConfigError(f"unknown field {args.field!r}; choose from {sorted(specs)}")
    calls = _read_calls(args.corpus)
    spec = specs[args.field]
    count = 0
    for call in calls:
        result = isolate_field_utterances(call, spec, triggers_from_ai_only=args.strict)
        print(
            dump_line(
                {
                    "call_id": call.call_id,
                    "field_id": result.field_id,
                    "utterance_indices": list(result.utterance_indices),
                }
            )
        )
        count += 1
    _log("isolate", field=args.field, calls=count)
    return EXIT_OK


def _read_calls(path: str):
    try:
        return read_calls(Path(path))
    except (OSError, KeyError, ValueError) as err:
        raise DataError(f"cannot read corpus {path}: {err}")


def _read_records(path: str):
    try:
        return read_records(Path(path))
    except (OSError, KeyError, ValueError) as err:
        raise DataError(f"cannot read records {path}: {err}")


def _example_to_dict(example: PseudoLabelExample) -> dict:
    return {
        "call_id": example.call_id,
        "field_id": example.field_id,
        "utterance_index": example.utterance_index,
        "alternatives": list(example.alternatives),
        "gold": example.gold,
        "chosen_index": example.chosen_index,
        "corrected_text": example.corrected_text,
    }


def _example_from_dict(data: dict) -> PseudoLabelExample:
    return PseudoLabelExample(
        call_id=data["call_id"],
        field_id=data["field_id"],
        utterance_index=data["utterance_index"],
        alternatives=tuple(data["alternatives"]),
        gold=data["gold"],
        chosen_index=data["chosen_index"],
        corrected_text=data["corrected_text"],
    )


def _remote_client(args):
    from .remote import RemoteModelClient

    endpoint = getattr(args, "remote_endpoint", None) or os.environ.get(
        "AUTOREVIEW_REMOTE_ENDPOINT"
    )
    if not endpoint:
        raise RemoteBackendError(
            "remote backend requires --remote-endpoint or AUTOREVIEW_REMOTE_ENDPOINT"
        )
    return RemoteModelClient(
        endpoint=endpoint,
        model=getattr(args, "remote_model", None)
        or os.environ.get("AUTOREVIEW_REMOTE_MODEL", "default"),
        auth_token=getattr(args, "remote_token", None)
        or os.environ.get("AUTOREVIEW_REMOTE_TOKEN"),
    )


def cmd_pseudo_label(args) -> int:
    started = time.time()
    calls = _read_calls(args.corpus)
    golds = _read_records(args.golds)
    specs = standard_field_specs()
    selection_backend = correction_backend = None
    if args.backend == "remote":
        from .remote import RemoteCorrectionBackend, RemoteSelectionBackend

        client = _remote_client(args)
        selection_backend = RemoteSelectionBackend(client)
        correction_backend = RemoteCorrectionBackend(client)
    examples, skipped = generate_pseudo_labels(
        calls,
        golds,
        specs,
        selection_backend=selection_backend,
        correction_backend=correction_backend,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(dump_line(_example_to_dict(example)) + "\n")
    _log(
        "pseudo-label",
        examples=len(examples),
        skipped=skipped,
        seconds=round(time.time() - started, 2),
    )
    return EXIT_OK


def _read_examples(path: str) -> list[PseudoLabelExample]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return [_example_from_dict(json.loads(line)) for line in lines if line.strip()]
    except (OSError, KeyError, ValueError) as err:
        raise DataError(f"cannot read pseudo-labels {path}: {err}")


def cmd_train_aec(args) -> int:
    examples = _read_examples(args.labels)
    try:
        channel = train_channel_model(examples)
    except TrainingError as err:
        raise DataError(str(err))
    models = Models.load_or_empty(Path(args.models))
    models.channel = channel
    models.save(Path(args.models))
    _log("train-aec", examples=len(examples), substitutions=len(channel.sub_counts))
    return EXIT_OK


def cmd_train_aed(args) -> int:
    examples = _read_examples(args.labels)
    aed = derive_aed_labels(examples, compare=args.compare)
    specs = standard_field_specs()
    try:
        detector = train_detector(aed, specs)
    except TrainingError as err:
        raise DataError(str(err))
    models = Models.load_or_empty(Path(args.models))
    models.detector = detector
    models.save(Path(args.models))
    positives = sum(1 for e in aed if e.label)
    _log("train-aed", examples=len(aed), positives=positives, threshold=detector.threshold)
    return EXIT_OK


def cmd_train(args) -> int:
    started = time.time()
    train_calls = _read_calls(args.train_calls)
    train_golds = _read_records(args.train_golds)
    val_calls = _read_calls(args.val_calls) if args.val_calls else []
    val_golds = _read_records(args.val_golds) if args.val_golds else []
    try:
        models, summary = train_models(train_calls, train_golds, val_calls, val_golds)
    except TrainingError as err:
        raise DataError(str(err))
    models.save(Path(args.models))
    _log(
        "train",
        pseudo_labels=summary.pseudo_labels,
        skipped=summary.skipped,
        aed_positive_rate=round(summary.aed_positive_rate, 4),
        seconds=round(time.time() - started, 2),
    )
    return EXIT_OK


def _load_models(path: str) -> Models:
    try:
        return Models.load(Path(path))
    except (OSError, ValueError, KeyError) as err:
        raise ConfigError(f"cannot load models from {path}: {err}")


def cmd_correct(args) -> int:
    started = time.time()
    calls = _read_calls(args.corpus)
    models = _load_models(args.models)
    try:
        models.require("channel")
    except ValueError as err:
        raise ConfigError(str(err))
    specs = standard_field_specs()
    corrected = correct_corpus(calls, specs, models.channel, workers=args.workers)
    write_calls(Path(args.out), corrected)
    _log(
        "correct",
        calls=len(corrected),
        workers=args.workers,
        seconds=round(time.time() - started, 2),
    )
    return EXIT_OK


def cmd_review(args) -> int:
    started = time.time()
    calls = _read_calls(args.corpus)
    records = _read_records(args.records)
    models = _load_models(args.models)
    strategy = STRATEGIES[args.strategy]
    needed = ["channel"] if args.strategy == "extract" else ["channel", "detector", "verifier"]
    try:
        models.require(*needed)
    except ValueError as err:
        raise ConfigError(str(err))
    specs = standard_field_specs()
    extraction_backend = None
    if args.backend == "remote":
        from .remote import RemoteExtractionBackend

        extraction_backend = RemoteExtractionBackend(_remote_client(args))
        # the shared rate limiter and in-flight cap live in one process
        args.workers = 1
    decisions = review_corpus(
        calls,
        records,
        specs,
        models,
        strategy,
        apply_correction=not args.no_correction,
        extraction_backend=extraction_backend,
        workers=args.workers,
    )
    write_decisions(Path(args.out), decisions)
    approved = sum(1 for d in decisions if d.verdict.value == "AutoApprove")
    _log(
        "review",
        strategy=args.strategy,
        decisions=len(decisions),
        approved=approved,
        flagged=len(decisions) - approved,
        workers=args.workers,
        seconds=round(time.time() - started, 2),
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        decisions = read_decisions(Path(args.decisions))
    except (OSError, KeyError, ValueError) as err:
        raise DataError(f"cannot read decisions {args.decisions}: {err}")
    golds = _read_records(args.golds)
    keyed = {(d.call_id, d.field_id) for d in decisions}
    relevant = [r for r in golds if (r.call_id, r.field_id) in keyed]
    try:
        report = score_reviews(decisions, relevant)
    except ValueError as err:
        raise DataError(str(err))
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if args.table:
        print(report.table())
    _log("eval", fields=len(report.per_field), f1=round(report.average.f1, 4))
    return EXIT_OK


def cmd_ablate(args) -> int:
    started = time.time()
    calls = _read_calls(args.corpus)
    golds = _read_records(args.golds)
    models = _load_models(args.models)
    try:
        models.require("channel")
    except ValueError as err:
        raise ConfigError(str(err))
    try:
        ns = sorted({int(n) for n in args.ns.split(",")})
    except ValueError:
        raise ConfigError(f"bad --ns list: {args.ns!r}")
    if any(n < 1 for n in ns):
        raise ConfigError("--ns values must be >= 1")
    specs = standard_field_specs()
    results = ablate_n_alternatives(calls, golds, ns, specs, models.channel)
    rows = [
        {"field_id": field_id, "n": n, "f1": f1}
        for (field_id, n), f1 in sorted(results.items())
    ]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dump_line(row) + "\n")
    _log("ablate", ns=ns, rows=len(rows), seconds=round(time.time() - started, 2))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    try:
        config = ServiceConfig.load(args.config)
    except (OSError, json.JSONDecodeError, TypeError) as err:
        raise ConfigError(f"cannot load service config: {err}")
    app = create_app(config)
    _log("serve", host=config.listen_host, port=config.listen_port)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    return EXIT_OK


def _add_remote_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--remote-endpoint", help="text-completion endpoint URL")
    parser.add_argument("--remote-model", help="remote model name")
    parser.add_argument("--remote-token", help="remote auth token")


def _add_workers_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes across calls (default: logical cores)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoreview",
        description="Post-call field review pipeline: simulate, correct, review, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic corpus with known gold values")
    p.add_argument("--config", help="JSON file with simulator settings")
    p.add_argument("--seed", type=int, help="master seed (required unless in config)")
    p.add_argument("--out", required=True, help="output directory for split files")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("isolate", help="stream isolation results for one field")
    p.add_argument("--corpus", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--strict", action="store_true", help="triggers arm only from AI-model turns")
    p.set_defaults(func=cmd_isolate)

    p = sub.add_parser("pseudo-label", help="build corrected-transcript training pairs")
    p.add_argument("--in", dest="corpus", required=True, help="calls JSONL")
    p.add_argument("--golds", required=True, help="field records JSONL with gold values")
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["builtin", "remote"], default="builtin")
    _add_remote_args(p)
    p.set_defaults(func=cmd_pseudo_label)

    p = sub.add_parser("train-aec", help="train the error-correction channel model")
    p.add_argument("--labels", required=True, help="pseudo-label JSONL")
    p.add_argument("--models", required=True, help="models directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_aec)

    p = sub.add_parser("train-aed", help="train the noise detector")
    p.add_argument("--labels", required=True, help="pseudo-label JSONL")
    p.add_argument("--models", required=True)
    p.add_argument("--compare", choices=["first", "chosen"], default="first")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_aed)

    p = sub.add_parser("train", help="train channel, detector, and verifier in one pass")
    p.add_argument("--train-calls", required=True)
    p.add_argument("--train-golds", required=True)
    p.add_argument("--val-calls")
    p.add_argument("--val-golds")
    p.add_argument("--models", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("correct", help="write a corrected copy of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    _add_workers_arg(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("review", help="produce auto-approve decisions")
    p.add_argument("--strategy", choices=sorted(STRATEGIES), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-correction", action="store_true", help="review the raw transcripts")
    p.add_argument("--backend", choices=["builtin", "remote"], default="builtin")
    _add_remote_args(p)
    _add_workers_arg(p)
    p.set_defaults(func=cmd_review)

    p = sub.add_parser("eval", help="score decisions against gold records")
    p.add_argument("--decisions", required=True)
    p.add_argument("--golds", required=True)
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    p.add_argument("--table", action="store_true", help="also print a plain-text table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="F1 per field while truncating the n-best lists")
    p.add_argument("--corpus", required=True)
    p.add_argument("--golds", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--ns", default="1,2,3,5,10", help="comma-separated list of n values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--config", help="service config JSON")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        # argparse exits 2 on usage errors, which matches the config-error code
        return EXIT_CONFIG if exit_err.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as err:
        _log("error", kind="config", message=str(err))
        return EXIT_CONFIG
    except DataError as err:
        _log("error", kind="data", message=str(err))
        return EXIT_DATA
    except RemoteBackendError as err:
        _log("error", kind="remote", message=str(err))
        return EXIT_REMOTE


if __name__ == "__main__":
    sys.exit(main())
