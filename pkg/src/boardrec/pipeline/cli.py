"""Recommend visually diverse boards from a user's tweets.

Every pipeline setting is a ``--flag`` mirroring a :class:`PipelineConfig`
field and may also come from ``--config FILE`` (JSON); flags win. On
failure the command exits non-zero and prints one JSON error record to
stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import typing
from dataclasses import fields
from pathlib import Path

import numpy as np

from ..ontology import compute_term_evidence, ontology_stats, prune_ontology
from ..textfeat import Featurizer
from .config import PipelineConfig
from .persistence import load_model, save_model
from .records import IngestError, ingest, read_ontology, write_ontology, write_records
from .runner import (
    BoardIndex, PipelineError, filter_active, load_dataset, load_dictionary,
    run_evaluate, run_recommend, run_sweep, run_train, sweep_table, user_profiles,
)
from .synth import SynthSpec, generate_synthetic, write_synthetic

log = logging.getLogger("boardrec")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _field_type(f):
    hints = typing.get_type_hints(PipelineConfig)
    t = hints[f.name]
    if t in (int, float, str):
        return t
    return str  # Optional[str]


def add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline settings")
    g.add_argument("--config", help="JSON config file; flags override its values")
    for f in fields(PipelineConfig):
        g.add_argument(_flag(f.name), dest=f.name, type=_field_type(f), default=None,
                       help=f"(default: {f.default})")


def config_from_args(args) -> PipelineConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(PipelineConfig)}
    if args.config:
        return PipelineConfig.from_file(args.config, **overrides)
    return PipelineConfig().updated(**overrides)


def _report_path(config: PipelineConfig) -> Path:
    if config.report_path:
        return Path(config.report_path)
    model = Path(config.model_path)
    return model.with_name(model.stem + ".report.json")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


# -- subcommands ------------------------------------------------------------------


def cmd_synth(args) -> int:
    spec = SynthSpec(**{f.name: getattr(args, f.name) for f in fields(SynthSpec)
                        if getattr(args, f.name) is not None})
    corpus = generate_synthetic(spec)
    write_synthetic(corpus, args.out, spec)
    print(json.dumps({"out": args.out, **corpus.dataset.counts()}))
    return 0


def cmd_ingest_check(args) -> int:
    config = config_from_args(args)
    ds = ingest(config.data_dir, config.ontology_path)
    active = filter_active(ds.users.values(), config.min_tweets)
    out = {**ds.counts(), "active_users": len(active), "warnings": dict(ds.warnings)}
    if ds.ontology is not None:
        out["ontology"] = ontology_stats(ds.ontology)
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_build_ontology(args) -> int:
    config = config_from_args(args)
    raw = read_ontology(args.raw)
    ds = ingest(config.data_dir, args.raw)
    ev = compute_term_evidence(raw, ds.boards.values(), ds.pins)
    pruned = prune_ontology(raw, ev, config.pin_threshold, config.board_divisor, config.popularity_weight)
    write_ontology(args.out, pruned)
    print(json.dumps({"raw": ontology_stats(raw), "pruned": ontology_stats(pruned)}, sort_keys=True))
    return 0


def cmd_profile(args) -> int:
    config = config_from_args(args)
    ds = load_dataset(config)
    users = list(ds.users.values())
    Y = user_profiles(users, ds)
    ids = ds.ontology.node_ids
    write_records(args.out, "profiles", (
        {"user_id": u.user_id, "labels": [ids[i] for i in np.flatnonzero(row)]} for u, row in zip(users, Y)
    ))
    print(json.dumps({"profiles": len(users), "out": args.out}))
    return 0


def cmd_featurize(args) -> int:
    config = config_from_args(args)
    ds = ingest(config.data_dir, config.ontology_path)
    users = filter_active(ds.users.values(), config.min_tweets)
    if not users:
        raise PipelineError("no active users to featurize")
    fz = Featurizer.fit([u.timeline for u in users], load_dictionary(config), config.feature_mode, config.dim)

    def rows():
        for u in users:
            x = fz.transform_one(u.timeline)
            nz = np.flatnonzero(x)
            yield {"user_id": u.user_id, "dim": len(x), "indices": nz.tolist(), "values": x[nz].tolist()}

    write_records(args.out, "features", rows())
    print(json.dumps({"users": len(users), "dim": fz.dimension, "out": args.out}))
    return 0


def cmd_train(args) -> int:
    config = config_from_args(args)
    bundle, report = run_train(config)
    save_model(bundle, config.model_path)
    _write_json(_report_path(config), report.as_dict())
    print(report.table())
    return 0


def cmd_evaluate(args) -> int:
    config = config_from_args(args)
    bundle = load_model(config.model_path)
    report = run_evaluate(config, bundle, split=args.split)
    _write_json(_report_path(config), report.as_dict())
    print(report.table())
    return 0


def cmd_recommend(args) -> int:
    config = config_from_args(args)
    bundle = load_model(config.model_path)
    ds = load_dataset(config)
    if args.user:
        if args.user not in ds.users:
            raise PipelineError(f"unknown user {args.user!r}")
        tweets = [t.text for t in ds.users[args.user].tweets]
    else:
        source = sys.stdin if args.tweets == "-" else open(args.tweets, encoding="utf-8")
        with source:
            tweets = [ln.strip() for ln in source if ln.strip()]
    rec = run_recommend(config, bundle, tweets, index=BoardIndex(ds))
    text = json.dumps(rec.as_dict(), indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    config = config_from_args(args)
    rows = run_sweep(config, _int_list(args.ks), _int_list(args.Ms))
    if args.out:
        write_records(args.out, "sweep", rows)
    print(sweep_table(rows))
    return 0


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boardrec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    for f in fields(SynthSpec):
        p.add_argument(_flag(f.name), dest=f.name, type=type(f.default), default=None, help=f"(default: {f.default})")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate record files and print counts")
    add_config_flags(p)
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("build-ontology", help="prune a raw ontology against board/pin term evidence")
    p.add_argument("--raw", required=True, help="raw ontology.jsonl")
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_build_ontology)

    p = sub.add_parser("profile", help="write each user's topic labels")
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("featurize", help="write sparse feature vectors of active users")
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a classifier and score it on the held-out split")
    add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model")
    p.add_argument("--split", choices=("test", "train", "all"), default="test")
    add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recommend", help="recommend diverse boards for a timeline")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tweets", help="text file with one tweet per line ('-' for stdin)")
    src.add_argument("--user", help="use the timeline of this user from the data directory")
    p.add_argument("--out", help="also write the JSON result here")
    add_config_flags(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("sweep", help="BR, LP and a RAkEL k x M grid")
    p.add_argument("--ks", default="3,5,7")
    p.add_argument("--Ms", default="10,20")
    p.add_argument("--out", help="write rows as a record file")
    add_config_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except (IngestError, PipelineError, ValueError, KeyError, OSError, FloatingPointError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc.args[0]) if exc.args else str(exc)}
        if isinstance(exc, IngestError):
            err.update(file=exc.path, line=exc.line)
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
