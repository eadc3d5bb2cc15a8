"""Newline-delimited JSON record files.

Every file starts with a header line ``{"schema": "boardrec.<kind>", "version": 1}``
followed by one JSON object per line:

users.jsonl     {"user_id", "board_ids": [..], "tweets": [{"text", "timestamp"}]}
boards.jsonl    {"board_id", "owner_id", "title", "description", "popularity", "pin_ids": [..]}
pins.jsonl      {"pin_id", "board_id", "description", "embedding": [floats] | null}
ontology.jsonl  {"node_id", "name", "parents": [parent names]}
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

from ..data_model import Board, Pin, Tweet, UserRecord
from ..ontology import OntologyError, TopicOntology, load_raw_ontology

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FILES = {"users": "users.jsonl", "boards": "boards.jsonl", "pins": "pins.jsonl", "ontology": "ontology.jsonl"}


class IngestError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


# -- record <-> object ------------------------------------------------------


def _str(rec: dict, key: str, required: bool = True) -> str:
    if key not in rec:
        if required:
            raise KeyError(f"missing field {key!r}")
        return ""
    val = rec[key]
    if not isinstance(val, str):
        raise TypeError(f"field {key!r} must be a string")
    return val


def _str_list(rec: dict, key: str) -> tuple[str, ...]:
    val = rec.get(key, [])
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise TypeError(f"field {key!r} must be a list of strings")
    return tuple(val)


def user_from_record(rec: dict) -> UserRecord:
    uid = _str(rec, "user_id")
    tweets = []
    for t in rec.get("tweets", []):
        if isinstance(t, str):
            t = {"text": t}
        tweets.append(Tweet(uid, _str(t, "text"), int(t.get("timestamp", 0))))
    return UserRecord(uid, tuple(tweets), _str_list(rec, "board_ids"))


def user_to_record(user: UserRecord) -> dict:
    return {
        "user_id": user.user_id,
        "board_ids": list(user.board_ids),
        "tweets": [{"text": t.text, "timestamp": t.timestamp} for t in user.tweets],
    }


def board_from_record(rec: dict) -> Board:
    pop = rec.get("popularity", 0)
    if not isinstance(pop, int) or isinstance(pop, bool):
        raise TypeError("field 'popularity' must be an integer")
    return Board(
        _str(rec, "board_id"),
        _str(rec, "owner_id"),
        _str(rec, "title", required=False),
        _str(rec, "description", required=False),
        pop,
        _str_list(rec, "pin_ids"),
    )


def board_to_record(board: Board) -> dict:
    return {
        "board_id": board.board_id,
        "owner_id": board.owner_id,
        "title": board.title,
        "description": board.description,
        "popularity": board.popularity,
        "pin_ids": list(board.pin_ids),
    }


def pin_from_record(rec: dict) -> Pin:
    emb = rec.get("embedding")
    if emb is not None:
        if not isinstance(emb, list) or not emb:
            raise TypeError("field 'embedding' must be a non-empty list of numbers or null")
        emb = tuple(float(x) for x in emb)
    return Pin(_str(rec, "pin_id"), _str(rec, "board_id"), _str(rec, "description", required=False), emb)


def pin_to_record(pin: Pin) -> dict:
    return {
        "pin_id": pin.pin_id,
        "board_id": pin.board_id,
        "description": pin.description,
        "embedding": list(pin.embedding) if pin.embedding is not None else None,
    }


# -- streaming files --------------------------------------------------------


def iter_records(path: str | Path, kind: str) -> Iterator[tuple[int, dict]]:
    """Yield (line number, record) pairs after checking the schema header."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header_seen = False
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(path, lineno, f"malformed JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise IngestError(path, lineno, "record is not an object")
            if not header_seen:
                header_seen = True
                if rec.get("schema") != f"boardrec.{kind}":
                    raise IngestError(path, lineno, f"expected header with schema 'boardrec.{kind}'")
                if rec.get("version") != SCHEMA_VERSION:
                    raise IngestError(path, lineno, f"unsupported schema version {rec.get('version')!r}")
                continue
            yield lineno, rec


def write_records(path: str | Path, kind: str, records: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": f"boardrec.{kind}", "version": SCHEMA_VERSION}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _load_keyed(path: Path, kind: str, parse: Callable[[dict], object], key: str) -> dict:
    out: dict = {}
    for lineno, rec in iter_records(path, kind):
        try:
            obj = parse(rec)
        except (KeyError, TypeError, ValueError) as exc:
            msg = exc.args[0] if exc.args else str(exc)
            raise IngestError(path, lineno, str(msg)) from None
        ident = getattr(obj, key)
        if ident in out:
            raise IngestError(path, lineno, f"duplicate {key} {ident!r}")
        out[ident] = obj
    return out


@dataclass
class Dataset:
    users: dict[str, UserRecord]
    boards: dict[str, Board]
    pins: dict[str, Pin]
    ontology: Optional[TopicOntology] = None
    warnings: Counter = field(default_factory=Counter)

    def counts(self) -> dict:
        return {
            "users": len(self.users),
            "boards": len(self.boards),
            "pins": len(self.pins),
            "topics": len(self.ontology) if self.ontology is not None else 0,
            "tweets": sum(len(u.tweets) for u in self.users.values()),
        }


def cross_check(ds: Dataset) -> Counter:
    """Count dangling references between users, boards and pins."""
    warn: Counter = Counter()
    for user in ds.users.values():
        warn["user_unknown_board"] += sum(1 for b in user.board_ids if b not in ds.boards)
    dims = set()
    for board in ds.boards.values():
        warn["board_unknown_owner"] += board.owner_id not in ds.users
        warn["board_unknown_pin"] += sum(1 for p in board.pin_ids if p not in ds.pins)
    for pin in ds.pins.values():
        warn["pin_unknown_board"] += pin.board_id not in ds.boards
        if pin.embedding is not None:
            dims.add(len(pin.embedding))
    if len(dims) > 1:
        raise ValueError(f"pin embeddings have mixed dimensions {sorted(dims)}")
    return Counter({k: v for k, v in warn.items() if v})


def ingest(data_dir: str | Path, ontology_path: str | Path | None = None) -> Dataset:
    """Read the four record files of a data directory and cross-reference them."""
    data_dir = Path(data_dir)
    users = _load_keyed(data_dir / FILES["users"], "users", user_from_record, "user_id")
    boards = _load_keyed(data_dir / FILES["boards"], "boards", board_from_record, "board_id")
    pins = _load_keyed(data_dir / FILES["pins"], "pins", pin_from_record, "pin_id")
    ont_path = Path(ontology_path) if ontology_path else data_dir / FILES["ontology"]
    ontology = read_ontology(ont_path) if ont_path.exists() else None
    ds = Dataset(users, boards, pins, ontology)
    ds.warnings = cross_check(ds)
    for name, n in ds.warnings.items():
        log.warning("%s: %d dangling reference(s)", name, n)
    return ds


def read_ontology(path: str | Path) -> TopicOntology:
    path = Path(path)
    recs = []
    for lineno, rec in iter_records(path, "ontology"):
        if "node_id" not in rec or "name" not in rec:
            raise IngestError(path, lineno, "ontology record needs 'node_id' and 'name'")
        recs.append(rec)
    try:
        return load_raw_ontology(recs)
    except OntologyError as exc:
        raise IngestError(path, 0, str(exc)) from None


def write_ontology(path: str | Path, ont: TopicOntology) -> None:
    write_records(path, "ontology", ont.to_records())


def write_dataset(ds: Dataset, data_dir: str | Path) -> None:
    data_dir = Path(data_dir)
    write_records(data_dir / FILES["users"], "users", map(user_to_record, ds.users.values()))
    write_records(data_dir / FILES["boards"], "boards", map(board_to_record, ds.boards.values()))
    write_records(data_dir / FILES["pins"], "pins", map(pin_to_record, ds.pins.values()))
    if ds.ontology is not None:
        write_ontology(data_dir / FILES["ontology"], ds.ontology)
