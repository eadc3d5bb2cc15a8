"""Model files.

A model file is a single UTF-8 JSON document written with sorted keys and
no insignificant whitespace, so identical models produce identical bytes::

    {"format": "boardrec-model", "version": 1,
     "labels": [{"node_id", "name"}, ...],          # label index order
     "featurizer": {"mode", "dim", "seed", "n_docs", "df": ARRAY, "dictionary": TEXT},
     "classifier": {"kind": "br" | "lp" | "rakel", "hp": {...}, ...}}

Every numeric array is stored as ``{"dtype": "<f8", "shape": [...], "data": BASE64}``
where ``data`` is the raw little-endian C-order buffer, which makes the
save/load round trip bit-exact.

Classifier payloads:

br      weights (d, L) <f8, bias (L,) <f8, constant (L,) |i1
lp      labelsets (K, L) |u1, counts (K,) <i8, weights (d, K) <f8, bias (K,) <f8
rakel   n_labels, k, M, threshold, seed, members: [{"labelset": [...], "lp": <lp payload>}]
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..multilabel import BRModel, LogisticParams, LPModel, RakelMember, RakelModel, model_kind
from ..textfeat import CategoryDictionary, Featurizer, HashedCorpusModel

FORMAT = "boardrec-model"
VERSION = 1


def encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    dtype = a.dtype.newbyteorder("<") if a.dtype.byteorder == ">" else a.dtype
    a = a.astype(dtype, copy=False)
    return {"dtype": dtype.str, "shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_array(rec: dict) -> np.ndarray:
    buf = base64.b64decode(rec["data"])
    return np.frombuffer(buf, dtype=np.dtype(rec["dtype"])).reshape(rec["shape"]).copy()


def _lp_payload(m: LPModel) -> dict:
    return {
        "labelsets": encode_array(m.labelsets.astype(np.uint8)),
        "counts": encode_array(m.counts.astype(np.int64)),
        "weights": encode_array(m.weights.astype(np.float64)),
        "bias": encode_array(m.bias.astype(np.float64)),
    }


def _lp_from(rec: dict, hp: LogisticParams) -> LPModel:
    return LPModel(decode_array(rec["labelsets"]), decode_array(rec["counts"]),
                   decode_array(rec["weights"]), decode_array(rec["bias"]), hp)


def classifier_to_dict(model) -> dict:
    kind = model_kind(model)
    out: dict = {"kind": kind}
    if kind == "br":
        out.update(hp=model.hp.as_dict(), weights=encode_array(model.weights), bias=encode_array(model.bias),
                   constant=encode_array(model.constant.astype(np.int8)))
    elif kind == "lp":
        out.update(hp=model.hp.as_dict(), **_lp_payload(model))
    else:
        hp = model.members[0].model.hp if model.members else LogisticParams()
        out.update(
            hp=hp.as_dict(), n_labels=model.n_labels, k=model.k, M=model.M,
            threshold=model.threshold, seed=model.seed,
            members=[{"labelset": list(map(int, m.labelset)), "lp": _lp_payload(m.model)} for m in model.members],
        )
    return out


def classifier_from_dict(rec: dict):
    hp = LogisticParams(**rec["hp"])
    kind = rec["kind"]
    if kind == "br":
        return BRModel(decode_array(rec["weights"]), decode_array(rec["bias"]), decode_array(rec["constant"]), hp)
    if kind == "lp":
        return _lp_from(rec, hp)
    if kind == "rakel":
        members = [RakelMember(list(m["labelset"]), _lp_from(m["lp"], hp)) for m in rec["members"]]
        return RakelModel(members, rec["n_labels"], rec["k"], rec["M"], rec["threshold"], rec["seed"])
    raise ValueError(f"unknown classifier kind {kind!r}")


@dataclass
class TrainedBundle:
    """Everything needed to go from raw tweets to a label vector."""

    featurizer: Featurizer
    classifier: object
    label_ids: list[str]
    label_names: list[str]

    def to_dict(self) -> dict:
        fz = self.featurizer
        return {
            "format": FORMAT,
            "version": VERSION,
            "labels": [{"node_id": i, "name": n} for i, n in zip(self.label_ids, self.label_names)],
            "featurizer": {
                "mode": fz.mode,
                "dim": fz.corpus.dim,
                "seed": fz.corpus.seed,
                "n_docs": fz.corpus.n_docs,
                "df": encode_array(fz.corpus.df.astype(np.int64)),
                "dictionary": fz.dictionary.dumps(),
            },
            "classifier": classifier_to_dict(self.classifier),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "TrainedBundle":
        if rec.get("format") != FORMAT or rec.get("version") != VERSION:
            raise ValueError("not a boardrec model file (format/version mismatch)")
        f = rec["featurizer"]
        corpus = HashedCorpusModel(f["dim"], decode_array(f["df"]), f["n_docs"], f["seed"])
        fz = Featurizer(corpus, CategoryDictionary.parse(f["dictionary"]), f["mode"])
        labels = rec["labels"]
        return cls(fz, classifier_from_dict(rec["classifier"]),
                   [l["node_id"] for l in labels], [l["name"] for l in labels])


def dumps_model(bundle: TrainedBundle) -> bytes:
    return json.dumps(bundle.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_model(bundle: TrainedBundle, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_model(bundle))


def load_model(path: str | Path) -> TrainedBundle:
    return TrainedBundle.from_dict(json.loads(Path(path).read_bytes()))
