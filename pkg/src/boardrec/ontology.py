"""Topic hierarchy: loading, term-frequency pruning and structural statistics.

Nodes may have several parents (category graphs are DAGs in practice); a
node's depth is one more than its shallowest parent, roots sitting at 1.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class OntologyError(ValueError):
    pass


def canonical_name(name: str) -> str:
    return " ".join(name.lower().split())


@dataclass(frozen=True)
class TopicNode:
    node_id: str
    name: str
    parent_ids: tuple[str, ...]
    depth: int


@dataclass(frozen=True)
class TopicOntology:
    nodes: dict[str, TopicNode]
    roots: tuple[str, ...]
    index: dict[str, int]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def node_ids(self) -> list[str]:
        """Node ids in label-index order."""
        return sorted(self.index, key=self.index.__getitem__)

    def children(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for node in self.nodes.values():
            for p in node.parent_ids:
                kids[p].append(node.node_id)
        return kids

    def by_name(self) -> dict[str, str]:
        return {node.name: nid for nid, node in self.nodes.items()}

    def ancestors(self, node_id: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.nodes[node_id].parent_ids)
        while stack:
            p = stack.pop()
            if p not in seen:
                seen.add(p)
                stack.extend(self.nodes[p].parent_ids)
        return seen

    def to_records(self) -> list[dict]:
        """Inverse of :func:`load_raw_ontology` (parents referenced by name)."""
        return [
            {
                "node_id": nid,
                "name": self.nodes[nid].name,
                "parents": [self.nodes[p].name for p in self.nodes[nid].parent_ids],
            }
            for nid in self.node_ids
        ]


@dataclass(frozen=True)
class TermEvidence:
    pin_term_freq: Mapping[str, float] = field(default_factory=dict)
    board_term_freq: Mapping[str, float] = field(default_factory=dict)
    # followers + likes + comments + repins of the items mentioning the term
    popularity: Mapping[str, float] = field(default_factory=dict)


def _build(entries: list[tuple[str, str, tuple[str, ...]]]) -> TopicOntology:
    """entries: (node_id, canonical name, parent ids) in declaration order."""
    parents = {nid: ps for nid, _, ps in entries}

    # iterative three-colour DFS over parent edges to find one cycle edge
    state: dict[str, int] = {}
    for start in parents:
        if start in state:
            continue
        stack = [(start, iter(parents[start]))]
        state[start] = 1
        while stack:
            nid, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[nid] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                raise OntologyError(f"cycle detected at edge {nid!r} -> parent {nxt!r}")
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(parents[nxt])))

    depth: dict[str, int] = {}

    def resolve(nid: str) -> int:
        if nid in depth:
            return depth[nid]
        # acyclic, so a plain post-order walk terminates
        todo = [nid]
        while todo:
            cur = todo[-1]
            missing = [p for p in parents[cur] if p not in depth]
            if missing:
                todo.extend(missing)
                continue
            todo.pop()
            depth[cur] = 1 + min((depth[p] for p in parents[cur]), default=0)
        return depth[nid]

    nodes = {nid: TopicNode(nid, name, ps, resolve(nid)) for nid, name, ps in entries}
    roots = tuple(nid for nid, _, ps in entries if not ps)
    index = {nid: i for i, (nid, _, _) in enumerate(entries)}
    return TopicOntology(nodes, roots, index)


def load_raw_ontology(records: Iterable[Mapping]) -> TopicOntology:
    """Build an ontology from ``{node_id, name, parents: [names]}`` records.

    Names are lowercased and whitespace-normalised and must be unique, since
    parents are referenced by name.
    """
    raw = []
    seen_ids: set[str] = set()
    name_to_id: dict[str, str] = {}
    for rec in records:
        nid = str(rec["node_id"])
        name = canonical_name(str(rec["name"]))
        if not name:
            raise OntologyError(f"node {nid!r} has an empty name")
        if nid in seen_ids:
            raise OntologyError(f"duplicate node id {nid!r}")
        seen_ids.add(nid)
        if name in name_to_id:
            raise OntologyError(f"duplicate node name {name!r}")
        name_to_id[name] = nid
        raw.append((nid, name, [canonical_name(p) for p in rec.get("parents", [])]))

    entries = []
    for nid, name, parent_names in raw:
        pids = []
        for pname in parent_names:
            if pname not in name_to_id:
                raise OntologyError(f"node {name!r} references unknown parent {pname!r}")
            pid = name_to_id[pname]
            if pid not in pids:
                pids.append(pid)
        entries.append((nid, name, tuple(pids)))
    return _build(entries)


def prune_ontology(
    ont: TopicOntology,
    ev: TermEvidence,
    pin_threshold: float = 200,
    board_divisor: float = 100,
    popularity_weight: float = 1.0,
) -> TopicOntology:
    """Drop topics with too little pin and board evidence.

    A node survives if either its pin score reaches ``pin_threshold`` or its
    board score reaches ``pin_threshold / board_divisor``, each score being
    ``count + popularity_weight * ln(1 + popularity)``. Roots and all
    ancestors of survivors are kept so the result stays connected.
    """
    if pin_threshold < 0:
        raise ValueError("pin_threshold must be >= 0")
    if board_divisor < 1:
        raise ValueError("board_divisor must be >= 1")
    board_threshold = pin_threshold / board_divisor

    kept: set[str] = set(ont.roots)
    for nid, node in ont.nodes.items():
        bonus = popularity_weight * math.log1p(ev.popularity.get(node.name, 0.0))
        pin_score = ev.pin_term_freq.get(node.name, 0) + bonus
        board_score = ev.board_term_freq.get(node.name, 0) + bonus
        if pin_score >= pin_threshold or board_score >= board_threshold:
            kept.add(nid)
    for nid in list(kept):
        kept |= ont.ancestors(nid)

    entries = [
        (nid, ont.nodes[nid].name, ont.nodes[nid].parent_ids)
        for nid in ont.node_ids
        if nid in kept
    ]
    return _build(entries)


def ontology_stats(ont: TopicOntology) -> dict:
    kids = ont.children()
    leaves = [nid for nid, c in kids.items() if not c]
    return {
        "total": len(ont.nodes),
        "roots": len(ont.roots),
        "leaves": len(leaves),
        "min_depth_of_leaves": min((ont.nodes[n].depth for n in leaves), default=0),
        "max_depth": max((n.depth for n in ont.nodes.values()), default=0),
    }


_NON_ALNUM = re.compile(r"[\W_]+")


def normalize_text(text: str) -> str:
    """Lowercase, turn every non-alphanumeric run into one space."""
    return " ".join(_NON_ALNUM.sub(" ", text.lower()).split())


def compute_term_evidence(
    ont: TopicOntology,
    boards: Iterable,
    pins: Mapping[str, object],
) -> TermEvidence:
    """Count every node-name occurrence in board and pin texts.

    Term frequency is total occurrences. Popularity of a term is the summed
    popularity of boards whose own text or pins mention it (boards carry the
    only popularity signal in the record format).
    """
    phrases = {name: tuple(normalize_text(name).split()) for name in ont.by_name()}
    max_len = max((len(p) for p in phrases.values()), default=0)
    lookup = {p: name for name, p in phrases.items() if p}

    def counts(text: str) -> Counter:
        toks = normalize_text(text).split()
        c: Counter = Counter()
        for i in range(len(toks)):
            for n in range(1, max_len + 1):
                gram = tuple(toks[i : i + n])
                if len(gram) < n:
                    break
                if gram in lookup:
                    c[lookup[gram]] += 1
        return c

    pin_tf: Counter = Counter()
    board_tf: Counter = Counter()
    pop: Counter = Counter()
    for board in boards:
        bc = counts(f"{board.title} {board.description}")
        board_tf.update(bc)
        pc: Counter = Counter()
        for pid in board.pin_ids:
            pin = pins.get(pid)
            if pin is not None:
                pc.update(counts(pin.description))
        pin_tf.update(pc)
        for name in set(bc) | set(pc):
            pop[name] += board.popularity
    return TermEvidence(dict(pin_tf), dict(board_tf), dict(pop))


def label_names(ont: TopicOntology, bits, ids: bool = False) -> list[str]:
    """Names (or node ids) of the set bits of a label vector."""
    order = ont.node_ids
    return [order[i] if ids else ont.nodes[order[i]].name for i, b in enumerate(bits) if b]
