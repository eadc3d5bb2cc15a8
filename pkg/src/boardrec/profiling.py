"""Board -> topic mapping by phrase matching, and user profiles as unions of board labels."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .data_model import Board, Pin, UserRecord
from .ontology import TopicOntology, normalize_text


class PhraseMatcher:
    """Token-phrase lookup of ontology node names in free text.

    Built once per ontology; a name matches only as a run of whole tokens, so
    "cake" does not fire on "pancake".
    """

    def __init__(self, ont: TopicOntology):
        self.ont = ont
        self._phrases: dict[tuple[str, ...], list[str]] = {}
        for nid, node in ont.nodes.items():
            toks = tuple(normalize_text(node.name).split())
            if toks:
                self._phrases.setdefault(toks, []).append(nid)
        self._max_len = max((len(p) for p in self._phrases), default=0)

    def match(self, text: str) -> set[str]:
        toks = normalize_text(text).split()
        found: set[str] = set()
        for i in range(len(toks)):
            for n in range(1, min(self._max_len, len(toks) - i) + 1):
                hit = self._phrases.get(tuple(toks[i : i + n]))
                if hit:
                    found.update(hit)
        return found

    def to_vector(self, node_ids: Iterable[str]) -> np.ndarray:
        bits = np.zeros(len(self.ont), dtype=np.uint8)
        for nid in node_ids:
            bits[self.ont.index[nid]] = 1
        return bits


def match_categories(text: str, ont: TopicOntology) -> set[str]:
    return PhraseMatcher(ont).match(text)


def map_board(board: Board, pins: Iterable[Pin], ont: TopicOntology, matcher: PhraseMatcher | None = None) -> np.ndarray:
    """Label vector of a board: matches in its own title/description plus matches in its pins.

    Each pin description is matched on its own so a phrase cannot straddle
    two pins.
    """
    matcher = matcher or PhraseMatcher(ont)
    hits = matcher.match(f"{board.title} {board.description}")
    for pin in pins:
        hits |= matcher.match(pin.description)
    return matcher.to_vector(hits)


def board_pins(board: Board, pins: Mapping[str, Pin]) -> list[Pin]:
    return [pins[pid] for pid in board.pin_ids if pid in pins]


def build_user_profile(
    user: UserRecord,
    boards: Mapping[str, Board],
    pins: Mapping[str, Pin],
    ont: TopicOntology,
    matcher: PhraseMatcher | None = None,
) -> np.ndarray:
    """Bitwise OR of the labels of every board the user owns."""
    matcher = matcher or PhraseMatcher(ont)
    profile = np.zeros(len(ont), dtype=np.uint8)
    for bid in user.board_ids:
        if bid not in boards:
            raise KeyError(f"unresolved board id {bid!r} for user {user.user_id!r}")
        board = boards[bid]
        profile |= map_board(board, board_pins(board, pins), ont, matcher)
    return profile
