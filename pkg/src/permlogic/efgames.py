"""Ehrenfeucht-Fraisse games with k rounds on finite relational structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .logic import Structure

DUPLICATOR = "Duplicator"
SPOILER = "Spoiler"


class SignatureMismatch(ValueError):
    pass


@dataclass
class GamePosition:
    chosen_a: list[int] = field(default_factory=list)
    chosen_b: list[int] = field(default_factory=list)
    moves_left: int = 0

    def __post_init__(self):
        if len(self.chosen_a) != len(self.chosen_b):
            raise ValueError("both sides must have the same number of chosen elements")

    def key(self):
        # the partial map, as a set of pairs, is all that matters for the outcome
        return frozenset(zip(self.chosen_a, self.chosen_b)), self.moves_left


class EFGame:
    """Exact minimax for the k-round game between A and B.

    Positions are memoized on the set of chosen pairs plus the number of rounds
    left; repeated or reordered choices collapse onto one entry.
    """

    def __init__(self, a: Structure, b: Structure):
        if a.signature.relations != b.signature.relations:
            raise SignatureMismatch(f"signatures differ: {a.signature.name} vs {b.signature.name}")
        self.a, self.b = a, b
        self.rels = [(s, r, a.relations[s], b.relations[s]) for s, r in a.signature.relations]
        self.memo: dict = {}
        self.positions = 0

    def extends(self, pairs: tuple, x: int, y: int) -> bool:
        """Does adding x -> y to the partial isomorphism ``pairs`` keep it one?"""
        for u, v in pairs:
            if (u == x) != (v == y):
                return False
        ext = pairs + ((x, y),)
        last = len(ext) - 1
        for _, arity, ra, rb in self.rels:
            for idx in itertools.product(range(len(ext)), repeat=arity):
                if last not in idx:
                    continue
                ta = tuple(ext[i][0] for i in idx)
                tb = tuple(ext[i][1] for i in idx)
                if (ta in ra) != (tb in rb):
                    return False
        return True

    def duplicator_wins(self, pairs: tuple, k: int) -> bool:
        if k == 0:
            return True
        key = (frozenset(pairs), k)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.positions += 1
        used_a = {u for u, _ in pairs}
        used_b = {v for _, v in pairs}
        result = True
        for side in (0, 1):
            here, there = (self.a, self.b) if side == 0 else (self.b, self.a)
            used = used_a if side == 0 else used_b
            for x in here.domain:
                if x in used:
                    continue  # Duplicator answers with the old partner
                if not self._has_reply(pairs, side, x, there, k):
                    result = False
                    break
            if not result:
                break
        self.memo[key] = result
        return result

    def _has_reply(self, pairs, side, x, there, k) -> bool:
        for y in there.domain:
            a_el, b_el = (x, y) if side == 0 else (y, x)
            if self.extends(pairs, a_el, b_el):
                nxt = tuple(sorted(pairs + ((a_el, b_el),)))
                if self.duplicator_wins(nxt, k - 1):
                    return True
        return False

    def winner(self, k: int, position: GamePosition | None = None) -> str:
        if k < 0:
            raise ValueError("k must be non-negative")
        pairs: tuple = ()
        if position is not None:
            for x, y in zip(position.chosen_a, position.chosen_b):
                if not self.extends(pairs, x, y):
                    return SPOILER
                pairs = tuple(sorted(set(pairs + ((x, y),))))
        return DUPLICATOR if self.duplicator_wins(pairs, k) else SPOILER


def ef_winner(a: Structure, b: Structure, k: int) -> str:
    """'Duplicator' if A and B agree on all sentences of quantifier depth <= k."""
    return EFGame(a, b).winner(k)


def linear_order_threshold(k: int) -> int:
    """Smallest size from which all linear orders are k-equivalent."""
    return 2 ** k - 1
