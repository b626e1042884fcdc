"""Permutations, pattern containment, statistics and structural operations.

Positions and values are 1-indexed throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class Permutation:
    """An immutable permutation of 1..n, stored in one-line notation."""

    __slots__ = ("values", "_hash")

    def __init__(self, values: Iterable[int] = ()):
        vals = tuple(int(v) for v in values)
        if sorted(vals) != list(range(1, len(vals) + 1)):
            raise ValueError(f"not a permutation of 1..{len(vals)}: {vals}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_hash", hash(vals))

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Read "3 1 4 2", "3,1,4,2" or the compact digit form "3142" (n <= 9)."""
        text = text.strip()
        if not text:
            return cls(())
        parts = text.replace(",", " ").split()
        if len(parts) == 1 and len(parts[0]) > 1:
            word = parts[0]
            if not word.isdigit() or "0" in word:
                raise ValueError(f"cannot read permutation from {text!r}")
            return cls(int(c) for c in word)
        return cls(int(p) for p in parts)

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        if isinstance(other, Permutation):
            return self.values == other.values
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Permutation({self})"

    def __str__(self):
        if self.n <= 9:
            return "".join(map(str, self.values))
        return " ".join(map(str, self.values))

    def spaced(self) -> str:
        return " ".join(map(str, self.values))

    def value_at(self, position: int) -> int:
        return self.values[position - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.values, 1):
            inv[v - 1] = i
        return Permutation(inv)

    def points(self) -> list[tuple[int, int]]:
        return [(i, v) for i, v in enumerate(self.values, 1)]

    def pattern_of(self, positions: Iterable[int]) -> "Permutation":
        """The subpermutation induced by the given positions."""
        return standardize([self.values[p - 1] for p in sorted(positions)])

    def contains(self, pattern: "Permutation") -> bool:
        return next(_occurrences(pattern, self), None) is not None

    def avoids(self, pattern: "Permutation") -> bool:
        return not self.contains(pattern)


def standardize(seq: Sequence) -> Permutation:
    """The permutation order-isomorphic to a sequence of distinct values."""
    order = sorted(range(len(seq)), key=lambda i: seq[i])
    out = [0] * len(seq)
    for rank, i in enumerate(order, 1):
        out[i] = rank
    return Permutation(out)


def all_permutations(n: int) -> Iterator[Permutation]:
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)


def permutations_up_to(n: int, start: int = 0) -> Iterator[Permutation]:
    for m in range(start, n + 1):
        yield from all_permutations(m)


# -- containment -------------------------------------------------------------

def _occurrences(pattern: Permutation, text: Permutation, adjacent=frozenset()):
    k, n = pattern.n, text.n
    if k > n:
        return
    pat = pattern.values
    txt = text.values
    chosen: list[int] = []

    def extend(start):
        i = len(chosen)
        if i == k:
            yield tuple(chosen)
            return
        if i in adjacent:
            # element i+1 of the pattern must sit right after element i
            candidates = [chosen[-1] + 1] if chosen[-1] + 1 <= n else []
        else:
            candidates = range(start, n - (k - i) + 2)
        for pos in candidates:
            v = txt[pos - 1]
            ok = True
            for j in range(i):
                if (txt[chosen[j] - 1] < v) != (pat[j] < pat[i]):
                    ok = False
                    break
            if ok:
                chosen.append(pos)
                yield from extend(pos + 1)
                chosen.pop()

    yield from extend(1)


def occurrences(pattern: Permutation, text: Permutation) -> list[tuple[int, ...]]:
    """All position tuples of ``text`` order-isomorphic to ``pattern``, lexicographically sorted."""
    return list(_occurrences(pattern, text))


@dataclass(frozen=True)
class VincularPattern:
    """A classical pattern plus underlined adjacencies.

    ``adjacent`` holds pattern positions i such that the images of pattern
    elements i and i+1 must be neighbours in the text (with respect to <1).
    """

    pattern: Permutation
    adjacent: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        adj = frozenset(self.adjacent)
        k = self.pattern.n
        if any(not 1 <= i <= k - 1 for i in adj):
            raise ValueError(f"adjacency positions must lie in 1..{k - 1}")
        object.__setattr__(self, "adjacent", adj)

    @classmethod
    def parse(cls, text: str) -> "VincularPattern":
        """Read patterns written with brackets around consecutive runs, e.g. "1[32]" or "[21]"."""
        values, adjacent, run_start = [], set(), None
        for ch in text.replace(" ", ""):
            if ch == "[":
                if run_start is not None:
                    raise ValueError(f"nested bracket in {text!r}")
                run_start = len(values)
            elif ch == "]":
                if run_start is None:
                    raise ValueError(f"unbalanced bracket in {text!r}")
                adjacent.update(range(run_start + 1, len(values)))
                run_start = None
            elif ch.isdigit():
                values.append(int(ch))
            else:
                raise ValueError(f"unexpected {ch!r} in pattern {text!r}")
        if run_start is not None:
            raise ValueError(f"unbalanced bracket in {text!r}")
        return cls(Permutation(values), frozenset(adjacent))

    def __str__(self):
        out = []
        for i, v in enumerate(self.pattern.values, 1):
            if i not in self.adjacent and (i - 1) in self.adjacent:
                out.append(f"{v}]")
            elif i in self.adjacent and (i - 1) not in self.adjacent:
                out.append(f"[{v}")
            else:
                out.append(str(v))
        return "".join(out)


def vincular_occurrences(vp: VincularPattern, text: Permutation) -> list[tuple[int, ...]]:
    return list(_occurrences(vp.pattern, text, vp.adjacent))


def count_vincular(vp: VincularPattern, text: Permutation) -> int:
    return len(vincular_occurrences(vp, text))


# The four patterns whose occurrence counts sum to the major index.
MAJ_PATTERNS = tuple(
    VincularPattern.parse(s) for s in ("1[32]", "2[31]", "3[21]", "[21]")
)


# -- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class StatRecord:
    descent_set: frozenset
    maj: int
    inversions: int
    fixed_points: frozenset
    ltr_maxima: frozenset


def statistics(pi: Permutation) -> StatRecord:
    v = pi.values
    n = len(v)
    des = frozenset(i for i in range(1, n) if v[i - 1] > v[i])
    inv = sum(1 for i in range(n) for j in range(i + 1, n) if v[i] > v[j])
    fixed = frozenset(i for i in range(1, n + 1) if v[i - 1] == i)
    ltr, best = set(), 0
    for i, x in enumerate(v, 1):
        if x > best:
            ltr.add(i)
            best = x
    return StatRecord(des, sum(des), inv, fixed, frozenset(ltr))


# -- structural operations ---------------------------------------------------

def inflate(sigma: Permutation, parts: Sequence[Permutation]) -> Permutation:
    """sigma[tau_1, ..., tau_k]: replace point i of sigma by a copy of tau_i."""
    if len(parts) != sigma.n:
        raise ValueError(f"inflation of a length-{sigma.n} permutation needs {sigma.n} parts, got {len(parts)}")
    if any(p.n == 0 for p in parts):
        raise ValueError("inflation parts must be non-empty")
    # value offset of each block: total size of blocks inflating smaller values
    offset = {}
    acc = 0
    for val in range(1, sigma.n + 1):
        i = sigma.values.index(val)
        offset[i] = acc
        acc += parts[i].n
    out = []
    for i, part in enumerate(parts):
        out.extend(offset[i] + x for x in part.values)
    return Permutation(out)


def direct_sum(*perms: Permutation) -> Permutation:
    out, shift = [], 0
    for p in perms:
        out.extend(x + shift for x in p.values)
        shift += p.n
    return Permutation(out)


def skew_sum(*perms: Permutation) -> Permutation:
    total = sum(p.n for p in perms)
    out, shift = [], total
    for p in perms:
        shift -= p.n
        out.extend(x + shift for x in p.values)
    return Permutation(out)


def reverse(pi: Permutation) -> Permutation:
    return Permutation(reversed(pi.values))


def complement(pi: Permutation) -> Permutation:
    return Permutation(pi.n + 1 - x for x in pi.values)


def is_interval(pi: Permutation, start: int, end: int) -> bool:
    """Whether positions start..end (inclusive) carry a contiguous set of values."""
    if not 1 <= start <= end <= pi.n:
        return False
    vals = pi.values[start - 1:end]
    return max(vals) - min(vals) == end - start


def proper_intervals(pi: Permutation) -> list[tuple[int, int]]:
    """Position ranges (start, end) of size 2..n-1 whose values are contiguous."""
    n = pi.n
    v = pi.values
    out = []
    for s in range(n):
        lo = hi = v[s]
        for e in range(s + 1, n):
            lo = min(lo, v[e])
            hi = max(hi, v[e])
            size = e - s + 1
            if size >= n:
                break
            if hi - lo == e - s:
                out.append((s + 1, e + 1))
    return out


def is_simple(pi: Permutation) -> bool:
    return not proper_intervals(pi)


def deflate(pi: Permutation, interval: tuple[int, int]) -> Permutation:
    """Collapse the interval at positions start..end to a single point."""
    start, end = interval
    if not is_interval(pi, start, end):
        raise ValueError(f"positions {start}..{end} do not form an interval of {pi}")
    v = pi.values
    kept = list(v[:start - 1]) + [min(v[start - 1:end])] + list(v[end:])
    return standardize(kept)


def is_separable(pi: Permutation) -> bool:
    """Buildable from 1 by direct and skew sums (checked by recursive splitting)."""
    v = pi.values
    if len(v) <= 1:
        return True
    n = len(v)
    running_max = running_min = v[0]
    for k in range(1, n):
        running_max = max(running_max, v[k - 1])
        running_min = min(running_min, v[k - 1])
        if running_max == k:
            return is_separable(standardize(v[:k])) and is_separable(standardize(v[k:]))
        if running_min == n - k + 1:
            return is_separable(standardize(v[:k])) and is_separable(standardize(v[k:]))
    return False


def remove_extreme(alpha: Permutation, side: str) -> Permutation:
    """alpha without its rightmost ('right'), leftmost ('left'), topmost ('top') or bottommost ('bottom') point."""
    v = list(alpha.values)
    if side == "right":
        v.pop()
    elif side == "left":
        v.pop(0)
    elif side == "top":
        v.remove(alpha.n)
    elif side == "bottom":
        v.remove(1)
    else:
        raise ValueError(f"unknown side {side!r}")
    return standardize(v)
