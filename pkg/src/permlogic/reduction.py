"""Encoding graphs and graph sentences into permutations and TOTO sentences.

The permutation is a chain of monotone blocks B1, ..., B_{n+3} laid out along a
path of cells of a gridding matrix.  Most points come in atomic pairs; the pairs
with the same name in consecutive blocks are nested (each lies in the strip of
the previous one), forming tracks.  Vertex j owns the X_j and Y_j tracks, and the
block B_{i+3} records row i of the adjacency matrix by the number of points
sitting between X_j and Y_j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .constructions import Cell, Graph, GriddingMatrix, check_gridding, staircase_matrix, validate_path_matrix
from .logic import (
    TOG, Atom, BinOp, Card, Const, Eq, Formula, FormulaError, Member, NameSupply, Not, Quant,
    check_signature, conj, iter_nodes, disj, exists, exists_all, forall, forall_all, free_vars, iff, implies,
    lt1, lt2, neg,
)
from .perm import Permutation
from .transformers import proper_subset, subset


class ReductionError(ValueError):
    pass


@dataclass
class ReductionOutput:
    permutation: Permutation
    meta: dict
    sentence: Formula | None = None

    def block_points(self, index: int) -> list[int]:
        return list(self.meta["blocks"][index - 1]["points"])

    def pair(self, name: str) -> tuple[int, int]:
        try:
            p, q = self.meta["pairs"][name]
        except KeyError:
            raise ReductionError(f"no registered pair {name!r}") from None
        return p, q

    def meta_json(self) -> str:
        return json.dumps(self.meta, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, permutation: Permutation, text: str) -> "ReductionOutput":
        return cls(permutation, json.loads(text))


def encoded_length(n: int, m: int) -> int:
    """Closed-form length of encode_graph on n vertices and m edges."""
    return 2 + (n + 2) * (10 + 4 * n) + n + 2 * n + 2 * m


# ---------------------------------------------------------------------------
# construction of the permutation

@dataclass
class _Point:
    block: int
    role: str  # anchor, bar, pair, sep, mark, edge
    label: str = ""
    x: tuple = ()
    y: tuple = ()


@dataclass
class _Block:
    index: int
    cell: tuple[int, int]
    mono: int
    dirs: dict = field(default_factory=dict)  # axis -> +1 / -1 along the item sequence
    shared: str = ""  # axis shared with the previous block
    points: list[int] = field(default_factory=list)


def _block_items(i: int, n: int, graph: Graph):
    """Item sequence of block i >= 2: (role, label, size) in monotone order."""
    adjacency = graph.neighbours()
    items = [("bar", "lo", 2), ("pair", "Z1", 2)]
    for j in range(1, n + 1):
        items.append(("pair", f"X{j}", 2))
        if i == 3:
            items.append(("sep", str(j), 1))
        elif i >= 4:
            v = i - 3
            if j == v:
                items.append(("mark", str(j), 2))
            elif j in adjacency[v]:
                items.append(("edge", str(j), 1))
        items.append(("pair", f"Y{j}", 2))
    items += [("pair", "Z2", 2), ("pair", "Z3", 2), ("bar", "hi", 2)]
    return items


def _spread(lo, hi, k):
    step = (hi - lo) / (k + 1)
    return [lo + step * (t + 1) for t in range(k)]


def encode_graph(graph: Graph, oracle=None) -> ReductionOutput:
    """Encode ``graph`` as a permutation gridded along the path of ``oracle(n + 3)``.

    ``oracle`` maps a path length to a monotone gridding matrix whose cell graph is
    a suitable path; the staircase is used by default.
    """
    n = graph.n
    if n < 1:
        raise ReductionError("the graph needs at least one vertex")
    oracle = oracle or staircase_matrix
    matrix = oracle(n + 3)
    if not isinstance(matrix, GriddingMatrix):
        raise ReductionError("oracle must return a gridding matrix")
    try:
        cells = validate_path_matrix(matrix, n + 3)
    except ValueError as exc:
        raise ReductionError(f"oracle output rejected: {exc}") from None
    blocks = []
    for i, cell in enumerate(cells, 1):
        mono = 1 if matrix.entry(*cell) is Cell.INC else -1
        blocks.append(_Block(i, cell, mono))
    for b in blocks[1:]:
        prev = blocks[b.index - 2]
        b.shared = "x" if prev.cell[0] == b.cell[0] else "y"
    if blocks[1].shared != "y":
        raise ReductionError("the second cell must share a row with the first")

    points: list[_Point] = []
    def add(block, role, label):
        points.append(_Point(block.index, role, label))
        block.points.append(len(points) - 1)
        return points[-1]

    # B1: the anchor pair, two points in the first column
    b1 = blocks[0]
    s_lo, s_hi = add(b1, "anchor", "S"), add(b1, "anchor", "S")
    s_lo.x, s_hi.x = (b1.cell[0], Fraction(1)), (b1.cell[0], Fraction(2))
    if b1.mono < 0:
        s_lo.x, s_hi.x = s_hi.x, s_lo.x
    s_lo.y, s_hi.y = (b1.cell[1], Fraction(0)), (b1.cell[1], Fraction(1))
    b1.dirs = {"x": b1.mono, "y": 1}

    prev_pairs = None  # label -> sorted coords on the axis shared with the current block
    prev_all: list[Fraction] = []
    for b in blocks[1:]:
        i = b.index
        prev = blocks[i - 2]
        free = "x" if b.shared == "y" else "y"
        if i == 2:
            b.dirs = {"y": 1, "x": b.mono}
        else:
            d = prev.dirs[b.shared]
            b.dirs = {b.shared: d, free: d * b.mono}
        items = _block_items(i, n, graph)
        seq = []  # (role, label) per point in monotone order
        for role, label, size in items:
            seq.extend([(role, label)] * size)
        # free axis: consecutive integers in the cell band
        size = len(seq)
        free_band = b.cell[0] if free == "x" else b.cell[1]
        free_coord = [Fraction(k + 1) if b.dirs[free] > 0 else Fraction(size - k) for k in range(size)]
        # shared axis
        d = b.dirs[b.shared]
        shared_band = b.cell[0] if b.shared == "x" else b.cell[1]
        shared_coord: list[Fraction] = [Fraction(0)] * size
        if i == 2:
            lo, hi = s_lo.y[1], s_hi.y[1]
            inner = [k for k, (role, _) in enumerate(seq) if role != "bar"]
            for k, c in zip(inner, _spread(lo, hi, len(inner))):
                shared_coord[k] = c
            lo_all, hi_all = lo, hi
        else:
            lo_all, hi_all = min(prev_all), max(prev_all)
            k = 0
            while k < size:
                role, label = seq[k]
                run = 1
                while k + run < size and seq[k + run] == seq[k] and role != "pair":
                    run += 1
                if role == "pair":
                    a, c = prev_pairs[label]
                    pair = [a + (c - a) / 3, a + 2 * (c - a) / 3]
                    if d < 0:
                        pair.reverse()
                    shared_coord[k], shared_coord[k + 1] = pair
                    k += 2
                    continue
                if role in ("sep", "mark", "edge"):
                    # the run of single points between X_j and Y_j
                    run = 0
                    while k + run < size and seq[k + run][0] in ("sep", "mark", "edge"):
                        run += 1
                    j = label
                    xs, ys = prev_pairs[f"X{j}"], prev_pairs[f"Y{j}"]
                    g_lo, g_hi = (max(xs), min(ys)) if d > 0 else (max(ys), min(xs))
                    wall = min([c for c in prev_all if g_lo < c < g_hi] + [g_hi])
                    spots = _spread(g_lo, wall, run)
                    if d < 0:
                        spots.reverse()
                    shared_coord[k:k + run] = spots
                    k += run
                    continue
                k += run  # barricades are placed below
        # barricades sit outside everything the previous block put on this axis
        outer_lo = [lo_all - 2, lo_all - 1]
        outer_hi = [hi_all + 1, hi_all + 2]
        first, last = (outer_lo, outer_hi) if d > 0 else (outer_hi[::-1], outer_lo[::-1])
        shared_coord[0:2] = first
        shared_coord[size - 2:size] = last

        pair_coords: dict[str, list[Fraction]] = {}
        for k, (role, label) in enumerate(seq):
            p = add(b, role, label)
            fc = (free_band, free_coord[k])
            sc = (shared_band, shared_coord[k])
            p.x, p.y = (fc, sc) if free == "x" else (sc, fc)
            if role == "pair":
                pair_coords.setdefault(label, []).append(free_coord[k])
        prev_pairs = {lab: sorted(cs) for lab, cs in pair_coords.items()}
        prev_all = [Fraction(k + 1) for k in range(size)]

    return _assemble(graph, matrix, cells, blocks, points)


def _assemble(graph, matrix, cells, blocks, points) -> ReductionOutput:
    by_x = sorted(range(len(points)), key=lambda t: points[t].x)
    by_y = sorted(range(len(points)), key=lambda t: points[t].y)
    if len({points[t].x for t in by_x}) != len(points) or len({points[t].y for t in by_y}) != len(points):
        raise ReductionError("internal error: coordinates collide")
    pos = {t: i + 1 for i, t in enumerate(by_x)}
    val = {t: i + 1 for i, t in enumerate(by_y)}
    values = [val[t] for t in by_x]
    pi = Permutation(values)
    n_pts = len(points)

    col_cut = [1]
    for c in range(1, matrix.width + 1):
        col_cut.append(1 + sum(1 for p in points if p.x[0] <= c))
    row_cut = [1]
    for r in range(1, matrix.height + 1):
        row_cut.append(1 + sum(1 for p in points if p.y[0] <= r))
    assert col_cut[-1] == row_cut[-1] == n_pts + 1

    pairs: dict[str, list[int]] = {}
    barricades: dict[str, list[int]] = {}
    separators: dict[str, int] = {}
    vertex_markers: dict[str, list[int]] = {}
    edge_markers: dict[str, dict[str, int]] = {}
    for t, p in enumerate(points):
        q = pos[t]
        if p.role == "anchor":
            pairs.setdefault("S", []).append(q)
        elif p.role == "pair":
            pairs.setdefault(f"{p.label}@{p.block}", []).append(q)
        elif p.role == "bar":
            barricades.setdefault(str(p.block), []).append(q)
        elif p.role == "sep":
            separators[p.label] = q
        elif p.role == "mark":
            vertex_markers.setdefault(str(p.block - 3), []).append(q)
        elif p.role == "edge":
            edge_markers.setdefault(str(p.block - 3), {})[p.label] = q
    pairs = {k: sorted(v) for k, v in pairs.items()}
    names = ["Z1", "Z2", "Z3"] + [f"{c}{j}" for j in range(1, graph.n + 1) for c in "XY"]
    tracks = {nm: sorted(q for b in blocks[1:] for q in pairs[f"{nm}@{b.index}"]) for nm in names}
    meta = {
        "n": graph.n,
        "matrix": matrix.format(),
        "cells": [list(c) for c in cells],
        "cuts": {"columns": col_cut, "rows": row_cut},
        "blocks": [
            {"index": b.index, "cell": list(b.cell), "increasing": b.mono > 0,
             "orientation": {"row": b.dirs["y"], "column": b.dirs["x"]},
             "points": sorted(pos[t] for t in b.points)}
            for b in blocks
        ],
        "pairs": pairs,
        "barricades": {k: sorted(v) for k, v in barricades.items()},
        "separators": separators,
        "vertex_markers": {k: sorted(v) for k, v in vertex_markers.items()},
        "edge_markers": edge_markers,
        "tracks": tracks,
    }
    return ReductionOutput(pi, meta)


def verify_gridding(out: ReductionOutput) -> bool:
    """The encoder's own cuts form an M-gridding of its permutation."""
    matrix = GriddingMatrix.parse(out.meta["matrix"])
    cuts = out.meta["cuts"]
    return check_gridding(out.permutation, matrix, (cuts["columns"], cuts["rows"])) is not None


# ---------------------------------------------------------------------------
# native semantics: intervals, track closure, decoding

def _between(pi: Permutation, inverse, a: int, b: int, axis: int) -> list[int]:
    """Positions strictly between points a and b (given as positions) in one order."""
    if axis == 1:
        lo, hi = sorted((a, b))
        return list(range(lo + 1, hi))
    va, vb = sorted((pi.values[a - 1], pi.values[b - 1]))
    return [inverse[v - 1] for v in range(va + 1, vb)]


def closure(pi: Permutation, seed) -> set[int]:
    """Least superset of ``seed`` closed under the two track rules: whenever two
    members have nothing between them in one order and exactly two points
    between them in the other, those two points join."""
    inverse = pi.inverse().values
    members = set(seed)
    todo = list(members)
    done: list[int] = []
    while todo:
        q = todo.pop()
        for r in done:
            for axis in (1, 2):
                if _between(pi, inverse, q, r, axis):
                    continue
                mid = _between(pi, inverse, q, r, 3 - axis)
                if len(mid) == 2:
                    for m in mid:
                        if m not in members:
                            members.add(m)
                            todo.append(m)
        done.append(q)
    return members


def is_closed(pi: Permutation, members) -> bool:
    return closure(pi, members) == set(members)


def track_closure(out: ReductionOutput, pair) -> set[int]:
    """The closure of a registered atomic pair of B2, by name ('X1') or by points."""
    b2 = {f"{k.split('@')[0]}": tuple(v) for k, v in out.meta["pairs"].items() if k.endswith("@2")}
    if isinstance(pair, str):
        if pair not in b2:
            raise ReductionError(f"{pair!r} is not a registered pair of block 2")
        seed = b2[pair]
    else:
        seed = tuple(sorted(pair))
        if seed not in b2.values():
            raise ReductionError(f"{seed} is not a registered pair of block 2")
    return closure(out.permutation, seed)


def between_both(pi: Permutation, a_pts, b_pts) -> list[int]:
    """Points lying strictly between the point sets a_pts and b_pts in both orders."""
    a_pts, b_pts = list(a_pts), list(b_pts)
    if not a_pts or not b_pts:
        return []
    vals = pi.values

    def gap(coord):
        ca = [coord(p) for p in a_pts]
        cb = [coord(p) for p in b_pts]
        if max(ca) < min(cb):
            return max(ca), min(cb)
        if max(cb) < min(ca):
            return max(cb), min(ca)
        return None

    gx, gy = gap(lambda p: p), gap(lambda p: vals[p - 1])
    if gx is None or gy is None:
        return []
    return [p for p in range(gx[0] + 1, gx[1]) if gy[0] < vals[p - 1] < gy[1]]


def validate_meta(out: ReductionOutput) -> int:
    """Consistency checks between the permutation and its meta; returns n."""
    meta, pi = out.meta, out.permutation
    try:
        blocks = meta["blocks"]
        pairs = meta["pairs"]
    except (KeyError, TypeError):
        raise ReductionError("meta lacks blocks or pairs") from None
    seen = sorted(q for b in blocks for q in b["points"])
    if seen != list(range(1, pi.n + 1)):
        raise ReductionError("meta blocks do not partition the permutation")
    b2 = [k for k in pairs if k.endswith("@2")]
    if (len(b2) - 3) % 2 or len(b2) < 5:
        raise ReductionError("block 2 must hold Z1, Z2, Z3 and an X, Y pair per vertex")
    n = (len(b2) - 3) // 2
    if len(blocks) != n + 3:
        raise ReductionError(f"expected {n + 3} blocks for {n} vertices, meta has {len(blocks)}")
    block2 = set(blocks[1]["points"])
    for k in b2:
        pts = pairs[k]
        if len(pts) != 2 or not set(pts) <= block2:
            raise ReductionError(f"pair {k} is not two points of block 2")
    if "n" in meta and meta["n"] != n:
        raise ReductionError("meta n disagrees with the pair count of block 2")
    return n


def decode_graph(out: ReductionOutput) -> Graph:
    """Read the graph back from the permutation, using the meta only for block
    boundaries and the atomic pairs of B2."""
    n = validate_meta(out)
    pi = out.permutation
    tracks = {}
    for j in range(1, n + 1):
        for c in "XY":
            tracks[f"{c}{j}"] = track_closure(out, f"{c}{j}")
    edges = set()
    for v in range(1, n + 1):
        block = set(out.block_points(v + 3))
        for j in range(1, n + 1):
            xs, ys = tracks[f"X{j}"] & block, tracks[f"Y{j}"] & block
            if len(xs) != 2 or len(ys) != 2:
                raise ReductionError(f"tracks of vertex {j} do not cross block {v + 3} in pairs")
            k = len(between_both(pi, xs, ys))
            if j == v:
                if k != 2:
                    raise ReductionError(f"block {v + 3} lacks the marker of vertex {v}")
            elif k == 1:
                edges.add((min(v, j), max(v, j)))
            elif k != 0:
                raise ReductionError(f"unexpected {k} points between X{j} and Y{j} in block {v + 3}")
    for u, w in edges:
        # each edge is written in both rows of the adjacency matrix
        for a, b in ((u, w), (w, u)):
            block = set(out.block_points(a + 3))
            if len(between_both(pi, tracks[f"X{b}"] & block, tracks[f"Y{b}"] & block)) != 1:
                raise ReductionError(f"edge {u}-{w} is recorded in only one row")
    return Graph(n, sorted(edges))


# ---------------------------------------------------------------------------
# translation of graph sentences

class _Builder:
    """Predicate builders over <1 / <2; every bound variable is fresh."""

    def __init__(self, supply: NameSupply):
        self.s = supply

    def lt(self, axis, a, b):
        return lt1(a, b) if axis == 1 else lt2(a, b)

    def btw(self, axis, p, q, r):
        return disj(conj(self.lt(axis, p, r), self.lt(axis, r, q)),
                    conj(self.lt(axis, q, r), self.lt(axis, r, p)))

    def empty(self, axis, p, q):
        r = self.s.element("r")
        return neg(exists(r, self.btw(axis, p, q, r)))

    def exactly_two(self, axis, p, q, r1, r2):
        r = self.s.element("r")
        return conj(neg(Eq(r1, r2)), self.btw(axis, p, q, r1), self.btw(axis, p, q, r2),
                    forall(r, implies(self.btw(axis, p, q, r), disj(Eq(r, r1), Eq(r, r2)))))

    def count_is(self, axis, p, q, k):
        if k == 1:
            r, u = self.s.element("r"), self.s.element("r")
            return exists(r, conj(self.btw(axis, p, q, r),
                                  forall(u, implies(self.btw(axis, p, q, u), Eq(u, r)))))
        r1, r2 = self.s.element("r"), self.s.element("r")
        return exists_all([r1, r2], self.exactly_two(axis, p, q, r1, r2))

    def cover(self, axis, p, q):
        r = self.s.element("r")
        return conj(self.lt(axis, p, q), neg(exists(r, conj(self.lt(axis, p, r), self.lt(axis, r, q)))))

    def rule(self, t, first, second):
        q1, q2, r1, r2 = (self.s.element(h) for h in "qqrr")
        return forall_all([q1, q2], implies(
            conj(Member(q1, t), Member(q2, t), self.empty(first, q1, q2)),
            forall_all([r1, r2], implies(self.exactly_two(second, q1, q2, r1, r2),
                                         conj(Member(r1, t), Member(r2, t))))))

    def suptrack(self, p1, p2, t):
        return conj(Member(p1, t), Member(p2, t), self.rule(t, 1, 2), self.rule(t, 2, 1))

    def track(self, p1, p2, t):
        smaller = self.s.set("S")
        x = self.s.element("s")
        return conj(self.suptrack(p1, p2, t),
                    forall(smaller, implies(proper_subset(smaller, t, x), neg(self.suptrack(p1, p2, smaller)))))

    def anchor(self, a1, a2):
        x = self.s.element("x")
        return conj(lt2(a1, a2), forall(x, disj(Eq(x, a1), Eq(x, a2), conj(lt1(a1, x), lt1(a2, x)))))

    def z_tracks(self, a1, a2, tz):
        p1, q1, p2, q2, p3, q3 = (self.s.element(h) for h in "pqpqpq")
        return exists_all([p1, q1, p2, q2, p3, q3], conj(
            self.cover(2, a1, p1), self.cover(2, p1, q1),
            self.cover(2, p2, q2), self.cover(2, q2, p3), self.cover(2, p3, q3), self.cover(2, q3, a2),
            self.track(p1, q1, tz[0]), self.track(p2, q2, tz[1]), self.track(p3, q3, tz[2])))

    def vertex(self, a1, a2, tx, ty):
        p1, q1, p2, q2 = (self.s.element(h) for h in "pqpq")
        inside = [conj(lt2(a1, p), lt2(p, a2)) for p in (p1, q1, p2, q2)]
        return exists_all([p1, q1, p2, q2], conj(
            *inside,
            self.cover(2, p1, q1), self.cover(2, q1, p2), self.cover(2, p2, q2),
            self.count_is(1, p1, q1, 2), self.count_is(1, p2, q2, 2), self.count_is(1, q1, p2, 1),
            self.track(p1, q1, tx), self.track(p2, q2, ty)))

    def block11(self, s, tz):
        p, q, r, t, x, y = (self.s.element(h) for h in "pqrtxy")

        def le(axis, a, b):
            return disj(self.lt(axis, a, b), Eq(a, b))

        rect = exists_all([p, q, r, t], forall(x, iff(
            Member(x, s), conj(le(1, p, x), le(1, x, q), le(2, r, x), le(2, x, t)))))
        x2, y2 = self.s.element("x"), self.s.element("y")
        increasing = forall_all([x2, y2], implies(
            conj(Member(x2, s), Member(y2, s), lt1(x2, y2)), lt2(x2, y2)))
        counts = [self._two_in(s, z) for z in tz]
        return conj(rect, increasing, *counts, self._extreme(s, tz[0], low=True),
                    self._extreme(s, tz[2], low=False))

    def _two_in(self, s, z):
        u, v, w = (self.s.element(h) for h in "uvw")

        def inn(a):
            return conj(Member(a, s), Member(a, z))

        return exists_all([u, v], conj(neg(Eq(u, v)), inn(u), inn(v),
                                       forall(w, implies(inn(w), disj(Eq(w, u), Eq(w, v))))))

    def _extreme(self, s, z, low):
        # the two lowest (or highest) points of s belong to z
        x, u, v = (self.s.element(h) for h in "xuv")

        def beyond(a):
            return lt2(a, x) if low else lt2(x, a)

        few = neg(exists_all([u, v], conj(neg(Eq(u, v)), Member(u, s), Member(v, s), beyond(u), beyond(v))))
        return forall(x, implies(conj(Member(x, s), few), Member(x, z)))

    def between_sets(self, axis, a, b, s, p):
        u, v = self.s.element("u"), self.s.element("v")
        guard = conj(Member(u, a), Member(u, s), Member(v, b), Member(v, s))
        one = forall_all([u, v], implies(guard, conj(self.lt(axis, u, p), self.lt(axis, p, v))))
        u2, v2 = self.s.element("u"), self.s.element("v")
        guard2 = conj(Member(u2, a), Member(u2, s), Member(v2, b), Member(v2, s))
        other = forall_all([u2, v2], implies(guard2, conj(self.lt(axis, v2, p), self.lt(axis, p, u2))))
        return disj(one, other)

    def between_count(self, a, b, s, k):
        def btw(p):
            return conj(self.between_sets(1, a, b, s, p), self.between_sets(2, a, b, s, p))

        if k == 1:
            p, w = self.s.element("p"), self.s.element("w")
            return exists(p, conj(btw(p), forall(w, implies(btw(w), Eq(w, p)))))
        p1, p2, w = self.s.element("p"), self.s.element("p"), self.s.element("w")
        return exists_all([p1, p2], conj(neg(Eq(p1, p2)), btw(p1), btw(p2),
                                         forall(w, implies(btw(w), disj(Eq(w, p1), Eq(w, p2))))))

    def block_edge(self, txx, tyx, txy, tyy, s):
        return conj(self.between_count(txx, tyx, s, 2), self.between_count(txy, tyy, s, 1))

    def edge(self, tz, txx, tyx, txy, tyy):
        s = self.s.set("B")
        base = self.block11(s, tz)
        variants = [orient(base, r, c) for r in (1, -1) for c in (1, -1)]
        return exists(s, conj(disj(*variants), self.block_edge(txx, tyx, txy, tyy, s)))


def orient(f: Formula, r: int, c: int) -> Formula:
    """Flip the polarity of <2 when r = -1 and of <1 when c = -1."""
    flip = set()
    if r < 0:
        flip.add("<2")
    if c < 0:
        flip.add("<1")
    if not flip:
        return f

    def go(g):
        if isinstance(g, Atom):
            return Atom(g.symbol, g.args[::-1]) if g.symbol in flip else g
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            return Quant(g.kind, g.var, g.is_set, go(g.body))
        return g

    return go(f)


def translate_sentence(phi: Formula) -> Formula:
    """A TOTO sentence true on encode_graph(G) exactly when phi holds in G."""
    check_signature(phi, TOG)
    for node in iter_nodes(phi):
        if isinstance(node, Card):
            raise FormulaError("cardinality atoms are not part of the graph language")
        if isinstance(node, Atom) and node.symbol != "E":
            raise FormulaError(f"unexpected atom {node.symbol}")
    if free_vars(phi):
        raise FormulaError(f"not a sentence: free variables {', '.join(sorted(free_vars(phi)))}")
    supply = NameSupply(phi)
    bld = _Builder(supply)
    a1, a2 = supply.element("a"), supply.element("a")
    tz = [supply.set("Z") for _ in range(3)]
    tracks: dict[str, tuple[str, str]] = {}

    def tr(f, env):
        if isinstance(f, Const):
            return f
        if isinstance(f, Not):
            return neg(tr(f.sub, env))
        if isinstance(f, BinOp):
            return BinOp(f.op, tr(f.left, env), tr(f.right, env))
        if isinstance(f, Member):
            tx, ty = env[f.element]
            x = supply.element("s")
            y = supply.element("s")
            return conj(subset(tx, f.set, x), subset(ty, f.set, y))
        if isinstance(f, Eq):
            (tx, _), (ux, _) = env[f.left], env[f.right]
            s = supply.element("s")
            return forall(s, iff(Member(s, tx), Member(s, ux)))
        if isinstance(f, Atom):
            x, y = f.args
            return bld.edge(tz, *env[x], *env[y])
        if isinstance(f, Quant):
            if f.is_set:
                guard = _union_of_tracks(bld, supply, a1, a2, f.var)
                body = tr(f.body, env)
                if f.kind == "E":
                    return exists(f.var, conj(guard, body))
                return forall(f.var, implies(guard, body))
            tx, ty = supply.set("X"), supply.set("Y")
            inner = dict(env)
            inner[f.var] = (tx, ty)
            body = tr(f.body, inner)
            vert = bld.vertex(a1, a2, tx, ty)
            if f.kind == "E":
                return exists_all([tx, ty], conj(vert, body))
            return forall_all([tx, ty], implies(vert, body))
        raise FormulaError(f"cannot translate {type(f).__name__}")

    core = tr(phi, tracks)
    return exists_all([a1, a2], conj(bld.anchor(a1, a2),
                                     exists_all(tz, conj(bld.z_tracks(a1, a2, tz), core))))


def _union_of_tracks(bld: _Builder, supply: NameSupply, a1, a2, name):
    x = supply.element("x")
    ta, tb = supply.set("A"), supply.set("B")
    s1, s2 = supply.element("s"), supply.element("s")
    return forall(x, implies(Member(x, name), exists_all([ta, tb], conj(
        bld.vertex(a1, a2, ta, tb), subset(ta, name, s1), subset(tb, name, s2),
        disj(Member(x, ta), Member(x, tb))))))


def three_colorability() -> Formula:
    """The graph sentence: the vertices split into three independent sets."""
    from .logic import parse_formula

    text = ("ES R. ES G. ES B. (A x. (x in R | x in G | x in B)) & "
            "(A x. A y. E(x, y) -> !((x in R & y in R) | (x in G & y in G) | (x in B & y in B)))")
    return parse_formula(text, TOG)


def reduce(graph: Graph, phi: Formula, oracle=None) -> ReductionOutput:
    out = encode_graph(graph, oracle)
    out.sentence = translate_sentence(phi)
    return out
