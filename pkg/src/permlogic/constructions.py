"""Concrete permutations and structures: pi_kl, the spiral, labeled incidence
structures, tree-width, and monotone gridding matrices."""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .logic import INCIDENCE, Structure
from .perm import (
    Permutation, direct_sum, inflate, is_simple, remove_extreme, skew_sum, standardize,
)


def pi_kl(k: int, l: int) -> Permutation:
    """(+^k 1) skew 1 skew (+^l 1): k increasing points on top, one middle point, l below."""
    if k < 0 or l < 0:
        raise ValueError("k and l must be non-negative")
    return skew_sum(Permutation.identity(k), Permutation.identity(1), Permutation.identity(l))


def has_fixed_point(pi: Permutation) -> bool:
    return any(v == i for i, v in enumerate(pi.values, 1))


# -- graphs ------------------------------------------------------------------

class Graph:
    """A simple undirected graph on vertices 1..n."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        es = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge {u}-{v} leaves the vertex set 1..{n}")
            es.add((min(u, v), max(u, v)))
        self.edges = frozenset(es)

    @classmethod
    def parse(cls, text: str) -> "Graph":
        lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError("empty graph description")
        n, m = int(lines[0][0]), int(lines[0][1])
        edges = [(int(a), int(b)) for a, b in lines[1:]]
        if len(edges) != m:
            raise ValueError(f"header announces {m} edges, found {len(edges)}")
        return cls(n, edges)

    def format(self) -> str:
        lines = [f"{self.n} {len(self.edges)}"] + [f"{u} {v}" for u, v in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, itertools.combinations(range(1, n + 1), 2))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, ((i, i + 1) for i in range(1, n)))

    @classmethod
    def random(cls, n: int, p: float, rng: random.Random) -> "Graph":
        return cls(n, (e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < p))

    def neighbours(self) -> dict[int, set[int]]:
        adj = {v: set() for v in range(1, self.n + 1)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={sorted(self.edges)})"


def incidence_graph(pi: Permutation) -> Graph:
    """Points are adjacent when consecutive in position or in value."""
    n = pi.n
    edges = set()
    for i in range(1, n):
        edges.add((i, i + 1))
    inv = pi.inverse().values
    for v in range(1, n):
        a, b = inv[v - 1], inv[v]
        edges.add((min(a, b), max(a, b)))
    return Graph(n, edges)


def incidence_structure(pi: Permutation) -> Structure:
    """The labeled incidence structure: vertices 1..n are points (by position),
    followed by one element per undirected edge of the incidence graph."""
    n = pi.n
    if n < 1:
        raise ValueError("the incidence structure needs at least one point")
    inv = pi.inverse().values
    succ1 = {(i, i + 1) for i in range(1, n)}
    succ2 = {tuple(sorted((inv[v - 1], inv[v]))) for v in range(1, n)}
    edge_list = sorted(succ1 | succ2)
    rels = {"vertex": set(), "edge": set(), "Inc": set(), "min1": set(), "min2": set(),
            "succ1": set(), "succ2": set()}
    for v in range(1, n + 1):
        rels["vertex"].add((v,))
    for k, (a, b) in enumerate(edge_list):
        e = n + 1 + k
        rels["edge"].add((e,))
        rels["Inc"].update({(e, a), (e, b)})
        if (a, b) in succ1:
            rels["succ1"].add((e,))
        if (a, b) in succ2:
            rels["succ2"].add((e,))
    rels["min1"].add((1,))
    rels["min2"].add((inv[0],))
    return Structure(INCIDENCE, n + len(edge_list), rels)


def incidence_edges(structure: Structure) -> dict[int, tuple[int, int]]:
    """Map each edge element of an incidence structure to its two endpoints."""
    ends: dict[int, list[int]] = {}
    for e, v in structure.relations["Inc"]:
        ends.setdefault(e, []).append(v)
    return {e: tuple(sorted(vs)) for e, vs in ends.items()}


# -- tree-width --------------------------------------------------------------

EXACT_LIMIT = 14


def treewidth(graph: Graph, mode: str = "exact") -> int:
    """Exact tree-width by the elimination-ordering subset DP, or a min-degree upper bound."""
    if mode == "exact":
        return _treewidth_exact(graph)
    if mode == "upper":
        return _treewidth_greedy(graph)
    raise ValueError(f"unknown mode {mode!r}")


def _treewidth_exact(graph: Graph) -> int:
    n = graph.n
    if n > EXACT_LIMIT:
        raise ValueError(f"exact tree-width is limited to {EXACT_LIMIT} vertices, got {n}")
    if n == 0:
        return -1
    adj = [0] * n
    for u, v in graph.edges:
        adj[u - 1] |= 1 << (v - 1)
        adj[v - 1] |= 1 << (u - 1)

    def q_size(s: int, v: int) -> int:
        # vertices outside s + v reachable from v through s
        seen = 1 << v
        frontier = 1 << v
        reach = 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                w = low.bit_length() - 1
                f ^= low
                nb = adj[w] & ~seen
                reach |= nb & ~s
                nxt |= nb & s
                seen |= nb
            frontier = nxt
        return bin(reach).count("1")

    full = (1 << n) - 1
    tw = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, full + 1):
        best = n
        bits = s
        while bits:
            low = bits & -bits
            v = low.bit_length() - 1
            bits ^= low
            rest = s ^ low
            cand = max(tw[rest], q_size(rest, v))
            if cand < best:
                best = cand
        tw[s] = best
    return tw[full]


def _treewidth_greedy(graph: Graph) -> int:
    adj = graph.neighbours()
    width = -1 if graph.n == 0 else 0
    remaining = set(adj)
    while remaining:
        v = min(remaining, key=lambda u: (len(adj[u] & remaining), u))
        nb = adj[v] & remaining
        width = max(width, len(nb))
        for a in nb:
            adj[a] |= nb - {a}
        remaining.remove(v)
    return width


# -- gridding matrices -------------------------------------------------------

class Cell(enum.Enum):
    EMPTY = "."
    INC = "/"
    DEC = "\\"


class GriddingMatrix:
    """A monotone gridding matrix; ``cells[c][r]`` with columns left to right and
    rows bottom to top, both 0-based internally.  Public coordinates are 1-based
    (column, row) pairs."""

    def __init__(self, cells: Sequence[Sequence[Cell]]):
        self.cells = [list(col) for col in cells]
        if not self.cells or any(len(c) != len(self.cells[0]) for c in self.cells):
            raise ValueError("gridding matrix must be a non-empty rectangle")

    @property
    def width(self) -> int:
        return len(self.cells)

    @property
    def height(self) -> int:
        return len(self.cells[0])

    def entry(self, col: int, row: int) -> Cell:
        return self.cells[col - 1][row - 1]

    @classmethod
    def parse(cls, text: str) -> "GriddingMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("gridding matrix rows must have equal length")
        try:
            rows = [[Cell(tok) for tok in r] for r in rows]
        except ValueError as exc:
            raise ValueError(f"bad cell symbol: {exc}") from None
        rows.reverse()
        return cls([[rows[r][c] for r in range(len(rows))] for c in range(len(rows[0]))])

    def format(self) -> str:
        out = []
        for r in reversed(range(self.height)):
            out.append(" ".join(self.cells[c][r].value for c in range(self.width)))
        return "\n".join(out) + "\n"

    def nonempty(self) -> list[tuple[int, int]]:
        return [(c + 1, r + 1) for c in range(self.width) for r in range(self.height)
                if self.cells[c][r] is not Cell.EMPTY]

    def cell_graph(self) -> dict[tuple[int, int], set[tuple[int, int]]]:
        cells = self.nonempty()
        adj = {v: set() for v in cells}
        by_col: dict[int, list] = {}
        by_row: dict[int, list] = {}
        for c, r in cells:
            by_col.setdefault(c, []).append((c, r))
            by_row.setdefault(r, []).append((c, r))
        for line in list(by_col.values()) + list(by_row.values()):
            line.sort()
            for a, b in zip(line, line[1:]):
                adj[a].add(b)
                adj[b].add(a)
        return adj

    def path_order(self) -> list[tuple[int, int]] | None:
        """The cells in path order starting at the leftmost endpoint, or None if the
        cell graph is not a path."""
        adj = self.cell_graph()
        if not adj:
            return None
        ends = [v for v, nb in adj.items() if len(nb) <= 1]
        if any(len(nb) > 2 for nb in adj.values()) or (len(adj) > 1 and len(ends) != 2):
            return None
        start = min(ends)
        order, prev = [start], None
        while len(order) < len(adj):
            nxt = [w for w in adj[order[-1]] if w != prev]
            if not nxt:
                return None
            prev = order[-1]
            order.append(nxt[0])
        return order


def staircase_matrix(k: int) -> GriddingMatrix:
    """k increasing cells climbing right, up, right, up, ... from the bottom-left corner."""
    if k < 1:
        raise ValueError("k must be positive")
    width = k // 2 + 1
    height = (k + 1) // 2
    cells = [[Cell.EMPTY] * height for _ in range(width)]
    for t in range(1, k + 1):
        cells[t // 2][(t + 1) // 2 - 1] = Cell.INC
    return GriddingMatrix(cells)


def validate_path_matrix(matrix: GriddingMatrix, length: int) -> list[tuple[int, int]]:
    """Check that the cell graph is a path on at least ``length`` cells with no three
    consecutive cells in one row or column, starting at the only non-empty cell of
    the leftmost column.  Returns the first ``length`` cells in path order."""
    order = matrix.path_order()
    if order is None:
        raise ValueError("cell graph is not a path")
    if len(order) < length:
        raise ValueError(f"cell graph path has {len(order)} cells, need {length}")
    for a, b, c in zip(order, order[1:], order[2:]):
        if a[0] == b[0] == c[0] or a[1] == b[1] == c[1]:
            raise ValueError(f"cells {a}, {b}, {c} are consecutive and collinear")
    leftmost = min(c for c, _ in order)
    in_left = [v for v in order if v[0] == leftmost]
    if len(in_left) != 1 or order[0] != in_left[0]:
        raise ValueError("the path must start at the only non-empty cell of the leftmost column")
    return order[:length]


def _cell_ok(values: list[int], cell: Cell) -> bool:
    if cell is Cell.EMPTY:
        return not values
    if cell is Cell.INC:
        return all(a < b for a, b in zip(values, values[1:]))
    return all(a > b for a, b in zip(values, values[1:]))


def _conforms(pi: Permutation, matrix: GriddingMatrix, cols, rows) -> bool:
    for c in range(matrix.width):
        for r in range(matrix.height):
            vals = [v for i, v in enumerate(pi.values, 1)
                    if cols[c] <= i < cols[c + 1] and rows[r] <= v < rows[r + 1]]
            if not _cell_ok(vals, matrix.cells[c][r]):
                return False
    return True


def check_gridding(pi: Permutation, matrix: GriddingMatrix, cuts=None):
    """Return (column cuts, row cuts) of an M-gridding of pi, or None.

    With ``cuts`` given they are only verified.  Otherwise column cuts are
    enumerated and row cuts are found by a dynamic program over rows.
    """
    n = pi.n
    k, l = matrix.width, matrix.height
    if cuts is not None:
        cols, rows = (list(c) for c in cuts)
        if len(cols) != k + 1 or len(rows) != l + 1:
            raise ValueError("cut sequences do not match the matrix size")
        if cols[0] != 1 or cols[-1] != n + 1 or rows[0] != 1 or rows[-1] != n + 1:
            return None
        if any(a > b for a, b in zip(cols, cols[1:])) or any(a > b for a, b in zip(rows, rows[1:])):
            return None
        return (cols, rows) if _conforms(pi, matrix, cols, rows) else None

    for inner in itertools.combinations_with_replacement(range(1, n + 2), k - 1):
        cols = [1, *inner, n + 1]
        rows = _row_cuts(pi, matrix, cols)
        if rows is not None:
            return cols, rows
    return None


def _row_cuts(pi: Permutation, matrix: GriddingMatrix, cols):
    n = pi.n
    col_of = {}
    for i, v in enumerate(pi.values, 1):
        for c in range(matrix.width):
            if cols[c] <= i < cols[c + 1]:
                col_of[v] = (c, i)
    # reach[j][t]: rows 0..j-1 fit with row j starting at value t
    l = matrix.height
    reach = [dict() for _ in range(l + 1)]
    reach[0][1] = None
    for j in range(l):
        for t in list(reach[j]):
            for u in range(t, n + 2):
                by_col = [[] for _ in range(matrix.width)]
                for v in range(t, u):
                    c, i = col_of[v]
                    by_col[c].append((i, v))
                ok = True
                for c in range(matrix.width):
                    vals = [v for _, v in sorted(by_col[c])]
                    if not _cell_ok(vals, matrix.cells[c][j]):
                        ok = False
                        break
                if ok and u not in reach[j + 1]:
                    reach[j + 1][u] = t
    if n + 1 not in reach[l]:
        return None
    rows = [n + 1]
    for j in range(l, 0, -1):
        rows.append(reach[j][rows[-1]])
    return rows[::-1]


# -- the spiral --------------------------------------------------------------

TRACKS = ("ground", "positive", "negative")

# block kind by index mod 4: direction from the previous block, arrow side
_KIND = {2: ("east", "bottom"), 3: ("south", "left"), 0: ("west", "top"), 1: ("north", "right")}


@dataclass
class SpiralBlock:
    index: int
    points: list[int]
    arrows: dict[str, list[int]] = field(default_factory=dict)
    direction: str = ""


@dataclass
class SpiralPlan:
    alpha: Permutation
    ell: int
    blocks: list[SpiralBlock]
    chunks: dict[str, list[int]]
    tracks: dict[str, list[list[int]]]
    coordinates: list[tuple[Fraction, Fraction]]

    def block_of(self) -> dict[int, int]:
        return {p: b.index for b in self.blocks for p in b.points}


def _arrow_shape(alpha: Permutation, side: str) -> Permutation:
    return remove_extreme(alpha, side)


def _strip(alpha: Permutation, side: str, pts: list[tuple[Fraction, Fraction]]):
    """The open strip of an arrow (shape alpha minus its ``side`` point) in which a
    point completes it to alpha.  Returns (axis, lo, hi); axis 0 is x, 1 is y."""
    m = alpha.n
    if side in ("right", "left"):
        v = alpha.values[-1] if side == "right" else alpha.values[0]
        ys = sorted(p[1] for p in pts)
        return 1, ys[v - 2], ys[v - 1]
    p = alpha.values.index(1 if side == "bottom" else m) + 1
    xs = sorted(q[0] for q in pts)
    return 0, xs[p - 2], xs[p - 1]


def spiral(ell: int, alpha: Permutation):
    """Build the spiral permutation pi_ell for a simple alpha containing 3142.

    Returns the permutation and a SpiralPlan whose point ids are positions in it.
    """
    if ell < 1:
        raise ValueError("ell must be positive")
    if alpha.n < 4:
        raise ValueError("alpha must have length at least 4")
    if not is_simple(alpha):
        raise ValueError(f"{alpha} is not simple")
    if not alpha.contains(Permutation.parse("3142")):
        raise ValueError(f"{alpha} avoids 3142; use its reverse")
    m = alpha.n
    right = _arrow_shape(alpha, "right")
    coords: list[tuple[Fraction, Fraction]] = []
    blocks: list[dict] = []

    # B1: alpha with the top point inflated by right+right, the bottom by right, the rest by alpha
    parts = []
    for v in alpha.values:
        parts.append(direct_sum(right, right) if v == m else right if v == 1 else alpha)
    b1 = inflate(alpha, parts)
    coords.extend((Fraction(i), Fraction(v)) for i, v in enumerate(b1.values, 1))
    starts = list(itertools.accumulate([0] + [p.n for p in parts]))
    top_at = alpha.values.index(m)
    bot_at = alpha.values.index(1)
    top = list(range(starts[top_at], starts[top_at + 1]))
    bottom = list(range(starts[bot_at], starts[bot_at + 1]))
    arrows = {"ground": top[m - 1:], "positive": top[:m - 1], "negative": bottom}
    blocks.append({"index": 1, "points": list(range(len(coords))), "arrows": arrows, "direction": "center"})
    prev_side = "right"

    for i in range(2, 4 * ell + 2):
        direction, side = _KIND[i % 4]
        shape = _arrow_shape(alpha, side)
        prev = blocks[-1]["arrows"]
        strips = {t: _strip(alpha, prev_side, [coords[p] for p in prev[t]]) for t in TRACKS}
        axis = strips["ground"][0]
        # order of the tracks across the perpendicular axis is forced by the strips
        perp_order = sorted(TRACKS, key=lambda t: strips[t][1])
        if i % 4 in (0, 2):
            along_order = perp_order
        elif i % 4 == 1:
            along_order = perp_order[::-1]
        else:
            # 231 inflated: sorted across x, the tracks take heights 2, 3, 1
            heights = dict(zip(perp_order, (1, 2, 0)))
            along_order = sorted(TRACKS, key=lambda t: heights[t])
        new_arrows = {}
        along_base = _along_base(coords, direction, 3 * (m - 1))
        for t in TRACKS:
            a = along_order.index(t)
            _, lo, hi = strips[t]
            ids = []
            for j, v in enumerate(shape.values):
                x_rank, y_rank = j + 1, v
                along_rank = x_rank if axis == 1 else y_rank
                perp_rank = y_rank if axis == 1 else x_rank
                along = along_base + a * (m - 1) + along_rank
                perp = lo + (hi - lo) * Fraction(perp_rank, m)
                coords.append((Fraction(along), perp) if axis == 1 else (perp, Fraction(along)))
                ids.append(len(coords) - 1)
            new_arrows[t] = ids
        blocks.append({"index": i, "points": [p for t in TRACKS for p in new_arrows[t]],
                       "arrows": new_arrows, "direction": direction})
        prev_side = side

    # last block: alpha, top point in range of the ground arrow, the rest in range of the middle arrow
    prev = blocks[-1]["arrows"]
    strips = {t: _strip(alpha, prev_side, [coords[p] for p in prev[t]]) for t in TRACKS}
    middle = sorted(TRACKS, key=lambda t: strips[t][1])[1]
    base = _along_base(coords, "east", m)
    ids = []
    _, glo, ghi = strips["ground"]
    _, mlo, mhi = strips[middle]
    for j, v in enumerate(alpha.values):
        y = (glo + ghi) / 2 if v == m else mlo + (mhi - mlo) * Fraction(v, m)
        coords.append((Fraction(base + j + 1), y))
        ids.append(len(coords) - 1)
    blocks.append({"index": 4 * ell + 2, "points": ids, "arrows": {}, "direction": "east"})

    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise AssertionError("spiral points are not in general position")
    order = sorted(range(len(coords)), key=lambda p: xs[p])
    position = {p: i + 1 for i, p in enumerate(order)}
    pi = standardize([ys[p] for p in order])

    def remap(ids_):
        return sorted(position[p] for p in ids_)

    plan_blocks = [SpiralBlock(b["index"], remap(b["points"]),
                               {t: remap(v) for t, v in b["arrows"].items()}, b["direction"])
                   for b in blocks]
    tracks = {t: [b.arrows[t] for b in plan_blocks if t in b.arrows] for t in TRACKS}
    chunks = {"top": remap(top), "bottom": remap(bottom)}
    ordered_coords = [coords[p] for p in order]
    return pi, SpiralPlan(alpha, ell, plan_blocks, chunks, tracks, ordered_coords)


def _along_base(coords, direction: str, size: int) -> int:
    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    if direction == "east":
        return math.ceil(max(xs))
    if direction == "north":
        return math.ceil(max(ys))
    if direction == "west":
        return math.floor(min(xs)) - size - 1
    if direction == "south":
        return math.floor(min(ys)) - size - 1
    raise ValueError(direction)


def in_range(pi: Permutation, arrow: Sequence[int], point: int, alpha: Permutation, side: str) -> bool:
    """Whether ``point`` completes the arrow to alpha on the far ``side``."""
    vals = pi.values
    px, py = point, vals[point - 1]
    xs = list(arrow)
    if side == "right" and not all(px > x for x in xs):
        return False
    if side == "left" and not all(px < x for x in xs):
        return False
    if side == "top" and not all(py > vals[x - 1] for x in xs):
        return False
    if side == "bottom" and not all(py < vals[x - 1] for x in xs):
        return False
    return pi.pattern_of(list(arrow) + [point]) == alpha
