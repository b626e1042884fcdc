"""Admissible 2-colorings: is a permutation a merge of two alpha-avoiders?"""

from __future__ import annotations

from dataclasses import dataclass, field

from .perm import Permutation, occurrences

RED, BLUE = "red", "blue"
NAIVE_LIMIT = 20


class SolverLimit(ValueError):
    pass


@dataclass
class ColoringInstance:
    n: int
    constraints: list[tuple[int, ...]]
    coloring: dict[int, str] = field(default_factory=dict)

    @classmethod
    def build(cls, pi: Permutation, alpha: Permutation) -> "ColoringInstance":
        return cls(pi.n, occurrences(alpha, pi))


@dataclass
class SolveStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    probes: int = 0


class _Propagator:
    """Assignment with unit propagation over 'not monochromatic' constraints."""

    def __init__(self, instance: ColoringInstance, stats: SolveStats):
        self.n = instance.n
        self.cons = instance.constraints
        self.stats = stats
        self.watch = [[] for _ in range(self.n + 1)]
        for ci, c in enumerate(self.cons):
            for p in c:
                self.watch[p].append(ci)
        self.color = [None] * (self.n + 1)
        self.count = [[0, 0] for _ in self.cons]  # red, blue per constraint
        self.trail: list[int] = []

    def assign(self, p: int, col: int) -> bool:
        """Assign and propagate; False on conflict (the trail keeps what was set)."""
        queue = [(p, col)]
        while queue:
            p, col = queue.pop()
            cur = self.color[p]
            if cur is not None:
                if cur != col:
                    self.stats.conflicts += 1
                    return False
                continue
            self.color[p] = col
            self.trail.append(p)
            for ci in self.watch[p]:
                self.count[ci][col] += 1
            for ci in self.watch[p]:
                cnt = self.count[ci]
                size = len(self.cons[ci])
                if cnt[col] == size:
                    self.stats.conflicts += 1
                    return False
                if cnt[col] == size - 1 and cnt[1 - col] == 0:
                    for q in self.cons[ci]:
                        if self.color[q] is None:
                            self.stats.propagations += 1
                            queue.append((q, 1 - col))
                            break
        return True

    def undo(self, mark: int):
        while len(self.trail) > mark:
            p = self.trail.pop()
            col = self.color[p]
            for ci in self.watch[p]:
                self.count[ci][col] -= 1
            self.color[p] = None


def _as_dict(colors) -> dict[int, str]:
    return {p: RED if c == 0 else BLUE for p, c in enumerate(colors) if p > 0}


def propagate(pi: Permutation, alpha: Permutation, seeds: dict[int, str], instance=None):
    """Unit propagation from the seeded colors.  Returns (coloring of every forced
    point, conflict flag)."""
    instance = instance or ColoringInstance.build(pi, alpha)
    prop = _Propagator(instance, SolveStats())
    ok = True
    for p, c in seeds.items():
        if not prop.assign(p, 0 if c == RED else 1):
            ok = False
            break
    forced = {p: (RED if c == 0 else BLUE) for p, c in enumerate(prop.color) if p > 0 and c is not None}
    return forced, not ok


def admissible_coloring(pi: Permutation, alpha: Permutation, strategy: str = "propagate",
                        order=None, stats: SolveStats | None = None, probe_literals: bool = True,
                        seeds: dict[int, str] | None = None):
    """An admissible coloring as {position: 'red'|'blue'}, or None if there is none.

    ``order`` optionally lists positions in the order variables should be decided.
    With ``probe_literals`` each search node first rules out colors whose unit
    propagation already fails.  ``seeds`` fixes colors of some positions up front.
    """
    stats = stats if stats is not None else SolveStats()
    instance = ColoringInstance.build(pi, alpha)
    if strategy == "naive":
        if seeds:
            raise ValueError("the naive strategy does not take seeds")
        return _naive(instance, stats)
    if strategy != "propagate":
        raise ValueError(f"unknown strategy {strategy!r}")
    n = pi.n
    if n == 0:
        return {}
    prop = _Propagator(instance, stats)
    for p, c in (seeds or {}).items():
        if not prop.assign(p, 0 if c == RED else 1):
            return None
    seq = list(order) if order is not None else []
    seen = set(seq)
    seq += [p for p in range(1, n + 1) if p not in seen]

    def probe() -> bool:
        # failed-literal detection: a color that propagates to a conflict is ruled out
        changed = True
        while changed:
            changed = False
            for q in seq:
                if prop.color[q] is not None:
                    continue
                for col in (0, 1):
                    mark = len(prop.trail)
                    ok = prop.assign(q, col)
                    prop.undo(mark)
                    if not ok:
                        stats.probes += 1
                        if not prop.assign(q, 1 - col):
                            return False
                        changed = True
                        break
        return True

    def search(idx: int) -> bool:
        mark = len(prop.trail)
        if probe_literals and not probe():
            prop.undo(mark)
            return False
        while idx < n and prop.color[seq[idx]] is not None:
            idx += 1
        if idx == n:
            return True
        p = seq[idx]
        for col in (0, 1):
            inner = len(prop.trail)
            stats.decisions += 1
            if prop.assign(p, col) and search(idx + 1):
                return True
            prop.undo(inner)
        prop.undo(mark)
        return False

    # try the first variable red, then restart with it blue
    if search(0):
        return _as_dict(prop.color)
    return None


def _naive(instance: ColoringInstance, stats: SolveStats):
    n = instance.n
    if n > NAIVE_LIMIT:
        raise SolverLimit(f"naive strategy is limited to {NAIVE_LIMIT} points, got {n}")
    masks = [sum(1 << (p - 1) for p in c) for c in instance.constraints]
    for blue in range(1 << n):
        stats.decisions += 1
        if all((blue & m) != m and (blue & m) != 0 for m in masks):
            return {p: BLUE if (blue >> (p - 1)) & 1 else RED for p in range(1, n + 1)}
    return None


def verify_coloring(pi: Permutation, alpha: Permutation, coloring: dict[int, str]) -> bool:
    """True iff neither color class contains alpha."""
    if set(coloring) != set(range(1, pi.n + 1)):
        raise ValueError("coloring must assign every position")
    if any(c not in (RED, BLUE) for c in coloring.values()):
        raise ValueError("colors must be 'red' or 'blue'")
    for col in (RED, BLUE):
        part = [p for p in range(1, pi.n + 1) if coloring[p] == col]
        if pi.pattern_of(part).contains(alpha):
            return False
    return True


def spiral_order(plan) -> list[int]:
    """Chunks first, then arrows block by block, then everything else."""
    order = list(plan.chunks["top"]) + list(plan.chunks["bottom"])
    for block in plan.blocks:
        for t in ("ground", "positive", "negative"):
            order.extend(block.arrows.get(t, ()))
    seen = set()
    out = []
    for p in order + [p for b in plan.blocks for p in b.points]:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out
