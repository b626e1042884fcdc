"""Brute-force MSO model checking over finite structures.

Formulas are hash-consed and compiled to closures over a slot-indexed
environment.  Element values are 0-based indices; a set value is a pair
``(known, bits)`` of bit masks, so that a partially decided set can be fed
through the body under Kleene three-valued semantics (``None`` = unknown).
That lets the default set-quantifier strategy decide membership element by
element and cut a branch as soon as the body is already determined.
"""

from __future__ import annotations

import itertools
import sys
import time
from dataclasses import dataclass

from .logic import (
    Atom, BinOp, Card, Const, Eq, Formula, FormulaError, Member, Not, Quant, Structure,
    free_vars, is_set_name,
)

STRATEGIES = ("branching", "subsets")


class EvaluationError(FormulaError):
    pass


class BudgetExceeded(RuntimeError):
    """Raised when an evaluation visits more quantifier bodies than allowed."""


@dataclass
class EvalStats:
    nodes: int = 0
    runtime_ms: float = 0.0


def _popcount(x: int) -> int:
    return bin(x).count("1")




class _Compiled:
    """Compiled closures for one structure; the result cache lives here too."""

    def __init__(self, structure: Structure, strategy: str, budget: int | None):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown set strategy {strategy!r}; choose from {STRATEGIES}")
        self.structure = structure
        self.n = structure.domain_size
        self.full = (1 << self.n) - 1
        self.strategy = strategy
        self.budget = budget
        self.stats = EvalStats()
        self.slots: dict[str, int] = {}
        self.cache: dict = {}
        self._by_id: dict[int, tuple] = {}
        self._intern: dict = {}
        self._fns: dict[int, object] = {}
        self._free: dict[int, frozenset] = {}
        self.rel = {}
        for symbol, tuples in structure.relations.items():
            arity = structure.signature.arity(symbol)
            if arity == 1:
                mask = 0
                for (a,) in tuples:
                    mask |= 1 << (a - 1)
                self.rel[symbol] = mask
            elif arity == 2:
                rows = [0] * self.n
                for a, b in tuples:
                    rows[a - 1] |= 1 << (b - 1)
                self.rel[symbol] = rows
            else:
                self.rel[symbol] = frozenset(tuple(e - 1 for e in t) for t in tuples)

    # -- bookkeeping -------------------------------------------------------

    def slot(self, name: str) -> int:
        if name not in self.slots:
            self.slots[name] = len(self.slots)
        return self.slots[name]

    def tick(self):
        self.stats.nodes += 1
        if self.budget is not None and self.stats.nodes > self.budget:
            raise BudgetExceeded(f"evaluation exceeded the budget of {self.budget} nodes")

    def uid(self, f: Formula) -> int:
        hit = self._by_id.get(id(f))
        if hit is not None:
            return hit[0]
        if isinstance(f, Quant):
            key = ("Q", f.kind, f.var, f.is_set, self.uid(f.body))
        elif isinstance(f, BinOp):
            key = ("B", f.op, self.uid(f.left), self.uid(f.right))
        elif isinstance(f, Not):
            key = ("N", self.uid(f.sub))
        else:
            key = f
        u = self._intern.setdefault(key, len(self._intern))
        self._by_id[id(f)] = (u, f)
        return u

    def free(self, f: Formula) -> frozenset:
        u = self.uid(f)
        if u not in self._free:
            if isinstance(f, Quant):
                out = self.free(f.body) - {f.var}
            elif isinstance(f, BinOp):
                out = self.free(f.left) | self.free(f.right)
            elif isinstance(f, Not):
                out = self.free(f.sub)
            else:
                out = free_vars(f)
            self._free[u] = out
        return self._free[u]

    # -- compilation -------------------------------------------------------

    def compile(self, f: Formula):
        u = self.uid(f)
        fn = self._fns.get(u)
        if fn is None:
            fn = self._compile(f, u)
            self._fns[u] = fn
        return fn

    def _compile(self, f: Formula, u: int):
        if isinstance(f, Const):
            value = f.value
            return lambda env: value
        if isinstance(f, Eq):
            a, b = self.slot(f.left), self.slot(f.right)
            return lambda env: env[a] == env[b]
        if isinstance(f, Member):
            e, s = self.slot(f.element), self.slot(f.set)

            def member(env):
                known, bits = env[s]
                x = env[e]
                if (known >> x) & 1:
                    return bool((bits >> x) & 1)
                return None
            return member
        if isinstance(f, Card):
            return self._compile_card(f)
        if isinstance(f, Atom):
            return self._compile_atom(f)
        if isinstance(f, Not):
            sub = self.compile(f.sub)

            def negate(env):
                v = sub(env)
                return None if v is None else not v
            return negate
        if isinstance(f, BinOp):
            return self._compile_binop(f)
        if isinstance(f, Quant):
            if f.is_set:
                return self._compile_set_block(f, u)
            return self._compile_element_quant(f, u)
        raise TypeError(f"cannot evaluate {f!r}")

    def _compile_atom(self, f: Atom):
        rel = self.rel.get(f.symbol)
        arity = self.structure.signature.arity(f.symbol)
        if arity is None or arity != len(f.args):
            raise EvaluationError(f"relation {f.symbol}/{len(f.args)} is not in signature {self.structure.signature.name}")
        slots = [self.slot(a) for a in f.args]
        if arity == 1:
            (a,) = slots
            return lambda env: bool((rel >> env[a]) & 1)
        if arity == 2:
            a, b = slots
            return lambda env: bool((rel[env[a]] >> env[b]) & 1)
        return lambda env: tuple(env[s] for s in slots) in rel

    def _compile_card(self, f: Card):
        s, q, r, full = self.slot(f.set), f.q, f.r, self.full

        def card(env):
            known, bits = env[s]
            lo = _popcount(bits & known)
            if known == full:
                return lo % r == q
            hi = lo + _popcount(full & ~known)
            hits = [c for c in range(lo, min(hi, lo + r - 1) + 1) if c % r == q]
            if not hits:
                return False
            if lo == hi:
                return True
            return None
        return card

    def _compile_binop(self, f: BinOp):
        left, right = self.compile(f.left), self.compile(f.right)
        op = f.op
        if op == "&":
            def fn(env):
                a = left(env)
                if a is False:
                    return False
                b = right(env)
                if b is False:
                    return False
                return True if (a is True and b is True) else None
        elif op == "|":
            def fn(env):
                a = left(env)
                if a is True:
                    return True
                b = right(env)
                if b is True:
                    return True
                return False if (a is False and b is False) else None
        elif op == "->":
            def fn(env):
                a = left(env)
                if a is False:
                    return True
                b = right(env)
                if b is True:
                    return True
                return False if (a is True and b is False) else None
        elif op == "<->":
            def fn(env):
                a = left(env)
                if a is None:
                    return None
                b = right(env)
                if b is None:
                    return None
                return a == b
        else:
            raise TypeError(f"unknown connective {op!r}")
        return fn

    def _compile_element_quant(self, f: Quant, u: int):
        body = self.compile(f.body)
        s = self.slot(f.var)
        free_slots = tuple(sorted(self.slot(v) for v in self.free(f)))
        n, cache, tick = self.n, self.cache, self.tick
        is_exists = f.kind == "E"

        def quant(env):
            key = (u, tuple(env[i] for i in free_slots))
            hit = cache.get(key, cache)
            if hit is not cache:
                return hit
            old = env[s]
            result = not is_exists
            for a in range(n):
                env[s] = a
                tick()
                v = body(env)
                if v is None:
                    result = None
                elif v is is_exists:
                    result = v
                    break
            env[s] = old
            cache[key] = result
            return result
        return quant

    def _compile_set_block(self, f: Quant, u: int):
        names = [f.var]
        inner = f.body
        if self.strategy == "branching":
            while isinstance(inner, Quant) and inner.is_set and inner.kind == f.kind:
                names.append(inner.var)
                inner = inner.body
        body = self.compile(inner)
        block = [self.slot(v) for v in names]
        # a name repeated inside one block is shadowed; only the innermost copy is live
        if len(set(names)) != len(names):
            body = self.compile(f.body)
            block = block[:1]
            names = names[:1]
        free = self.free(f)
        free_slots = tuple(sorted(self.slot(v) for v in free))
        free_set_slots = tuple(self.slot(v) for v in free if is_set_name(v))
        n, full, cache, tick = self.n, self.full, self.cache, self.tick
        is_exists = f.kind == "E"
        width = len(block)
        # bit patterns for one element across the block, fewest members first
        combos = sorted(range(1 << width), key=lambda c: (_popcount(c), c))

        if self.strategy == "subsets":
            masks = sorted(range(full + 1), key=lambda m: (_popcount(m), m))
            (s,) = block

            def search(env):
                result = not is_exists
                for m in masks:
                    env[s] = (full, m)
                    tick()
                    v = body(env)
                    if v is None:
                        result = None
                    elif v is is_exists:
                        return v
                return result
        else:
            def search(env):
                if n == 0:
                    for s in block:
                        env[s] = (0, 0)
                    tick()
                    return body(env)

                def branch(i):
                    bit = 1 << i
                    base = [env[s] for s in block]
                    result = not is_exists
                    for c in combos:
                        for j, s in enumerate(block):
                            k, b = base[j]
                            env[s] = (k | bit, b | bit) if (c >> j) & 1 else (k | bit, b)
                        tick()
                        v = body(env)
                        if v is None and i + 1 < n:
                            v = branch(i + 1)
                        if v is None:
                            result = None
                        elif v is is_exists:
                            result = v
                            break
                    for j, s in enumerate(block):
                        env[s] = base[j]
                    return result

                for s in block:
                    env[s] = (0, 0)
                return branch(0)

        def quant(env):
            for i in free_set_slots:
                if env[i][0] != full:
                    return None
            key = (u, tuple(env[i] for i in free_slots))
            hit = cache.get(key, cache)
            if hit is not cache:
                return hit
            saved = [env[s] for s in block]
            result = search(env)
            for s, old in zip(block, saved):
                env[s] = old
            cache[key] = result
            return result
        return quant


class Evaluator:
    """Evaluates formulas on one structure.  Each public call uses a fresh cache."""

    def __init__(self, structure: Structure, strategy: str = "branching", budget: int | None = None):
        self.structure = structure
        self.strategy = strategy
        self.budget = budget
        self.last_stats = EvalStats()

    def _prepare(self, phi: Formula):
        self._check_signature(phi)
        return _Compiled(self.structure, self.strategy, self.budget)

    def _check_signature(self, phi: Formula):
        sig = self.structure.signature
        stack = [phi]
        seen = set()
        while stack:
            g = stack.pop()
            if id(g) in seen:
                continue
            seen.add(id(g))
            if isinstance(g, Atom):
                arity = sig.arity(g.symbol)
                if arity is None:
                    raise EvaluationError(f"relation {g.symbol!r} is not in signature {sig.name}")
                if arity != len(g.args):
                    raise EvaluationError(f"{g.symbol} has arity {arity}, used with {len(g.args)} arguments")
            elif isinstance(g, Card) and not sig.card_atoms_allowed:
                raise EvaluationError(f"signature {sig.name} does not allow cardinality atoms")
            elif isinstance(g, Not):
                stack.append(g.sub)
            elif isinstance(g, BinOp):
                stack.extend((g.left, g.right))
            elif isinstance(g, Quant):
                stack.append(g.body)

    def _bind(self, comp: _Compiled, phi: Formula, assignment, later=()) -> list:
        assignment = dict(assignment or {})
        missing = free_vars(phi) - set(assignment) - set(later)
        if missing:
            raise EvaluationError(f"unbound free variables: {', '.join(sorted(missing))}")
        fn = comp.compile(phi)
        env = [None] * len(comp.slots)
        n = comp.n
        for name, value in assignment.items():
            if name not in comp.slots:
                continue
            if is_set_name(name):
                bits = 0
                for e in value:
                    if not 1 <= e <= n:
                        raise EvaluationError(f"{name} contains {e}, outside the domain 1..{n}")
                    bits |= 1 << (e - 1)
                env[comp.slots[name]] = (comp.full, bits)
            else:
                if not 1 <= value <= n:
                    raise EvaluationError(f"{name} = {value} is outside the domain 1..{n}")
                env[comp.slots[name]] = value - 1
        return fn, env

    def evaluate(self, phi: Formula, assignment=None) -> bool:
        comp = self._prepare(phi)
        start = time.perf_counter()
        fn, env = self._bind(comp, phi, assignment)
        result = fn(env)
        comp.stats.runtime_ms = (time.perf_counter() - start) * 1000
        self.last_stats = comp.stats
        if result is None:
            raise EvaluationError("evaluation did not reach a definite value")
        return result

    def count_tuples(self, phi: Formula, variables) -> int:
        variables = list(variables)
        fv = free_vars(phi)
        if set(variables) != fv or any(is_set_name(v) for v in variables):
            raise EvaluationError(
                f"free variables {sorted(fv)} do not match the element variables {variables}"
            )
        comp = self._prepare(phi)
        start = time.perf_counter()
        fn, env = self._bind(comp, phi, {}, later=variables)
        slots = [comp.slots[v] for v in variables]
        count = 0
        for tup in itertools.product(range(comp.n), repeat=len(variables)):
            for s, a in zip(slots, tup):
                env[s] = a
            comp.tick()
            if fn(env):
                count += 1
        comp.stats.runtime_ms = (time.perf_counter() - start) * 1000
        self.last_stats = comp.stats
        return count


def evaluate(structure: Structure, phi: Formula, assignment=None, strategy: str = "branching",
             budget: int | None = None) -> bool:
    return Evaluator(structure, strategy, budget).evaluate(phi, assignment)


def count_tuples(structure: Structure, phi: Formula, variables, strategy: str = "branching",
                 budget: int | None = None) -> int:
    return Evaluator(structure, strategy, budget).count_tuples(phi, variables)


sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
