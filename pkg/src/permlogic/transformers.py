"""Formula-to-formula constructions: relativization, merges, modular counting,
cardinality-atom expansion, word simulation and the incidence interpretation."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .logic import (
    FALSE, TOTO, Atom, BinOp, Card, Const, Eq, Formula, FormulaError, Member, Not, NameSupply, Quant,
    atom, conj, disj, exists, forall, free_vars, iff, implies, is_set_name, iter_nodes, lt1, lt2, neg,
    rename_free,
)
from .perm import VincularPattern


# -- small predicates --------------------------------------------------------

def subset(a: str, b: str, x: str) -> Formula:
    """a is a subset of b, using x as the bound element variable."""
    return forall(x, implies(Member(x, a), Member(x, b)))


def proper_subset(a: str, b: str, x: str) -> Formula:
    return conj(subset(a, b, x), exists(x, conj(Member(x, b), neg(Member(x, a)))))


def partition(sets: Sequence[str], x: str = "x") -> Formula:
    """Every element lies in exactly one of the given sets."""
    cover = disj(*(Member(x, s) for s in sets))
    disjoint = [neg(conj(Member(x, a), Member(x, b)))
                for i, a in enumerate(sets) for b in sets[i + 1:]]
    return forall(x, conj(cover, *disjoint))


def increasing(X: str, x: str = "x", y: str = "y") -> Formula:
    return forall(x, forall(y, implies(conj(Member(x, X), Member(y, X)), iff(lt1(x, y), lt2(x, y)))))


def decreasing(X: str, x: str = "x", y: str = "y") -> Formula:
    return forall(x, forall(y, implies(conj(Member(x, X), Member(y, X)), iff(lt1(x, y), lt2(y, x)))))


def skew_merged_sentence() -> Formula:
    """Union of an increasing and a decreasing sequence."""
    return exists("X", exists("Y", conj(partition(["X", "Y"]), increasing("X"), decreasing("Y"))))


INCREASING_SENTENCE = forall("x", forall("y", iff(lt1("x", "y"), lt2("x", "y"))))
DECREASING_SENTENCE = forall("x", forall("y", iff(lt1("x", "y"), lt2("y", "x"))))


def successor1(y: str, z: str, w: str) -> Formula:
    """z is the leftmost element to the right of y."""
    return conj(lt1(y, z), neg(exists(w, conj(lt1(y, w), lt1(w, z)))))


def le1(x: str, y: str) -> Formula:
    return disj(lt1(x, y), Eq(x, y))


def pattern_formula(pattern, variables: Sequence[str] | None = None) -> Formula:
    """FO formula whose satisfying tuples are exactly the occurrences of a
    classical or vincular pattern (variables listed left to right)."""
    if not isinstance(pattern, VincularPattern):
        pattern = VincularPattern(pattern)
    k = pattern.pattern.n
    xs = list(variables) if variables is not None else [f"x{i}" for i in range(1, k + 1)]
    if len(xs) != k:
        raise ValueError(f"pattern of length {k} needs {k} variables")
    vals = pattern.pattern.values
    parts = []
    for i in range(k - 1):
        parts.append(lt1(xs[i], xs[i + 1]))
    for i in range(k):
        for j in range(i + 1, k):
            parts.append(lt2(xs[i], xs[j]) if vals[i] < vals[j] else lt2(xs[j], xs[i]))
    supply = NameSupply(taken=xs)
    for i in sorted(pattern.adjacent):
        w = supply.element()
        parts.append(neg(exists(w, conj(lt1(xs[i - 1], w), lt1(w, xs[i])))))
    return conj(*parts)


def descent_formula(x: str = "x") -> Formula:
    """x sits at a descent: its right neighbour is lower."""
    return exists("y", conj(successor1(x, "y", "w"), lt2("y", x)))


def inversion_formula(x: str = "x", y: str = "y") -> Formula:
    return conj(lt1(x, y), lt2(y, x))


# -- relativization and merges -----------------------------------------------

def _bound_names(f: Formula) -> set[str]:
    return {g.var for g in iter_nodes(f) if isinstance(g, Quant)}


def relativize(phi: Formula, X: str) -> Formula:
    """Restrict every quantifier of phi to the set X."""
    if not is_set_name(X):
        raise FormulaError(f"{X!r} is not a set variable name")
    if X in _bound_names(phi):
        raise FormulaError(f"{X} occurs bound in the formula")
    supply = NameSupply(phi, taken=[X])
    guard_var = supply.element()

    def go(g):
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            body = go(g.body)
            if g.is_set:
                guard = subset(g.var, X, guard_var)
            else:
                guard = Member(g.var, X)
            inner = conj(guard, body) if g.kind == "E" else implies(guard, body)
            return Quant(g.kind, g.var, g.is_set, inner)
        return g

    return go(phi)


def merge_sentence(parts: Sequence[Formula]) -> Formula:
    """Some partition of the domain into len(parts) sets satisfies each part on its own set."""
    if not parts:
        raise ValueError("need at least one part")
    for i, p in enumerate(parts):
        if free_vars(p):
            raise FormulaError(f"part {i + 1} has free variables {sorted(free_vars(p))}")
    supply = NameSupply(*parts)
    sets = [supply.set() for _ in parts]
    x = supply.element()
    body = conj(partition(sets, x), *(relativize(p, s) for p, s in zip(parts, sets)))
    for s in reversed(sets):
        body = exists(s, body)
    return body


# -- modular counting --------------------------------------------------------

def _modular_count(phi: Formula, q: int, r: int, variables: Sequence[str],
                   supply: NameSupply | None = None) -> Formula:
    if r < 2 or not 0 <= q < r:
        raise ValueError(f"need r >= 2 and 0 <= q < r, got q={q}, r={r}")
    k = len(variables)
    if supply is None:
        supply = NameSupply(phi, taken=variables)
    else:
        supply.reserve(phi)

    names = []
    for _ in range(k):
        names.append({
            "X": [supply.set() for _ in range(r)],
            "first": supply.element(), "last": supply.element(),
            "y": supply.element(), "z": supply.element(), "w": supply.element(),
            "p": supply.element(),
        })

    @lru_cache(maxsize=None)
    def psi(level: int, s: int) -> Formula:
        if level == k:
            if s == 0:
                return neg(phi)
            if s == 1:
                return phi
            return FALSE
        nm = names[level]
        X, xf, xl, y, z = nm["X"], nm["first"], nm["last"], nm["y"], nm["z"]
        var = variables[level]

        @lru_cache(maxsize=None)
        def child(a: int, target: str) -> Formula:
            return rename_free(psi(level + 1, a), {var: target}, supply)

        bounds = forall(y, conj(le1(xf, y), le1(y, xl)))
        first = conj(*(implies(child(a, xf), Member(xf, X[a])) for a in range(r)))
        steps = conj(*(
            implies(conj(Member(y, X[a]), child(b, z)), Member(z, X[(a + b) % r]))
            for a in range(r) for b in range(r)
        ))
        chain = forall(y, forall(z, implies(successor1(y, z, nm["w"]), steps)))
        body = conj(partition(X, nm["p"]), bounds, first, chain, Member(xl, X[s]))
        out = exists(xf, exists(xl, body))
        for name in reversed(X):
            out = exists(name, out)
        return out

    return psi(0, q)


def modular_count_sentence(phi: Formula, q: int, r: int, variables: Sequence[str] | None = None) -> Formula:
    """A sentence true on a permutation iff the number of tuples satisfying phi is q mod r.

    ``variables`` fixes the order of phi's free element variables (sorted by default).
    """
    fv = free_vars(phi)
    if any(is_set_name(v) for v in fv):
        raise FormulaError(f"free set variables are not allowed: {sorted(v for v in fv if is_set_name(v))}")
    if variables is None:
        variables = sorted(fv)
    variables = list(variables)
    if set(variables) != fv or len(set(variables)) != len(variables):
        raise FormulaError(f"variables {variables} do not match the free variables {sorted(fv)}")
    return _modular_count(phi, q, r, variables)


def expand_card(phi: Formula) -> Formula:
    """Replace every card[q,r](X) atom by an equivalent plain MSO formula."""
    cache: dict = {}
    supply = NameSupply(phi)

    def go(g):
        if isinstance(g, Card):
            key = (g.q, g.r, g.set)
            if key not in cache:
                x = supply.element()
                cache[key] = _modular_count(Member(x, g.set), g.q, g.r, [x], supply)
            return cache[key]
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            return Quant(g.kind, g.var, g.is_set, go(g.body))
        return g

    if not any(isinstance(g, Card) for g in iter_nodes(phi)):
        return phi
    return go(phi)


# -- word simulation ---------------------------------------------------------

def _require_toto(phi: Formula):
    for g in iter_nodes(phi):
        if isinstance(g, Atom) and g.symbol not in ("<1", "<2"):
            raise FormulaError(f"atom {g.symbol} is not a TOTO atom")
        if isinstance(g, Card):
            raise FormulaError("cardinality atoms must be expanded first")


def word_simulation(phi: Formula) -> Formula:
    """Translate a TOTO sentence so that a^k b a^l satisfies the result iff pi_kl(k, l) satisfies phi."""
    _require_toto(phi)
    xb = NameSupply(phi).element("b")

    def lt(a, b):
        return Atom("<", (a, b))

    def value_less(x, y):
        same_side = conj(lt(x, y), disj(conj(lt(x, xb), lt(y, xb)), conj(lt(xb, x), lt(xb, y))))
        across = conj(lt(y, x), disj(
            conj(lt(y, xb), lt(xb, x)),
            conj(lt(y, xb), Eq(x, xb)),
            conj(Eq(y, xb), lt(xb, x)),
        ))
        return disj(same_side, across)

    def go(g):
        if isinstance(g, Atom):
            x, y = g.args
            return lt(x, y) if g.symbol == "<1" else value_less(x, y)
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            return Quant(g.kind, g.var, g.is_set, go(g.body))
        return g

    t = NameSupply(phi, taken=[xb]).element()
    unique = forall(t, implies(atom("Pb", t), Eq(t, xb)))
    return exists(xb, conj(atom("Pb", xb), unique, go(phi)))


# -- incidence interpretation ------------------------------------------------

def interpret_incidence(phi: Formula) -> Formula:
    """Translate a TOTO formula to the labeled incidence signature."""
    _require_toto(phi)
    supply = NameSupply(phi)
    E, F = supply.set(), supply.set()
    e, v, f, g_, s = (supply.element() for _ in range(5))

    def deg1(vertex_var: str, edges: str) -> Formula:
        only = forall(g_, implies(conj(Member(g_, edges), atom("Inc", g_, vertex_var)), Eq(g_, f)))
        return exists(f, conj(Member(f, edges), atom("Inc", f, vertex_var), only))

    def path(alpha: int, x: str, edges: str) -> Formula:
        labelled = forall(e, implies(Member(e, edges), atom(f"succ{alpha}", e)))
        empty = forall(e, neg(Member(e, edges)))
        ends = forall(v, iff(deg1(v, edges), disj(Eq(v, x), atom(f"min{alpha}", v))))
        return conj(labelled, disj(conj(empty, atom(f"min{alpha}", x)), ends))

    def order(alpha: int, x: str, y: str) -> Formula:
        return exists(E, exists(F, conj(path(alpha, x, E), path(alpha, y, F), proper_subset(E, F, s))))

    def go(g):
        if isinstance(g, Atom):
            return order(1 if g.symbol == "<1" else 2, *g.args)
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            body = go(g.body)
            if g.is_set:
                guard = forall(s, implies(Member(s, g.var), atom("vertex", s)))
            else:
                guard = atom("vertex", g.var)
            inner = conj(guard, body) if g.kind == "E" else implies(guard, body)
            return Quant(g.kind, g.var, g.is_set, inner)
        return g

    return go(phi)


# -- major index -------------------------------------------------------------

def maj_mod_sentence(r: int = 3, q: int = 0) -> Formula:
    """Sentence saying maj is q mod r, via the four vincular pattern counts."""
    from .perm import MAJ_PATTERNS

    counters = []
    for vp in MAJ_PATTERNS:
        phi = pattern_formula(vp)
        vars_ = [f"x{i}" for i in range(1, vp.pattern.n + 1)]
        counters.append([modular_count_sentence(phi, a, r, vars_) for a in range(r)])
    terms = []
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    if (a + b + c + d) % r == q:
                        terms.append(conj(counters[0][a], counters[1][b], counters[2][c], counters[3][d]))
    return disj(*terms)
