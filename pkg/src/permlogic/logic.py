"""Signatures, finite structures and the MSO formula language.

Formulas are immutable trees.  Element variables start (after any leading
underscores) with a lowercase letter, set variables with an uppercase one.
Names starting with ``_g`` / ``_G`` are reserved for generated variables.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        if position is not None and text is not None:
            snippet = text[max(0, position - 10):position + 10]
            message = f"{message} at position {position} (near {snippet!r})"
        super().__init__(message)


# -- signatures and structures -----------------------------------------------

@dataclass(frozen=True)
class Signature:
    name: str
    relations: tuple[tuple[str, int], ...]
    set_atoms_allowed: bool = True
    card_atoms_allowed: bool = True

    def __post_init__(self):
        symbols = [s for s, _ in self.relations]
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate relation symbols in {self.name}")
        if any(a < 1 for _, a in self.relations):
            raise ValueError("arities must be positive")

    def arity(self, symbol: str) -> int | None:
        for s, a in self.relations:
            if s == symbol:
                return a
        return None

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.relations)


TOTO = Signature("toto", (("<1", 2), ("<2", 2)))
TOLO = Signature("tolo", (("<", 2),))
TOG = Signature("graph", (("E", 2),))
INCIDENCE = Signature(
    "incidence",
    (("vertex", 1), ("edge", 1), ("Inc", 2), ("min1", 1), ("min2", 1), ("succ1", 1), ("succ2", 1)),
)


def word_signature(alphabet: str = "ab") -> Signature:
    return Signature("word", (("<", 2),) + tuple((f"P{c}", 1) for c in alphabet))


SIGNATURES = {"toto": TOTO, "tolo": TOLO, "graph": TOG, "incidence": INCIDENCE, "word": word_signature()}


class Structure:
    """A finite relational structure with domain {1, ..., n}."""

    def __init__(self, signature: Signature, domain_size: int, relations: Mapping[str, Iterable[tuple]]):
        self.signature = signature
        self.domain_size = domain_size
        rels = {}
        for symbol, arity in signature.relations:
            tuples = frozenset(tuple(t) for t in relations.get(symbol, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong arity for {symbol}/{arity}")
                if any(not 1 <= e <= domain_size for e in t):
                    raise ValueError(f"tuple {t} of {symbol} leaves the domain")
            rels[symbol] = tuples
        unknown = set(relations) - set(rels)
        if unknown:
            raise ValueError(f"symbols {sorted(unknown)} are not in signature {signature.name}")
        self.relations = rels

    @property
    def domain(self) -> range:
        return range(1, self.domain_size + 1)

    def __repr__(self):
        return f"Structure({self.signature.name}, n={self.domain_size})"

    def relabel(self, mapping: Mapping[int, int]) -> "Structure":
        """An isomorphic copy with element e renamed to mapping[e]."""
        rels = {s: {tuple(mapping[e] for e in t) for t in ts} for s, ts in self.relations.items()}
        return Structure(self.signature, self.domain_size, rels)

    def substructure(self, elements: Iterable[int]) -> "Structure":
        """The induced substructure on ``elements``, renumbered in increasing order."""
        elems = sorted(elements)
        index = {e: i for i, e in enumerate(elems, 1)}
        rels = {
            s: {tuple(index[e] for e in t) for t in ts if all(e in index for e in t)}
            for s, ts in self.relations.items()
        }
        return Structure(self.signature, len(elems), rels)


def _order_pairs(seq: Sequence[int]) -> set[tuple[int, int]]:
    return {(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))}


def structure_of_permutation(pi) -> Structure:
    """Elements are positions; <1 orders positions, <2 orders values."""
    n = len(pi)
    by_value = sorted(range(1, n + 1), key=lambda i: pi[i - 1])
    return Structure(TOTO, n, {"<1": _order_pairs(list(range(1, n + 1))), "<2": _order_pairs(by_value)})


def structure_of_word(word: str, alphabet: str = "ab") -> Structure:
    for c in word:
        if c not in alphabet:
            raise ValueError(f"letter {c!r} is not in the alphabet {alphabet!r}")
    n = len(word)
    rels = {"<": _order_pairs(list(range(1, n + 1)))}
    for c in alphabet:
        rels[f"P{c}"] = {(i,) for i, x in enumerate(word, 1) if x == c}
    return Structure(word_signature(alphabet), n, rels)


def structure_of_linear_order(n: int) -> Structure:
    return Structure(TOLO, n, {"<": _order_pairs(list(range(1, n + 1)))})


def structure_of_graph(n: int, edges: Iterable[tuple[int, int]]) -> Structure:
    rel = set()
    for u, v in edges:
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        rel.add((u, v))
        rel.add((v, u))
    return Structure(TOG, n, {"E": rel})


# -- formulas ----------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True, eq=True)
class Atom(Formula):
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True, eq=True)
class Member(Formula):
    element: str
    set: str


@dataclass(frozen=True, eq=True)
class Card(Formula):
    q: int
    r: int
    set: str


@dataclass(frozen=True, eq=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True, eq=True)
class Not(Formula):
    sub: Formula


BINARY_OPS = ("<->", "->", "|", "&")
_PREC = {"<->": 1, "->": 2, "|": 3, "&": 4}


@dataclass(frozen=True, eq=True)
class BinOp(Formula):
    op: str
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Quant(Formula):
    """``kind`` is 'E' or 'A'; ``is_set`` marks a set quantifier."""

    kind: str
    var: str
    is_set: bool
    body: Formula


TRUE = Const(True)
FALSE = Const(False)


def is_set_name(name: str) -> bool:
    stripped = name.lstrip("_")
    return bool(stripped) and stripped[0].isupper()


def is_element_name(name: str) -> bool:
    stripped = name.lstrip("_")
    return bool(stripped) and stripped[0].islower()


# builders; keep the tree left-nested so that printing and parsing agree

def atom(symbol: str, *args: str) -> Atom:
    return Atom(symbol, tuple(args))


def lt1(x, y):
    return Atom("<1", (x, y))


def lt2(x, y):
    return Atom("<2", (x, y))


def neg(f: Formula) -> Formula:
    return Not(f)


def conj(*fs: Formula) -> Formula:
    fs = [f for f in fs if f != TRUE]
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = BinOp("&", out, f)
    return out


def disj(*fs: Formula) -> Formula:
    fs = [f for f in fs if f != FALSE]
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = BinOp("|", out, f)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return BinOp("->", a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return BinOp("<->", a, b)


def exists(var: str, body: Formula) -> Formula:
    return Quant("E", var, is_set_name(var), body)


def forall(var: str, body: Formula) -> Formula:
    return Quant("A", var, is_set_name(var), body)


def exists_all(names: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(names)):
        body = exists(v, body)
    return body


def forall_all(names: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(names)):
        body = forall(v, body)
    return body


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.sub,)
    if isinstance(f, BinOp):
        return (f.left, f.right)
    if isinstance(f, Quant):
        return (f.body,)
    return ()


def iter_nodes(f: Formula):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def atom_vars(f: Formula) -> tuple[str, ...]:
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    if isinstance(f, Member):
        return (f.element, f.set)
    if isinstance(f, Card):
        return (f.set,)
    return ()


def free_vars(f: Formula) -> frozenset[str]:
    memo: dict[int, frozenset] = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, Quant):
            out = go(g.body) - {g.var}
        elif isinstance(g, (Not, BinOp)):
            out = frozenset().union(*(go(c) for c in children(g)))
        else:
            out = frozenset(atom_vars(g))
        memo[key] = out
        return out

    return go(f)


def all_names(f: Formula) -> set[str]:
    names = set()
    for g in iter_nodes(f):
        names.update(atom_vars(g))
        if isinstance(g, Quant):
            names.add(g.var)
    return names


@dataclass(frozen=True)
class FormulaInfo:
    free_element_vars: frozenset
    free_set_vars: frozenset
    quantifier_depth: int
    node_count: int


def quantifier_depth(f: Formula) -> int:
    memo: dict[int, int] = {}

    def go(g):
        key = id(g)
        if key not in memo:
            if isinstance(g, Quant):
                memo[key] = go(g.body) + 1
            elif isinstance(g, Not):
                memo[key] = go(g.sub)
            elif isinstance(g, BinOp):
                memo[key] = max(go(g.left), go(g.right))
            else:
                memo[key] = 0
        return memo[key]

    return go(f)


def node_count(f: Formula) -> int:
    return sum(1 for _ in iter_nodes(f))


def analyze(f: Formula) -> FormulaInfo:
    fv = free_vars(f)
    return FormulaInfo(
        free_element_vars=frozenset(v for v in fv if not is_set_name(v)),
        free_set_vars=frozenset(v for v in fv if is_set_name(v)),
        quantifier_depth=quantifier_depth(f),
        node_count=node_count(f),
    )


def symbols_used(f: Formula) -> set[str]:
    return {g.symbol for g in iter_nodes(f) if isinstance(g, Atom)}


def check_signature(f: Formula, signature: Signature) -> None:
    for g in iter_nodes(f):
        if isinstance(g, Atom):
            arity = signature.arity(g.symbol)
            if arity is None:
                raise FormulaError(f"relation {g.symbol!r} is not in signature {signature.name}")
            if arity != len(g.args):
                raise FormulaError(f"{g.symbol} has arity {arity}, used with {len(g.args)} arguments")
        elif isinstance(g, Member) and not signature.set_atoms_allowed:
            raise FormulaError(f"signature {signature.name} does not allow membership atoms")
        elif isinstance(g, Card) and not signature.card_atoms_allowed:
            raise FormulaError(f"signature {signature.name} does not allow cardinality atoms")


# -- fresh names and substitution --------------------------------------------

class NameSupply:
    """Generates names not occurring in any of the given formulas."""

    def __init__(self, *formulas: Formula, taken: Iterable[str] = ()):
        self.taken = set(taken)
        for f in formulas:
            self.taken |= all_names(f)
        self._counter = itertools.count(1)

    def reserve(self, *formulas: Formula):
        for f in formulas:
            self.taken |= all_names(f)

    def element(self, hint: str = "") -> str:
        return self._fresh("_g" + hint)

    def set(self, hint: str = "") -> str:
        return self._fresh("_G" + hint)

    def like(self, name: str) -> str:
        return self.set() if is_set_name(name) else self.element()

    def _fresh(self, prefix: str) -> str:
        while True:
            name = f"{prefix}{next(self._counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def rename_free(f: Formula, mapping: Mapping[str, str], supply: NameSupply | None = None) -> Formula:
    """Capture-avoiding renaming of free variables."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return f
    if supply is None:
        supply = NameSupply(f, taken=set(mapping) | set(mapping.values()))
    targets = set(mapping.values())

    def go(g, m):
        if not m:
            return g
        if isinstance(g, Atom):
            return Atom(g.symbol, tuple(m.get(a, a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(m.get(g.left, g.left), m.get(g.right, g.right))
        if isinstance(g, Member):
            return Member(m.get(g.element, g.element), m.get(g.set, g.set))
        if isinstance(g, Card):
            return Card(g.q, g.r, m.get(g.set, g.set))
        if isinstance(g, Const):
            return g
        if isinstance(g, Not):
            return Not(go(g.sub, m))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left, m), go(g.right, m))
        if isinstance(g, Quant):
            inner = {k: v for k, v in m.items() if k != g.var}
            var, body = g.var, g.body
            if var in targets and inner:
                new = supply.like(var)
                body = go(body, {var: new})
                var = new
            return Quant(g.kind, var, g.is_set, go(body, inner))
        raise TypeError(g)

    return go(f, dict(mapping))


def normalize(f: Formula) -> Formula:
    """Rename binders so that no variable is bound twice on a root-to-leaf path
    and no bound variable shadows a free one."""
    supply = NameSupply(f)
    free = free_vars(f)

    def go(g, live):
        if isinstance(g, Not):
            return Not(go(g.sub, live))
        if isinstance(g, BinOp):
            return BinOp(g.op, go(g.left, live), go(g.right, live))
        if isinstance(g, Quant):
            if g.var in live:
                new = supply.like(g.var)
                body = rename_free(g.body, {g.var: new}, supply)
                return Quant(g.kind, new, g.is_set, go(body, live | {new}))
            return Quant(g.kind, g.var, g.is_set, go(g.body, live | {g.var}))
        return g

    return go(f, frozenset(free))


# -- printing ----------------------------------------------------------------

_INFIX = {"<1", "<2", "<"}


def format_formula(f: Formula) -> str:
    def go(g, ctx):
        # ctx: minimal precedence allowed without parentheses
        if isinstance(g, Atom):
            if g.symbol in _INFIX and len(g.args) == 2:
                return f"{g.args[0]} {g.symbol} {g.args[1]}"
            return f"{g.symbol}({','.join(g.args)})"
        if isinstance(g, Eq):
            return f"{g.left} = {g.right}"
        if isinstance(g, Member):
            return f"{g.element} in {g.set}"
        if isinstance(g, Card):
            return f"card[{g.q},{g.r}]({g.set})"
        if isinstance(g, Const):
            return "true" if g.value else "false"
        if isinstance(g, Not):
            return "!" + go(g.sub, 5)
        if isinstance(g, BinOp):
            p = _PREC[g.op]
            s = f"{go(g.left, p)} {g.op} {go(g.right, p + 1)}"
            return f"({s})" if p < ctx else s
        if isinstance(g, Quant):
            q = g.kind + ("S" if g.is_set else "")
            s = f"{q} {g.var}. {go(g.body, 0)}"
            return f"({s})" if ctx > 0 else s
        raise TypeError(g)

    return go(f, 0)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|<1|<2|<|=|!|&|\||\(|\)|,|\.|\[|\])|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*))"
)
_QUANTS = {"E": ("E", False), "A": ("A", False), "ES": ("E", True), "AS": ("A", True)}


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, signature: Signature | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.signature = signature

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def parse(self):
        f = self.formula()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def formula(self, level=1):
        if level > 4:
            return self.unary()
        left = self.formula(level + 1)
        op = [o for o, p in _PREC.items() if p == level][0]
        while self.peek() == ("op", op, self.peek()[2]):
            self.next()
            right = self.formula(level + 1)
            left = BinOp(op, left, right)
        return left

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "!"):
            self.next()
            return Not(self.unary())
        if tok[0] == "id" and tok[1] in _QUANTS and self.peek(1)[0] == "id" and self.peek(2)[1] == ".":
            self.next()
            kind, is_set = _QUANTS[tok[1]]
            var_tok = self.next()
            var = var_tok[1]
            if is_set and not is_set_name(var):
                self.error(f"set quantifier needs an uppercase variable, got {var!r}", var_tok)
            if not is_set and not is_element_name(var):
                self.error(f"element quantifier needs a lowercase variable, got {var!r}", var_tok)
            self.expect(".")
            return Quant(kind, var, is_set, self.formula())
        return self.primary()

    def element_var(self):
        tok = self.next()
        if tok[0] != "id" or not is_element_name(tok[1]):
            self.error(f"expected an element variable, found {tok[1]!r}", tok)
        return tok[1]

    def set_var(self):
        tok = self.next()
        if tok[0] != "id" or not is_set_name(tok[1]):
            self.error(f"expected a set variable, found {tok[1]!r}", tok)
        return tok[1]

    def check_symbol(self, symbol, arity, tok):
        if self.signature is None:
            return
        declared = self.signature.arity(symbol)
        if declared is None:
            self.error(f"unknown relation symbol {symbol!r} for signature {self.signature.name}", tok)
        if declared != arity:
            self.error(f"{symbol} has arity {declared}, used with {arity} arguments", tok)

    def primary(self):
        tok = self.peek()
        if tok[:2] == ("op", "("):
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if tok[0] != "id":
            self.error(f"unexpected {tok[1] or 'end of input'!r}")
        name = tok[1]
        if name in ("true", "false") and self.peek(1)[1] != "(":
            self.next()
            return Const(name == "true")
        if name == "card" and self.peek(1)[1] == "[":
            self.next()
            self.expect("[")
            q = self.number()
            self.expect(",")
            r = self.number()
            self.expect("]")
            self.expect("(")
            s = self.set_var()
            self.expect(")")
            if r < 2 or not 0 <= q < r:
                self.error(f"card[{q},{r}] needs r >= 2 and 0 <= q < r", tok)
            if self.signature is not None and not self.signature.card_atoms_allowed:
                self.error("cardinality atoms are not allowed here", tok)
            return Card(q, r, s)
        if self.peek(1)[1] == "(":
            self.next()
            self.next()
            args = [self.element_var()]
            while self.peek()[1] == ",":
                self.next()
                args.append(self.element_var())
            self.expect(")")
            self.check_symbol(name, len(args), tok)
            return Atom(name, tuple(args))
        left = self.element_var()
        op_tok = self.next()
        op = op_tok[1]
        if op == "=":
            return Eq(left, self.element_var())
        if op == "in":
            return Member(left, self.set_var())
        if op_tok[0] == "op" and op in _INFIX:
            right = self.element_var()
            self.check_symbol(op, 2, op_tok)
            return Atom(op, (left, right))
        self.error(f"expected a relation after {left!r}, found {op!r}", op_tok)

    def number(self):
        tok = self.next()
        if tok[0] != "num":
            self.error("expected a number", tok)
        return int(tok[1])


def parse_formula(text: str, signature: Signature | None = TOTO) -> Formula:
    """Parse the textual formula grammar; ``signature=None`` skips symbol checks."""
    return _Parser(text, signature).parse()
