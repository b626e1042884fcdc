import itertools
import json
import random

import pytest

from permlogic.constructions import Graph, GriddingMatrix, check_gridding, staircase_matrix
from permlogic.evaluator import evaluate
from permlogic.logic import (
    TOG, TOTO, Atom, FormulaError, NameSupply, check_signature, free_vars, iter_nodes, node_count,
    parse_formula, structure_of_permutation,
)
from permlogic.perm import Permutation, complement, permutations_up_to, reverse
from permlogic.reduction import (
    ReductionError, ReductionOutput, _Builder, between_both, closure, decode_graph, encode_graph,
    encoded_length, is_closed, orient, reduce, three_colorability, track_closure, translate_sentence,
    validate_meta, verify_gridding,
)
from corpus import corpus

K2 = Graph.complete(2)


def _random_graphs(count, seed=5):
    rng = random.Random(seed)
    return [Graph.random(rng.randint(1, 8), rng.random(), rng) for _ in range(count)]


# -- encoding -----------------------------------------------------------------

def test_k2_shape():
    out = encode_graph(K2)
    assert len(out.meta["blocks"]) == 5
    assert out.permutation.n == 82 == encoded_length(2, 1)


def test_single_vertex():
    out = encode_graph(Graph(1, []))
    assert len(out.meta["blocks"]) == 4
    assert out.permutation.n == 47


def test_round_trip_fixed():
    for g in (K2, Graph(3, []), Graph.path(4), Graph.complete(4)):
        assert decode_graph(encode_graph(g)) == g


def test_round_trip_random():
    for g in _random_graphs(50):
        out = encode_graph(g)
        assert decode_graph(out) == g
        assert out.permutation.n == encoded_length(g.n, len(g.edges))


def test_length_quadratic():
    # with all edges present the length is 5n^2 + 20n + 22, so c = 47 (tight at n = 1)
    for n in range(1, 30):
        full = encoded_length(n, n * (n - 1) // 2)
        assert full == 5 * n * n + 20 * n + 22
        assert full <= 47 * n * n
    assert max(encoded_length(n, n * (n - 1) // 2) / (n * n) for n in range(1, 30)) == 47


def test_gridding_with_own_cuts():
    for g in [K2, Graph.path(3)] + _random_graphs(5, seed=2):
        out = encode_graph(g)
        assert verify_gridding(out)
        matrix = GriddingMatrix.parse(out.meta["matrix"])
        assert matrix.cells == staircase_matrix(g.n + 3).cells
        # the encoder's cuts are the only thing that certifies membership here
        assert check_gridding(out.permutation, matrix, (out.meta["cuts"]["columns"], out.meta["cuts"]["rows"]))


def test_block_two_order():
    out = encode_graph(Graph.path(3))
    pi = out.permutation
    names = ["Z1"] + [f"{c}{j}" for j in (1, 2, 3) for c in "XY"] + ["Z2", "Z3"]
    values = [sorted(pi[p - 1] for p in out.pair(f"{name}@2")) for name in names]
    assert all(a[1] < b[0] for a, b in zip(values, values[1:]))


def test_blocks_monotone_with_barricades():
    out = encode_graph(Graph.path(3))
    pi = out.permutation
    for block in out.meta["blocks"][1:]:
        pts = sorted(block["points"])
        vals = [pi[p - 1] for p in pts]
        assert vals == sorted(vals) or vals == sorted(vals, reverse=True)
        in_block = out.meta["barricades"][str(block["index"])]
        assert len(in_block) == 4
        # two at each end of the monotone run
        assert set(in_block) == set(pts[:2] + pts[-2:])


def test_pairs_nest_in_predecessor():
    out = encode_graph(Graph.complete(3))
    pi = out.permutation
    for name, pts in out.meta["pairs"].items():
        base, _, idx = name.partition("@")
        if not idx or int(idx) < 3:
            continue
        prev = out.pair(f"{base}@{int(idx) - 1}")
        # the later pair sits between the earlier pair in one of the two orders
        pos = sorted(prev)
        vals = sorted(pi[p - 1] for p in prev)
        inside_x = all(pos[0] < p < pos[1] for p in pts)
        inside_y = all(vals[0] < pi[p - 1] < vals[1] for p in pts)
        assert inside_x or inside_y, name


# -- tracks -------------------------------------------------------------------

def test_track_closure_matches_registry():
    for g in (K2, Graph.path(3), Graph(2, [])):
        out = encode_graph(g)
        tracks = out.meta["tracks"]
        seen = set()
        for name, pts in tracks.items():
            cl = track_closure(out, name)
            assert cl == set(pts), name
            assert not cl & seen  # pairwise disjoint
            seen |= cl
            assert not any(cl & set(b) for b in out.meta["barricades"].values())


def test_proper_subsets_not_closed():
    out = encode_graph(K2)
    rng = random.Random(1)
    for name, pts in out.meta["tracks"].items():
        seed = set(out.pair(f"{name}@2"))
        others = sorted(set(pts) - seed)
        # dropping any single point, and random larger removals, breaks closure
        for p in others:
            assert not is_closed(out.permutation, set(pts) - {p})
        for _ in range(30):
            k = rng.randint(1, len(others))
            assert not is_closed(out.permutation, set(pts) - set(rng.sample(others, k)))
        assert is_closed(out.permutation, pts)


def test_track_closure_errors():
    out = encode_graph(K2)
    with pytest.raises(ReductionError):
        track_closure(out, "X9")
    with pytest.raises(ReductionError):
        track_closure(out, (1, 2))
    assert track_closure(out, out.pair("Z1@2")) == track_closure(out, "Z1")


def _closure_brute(pi, seed):
    """Smallest closed superset by filtering all supersets (tiny n only)."""
    n = pi.n
    rest = [p for p in range(1, n + 1) if p not in seed]
    best = None
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            cand = set(seed) | set(extra)
            if _closed_brute(pi, cand):
                return cand
    return best


def _closed_brute(pi, members):
    pos = {p: (p, pi[p - 1]) for p in range(1, pi.n + 1)}
    for a, b in itertools.combinations(members, 2):
        for ax in (0, 1):
            lo, hi = sorted((pos[a][ax], pos[b][ax]))
            lo2, hi2 = sorted((pos[a][1 - ax], pos[b][1 - ax]))
            if any(lo < pos[p][ax] < hi for p in pos):
                continue
            mid = [p for p in pos if lo2 < pos[p][1 - ax] < hi2]
            if len(mid) == 2 and not set(mid) <= members:
                return False
    return True


def test_closure_is_least_small():
    for pi in permutations_up_to(6, start=2):
        for seed in itertools.combinations(range(1, pi.n + 1), 2):
            assert closure(pi, seed) == _closure_brute(pi, seed)


# -- decoding errors ----------------------------------------------------------

def test_decode_rejects_bad_meta():
    out = encode_graph(K2)
    meta = json.loads(out.meta_json())
    del meta["blocks"][-1]
    with pytest.raises(ReductionError):
        decode_graph(ReductionOutput(out.permutation, meta))
    with pytest.raises(ReductionError):
        validate_meta(ReductionOutput(out.permutation, {}))
    meta = json.loads(out.meta_json())
    meta["n"] = 3
    with pytest.raises(ReductionError):
        validate_meta(ReductionOutput(out.permutation, meta))


def test_meta_json_round_trip():
    out = encode_graph(Graph.path(3))
    back = ReductionOutput.from_json(out.permutation, out.meta_json())
    assert decode_graph(back) == Graph.path(3)


def test_oracle_checks():
    with pytest.raises(ReductionError):
        encode_graph(K2, oracle=lambda k: GriddingMatrix.parse("/ / / / /"))
    with pytest.raises((ReductionError, ValueError)):
        encode_graph(Graph(0, []))
    out = encode_graph(K2, oracle=staircase_matrix)
    assert decode_graph(out) == K2


# -- translation --------------------------------------------------------------

GRAPH_SENTENCES = [
    "E x. E y. E(x, y)",
    "A x. E y. E(x, y)",
    "A x. A y. E(x, y) -> E(y, x)",
    "E x. A y. !E(x, y)",
    "E x. E y. E z. E(x, y) & E(y, z) & E(x, z)",
    "ES X. A x. x in X",
    "ES X. E x. E y. x in X & !(y in X) & E(x, y)",
    "A x. A y. x = y",
    "E x. E y. !(x = y) & E(x, y)",
]


def test_translation_shape():
    for text in GRAPH_SENTENCES:
        phi = parse_formula(text, TOG)
        psi = translate_sentence(phi)
        check_signature(psi, TOTO)
        assert not free_vars(psi)
        # measured: a fixed part of 1393 nodes plus under 500 per node of phi
        assert node_count(psi) <= 500 * node_count(phi) + 1400


def test_translation_linear_growth():
    sizes = []
    for k in range(2, 7):
        names = [f"x{i}" for i in range(k)]
        body = " & ".join(f"E({a}, {b})" for a, b in zip(names, names[1:]))
        text = "".join(f"E {v}. " for v in names) + body
        sizes.append(node_count(translate_sentence(parse_formula(text, TOG))))
    steps = {b - a for a, b in zip(sizes, sizes[1:])}
    assert len(steps) == 1


def test_translation_equality_and_3col():
    psi = translate_sentence(parse_formula("A x. A y. x = y", TOG))
    assert not any(isinstance(n, Atom) and n.symbol == "E" for n in iter_nodes(psi))
    psi = translate_sentence(three_colorability())
    check_signature(psi, TOTO)
    assert not free_vars(psi)
    # depends only on phi
    assert translate_sentence(three_colorability()) == psi


def test_translation_errors():
    with pytest.raises(FormulaError):
        translate_sentence(parse_formula("E x. x <1 x"))
    with pytest.raises(FormulaError):
        translate_sentence(parse_formula("E(x, y)", TOG))
    with pytest.raises(FormulaError):
        translate_sentence(parse_formula("ES X. card[0,2](X)", TOG))


def test_reduce_bundles_both():
    out = reduce(K2, three_colorability())
    assert out.sentence is not None and decode_graph(out) == K2


# -- builder predicates against native computation ----------------------------

def _builder():
    return _Builder(NameSupply(parse_formula("E x. x = x")))


def _perms(n):
    return list(permutations_up_to(n, start=2))


def _between(pi, a, b, axis):
    if axis == 1:
        lo, hi = sorted((a, b))
        return [p for p in range(1, pi.n + 1) if lo < p < hi]
    lo, hi = sorted((pi[a - 1], pi[b - 1]))
    return [p for p in range(1, pi.n + 1) if lo < pi[p - 1] < hi]


def test_interval_predicates():
    b = _builder()
    for axis in (1, 2):
        empty = b.empty(axis, "p", "q")
        cover = b.cover(axis, "p", "q")
        one = b.count_is(axis, "p", "q", 1)
        two = b.count_is(axis, "p", "q", 2)
        for pi in _perms(5):
            s = structure_of_permutation(pi)
            for p, q in itertools.product(range(1, pi.n + 1), repeat=2):
                mid = _between(pi, p, q, axis)
                env = {"p": p, "q": q}
                assert evaluate(s, empty, env) == (not mid)
                assert evaluate(s, one, env) == (len(mid) == 1)
                assert evaluate(s, two, env) == (len(mid) == 2)
                before = p < q if axis == 1 else pi[p - 1] < pi[q - 1]
                assert evaluate(s, cover, env) == (before and not mid)


def test_suptrack_and_track_against_closure():
    b = _builder()
    sup = b.suptrack("p", "q", "T")
    tr = b.track("p", "q", "T")
    for pi in _perms(4):
        s = structure_of_permutation(pi)
        for p, q in itertools.combinations(range(1, pi.n + 1), 2):
            least = closure(pi, (p, q))
            for k in range(pi.n + 1):
                for t in itertools.combinations(range(1, pi.n + 1), k):
                    env = {"p": p, "q": q, "T": t}
                    closed = {p, q} <= set(t) and is_closed(pi, t)
                    assert evaluate(s, sup, env) == closed
                    assert evaluate(s, tr, env) == (set(t) == least)


def test_anchor_on_encoding():
    out = encode_graph(Graph(1, []))
    s = structure_of_permutation(out.permutation)
    anchor = _builder().anchor("a", "b")
    s1, s2 = sorted(out.pair("S"))
    assert evaluate(s, anchor, {"a": s1, "b": s2})
    assert not evaluate(s, anchor, {"a": s2, "b": s1})
    assert not evaluate(s, anchor, {"a": s1, "b": 3})


def test_between_count_against_native():
    b = _builder()
    one = b.between_count("A", "B", "S", 1)
    two = b.between_count("A", "B", "S", 2)
    rng = random.Random(4)
    for pi in _perms(5):
        s = structure_of_permutation(pi)
        every = list(range(1, pi.n + 1))
        for _ in range(6):
            a = rng.sample(every, rng.randint(1, 2))
            rest = [p for p in every if p not in a]
            bb = rng.sample(rest, min(len(rest), rng.randint(1, 2)))
            if not bb:
                continue
            native = len(between_both(pi, a, bb))
            env = {"A": a, "B": bb, "S": every}
            assert evaluate(s, one, env) == (native == 1)
            assert evaluate(s, two, env) == (native == 2)


def test_orient_is_symmetry():
    for name, phi in corpus().items():
        for pi in _perms(4):
            s = structure_of_permutation
            assert evaluate(s(pi), orient(phi, -1, 1)) == evaluate(s(complement(pi)), phi), name
            assert evaluate(s(pi), orient(phi, 1, -1)) == evaluate(s(reverse(pi)), phi), name
            assert orient(phi, 1, 1) == phi
