import itertools
import random

import pytest

from hhbench.catalog import (CATALOG, OMEGA, ExtensionRequest, OracleError, descriptor,
                             directed_3cycle, embeds_pattern, expected_mhh, make_oracle, nastydig,
                             parse_name, parse_param)
from hhbench.homogeneity import ClassLabel, decide_finite_homogeneity
from hhbench.maps import classify_map, enumerate_maps
from hhbench.structures import (DIGRAPH, GRAPH, StructureError, complete_graph, digraph,
                                induced_substructure, member_of)

L = ClassLabel.parse

# every catalog entry with representative parameters
ENTRIES = [("complete", ()), ("null", ()), ("random_graph", ()), ("henson", (3,)),
           ("henson", (4,)), ("henson_complement", (3,)), ("union_of_completes", (OMEGA, 2)),
           ("union_of_completes", (3, OMEGA)), ("union_of_completes", (OMEGA, OMEGA)),
           ("complement_union", (OMEGA, 3)), ("complement_union", (2, OMEGA)),
           ("complement_union", (OMEGA, OMEGA)), ("random_tournament", ()), ("linear_order", ()),
           ("generic_digraph", ()), ("generic_digraph_2cycles", ()),
           ("union_of_random_tournaments", ())]


def labels(*names):
    return {L(n) for n in names}


def test_catalog_covers_every_name():
    assert {n for n, _ in ENTRIES} == set(CATALOG)


def test_params():
    assert parse_param("w") is OMEGA and parse_param("omega") is OMEGA
    assert parse_param("7") == 7
    with pytest.raises(OracleError):
        parse_param("x")
    assert parse_name("union_of_completes:w,2") == ("union_of_completes", (OMEGA, 2))
    assert parse_name("random_graph") == ("random_graph", ())


def test_descriptor_errors():
    with pytest.raises(OracleError):
        descriptor("petersen")
    with pytest.raises(OracleError):
        descriptor("henson", ())
    with pytest.raises(OracleError):
        descriptor("henson", (2,))
    with pytest.raises(OracleError):
        make_oracle("henson:w")


def test_expected_table():
    assert expected_mhh("complete") == labels("HA")
    assert expected_mhh("null") == labels("MA", "HE")
    assert expected_mhh("random_graph") == labels("IA", "MB", "HE")
    assert expected_mhh("henson", (5,)) == labels("IA")
    assert expected_mhh("henson_complement", (3,)) == labels("IA", "MM", "HH")
    assert expected_mhh("union_of_completes", (OMEGA, 4)) == labels("IA", "HE")
    assert expected_mhh("union_of_completes", (3, OMEGA)) == labels("IA", "MM", "HH")
    assert expected_mhh("union_of_completes", (OMEGA, OMEGA)) == labels("IA", "MB", "HE")
    assert expected_mhh("complement_union", (OMEGA, 4)) == labels("IA", "MM", "HH")
    assert expected_mhh("complement_union", (3, OMEGA)) == labels("IA")
    assert expected_mhh("complement_union", (OMEGA, OMEGA)) == labels("IA", "MB", "HE")
    assert expected_mhh("random_tournament") == labels("HA")
    assert expected_mhh("linear_order") == labels("HA")
    assert expected_mhh("generic_digraph") == labels("IA", "MB")
    assert expected_mhh("generic_digraph_2cycles") == labels("IA", "MB", "HE")
    assert expected_mhh("union_of_random_tournaments") == labels("IA", "MB", "HE")
    with pytest.raises(OracleError):
        expected_mhh("union_of_completes", (2, 3))
    with pytest.raises(OracleError):
        expected_mhh("nope")


def test_request_grammar():
    r = ExtensionRequest.parse("adj:0,2 nonadj:1")
    assert r.pattern == ((0, "adj"), (1, "nonadj"), (2, "adj"))
    assert ExtensionRequest.parse(str(r)) == r
    d = ExtensionRequest.parse("out:0 in:1 two:2 ind:3")
    assert d.demands(DIGRAPH, 9) == {(0, (9, 0)): True, (0, (0, 9)): False,
                                     (0, (9, 1)): False, (0, (1, 9)): True,
                                     (0, (9, 2)): True, (0, (2, 9)): True,
                                     (0, (9, 3)): False, (0, (3, 9)): False}
    for bad in ("adj", "foo:1", "adj:x", "adj:1 nonadj:1"):
        with pytest.raises(OracleError):
            ExtensionRequest.parse(bad)
    with pytest.raises(OracleError):
        r.demands(DIGRAPH, 5)
    assert ExtensionRequest.of(adj=[0], nonadj=[1]).pattern == ((0, "adj"), (1, "nonadj"))


def _pattern_of(M, x, vs):
    return {v: (x, v) in M.tables[0] for v in vs}


def test_random_graph_realizes_exact_pattern():
    o = make_oracle("random_graph", seed=3)
    o.grow(6)
    n = o.n
    v = o.realize(ExtensionRequest.parse("adj:1 nonadj:4"))
    assert v == n
    assert _pattern_of(o.approximation, v, [1, 4]) == {1: True, 4: False}


def test_henson_refuses_triangle():
    o = make_oracle("henson", (3,), seed=1)
    o.grow(10)
    M = o.approximation
    u, w = next(iter(M.tables[0]))
    req = ExtensionRequest.parse(f"adj:{u},{w}")
    assert not o.can_realize(req)
    n = o.n
    assert o.realize(req) is None
    assert o.n == n


def test_darp_four_part_request():
    o = make_oracle("generic_digraph_2cycles", seed=0)
    o.grow(6)
    n = o.n
    v = o.realize(ExtensionRequest.parse("out:0 in:1 two:2 ind:3"))
    assert v == n
    A = o.approximation.tables[0]
    assert ((v, 0) in A, (0, v) in A) == (True, False)
    assert ((v, 1) in A, (1, v) in A) == (False, True)
    assert ((v, 2) in A, (2, v) in A) == (True, True)
    assert ((v, 3) in A, (3, v) in A) == (False, False)


def test_generic_digraph_refuses_two_cycle():
    o = make_oracle("generic_digraph", seed=0)
    o.grow(4)
    assert not o.can_realize(ExtensionRequest.parse("two:0"))


def test_request_out_of_range():
    o = make_oracle("random_graph")
    with pytest.raises(OracleError):
        o.realize(ExtensionRequest.parse("adj:0"))


def test_embeds_pattern_examples():
    o = make_oracle("generic_digraph", seed=2)
    o.grow(2)
    M = o.approximation
    pair = next((a, b) for a, b in itertools.combinations(range(M.n), 2)
                if (a, b) not in M.tables[0] and (b, a) not in M.tables[0]) \
        if M.tables[0] != frozenset({(0, 1)}) and M.tables[0] != frozenset({(1, 0)}) else None
    if pair is None:
        o.realize(ExtensionRequest.parse("ind:0,1"))
        v, w = 0, 2
    else:
        v, w = pair
    o.realize(ExtensionRequest.parse(f"out:{v} in:{w}"))
    assert embeds_pattern(o.approximation, nastydig())
    assert not embeds_pattern(directed_3cycle(), nastydig())
    assert not embeds_pattern(digraph(2, [(0, 1)]), nastydig())
    with pytest.raises(StructureError):
        embeds_pattern(complete_graph(3), nastydig())


def _random_request(o, rng):
    tokens = ("adj", "nonadj") if o.signature == GRAPH else ("out", "in", "two", "ind")
    k = rng.randint(0, min(3, o.n))
    vs = rng.sample(range(o.n), k)
    return ExtensionRequest(tuple(sorted((v, rng.choice(tokens)) for v in vs)))


@pytest.mark.parametrize("name, params", ENTRIES)
def test_age_soundness_and_monotone_growth(name, params):
    # 1000 realization attempts per oracle, in 20 independent sequences
    for seq in range(20):
        o = make_oracle(name, params, seed=seq)
        rng = random.Random(seq)
        o.grow(3)
        before = o.approximation
        for _ in range(50):
            req = _random_request(o, rng)
            ok = o.can_realize(req)
            v = o.realize(req)
            assert (v is not None) == ok
            after = o.approximation
            assert after.n >= before.n
            assert all(a >= b for a, b in zip(after.tables, before.tables))
            assert induced_substructure(after, range(before.n)) == before
            before = after
        assert member_of(o.descriptor, o.approximation)


def _saturate(o, size, tokens, width):
    o.grow(size)
    reqs = []
    for k in range(width + 1):
        for vs in itertools.combinations(range(size), k):
            for toks in itertools.product(tokens, repeat=k):
                reqs.append(ExtensionRequest(tuple(zip(vs, toks))))
    for r in reqs:
        dem = r.demands(o.signature, o.n)
        if not o.present_witnesses(dem, exclude=set(r.vertices)) and o.can_realize(r):
            o.realize(r)
    return reqs


def test_arp_saturation():
    o = make_oracle("random_graph", seed=5)
    reqs = _saturate(o, 8, ("adj", "nonadj"), 3)
    for r in reqs:
        dem = r.demands(GRAPH, o.n)
        assert o.present_witnesses(dem, exclude=set(r.vertices))


def test_darp_saturation():
    o = make_oracle("generic_digraph_2cycles", seed=5)
    reqs = _saturate(o, 6, ("out", "in", "two", "ind"), 2)
    for r in reqs:
        assert o.present_witnesses(r.demands(DIGRAPH, o.n), exclude=set(r.vertices))


def test_tournament_orientation_demands_all_realizable():
    o = make_oracle("random_tournament", seed=5)
    o.grow(8)
    for k in range(4):
        for vs in itertools.combinations(range(8), k):
            for toks in itertools.product(("out", "in"), repeat=k):
                assert o.can_realize(ExtensionRequest(tuple(zip(vs, toks))))
    # and no vertex may be independent of another
    assert not o.can_realize(ExtensionRequest.parse("ind:0"))


def test_henson_approximations_have_non_extendable_monos():
    o = make_oracle("henson", (3,), seed=4)
    o.grow(12)
    M = o.approximation
    found = False
    for S in itertools.combinations(range(M.n), 5):
        sub = induced_substructure(M, S)
        if sub.tables[0] and len(sub.tables[0]) < 20:
            if not decide_finite_homogeneity(sub, "MM").holds:
                found = True
                break
    assert found


def test_tournament_partial_homs_are_embeddings():
    o = make_oracle("random_tournament", seed=9)
    o.grow(6)
    M = o.approximation
    for f in enumerate_maps(M, M, "H", total=False):
        assert classify_map(f).is_embedding


def test_grow_and_snapshot_are_deterministic():
    a, b = make_oracle("henson_complement:3", seed=11), make_oracle("henson_complement:3", seed=11)
    assert a.grow(25) == b.grow(25)
    c = make_oracle("henson_complement:3", seed=12)
    assert c.grow(25) != a.approximation


def test_complete_oracle_is_complete():
    o = make_oracle("complete")
    M = o.grow(7)
    assert M == complete_graph(7)
