import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hhbench.amalgamation import (AmalgamInstance, AmalgamationError, ap_instances,
                                   anti_xy_amalgamate, check_ap, enumerate_multifunctions,
                                   jep_amalgam, replay_failure, verify_result, xy_amalgamate)
from hhbench.homogeneity import full_profile, ClassLabel
from hhbench.maps import MapKind, PartialMap, embeds, identity
from hhbench.multifunctions import CoKind, Multifunction, converse
from hhbench.structures import (DIGRAPH, GRAPH, ClassDescriptor, StructureError, complete_graph,
                                cycle_graph, digraph, disjoint_union, graph, induced_substructure,
                                is_isomorphic, null_graph, one_point_extensions)

ALL = ClassDescriptor(GRAPH, (), "all graphs")
HENSON3 = ClassDescriptor(GRAPH, (complete_graph(3),), "henson3")
HC3 = ClassDescriptor(GRAPH, (null_graph(3),), "henson complement 3")
ORIENTED = ClassDescriptor(DIGRAPH, (digraph(2, [(0, 1), (1, 0)]),))
H, M, I = MapKind.H, MapKind.M, MapKind.I
HB, MB, IB = CoKind.H, CoKind.M, CoKind.I


def pm(A, B, d):
    return PartialMap(A, B, frozenset(d.items()))


def test_jep_examples():
    assert jep_amalgam(complete_graph(2), complete_graph(3), ALL) == \
        disjoint_union([complete_graph(2), complete_graph(3)])
    U = jep_amalgam(cycle_graph(5), complete_graph(2), HENSON3)
    assert U.n == 7 and not embeds(complete_graph(3), U)
    tri = digraph(3, [(0, 1), (1, 2), (2, 0)])
    assert jep_amalgam(tri, digraph(2, [(0, 1)]), ORIENTED).n == 5


def test_jep_falls_back_to_search():
    # two independent pairs cannot sit side by side without an independent 3-set
    D = jep_amalgam(null_graph(2), null_graph(2), HC3)
    assert D.n == 4
    assert induced_substructure(D, [0, 1]) == null_graph(2)
    assert induced_substructure(D, [2, 3]) == null_graph(2)
    assert not embeds(null_graph(3), D)
    with pytest.raises(AmalgamationError):
        jep_amalgam(null_graph(2), null_graph(2), HC3, size_bound=3)


def test_free_hom_square():
    A = null_graph(2)
    B1 = complete_graph(1)
    B2 = graph(3, [(0, 2)])
    inst = AmalgamInstance(A, B1, B2, pm(A, B1, {0: 0, 1: 0}), pm(A, B2, {0: 0, 1: 1}))
    res = xy_amalgamate(inst, (H, H), ALL, 6)
    assert res.free
    assert res.D == complete_graph(2)
    assert res.g2.as_dict == {0: 0, 1: 0, 2: 1}
    assert verify_result(inst, res, H, ALL)


def test_identity_corner():
    A = graph(3, [(0, 1)])
    inst = AmalgamInstance(A, A, A, identity(A), identity(A))
    res = xy_amalgamate(inst, (I, I), ALL, 6)
    assert res.D == A and res.g1 == identity(A) and res.g2 == identity(A)


def test_henson_hom_square_fails():
    A = null_graph(2)
    B1 = complete_graph(2)
    B2 = graph(3, [(0, 2), (1, 2)])
    inst = AmalgamInstance(A, B1, B2, pm(A, B1, {0: 0, 1: 1}), pm(A, B2, {0: 0, 1: 1}))
    assert xy_amalgamate(inst, (H, H), HENSON3, 6) is None


def test_search_finds_non_free_amalgam():
    # II square in HC3: two vertices hanging off a common point need an edge
    A = complete_graph(1)
    B1 = null_graph(2)
    B2 = null_graph(2)
    inst = AmalgamInstance(A, B1, B2, pm(A, B1, {0: 0}), pm(A, B2, {0: 0}))
    res = xy_amalgamate(inst, (I, I), HC3, 6)
    assert res is not None and not res.free
    assert verify_result(inst, res, I, HC3)


def test_instance_preconditions():
    A = complete_graph(2)
    with pytest.raises(StructureError):
        xy_amalgamate(AmalgamInstance(A, A, A, identity(A), pm(A, A, {0: 0, 1: 0})), (H, H), ALL)
    B = null_graph(2)
    with pytest.raises(StructureError):
        xy_amalgamate(AmalgamInstance(B, A, B, pm(B, A, {0: 0, 1: 1}), identity(B)), (I, I), ALL)


def test_free_anti_square():
    A = complete_graph(1)
    B1 = null_graph(2)
    B2 = null_graph(2)
    f1 = Multifunction(A, B1, frozenset({(0, 0), (0, 1)}))
    inst = AmalgamInstance(A, B1, B2, f1, pm(A, B2, {0: 0}))
    res = anti_xy_amalgamate(inst, (HB, HB), ALL, 6)
    assert res.D == null_graph(3)
    assert res.g2.as_sets == {0: {0, 1}, 1: {2}}
    assert verify_result(inst, res, HB, ALL, anti=True)


def test_anti_identity_corner():
    A = graph(3, [(0, 1)])
    B1 = graph(3, [(1, 2)])
    iso = pm(A, B1, {0: 1, 1: 2, 2: 0})
    inst = AmalgamInstance(B1, A, B1, converse(iso), identity(B1))
    res = anti_xy_amalgamate(inst, (IB, IB), ALL, 6)
    assert res.D == A
    assert res.g2.pairs == converse(iso).pairs


def test_anti_henson_complement_fails():
    A = complete_graph(1)
    B1 = null_graph(2)
    B2 = null_graph(2)
    f1 = Multifunction(A, B1, frozenset({(0, 0), (0, 1)}))
    inst = AmalgamInstance(A, B1, B2, f1, pm(A, B2, {0: 0}))
    assert anti_xy_amalgamate(inst, (HB, HB), HC3, 6) is None


def test_enumerate_multifunctions_small():
    # a -> nonempty subset of {0,1} (independent so any works): 3 choices
    mfs = list(enumerate_multifunctions(complete_graph(1), null_graph(2), "H"))
    assert sorted(sorted(m.as_sets[0]) for m in mfs) == [[0], [0, 1], [1]]
    # into K2 the pair {0,1} is an edge, so only singletons
    assert len(list(enumerate_multifunctions(complete_graph(1), complete_graph(2), "H"))) == 2


def test_check_ap_verdicts():
    rep = check_ap(ALL, (H, H), 3, 6)
    assert rep.verdict == "PASS" and rep.exhaustive and rep.checked == rep.total
    assert check_ap(ALL, (I, I), 3, 6).verdict == "PASS"
    bad = check_ap(HC3, (HB, HB), 2, 6, anti=True)
    assert bad.verdict == "FAIL"
    assert bad.failure.A.n == 1 and sorted(bad.failure.f1.as_sets[0]) == [0, 1]
    assert bad.failure.B1 == null_graph(2) and bad.failure.B2 == null_graph(2)
    assert replay_failure(HC3, bad)
    assert check_ap(HENSON3, (H, H), 3, 6).verdict == "FAIL"


def test_check_ap_sampling_is_seeded():
    a = check_ap(ALL, (H, H), 3, 6, probes=50, seed=3, limit=10)
    b = check_ap(ALL, (H, H), 3, 6, probes=50, seed=3, limit=10)
    assert not a.exhaustive and a.checked == 50
    assert a.as_record() == b.as_record()


def test_report_record_has_instance():
    rec = check_ap(HENSON3, (H, H), 3, 6).as_record()
    assert rec["verdict"] == "FAIL" and "instance" in rec and "reason" in rec


def _free_ii(inst):
    """Textbook free amalgam over a common part: B1, plus B2's new vertices,
    edges from both sides and nothing else."""
    B1, B2 = inst.B1, inst.B2
    f1, f2 = inst.f1.as_dict, inst.f2.as_dict
    g2, nxt = {}, B1.n
    back = {f2[a]: a for a in f2}
    for b in range(B2.n):
        if b in back:
            g2[b] = f1[back[b]]
        else:
            g2[b] = nxt
            nxt += 1
    edges = {tuple(sorted(t)) for t in B1.tables[0]}
    edges |= {tuple(sorted((g2[u], g2[v]))) for u, v in B2.tables[0]}
    return graph(nxt, sorted(edges)), g2


def test_free_ii_matches_textbook():
    for A, left, right in ap_instances(ALL, (I, I), 3):
        for (B1, f1), (B2, f2) in itertools.product(left, right):
            inst = AmalgamInstance(A, B1, B2, f1, f2)
            res = xy_amalgamate(inst, (I, I), ALL, 6)
            D, g2 = _free_ii(inst)
            assert res.free and res.D == D and res.g2.as_dict == g2


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_results_always_verify(data):
    D = data.draw(st.sampled_from([ALL, HENSON3, HC3]))
    kinds = data.draw(st.sampled_from([(H, H), (M, M), (I, I), (H, M)]))
    groups = ap_instances(D, kinds, 2)
    A, left, right = data.draw(st.sampled_from(groups))
    (B1, f1), (B2, f2) = data.draw(st.sampled_from(left)), data.draw(st.sampled_from(right))
    inst = AmalgamInstance(A, B1, B2, f1, f2)
    res = xy_amalgamate(inst, kinds, D, 5)
    if res is not None:
        assert verify_result(inst, res, kinds[1], D)


def _age(M):
    """Age of a finite graph as a forbidden-pattern class.  Every minimal
    non-member is a one-point extension of a member, so the candidates
    come from extending the members level by level."""
    forb = []
    level = [complete_graph(1)]
    for _ in range(M.n):
        nxt = []
        for A in level:
            for B, _ in one_point_extensions(ALL, A):
                if embeds(B, M):
                    if not any(is_isomorphic(B, C) for C in nxt):
                        nxt.append(B)
                elif not any(embeds(P, B) for P in forb):
                    forb.append(B)
        level = nxt
    return ClassDescriptor(GRAPH, tuple(forb))


@pytest.mark.parametrize("Mg", [cycle_graph(5), complete_graph(3), null_graph(3),
                                disjoint_union([complete_graph(2), complete_graph(2)])])
def test_homogeneous_finite_graphs_have_the_amalgamation_property(Mg):
    prof = full_profile(Mg)
    D = _age(Mg)
    for lab in ("HH", "MM", "II", "HM", "MI"):
        if not prof[ClassLabel.parse(lab)]:
            continue
        kinds = (MapKind(lab[0]), MapKind(lab[1]))
        rep = check_ap(D, kinds, 2, Mg.n)
        assert rep.verdict == "PASS", (lab, rep.as_record())
    for lab in ("HE", "MB", "IA"):
        if not prof[ClassLabel.parse(lab)]:
            continue
        x, y = lab[0], ClassLabel.parse(lab).forth_y
        assert check_ap(D, (MapKind(x), MapKind(y)), 2, Mg.n).verdict == "PASS"
        rep = check_ap(D, (CoKind(x), CoKind(y)), 2, Mg.n, anti=True)
        assert rep.verdict == "PASS", (lab, rep.as_record())
