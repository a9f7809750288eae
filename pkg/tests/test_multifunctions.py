import itertools

import pytest
from hypothesis import assume, given, settings, strategies as st

from brute import is_hom, preserves_nonrelations
from hhbench.maps import PartialMap, classify_map, compose, identity
from hhbench.multifunctions import (CoKind, Multifunction, compose_cokinds, converse, cokind,
                                    extend_multifunction_within, has_cokind, identity_mf,
                                    is_antihomomorphism, mf_compose, mf_image)
from hhbench.structures import (GRAPH, ClassDescriptor, StructureError, complete_graph, graph,
                                null_graph, path_graph, structures_up_to)

K2, K3, P3 = complete_graph(2), complete_graph(3), path_graph(3)


@st.composite
def surjective_homs(draw, source=None, max_n=4):
    """(A, B, f) with f: A -> B a surjective hom of graphs."""
    if source is None:
        n = draw(st.integers(1, max_n))
        pairs = list(itertools.combinations(range(n), 2))
        A = graph(n, draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else [])
    else:
        A = source
    k = draw(st.integers(1, A.n))
    img = draw(st.lists(st.integers(0, k - 1), min_size=A.n, max_size=A.n))
    assume(set(img) == set(range(k)))
    edges = {tuple(sorted((img[u], img[v]))) for u, v in A.tables[0]}
    assume(all(a != b for a, b in edges))
    spare = [p for p in itertools.combinations(range(k), 2) if p not in edges]
    extra = draw(st.lists(st.sampled_from(spare), unique=True)) if spare else []
    B = graph(k, sorted(edges) + extra)
    return A, B, PartialMap(A, B, frozenset(enumerate(img)))


def test_converse_of_labelled_function():
    f = {1: "b", 2: "b", 3: "a", 4: "c"}
    fbar = converse(f)
    assert fbar.pairs == {("b", 1), ("b", 2), ("a", 3), ("c", 4)}
    assert converse(fbar) == f
    assert mf_image(fbar, "b") == {1, 2}
    assert mf_image(fbar, ("b", "a")) == {(1, 3), (2, 3)}
    assert mf_image(fbar, {"a", "c"}) == {3, 4}


def test_image_range_check():
    with pytest.raises(StructureError):
        mf_image(identity_mf(K3), 5)


def test_multifunction_invariant():
    with pytest.raises(StructureError):
        Multifunction(K2, K3, frozenset({(0, 0), (1, 0)}))


def test_converse_identity():
    assert converse(identity(K3)) == identity_mf(K3)


@given(st.data())
def test_double_converse(data):
    n = data.draw(st.integers(0, 4))
    m = data.draw(st.integers(1, 4))
    dom = data.draw(st.sets(st.integers(0, n - 1), max_size=n)) if n else set()
    d = {a: data.draw(st.integers(0, m - 1)) for a in dom}
    f = PartialMap(null_graph(n), null_graph(m), frozenset(d.items()))
    assert converse(converse(f)) == f


def test_compose_by_hand():
    A = null_graph(3)
    f = Multifunction(A, A, frozenset({(0, 1), (0, 2)}))
    g = Multifunction(A, A, frozenset({(1, 0), (2, 1)}))
    assert mf_compose(f, g).pairs == {(0, 0), (0, 1)}
    assert mf_compose(f, identity_mf(A)) == f
    assert mf_compose(identity_mf(A), f) == f
    with pytest.raises(StructureError):
        mf_compose(Multifunction(A, K2, frozenset()), Multifunction(K3, K3, frozenset()))


def test_antihomomorphism_examples():
    f = PartialMap(P3, K2, frozenset({(0, 0), (1, 1), (2, 0)}))
    assert is_antihomomorphism(converse(f))
    assert cokind(converse(f)) == CoKind.H
    bad = Multifunction(null_graph(2), K2, frozenset({(0, 0), (1, 1)}))
    assert not is_antihomomorphism(bad)


def test_source_k2_singleton_images_always_pass():
    T = path_graph(4)
    for a, b in itertools.permutations(range(T.n), 2):
        assert is_antihomomorphism(Multifunction(K2, T, frozenset({(0, a), (1, b)})))


def test_source_k2_with_adjacent_image_pair_fails():
    # the loop (0,0) is a non-relation; its image is the product {1,2}x{1,2},
    # which contains the edge (1,2)
    mf = Multifunction(K2, P3, frozenset({(0, 1), (0, 2)}))
    assert not is_antihomomorphism(mf)


def test_is_antihomomorphism_matches_naive():
    graphs = list(structures_up_to(ClassDescriptor(GRAPH), 3))
    for B, A in itertools.product(graphs, repeat=2):
        for owner in itertools.product(range(B.n), repeat=A.n):
            pairs = frozenset((owner[a], a) for a in range(A.n))
            mf = Multifunction(B, A, pairs)
            assert is_antihomomorphism(mf) == preserves_nonrelations(B, A, pairs)


def test_surjective_antihoms_are_converses_of_surjective_homs():
    # both directions of the equivalence, by enumeration over small graphs
    graphs = list(structures_up_to(ClassDescriptor(GRAPH), 3))
    for A, B in itertools.product(graphs, repeat=2):
        for img in itertools.product(range(B.n), repeat=A.n):
            if set(img) != set(range(B.n)):
                continue
            f = PartialMap(A, B, frozenset(enumerate(img)))
            mf = converse(f)
            assert is_antihomomorphism(mf) == is_hom(A, B, dict(enumerate(img)))
            if is_antihomomorphism(mf):
                c = classify_map(converse(mf))
                assert c.is_hom and c.is_surjective


@settings(max_examples=150)
@given(surjective_homs())
def test_converse_of_surjective_hom_is_antihom(t):
    _, _, f = t
    assert is_antihomomorphism(converse(f))


@settings(max_examples=150)
@given(st.data())
def test_converse_reverses_composition(data):
    A, B, f = data.draw(surjective_homs())
    _, C, g = data.draw(surjective_homs(source=B))
    fg = compose(f, g)
    lhs = converse(fg)
    rhs = mf_compose(converse(g), converse(f))
    assert lhs.pairs == rhs.pairs
    assert is_antihomomorphism(rhs)
    assert classify_map(fg).is_surjective


@settings(max_examples=150)
@given(st.data())
def test_antihomomorphisms_closed_under_composition(data):
    A, B, f = data.draw(surjective_homs())
    _, C, g = data.draw(surjective_homs(source=B))
    comp = mf_compose(converse(g), converse(f))
    assert is_antihomomorphism(comp)
    k1, k2 = cokind(converse(g)), cokind(converse(f))
    assert has_cokind(comp, compose_cokinds(k1, k2))


def test_cokind_table():
    H, M, I = CoKind.H, CoKind.M, CoKind.I
    assert compose_cokinds(H, M) == H
    assert compose_cokinds(M, I) == M
    assert compose_cokinds(I, I) == I
    assert compose_cokinds(M, H) == H
    assert I.implies(M) and M.implies(H) and not H.implies(M)


def test_bijective_hom_converse_is_antimono():
    # source K2 of the converse has only loops as non-relations
    f = PartialMap(null_graph(2), K2, frozenset({(0, 0), (1, 1)}))
    assert cokind(converse(f)) == CoKind.M
    g = PartialMap(null_graph(3), P3, frozenset({(0, 0), (1, 1), (2, 2)}))
    # the non-edge 02 of P3 goes back to a non-edge; the edges do not survive
    assert cokind(converse(g)) == CoKind.M
    iso = PartialMap(P3, P3, frozenset({(0, 2), (1, 1), (2, 0)}))
    assert cokind(converse(iso)) == CoKind.I


@settings(max_examples=100)
@given(surjective_homs())
def test_bijective_homs_give_antimonos(t):
    A, B, f = t
    if A.n == B.n:
        assert has_cokind(converse(f), CoKind.M)


def test_extend_multifunction_examples():
    B = null_graph(2)
    g = extend_multifunction_within(null_graph(3), B, {0}, {0: {0, 1}}, "H")
    assert g is not None and g.as_sets == {0: {0, 1}, 1: {2}}
    # a -> {0,1} is not an antihom of K2 to begin with: the loop (a,a)
    # already lands on the edge 01
    with pytest.raises(StructureError):
        extend_multifunction_within(K2, B, {0}, {0: {0, 1}}, "H")
    # with a single-point image for a, b has no place: both vertices of K2
    # are adjacent or equal to a's image
    assert extend_multifunction_within(K2, B, {0}, {0: {0}}, "H") is None


def test_extend_multifunction_inverse_iso():
    # inverse isomorphism: same as extending the embedding the other way
    M = P3
    B = K2
    g = extend_multifunction_within(M, B, {0}, {0: {1}}, "I")
    assert g is not None and cokind(g) == CoKind.I
    assert g.as_sets[1] <= {0, 2}


def test_extend_multifunction_rejects_bad_start():
    with pytest.raises(StructureError):
        extend_multifunction_within(K2, K2, {0}, {0: {0, 1}}, "H")
