"""Turning a surjective homomorphism around.

The converse of a surjective hom sends each target vertex to its fibre.  It
never sends a non-edge onto an edge, and converses compose in reverse.
"""
from hhbench.maps import PartialMap, compose
from hhbench.multifunctions import cokind, converse, is_antihomomorphism, mf_compose
from hhbench.structures import complete_graph, path_graph

P3, K2 = path_graph(3), complete_graph(2)
f = PartialMap(P3, K2, frozenset({(0, 0), (1, 1), (2, 0)}))
fbar = converse(f)
print("fibres:", fbar.as_sets)
print("antihomomorphism:", is_antihomomorphism(fbar), "kind:", cokind(fbar).value)

g = PartialMap(K2, K2, frozenset({(0, 1), (1, 0)}))
lhs = converse(compose(f, g))
rhs = mf_compose(converse(g), fbar)
print("converse reverses composition:", lhs.pairs == rhs.pairs)
