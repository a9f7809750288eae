"""Which of the 18 homogeneity notions do a few small graphs satisfy?

Prints the profile of each graph as a row of marks plus its strongest
classes.
"""
from hhbench.homogeneity import ALL_LABELS, format_labels, full_profile, mhh_classes
from hhbench.structures import complete_graph, cycle_graph, disjoint_union, null_graph, path_graph

GRAPHS = {
    "K3": complete_graph(3),
    "3 isolated points": null_graph(3),
    "path on 3": path_graph(3),
    "5-cycle": cycle_graph(5),
    "two edges": disjoint_union([complete_graph(2), complete_graph(2)]),
}

print(" " * 18 + " ".join(str(l) for l in ALL_LABELS))
for name, M in GRAPHS.items():
    prof = full_profile(M)
    marks = "  ".join("x" if prof[l] else "." for l in ALL_LABELS)
    print(f"{name:17s} {marks}")
    print(f"{'':17s} strongest: {format_labels(mhh_classes(prof))}")
