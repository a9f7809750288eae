"""The random graph and the triangle-free Henson graph side by side.

Both are homogeneous.  The random graph also lets any partial mono grow into
a bijective endomorphism; the Henson graph does not, and the checker finds a
concrete instance where no new vertex can be found.
"""
from hhbench.catalog import ExtensionRequest, make_oracle
from hhbench.limits import check_label

rg = make_oracle("random_graph", seed=1)
rg.grow(10)
v = rg.realize(ExtensionRequest.parse("adj:0,1 nonadj:2"))
print(f"random graph: new vertex {v} adjacent to 0 and 1, not to 2")

h3 = make_oracle("henson:3", seed=1)
h3.grow(10)
u, w = sorted(next(iter(h3.approximation.tables[0])))
print(f"henson:3 can realize a common neighbour of edge {u}-{w}? "
      f"{h3.can_realize(ExtensionRequest.parse(f'adj:{u},{w}'))}")

for name in ("random_graph", "henson:3"):
    for lab in ("IA", "MB"):
        status, parts = check_label(make_oracle(name, seed=1), lab, A_size_bound=3, probes=200, seed=5)
        print(f"{name:12s} {lab}: {status}")
        for part, verdict in parts.items():
            if verdict.counterexample:
                c = verdict.counterexample
                print(f"    {part} fails: map {c['map']} ({c['reason']})")
