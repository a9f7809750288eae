"""Build a structure stage by stage for the MB notion and audit it.

Every stage either joins a new finite graph in, or resolves a queued
extension task.  The audit re-checks every recorded extension afterwards.
"""
import itertools

from hhbench.limits import audit_limit, build_limit
from hhbench.structures import GRAPH, ClassDescriptor

M, ledger = build_limit(ClassDescriptor(GRAPH), "MB", 60, seed=0)
rep = audit_limit(M, ledger)
print(f"{M.n} vertices, {len(M.tables[0])} edges")
print(f"processed {len(ledger.processed)} tasks, {rep.backlog} still queued, audit ok: {rep.ok}")

# every small adjacency pattern over the first six vertices has a witness
E = M.tables[0]
missing = 0
for k in range(3):
    for S in itertools.combinations(range(6), k):
        for bits in itertools.product((True, False), repeat=k):
            if not any(w not in S and all(((w, s) in E) == b for s, b in zip(S, bits))
                       for w in range(M.n)):
                missing += 1
print(f"patterns without a witness: {missing}")
