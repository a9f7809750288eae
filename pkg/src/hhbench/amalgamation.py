"""Joint embedding, XY-amalgamation and anti-XY-amalgamation.

Squares follow the usual shape: ``f1: A -> B1`` (a map of kind X, or a
multifunction of cokind X-bar), ``f2: A -> B2`` an embedding; we look for
``D`` with an embedding ``g1: B1 -> D`` and ``g2: B2 -> D`` making the square
commute.  ``g1`` is always the inclusion of B1 on its own indices and the
vertices of ``B2 - f2(A)`` follow in increasing order.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .completion import point_completions
from .maps import MapKind, PartialMap, classify_map, compose, enumerate_maps, has_kind
from .multifunctions import CoKind, Multifunction, has_cokind, mf_compose
from .structures import Structure, StructureError, disjoint_union, member_of, structures_up_to


class AmalgamationError(RuntimeError):
    pass


@dataclass
class AmalgamInstance:
    A: Structure
    B1: Structure
    B2: Structure
    f1: object
    f2: PartialMap

    def describe(self):
        return {"A": _text(self.A), "B1": _text(self.B1), "B2": _text(self.B2),
                "f1": sorted(map(list, self.f1.pairs)), "f2": sorted(map(list, self.f2.pairs))}


@dataclass
class AmalgamResult:
    D: Structure
    g1: PartialMap
    g2: object
    free: bool = True


def _text(M):
    from .structures import serialize_structure
    return serialize_structure(M)


def _check_instance(inst, anti):
    if not classify_map(inst.f2).is_embedding or inst.f2.domain != frozenset(range(inst.A.n)):
        raise StructureError("f2 must be a total embedding")
    if anti:
        if not isinstance(inst.f1, Multifunction) or inst.f1.domain != frozenset(range(inst.A.n)):
            raise StructureError("f1 must be a multifunction defined on all of A")
    elif inst.f1.domain != frozenset(range(inst.A.n)):
        raise StructureError("f1 must be total on A")


# ------------------------------------------------------------------- JEP

def jep_amalgam(A, B, D, size_bound=None):
    """A member of D jointly embedding A and B (A on 0..|A|-1, B after it)."""
    U = disjoint_union([A, B])
    if member_of(D, U):
        return U
    if size_bound is not None and A.n + B.n > size_bound:
        raise AmalgamationError(f"no joint embedding within {size_bound} vertices")
    idx = A.index.copy()
    off = A.n

    def rec(b):
        if b == B.n:
            return idx.freeze()
        v = idx.n
        demands = {}
        for r, rel in enumerate(B.signature.relations):
            for c in range(b):
                demands[(r, (v, off + c))] = (b, c) in B.tables[r]
                demands[(r, (off + c, v))] = (c, b) in B.tables[r]
            if "irr" not in rel.flags:
                demands[(r, (v, v))] = (b, b) in B.tables[r]
        for _ in point_completions(D, idx, demands):
            got = rec(b + 1)
            if got is not None:
                return got
        return None

    got = rec(0)
    if got is None:
        raise AmalgamationError("no joint embedding found")
    return got


# --------------------------------------------------------- forth amalgams

def _free_forth(inst):
    A, B1, B2 = inst.A, inst.B1, inst.B2
    f1, f2 = inst.f1.as_dict, inst.f2.as_dict
    core = {f2[a]: f1[a] for a in range(A.n)}
    g2 = dict(core)
    nxt = B1.n
    for b in range(B2.n):
        if b not in g2:
            g2[b] = nxt
            nxt += 1
    tables = [set(t) for t in B1.tables]
    for r, tab in enumerate(B2.tables):
        tables[r] |= {tuple(g2[v] for v in t) for t in tab}
    try:
        D = Structure(B1.signature, nxt, tuple(tables))
    except StructureError:
        return None
    return D, g2


def _square_ok(inst, res, anti):
    f2g2 = (mf_compose if anti else compose)(_mf(inst.f2) if anti else inst.f2, res.g2)
    f1g1 = (mf_compose(inst.f1, _mf(res.g1)) if anti else compose(inst.f1, res.g1))
    return f1g1.pairs == f2g2.pairs


def _mf(f):
    return Multifunction(f.source, f.target, f.pairs)


def verify_result(inst, res, kind, D=None, anti=False):
    """Re-check a returned square: membership, g1 embedding, g2 kind, commutation."""
    if D is not None and not member_of(D, res.D):
        return False
    if not classify_map(res.g1).is_embedding:
        return False
    if anti:
        if not has_cokind(res.g2, kind) or res.g2.domain != frozenset(range(inst.B2.n)):
            return False
    elif not has_kind(res.g2, kind) or res.g2.domain != frozenset(range(inst.B2.n)):
        return False
    return _square_ok(inst, res, anti)


def xy_amalgamate(inst, kinds, D, size_bound=None):
    """Complete an XY-square, free amalgam first, bounded search second.

    Returns an AmalgamResult or None when no amalgam with at most
    ``size_bound`` vertices exists.
    """
    _check_instance(inst, False)
    X, Y = (MapKind(k) for k in kinds)
    if not has_kind(inst.f1, X):
        raise StructureError(f"f1 is not of kind {X.value}")
    free = _free_forth(inst)
    if free is not None:
        Dst, g2 = free
        res = AmalgamResult(Dst, _inclusion(inst.B1, Dst), PartialMap(inst.B2, Dst, frozenset(g2.items())))
        if (size_bound is None or Dst.n <= size_bound) and verify_result(inst, res, Y, D):
            return res
    return _search_forth(inst, Y, D, size_bound if size_bound is not None else inst.B1.n + inst.B2.n)


def _inclusion(M, N):
    return PartialMap(M, N, frozenset((v, v) for v in range(M.n)))


def _search_forth(inst, Y, D, bound):
    B1, B2 = inst.B1, inst.B2
    f1, f2 = inst.f1.as_dict, inst.f2.as_dict
    g2 = {f2[a]: f1[a] for a in range(inst.A.n)}
    inj, emb = Y != MapKind.H, Y == MapKind.I
    if inj and len(set(g2.values())) < len(g2):
        return None
    idx = B1.index.copy()
    new = [b for b in range(B2.n) if b not in g2]
    bi = B2.index

    def fits_existing(b, v):
        if inj and v in g2.values():
            return False
        g2[b] = v
        good = True
        for r in range(len(B2.tables)):
            for t in bi.by_vertex[r][b]:
                if all(u in g2 for u in t) and tuple(g2[u] for u in t) not in idx.tables[r]:
                    good = False
            if good and emb:
                inv = {w: u for u, w in g2.items()}
                for t in idx.by_vertex[r][v]:
                    if all(u in inv for u in t) and tuple(inv[u] for u in t) not in B2.tables[r]:
                        good = False
        del g2[b]
        return good

    def demands(b, v):
        out = {}
        inv = {}
        for u, w in g2.items():
            inv.setdefault(w, []).append(u)
        for r, rel in enumerate(B2.signature.relations):
            for t in bi.by_vertex[r][b]:
                other = [u for u in t if u != b]
                if all(u in g2 for u in other):
                    out[(r, tuple(v if u == b else g2[u] for u in t))] = True
            if emb:
                for w, us in inv.items():
                    for u in us:
                        if (b, u) not in B2.tables[r]:
                            out.setdefault((r, (v, w)), False)
                        if (u, b) not in B2.tables[r]:
                            out.setdefault((r, (w, v)), False)
                if "irr" not in rel.flags and (b, b) not in B2.tables[r]:
                    out.setdefault((r, (v, v)), False)
        return out

    def rec(i):
        if i == len(new):
            Dst = idx.freeze()
            res = AmalgamResult(Dst, _inclusion(B1, Dst),
                                PartialMap(B2, Dst, frozenset(g2.items())), free=False)
            return res if verify_result(inst, res, Y, D) else None
        b = new[i]
        for v in range(idx.n):
            if fits_existing(b, v):
                g2[b] = v
                got = rec(i + 1)
                del g2[b]
                if got is not None:
                    return got
        if idx.n < bound:
            v = idx.n
            for _ in point_completions(D, idx, demands(b, v)):
                g2[b] = v
                got = rec(i + 1)
                del g2[b]
                if got is not None:
                    return got
        return None

    # the fixed part must already sit correctly inside B1
    if not has_kind(PartialMap(B2, B1, frozenset(g2.items())), Y):
        return None
    return rec(0)


# ---------------------------------------------------------- anti amalgams

def _free_anti(inst, Y):
    A, B1, B2 = inst.A, inst.B1, inst.B2
    f1, f2 = inst.f1.as_sets, inst.f2.as_dict
    g2 = {f2[a]: set(f1[a]) for a in range(A.n)}
    nxt = B1.n
    fresh = {}
    for b in range(B2.n):
        if b not in g2:
            g2[b] = {nxt}
            fresh[b] = nxt
            nxt += 1
    tables = [set(t) for t in B1.tables]
    for r, tab in enumerate(B2.tables):
        for t in tab:
            if all(u in fresh for u in t) or (Y == CoKind.I and any(u in fresh for u in t)):
                tables[r] |= set(itertools.product(*(sorted(g2[u]) for u in t)))
    try:
        D = Structure(B1.signature, nxt, tuple(tables))
    except StructureError:
        return None
    return D, g2


def anti_xy_amalgamate(inst, cokinds, D, size_bound=None):
    """Complete an anti-square ``f1-bar g1 = f2 g2-bar``."""
    _check_instance(inst, True)
    X, Y = (CoKind(k) for k in cokinds)
    if not has_cokind(inst.f1, X):
        raise StructureError(f"f1 is not of cokind {X.value}-bar")
    free = _free_anti(inst, Y)
    if free is not None:
        Dst, g2 = free
        res = AmalgamResult(Dst, _inclusion(inst.B1, Dst), Multifunction.from_sets(inst.B2, Dst, g2))
        if (size_bound is None or Dst.n <= size_bound) and verify_result(inst, res, Y, D, anti=True):
            return res
    return _search_anti(inst, Y, D, size_bound if size_bound is not None else inst.B1.n + inst.B2.n)


def _search_anti(inst, Y, D, bound):
    B1, B2 = inst.B1, inst.B2
    f1, f2 = inst.f1.as_sets, inst.f2.as_dict
    g2 = {f2[a]: sorted(f1[a]) for a in range(inst.A.n)}
    if Y != CoKind.H and any(len(s) != 1 for s in g2.values()):
        return None
    idx = B1.index.copy()
    owner = {v: b for b, vs in g2.items() for v in vs}
    new = [b for b in range(B2.n) if b not in g2]
    bi = B2.index

    def fits_existing(b, v):
        if v in owner:
            return False
        owner[v] = b
        g2[b] = [v]
        good = True
        for r in range(len(B2.tables)):
            for t in idx.by_vertex[r][v]:
                if all(u in owner for u in t) and tuple(owner[u] for u in t) not in B2.tables[r]:
                    good = False
            if good and Y == CoKind.I:
                for t in bi.by_vertex[r][b]:
                    if all(u in g2 for u in t) and tuple(g2[u][0] for u in t) not in idx.tables[r]:
                        good = False
        del owner[v]
        del g2[b]
        return good

    def demands(b, v):
        out = {}
        for r, rel in enumerate(B2.signature.relations):
            for w, c in owner.items():
                out[(r, (v, w))] = (b, c) in B2.tables[r] if Y == CoKind.I else False
                out[(r, (w, v))] = (c, b) in B2.tables[r] if Y == CoKind.I else False
                if Y != CoKind.I:
                    # relations are allowed where B2 has them
                    if (b, c) in B2.tables[r]:
                        del out[(r, (v, w))]
                    if (c, b) in B2.tables[r]:
                        del out[(r, (w, v))]
            if "irr" not in rel.flags and (b, b) not in B2.tables[r]:
                out[(r, (v, v))] = False
        return out

    def rec(i):
        if i == len(new):
            Dst = idx.freeze()
            res = AmalgamResult(Dst, _inclusion(B1, Dst), Multifunction.from_sets(B2, Dst, g2), free=False)
            return res if verify_result(inst, res, Y, D, anti=True) else None
        b = new[i]
        for v in range(idx.n):
            if fits_existing(b, v):
                owner[v] = b
                g2[b] = [v]
                got = rec(i + 1)
                del owner[v]
                del g2[b]
                if got is not None:
                    return got
        if idx.n < bound:
            v = idx.n
            for _ in point_completions(D, idx, demands(b, v)):
                owner[v] = b
                g2[b] = [v]
                got = rec(i + 1)
                del owner[v]
                del g2[b]
                if got is not None:
                    return got
        return None

    return rec(0)


# ------------------------------------------------------------- AP checker

def enumerate_multifunctions(A, B, kind="H"):
    """Every multifunction of the given cokind defined on all of A into B."""
    kind = CoKind(kind)
    choices = range(-1, A.n)  # owner of each B vertex; -1 = unused
    for owners in itertools.product(choices, repeat=B.n):
        sets = {a: set() for a in range(A.n)}
        for v, a in enumerate(owners):
            if a >= 0:
                sets[a].add(v)
        if any(not s for s in sets.values()):
            continue
        mf = Multifunction.from_sets(A, B, sets)
        if has_cokind(mf, kind):
            yield mf


@dataclass
class APReport:
    verdict: str
    checked: int
    total: int
    exhaustive: bool
    kinds: tuple
    anti: bool
    instance_bound: int
    witness_bound: int
    seed: int
    failure: AmalgamInstance = None
    reason: str = ""
    stats: dict = field(default_factory=dict)

    def as_record(self):
        rec = {"verdict": self.verdict, "checked": self.checked, "total": self.total,
               "exhaustive": self.exhaustive, "kinds": list(self.kinds), "anti": self.anti,
               "instance_bound": self.instance_bound, "witness_bound": self.witness_bound,
               "seed": self.seed}
        if self.failure is not None:
            rec["instance"] = self.failure.describe()
            rec["reason"] = self.reason
        return rec


EXHAUSTIVE_LIMIT = 10 ** 6


def ap_instances(D, kinds, bound, anti=False):
    """Per A: the (B1, f1) and (B2, f2) sides of every square up to ``bound``."""
    members = list(structures_up_to(D, bound))
    X = kinds[0]
    out = []
    for A in members:
        left = []
        for B1 in members:
            if anti:
                left += [(B1, f) for f in enumerate_multifunctions(A, B1, X)]
            else:
                left += [(B1, f) for f in enumerate_maps(A, B1, X)]
        right = []
        for B2 in members:
            if B2.n >= A.n:
                right += [(B2, f) for f in enumerate_maps(A, B2, "I")]
        if left and right:
            out.append((A, left, right))
    return out


def check_ap(D, kinds, instance_size_bound=3, witness_size_bound=6, probes=1000, seed=0,
             anti=False, limit=EXHAUSTIVE_LIMIT):
    """PASS when every square (or a seeded sample, past ``limit``) amalgamates."""
    groups = ap_instances(D, kinds, instance_size_bound, anti)
    total = sum(len(l) * len(r) for _, l, r in groups)
    exhaustive = total <= limit

    def squares():
        if exhaustive:
            for A, left, right in groups:
                for (B1, f1), (B2, f2) in itertools.product(left, right):
                    yield AmalgamInstance(A, B1, B2, f1, f2)
        else:
            rng = random.Random(seed)
            weights = [len(l) * len(r) for _, l, r in groups]
            for _ in range(probes):
                A, left, right = rng.choices(groups, weights)[0]
                (B1, f1), (B2, f2) = rng.choice(left), rng.choice(right)
                yield AmalgamInstance(A, B1, B2, f1, f2)

    amalg = anti_xy_amalgamate if anti else xy_amalgamate
    checked = 0
    free = 0
    for inst in squares():
        checked += 1
        res = amalg(inst, kinds, D, witness_size_bound)
        if res is None:
            return APReport("FAIL", checked, total, exhaustive, tuple(kinds), anti,
                            instance_size_bound, witness_size_bound, seed, inst,
                            f"no amalgam with at most {witness_size_bound} vertices")
        free += res.free
    return APReport("PASS", checked, total, exhaustive, tuple(kinds), anti,
                    instance_size_bound, witness_size_bound, seed, stats={"free": free})


def replay_failure(D, report):
    """Re-run the search on a FAIL certificate; True when it fails again."""
    amalg = anti_xy_amalgamate if report.anti else xy_amalgamate
    return amalg(report.failure, report.kinds, D, report.witness_bound) is None
