"""Partial maps between finite structures and the backtracking search behind
every extension question."""

from __future__ import annotations

import itertools
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum

from .structures import StructureError, Structure


class MapKind(str, Enum):
    H = "H"  # homomorphism
    M = "M"  # monomorphism
    I = "I"  # embedding

    @property
    def rank(self):
        return "HMI".index(self.value)

    def implies(self, other):
        """True when every map of this kind is also of kind ``other``."""
        return self.rank >= MapKind(other).rank


ENDO_KINDS = "HEMBIA"
# endomorphism kind -> (map kind, surjective?)
ENDO_SPLIT = {"H": ("H", False), "E": ("H", True), "M": ("M", False),
              "B": ("M", True), "I": ("I", False), "A": ("I", True)}

MapClass = namedtuple("MapClass", "is_hom is_mono is_embedding is_surjective")


@dataclass(frozen=True)
class PartialMap:
    source: Structure
    target: Structure
    pairs: frozenset

    def __post_init__(self):
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        seen = set()
        for a, b in pairs:
            if a in seen:
                raise StructureError(f"source vertex {a} mapped twice")
            seen.add(a)
            if not 0 <= a < self.source.n or not 0 <= b < self.target.n:
                raise StructureError(f"pair {a}->{b} out of range")

    @classmethod
    def from_dict(cls, source, target, d):
        return cls(source, target, frozenset(d.items()))

    @property
    def as_dict(self):
        return dict(self.pairs)

    @property
    def domain(self):
        return frozenset(a for a, _ in self.pairs)

    @property
    def image(self):
        return frozenset(b for _, b in self.pairs)

    def __call__(self, a):
        return self.as_dict[a]

    def __repr__(self):
        return "{" + ", ".join(f"{a}->{b}" for a, b in sorted(self.pairs)) + "}"


def _as_dict(f):
    return f.as_dict if isinstance(f, PartialMap) else dict(f)


def _incident(M, vs):
    """Tuples of M touching any vertex in ``vs``, per relation."""
    idx = M.index
    out = []
    for r in range(len(M.tables)):
        seen = set()
        for v in vs:
            seen.update(idx.by_vertex[r][v])
        out.append(seen)
    return out


def classify_map(f):
    src, tgt = f.source, f.target
    if src.signature != tgt.signature:
        raise StructureError("signature mismatch")
    d = f.as_dict
    is_hom = True
    is_emb = True
    for r, tab_a in enumerate(_incident(src, d)):
        tab_b = tgt.tables[r]
        for t in tab_a:
            if all(v in d for v in t) and tuple(d[v] for v in t) not in tab_b:
                is_hom = False
                break
    injective = len(set(d.values())) == len(d)
    if is_hom and injective:
        inv = {b: a for a, b in d.items()}
        for r, tab_b in enumerate(_incident(tgt, inv)):
            tab_a = src.tables[r]
            for t in tab_b:
                if all(v in inv for v in t) and tuple(inv[v] for v in t) not in tab_a:
                    is_emb = False
                    break
    else:
        is_emb = False
    is_mono = is_hom and injective
    return MapClass(is_hom, is_mono, is_mono and is_emb, set(d.values()) == set(range(tgt.n)))


def has_kind(f, kind):
    c = classify_map(f)
    return {"H": c.is_hom, "M": c.is_mono, "I": c.is_embedding}[MapKind(kind).value]


def compose(f, g):
    """``f`` then ``g``."""
    gd = g.as_dict
    return PartialMap(f.source, g.target,
                      frozenset((a, gd[b]) for a, b in f.pairs if b in gd))


def identity(M):
    return PartialMap(M, M, frozenset((v, v) for v in range(M.n)))


# ------------------------------------------------------------------- search

def solve(A, B, kind="H", domain=None, fixed=None, allowed=None,
          surjective=False, rng=None, limit=None):
    """Yield dicts ``a -> b`` of the given kind from A into B.

    ``domain`` lists the A-vertices to assign (default: all); ``fixed`` is a
    pre-assignment; ``allowed`` restricts candidate targets.  A and B may be
    Structures or Index objects.  Targets are tried in increasing order unless
    ``rng`` is given, in which case they are shuffled.
    """
    ai = A.index if isinstance(A, Structure) else A
    bi = B.index if isinstance(B, Structure) else B
    kind = MapKind(kind).value
    inj = kind != "H"
    emb = kind == "I"
    universe = range(bi.n) if allowed is None else sorted(allowed)
    assign = {}
    inv = {}
    nrel = len(ai.tables)

    def ok(x, y):
        if inj and y in inv:
            return False
        assign[x] = y
        good = True
        for r in range(nrel):
            tb = bi.tables[r]
            for t in ai.by_vertex[r][x]:
                if all(v in assign for v in t) and tuple(assign[v] for v in t) not in tb:
                    good = False
                    break
            if not good:
                break
        if good and emb:
            inv[y] = x
            for r in range(nrel):
                ta = ai.tables[r]
                for t in bi.by_vertex[r][y]:
                    if all(v in inv for v in t) and tuple(inv[v] for v in t) not in ta:
                        good = False
                        break
                if not good:
                    break
            del inv[y]
        del assign[x]
        return good

    def place(x, y):
        assign[x] = y
        inv.setdefault(y, x) if not inj else inv.__setitem__(y, x)

    def unplace(x, y):
        del assign[x]
        if inv.get(y) == x:
            del inv[y]
            for a, b in assign.items():
                if b == y:
                    inv[y] = a
                    break

    for x, y in (fixed or {}).items():
        if not 0 <= y < bi.n or not ok(x, y):
            return
        place(x, y)
    todo = [x for x in (range(ai.n) if domain is None else domain) if x not in assign]
    if surjective and len(set(universe) - set(inv)) > len(todo):
        return

    def candidates(x):
        pool = None
        for r in range(nrel):
            if ai.out[r] is None:
                continue
            for z in ai.out[r][x]:
                if z == x:
                    s = {v for v in universe if v in bi.out[r][v]}
                elif z in assign:
                    s = bi.inn[r][assign[z]]
                else:
                    continue
                pool = set(s) if pool is None else pool & s
            for z in ai.inn[r][x]:
                if z != x and z in assign:
                    s = bi.out[r][assign[z]]
                    pool = set(s) if pool is None else pool & s
        if emb:
            # an embedding must also avoid relations absent from A
            if pool is None:
                pool = set(universe) - set(inv)
            for z, w in assign.items():
                for r in range(nrel):
                    if ai.out[r] is None:
                        continue
                    if z not in ai.out[r][x]:
                        pool -= bi.inn[r][w]
                    if z not in ai.inn[r][x]:
                        pool -= bi.out[r][w]
        if pool is None:
            cands = list(universe)
        else:
            cands = sorted(pool if allowed is None else pool & set(universe))
        if rng is not None:
            rng.shuffle(cands)
        return cands

    count = [0]

    def rec(i):
        if i == len(todo):
            if surjective and len(inv) < len(universe):
                return
            count[0] += 1
            yield dict(assign)
            return
        x = todo[i]
        for y in candidates(x):
            if ok(x, y):
                place(x, y)
                if not surjective or len(set(universe) - set(inv)) <= len(todo) - i - 1:
                    yield from rec(i + 1)
                unplace(x, y)
            if limit is not None and count[0] >= limit:
                return

    yield from rec(0)


def enumerate_maps(A, B, kind="H", total=True, surjective_required=False):
    """Stream PartialMaps of the given kind from A to B.

    With ``total=False`` every partial map is produced once, ordered by domain
    size, then domain, then targets lexicographically.
    """
    if A.signature != B.signature:
        raise StructureError("signature mismatch")
    if total:
        domains = [tuple(range(A.n))]
    else:
        domains = [c for k in range(A.n + 1) for c in itertools.combinations(range(A.n), k)]
    for dom in domains:
        for d in solve(A, B, kind, domain=dom, surjective=surjective_required):
            yield PartialMap(A, B, frozenset(d.items()))


def count_maps(A, B, kind="H", total=True, surjective_required=False):
    return sum(1 for _ in enumerate_maps(A, B, kind, total, surjective_required))


def embeds(P, M, fixed=None, allowed=None):
    return next(solve(P, M, "I", fixed=fixed, allowed=allowed), None) is not None


def automorphisms(M):
    for d in solve(M, M, "I", surjective=True):
        yield [d[v] for v in range(M.n)]


def enumerate_endomorphisms(M, kind="H"):
    if kind not in ENDO_SPLIT:
        raise ValueError(f"unknown endomorphism kind {kind!r}")
    base, surj = ENDO_SPLIT[kind]
    for d in solve(M, M, base, surjective=surj):
        yield PartialMap(M, M, frozenset(d.items()))


def extend_map_within(M, B, f, kind="H", embedding=None):
    """Extend ``f`` to a total map ``g: B -> M`` of the given kind.

    ``f`` maps A-vertices into M.  Without ``embedding`` the A-vertices are
    B-vertices already; otherwise ``embedding`` (A -> B) places them in B.
    Returns a PartialMap or None when exhaustive search finds nothing.
    """
    fd = _as_dict(f)
    if embedding is not None:
        ed = _as_dict(embedding)
        fd = {ed[a]: m for a, m in fd.items()}
    g = next(solve(B, M, kind, fixed=fd), None)
    return None if g is None else PartialMap(B, M, frozenset(g.items()))


def finite_preimage(alpha, A_indices):
    """A smallest vertex set whose image under ``alpha`` is exactly ``A_indices``."""
    d = alpha.as_dict
    out = set()
    for a in sorted(set(A_indices)):
        pre = [v for v in sorted(d) if d[v] == a]
        if not pre:
            raise StructureError(f"vertex {a} has no preimage")
        out.add(pre[0])
    return out
