"""Multifunctions (converses of functions) and antihomomorphisms.

A multifunction sends each source point to a set of target points, with the
restriction that no target point is reached from two different sources.  The
converse of a surjective homomorphism is exactly a surjective
antihomomorphism: a multifunction carrying non-related tuples only to
non-related tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .maps import PartialMap, _incident
from .structures import StructureError


class CoKind(str, Enum):
    H = "H"  # antihomomorphism
    M = "M"  # antimonomorphism
    I = "I"  # inverse isomorphism

    @property
    def rank(self):
        return "HMI".index(self.value)

    @property
    def label(self):
        return self.value + "̄"

    def implies(self, other):
        return self.rank >= CoKind(other).rank


def compose_cokinds(first, second):
    """Cokind guaranteed for a composite: the weaker of the two."""
    return CoKind("HMI"[min(CoKind(first).rank, CoKind(second).rank)])


@dataclass(frozen=True)
class Multifunction:
    source: object
    target: object
    pairs: frozenset

    def __post_init__(self):
        pairs = frozenset(tuple(p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        owner = {}
        for s, t in pairs:
            if owner.setdefault(t, s) != s:
                raise StructureError(f"target {t} reached from {owner[t]} and {s}")
        for struct, pos in ((self.source, 0), (self.target, 1)):
            if struct is not None:
                for p in pairs:
                    if not 0 <= p[pos] < struct.n:
                        raise StructureError(f"pair {p} out of range")

    @classmethod
    def from_sets(cls, source, target, d):
        return cls(source, target, frozenset((s, t) for s, ts in d.items() for t in ts))

    @property
    def as_sets(self):
        out = {}
        for s, t in self.pairs:
            out.setdefault(s, set()).add(t)
        return out

    @property
    def domain(self):
        return frozenset(s for s, _ in self.pairs)

    @property
    def image(self):
        return frozenset(t for _, t in self.pairs)

    def is_function(self):
        return all(len(ts) == 1 for ts in self.as_sets.values())

    def __repr__(self):
        return "{" + ", ".join(f"{s}->{sorted(ts)}" for s, ts in sorted(self.as_sets.items(), key=repr)) + "}"


def converse(f):
    """Reverse every pair.

    PartialMap -> Multifunction and Multifunction -> PartialMap when the
    structures are known; a bare dict (a function on labels) becomes a
    Multifunction without structures, and back.
    """
    if isinstance(f, PartialMap):
        return Multifunction(f.target, f.source, frozenset((b, a) for a, b in f.pairs))
    if isinstance(f, Multifunction):
        rev = frozenset((t, s) for s, t in f.pairs)
        if f.source is not None and f.target is not None:
            return PartialMap(f.target, f.source, rev)
        return dict(rev)
    if isinstance(f, dict):
        return Multifunction(None, None, frozenset((b, a) for a, b in f.items()))
    raise TypeError(f"cannot take the converse of {type(f).__name__}")


def mf_image(mf, w):
    """Image of a point, of a tuple (product of coordinate images) or of a
    set of points (union)."""
    sets = mf.as_sets

    def point(x):
        if mf.source is not None and not (isinstance(x, int) and 0 <= x < mf.source.n):
            raise StructureError(f"vertex {x} out of range")
        return sets.get(x, set())

    if isinstance(w, tuple):
        return set(itertools.product(*(sorted(point(x), key=repr) for x in w)))
    if isinstance(w, (set, frozenset)):
        out = set()
        for x in w:
            out |= point(x)
        return out
    return set(point(w))


def mf_compose(f, g):
    """Relational composite: apply ``f`` first, then ``g``."""
    if f.target is not None and g.source is not None and f.target != g.source:
        raise StructureError("multifunctions are not composable")
    gs = g.as_sets
    pairs = frozenset((s, z) for s, t in f.pairs for z in gs.get(t, ()))
    return Multifunction(f.source, g.target, pairs)


def identity_mf(M):
    return Multifunction(M, M, frozenset((v, v) for v in range(M.n)))


def _preserves_nonrelations(mf):
    B, A = mf.source, mf.target
    back = {t: s for s, t in mf.pairs}
    for tab_b, tab_a in zip(B.tables, _incident(A, back)):
        for t in tab_a:
            if all(v in back for v in t) and tuple(back[v] for v in t) not in tab_b:
                return False
    return True


def _preserves_relations(mf):
    B, A = mf.source, mf.target
    fwd = {s: t for s, t in mf.pairs}
    for tab_b, tab_a in zip(_incident(B, fwd), A.tables):
        for t in tab_b:
            if all(v in fwd for v in t) and tuple(fwd[v] for v in t) not in tab_a:
                return False
    return True


def is_antihomomorphism(mf):
    if mf.source is None or mf.target is None:
        raise StructureError("antihomomorphism check needs structures")
    return _preserves_nonrelations(mf)


def cokind(mf):
    """Strongest cokind of ``mf`` or None when it is not an antihomomorphism."""
    if not is_antihomomorphism(mf):
        return None
    if not mf.is_function():
        return CoKind.H
    if _preserves_relations(mf):
        return CoKind.I
    return CoKind.M


def has_cokind(mf, kind):
    c = cokind(mf)
    return c is not None and c.implies(kind)


def extend_multifunction_within(M, B, A_indices, fbar, kind="H", max_image=1):
    """Extend ``fbar`` (B-vertices of A -> sets of M-vertices) over all of B.

    New vertices receive nonempty, pairwise disjoint image sets, tried by
    increasing size.  Shrinking an image set never breaks the antihomomorphism
    condition, so singletons already decide existence; ``max_image`` only
    widens the search.  Returns a Multifunction B -> M or None.
    """
    kind = CoKind(kind)
    sets = fbar.as_sets if isinstance(fbar, Multifunction) else {a: set(v) for a, v in fbar.items()}
    A_indices = set(A_indices)
    if set(sets) - A_indices:
        raise StructureError("multifunction defined outside A")
    start = Multifunction.from_sets(B, M, sets)
    if not has_cokind(start, kind):
        raise StructureError("given multifunction does not have the stated cokind")
    if kind != CoKind.H:
        max_image = 1
    new = [b for b in range(B.n) if b not in A_indices]
    owner = {t: s for s, t in start.pairs}
    fwd = {s: sorted(ts) for s, ts in sets.items()}
    mi, bi = M.index, B.index

    def fits(b, img):
        for v in img:
            owner[v] = b
        fwd[b] = img
        good = True
        for r in range(len(M.tables)):
            for t in (tt for v in img for tt in mi.by_vertex[r][v]):
                if all(u in owner for u in t) and tuple(owner[u] for u in t) not in B.tables[r]:
                    good = False
                    break
            if good and kind == CoKind.I:
                for t in bi.by_vertex[r][b]:
                    if all(u in fwd for u in t) and tuple(fwd[u][0] for u in t) not in M.tables[r]:
                        good = False
                        break
            if not good:
                break
        for v in img:
            del owner[v]
        del fwd[b]
        return good

    def rec(i):
        if i == len(new):
            return True
        b = new[i]
        free = [v for v in range(M.n) if v not in owner]
        for k in range(1, max_image + 1):
            for img in itertools.combinations(free, k):
                if fits(b, list(img)):
                    for v in img:
                        owner[v] = b
                    fwd[b] = list(img)
                    if rec(i + 1):
                        return True
                    for v in img:
                        del owner[v]
                    del fwd[b]
        return False

    if not rec(0):
        return None
    return Multifunction.from_sets(B, M, fwd)
