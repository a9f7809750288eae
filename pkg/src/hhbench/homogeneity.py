"""The eighteen XY-homogeneity notions, their inclusion order, and a brute
force classifier for finite structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .maps import PartialMap, enumerate_endomorphisms, enumerate_maps

XS = "IMH"
YS = "HEMBIA"

# surjective kind -> the forth kind it pairs with
S_PAIRS = {"E": "H", "B": "M", "A": "I"}


@dataclass(frozen=True, order=True)
class ClassLabel:
    x: str
    y: str

    def __post_init__(self):
        if self.x not in XS or self.y not in YS:
            raise ValueError(f"bad class label {self.x}{self.y}")

    @classmethod
    def parse(cls, text):
        t = text.strip().upper()
        if len(t) != 2:
            raise ValueError(f"bad class label {text!r}")
        return cls(t[0], t[1])

    def __str__(self):
        return self.x + self.y

    __repr__ = __str__

    @property
    def forth_only(self):
        return self.y in "HMI"

    @property
    def back_and_forth(self):
        return self.y in "EBA"

    @property
    def no_implication(self):
        return str(self) in {"IH", "IE", "IM", "IB", "MH", "ME"}

    @property
    def implication(self):
        return not self.no_implication

    @property
    def partition(self):
        tags = ["F" if self.forth_only else "B"]
        tags.append("N" if self.no_implication else "I")
        return tuple(tags)

    @property
    def forth_y(self):
        """Map kind demanded by the forth condition."""
        return S_PAIRS.get(self.y, self.y)


ALL_LABELS = tuple(ClassLabel(x, y) for x in XS for y in YS)

_COVERS = """HA-MA HA=HI HA-HB MA-IA MA=MI MA-MB HI-MI HI-HM HB-MB HB-HM HB-HE
IA=II IA-IB MI-II MI-MM MB-IB MB-MM MB-ME HM-MM HM-HH HE-ME HE-HH II-IM IB-IM
IB-IE MM-IM MM-MH ME-IE ME-MH HH-MH IM-IH IE-IH MH-IH"""

EQUALITIES = (("II", "IA"), ("MI", "MA"), ("HI", "HA"))
PREFERRED = {"II": "IA", "MI": "MA", "HI": "HA"}


def _edges():
    out = []
    for tok in _COVERS.split():
        if "=" in tok:
            a, b = tok.split("=")
            out += [(a, b), (b, a)]
        else:
            a, b = tok.split("-")
            out.append((a, b))
    return out


@lru_cache(maxsize=None)
def _up_sets():
    succ = {str(lab): set() for lab in ALL_LABELS}
    for a, b in _edges():
        succ[a].add(b)
    up = {}
    for lab in succ:
        seen, stack = {lab}, [lab]
        while stack:
            for nxt in succ[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        up[lab] = frozenset(seen)
    return up


def _lab(a):
    return a if isinstance(a, ClassLabel) else ClassLabel.parse(a)


def poset_leq(a, b):
    """True when class ``a`` is contained in class ``b`` (a is stronger)."""
    return str(_lab(b)) in _up_sets()[str(_lab(a))]


def representative(label):
    s = str(_lab(label))
    return ClassLabel.parse(PREFERRED.get(s, s))


def covering_below(label):
    """Quotient classes directly below ``label`` (preferred names)."""
    lab = representative(label)
    below = {representative(b) for b in ALL_LABELS
             if poset_leq(b, lab) and not poset_leq(lab, b)}
    return sorted(b for b in below
                  if not any(poset_leq(b, c) and not poset_leq(c, b) for c in below if c != b))


# ----------------------------------------------------------------- finite

@dataclass
class Decision:
    holds: bool
    counterexample: PartialMap = None


class _Cache:
    """Endomorphism restrictions per Y kind, shared across labels."""

    def __init__(self, M):
        self.M = M
        self._restr = {}
        self._partials = {}

    def restrictions(self, y):
        if y not in self._restr:
            keys = set()
            for e in enumerate_endomorphisms(self.M, y):
                pairs = sorted(e.pairs)
                for k in range(len(pairs) + 1):
                    for sub in itertools.combinations(pairs, k):
                        keys.add(frozenset(sub))
            self._restr[y] = keys
        return self._restr[y]

    def partials(self, x):
        if x not in self._partials:
            self._partials[x] = list(enumerate_maps(self.M, self.M, x, total=False))
        return self._partials[x]


def decide_finite_homogeneity(M, label, _cache=None):
    """Does every partial map of kind X between induced substructures of M
    extend to a total endomorphism of kind Y?"""
    lab = _lab(label)
    cache = _cache or _Cache(M)
    ext = cache.restrictions(lab.y)
    for f in cache.partials(lab.x):
        if f.pairs not in ext:
            return Decision(False, f)
    return Decision(True)


class SizeGuardError(ValueError):
    pass


def full_profile(M, max_size=7):
    if max_size is not None and M.n > max_size:
        raise SizeGuardError(f"structure has {M.n} vertices; guard is {max_size}")
    cache = _Cache(M)
    return {lab: decide_finite_homogeneity(M, lab, cache).holds for lab in ALL_LABELS}


class ProfileError(ValueError):
    pass


def is_upward_closed(profile):
    return all(profile[b] for a in ALL_LABELS if profile[a]
               for b in ALL_LABELS if poset_leq(a, b))


def mhh_classes(profile):
    profile = {_lab(k): v for k, v in profile.items()}
    sat = [lab for lab in ALL_LABELS if profile.get(lab)]
    if not sat:
        raise ProfileError("no class satisfied; the classifier never yields this")
    if not is_upward_closed(profile):
        raise ProfileError("profile is not upward closed")
    minimal = {representative(a) for a in sat
               if not any(poset_leq(b, a) and not poset_leq(a, b) for b in sat)}
    return set(minimal)


def is_core_finite(M):
    return all(e for e in _endos_are_embeddings(M))


def _endos_are_embeddings(M):
    from .maps import classify_map
    for e in enumerate_endomorphisms(M, "H"):
        yield classify_map(e).is_embedding


def format_labels(labels):
    return "{" + ", ".join(str(l) for l in sorted(labels, key=_order_key)) + "}"


def _order_key(lab):
    return (XS.index(lab.x), YS.index(lab.y))
