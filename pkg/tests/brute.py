"""Naive reference implementations used as test oracles.

Nothing here calls the package's solver; maps are checked by looping over
raw tuples.
"""

import itertools


def is_hom(A, B, d):
    for r, tab in enumerate(A.tables):
        for t in tab:
            if all(v in d for v in t) and tuple(d[v] for v in t) not in B.tables[r]:
                return False
    return True


def is_mono(A, B, d):
    return is_hom(A, B, d) and len(set(d.values())) == len(d)


def is_emb(A, B, d):
    if not is_mono(A, B, d):
        return False
    dom = sorted(d)
    for r, rel in enumerate(A.signature.relations):
        for t in itertools.product(dom, repeat=rel.arity):
            if (t in A.tables[r]) != (tuple(d[v] for v in t) in B.tables[r]):
                return False
    return True


CHECK = {"H": is_hom, "M": is_mono, "I": is_emb}
SPLIT = {"H": ("H", False), "E": ("H", True), "M": ("M", False),
         "B": ("M", True), "I": ("I", False), "A": ("I", True)}


def total_maps(A, B, kind):
    base, surj = SPLIT[kind]
    for img in itertools.product(range(B.n), repeat=A.n):
        d = dict(enumerate(img))
        if surj and set(img) != set(range(B.n)):
            continue
        if CHECK[base](A, B, d):
            yield d


def partial_maps(A, B, kind):
    for k in range(A.n + 1):
        for dom in itertools.combinations(range(A.n), k):
            for img in itertools.product(range(B.n), repeat=k):
                d = dict(zip(dom, img))
                if CHECK[kind](A, B, d):
                    yield d


def profile(M):
    """XY -> bool straight from the definition: every partial X-map of M
    is the restriction of some total self-map of kind Y."""
    restr = {}
    for y in "HEMBIA":
        keys = set()
        for d in total_maps(M, M, y):
            items = sorted(d.items())
            for k in range(len(items) + 1):
                for sub in itertools.combinations(items, k):
                    keys.add(sub)
        restr[y] = keys
    out = {}
    for x in "IMH":
        partials = [tuple(sorted(d.items())) for d in partial_maps(M, M, x)]
        for y in "HEMBIA":
            out[x + y] = all(p in restr[y] for p in partials)
    return out


def preserves_nonrelations(B, A, pairs):
    """pairs: (b, a) with b in B, a in A.  Every non-related tuple of B is
    sent only to non-related tuples of A."""
    img = {}
    for b, a in pairs:
        img.setdefault(b, set()).add(a)
    for r, rel in enumerate(B.signature.relations):
        for t in itertools.product(sorted(img), repeat=rel.arity):
            if t in B.tables[r]:
                continue
            for u in itertools.product(*(sorted(img[v]) for v in t)):
                if u in A.tables[r]:
                    return False
    return True
