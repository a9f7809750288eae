"""Adding one vertex to a structure while staying inside a forbidden-pattern
class.

The new vertex's relations are chosen one old vertex at a time.  Every
forbidden pattern that could appear must use the new vertex, so after each
choice we only look for copies through the new vertex and the vertex just
decided.  Binary signatures only.
"""

from __future__ import annotations

from .maps import solve
from .structures import local_options


def _hits(D, idx, v, x, allowed):
    for P, reps in zip(D.forbidden, D.pair_orbits):
        if P.n > len(allowed):
            continue
        if P.n == 1:
            if x == v and next(solve(P, idx, "I", fixed={0: v}, allowed=allowed), None) is not None:
                return True
            continue
        if x == v:
            continue
        for p, q in reps:
            if next(solve(P, idx, "I", fixed={p: v, q: x}, allowed=allowed), None) is not None:
                return True
    return False


def point_completions(D, idx, demands=None, order=None, rng=None):
    """Yield the id of a new vertex each time ``idx`` holds a completion.

    ``idx`` is a mutable Index; the vertex is appended, its tuples are added
    while a completion is yielded and everything is undone when the generator
    finishes.  ``demands`` maps ``(relation, tuple)`` to True (required) or
    False (forbidden); tuples use the new vertex id ``idx.n`` as it is before
    the call.
    """
    demands = demands or {}
    v = idx.add_vertex()
    sig = idx.signature
    olds = list(range(v)) if order is None else list(order)
    rest = [u for u in range(v) if u not in set(olds)]
    olds += rest
    allowed = {v}

    def options(x):
        opts = []
        for opt in local_options(sig, v, x):
            good = True
            for (r, t), want in demands.items():
                if set(t) <= {v, x} and x in t and ((r, t) in opt) != want:
                    good = False
                    break
            if good:
                opts.append(opt)
        if rng is not None:
            rng.shuffle(opts)
        return opts

    def search():
        # depth-first over olds with an explicit stack; each frame is
        # (options iterator, option currently applied or None)
        if not olds:
            yield v
            return
        allowed.add(olds[0])
        stack = [[iter(options(olds[0])), None]]
        while stack:
            frame = stack[-1]
            x = olds[len(stack) - 1]
            if frame[1] is not None:
                for r, t in frame[1]:
                    idx.remove(r, t)
                frame[1] = None
            opt = next(frame[0], None)
            if opt is None:
                allowed.discard(x)
                stack.pop()
                continue
            for r, t in opt:
                idx.add(r, t)
            frame[1] = opt
            if _hits(D, idx, v, x, allowed):
                continue
            if len(stack) == len(olds):
                yield v
                continue
            nx = olds[len(stack)]
            allowed.add(nx)
            stack.append([iter(options(nx)), None])

    try:
        for loop in options(v):
            for r, t in loop:
                idx.add(r, t)
            if not _hits(D, idx, v, v, allowed):
                yield from search()
            for r, t in loop:
                idx.remove(r, t)
    finally:
        idx.pop_vertex()


def complete_point(D, M, demands=None, rng=None, order=None):
    """First completion of ``M`` plus one vertex honouring ``demands``, as a
    Structure, or None."""
    idx = M.index.copy()
    for _ in point_completions(D, idx, demands, order=order, rng=rng):
        return idx.freeze()
    return None


def can_complete(D, M, demands=None):
    return complete_point(D, M, demands) is not None
