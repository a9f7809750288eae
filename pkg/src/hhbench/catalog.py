"""Lazily grown approximations of the countable homogeneous graphs and
digraphs, with their one-point witness rules.

Every catalog structure is the generic structure of a class given by
forbidden patterns, so a vertex with a prescribed relation pattern over a
finite set S exists in the countable structure exactly when S plus that
pattern lies in the class.  Oracles answer such requests and extend their
finite approximation on demand.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .completion import point_completions
from .homogeneity import ClassLabel
from .maps import embeds
from .structures import (DIGRAPH, GRAPH, ClassDescriptor, StructureError, complete_graph,
                         digraph, empty_structure, graph, induced_substructure, null_graph)

OMEGA = None  # "unbounded" parameter value


class OracleError(ValueError):
    pass


def parse_param(text):
    t = str(text).strip().lower()
    if t in ("w", "omega", "inf", "aleph0", "ω"):
        return OMEGA
    try:
        v = int(t)
    except ValueError:
        raise OracleError(f"bad parameter {text!r}") from None
    if v < 1:
        raise OracleError(f"parameter must be positive, got {v}")
    return v


def format_param(p):
    return "w" if p is OMEGA else str(p)


# ---------------------------------------------------------------- patterns

def nastydig():
    """w -> x -> v with v and w unrelated (vertices 0=w, 1=x, 2=v)."""
    return digraph(3, [(0, 1), (1, 2)])


def two_cycle():
    return digraph(2, [(0, 1), (1, 0)])


def null_digraph(n):
    return digraph(n)


def directed_3cycle():
    return digraph(3, [(0, 1), (1, 2), (2, 0)])


def k1_plus_k2():
    return graph(3, [(1, 2)])


def _induced_p3_orientations():
    return (digraph(3, [(0, 1), (1, 2)]), digraph(3, [(0, 1), (2, 1)]), digraph(3, [(1, 0), (1, 2)]))


def embeds_pattern(M, pattern):
    if M.signature != pattern.signature:
        raise StructureError("signature mismatch")
    return embeds(pattern, M)


# ----------------------------------------------------------------- catalog

def _path3():
    return graph(3, [(0, 1), (1, 2)])


def _union_of_completes(m, s):
    forb = [_path3()]
    if s is not OMEGA:
        forb.append(complete_graph(s + 1))
    if m is not OMEGA:
        forb.append(null_graph(m + 1))
    return forb


def _complement_union(m, s):
    forb = [k1_plus_k2()]
    if s is not OMEGA:
        forb.append(null_graph(s + 1))
    if m is not OMEGA:
        forb.append(complete_graph(m + 1))
    return forb


def _need(params, k, name):
    if len(params) != k:
        raise OracleError(f"{name} takes {k} parameter(s), got {len(params)}")


def _henson_n(params, name):
    _need(params, 1, name)
    n = params[0]
    if n is OMEGA or n < 3:
        raise OracleError(f"{name} needs a finite n >= 3")
    return n


# name -> (signature, forbidden-builder, number of params)
_AGES = {
    "complete": (GRAPH, lambda p: [null_graph(2)], 0),
    "null": (GRAPH, lambda p: [complete_graph(2)], 0),
    "random_graph": (GRAPH, lambda p: [], 0),
    "henson": (GRAPH, lambda p: [complete_graph(_henson_n(p, "henson"))], 1),
    "henson_complement": (GRAPH, lambda p: [null_graph(_henson_n(p, "henson_complement"))], 1),
    "union_of_completes": (GRAPH, lambda p: _union_of_completes(*p), 2),
    "complement_union": (GRAPH, lambda p: _complement_union(*p), 2),
    "random_tournament": (DIGRAPH, lambda p: [two_cycle(), null_digraph(2)], 0),
    "linear_order": (DIGRAPH, lambda p: [two_cycle(), null_digraph(2), directed_3cycle()], 0),
    "generic_digraph": (DIGRAPH, lambda p: [two_cycle()], 0),
    "generic_digraph_2cycles": (DIGRAPH, lambda p: [], 0),
    "union_of_random_tournaments": (DIGRAPH, lambda p: [two_cycle(), *_induced_p3_orientations()], 0),
}

CATALOG = tuple(_AGES)


def descriptor(name, params=()):
    if name not in _AGES:
        raise OracleError(f"unknown catalog structure {name!r}")
    sig, build, k = _AGES[name]
    params = tuple(params)
    _need(params, k, name)
    label = name + (":" + ",".join(format_param(p) for p in params) if params else "")
    return ClassDescriptor(sig, tuple(build(params)), label)


def parse_name(text):
    """``henson:3`` -> ("henson", (3,)); ``union_of_completes:w,2`` likewise."""
    name, _, rest = text.partition(":")
    params = tuple(parse_param(p) for p in rest.split(",")) if rest else ()
    return name.strip(), params


_MHH = {
    "complete": "HA",
    "null": "MA HE",
    "random_graph": "IA MB HE",
    "henson": "IA",
    "henson_complement": "IA MM HH",
    "random_tournament": "HA",
    "linear_order": "HA",
    "generic_digraph": "IA MB",
    "generic_digraph_2cycles": "IA MB HE",
    "union_of_random_tournaments": "IA MB HE",
}


def expected_mhh(name, params=()):
    """Published maximal classes for the countable structure."""
    if name not in _AGES:
        raise OracleError(f"unknown catalog structure {name!r}")
    params = tuple(params)
    _need(params, _AGES[name][2], name)
    if name in ("union_of_completes", "complement_union"):
        m, s = params
        if m is not OMEGA and s is not OMEGA:
            raise OracleError("both parameters finite gives a finite structure; classify it instead")
        if m is OMEGA and s is OMEGA:
            text = "IA MB HE"
        elif name == "union_of_completes":
            text = "IA HE" if m is OMEGA else "IA MM HH"
        else:
            # complements: infinitely many finite blocks -> K-bar-free like
            text = "IA MM HH" if m is OMEGA else "IA"
    else:
        text = _MHH[name]
    return {ClassLabel.parse(t) for t in text.split()}


# ---------------------------------------------------------------- requests

GRAPH_TOKENS = ("adj", "nonadj")
DIGRAPH_TOKENS = ("out", "in", "two", "ind")


@dataclass(frozen=True)
class ExtensionRequest:
    """Relation of a wanted vertex to some existing vertices.

    Graph tokens: ``adj``, ``nonadj``.  Digraph tokens: ``out`` (new -> u),
    ``in`` (u -> new), ``two`` (both), ``ind`` (neither).
    """

    pattern: tuple  # sorted (vertex, token) pairs

    @classmethod
    def of(cls, **groups):
        pat = {}
        for token, vs in groups.items():
            token = token.rstrip("_")
            for v in vs:
                if pat.setdefault(v, token) != token:
                    raise OracleError(f"vertex {v} requested twice")
        return cls(tuple(sorted(pat.items())))

    @classmethod
    def parse(cls, text):
        """``adj:0,2 nonadj:1`` or ``out:0 in:1 two:2 ind:3``."""
        pat = {}
        for part in text.split():
            token, _, vs = part.partition(":")
            if token not in GRAPH_TOKENS + DIGRAPH_TOKENS or not vs:
                raise OracleError(f"bad request part {part!r}")
            for v in vs.split(","):
                try:
                    v = int(v)
                except ValueError:
                    raise OracleError(f"bad vertex {v!r} in {part!r}") from None
                if pat.setdefault(v, token) != token:
                    raise OracleError(f"vertex {v} requested twice")
        return cls(tuple(sorted(pat.items())))

    @property
    def vertices(self):
        return [v for v, _ in self.pattern]

    def demands(self, signature, x):
        """``(relation, tuple) -> wanted`` with ``x`` standing for the new vertex."""
        out = {}
        if signature == GRAPH:
            for v, tok in self.pattern:
                if tok not in GRAPH_TOKENS:
                    raise OracleError(f"token {tok!r} is not a graph token")
                out[(0, (x, v))] = tok == "adj"
        elif signature == DIGRAPH:
            for v, tok in self.pattern:
                if tok not in DIGRAPH_TOKENS:
                    raise OracleError(f"token {tok!r} is not a digraph token")
                out[(0, (x, v))] = tok in ("out", "two")
                out[(0, (v, x))] = tok in ("in", "two")
        else:
            raise OracleError("requests are defined for graphs and digraphs")
        return out

    def __str__(self):
        groups = {}
        for v, tok in self.pattern:
            groups.setdefault(tok, []).append(str(v))
        return " ".join(f"{t}:{','.join(vs)}" for t, vs in groups.items())


# ------------------------------------------------------------------ oracle

@dataclass
class Oracle:
    descriptor: ClassDescriptor
    name: str = ""
    params: tuple = ()
    seed: int = 0
    rng: random.Random = field(default=None, repr=False)
    max_size: int = None  # ceiling on the approximation; None = unbounded

    def __post_init__(self):
        if self.rng is None:
            self.rng = random.Random(self.seed)
        self._idx = empty_structure(self.descriptor.signature).index.copy()
        self._frozen = None

    # -- state
    @property
    def approximation(self):
        if self._frozen is None:
            self._frozen = self._idx.freeze_shared()
        return self._frozen

    snapshot = approximation

    @property
    def n(self):
        return self._idx.n

    @property
    def signature(self):
        return self.descriptor.signature

    def _check_vertices(self, vs):
        for v in vs:
            if not (isinstance(v, int) and 0 <= v < self.n):
                raise OracleError(f"vertex {v} is not in the approximation (size {self.n})")

    # -- demand level (used by the extension checkers)
    def present_witnesses(self, demands, exclude=()):
        """Existing vertices satisfying ``demands`` (keys use id ``self.n``)."""
        x = self.n
        tabs = self._idx.tables
        out = []
        for u in range(self.n):
            if u in exclude:
                continue
            ok = True
            for (r, t), want in demands.items():
                tt = tuple(u if w == x else w for w in t)
                if (tt in tabs[r]) != want:
                    ok = False
                    break
            if ok:
                out.append(u)
        return out

    def demands_realizable(self, demands, base=()):
        """Is there a vertex outside ``base`` with this pattern in the
        countable structure?  Decided by completing ``base`` plus the
        mentioned vertices by one point inside the age."""
        x = self.n
        S = sorted({w for (_, t) in demands for w in t if w != x} | set(base))
        self._check_vertices(S)
        sub = induced_substructure(self.approximation, S)
        pos = {w: i for i, w in enumerate(S)}
        pos[x] = len(S)
        local = {(r, tuple(pos[w] for w in t)): want for (r, t), want in demands.items()}
        idx = sub.index.copy()
        for _ in point_completions(self.descriptor, idx, local):
            return True
        return False

    def realize_demands(self, demands, prefer_fresh=True, exclude=()):
        """Vertex id outside ``exclude`` satisfying ``demands`` (adding one
        when needed) or None."""
        if not self.demands_realizable(demands, exclude):
            return None
        x = self.n
        mentioned = {w for (_, t) in demands for w in t if w != x} | set(exclude)
        if prefer_fresh and (self.max_size is None or x < self.max_size):
            order = sorted(mentioned) + [u for u in range(x) if u not in mentioned]
            work = self._idx.copy()
            grown = None
            for _ in point_completions(self.descriptor, work, demands, order=order, rng=self.rng):
                grown = work.copy()
                break
            if grown is not None:
                self._idx = grown
                self._frozen = None
                return x
        got = self.present_witnesses(demands, exclude=mentioned)
        return got[0] if got else None

    # -- request level
    def can_realize(self, req):
        self._check_vertices(req.vertices)
        return self.demands_realizable(req.demands(self.signature, self.n))

    def realize(self, req):
        """Vertex answering ``req``: fresh when possible, else an existing one
        outside the request.  None exactly when ``can_realize`` is false."""
        self._check_vertices(req.vertices)
        return self.realize_demands(req.demands(self.signature, self.n))

    def grow(self, size, max_request=3):
        """Extend the approximation to at least ``size`` vertices using
        random requests over existing vertices."""
        stuck = 0
        if self.max_size is not None:
            size = min(size, self.max_size)
        while self.n < size:
            before = self.n
            k = self.rng.randint(0, min(max_request, self.n))
            vs = self.rng.sample(range(self.n), k)
            tokens = GRAPH_TOKENS if self.signature == GRAPH else DIGRAPH_TOKENS
            req = ExtensionRequest(tuple(sorted((v, self.rng.choice(tokens)) for v in vs)))
            if not self.can_realize(req):
                req = ExtensionRequest(())
            self.realize(req)
            if self.n == before:
                stuck += 1
                if stuck > 50:
                    break  # the structure is finite and complete
            else:
                stuck = 0
        return self.approximation


def make_oracle(name, params=(), seed=0, max_size=None):
    if isinstance(name, str) and ":" in name and not params:
        name, params = parse_name(name)
    D = descriptor(name, params)
    return Oracle(D, name, tuple(params), seed, max_size=max_size)
