"""Finite relational structures, signatures and forbidden-pattern classes.

Vertices are the integers ``0..n-1``.  Relations are stored as frozensets of
tuples; symmetric relations hold both orientations of every pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

FLAGS = {"sym": "sym", "symmetric": "sym", "irr": "irr", "irreflexive": "irr",
         "anti": "anti", "antisymmetric": "anti"}


class StructureError(ValueError):
    """Malformed structure text or a structure violating its signature."""

    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    flags: frozenset = frozenset()

    def __post_init__(self):
        if not self.name.isidentifier():
            raise StructureError(f"bad relation name {self.name!r}")
        if self.arity < 1:
            raise StructureError(f"relation {self.name}: arity must be >= 1")
        flags = frozenset(FLAGS.get(f, f) for f in self.flags)
        bad = flags - {"sym", "irr", "anti"}
        if bad:
            raise StructureError(f"relation {self.name}: unknown flags {sorted(bad)}")
        if flags and self.arity != 2:
            raise StructureError(f"relation {self.name}: flags need arity 2")
        object.__setattr__(self, "flags", flags)


@dataclass(frozen=True)
class Signature:
    relations: tuple

    def __post_init__(self):
        rels = tuple(self.relations)
        names = [r.name for r in rels]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation names")
        object.__setattr__(self, "relations", rels)

    @property
    def names(self):
        return [r.name for r in self.relations]

    def index(self, name):
        for i, r in enumerate(self.relations):
            if r.name == name:
                return i
        raise KeyError(name)

    def header(self):
        parts = []
        for r in self.relations:
            flags = "".join(" " + f for f in ("sym", "irr", "anti") if f in r.flags)
            parts.append(f"{r.name}/{r.arity}{flags}")
        return "signature " + " ".join(parts)


GRAPH = Signature((Relation("edge", 2, frozenset({"sym", "irr"})),))
DIGRAPH = Signature((Relation("arc", 2, frozenset({"irr"})),))


class Index:
    """Adjacency lookups used by the search routines.

    ``out[r][u]`` / ``inn[r][v]`` exist only for binary relations.  Instances
    built from a Structure must be treated as read-only; ``copy`` gives a
    mutable one.
    """

    def __init__(self, signature, n, tables):
        self.signature = signature
        self.n = n
        self.tables = [set(t) for t in tables]
        self.by_vertex = [[[] for _ in range(n)] for _ in tables]
        self.out = []
        self.inn = []
        for r, rel in enumerate(signature.relations):
            binary = rel.arity == 2
            self.out.append([set() for _ in range(n)] if binary else None)
            self.inn.append([set() for _ in range(n)] if binary else None)
            for t in self.tables[r]:
                self._register(r, t)

    def _register(self, r, t):
        for v in set(t):
            self.by_vertex[r][v].append(t)
        if self.out[r] is not None:
            self.out[r][t[0]].add(t[1])
            self.inn[r][t[1]].add(t[0])

    def copy(self):
        new = Index.__new__(Index)
        new.signature = self.signature
        new.n = self.n
        new.tables = [set(t) for t in self.tables]
        new.by_vertex = [[list(ts) for ts in rows] for rows in self.by_vertex]
        new.out = [None if o is None else [set(s) for s in o] for o in self.out]
        new.inn = [None if o is None else [set(s) for s in o] for o in self.inn]
        return new

    def add_vertex(self):
        v = self.n
        self.n += 1
        for r in range(len(self.tables)):
            self.by_vertex[r].append([])
            if self.out[r] is not None:
                self.out[r].append(set())
                self.inn[r].append(set())
        return v

    def pop_vertex(self):
        v = self.n - 1
        for r in range(len(self.tables)):
            for t in list(self.by_vertex[r][v]):
                self.remove(r, t)
            self.by_vertex[r].pop()
            if self.out[r] is not None:
                self.out[r].pop()
                self.inn[r].pop()
        self.n -= 1

    def add(self, r, t):
        if t not in self.tables[r]:
            self.tables[r].add(t)
            self._register(r, t)

    def remove(self, r, t):
        self.tables[r].discard(t)
        for v in set(t):
            self.by_vertex[r][v].remove(t)
        if self.out[r] is not None:
            self.out[r][t[0]].discard(t[1])
            self.inn[r][t[1]].discard(t[0])

    def freeze(self):
        return Structure(self.signature, self.n,
                         tuple(frozenset(t) for t in self.tables))

    def freeze_shared(self):
        """Freeze without revalidating; the result reuses this index, so
        the caller must not mutate it afterwards."""
        st = Structure._trusted(self.signature, self.n,
                                tuple(frozenset(t) for t in self.tables))
        st.__dict__["index"] = self
        return st


@dataclass(frozen=True)
class Structure:
    signature: Signature
    n: int
    tables: tuple

    def __post_init__(self):
        tables = tuple(frozenset(tuple(t) for t in tab) for tab in self.tables)
        object.__setattr__(self, "tables", tables)
        if self.n < 0:
            raise StructureError("negative domain size")
        if len(tables) != len(self.signature.relations):
            raise StructureError("table count does not match signature")
        for rel, tab in zip(self.signature.relations, tables):
            for t in tab:
                _check_tuple(rel, t, self.n)
                if "sym" in rel.flags and (t[1], t[0]) not in tab:
                    raise StructureError(f"{rel.name}: symmetric table not closed at {t}")
                if "anti" in rel.flags and t[0] != t[1] and (t[1], t[0]) in tab:
                    raise StructureError(f"{rel.name}: antisymmetry violated at {t}")

    @classmethod
    def _trusted(cls, signature, n, tables):
        # tables are known valid (e.g. maintained by an Index)
        st = object.__new__(cls)
        object.__setattr__(st, "signature", signature)
        object.__setattr__(st, "n", n)
        object.__setattr__(st, "tables", tables)
        return st

    @classmethod
    def build(cls, signature, n, tables=None):
        """Build from ``{name: tuples}`` (or a list aligned with the
        signature), completing symmetric relations."""
        tables = tables or {}
        if isinstance(tables, dict):
            unknown = set(tables) - set(signature.names)
            if unknown:
                raise StructureError(f"unknown relations {sorted(unknown)}")
            rows = [tables.get(r.name, ()) for r in signature.relations]
        else:
            rows = list(tables)
        out = []
        for rel, tab in zip(signature.relations, rows):
            out.append(close_table(rel, tab))
        return cls(signature, n, tuple(out))

    @cached_property
    def index(self):
        return Index(self.signature, self.n, self.tables)

    def table(self, name):
        return self.tables[self.signature.index(name)]

    def has(self, name, t):
        return tuple(t) in self.table(name)

    @property
    def size(self):
        return self.n

    def __repr__(self):
        body = "; ".join(f"{r.name}={sorted(_one_orientation(r, t))}"
                         for r, t in zip(self.signature.relations, self.tables))
        return f"Structure(n={self.n}, {body})"


def _check_tuple(rel, t, n):
    if len(t) != rel.arity:
        raise StructureError(f"{rel.name}: tuple {t} has wrong arity")
    for v in t:
        if not (isinstance(v, int) and 0 <= v < n):
            raise StructureError(f"{rel.name}: index {v} out of range for domain {n}")
    if "irr" in rel.flags and t[0] == t[1]:
        raise StructureError(f"{rel.name}: loop {t} under irreflexive flag")


def close_table(rel, tuples):
    tab = {tuple(t) for t in tuples}
    if "sym" in rel.flags:
        tab |= {(b, a) for a, b in tab}
    return frozenset(tab)


def _one_orientation(rel, tab):
    if "sym" in rel.flags:
        return {t for t in tab if t[0] <= t[1]}
    return set(tab)


# ---------------------------------------------------------------- text format

def parse_signature(line, lineno=1):
    words = line.split()
    if not words or words[0] != "signature":
        raise StructureError("expected 'signature'", lineno)
    rels = []
    for w in words[1:]:
        if "/" in w:
            name, _, ar = w.partition("/")
            try:
                arity = int(ar)
            except ValueError:
                raise StructureError(f"bad arity in {w!r}", lineno) from None
            rels.append([name, arity, set()])
        elif rels and w in FLAGS:
            rels[-1][2].add(w)
        else:
            raise StructureError(f"unexpected token {w!r}", lineno)
    if not rels:
        raise StructureError("signature declares no relations", lineno)
    try:
        return Signature(tuple(Relation(n, a, frozenset(f)) for n, a, f in rels))
    except StructureError as e:
        raise StructureError(str(e), lineno) from None


def _content_lines(text):
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def parse_structure(text):
    lines = list(_content_lines(text))
    if len(lines) < 2:
        raise StructureError("need a signature line and a domain line",
                             lines[0][0] if lines else 1)
    sig = parse_signature(lines[0][1], lines[0][0])
    no, dom = lines[1]
    words = dom.split()
    if len(words) != 2 or words[0] != "domain" or not words[1].isdigit():
        raise StructureError("expected 'domain <n>'", no)
    n = int(words[1])
    rows = {r.name: set() for r in sig.relations}
    for no, line in lines[2:]:
        words = line.split()
        name = words[0]
        if name not in rows:
            raise StructureError(f"unknown relation {name!r}", no)
        rel = sig.relations[sig.index(name)]
        try:
            t = tuple(int(w) for w in words[1:])
        except ValueError:
            raise StructureError(f"non-integer vertex in {line!r}", no) from None
        try:
            _check_tuple(rel, t, n)
        except StructureError as e:
            raise StructureError(str(e), no) from None
        rows[name].add(t)
    try:
        return Structure.build(sig, n, rows)
    except StructureError as e:
        raise StructureError(str(e), no) from None


def serialize_structure(M):
    out = [M.signature.header(), f"domain {M.n}"]
    for rel, tab in zip(M.signature.relations, M.tables):
        for t in sorted(_one_orientation(rel, tab)):
            out.append(" ".join([rel.name, *map(str, t)]))
    return "\n".join(out) + "\n"


# -------------------------------------------------------------- construction

def empty_structure(signature, n=0):
    return Structure(signature, n, tuple(frozenset() for _ in signature.relations))


def graph(n, edges=()):
    return Structure.build(GRAPH, n, {"edge": edges})


def digraph(n, arcs=()):
    return Structure.build(DIGRAPH, n, {"arc": arcs})


def complete_graph(n):
    return graph(n, itertools.combinations(range(n), 2))


def null_graph(n):
    return graph(n)


def path_graph(n):
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def induced_substructure(M, S):
    S = sorted(set(S))
    for v in S:
        if not 0 <= v < M.n:
            raise StructureError(f"vertex {v} out of range for domain {M.n}")
    pos = {v: i for i, v in enumerate(S)}
    tables = []
    for tab in M.tables:
        tables.append(frozenset(tuple(pos[v] for v in t) for t in tab
                                if all(v in pos for v in t)))
    return Structure(M.signature, len(S), tuple(tables))


def disjoint_union(parts, signature=None):
    parts = list(parts)
    if signature is None:
        if not parts:
            raise StructureError("empty union needs an explicit signature")
        signature = parts[0].signature
    if any(p.signature != signature for p in parts):
        raise StructureError("signature mismatch in disjoint union")
    tables = [set() for _ in signature.relations]
    off = 0
    for p in parts:
        for r, tab in enumerate(p.tables):
            tables[r] |= {tuple(v + off for v in t) for t in tab}
        off += p.n
    return Structure(signature, off, tuple(tables))


def complement_graph(M):
    rels = M.signature.relations
    if len(rels) != 1 or rels[0].arity != 2 or rels[0].flags < {"sym", "irr"}:
        raise StructureError("complement needs a single symmetric irreflexive binary relation")
    tab = M.tables[0]
    new = {(a, b) for a in range(M.n) for b in range(M.n)
           if a != b and (a, b) not in tab}
    return Structure(M.signature, M.n, (frozenset(new),))


def relabel(M, perm):
    """Image of M under the vertex bijection ``perm`` (a sequence)."""
    return Structure(M.signature, M.n,
                     tuple(frozenset(tuple(perm[v] for v in t) for t in tab)
                           for tab in M.tables))


# ----------------------------------------------------------- canonical forms

def canonical_form(M):
    """Lexicographically least relabelled table list (brute force over n!)."""
    best = None
    for perm in itertools.permutations(range(M.n)):
        key = tuple(tuple(sorted(tuple(perm[v] for v in t) for t in tab))
                    for tab in M.tables)
        if best is None or key < best:
            best = key
    if best is None:
        best = tuple(() for _ in M.tables)
    return (M.n, best)


def from_canonical(signature, form):
    n, tabs = form
    return Structure(signature, n, tuple(frozenset(t) for t in tabs))


def is_isomorphic(M, N):
    return (M.signature == N.signature and M.n == N.n
            and sorted(map(len, M.tables)) == sorted(map(len, N.tables))
            and canonical_form(M) == canonical_form(N))


# ----------------------------------------------------------------- classes

@dataclass(frozen=True)
class ClassDescriptor:
    """Structures over ``signature`` into which no forbidden pattern embeds."""

    signature: Signature
    forbidden: tuple = ()
    name: str = None

    def __post_init__(self):
        forb = tuple(self.forbidden)
        for P in forb:
            if P.signature != self.signature:
                raise StructureError("forbidden pattern over the wrong signature")
        object.__setattr__(self, "forbidden", forb)

    def __contains__(self, M):
        return member_of(self, M)

    @cached_property
    def pair_orbits(self):
        """Ordered vertex pairs of each pattern, one per automorphism orbit."""
        from .maps import automorphisms
        out = []
        for P in self.forbidden:
            auts = list(automorphisms(P))
            seen, reps = set(), []
            for p, q in itertools.permutations(range(P.n), 2):
                if (p, q) in seen:
                    continue
                reps.append((p, q))
                seen |= {(a[p], a[q]) for a in auts}
            out.append(reps)
        return out

    def same_age(self, other):
        mine = {canonical_form(P) for P in self.forbidden}
        theirs = {canonical_form(P) for P in other.forbidden}
        return self.signature == other.signature and mine == theirs


def member_of(D, M):
    if M.signature != D.signature:
        raise StructureError("signature mismatch")
    from .maps import embeds
    return not any(embeds(P, M) for P in D.forbidden)


def local_options(signature, n, x):
    """Possible tuple sets linking a new vertex ``n`` to vertex ``x``
    (or its own loops when ``x == n``), honouring the relation flags."""
    per_rel = []
    for r, rel in enumerate(signature.relations):
        if rel.arity != 2:
            raise NotImplementedError("point extensions handle binary relations only")
        if x == n:
            per_rel.append([()] if "irr" in rel.flags else [(), ((r, (n, n)),)])
            continue
        a, b = (r, (n, x)), (r, (x, n))
        if "sym" in rel.flags:
            per_rel.append([(), (a, b)])
        elif "anti" in rel.flags:
            per_rel.append([(), (a,), (b,)])
        else:
            per_rel.append([(), (a,), (b,), (a, b)])
    return [frozenset(itertools.chain.from_iterable(c)) for c in itertools.product(*per_rel)]


def _extend_with(M, tuples):
    tables = [set(t) for t in M.tables]
    for r, t in tuples:
        tables[r].add(t)
    return Structure(M.signature, M.n + 1, tuple(tables))


def one_point_extensions(D, A):
    """All ways (up to automorphisms of A) to add one vertex to A inside D.

    Returns ``(B, inclusion)`` pairs; A sits in B on its own indices and the
    new vertex is ``A.n``.
    """
    if not member_of(D, A):
        raise StructureError("base structure is not in the class")
    from .maps import automorphisms, PartialMap
    n = A.n
    auts = list(automorphisms(A))
    seen, out = set(), []
    choices = [local_options(A.signature, n, x) for x in range(n)]
    loops = local_options(A.signature, n, n)
    for combo in itertools.product(loops, *choices):
        tuples = frozenset().union(*combo)
        key = min(tuple(sorted((r, tuple(a[v] if v < n else n for v in t))
                               for r, t in tuples)) for a in auts)
        if key in seen:
            continue
        seen.add(key)
        B = _extend_with(A, tuples)
        if member_of(D, B):
            out.append((B, PartialMap(A, B, frozenset((v, v) for v in range(n)))))
    return out


def enumerate_types(D, n):
    """Isomorphism types of size ``n`` in D, sorted by canonical form."""
    sig = D.signature
    slots = []
    for r, rel in enumerate(sig.relations):
        for t in itertools.product(range(n), repeat=rel.arity):
            if "irr" in rel.flags and t[0] == t[1]:
                continue
            if "sym" in rel.flags and t[0] > t[1]:
                continue
            slots.append((r, t))
    forms = set()
    for bits in itertools.product((0, 1), repeat=len(slots)):
        tables = [set() for _ in sig.relations]
        for on, (r, t) in zip(bits, slots):
            if on:
                tables[r].add(t)
        try:
            M = Structure.build(sig, n, tables)
        except StructureError:
            continue
        forms.add(canonical_form(M))
    out = [from_canonical(sig, f) for f in sorted(forms)]
    return [M for M in out if member_of(D, M)]


def iter_types(D, start=1) -> Iterator[Structure]:
    n = start
    while True:
        yield from enumerate_types(D, n)
        n += 1


def structures_up_to(D, max_n, min_n=1) -> Iterable[Structure]:
    for n in range(min_n, max_n + 1):
        yield from enumerate_types(D, n)
