"""Staged generic structures, endomorphism growth and one-point extension
checks.

The builder keeps one FIFO queue per task kind.  Every stage first performs
its scheduled action (joint embedding, a forth amalgamation, or an anti
amalgamation) and then queues new tasks read off the current structure, so
a task is always processed at a later stage than the one that created it.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import dataclass, field

from .amalgamation import (AmalgamInstance, anti_xy_amalgamate, enumerate_multifunctions,
                           jep_amalgam, xy_amalgamate)
from .catalog import Oracle
from .homogeneity import ClassLabel
from .maps import MapKind, PartialMap, enumerate_maps, extend_map_within, has_kind
from .multifunctions import (CoKind, Multifunction, extend_multifunction_within, has_cokind)
from .structures import (Structure, StructureError, induced_substructure, iter_types,
                         local_options, member_of, one_point_extensions, parse_structure,
                         serialize_structure, structures_up_to)


class LimitError(RuntimeError):
    """A construction step could not be carried out; ``task`` says which."""

    def __init__(self, msg, task=None, stage=None):
        super().__init__(msg)
        self.task = task
        self.stage = stage


class ExtensionFailure(RuntimeError):
    def __init__(self, msg, instance=None):
        super().__init__(msg)
        self.instance = instance


def _label(notion):
    return notion if isinstance(notion, ClassLabel) else ClassLabel.parse(notion)


def _require_implication(lab):
    if lab.no_implication:
        raise ValueError(f"{lab} is a notion where Y does not imply X; no construction is known")


# ------------------------------------------------------------------ ledger

@dataclass
class Task:
    id: int
    created: int
    kind: str  # "forth" or "anti"
    A: Structure
    B: Structure  # A on 0..|A|-1, new vertices after
    pairs: tuple  # forth: (a, m); anti: (a, (m, ...))
    window: tuple = ()

    def as_json(self):
        return {"id": self.id, "created": self.created, "kind": self.kind,
                "A": serialize_structure(self.A), "B": serialize_structure(self.B),
                "map": [[a, list(m)] if self.kind == "anti" else [a, m] for a, m in self.pairs],
                "window": list(self.window)}

    @classmethod
    def from_json(cls, d):
        pairs = tuple((a, tuple(m)) if d["kind"] == "anti" else (a, m) for a, m in d["map"])
        return cls(d["id"], d["created"], d["kind"], parse_structure(d["A"]),
                   parse_structure(d["B"]), pairs, tuple(d.get("window", ())))


@dataclass
class TaskLedger:
    notion: str = ""
    actions: list = field(default_factory=list)  # (stage, action, task id or None)
    processed: list = field(default_factory=list)  # (stage, Task, extension pairs)
    backlog: list = field(default_factory=list)  # unprocessed Tasks

    def dumps(self):
        lines = [f"# notion {self.notion}"]
        for stage, action, tid in self.actions:
            lines.append(f"# stage {stage} {action}" + ("" if tid is None else f" task {tid}"))
        for stage, task, ext in self.processed:
            lines.append(f"{stage}|{json.dumps(task.as_json(), sort_keys=True)}|{json.dumps(_ext_json(task, ext))}")
        for task in self.backlog:
            lines.append(f"-|{json.dumps(task.as_json(), sort_keys=True)}|")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        led = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            if line.startswith("# notion "):
                led.notion = line.split()[2]
                continue
            if line.startswith("# stage "):
                parts = line.split()
                led.actions.append((int(parts[2]), parts[3], int(parts[5]) if len(parts) > 5 else None))
                continue
            try:
                stage, task, ext = line.split("|", 2)
                task = Task.from_json(json.loads(task))
                if stage == "-":
                    led.backlog.append(task)
                else:
                    led.processed.append((int(stage), task, _ext_from_json(task, json.loads(ext))))
            except (ValueError, KeyError, StructureError) as e:
                raise StructureError(f"bad ledger record: {e}", lineno) from None
        return led


def _ext_json(task, ext):
    if task.kind == "anti":
        return [[b, list(ms)] for b, ms in ext]
    return [list(p) for p in ext]


def _ext_from_json(task, data):
    if task.kind == "anti":
        return tuple((b, tuple(ms)) for b, ms in data)
    return tuple((b, m) for b, m in data)


# ----------------------------------------------------------- task making

def _pair_order():
    """2-subsets of the naturals by largest element, then lexicographically."""
    for hi in itertools.count(1):
        for lo in range(hi):
            yield (lo, hi)


def _random_subset(items, rng, p=0.5):
    return [x for x in items if rng.random() < p]


def _slots(sig, n, within=None):
    """Tuple slots over vertices ``within`` (default all), one per sym pair."""
    vs = range(n) if within is None else within
    out = []
    for r, rel in enumerate(sig.relations):
        for t in itertools.product(vs, repeat=rel.arity):
            if "irr" in rel.flags and len(set(t)) < len(t):
                continue
            if "sym" in rel.flags and t[0] > t[1]:
                continue
            out.append((r, t))
    return out


def _with_tuples(M, add=(), drop=()):
    tables = [set(t) for t in M.tables]
    for r, t in drop:
        tables[r].discard(t)
        tables[r].discard(t[::-1]) if "sym" in M.signature.relations[r].flags else None
    for r, t in add:
        tables[r].add(t)
    return Structure.build(M.signature, M.n, tables)


def _forth_source(D, W, X, rng):
    """A structure A and a map of kind X from A onto the window substructure."""
    if X == MapKind.I:
        return W, {v: v for v in range(W.n)}
    A, f = W, {v: v for v in range(W.n)}
    if X == MapKind.H and W.n and rng.random() < 0.5:
        # split one vertex into two unrelated twins
        w = rng.randrange(W.n)
        tables = [set(t) for t in W.tables]
        t2 = W.n
        for r, tab in enumerate(W.tables):
            for t in tab:
                if w in t:
                    tables[r].add(tuple(t2 if v == w else v for v in t))
        A = Structure.build(W.signature, W.n + 1, tables)
        f = dict(f)
        f[t2] = w
    present = [(r, t) for r, tab in enumerate(A.tables) for t in tab
               if "sym" not in A.signature.relations[r].flags or t[0] < t[1]]
    A2 = _with_tuples(A, drop=_random_subset(present, rng))
    if member_of(D, A2):
        A = A2
    if not member_of(D, A):
        return W, {v: v for v in range(W.n)}
    return A, f


def _saturate(D, A, rng, cap):
    """A plus one new vertex per admissible pattern over A (no relations
    among the new vertices), kept inside D."""
    n = A.n
    combos = []
    for parts in itertools.product(local_options(A.signature, n, n),
                                   *(local_options(A.signature, n, x) for x in range(n))):
        combos.append(frozenset().union(*parts))
    rng.shuffle(combos)
    tables = [set(t) for t in A.tables]
    size = n
    for pattern in combos:
        if size - n >= cap:
            break
        trial = [set(t) for t in tables]
        for r, t in pattern:
            trial[r].add(tuple(size if v == n else v for v in t))
        B = Structure(A.signature, size + 1, tuple(frozenset(t) for t in trial))
        if member_of(D, B):
            tables, size = trial, size + 1
    return Structure(A.signature, size, tuple(frozenset(t) for t in tables))


def _anti_source(D, W, X, rng):
    """A, and a multifunction of cokind X-bar from A onto the window."""
    sig = W.signature
    if X == CoKind.I:
        return W, {v: (v,) for v in range(W.n)}
    if X == CoKind.H and W.n > 1:
        # merge unrelated vertices; relations of a block pair are the union
        owner = list(range(W.n))
        for v in range(1, W.n):
            if rng.random() < 0.5:
                u = rng.randrange(v)
                owner[v] = owner[u]
        blocks = sorted(set(owner))
        pos = {b: i for i, b in enumerate(blocks)}
        tables = [set() for _ in W.tables]
        ok = True
        for r, tab in enumerate(W.tables):
            for t in tab:
                tt = tuple(pos[owner[v]] for v in t)
                if len(set(tt)) < len(tt) and "irr" in sig.relations[r].flags:
                    ok = False
                tables[r].add(tt)
        if ok:
            try:
                A = Structure.build(sig, len(blocks), tables)
            except StructureError:
                A = None
            if A is not None and member_of(D, A):
                f = {}
                for v in range(W.n):
                    f.setdefault(pos[owner[v]], []).append(v)
                W2, f2 = A, {a: tuple(vs) for a, vs in f.items()}
            else:
                W2, f2 = W, {v: (v,) for v in range(W.n)}
        else:
            W2, f2 = W, {v: (v,) for v in range(W.n)}
    else:
        W2, f2 = W, {v: (v,) for v in range(W.n)}
    absent = [s for s in _slots(sig, W2.n) if s[1] not in W2.tables[s[0]]]
    A = _with_tuples(W2, add=_random_subset(absent, rng, 0.3))
    if not member_of(D, A):
        A = W2
    return A, f2


def _one_point(D, A, rng):
    exts = one_point_extensions(D, A)
    return rng.choice(exts)[0]


def _forth_task(D, M, window, X, rng, tid, stage, cap):
    W = induced_substructure(M, window)
    A, f = _forth_source(D, W, X, rng)
    B = _saturate(D, A, rng, cap)
    pairs = tuple(sorted((a, window[w]) for a, w in f.items()))
    return Task(tid, stage, "forth", A, B, pairs, tuple(window))


def _anti_task(D, M, window, X, rng, tid, stage):
    W = induced_substructure(M, window)
    A, f = _anti_source(D, W, X, rng)
    B = _one_point(D, A, rng)
    pairs = tuple(sorted((a, tuple(window[w] for w in ws)) for a, ws in f.items()))
    return Task(tid, stage, "anti", A, B, pairs, tuple(window))


# ---------------------------------------------------------------- builder

def _kinds(lab):
    X, Y = MapKind(lab.x), MapKind(lab.forth_y)
    return X, Y


def _task_map(task, M):
    if task.kind == "anti":
        return Multifunction.from_sets(task.A, M, {a: set(ms) for a, ms in task.pairs})
    return PartialMap(task.A, M, frozenset(task.pairs))


def _inclusion(A, B):
    return PartialMap(A, B, frozenset((v, v) for v in range(A.n)))


def schedule(lab, stage):
    """Action performed at ``stage`` (numbered from 1)."""
    if lab.forth_only:
        return "jep" if stage % 2 == 0 else "forth"
    return ("jep", "forth", "anti")[stage % 3]


def build_limit(D, notion, stages, seed=0, cap=16):
    """Stage-by-stage approximation of a structure with age D that is
    homogeneous for ``notion``; returns ``(M, ledger)``."""
    lab = _label(notion)
    _require_implication(lab)
    if stages < 0:
        raise ValueError("stages must be non-negative")
    rng = random.Random(seed)
    X, Y = _kinds(lab)
    types = iter_types(D)
    M = next(types)
    ledger = TaskLedger(notion=str(lab))
    queues = {"forth": deque(), "anti": deque()}
    windows = {"forth": _pair_order(), "anti": _pair_order()}
    pending = {k: next(w) for k, w in windows.items()}
    next_id = itertools.count()
    for stage in range(1, stages + 1):
        action = schedule(lab, stage)
        tid = None
        if action == "jep":
            M = jep_amalgam(M, next(types), D)
        elif queues[action]:
            task = queues[action].popleft()
            tid = task.id
            f1 = _task_map(task, M)
            inst = AmalgamInstance(task.A, M, task.B, f1, _inclusion(task.A, task.B))
            if action == "forth":
                res = xy_amalgamate(inst, (X, Y), D, M.n + task.B.n)
            else:
                res = anti_xy_amalgamate(inst, (CoKind(X.value), CoKind(Y.value)), D, M.n + task.B.n)
            if res is None:
                raise LimitError(f"stage {stage}: no amalgam for task {task.id}; the class lacks the "
                                 f"{'anti-' if action == 'anti' else ''}{X.value}{Y.value} amalgamation property",
                                 task, stage)
            M = res.D
            ext = tuple(sorted((b, tuple(sorted(ms))) for b, ms in res.g2.as_sets.items())) \
                if action == "anti" else tuple(sorted(res.g2.pairs))
            ledger.processed.append((stage, task, ext))
        ledger.actions.append((stage, action, tid))
        # queue new work read off the current structure
        for kind in (("forth",) if lab.forth_only else ("forth", "anti")):
            lo, hi = pending[kind]
            if hi >= M.n:
                continue
            window = (lo, hi)
            pending[kind] = next(windows[kind])
            if kind == "forth":
                queues[kind].append(_forth_task(D, M, window, X, rng, next(next_id), stage, cap))
            else:
                queues[kind].append(_anti_task(D, M, window, CoKind(X.value), rng, next(next_id), stage))
    ledger.backlog = sorted(list(queues["forth"]) + list(queues["anti"]), key=lambda t: t.id)
    return M, ledger


@dataclass
class AuditReport:
    verified: int
    failures: list  # (stage, message)
    backlog: int
    order_violations: list

    @property
    def ok(self):
        return not self.failures and not self.order_violations


def audit_limit(M, ledger):
    """Re-check every recorded extension inside M."""
    lab = _label(ledger.notion) if ledger.notion else None
    X, Y = _kinds(lab) if lab else (None, None)
    failures, order = [], []
    verified = 0
    for stage, task, ext in ledger.processed:
        if stage < task.created:
            order.append((stage, task.id))
        try:
            if task.kind == "anti":
                g = Multifunction.from_sets(task.B, M, {b: set(ms) for b, ms in ext})
                good = g.domain == frozenset(range(task.B.n)) and has_cokind(g, Y.value)
                sets = g.as_sets
                agree = all(sets.get(a) == set(ms) for a, ms in task.pairs)
            else:
                g = PartialMap(task.B, M, frozenset(ext))
                good = g.domain == frozenset(range(task.B.n)) and has_kind(g, Y)
                d = g.as_dict
                agree = all(d.get(a) == m for a, m in task.pairs)
        except StructureError as e:
            failures.append((stage, f"task {task.id}: {e}"))
            continue
        if not good:
            failures.append((stage, f"task {task.id}: extension is not of kind {Y.value}"))
        elif not agree:
            failures.append((stage, f"task {task.id}: extension disagrees with the task map"))
        else:
            verified += 1
    return AuditReport(verified, failures, len(ledger.backlog), order)


# ----------------------------------------------------------- host helpers

def _struct(host):
    return host.approximation if isinstance(host, Oracle) else host


def _forth_demands(src, dom, d, f, Y, x):
    """Demands on a fresh target vertex x so that f + {d -> x} has kind Y."""
    out = {}
    keys = set(dom) | {d}
    img = dict(f)
    img[d] = x
    for r, tab in enumerate(src.tables):
        rel = src.signature.relations[r]
        for t in tab:
            if d in t and all(v in keys for v in t):
                out[(r, tuple(img[v] for v in t))] = True
        if Y == MapKind.I:
            for t in itertools.product(sorted(keys), repeat=rel.arity):
                if d in t and t not in tab:
                    out.setdefault((r, tuple(img[v] for v in t)), False)
    return out


def _anti_demands(src, fsets, b, Y, x):
    """Demands on a fresh vertex x so that fbar + {b -> {x}} keeps cokind Y."""
    out = {}
    for r, tab in enumerate(src.tables):
        rel = src.signature.relations[r]
        if rel.arity != 2:
            raise NotImplementedError("anti demands handle binary relations only")
        for a, ms in fsets.items():
            for w in ms:
                for s, (p, q) in (((b, a), (x, w)), ((a, b), (w, x))):
                    if s not in tab:
                        out[(r, (p, q))] = False
                    elif Y == CoKind.I:
                        out[(r, (p, q))] = True
        if "irr" not in rel.flags:
            if (b, b) not in tab:
                out[(r, (x, x))] = False
            elif Y == CoKind.I:
                out[(r, (x, x))] = True
    return out


def _extend_forth(src, target, f, d, Y, prefer_fresh):
    """Choose an image for ``d`` so that f + {d -> v} has kind Y."""
    T = _struct(target)
    image = set(f.values())
    cands = list(range(T.n))
    if Y != MapKind.H:
        cands = [u for u in cands if u not in image]
    elif prefer_fresh:
        cands.sort(key=lambda u: u in image)
    for u in cands:
        g = dict(f)
        g[d] = u
        if has_kind(PartialMap(src, T, frozenset(g.items())), Y):
            return u
    if isinstance(target, Oracle):
        dem = _forth_demands(src, f.keys(), d, f, Y, target.n)
        u = target.realize_demands(dem, exclude=image)
        if u is not None:
            g = dict(f)
            g[d] = u
            if has_kind(PartialMap(src, target.approximation, frozenset(g.items())), Y):
                return u
    return None


def _extend_back(src, target, f, u, Y):
    """Choose a preimage v (outside dom f) of target vertex u keeping the
    converse of f + {v -> u} of cokind Y; ``src`` is where preimages live."""
    S = _struct(src)
    T = _struct(target)
    for v in range(S.n):
        if v in f:
            continue
        pairs = frozenset((m, a) for a, m in f.items()) | {(u, v)}
        if has_cokind(Multifunction(T, S, pairs), Y):
            return v
    if isinstance(src, Oracle):
        fsets = {}
        for a, m in f.items():
            fsets.setdefault(m, []).append(a)
        dem = _anti_demands(T, fsets, u, Y, src.n)
        v = src.realize_demands(dem, exclude=set(f))
        if v is not None and v not in f:
            S = src.approximation
            T = _struct(target)
            pairs = frozenset((m, a) for a, m in f.items()) | {(u, v)}
            if has_cokind(Multifunction(T, S, pairs), Y):
                return v
    return None


def grow_endomorphism(host, f, notion, steps, seed=0):
    """Enlarge a partial map of kind X on ``host`` step by step.

    Forth-only notions extend the domain at every step; the others alternate
    forth steps with back steps that put the least missing vertex into the
    image.  Raises ExtensionFailure with the stuck instance.
    """
    lab = _label(notion)
    _require_implication(lab)
    X, Y = _kinds(lab)
    M = _struct(host)
    fd = dict(f.as_dict if isinstance(f, PartialMap) else f)
    if not has_kind(PartialMap(M, M, frozenset(fd.items())), X):
        raise ValueError(f"starting map is not of kind {X.value}")
    rng = random.Random(seed)
    for k in range(steps):
        M = _struct(host)
        back = not lab.forth_only and k % 2 == 1
        if back:
            missing = [u for u in range(M.n) if u not in set(fd.values())]
            if not missing:
                if isinstance(host, Oracle):
                    host.grow(M.n + 1)
                    continue
                continue
            u = missing[0]
            v = _extend_back(host, host, fd, u, CoKind(Y.value))
            if v is None:
                raise ExtensionFailure(f"step {k}: no preimage for {u}",
                                       {"step": k, "back": u, "map": sorted(fd.items())})
            fd[v] = u
        else:
            missing = [d for d in range(M.n) if d not in fd]
            if not missing:
                if isinstance(host, Oracle):
                    host.grow(M.n + 1)
                    missing = [M.n]
                else:
                    continue
            d = missing[0]
            u = _extend_forth(_struct(host), host, fd, d, Y, prefer_fresh=not lab.forth_only)
            if u is None:
                raise ExtensionFailure(f"step {k}: no image for {d}",
                                       {"step": k, "forth": d, "map": sorted(fd.items())})
            fd[d] = u
        rng.random()
    M = _struct(host)
    return PartialMap(M, M, frozenset(fd.items()))


def build_equivalence_map(hostA, hostB, notion, steps, seed=0):
    """Grow a map of kind Y from hostA to hostB by forth (and back) steps.

    Returns ``(map, log)`` where ``log`` lists one record per step.
    """
    lab = _label(notion)
    _require_implication(lab)
    if not hostA.descriptor.same_age(hostB.descriptor):
        raise ValueError("hosts have different ages")
    X, Y = _kinds(lab)
    size = steps + 2
    hostA.grow(size)
    hostB.grow(size)
    fd = {0: 0}
    log = []
    for k in range(steps):
        back = not lab.forth_only and k % 2 == 1
        if back:
            image = set(fd.values())
            u = next(w for w in itertools.count() if w not in image)
            if u >= hostB.n:
                hostB.grow(u + 1)
            v = _extend_back(hostA, hostB, fd, u, CoKind(Y.value))
            if v is None:
                raise ExtensionFailure(f"step {k}: no preimage for {u}",
                                       {"step": k, "back": u, "map": sorted(fd.items())})
            fd[v] = u
            log.append({"step": k, "back": u, "preimage": v})
        else:
            d = next(w for w in itertools.count() if w not in fd)
            if d >= hostA.n:
                hostA.grow(d + 1)
            u = _extend_forth(hostA.approximation, hostB, fd, d, Y, prefer_fresh=True)
            if u is None:
                raise ExtensionFailure(f"step {k}: no image for {d}",
                                       {"step": k, "forth": d, "map": sorted(fd.items())})
            fd[d] = u
            log.append({"step": k, "forth": d, "image": u})
    return PartialMap(hostA.approximation, hostB.approximation, frozenset(fd.items())), log


# ------------------------------------------------- one-point EP vs oracle

@dataclass
class Verdict:
    status: str  # POSITIVE / NEGATIVE / INCONCLUSIVE
    checked: int = 0
    witnesses: list = field(default_factory=list)
    counterexample: dict = None
    bounds: dict = field(default_factory=dict)

    def as_record(self):
        rec = {"status": self.status, "checked": self.checked, "bounds": self.bounds,
               "witnesses": len(self.witnesses)}
        if self.counterexample is not None:
            rec["counterexample"] = self.counterexample
        return rec


def _random_partition(n, rng):
    owner = []
    for v in range(n):
        k = max(owner, default=-1) + 1
        owner.append(rng.randrange(k + 1))
    return owner


def _place_random(k, wanted, host, rng):
    """Place vertices 0..k-1 one at a time on random vertices of the oracle.

    ``wanted(q, e, x)`` gives the demands on the image ``x`` of ``q`` given
    the placement ``e`` so far.  A fresh vertex is realized when nothing
    present fits."""
    e = {}
    for q in range(k):
        dem = wanted(q, e, host.n)
        used = set(e.values())
        cands = host.present_witnesses(dem, exclude=used)
        if cands:
            e[q] = rng.choice(cands)
        else:
            v = host.realize_demands(dem, exclude=used)
            if v is None:
                return None
            e[q] = v
    return e


def _embed_random(Q, host, rng):
    """Random embedding of Q into the oracle; None when Q is outside the age."""
    if not member_of(host.descriptor, Q):
        return None

    def exact(q, e, x):
        dem = {}
        for r, rel in enumerate(Q.signature.relations):
            for p in e:
                dem[(r, (x, e[p]))] = (q, p) in Q.tables[r]
                dem[(r, (e[p], x))] = (p, q) in Q.tables[r]
            if "irr" not in rel.flags:
                dem[(r, (x, x))] = (q, q) in Q.tables[r]
        return dem

    return _place_random(Q.n, exact, host, rng)


def _sample_map(A, host, X, rng, tries=20):
    """A random map of kind X from A into the host approximation: a random
    kernel and random extra tuples, then a random embedding of the result."""
    sig = A.signature
    for _ in range(tries):
        owner = _random_partition(A.n, rng) if X == MapKind.H else list(range(A.n))
        k = max(owner) + 1
        tables = [set() for _ in A.tables]
        bad = False
        for r, tab in enumerate(A.tables):
            for t in tab:
                tt = tuple(owner[v] for v in t)
                if "irr" in sig.relations[r].flags and tt[0] == tt[1]:
                    bad = True
                tables[r].add(tt)
        if bad:
            continue
        Q = Structure.build(sig, k, tables)
        if X != MapKind.I:
            absent = [s for s in _slots(sig, k) if s[1] not in Q.tables[s[0]]]
            Q = _with_tuples(Q, add=_random_subset(absent, rng))
        e = _embed_random(Q, host, rng)
        if e is not None:
            return {a: e[owner[a]] for a in range(A.n)}
    return None


def _allowed(A, owner, r, p, q):
    return (owner[p], owner[q]) in A.tables[r]


def _blow_up(A, owner, X, rng):
    """Random structure on the blown-up points whose relations all project
    to relations of A (all of them for X = I)."""
    k = len(owner)
    sig = A.signature
    chosen = []
    for r, rel in enumerate(sig.relations):
        for t in itertools.product(range(k), repeat=rel.arity):
            if "sym" in rel.flags and t[0] > t[1]:
                continue
            if _allowed(A, owner, r, *t):
                chosen.append((r, t))
    if X != CoKind.I:
        chosen = _random_subset(chosen, rng)
    return _with_tuples(Structure.build(sig, k, [set() for _ in sig.relations]), add=chosen)


def _permitted(A, owner, X):
    """Demands for placing blown-up points: a relation between images is
    allowed only above a relation of A (and required for X = I)."""
    def wanted(q, e, x):
        dem = {}
        for r, rel in enumerate(A.signature.relations):
            pairs = [((q, p), (x, e[p])) for p in e] + [((p, q), (e[p], x)) for p in e]
            if "irr" not in rel.flags:
                pairs.append(((q, q), (x, x)))
            for (s, t), img in pairs:
                if not _allowed(A, owner, r, s, t):
                    dem[(r, img)] = False
                elif X == CoKind.I:
                    dem[(r, img)] = True
        return dem
    return wanted


def _sample_multifunction(A, host, X, rng, tries=20):
    """A random multifunction of cokind X-bar from A into the approximation."""
    for _ in range(tries):
        sizes = [rng.choices((1, 2, 3), (5, 3, 2))[0] if X == CoKind.H else 1 for _ in range(A.n)]
        owner = [a for a in range(A.n) for _ in range(sizes[a])]
        k = len(owner)
        if k <= 3:
            e = _embed_random(_blow_up(A, owner, X, rng), host, rng)
        else:
            e = _place_random(k, _permitted(A, owner, X), host, rng)
        if e is None:
            continue
        M = host.approximation
        sets = {}
        for q, a in enumerate(owner):
            sets.setdefault(a, set()).add(e[q])
        mf = Multifunction.from_sets(A, M, sets)
        if has_cokind(mf, X):
            return sets
    return None


def _instance_record(A, B, fmap, anti):
    return {"A": serialize_structure(A), "B": serialize_structure(B),
            "map": sorted([a, sorted(m)] for a, m in fmap.items()) if anti
            else sorted([a, m] for a, m in fmap.items()),
            "anti": anti}


def _decide_instance(host, A, B, fmap, Y, anti):
    """(status, detail) for one instance: ("ok", v), ("no", reason) or ("stuck", None)."""
    M = host.approximation
    b = A.n
    if anti:
        mf = Multifunction.from_sets(B, M, fmap)
        if not has_cokind(mf, Y):
            return "no", "restriction"
        S = set().union(*fmap.values()) if fmap else set()
        dem = _anti_demands(B, fmap, b, Y, M.n)
        for u in host.present_witnesses(dem, exclude=S):
            g = dict(fmap)
            g[b] = {u}
            if has_cokind(Multifunction.from_sets(B, M, g), Y):
                return "ok", u
    else:
        if not has_kind(PartialMap(B, M, frozenset(fmap.items())), Y):
            return "no", "restriction"
        dem = _forth_demands(B, fmap.keys(), b, fmap, Y, M.n)
        skip = set() if Y == MapKind.H else set(fmap.values())
        for u in host.present_witnesses(dem, exclude=skip):
            g = dict(fmap)
            g[b] = u
            if has_kind(PartialMap(B, M, frozenset(g.items())), Y):
                return "ok", u
    taken = S if anti else set(fmap.values())
    if not host.demands_realizable(dem, taken):
        return "no", "no-vertex"
    u = host.realize_demands(dem, exclude=taken)
    if u is None:
        return "stuck", None
    M = host.approximation
    g = dict(fmap)
    if anti:
        g[b] = {u}
        good = has_cokind(Multifunction.from_sets(B, M, g), Y)
    else:
        g[b] = u
        good = has_kind(PartialMap(B, M, frozenset(g.items())), Y)
    return ("ok", u) if good else ("stuck", None)


def one_point_pairs(D, bound):
    """Every (A, B) with 1 <= |A| <= bound and B = A plus one vertex."""
    out = []
    for A in structures_up_to(D, bound):
        for B, _ in one_point_extensions(D, A):
            out.append((A, B))
    return out


def check_1p_ep(host, X, Y, anti=False, A_size_bound=3, probes=200, seed=0, min_size=30):
    """One-point extension property of kind XY (or its anti version) for an
    oracle, by probes stratified over all one-point pairs of the age."""
    X, Y = (CoKind(X), CoKind(Y)) if anti else (MapKind(X), MapKind(Y))
    rng = random.Random(seed)
    host.grow(min_size)
    pairs = one_point_pairs(host.descriptor, A_size_bound)
    total = max(probes, len(pairs))
    bounds = {"A_size_bound": A_size_bound, "probes": total, "seed": seed,
              "approximation": host.n}
    verdict = Verdict("POSITIVE", bounds=bounds)
    for i in range(total):
        A, B = pairs[i % len(pairs)]
        if anti:
            fmap = _sample_multifunction(A, host, X, rng)
        else:
            fmap = _sample_map(A, host, X, rng)
        if fmap is None:
            continue  # A has no image of this kind in the approximation
        status, detail = _decide_instance(host, A, B, fmap, Y, anti)
        verdict.checked += 1
        if status == "ok":
            verdict.witnesses.append((_instance_record(A, B, fmap, anti), detail))
        elif status == "no":
            cert = _instance_record(A, B, fmap, anti)
            cert.update(reason=detail, kinds=[X.value, Y.value],
                        image=sorted(set().union(*fmap.values())) if anti else sorted(set(fmap.values())),
                        host=serialize_structure(host.approximation))
            verdict.status = "NEGATIVE"
            verdict.counterexample = cert
            verdict.bounds["approximation"] = host.n
            return verdict
        else:
            verdict.status = "INCONCLUSIVE"
    if verdict.checked == 0:
        verdict.status = "INCONCLUSIVE"  # no evidence either way
    verdict.bounds["approximation"] = host.n
    return verdict


def replay_certificate(D, cert):
    """Independently confirm a NEGATIVE certificate: True when it holds."""
    A, B = parse_structure(cert["A"]), parse_structure(cert["B"])
    M = parse_structure(cert["host"])
    anti = cert["anti"]
    X, Y = cert["kinds"]
    if anti:
        fmap = {a: set(ms) for a, ms in cert["map"]}
        mf = Multifunction.from_sets(B, M, fmap)
        if not has_cokind(mf, X):
            return False
        if cert["reason"] == "restriction":
            return not has_cokind(mf, Y)
    else:
        fmap = {a: m for a, m in cert["map"]}
        f = PartialMap(B, M, frozenset(fmap.items()))
        if not has_kind(f, X):
            return False
        if cert["reason"] == "restriction":
            return not has_kind(f, Y)
    b = A.n
    S = sorted(set().union(*fmap.values())) if anti else sorted(set(fmap.values()))
    # a vertex of S itself
    if not anti and Y == "H":
        for u in S:
            g = dict(fmap)
            g[b] = u
            if has_kind(PartialMap(B, M, frozenset(g.items())), Y):
                return False
    # any vertex outside S: brute force over its relations to S
    sub = induced_substructure(M, S)
    pos = {w: i for i, w in enumerate(S)}
    k = len(S)
    sig = M.signature
    choices = [local_options(sig, k, k)] + [local_options(sig, k, x) for x in range(k)]
    for combo in itertools.product(*choices):
        tables = [set(t) for t in sub.tables]
        for r, t in frozenset().union(*combo):
            tables[r].add(t)
        E = Structure(sig, k + 1, tuple(frozenset(t) for t in tables))
        if not member_of(D, E):
            continue
        if anti:
            g = {a: {pos[w] for w in ms} for a, ms in fmap.items()}
            g[b] = {k}
            if has_cokind(Multifunction.from_sets(B, E, g), Y):
                return False
        else:
            g = {a: pos[m] for a, m in fmap.items()}
            g[b] = k
            if has_kind(PartialMap(B, E, frozenset(g.items())), Y):
                return False
    return True


def check_label(host, notion, A_size_bound=3, probes=200, seed=0, min_size=30):
    """Combined one-point checks for a class label: the forth check, plus the
    anti check for back-and-forth labels.  Returns (status, {name: Verdict})."""
    lab = _label(notion)
    _require_implication(lab)
    X, Y = lab.x, lab.forth_y
    parts = {f"{X}{Y}": check_1p_ep(host, X, Y, False, A_size_bound, probes, seed, min_size)}
    if lab.back_and_forth:
        parts[f"anti-{X}{Y}"] = check_1p_ep(host, X, Y, True, A_size_bound, probes, seed, min_size)
    statuses = {v.status for v in parts.values()}
    status = "NEGATIVE" if "NEGATIVE" in statuses else (
        "INCONCLUSIVE" if "INCONCLUSIVE" in statuses else "POSITIVE")
    return status, parts


# ------------------------------------------------ finite hosts: 1P vs full

def _induced_types(M):
    """One representative B (an induced substructure) per isomorphism type."""
    from .structures import canonical_form
    seen, out = set(), []
    for k in range(1, M.n + 1):
        for S in itertools.combinations(range(M.n), k):
            B = induced_substructure(M, S)
            key = canonical_form(B)
            if key not in seen:
                seen.add(key)
                out.append(B)
    return out


def finite_ep_instances(M, X, gap, anti=False):
    """(B, A-vertex set, map) for all B in the age of M, A = B minus ``gap``
    vertices, and every map (or multifunction) of kind X from A into M."""
    for B in _induced_types(M):
        if B.n < gap:
            continue
        for rest in itertools.combinations(range(B.n), gap):
            keep = [v for v in range(B.n) if v not in rest]
            A = induced_substructure(B, keep)
            if anti:
                for mf in enumerate_multifunctions(A, M, X) if A.n else [Multifunction(A, M, frozenset())]:
                    yield B, keep, {keep[a]: set(ms) for a, ms in mf.as_sets.items()}
            else:
                for f in enumerate_maps(A, M, X):
                    yield B, keep, {keep[a]: m for a, m in f.as_dict.items()}


def _anti_start_ok(M, B, fmap, Y):
    return has_cokind(Multifunction.from_sets(B, M, fmap), Y)


def extends_directly(M, B, keep, fmap, Y, anti=False):
    if anti:
        if not _anti_start_ok(M, B, fmap, Y):
            return False
        return extend_multifunction_within(M, B, keep, fmap, Y) is not None
    return extend_map_within(M, B, fmap, Y) is not None


def extends_stepwise(M, B, keep, fmap, Y, anti=False):
    """Add the missing vertices one at a time, never revisiting a choice."""
    if anti and not _anti_start_ok(M, B, fmap, Y):
        return False
    kept = list(keep)
    cur = {k: set(v) for k, v in fmap.items()} if anti else dict(fmap)
    for b in [v for v in range(B.n) if v not in keep]:
        if anti:
            sub = induced_substructure(B, kept + [b])
            pos = {v: i for i, v in enumerate(sorted(kept + [b]))}
            got = extend_multifunction_within(M, sub, [pos[v] for v in kept],
                                              {pos[v]: s for v, s in cur.items()}, Y)
            if got is None:
                return False
            cur[b] = got.as_sets[pos[b]]
        else:
            sub = induced_substructure(B, kept + [b])
            pos = {v: i for i, v in enumerate(sorted(kept + [b]))}
            got = extend_map_within(M, sub, {pos[v]: m for v, m in cur.items()}, Y)
            if got is None:
                return False
            cur[b] = got.as_dict[pos[b]]
        kept.append(b)
    return True


def finite_ep_verdicts(M, X, Y, anti=False, max_gap=2):
    """(stepwise verdict, direct verdict) over all instances with
    1 <= |B - A| <= max_gap."""
    step = direct = True
    for gap in range(1, max_gap + 1):
        for B, keep, fmap in finite_ep_instances(M, X, gap, anti):
            if step and not extends_stepwise(M, B, keep, fmap, Y, anti):
                step = False
            if direct and not extends_directly(M, B, keep, fmap, Y, anti):
                direct = False
            if not step and not direct:
                return step, direct
    return step, direct
