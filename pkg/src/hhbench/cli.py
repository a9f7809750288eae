"""Command-line front end.

Exit codes: 0 success / PASS / POSITIVE, 1 FAIL / NEGATIVE, 2 usage or
input error, 3 INCONCLUSIVE.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .amalgamation import (AmalgamInstance, anti_xy_amalgamate, check_ap, replay_failure,
                           xy_amalgamate)
from .catalog import (CATALOG, ExtensionRequest, OracleError, descriptor, make_oracle,
                      parse_name)
from .homogeneity import (ALL_LABELS, ClassLabel, SizeGuardError, decide_finite_homogeneity,
                          format_labels, full_profile, mhh_classes)
from .limits import (ExtensionFailure, LimitError, TaskLedger, audit_limit, build_equivalence_map,
                     build_limit, check_label, check_1p_ep, grow_endomorphism, replay_certificate)
from .maps import ENDO_SPLIT, MapKind, PartialMap, classify_map, enumerate_maps, extend_map_within
from .multifunctions import CoKind, Multifunction
from .structures import ClassDescriptor, StructureError, parse_structure, serialize_structure

OK, NEGATIVE, USAGE, INCONCLUSIVE = 0, 1, 2, 3
STATUS_CODE = {"POSITIVE": OK, "PASS": OK, "NEGATIVE": NEGATIVE, "FAIL": NEGATIVE,
               "INCONCLUSIVE": INCONCLUSIVE}

TYPE_NAMES = {"hom": "H", "epi": "E", "mono": "M", "bi": "B", "emb": "I", "iso": "A",
              "h": "H", "e": "E", "m": "M", "b": "B", "i": "I", "a": "A"}


GLOBAL_DEFAULTS = {"seed": 0, "json": False, "bound": None, "probes": None, "max_size": None}


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- inputs

def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def load_structure(path):
    try:
        return parse_structure(_read(path))
    except StructureError as e:
        raise UsageError(f"{path}: {e}") from None


def load_map(path):
    """Map file: ``map <source> <target>`` then ``a -> b`` lines.

    A right-hand side may list several targets (``a -> 1,2``), which makes
    the map a multifunction.  Returns (source, target, {a: [b, ...]}).
    """
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(_read(path).splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines or lines[0][1].split()[0] != "map" or len(lines[0][1].split()) != 3:
        raise UsageError(f"{path}: first line must be 'map <source-file> <target-file>'")
    base = os.path.dirname(path)
    _, src, tgt = lines[0][1].split()
    A = load_structure(os.path.join(base, src))
    B = load_structure(os.path.join(base, tgt))
    pairs = {}
    for no, ln in lines[1:]:
        left, arrow, right = ln.partition("->")
        try:
            if not arrow:
                raise ValueError
            a = int(left)
            bs = [int(w) for w in right.split(",")]
        except ValueError:
            raise UsageError(f"{path}:{no}: expected '<src> -> <tgt>'") from None
        pairs.setdefault(a, []).extend(bs)
    return A, B, pairs


def _as_function(path, pairs):
    out = {}
    for a, bs in pairs.items():
        if len(bs) != 1:
            raise UsageError(f"{path}: vertex {a} has {len(bs)} images; expected a function")
        out[a] = bs[0]
    return out


def _label(text):
    try:
        return ClassLabel.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _kind(text, allowed="HMI"):
    k = TYPE_NAMES.get(text.lower(), text.upper())
    if k not in allowed:
        raise UsageError(f"unknown map type {text!r}")
    return k


def _class(text, signature=None):
    """Catalog age by name, or every structure of the signature."""
    if text is None:
        if signature is None:
            raise UsageError("--class is required here")
        return ClassDescriptor(signature, (), "all")
    try:
        return descriptor(*parse_name(text))
    except OracleError as e:
        raise UsageError(str(e)) from None


def _oracle(text, seed, max_size=None):
    try:
        return make_oracle(text, seed=seed, max_size=max_size)
    except OracleError as e:
        raise UsageError(str(e)) from None


def _start_map(text):
    out = {}
    for part in (text or "").replace(" ", "").split(","):
        if not part:
            continue
        a, sep, b = part.partition(":")
        if not sep:
            raise UsageError(f"bad map entry {part!r}; use a:b")
        try:
            out[int(a)] = int(b)
        except ValueError:
            raise UsageError(f"bad map entry {part!r}") from None
    return out


# ---------------------------------------------------------------- output

class Out:
    def __init__(self, as_json):
        self.as_json = as_json
        self.lines = []
        self.record = {}

    def say(self, line=""):
        self.lines.append(line)

    def flush(self, stream):
        if self.as_json:
            stream.write(json.dumps(self.record, sort_keys=True) + "\n")
        else:
            stream.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _pairs_text(d):
    return "{" + ", ".join(f"{a}->{b}" for a, b in sorted(d.items())) + "}"


# ------------------------------------------------------------- commands

def cmd_classify(args, out):
    M = load_structure(args.structure)
    if args.label:
        lab = _label(args.label)
        dec = decide_finite_homogeneity(M, lab)
        out.record = {"label": str(lab), "holds": dec.holds}
        out.say(f"{lab}: {'yes' if dec.holds else 'no'}")
        if not dec.holds:
            out.record["counterexample"] = sorted(map(list, dec.counterexample.pairs))
            out.say(f"counterexample: {dec.counterexample!r}")
        return OK if dec.holds else NEGATIVE
    try:
        prof = full_profile(M, args.max_size or 7)
    except SizeGuardError as e:
        raise UsageError(f"{e}; raise --max-size") from None
    mhh = mhh_classes(prof)
    for lab in ALL_LABELS:
        out.say(f"{lab}: {'yes' if prof[lab] else 'no'}")
    out.say(f"mhh: {format_labels(mhh)}")
    out.record = {"profile": {str(k): v for k, v in prof.items()},
                  "mhh": sorted(str(l) for l in mhh)}
    return OK


def cmd_maps(args, out):
    A, B = load_structure(args.source), load_structure(args.target)
    if A.signature != B.signature:
        raise UsageError("structures have different signatures")
    base, surj = ENDO_SPLIT[_kind(args.type, "HEMBIA")]
    maps = enumerate_maps(A, B, base, total=not args.partial, surjective_required=surj)
    if args.count:
        n = sum(1 for _ in maps)
        out.say(str(n))
        out.record = {"count": n}
        return OK
    found = []
    for f in maps:
        if args.limit is not None and len(found) >= args.limit:
            break
        found.append(f)
        out.say(repr(f))
    out.record = {"maps": [sorted(map(list, f.pairs)) for f in found]}
    return OK


def cmd_extend(args, out):
    """Extend a partial map (map file) to a total map of the given kind."""
    A, M, pairs = load_map(args.mapfile)
    f = _as_function(args.mapfile, pairs)
    base, surj = ENDO_SPLIT[_kind(args.type, "HEMBIA")]
    try:
        start = PartialMap(A, M, frozenset(f.items()))
    except StructureError as e:
        raise UsageError(str(e)) from None
    if surj:
        from .maps import solve
        g = next(solve(A, M, base, fixed=f, surjective=True), None)
        g = None if g is None else PartialMap(A, M, frozenset(g.items()))
    else:
        g = extend_map_within(M, A, start, base)
    out.record = {"start": sorted(map(list, start.pairs)), "kind": args.type,
                  "extension": None if g is None else sorted(map(list, g.pairs))}
    if g is None:
        out.say(f"no extension of {start!r}")
        return NEGATIVE
    out.say(repr(g))
    return OK


def cmd_amalgamate(args, out):
    A1, B1, p1 = load_map(args.f1)
    A2, B2, p2 = load_map(args.f2)
    if A1 != A2:
        raise UsageError("the two maps must share their source structure")
    lab = _label(args.xy)
    D = _class(args.klass, A1.signature)
    f2 = PartialMap(A2, B2, frozenset(_as_function(args.f2, p2).items()))
    try:
        if args.anti:
            f1 = Multifunction.from_sets(A1, B1, p1)
            inst = AmalgamInstance(A1, B1, B2, f1, f2)
            res = anti_xy_amalgamate(inst, (CoKind(lab.x), CoKind(lab.forth_y)), D, args.bound)
        else:
            f1 = PartialMap(A1, B1, frozenset(_as_function(args.f1, p1).items()))
            inst = AmalgamInstance(A1, B1, B2, f1, f2)
            res = xy_amalgamate(inst, (MapKind(lab.x), MapKind(lab.forth_y)), D, args.bound)
    except (StructureError, ValueError) as e:
        raise UsageError(str(e)) from None
    name = f"{'anti-' if args.anti else ''}{lab.x}{lab.forth_y}"
    out.record = {"kind": name, "instance": inst.describe()}
    if res is None:
        out.record["verdict"] = "FAIL"
        out.say(f"{name}: no amalgam with at most {args.bound} vertices")
        return NEGATIVE
    out.record.update(verdict="PASS", witness=serialize_structure(res.D), free=res.free,
                      g1=sorted(map(list, res.g1.pairs)),
                      g2=sorted([a, sorted(bs)] for a, bs in res.g2.as_sets.items())
                      if args.anti else sorted(map(list, res.g2.pairs)))
    out.say(f"{name}: amalgam found ({'free' if res.free else 'searched'})")
    out.say(serialize_structure(res.D).rstrip())
    out.say(f"g1: {res.g1!r}")
    out.say(f"g2: {res.g2!r}")
    return OK


def cmd_check_ap(args, out):
    lab = _label(args.xy)
    D = _class(args.klass)
    cls = CoKind if args.anti else MapKind
    rep = check_ap(D, (cls(lab.x), cls(lab.forth_y)), args.bound or 3, args.witness_bound,
                   args.probes or 1000, args.seed, anti=args.anti)
    out.record = rep.as_record()
    name = f"{'anti-' if args.anti else ''}{lab.x}{lab.forth_y}"
    out.say(f"{name} amalgamation over {D.name}: {rep.verdict} "
            f"({rep.checked}/{rep.total} squares, {'exhaustive' if rep.exhaustive else 'sampled'})")
    if rep.failure is not None:
        out.record["replayed"] = replay_failure(D, rep)
        out.say(f"reason: {rep.reason}")
        out.say(json.dumps(rep.failure.describe(), sort_keys=True, indent=1))
    return STATUS_CODE[rep.verdict]


def _verdict_lines(out, name, v):
    out.say(f"{name}: {v.status} ({v.checked} probes, approximation {v.bounds.get('approximation')})")
    if v.counterexample:
        c = v.counterexample
        out.say(f"  reason: {c['reason']}")
        out.say(f"  map: {c['map']}")
        out.say("  A: " + c["A"].strip().replace("\n", " | "))
        out.say("  B: " + c["B"].strip().replace("\n", " | "))


def cmd_check_ep(args, out):
    host = _oracle(args.oracle, args.seed, args.max_size)
    bound = args.bound or 3
    probes = args.probes or 200
    if args.label:
        lab = _label(args.label)
        try:
            status, parts = check_label(host, lab, bound, probes, args.seed, args.min_size)
        except ValueError as e:
            raise UsageError(str(e)) from None
        out.record = {"label": str(lab), "status": status,
                      "checks": {k: v.as_record() for k, v in parts.items()}}
        for k, v in parts.items():
            _verdict_lines(out, k, v)
        out.say(f"{lab}: {status}")
        return STATUS_CODE[status]
    if not args.xy:
        raise UsageError("give --xy XY or --label XY")
    lab = _label(args.xy)
    if lab.y not in "HMI":
        raise UsageError("--xy takes forth kinds H, M or I; use --label for classes")
    v = check_1p_ep(host, lab.x, lab.y, args.anti, bound, probes, args.seed, args.min_size)
    name = f"{'anti-' if args.anti else ''}{lab}"
    out.record = {"check": name, "oracle": args.oracle, **v.as_record()}
    if v.counterexample:
        out.record["replayed"] = replay_certificate(host.descriptor, v.counterexample)
    _verdict_lines(out, name, v)
    return STATUS_CODE[v.status]


def cmd_build(args, out):
    D = _class(args.klass)
    try:
        M, ledger = build_limit(D, args.notion, args.stages, args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    except LimitError as e:
        out.record = {"error": str(e), "stage": e.stage}
        out.say(f"build failed: {e}")
        return NEGATIVE
    with open(args.output, "w") as fh:
        fh.write(ledger.dumps())
    if args.structure_out:
        with open(args.structure_out, "w") as fh:
            fh.write(serialize_structure(M))
    out.record = {"vertices": M.n, "processed": len(ledger.processed),
                  "backlog": len(ledger.backlog), "stages": args.stages}
    out.say(f"built {M.n} vertices in {args.stages} stages; "
            f"{len(ledger.processed)} tasks processed, {len(ledger.backlog)} pending")
    return OK


def cmd_audit(args, out):
    M = load_structure(args.structure)
    try:
        ledger = TaskLedger.loads(_read(args.ledger))
    except StructureError as e:
        raise UsageError(f"{args.ledger}: {e}") from None
    rep = audit_limit(M, ledger)
    out.record = {"ok": rep.ok, "verified": rep.verified, "failures": rep.failures,
                  "backlog": rep.backlog, "order_violations": rep.order_violations}
    out.say(f"audit: {'ok' if rep.ok else 'FAILED'} ({rep.verified} verified, {rep.backlog} pending)")
    for stage, msg in rep.failures:
        out.say(f"  stage {stage}: {msg}")
    for v in rep.order_violations:
        out.say(f"  order: {v}")
    return OK if rep.ok else NEGATIVE


def cmd_grow(args, out):
    if args.oracle:
        host = _oracle(args.oracle, args.seed)
        host.grow(args.min_size)
    elif args.structure:
        host = load_structure(args.structure)
    else:
        raise UsageError("give a structure file or --oracle")
    start = _start_map(args.start)
    try:
        f = grow_endomorphism(host, start, args.notion, args.steps, args.seed)
    except ExtensionFailure as e:
        out.record = {"status": "NEGATIVE", "failure": str(e), "instance": e.instance}
        out.say(f"stuck: {e}")
        return NEGATIVE
    except (ValueError, StructureError) as e:
        raise UsageError(str(e)) from None
    c = classify_map(f)
    out.record = {"status": "POSITIVE", "map": sorted(map(list, f.pairs)),
                  "embedding": c.is_embedding, "mono": c.is_mono}
    out.say(_pairs_text(f.as_dict))
    return OK


def cmd_equiv(args, out):
    a, b = _oracle(args.left, args.seed), _oracle(args.right, args.seed + 1)
    try:
        f, log = build_equivalence_map(a, b, args.notion, args.steps, args.seed)
    except ExtensionFailure as e:
        out.record = {"status": "NEGATIVE", "failure": str(e), "instance": e.instance}
        out.say(f"stuck: {e}")
        return NEGATIVE
    except ValueError as e:
        raise UsageError(str(e)) from None
    out.record = {"status": "POSITIVE", "map": sorted(map(list, f.pairs)), "log": log}
    out.say(_pairs_text(f.as_dict))
    return OK


def cmd_oracle(args, out):
    host = _oracle(args.name, args.seed, args.max_size)
    host.grow(args.min_size)
    out.record = {"oracle": args.name, "size": host.n}
    code = OK
    if args.query is not None:
        try:
            req = ExtensionRequest.parse(args.query)
            v = host.realize(req)
        except OracleError as e:
            raise UsageError(str(e)) from None
        out.record.update(query=str(req), vertex=v, size=host.n)
        if v is None:
            out.say(f"{req}: not realizable")
            code = NEGATIVE
        else:
            out.say(f"{req}: vertex {v}")
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(serialize_structure(host.approximation))
    out.say(f"approximation: {host.n} vertices")
    return code


# --------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    # global flags may sit before or after the subcommand; defaults are
    # filled in by run() so a subparser never overwrites an earlier value
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--bound", type=int, help="instance size bound")
    common.add_argument("--probes", type=int)
    common.add_argument("--max-size", type=int, help="size guard for classify (default 7); vertex ceiling for oracles")

    p = _Parser(prog="hhbench", parents=[common],
                description="Homomorphism-homogeneity workbench.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("classify", cmd_classify, "decide the 18 notions for a finite structure")
    sp.add_argument("structure")
    sp.add_argument("--label", help="decide a single notion")

    sp = add("maps", cmd_maps, "enumerate or count maps between two structures")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--type", default="hom", help="hom, epi, mono, bi, emb, iso (or H..A)")
    sp.add_argument("--count", action="store_true")
    sp.add_argument("--partial", action="store_true", help="include partial maps")
    sp.add_argument("--limit", type=int)

    sp = add("extend", cmd_extend, "extend a partial map to a total one")
    sp.add_argument("mapfile")
    sp.add_argument("--type", default="hom")

    sp = add("amalgamate", cmd_amalgamate, "amalgamate one square f1: A->B1, f2: A->B2")
    sp.add_argument("f1")
    sp.add_argument("f2")
    sp.add_argument("--xy", required=True)
    sp.add_argument("--anti", action="store_true")
    sp.add_argument("--class", dest="klass")

    sp = add("check-ap", cmd_check_ap, "check an amalgamation property of a catalog age")
    sp.add_argument("--class", dest="klass", required=True)
    sp.add_argument("--xy", required=True)
    sp.add_argument("--anti", action="store_true")
    sp.add_argument("--witness-bound", type=int, default=6)

    sp = add("check-ep", cmd_check_ep, "probe a one-point extension property of an oracle")
    sp.add_argument("--oracle", required=True)
    sp.add_argument("--xy")
    sp.add_argument("--label", help="run every check of a class label")
    sp.add_argument("--anti", action="store_true")
    sp.add_argument("--min-size", type=int, default=30)

    sp = add("build", cmd_build, "build a staged approximation of a homogeneous limit")
    sp.add_argument("--class", dest="klass", required=True)
    sp.add_argument("--notion", required=True)
    sp.add_argument("--stages", type=int, default=60)
    sp.add_argument("--output", "-o", required=True, help="ledger file")
    sp.add_argument("--structure-out")

    sp = add("audit", cmd_audit, "re-check a ledger against its structure")
    sp.add_argument("structure")
    sp.add_argument("ledger")

    sp = add("grow", cmd_grow, "grow a partial map into an endomorphism step by step")
    sp.add_argument("structure", nargs="?")
    sp.add_argument("--oracle")
    sp.add_argument("--notion", required=True)
    sp.add_argument("--start", default="0:0", help="starting map, e.g. 0:1,1:0")
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--min-size", type=int, default=10)

    sp = add("equiv", cmd_equiv, "grow a map between two oracles of the same age")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--notion", required=True)
    sp.add_argument("--steps", type=int, default=10)

    sp = add("oracle", cmd_oracle, "query a catalog oracle")
    sp.add_argument("name", help=f"one of {', '.join(CATALOG)} (params after ':')")
    sp.add_argument("--query")
    sp.add_argument("--min-size", type=int, default=0)
    sp.add_argument("--export", help="write the approximation to this file")
    return p


def run(argv, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for k, v in GLOBAL_DEFAULTS.items():
            if not hasattr(args, k):
                setattr(args, k, v)
        if not getattr(args, "fn", None):
            raise UsageError("no command given; try --help")
        out = Out(args.json)
        code = args.fn(args, out)
    except UsageError as e:
        stderr.write(f"error: {e}\n")
        return USAGE
    out.flush(stdout)
    return code


def main(argv=None):
    try:
        code = run(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:  # --help
        code = e.code if isinstance(e.code, int) else OK
    sys.exit(code)
