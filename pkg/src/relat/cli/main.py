"""The ``relat`` command line.

Exit codes: 0 success, 1 a negative answer (not derivable, not a model,
invalid proof, not stabilized, guard exceeded), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import __version__
from ..algebra import VarietyError, find_violation
from ..domains import DomainError
from ..extract import induce_theory, free_monad_oracle, verify_roundtrip
from ..free import NotStabilized, check_monad_laws, free_algebra
from ..fuzz import fuzz
from ..horn.ops import FuelExhausted, close, is_model, reflect, saturate
from ..horn.theory import TheoryError
from ..logic import LogicError, check_goal, query, saturate_judgements
from ..proofs import proof_error
from ..structops import GuardExceeded, internal_hom, manhattan
from ..structures import Fact, StructureError, show_point
from ..terms import Rel
from . import serial
from .serial import SCHEMA_VERSION, SerialError, context_json, edge_json, proof_from_json, proof_to_json, term_json
from .syntax import (ParseError, format_judgement, format_structure, format_term, load_algebra, load_structure,
                     load_theory, load_variety, parse_goal)


def _closed(theory, X):
    """Read a structure file as a presentation and close it under the theory."""
    try:
        return close(theory, X.carrier, X.facts)
    except StructureError:
        raise ParseError("the structure's closure identifies points; it does not present a model") from None


def _structure_json(X) -> dict:
    return context_json(X)


def _distances(X) -> list:
    """Strongest generator per ordered pair, for binary graded families."""
    out = []
    for f in sorted(X.facts, key=Fact.sort_key):
        if f.bound is not None and len(f.args) == 2 and f.args[0] != f.args[1]:
            out.append(f)
    return out


def _emit(args, doc: dict, text: str):
    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, "command": args.command, **doc}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_reflect(args) -> int:
    th = load_theory(args.theory)
    X = load_structure(args.structure, th)
    R, q = reflect(th, X)
    lines = [format_structure(R, "reflection").rstrip("\n")]
    for p in X.carrier:
        lines.append(f"map {show_point(p)} -> {show_point(q[p])}")
    _emit(args, {"model": _structure_json(R), "quotient": {show_point(p): show_point(q[p]) for p in X.carrier}},
          "\n".join(lines))
    return 0


def cmd_saturate(args) -> int:
    if args.variety:
        V = load_variety(args.variety)
        X = _closed(V.theory, load_structure(args.context, V.theory))
        bank = saturate_judgements(V, X, args.depth, fuel=args.fuel, guard=args.guard)
        js = bank.judgements()
        lines = [f"terms {len(bank.terms())} classes {len(bank.reps())} judgements {len(js)}"
                 + ("" if bank.complete else " (depth-limited)")]
        lines += [format_judgement(j) for j in js]
        _emit(args, {"complete": bank.complete, "terms": len(bank.terms()), "classes": len(bank.reps()),
                     "judgements": [format_judgement(j) for j in js]}, "\n".join(lines))
        return 0
    th = load_theory(args.theory)
    X = load_structure(args.structure, th)
    facts = sorted(saturate(th, X), key=Fact.sort_key)
    _emit(args, {"edges": [edge_json(f) for f in facts]}, "\n".join(str(f) for f in facts))
    return 0


def cmd_derive(args) -> int:
    V = load_variety(args.variety)
    X = _closed(V.theory, load_structure(args.context, V.theory))
    goal = parse_goal(args.goal, V, X)
    goals = [goal]
    if isinstance(goal, tuple):
        goals = [Rel(s, a, g) for s, a, g in V.theory.eq_atoms(goal[1], goal[2])]
        if not goals:
            raise ParseError("equality goals need an Eq witness in the theory")
    proofs = []
    status = "proved"
    for g in goals:
        check_goal(V, X, g)
        res = query(V, X, g, args.depth, focus=args.focus, fuel=args.fuel, guard=args.guard)
        if res.proof is None:
            status = res.status
            break
        proofs.append(res.proof)
    doc = {"goal": format_judgement(goal), "depth": args.depth, "focus": args.focus, "status": status}
    if status != "proved":
        _emit(args, doc, f"not derived at depth {args.depth}: {status}")
        return 1
    source = {"variety": str(args.variety), "context": str(args.context), "goal": args.goal}
    docs = [proof_to_json(p, V, source) for p in proofs]
    if args.proof:
        out = docs[0] if len(docs) == 1 else {"schema_version": SCHEMA_VERSION, "kind": "proofs", "proofs": docs}
        Path(args.proof).write_text(serial.dumps(out), encoding="utf-8")
    doc["nodes"] = [len(d["nodes"]) for d in docs]
    if args.json:
        doc["proofs"] = docs
    text = "\n".join(p.render() for p in proofs) + f"\nproved {format_judgement(goal)}"
    _emit(args, doc, text)
    return 0


def cmd_check_proof(args) -> int:
    V = load_variety(args.variety)
    try:
        raw = json.loads(Path(args.proof).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.proof}: not JSON ({exc.msg} at line {exc.lineno})") from None
    docs = raw.get("proofs", [raw]) if isinstance(raw, dict) and raw.get("kind") == "proofs" else [raw]
    errors = []
    claims = []
    for d in docs:
        try:
            p = proof_from_json(d, V)
        except (SerialError, StructureError, DomainError, TheoryError) as exc:
            errors.append(f"does not decode: {exc}")
            continue
        err = proof_error(p, V)
        claims.append(str(p.claim))
        if err:
            errors.append(err)
    ok = not errors
    _emit(args, {"valid": ok, "errors": errors, "claims": claims},
          ("valid: " + "; ".join(claims)) if ok else "invalid: " + "; ".join(errors))
    return 0 if ok else 1


def cmd_free(args) -> int:
    V = load_variety(args.variety)
    X = _closed(V.theory, load_structure(args.context, V.theory))
    F = free_algebra(V, X, args.depth, guard=args.guard)
    lines = [f"classes {len(F.classes)} stabilized {'yes' if F.stabilized else 'no'}"]
    for r in F.carrier.carrier:
        members = F.classes[r]
        lines.append(f"class {format_term(r)} ({len(members)} terms)")
    for f in sorted(F.carrier.facts, key=Fact.sort_key):
        lines.append("edge " + f"{f.symbol}{'' if f.bound is None else f'[{f.bound}]'}("
                     + ", ".join(format_term(a) for a in f.args) + ")")
    tables = {}
    for name in sorted(F.algebra.tables):
        rows = []
        for key, v in sorted(F.algebra.tables[name].items(), key=lambda kv: tuple(t.sort_key for t in kv[0])):
            lhs = f"{name}(" + ", ".join(format_term(t) for t in key) + ")"
            rows.append([lhs, format_term(v)])
            lines.append(f"value {lhs} = {format_term(v)}")
        tables[name] = rows
    doc = {"stabilized": F.stabilized, "depth": args.depth,
           "classes": [{"rep": term_json(r), "text": format_term(r), "size": len(F.classes[r])}
                       for r in F.carrier.carrier],
           "edges": [{"symbol": f.symbol, "args": [format_term(a) for a in f.args],
                      "bound": None if f.bound is None else str(f.bound)}
                     for f in sorted(F.carrier.facts, key=Fact.sort_key)],
           "tables": tables,
           "unit": {show_point(x): format_term(F.unit(x)) for x in X.carrier}}
    _emit(args, doc, "\n".join(lines))
    return 0 if F.stabilized else 1


def cmd_check_model(args) -> int:
    th = load_theory(args.theory)
    X = load_structure(args.structure, th)
    ok = is_model(th, X)
    missing = []
    if not ok:
        for f in sorted(saturate(th, X), key=Fact.sort_key):
            if f.symbol == "=" or not X.covers(f.symbol, f.args, f.bound):
                missing.append(str(f))
    _emit(args, {"model": ok, "missing": missing},
          "model" if ok else "not a model; missing:\n" + "\n".join(missing))
    return 0 if ok else 1


def cmd_check_algebra(args) -> int:
    V = load_variety(args.variety)
    A = load_algebra(args.algebra, V)
    violations = []
    for ax in V.axioms:
        e = find_violation(A, ax, args.guard)
        if e is not None:
            violations.append({"axiom": ax.name or str(ax),
                               "assignment": {show_point(k): show_point(v) for k, v in e.items()}})
    ok = not violations
    text = "algebra of the variety" if ok else "\n".join(
        f"violates {v['axiom']} at " + ", ".join(f"{k}->{w}" for k, w in v["assignment"].items())
        for v in violations)
    _emit(args, {"in_variety": ok, "violations": violations}, text)
    return 0 if ok else 1


def _pair(args):
    th = load_theory(args.theory)
    X = _closed(th, load_structure(args.left, th))
    Y = _closed(th, load_structure(args.right, th))
    return th, X, Y


def _structure_text(M, name) -> str:
    lines = [format_structure(M, name).rstrip("\n")]
    for f in _distances(M):
        lines.append(f"dist {show_point(f.args[0])} {show_point(f.args[1])} {f.bound}")
    return "\n".join(lines)


def cmd_hom(args) -> int:
    th, X, Y = _pair(args)
    H = internal_hom(X, Y, th, args.guard)
    _emit(args, {"model": _structure_json(H), "maps": len(H.carrier)}, _structure_text(H, "hom"))
    return 0


def cmd_tensor(args) -> int:
    th, X, Y = _pair(args)
    T = manhattan(th, X, Y)
    _emit(args, {"model": _structure_json(T)}, _structure_text(T, "tensor"))
    return 0


def cmd_monad_laws(args) -> int:
    V = load_variety(args.variety)
    objs = [_closed(V.theory, load_structure(p, V.theory)) for p in args.objects]
    rep = check_monad_laws(V, objs, args.depth, guard=args.guard)
    doc = {"ok": rep.ok, "objects": rep.objects, "unit_checks": rep.unit_checks, "left_checks": rep.left_checks,
           "assoc_checks": rep.assoc_checks, "violations": len(rep.violations),
           "enriched": None if rep.enrichment is None else rep.enrichment.ok}
    text = (f"unit {rep.unit_checks} left {rep.left_checks} assoc {rep.assoc_checks} "
            f"violations {len(rep.violations)} enriched {doc['enriched']}")
    _emit(args, doc, text)
    return 0 if rep.ok else 1


def cmd_extract(args) -> int:
    V = load_variety(args.variety)
    ars = [_closed(V.theory, load_structure(p, V.theory)) for p in args.arity]
    M = free_monad_oracle(V, ars, args.depth, args.guard)
    IT = induce_theory(M, ars, args.guard)
    ops = []
    lines = []
    for op in IT.signature:
        inf = IT.info[op.name]
        ops.append({"name": op.name, "arity": inf.arity_index, "element": format_term(inf.element)})
        lines.append(f"op {op.name} arity {inf.arity_index} element {format_term(inf.element)}")
    fams = {str(k): len(v) for k, v in IT.families.items()}
    lines.append("families " + " ".join(f"{k}:{v}" for k, v in fams.items()))
    _emit(args, {"operations": ops, "families": fams}, "\n".join(lines))
    return 0


def cmd_roundtrip(args) -> int:
    V = load_variety(args.variety)
    ars = [_closed(V.theory, load_structure(p, V.theory)) for p in args.arity]
    rep = verify_roundtrip(V, ars, args.depth, carrier_bound=args.carrier_bound, guard=args.guard)
    doc = {"ok": rep.ok, "canonical": list(rep.canonical_ok), "algebras": rep.algebras,
           "generator_maps": rep.generator_maps, "violations": len(rep.violations)}
    _emit(args, doc, f"canonical {rep.canonical_ok} algebras {rep.algebras} "
                     f"generator maps {rep.generator_maps} violations {len(rep.violations)}")
    return 0 if rep.ok else 1


def cmd_fuzz(args) -> int:
    rep = fuzz(args.count, args.seed, guard=args.guard)
    doc = {"ok": rep.ok, "queries": rep.queries, "proofs": rep.proofs, "valid": rep.valid,
           "mutants": rep.mutants, "rejected": rep.rejected, "kinds": dict(sorted(rep.kinds.items())),
           "failures": [list(f) for f in rep.failures]}
    text = (f"queries {rep.queries} proofs {rep.proofs} valid {rep.valid} "
            f"mutants {rep.mutants} rejected {rep.rejected}")
    _emit(args, doc, text)
    return 0 if rep.ok else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=3, help="term depth bound (default 3)")
    common.add_argument("--guard", type=int, default=None, help="enumeration budget (default RELAT_GUARD or 10^6)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="random seed for fuzz commands")

    ap = argparse.ArgumentParser(prog="relat", description="Relational algebraic theories on finite structures.")
    ap.add_argument("--version", action="version", version=f"relat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        return p

    p = cmd("reflect", cmd_reflect, "quotient of a structure by derivable equality")
    p.add_argument("--theory", required=True)
    p.add_argument("--structure", required=True)

    p = cmd("saturate", cmd_saturate, "entailed edges, or the judgement bank of a variety")
    p.add_argument("--theory")
    p.add_argument("--structure")
    p.add_argument("--variety")
    p.add_argument("--context")
    p.add_argument("--fuel", type=int, default=None)

    p = cmd("derive", cmd_derive, "prove a judgement in the relational logic")
    p.add_argument("--variety", required=True)
    p.add_argument("--context", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--focus", action="store_true", help="goal-directed search over the goal's subterms")
    p.add_argument("--proof", help="write the proof document here")
    p.add_argument("--fuel", type=int, default=None)

    p = cmd("check-proof", cmd_check_proof, "re-check a proof document")
    p.add_argument("--variety", required=True)
    p.add_argument("--proof", required=True)

    p = cmd("free", cmd_free, "free algebra approximation over a context")
    p.add_argument("--variety", required=True)
    p.add_argument("--context", required=True)

    p = cmd("check-model", cmd_check_model, "whether a structure is a model of a theory")
    p.add_argument("--theory", required=True)
    p.add_argument("--structure", required=True)

    p = cmd("check-algebra", cmd_check_algebra, "whether an algebra satisfies the variety axioms")
    p.add_argument("--variety", required=True)
    p.add_argument("--algebra", required=True)

    for name, fn, help_ in (("hom", cmd_hom, "internal hom of two models"),
                            ("tensor", cmd_tensor, "Manhattan tensor of two models")):
        p = cmd(name, fn, help_)
        p.add_argument("--theory", required=True)
        p.add_argument("left")
        p.add_argument("right")

    p = cmd("monad-laws", cmd_monad_laws, "Kleisli laws of the free-algebra monad")
    p.add_argument("--variety", required=True)
    p.add_argument("--objects", nargs="+", required=True)

    for name, fn, help_ in (("extract", cmd_extract, "induced theory of the free-algebra monad"),
                            ("roundtrip", cmd_roundtrip, "canonical algebras and universal extensions")):
        p = cmd(name, fn, help_)
        p.add_argument("--variety", required=True)
        p.add_argument("--arity", nargs="+", required=True)
        if name == "roundtrip":
            p.add_argument("--carrier-bound", type=int, default=3)

    p = cmd("fuzz-proofs", cmd_fuzz, "random derive queries and proof mutations")
    p.add_argument("--count", type=int, default=100)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "saturate" and not ((args.theory and args.structure) or (args.variety and args.context)):
        sys.stderr.write("relat: saturate needs --theory/--structure or --variety/--context\n")
        return 2
    try:
        return args.fn(args)
    except (ParseError, StructureError, TheoryError, VarietyError, DomainError, LogicError, OSError) as exc:
        if isinstance(exc, NotStabilized):
            sys.stderr.write(f"relat: {exc}\n")
            return 1
        sys.stderr.write(f"relat: {exc}\n")
        return 2
    except (GuardExceeded, FuelExhausted) as exc:
        sys.stderr.write(f"relat: {exc.__class__.__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
