"""Line-oriented file formats for theories, structures, varieties and algebras.

Every format ignores blank lines and ``#`` comments.  Errors carry the path,
line and column of the offending token.

Theory files::

    theory met
    relfam eq rational
    axiom Refl: => eq[0](x,x)
    axiom Triang: eq[e](x,y), eq[f](y,z) => eq[e+f](x,z)
    axiom Up: eq[e](x,y) => eq[e+f](x,y) where f >= 0
    limitrule met-arch eq
    eq eq[0](x,y)

Structure files::

    structure two over met
    points a b
    edge eq[1/2](a,b)

Variety files (structures can be declared inline with ``structure NAME`` ...
``end`` or referenced by relative path)::

    variety semilattice over pos
    structure two
      points x y
    end
    op join arity two
    axiom upper: context two : le(x, join{x->x, y->y})

Algebra files::

    algebra chain
    points a b
    edge le(a,b)
    value join(a,b) = b
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from ..algebra import OpSymbol, SigmaAlgebra, SigmaRelation, Variety, VarietyError
from ..domains import UNIT, Bound, DomainError, FiniteLattice, as_rational
from ..horn.ops import as_model, builtin_theory, is_model, reflect, validate_theory
from ..horn.theory import Atom, HornAxiom, HornTheory, IndexExpr, LimitRule, Relation, SideCondition, TheoryError
from ..structops import iter_maps, presentation
from ..structures import Fact, PreStructure, StructureError, show_point
from ..terms import App, Def, Rel, Term, Var

BUILTINS = ("set", "pos", "met")


class ParseError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None, col: int | None = None):
        self.message, self.path, self.line, self.col = message, path, line, col
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
            if col is not None:
                where += f"{col}:"
        super().__init__(f"{where} {message}" if where else message)


_TOKEN = re.compile(r"\s*(?:(->|=>|>=|<=|[()\[\]{},:=+<>])|(\d+(?:/\d+)?)|([A-Za-z_](?:[A-Za-z0-9_'.]|-(?!>))*))")


@dataclass
class Tok:
    kind: str  # "p" punctuation, "n" number, "i" identifier
    text: str
    col: int


def tokenize(text: str, path=None, line=None) -> list[Tok]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            j = pos
            while j < n and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", path, line, j + 1)
        col = m.start(m.lastindex) + 1
        if m.group(1):
            out.append(Tok("p", m.group(1), col))
        elif m.group(2):
            out.append(Tok("n", m.group(2), col))
        else:
            out.append(Tok("i", m.group(3), col))
        pos = m.end()
    return out


class Cursor:
    def __init__(self, toks, path=None, line=None):
        self.toks, self.i, self.path, self.line = toks, 0, path, line

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.path, self.line, tok.col if tok else None)

    def next(self) -> Tok:
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of line")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t is not None and t.kind == "p" and t.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        t = self.peek()
        if t is None or t.text != text:
            raise self.error(f"expected {text!r}" + (f", found {t.text!r}" if t else ""))
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t is None or t.kind != "i":
            raise self.error(f"expected {what}")
        self.i += 1
        return t.text

    def end(self):
        if not self.done():
            raise self.error(f"unexpected {self.peek().text!r}")


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            yield no, body


def _head(body: str):
    stripped = body.lstrip()
    word, _, rest = stripped.partition(" ")
    offset = len(body) - len(stripped) + len(word)
    return word, rest, offset


# ---------------------------------------------------------------------------
# theories


def _parse_index_expr(cur: Cursor, dom) -> IndexExpr:
    metas, const = [], None
    while True:
        t = cur.next()
        if t.kind == "n":
            try:
                q = as_rational(t.text)
            except DomainError:
                raise cur.error(f"rational {t.text} out of [0,1]", t) from None
            const = q if const is None else const + q
        elif t.kind == "i":
            if isinstance(dom, FiniteLattice) and t.text in dom.elements:
                if const is not None:
                    raise cur.error("two lattice constants", t)
                const = t.text
            else:
                metas.append(t.text)
        else:
            raise cur.error(f"unexpected {t.text!r} in index", t)
        if not cur.accept("+"):
            break
    cur.expect("]")
    if isinstance(const, Fraction) and const > 1:
        const = Fraction(1)
    return IndexExpr(tuple(metas), const)


def _parse_theory_atom(cur: Cursor, th_rels: dict) -> Atom:
    first = cur.ident("relation symbol or variable")
    if cur.accept("="):
        return Atom("=", (first, cur.ident("variable")))
    rel = th_rels.get(first)
    if rel is None:
        raise cur.error(f"unknown relation symbol {first}")
    index = None
    if cur.accept("["):
        if rel.domain is None:
            raise cur.error(f"relation {first} takes no index")
        index = _parse_index_expr(cur, rel.domain)
    elif rel.domain is not None:
        raise cur.error(f"family {first} needs an index")
    cur.expect("(")
    args = []
    if not cur.accept(")"):
        while True:
            args.append(cur.ident("variable"))
            if cur.accept(")"):
                break
            cur.expect(",")
    if len(args) != rel.arity:
        raise cur.error(f"{first} has arity {rel.arity}, got {len(args)} arguments")
    return Atom(first, tuple(args), index)


def _atoms(cur: Cursor, rels: dict, stop=()) -> list[Atom]:
    out = []
    t = cur.peek()
    if t is None or (t.kind == "p" and t.text in stop) or (t.kind == "i" and t.text in stop):
        return out
    while True:
        out.append(_parse_theory_atom(cur, rels))
        if not cur.accept(","):
            return out


def parse_theory(text: str, path=None) -> HornTheory:
    name = None
    rels: dict = {}
    lattices: dict = {}
    axioms, limits = [], []
    witness = None
    for no, body in _lines(text):
        word, rest, off = _head(body)
        toks = tokenize(body, path, no)[1:]
        cur = Cursor(toks, path, no)
        try:
            if name is None:
                if word != "theory":
                    raise ParseError("a theory file starts with 'theory <name>'", path, no, 1)
                name = cur.ident("theory name")
                cur.end()
                continue
            if word == "rel":
                sym = cur.ident("relation symbol")
                t = cur.next()
                if t.kind != "n" or "/" in t.text:
                    raise cur.error("arity must be a positive integer", t)
                cur.end()
                if sym in rels:
                    raise cur.error(f"relation {sym} declared twice", toks[0])
                rels[sym] = Relation(sym, int(t.text))
            elif word == "lattice":
                lname = cur.ident("lattice name")
                if cur.ident("'elements'") != "elements":
                    raise cur.error("expected 'elements'")
                elems = []
                while cur.peek() is not None and cur.peek().text != "order":
                    elems.append(cur.ident("element"))
                order = []
                if cur.peek() is not None:
                    cur.next()
                    while True:
                        a = cur.ident("element")
                        cur.expect("<")
                        order.append((a, cur.ident("element")))
                        if not cur.accept(","):
                            break
                cur.end()
                lattices[lname] = FiniteLattice(lname, tuple(elems), frozenset(order))
            elif word == "relfam":
                sym = cur.ident("family symbol")
                kind = cur.ident("'rational' or 'lattice'")
                if kind == "rational":
                    dom = UNIT
                elif kind == "lattice":
                    ln = cur.ident("lattice name")
                    if ln not in lattices:
                        raise cur.error(f"unknown lattice {ln}")
                    dom = lattices[ln]
                else:
                    raise cur.error(f"unknown family kind {kind}")
                arity = 2
                if not cur.done():
                    t = cur.next()
                    if t.kind != "n" or "/" in t.text:
                        raise cur.error("arity must be a positive integer", t)
                    arity = int(t.text)
                cur.end()
                if sym in rels:
                    raise cur.error(f"relation {sym} declared twice", toks[0])
                rels[sym] = Relation(sym, arity, dom)
            elif word == "axiom":
                label = ""
                if len(toks) >= 2 and toks[0].kind == "i" and toks[1].text == ":":
                    label = toks[0].text
                    cur.i = 2
                prem = _atoms(cur, rels, stop=("=>",))
                cur.expect("=>")
                concl = _parse_theory_atom(cur, rels)
                where = []
                if not cur.done():
                    if cur.ident("'where'") != "where":
                        raise cur.error("expected 'where'")
                    while True:
                        left = cur.ident("metavariable")
                        op = cur.next()
                        if op.text not in (">", ">="):
                            raise cur.error("side conditions use > or >=", op)
                        r = cur.next()
                        dom = rels[concl.symbol].domain if concl.symbol in rels else None
                        if r.kind == "n":
                            right = as_rational(r.text)
                        elif isinstance(dom, FiniteLattice) and r.text in dom.elements:
                            right = dom.principal(r.text)
                        else:
                            right = r.text
                        where.append(SideCondition(left, op.text, right))
                        if not cur.accept(","):
                            break
                cur.end()
                axioms.append(HornAxiom(tuple(prem), concl, tuple(where), name=label))
            elif word == "limitrule":
                lname = cur.ident("limit rule")
                fam = None
                if not cur.done():
                    fam = cur.ident("family")
                cur.end()
                if fam is None:
                    graded = [r.name for r in rels.values() if r.domain is not None]
                    if len(graded) != 1:
                        raise cur.error("name the family the limit rule applies to")
                    fam = graded[0]
                limits.append(LimitRule(lname, fam))
            elif word == "eq":
                witness = tuple(_atoms(cur, rels))
                cur.end()
                for w in witness:
                    if w.index is not None and w.index.metas:
                        raise ParseError("Eq witness indices must be constants", path, no)
            else:
                raise ParseError(f"unknown declaration {word!r}", path, no, 1)
        except (TheoryError, DomainError) as exc:
            raise ParseError(str(exc), path, no) from None
    if name is None:
        raise ParseError("empty theory file", path)
    th = HornTheory(tuple(rels.values()), tuple(axioms), tuple(limits), witness, name=name)
    try:
        validate_theory(th)
    except (TheoryError, DomainError) as exc:
        raise ParseError(f"theory {name}: {exc}", path) from None
    return th


def format_theory(th: HornTheory) -> str:
    lines = [f"theory {_ident(th.name or 'anonymous')}"]
    seen_lat = set()
    for r in th.relations:
        if isinstance(r.domain, FiniteLattice) and r.domain.name not in seen_lat:
            seen_lat.add(r.domain.name)
            lat = r.domain
            cover = sorted((a, b) for a, b in lat.order if a != b)
            line = f"lattice {lat.name} elements " + " ".join(lat.elements)
            if cover:
                line += " order " + ", ".join(f"{a}<{b}" for a, b in cover)
            lines.append(line)
    for r in th.relations:
        if r.domain is None:
            lines.append(f"rel {r.name} {r.arity}")
        elif isinstance(r.domain, FiniteLattice):
            lines.append(f"relfam {r.name} lattice {r.domain.name} {r.arity}")
        else:
            lines.append(f"relfam {r.name} rational {r.arity}")
    for ax in th.axioms:
        label = f"{ax.name}: " if ax.name and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_'.\-]*", ax.name) else ""
        body = ", ".join(str(p) for p in ax.premises)
        line = f"axiom {label}{body + ' ' if body else ''}=> {ax.conclusion}"
        if ax.where:
            line += " where " + ", ".join(str(w) for w in ax.where)
        lines.append(line)
    for lr in th.limit_rules:
        lines.append(f"limitrule {lr.name} {lr.family}")
    if th.eq_witness is not None:
        lines.append("eq " + ", ".join(str(w) for w in th.eq_witness))
    return "\n".join(lines) + "\n"


def _ident(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_'.\-]", "_", name).strip("_") or "anonymous"


def load_theory(ref: str, base: Path | None = None) -> HornTheory:
    """A builtin name (``set``, ``pos``, ``met``) or a path to a theory file."""
    if ref in BUILTINS:
        return builtin_theory(ref)
    p = Path(ref)
    if base is not None and not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ParseError(f"no theory named {ref!r} and no such file")
    return parse_theory(p.read_text(encoding="utf-8"), p)


# ---------------------------------------------------------------------------
# structures


def _parse_bound(cur: Cursor, th: HornTheory, sym: str):
    rel = th.relation(sym)
    if not cur.accept("["):
        if rel.domain is not None:
            raise cur.error(f"family {sym} needs an index")
        return None
    if rel.domain is None:
        raise cur.error(f"relation {sym} takes no index")
    openb = cur.accept(">")
    t = cur.next()
    cur.expect("]")
    try:
        if isinstance(rel.domain, FiniteLattice):
            if openb:
                raise cur.error("lattice indices cannot be strict", t)
            return rel.domain.principal(t.text)
        q = as_rational(t.text)
        return Bound(q, not openb)
    except DomainError as exc:
        msg = str(exc)
        if "outside" in msg:
            msg = f"rational {t.text} out of [0,1]"
        raise cur.error(msg, t) from None


def _parse_edge(cur: Cursor, th: HornTheory, points=None) -> Fact:
    tok = cur.peek()
    sym = cur.ident("relation symbol")
    if not th.has_relation(sym):
        raise cur.error(f"unknown relation symbol {sym}", tok)
    bound = _parse_bound(cur, th, sym)
    cur.expect("(")
    args = []
    while True:
        t = cur.next()
        if t.kind not in ("i", "n"):
            raise cur.error("expected a point", t)
        if points is not None and t.text not in points:
            raise cur.error(f"undeclared point {t.text}", t)
        args.append(t.text)
        if cur.accept(")"):
            break
        cur.expect(",")
    rel = th.relation(sym)
    if len(args) != rel.arity:
        raise cur.error(f"{sym} has arity {rel.arity}, got {len(args)} points", tok)
    return Fact(sym, tuple(args), bound)


@dataclass
class _StructAcc:
    name: str
    points: list
    facts: list
    line: int

    def build(self, path=None) -> PreStructure:
        return PreStructure(self.points, self.facts)


def _structure_line(acc: _StructAcc, word: str, cur: Cursor, th: HornTheory, path, no):
    if word == "points":
        while not cur.done():
            t = cur.next()
            if t.kind not in ("i", "n"):
                raise cur.error("expected a point name", t)
            if t.text in acc.points:
                raise cur.error(f"point {t.text} declared twice", t)
            acc.points.append(t.text)
    elif word == "edge":
        while True:
            acc.facts.append(_parse_edge(cur, th, set(acc.points)))
            if not cur.accept(","):
                break
        cur.end()
    else:
        raise ParseError(f"unknown structure declaration {word!r}", path, no, 1)


def parse_structure(text: str, theory: HornTheory, path=None) -> PreStructure:
    acc = None
    for no, body in _lines(text):
        word, rest, off = _head(body)
        cur = Cursor(tokenize(body, path, no)[1:], path, no)
        if acc is None:
            if word != "structure":
                raise ParseError("a structure file starts with 'structure <name> over <theory>'", path, no, 1)
            sname = cur.ident("structure name")
            if not cur.done():
                if cur.ident("'over'") != "over":
                    raise cur.error("expected 'over'")
                over = cur.ident("theory name")
                if theory.name and over != theory.name and Path(over).stem != theory.name:
                    raise ParseError(f"structure is over {over}, not {theory.name}", path, no)
            cur.end()
            acc = _StructAcc(sname, [], [], no)
            continue
        try:
            _structure_line(acc, word, cur, theory, path, no)
        except TheoryError as exc:
            raise ParseError(str(exc), path, no) from None
    if acc is None:
        raise ParseError("empty structure file", path)
    return acc.build()


def _fmt_edge(f: Fact) -> str:
    idx = "" if f.bound is None else f"[{f.bound}]"
    return f"{f.symbol}{idx}(" + ",".join(show_point(a) for a in f.args) + ")"


def format_structure(X: PreStructure, name: str = "S", theory: str | None = None, indent: str = "",
                     header: bool = True) -> str:
    lines = []
    if header:
        lines.append(f"structure {name}" + (f" over {theory}" if theory else ""))
    lines.append(indent + "points" + "".join(" " + show_point(p) for p in X.carrier))
    for f in sorted(X.facts, key=Fact.sort_key):
        lines.append(indent + "edge " + _fmt_edge(f))
    return "\n".join(lines) + "\n"


def load_structure(path, theory: HornTheory) -> PreStructure:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such structure file {path}")
    return parse_structure(p.read_text(encoding="utf-8"), theory, p)


# ---------------------------------------------------------------------------
# terms and judgements


def parse_term(cur: Cursor, ops: dict, points) -> Term:
    tok = cur.peek()
    if tok is None:
        raise cur.error("expected a term")
    t = cur.next()
    if t.kind not in ("i", "n"):
        raise cur.error(f"unexpected {t.text!r}", t)
    nxt = cur.peek()
    if nxt is not None and nxt.kind == "p" and nxt.text in ("(", "{"):
        if t.text not in ops:
            raise cur.error(f"unknown operation {t.text}", t)
        ar = ops[t.text]
        keys = ar.carrier
        if cur.accept("{"):
            args = {}
            if not cur.accept("}"):
                while True:
                    kt = cur.next()
                    if kt.text not in {show_point(k) for k in keys}:
                        raise cur.error(f"{kt.text} is not a point of the arity of {t.text}", kt)
                    cur.expect("->")
                    k = next(k for k in keys if show_point(k) == kt.text)
                    if k in args:
                        raise cur.error(f"argument {kt.text} given twice", kt)
                    args[k] = parse_term(cur, ops, points)
                    if cur.accept("}"):
                        break
                    cur.expect(",")
            if set(args) != set(keys):
                raise cur.error(f"{t.text} needs arguments for {' '.join(map(show_point, keys))}", t)
            return App(t.text, args)
        cur.expect("(")
        vals = []
        if not cur.accept(")"):
            while True:
                vals.append(parse_term(cur, ops, points))
                if cur.accept(")"):
                    break
                cur.expect(",")
        if len(vals) != len(keys):
            raise cur.error(f"{t.text} takes {len(keys)} arguments, got {len(vals)}", t)
        return App(t.text, list(zip(keys, vals)))
    if points is not None and t.text not in points:
        raise cur.error(f"unknown point or variable {t.text}", t)
    return Var(t.text)


def parse_judgement(cur: Cursor, theory: HornTheory, ops: dict, points, allow_def: bool = True):
    """``def(t)``, ``s = t`` or ``sym[idx](t, ...)``; returns Def, Rel or ("=", s, t)."""
    t0, t1 = cur.peek(), cur.peek(1)
    if t0 is not None and t0.text == "def" and "def" not in ops and t1 is not None and t1.text == "(":
        if not allow_def:
            raise cur.error("definedness is not allowed here")
        cur.next()
        cur.expect("(")
        term = parse_term(cur, ops, points)
        cur.expect(")")
        return Def(term)
    if t0 is not None and t0.kind == "i" and theory.has_relation(t0.text) and t1 is not None \
            and t1.text in ("(", "["):
        sym = cur.next().text
        bound = _parse_bound(cur, theory, sym)
        cur.expect("(")
        args = []
        while True:
            args.append(parse_term(cur, ops, points))
            if cur.accept(")"):
                break
            cur.expect(",")
        rel = theory.relation(sym)
        if len(args) != rel.arity:
            raise cur.error(f"{sym} has arity {rel.arity}, got {len(args)} terms", t0)
        return Rel(sym, tuple(args), bound)
    s = parse_term(cur, ops, points)
    cur.expect("=")
    return ("=", s, parse_term(cur, ops, points))


def parse_goal(text: str, V: Variety, X: PreStructure):
    cur = Cursor(tokenize(text), None, None)
    g = parse_judgement(cur, V.theory, {n: op.arity for n, op in V.ops.items()}, set(map(str, X.carrier)))
    cur.end()
    return g


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return show_point(t.point)
    return t.braced()


def format_judgement(j) -> str:
    if isinstance(j, Def):
        return f"def({format_term(j.term)})"
    if isinstance(j, tuple) and j[0] == "=":
        return f"{format_term(j[1])} = {format_term(j[2])}"
    idx = "" if j.bound is None else f"[{j.bound}]"
    return f"{j.symbol}{idx}(" + ", ".join(format_term(a) for a in j.args) + ")"


# ---------------------------------------------------------------------------
# varieties


def parse_variety(text: str, path=None) -> Variety:
    base = Path(path).parent if path is not None else None
    name = theory = None
    structs: dict = {}
    ops: dict = {}
    op_list = []
    axioms = []
    block = None
    for no, body in _lines(text):
        word, rest, off = _head(body)
        cur = Cursor(tokenize(body, path, no)[1:], path, no)
        try:
            if name is None:
                if word != "variety":
                    raise ParseError("a variety file starts with 'variety <name> over <theory>'", path, no, 1)
                name = cur.ident("variety name")
                if cur.ident("'over'") != "over":
                    raise cur.error("expected 'over'")
                ref = cur.next().text
                while not cur.done():
                    ref += cur.next().text
                theory = load_theory(ref, base)
                continue
            if block is not None:
                if word == "end":
                    cur.end()
                    structs[block.name] = (block.build(), block.line)
                    block = None
                else:
                    _structure_line(block, word, cur, theory, path, no)
                continue
            if word == "structure":
                sname = cur.ident("structure name")
                cur.end()
                if sname in structs:
                    raise cur.error(f"structure {sname} declared twice")
                block = _StructAcc(sname, [], [], no)
            elif word == "op":
                oname = cur.ident("operation name")
                if cur.ident("'arity'") != "arity":
                    raise cur.error("expected 'arity'")
                ar = _structure_ref(cur, structs, theory, base)
                cur.end()
                if oname in ops:
                    raise cur.error(f"operation {oname} declared twice")
                ops[oname] = ar
                op_list.append(OpSymbol(oname, ar))
            elif word == "axiom":
                label = ""
                if cur.peek(1) is not None and cur.peek(1).text == ":" and cur.peek().text != "context":
                    label = cur.ident()
                    cur.expect(":")
                if cur.ident("'context'") != "context":
                    raise cur.error("expected 'context'")
                ctx = _structure_ref(cur, structs, theory, base)
                given = None
                if cur.peek() is not None and cur.peek().text == "given":
                    cur.next()
                    given = []
                    while True:
                        given.append(_parse_edge(cur, theory, set(map(str, ctx.carrier))))
                        if not cur.accept(","):
                            break
                cur.expect(":")
                j = parse_judgement(cur, theory, ops, set(map(str, ctx.carrier)), allow_def=False)
                cur.end()
                pres = tuple(given) if given is not None else presentation(theory, ctx)
                label = label or f"line{no}"
                if isinstance(j, tuple):
                    atoms = theory.eq_atoms(j[1], j[2])
                    if not atoms:
                        raise cur.error("equality needs an Eq witness in the theory")
                    for i, (sym, args, gen) in enumerate(atoms):
                        axioms.append(SigmaRelation(ctx, Rel(sym, args, gen), pres, name=f"{label}/{i}"))
                else:
                    axioms.append(SigmaRelation(ctx, j, pres, name=label))
            else:
                raise ParseError(f"unknown declaration {word!r}", path, no, 1)
        except (TheoryError, StructureError, DomainError, VarietyError) as exc:
            raise ParseError(str(exc), path, no) from None
    if name is None:
        raise ParseError("empty variety file", path)
    if block is not None:
        raise ParseError(f"structure {block.name} is missing 'end'", path, block.line)
    try:
        return Variety(theory, op_list, axioms, name=name)
    except (VarietyError, StructureError) as exc:
        raise ParseError(f"variety {name}: {exc}", path) from None


def close_model(theory: HornTheory, pre: PreStructure):
    """The model presented by ``pre``: its closure, provided no points are identified."""
    if is_model(theory, pre):
        return as_model(theory, pre)
    m, q = reflect(theory, pre)
    if len(m.carrier) != len(pre.carrier):
        raise StructureError("its closure identifies points, so it presents no model on these points")
    return as_model(theory, PreStructure(pre.carrier, m.facts))


def _structure_ref(cur: Cursor, structs: dict, theory: HornTheory, base):
    tok = cur.peek()
    ref = cur.ident("structure name or path")
    if ref in structs:
        pre = structs[ref][0]
    else:
        p = Path(ref)
        if base is not None and not p.is_absolute():
            p = base / p
        if not p.exists():
            raise cur.error(f"unknown structure {ref}", tok)
        pre = load_structure(p, theory)
    try:
        return close_model(theory, pre)
    except StructureError as exc:
        raise cur.error(f"structure {ref}: {exc}", tok) from None


def format_variety(V: Variety) -> str:
    th = V.theory.name or "anonymous"
    lines = [f"variety {V.name or 'anonymous'} over {th}"]
    names: dict = {}

    def ref(m):
        for k, (n, s) in names.items():
            if s == m:
                return n
        n = f"s{len(names)}"
        names[len(names)] = (n, m)
        lines.append(f"structure {n}")
        lines.append(format_structure(m, header=False, indent="  ").rstrip("\n"))
        lines.append("end")
        return n

    for op in V.signature:
        r = ref(op.arity)
        lines.append(f"op {op.name} arity {r}")
    for ax in V.axioms:
        r = ref(ax.context)
        given = ", ".join(_fmt_edge(f) for f in ax.presentation)
        label = ax.name.replace("/", "_") if ax.name else ""
        label = f"{label}: " if label and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_'.\-]*", label) else ""
        lines.append(f"axiom {label}context {r} given {given} : {format_judgement(ax.relation)}"
                     if ax.presentation else f"axiom {label}context {r} : {format_judgement(ax.relation)}")
    return "\n".join(lines) + "\n"


def load_variety(path) -> Variety:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such variety file {path}")
    return parse_variety(p.read_text(encoding="utf-8"), p)


# ---------------------------------------------------------------------------
# algebras


def parse_algebra(text: str, V: Variety, path=None) -> SigmaAlgebra:
    acc = None
    values: dict = {}
    for no, body in _lines(text):
        word, rest, off = _head(body)
        cur = Cursor(tokenize(body, path, no)[1:], path, no)
        if acc is None:
            if word != "algebra":
                raise ParseError("an algebra file starts with 'algebra <name>'", path, no, 1)
            acc = _StructAcc(cur.ident("algebra name"), [], [], no)
            continue
        if word == "value":
            pts = set(acc.points)
            t = parse_term(cur, {n: op.arity for n, op in V.ops.items()}, pts)
            if not isinstance(t, App) or any(not isinstance(a, Var) for a in t.values):
                raise cur.error("a value line is 'op(points) = point'")
            cur.expect("=")
            vt = cur.next()
            if vt.text not in pts:
                raise cur.error(f"undeclared point {vt.text}", vt)
            cur.end()
            key = (t.op, tuple(a.point for a in t.values))
            if key in values:
                raise ParseError(f"value of {t} given twice", path, no)
            values[key] = vt.text
            continue
        _structure_line(acc, word, cur, V.theory, path, no)
    if acc is None:
        raise ParseError("empty algebra file", path)
    try:
        carrier = close_model(V.theory, acc.build())
    except StructureError as exc:
        raise ParseError(str(exc), path) from None
    tables = {n: {} for n in V.ops}
    for (op, key), v in values.items():
        tables[op][key] = v
    for n, op in V.ops.items():
        for key in iter_maps(op.arity, carrier):
            if key not in tables[n]:
                raise ParseError(f"missing value for {n}({', '.join(map(show_point, key))})", path)
    try:
        return SigmaAlgebra(V, carrier, tables)
    except VarietyError as exc:
        raise ParseError(str(exc), path) from None


def format_algebra(A: SigmaAlgebra, name: str = "A") -> str:
    lines = [f"algebra {name}"]
    lines.append(format_structure(A.carrier, header=False).rstrip("\n"))
    for n in sorted(A.tables):
        for key, v in sorted(A.tables[n].items(), key=lambda kv: tuple(map(str, kv[0]))):
            lines.append(f"value {n}(" + ", ".join(show_point(k) for k in key) + f") = {show_point(v)}")
    return "\n".join(lines) + "\n"


def load_algebra(path, V: Variety) -> SigmaAlgebra:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such algebra file {path}")
    return parse_algebra(p.read_text(encoding="utf-8"), V, p)
