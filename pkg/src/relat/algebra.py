"""Operation signatures, Σ-algebras, varieties and the algebra enumerator."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product

from .domains import UnitInterval, covers
from .horn.ops import as_model, is_model, metric_to_structure
from .horn.theory import HornTheory, TheoryError
from .structops import (
    GuardExceeded,
    Morphism,
    find_isomorphism,
    get_guard,
    internal_hom,
    is_generated_by,
    iter_maps,
    presentation,
    preserves,
)
from .structures import Fact, Model, PreStructure, StructureError, point_key, show_point
from .terms import App, Def, Rel, Term, Var, subterms


class VarietyError(ValueError):
    """An ill-formed operation, term or variety axiom."""


@dataclass(frozen=True)
class OpSymbol:
    name: str
    arity: Model

    @property
    def points(self) -> tuple:
        return self.arity.carrier

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class SigmaRelation:
    """A variety axiom ``context ⊢ relation`` with a designated presentation."""

    context: Model
    relation: Rel
    presentation: tuple = None
    name: str = ""

    def __post_init__(self):
        if self.presentation is None:
            object.__setattr__(self, "presentation", tuple(sorted(self.context.facts, key=Fact.sort_key)))
        else:
            object.__setattr__(self, "presentation", tuple(Fact(*f) for f in self.presentation))

    def __str__(self) -> str:
        ctx = " ".join(show_point(p) for p in self.context.carrier)
        return f"{{{ctx}}} |- {self.relation}"

    def _key(self):
        return (self.context, self.relation, self.presentation)

    def __eq__(self, other):
        return isinstance(other, SigmaRelation) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


@dataclass(frozen=True)
class IArTriple:
    """Static side data for the inner arity rule: axiom, subterm σ(h), arity edge."""

    axiom: SigmaRelation
    subterm: App
    edge: Fact


class Variety:
    """A relational algebraic theory: Horn theory, operations and axioms."""

    def __init__(self, theory: HornTheory, ops, axioms=(), name: str = "", check: bool = True):
        self.theory = theory
        self.name = name
        self.ops = {}
        for op in ops:
            if op.name in self.ops:
                raise VarietyError(f"operation {op.name} declared twice")
            self.ops[op.name] = op
        self.axioms = tuple(axioms)
        if check:
            self._validate()
        self.iar_table = self._iar_table()

    @property
    def signature(self) -> tuple:
        return tuple(self.ops[k] for k in sorted(self.ops))

    def op(self, name: str) -> OpSymbol:
        try:
            return self.ops[name]
        except KeyError:
            raise VarietyError(f"unknown operation {name}") from None

    def check_term(self, t: Term, carrier) -> None:
        pts = set(carrier)
        for s in subterms(t):
            if isinstance(s, Var):
                if s.point not in pts:
                    raise VarietyError(f"variable {s} is not a context point")
            else:
                op = self.op(s.op)
                if s.keys != op.arity.carrier:
                    raise VarietyError(f"term {s}: arguments do not match the arity of {op.name}")

    def check_rel(self, rel: Rel, carrier) -> None:
        r = self.theory.relation(rel.symbol)
        if len(rel.args) != r.arity:
            raise VarietyError(f"{rel.symbol} has arity {r.arity}")
        if (r.domain is None) != (rel.bound is None):
            raise VarietyError(f"index use on {rel.symbol} does not match its declaration")
        for t in rel.args:
            self.check_term(t, carrier)

    def _validate(self):
        for op in self.ops.values():
            if not is_model(self.theory, op.arity):
                raise VarietyError(f"arity of {op.name} is not a model")
        for ax in self.axioms:
            if not is_model(self.theory, ax.context):
                raise VarietyError(f"context of axiom {ax} is not a model")
            for f in ax.presentation:
                if not ax.context.covers(f.symbol, f.args, f.bound):
                    raise VarietyError(f"presentation edge {f} is not an edge of the context")
            if not is_generated_by(self.theory, ax.context, ax.presentation):
                raise VarietyError(f"presentation of axiom {ax} does not generate its context")
            self.check_rel(ax.relation, ax.context.carrier)

    def _iar_table(self) -> tuple:
        out = []
        for ax in self.axioms:
            seen = set()
            for t in ax.relation.args:
                for s in sorted(subterms(t), key=lambda u: u.sort_key):
                    if isinstance(s, App) and s not in seen:
                        seen.add(s)
                        for e in sorted(self.ops[s.op].arity.facts, key=Fact.sort_key):
                            out.append(IArTriple(ax, s, e))
        return tuple(out)

    def __repr__(self) -> str:
        return f"Variety({self.name or '?'}: {len(self.ops)} ops, {len(self.axioms)} axioms)"


def discrete(theory: HornTheory, points) -> Model:
    """The discrete model on ``points`` (only the reflexive edges forced by axioms)."""
    from .horn.ops import reflect

    m, q = reflect(theory, PreStructure(points, ()))
    return m


# ---------------------------------------------------------------------------
# algebras


class SigmaAlgebra:
    """A model with, per operation, a table on ``[ar(σ), A]`` (image tuples)."""

    def __init__(self, variety: Variety, carrier: Model, tables: dict, check: bool = True):
        self.variety = variety
        self.carrier = carrier
        self.tables = {k: dict(v) for k, v in tables.items()}
        if check:
            self.validate()

    def op(self, name: str, images: tuple):
        return self.tables[name].get(tuple(images))

    def validate(self):
        V = self.variety
        if set(self.tables) != set(V.ops):
            raise VarietyError("tables do not match the signature")
        pts = set(self.carrier.carrier)
        for name, op in V.ops.items():
            keys = set(iter_maps(op.arity, self.carrier))
            if set(self.tables[name]) != keys:
                raise VarietyError(f"table of {name} is not total on the hom-set")
            if any(v not in pts for v in self.tables[name].values()):
                raise VarietyError(f"table of {name} leaves the carrier")
            err = op_preservation_error(V.theory, op, self.carrier, self.tables[name])
            if err:
                raise VarietyError(err)

    def __repr__(self) -> str:
        parts = []
        for name in sorted(self.tables):
            items = sorted(self.tables[name].items(), key=lambda kv: point_key(kv[0]))
            parts.append(name + "{" + ", ".join(f"{show_point(k)}:{show_point(v)}" for k, v in items) + "}")
        return f"SigmaAlgebra({self.carrier}; {'; '.join(parts)})"

    def key(self):
        return (self.carrier, tuple(sorted((n, tuple(sorted(t.items(), key=lambda kv: point_key(kv[0]))))
                                           for n, t in self.tables.items())))


def op_preservation_error(theory, op: OpSymbol, A: PreStructure, table: dict) -> str | None:
    hom = internal_hom(op.arity, A, theory)
    for f in hom.facts:
        vals = tuple(table[p] for p in f.args)
        if not A.covers(f.symbol, vals, f.bound):
            return f"operation {op.name} does not preserve {f.symbol} on {show_point(f.args)}"
    return None


_UNKNOWN = object()


def evaluate(A: SigmaAlgebra, e, t: Term, memo=None, tables=None):
    """Partial evaluation; ``None`` when the term is undefined under ``e``."""
    if memo is None:
        memo = {}
    tables = A.tables if tables is None else tables
    mapping = e.mapping if isinstance(e, Morphism) else e
    return _eval(tables, mapping, t, memo)


def _eval(tables, mapping, t, memo):
    if t in memo:
        return memo[t]
    if isinstance(t, Var):
        v = mapping[t.point]
    else:
        vals = []
        v = None
        for _, s in t.args:
            x = _eval(tables, mapping, s, memo)
            if x is None or x is _UNKNOWN:
                v = x
                break
            vals.append(x)
        else:
            # tables are total on the hom-set, so a missing key means undefined
            v = tables[t.op].get(tuple(vals))
    memo[t] = v
    return v


def holds_rel(A: SigmaAlgebra, e, rel: Rel, tables=None):
    """True/False, or ``_UNKNOWN`` when a needed table entry is still open."""
    memo = {}
    vals = []
    for t in rel.args:
        v = evaluate(A, e, t, memo, tables)
        if v is _UNKNOWN:
            return _UNKNOWN
        if v is None:
            return False
        vals.append(v)
    return A.carrier.covers(rel.symbol, tuple(vals), rel.bound)


def find_violation(A: SigmaAlgebra, r: SigmaRelation, guard=None):
    """An assignment ``context -> A`` falsifying ``r``, or None."""
    for imgs in iter_maps(r.context, A.carrier, guard):
        e = dict(zip(r.context.carrier, imgs))
        if not holds_rel(A, e, r.relation):
            return e
    return None


def satisfies(A: SigmaAlgebra, r: SigmaRelation, guard=None) -> bool:
    return find_violation(A, r, guard) is None


def satisfies_judgement(A: SigmaAlgebra, context: PreStructure, claim, guard=None):
    """Whether every assignment of ``context`` makes ``claim`` (Rel or Def) true."""
    for imgs in iter_maps(context, A.carrier, guard):
        e = dict(zip(context.carrier, imgs))
        if isinstance(claim, Def):
            if evaluate(A, e, claim.term) is None:
                return False
        elif not holds_rel(A, e, claim):
            return False
    return True


def in_variety(A: SigmaAlgebra, guard=None) -> bool:
    """Whether ``A`` satisfies every axiom; axioms sharing a context share one enumeration."""
    groups: dict = {}
    for ax in A.variety.axioms:
        groups.setdefault(ax.context, []).append(ax)
    for ctx, axs in groups.items():
        for imgs in iter_maps(ctx, A.carrier, guard):
            e = dict(zip(ctx.carrier, imgs))
            memo: dict = {}
            for ax in axs:
                vals = [evaluate(A, e, t, memo) for t in ax.relation.args]
                if any(v is None for v in vals) or not A.carrier.covers(
                        ax.relation.symbol, tuple(vals), ax.relation.bound):
                    return False
    return True


def is_homomorphism(h: Morphism, A: SigmaAlgebra, B: SigmaAlgebra) -> bool:
    if not preserves(A.carrier, B.carrier, h.mapping):
        return False
    for name, table in A.tables.items():
        tb = B.tables[name]
        for key, val in table.items():
            img = tuple(h(x) for x in key)
            if tb.get(img) != h(val):
                return False
    return True


# ---------------------------------------------------------------------------
# products and subalgebras


def product_model(theory: HornTheory, models) -> Model:
    models = list(models)
    carrier = list(product(*[m.carrier for m in models]))
    facts = []
    for r in theory.relations:
        for tup in product(carrier, repeat=r.arity):
            if r.domain is None:
                if all(m.covers(r.name, tuple(p[i] for p in tup)) for i, m in enumerate(models)):
                    facts.append(Fact(r.name, tup))
                continue
            gens = (r.domain.bottom(),)
            for i, m in enumerate(models):
                gens = r.domain.intersect(gens, m.gens(r.name, tuple(p[i] for p in tup)))
                if not gens:
                    break
            facts.extend(Fact(r.name, tup, g) for g in gens)
    return Model.trusted(PreStructure(carrier, facts), theory)


def product_algebra(algebras, variety: Variety | None = None) -> SigmaAlgebra:
    algebras = list(algebras)
    V = variety or (algebras[0].variety if algebras else None)
    if V is None:
        raise VarietyError("an empty product needs the variety")
    P = product_model(V.theory, [A.carrier for A in algebras])
    tables = {}
    for name, op in V.ops.items():
        t = {}
        for key in iter_maps(op.arity, P):
            t[key] = tuple(A.tables[name][tuple(p[i] for p in key)] for i, A in enumerate(algebras))
        tables[name] = t
    return SigmaAlgebra(V, P, tables)


def closure_witness(A: SigmaAlgebra, subset):
    """An (operation, argument tuple) leaving ``subset``, or None if closed."""
    sub = set(subset)
    for name in sorted(A.tables):
        for key, val in sorted(A.tables[name].items(), key=lambda kv: point_key(kv[0])):
            if set(key) <= sub and val not in sub:
                return name, key
    return None


def subalgebra_check(A: SigmaAlgebra, subset) -> SigmaAlgebra | None:
    if closure_witness(A, subset) is not None:
        return None
    S = Model.trusted(A.carrier.restrict(subset), A.variety.theory)
    tables = {n: {k: v for k, v in t.items() if set(k) <= set(subset)} for n, t in A.tables.items()}
    return SigmaAlgebra(A.variety, S, tables)


# ---------------------------------------------------------------------------
# palettes and enumeration

MET_GRID = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


def _dedupe(models) -> list:
    out: list = []
    for m in models:
        if not any(len(m.carrier) == len(n.carrier) and find_isomorphism(m, n) is not None for n in out):
            out.append(m)
    return out


def default_palette(theory: HornTheory, bound: int, grid=MET_GRID) -> list[Model]:
    """All carrier models with at most ``bound`` points, up to isomorphism."""
    out = []
    rels = theory.relations
    for n in range(bound + 1):
        pts = [f"p{i}" for i in range(n)]
        if not rels:
            out.append(Model.trusted(PreStructure(pts), theory))
            continue
        if all(r.domain is None for r in rels):
            cands = [(r.name, tup) for r in rels for tup in product(pts, repeat=r.arity)]
            if len(cands) > 16:
                raise GuardExceeded("default palette too large; supply one")
            found = []
            for mask in range(1 << len(cands)):
                facts = [Fact(s, a) for i, (s, a) in enumerate(cands) if mask >> i & 1]
                pre = PreStructure(pts, facts)
                if is_model(theory, pre):
                    found.append(Model.trusted(pre, theory))
            out.extend(_dedupe(found))
            continue
        if len(rels) == 1 and isinstance(rels[0].domain, UnitInterval) and rels[0].arity == 2:
            pairs = list(combinations(range(n), 2))
            found = []
            for vals in product(grid, repeat=len(pairs)):
                d = [[Fraction(0)] * n for _ in range(n)]
                for (i, j), v in zip(pairs, vals):
                    d[i][j] = d[j][i] = v
                try:
                    pre = metric_to_structure(pts, d, rels[0].name)
                except StructureError:
                    continue
                found.append(Model.trusted(pre, theory))
            out.extend(_dedupe(found))
            continue
        raise VarietyError("no default palette for this theory; supply one")
    return out


def _automorphisms(A: PreStructure) -> list[dict]:
    pts = A.carrier
    out = []
    for perm in permutations(pts):
        m = dict(zip(pts, perm))
        if all(A.covers(f.symbol, tuple(m[a] for a in f.args), f.bound) and
               f.bound in A.gens(f.symbol, tuple(m[a] for a in f.args)) for f in A.facts):
            out.append(m)
    return out


def enumerate_algebras(V: Variety, carrier_bound: int = 4, palette=None, guard=None) -> list[SigmaAlgebra]:
    """Every algebra of ``V`` over the palette carriers, up to isomorphism."""
    if palette is None:
        palette = default_palette(V.theory, carrier_bound)
    results = []
    limit = get_guard(guard)
    for A in palette:
        if len(A.carrier) > carrier_bound:
            continue
        A = as_model(V.theory, A)
        results.extend(_algebras_on(V, A, limit))
    return results


def _algebras_on(V: Variety, A: Model, limit: int) -> list[SigmaAlgebra]:
    names = sorted(V.ops)
    entries = []  # (op name, key)
    preserve = []  # (op name, hom fact) relation-preservation constraints
    for name in names:
        op = V.ops[name]
        hom = internal_hom(op.arity, A, V.theory)
        entries.extend((name, k) for k in hom.carrier)
        preserve.extend((name, f) for f in hom.facts)
    homkeys: dict = {n: set() for n in names}
    for n, k in entries:
        homkeys[n].add(k)
    if not A.carrier and entries:
        return []
    axiom_checks = []
    for ax in V.axioms:
        for imgs in iter_maps(ax.context, A, limit):
            axiom_checks.append((ax, dict(zip(ax.context.carrier, imgs))))
    tables = {n: {} for n in names}
    autos = _automorphisms(A)

    def check(pending):
        keep = []
        for c in pending:
            if c[0] == "pres":
                _, name, f = c
                t = tables[name]
                vals = []
                for p in f.args:
                    v = t.get(p, _UNKNOWN)
                    if v is _UNKNOWN:
                        break
                    vals.append(v)
                else:
                    if not A.covers(f.symbol, tuple(vals), f.bound):
                        return None
                    continue
                keep.append(c)
            else:
                _, ax, e = c
                r = _partial_holds(tables, homkeys, e, ax.relation, A)
                if r is False:
                    return None
                if r is _UNKNOWN:
                    keep.append(c)
        return keep

    pending0 = [("pres", n, f) for n, f in preserve] + [("ax", ax, e) for ax, e in axiom_checks]
    found = []
    start = check(pending0)
    if start is None:
        return []
    seen = set()

    def rec(i, pending):
        if i == len(entries):
            snap = {n: dict(t) for n, t in tables.items()}
            canon = _canonical(snap, autos, entries)
            if canon not in seen:
                seen.add(canon)
                found.append(SigmaAlgebra(V, A, snap, check=False))
            return
        name, key = entries[i]
        for v in A.carrier:
            tables[name][key] = v
            nxt = check(pending)
            if nxt is not None:
                rec(i + 1, nxt)
        del tables[name][key]

    rec(0, start)
    return found


def _canonical(tables, autos, entries):
    best = None
    for m in autos:
        img = {}
        for name, key in entries:
            img[(name, tuple(m[x] for x in key))] = m[tables[name][key]]
        vec = tuple(point_key(img[(n, k)]) for n, k in entries)
        if best is None or vec < best:
            best = vec
    return best


def _partial_holds(tables, homkeys, e, rel: Rel, A):
    memo = {}
    vals = []
    unknown = False
    for t in rel.args:
        v = _peval(tables, homkeys, e, t, memo)
        if v is None:
            return False
        if v is _UNKNOWN:
            unknown = True
            continue
        vals.append(v)
    if unknown:
        return _UNKNOWN
    return A.covers(rel.symbol, tuple(vals), rel.bound)


def _peval(tables, homkeys, e, t, memo):
    if t in memo:
        return memo[t]
    if isinstance(t, Var):
        v = e[t.point]
    else:
        vals = []
        v = None
        for _, s in t.args:
            x = _peval(tables, homkeys, e, s, memo)
            if x is None or x is _UNKNOWN:
                v = x
                break
            vals.append(x)
        else:
            key = tuple(vals)
            table = tables[t.op]
            if key in table:
                v = table[key]
            else:
                # an open entry is unknown; a key off the hom-set is undefined
                v = _UNKNOWN if key in homkeys[t.op] else None
    memo[t] = v
    return v
