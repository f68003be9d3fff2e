"""Free algebras as quotients of derivably defined terms, their universal
property, and the free-algebra monad in Kleisli form.

The carrier points of a free algebra are the class representatives
themselves (terms of least depth, then least rendering), so the unit sends a
context point ``x`` to the term ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .algebra import SigmaAlgebra, VarietyError, evaluate, is_homomorphism
from .horn.ops import as_model, is_model
from .logic import JudgementBank, saturate_judgements
from .structops import Functor, Morphism, check_enriched, compose, identity, iter_maps, morphisms
from .structures import Fact, Model, PreStructure
from .terms import App, Var


class NotStabilized(VarietyError):
    """The free-algebra approximation did not stabilize at the requested depth."""


@dataclass
class FreeAlgebraApprox:
    bank: JudgementBank
    classes: dict  # representative -> tuple of member terms
    splitting: dict  # term -> representative
    algebra: SigmaAlgebra
    unit: Morphism
    stabilized: bool
    total: bool  # every operation table is total on its hom-set

    @property
    def carrier(self) -> Model:
        return self.algebra.carrier

    @property
    def depth(self) -> int:
        return self.bank.depth

    def cls(self, t) -> object:
        """The class ``[t]`` of a bank term (as its representative)."""
        return self.splitting[t]


def quotient(bank: JudgementBank, splitting: dict | None = None) -> tuple[Model, dict, dict, bool]:
    """Carrier model, operation tables and classes of the bank modulo derivable equality.

    ``splitting`` may choose any member per class; by default the least one.
    """
    V = bank.variety
    base = dict(bank.rep)
    rep = base
    back: dict = {}
    if splitting is not None:
        rep = {t: splitting[base[t]] for t in base}
        # tables are read off bank terms, which are built over the original representatives
        back = {splitting[r]: r for r in splitting}
    classes: dict = {}
    for t, r in rep.items():
        classes.setdefault(r, []).append(t)
    classes = {r: tuple(sorted(ms, key=lambda u: u.sort_key)) for r, ms in classes.items()}
    points = sorted(classes, key=lambda t: t.sort_key)
    cl = bank.closure
    facts = []
    for r in V.theory.relations:
        for tup in product(points, repeat=r.arity):
            facts.extend(Fact(r.name, tup, g) for g in cl.gens(r.name, tup))
    carrier = Model.trusted(PreStructure(points, facts), V.theory)
    tables = {}
    total = True
    for name, op in V.ops.items():
        table = {}
        for key in iter_maps(op.arity, carrier, bank.guard):
            t = App(name, list(zip(op.arity.carrier, (back.get(k, k) for k in key))))
            if t in rep:
                table[key] = rep[t]
            else:
                total = False
        tables[name] = table
    return carrier, tables, classes, total


def _build(bank: JudgementBank, X: PreStructure, stabilized: bool, splitting=None) -> FreeAlgebraApprox:
    carrier, tables, classes, total = quotient(bank, splitting)
    rep = {t: r for r, ms in classes.items() for t in ms}
    A = SigmaAlgebra(bank.variety, carrier, tables, check=False)
    unit = Morphism(X, carrier, tuple(rep[Var(x)] for x in X.carrier))
    return FreeAlgebraApprox(bank, classes, rep, A, unit, stabilized, total)


def _same_quotient(a: FreeAlgebraApprox, b: FreeAlgebraApprox) -> bool:
    """Whether the deeper approximation ``b`` adds no class, edge or table entry to ``a``."""
    if len(a.classes) != len(b.classes) or not (a.total and b.total):
        return False
    m = {}
    for r in a.classes:
        if r not in b.splitting:
            return False
        m[r] = b.splitting[r]
    if len(set(m.values())) != len(m):
        return False
    fa = {Fact(f.symbol, tuple(m[x] for x in f.args), f.bound) for f in a.carrier.facts}
    if fa != set(b.carrier.facts):
        return False
    for name, table in a.algebra.tables.items():
        tb = b.algebra.tables[name]
        if len(table) != len(tb):
            return False
        for key, val in table.items():
            if tb.get(tuple(m[x] for x in key)) != m[val]:
                return False
    return True


_CACHE: dict = {}


def free_algebra(V, X: PreStructure, depth: int, *, guard=None) -> FreeAlgebraApprox:
    """``F X`` truncated at ``depth``; ``stabilized`` compares against ``depth + 1``."""
    key = (id(V), X, depth)
    hit = _CACHE.get(key)
    if hit is not None and hit.bank.variety is V:
        return hit
    X = as_model(V.theory, X)
    bank = saturate_judgements(V, X, depth, guard=guard)
    F = _build(bank, X, False)
    if bank.complete and F.total:
        F.stabilized = True
    else:
        deeper = _build(saturate_judgements(V, X, depth + 1, guard=guard), X, False)
        F.stabilized = _same_quotient(F, deeper)
    _CACHE[key] = F
    return F


def resplit(F: FreeAlgebraApprox, choice: dict) -> FreeAlgebraApprox:
    """The same quotient presented with other class representatives.

    ``choice`` maps current representatives to chosen members of their class.
    """
    return _build(F.bank, F.unit.source, F.stabilized, choice)


def clear_cache():
    _CACHE.clear()


# ---------------------------------------------------------------------------
# universal property


def _generator_map(f, X) -> dict:
    if isinstance(f, Morphism):
        return f.mapping
    return {x: f[x] for x in X.carrier}


def universal_extension(F: FreeAlgebraApprox, f, A: SigmaAlgebra) -> Morphism:
    """The homomorphism ``F X -> A`` extending ``f: X -> A`` along the unit."""
    if not F.stabilized:
        raise NotStabilized(f"free algebra did not stabilize at depth {F.depth}")
    X = F.unit.source
    e = _generator_map(f, X)
    memo: dict = {}
    images = []
    for r in F.carrier.carrier:
        v = evaluate(A, e, r, memo)
        if v is None:
            raise VarietyError(f"term {r} is undefined in the target algebra")
        images.append(v)
    return Morphism(F.carrier, A.carrier, tuple(images))


def all_homomorphisms(F: FreeAlgebraApprox, A: SigmaAlgebra, guard=None) -> list[Morphism]:
    """Every homomorphism ``F X -> A`` (by enumeration of carrier maps)."""
    out = []
    for imgs in iter_maps(F.carrier, A.carrier, guard):
        h = Morphism(F.carrier, A.carrier, imgs)
        if is_homomorphism(h, F.algebra, A):
            out.append(h)
    return out


# ---------------------------------------------------------------------------
# the monad in Kleisli form


def monad_unit(V, X: PreStructure, depth: int) -> Morphism:
    return free_algebra(V, X, depth).unit


def kleisli_extension(V, f: Morphism, depth: int) -> Morphism:
    """``f*: F X -> F Y`` for ``f: X -> |F Y|``; ``f.target`` must be ``F Y``'s carrier."""
    X = f.source
    FX = free_algebra(V, X, depth)
    FY = _owner(V, f.target, depth)
    return universal_extension(FX, f, FY.algebra)


def _owner(V, carrier: Model, depth: int) -> FreeAlgebraApprox:
    for (vid, _, d), F in _CACHE.items():
        if vid == id(V) and d == depth and F.carrier is carrier:
            return F
    raise VarietyError("target is not the carrier of a computed free algebra")


def free_functor(V, depth: int) -> Functor:
    """``X -> F X`` with ``h -> (η·h)*`` on morphisms."""

    def obj(X):
        return free_algebra(V, X, depth).carrier

    def mor(h: Morphism):
        FY = free_algebra(V, h.target, depth)
        return kleisli_extension(V, compose(FY.unit, h), depth)

    return Functor(obj, mor)


@dataclass
class MonadLawReport:
    objects: int
    unit_checks: int = 0
    left_checks: int = 0
    assoc_checks: int = 0
    violations: list = field(default_factory=list)
    enrichment: object = None

    @property
    def ok(self) -> bool:
        return not self.violations and (self.enrichment is None or self.enrichment.ok)


def check_monad_laws(V, objects, depth: int, *, guard=None, enrichment: bool = True) -> MonadLawReport:
    """Exhaustive check of the three Kleisli laws over the given objects."""
    objects = [as_model(V.theory, X) for X in objects]
    Fs = [free_algebra(V, X, depth, guard=guard) for X in objects]
    for X, F in zip(objects, Fs):
        if not F.stabilized:
            raise NotStabilized(f"free algebra over {X} did not stabilize at depth {depth}")
    rep = MonadLawReport(len(objects))
    for X, FX in zip(objects, Fs):
        ext = kleisli_extension(V, FX.unit, depth)
        rep.unit_checks += 1
        if ext.images != identity(FX.carrier).images:
            rep.violations.append(("unit", X))
    for (X, FX), (Y, FY) in product(list(zip(objects, Fs)), repeat=2):
        fs = morphisms(X, FY.carrier, guard)
        fstar = {}
        for f in fs:
            fe = kleisli_extension(V, f, depth)
            fstar[f.images] = fe
            rep.left_checks += 1
            if compose(fe, FX.unit).images != f.images:
                rep.violations.append(("left", X, Y, f))
        for Z, FZ in zip(objects, Fs):
            gs = morphisms(Y, FZ.carrier, guard)
            for g in gs:
                gstar = kleisli_extension(V, g, depth)
                for f in fs:
                    rep.assoc_checks += 1
                    lhs = compose(gstar, fstar[f.images])
                    rhs = kleisli_extension(V, compose(gstar, f), depth)
                    if lhs.images != rhs.images:
                        rep.violations.append(("assoc", X, Y, Z, f, g))
    if enrichment:
        rep.enrichment = check_enriched(free_functor(V, depth), objects, V.theory, guard)
    return rep


def is_free_model(F: FreeAlgebraApprox) -> bool:
    return is_model(F.bank.theory, F.carrier)
