"""Horn theories over relational signatures, with graded-index schemes.

An axiom ``premises => conclusion`` is written over named variables.  For a
graded family each atom carries an index expression:

* in a premise, either a constant or a single metavariable (which then
  ranges over every index the matched edge admits);
* in the conclusion, a capped sum of metavariables plus a constant.

Metavariables that occur only in the conclusion are *free*; they may be
constrained from below by side conditions ``f > e`` or ``f >= e``.  Because
conclusions are monotone in every metavariable, an instance only needs to be
fired at the generators of the premise up-sets and at the least feasible
values of free metavariables.  This is what keeps saturation finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import product

from ..domains import UNIT, Bound, DomainError, FiniteLattice, Grade, UnitInterval, covers


class TheoryError(ValueError):
    """A theory or axiom that cannot be loaded."""


@dataclass(frozen=True)
class Relation:
    """A signature entry: a plain relation or a graded family over ``domain``."""

    name: str
    arity: int
    domain: UnitInterval | FiniteLattice | None = None

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise TheoryError(f"relation {self.name}: arity must be at least 1")
        if self.name == "=":
            raise TheoryError("'=' is reserved for equality")


@dataclass(frozen=True)
class IndexExpr:
    """``metas[0] + metas[1] + ... + const`` (capped), or a lattice constant/meta."""

    metas: tuple[str, ...] = ()
    const: Fraction | Grade | None = None

    def __str__(self) -> str:
        parts = list(self.metas)
        if self.const is not None and (not parts or not isinstance(self.const, Fraction) or self.const != 0):
            parts.append(str(self.const) if not isinstance(self.const, Fraction) else _fmt(self.const))
        return "+".join(parts) if parts else "0"


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Atom:
    """``symbol[index](args)`` over variable names; symbol ``=`` for equality."""

    symbol: str
    args: tuple[str, ...]
    index: IndexExpr | None = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        if self.symbol == "=":
            return f"{self.args[0]} = {self.args[1]}"
        idx = "" if self.index is None else f"[{self.index}]"
        return f"{self.symbol}{idx}(" + ",".join(self.args) + ")"

    def rename(self, mapping: dict) -> "Atom":
        return Atom(self.symbol, tuple(mapping.get(a, a) for a in self.args), self.index)


@dataclass(frozen=True)
class SideCondition:
    """``left > right`` or ``left >= right`` where ``left`` is a free metavariable."""

    left: str
    op: str
    right: str | Fraction | Grade

    def __str__(self) -> str:
        r = self.right if isinstance(self.right, str) else (
            _fmt(self.right) if isinstance(self.right, Fraction) else str(self.right))
        return f"{self.left} {self.op} {r}"


@dataclass(frozen=True)
class HornAxiom:
    premises: tuple[Atom, ...]
    conclusion: Atom
    where: tuple[SideCondition, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "where", tuple(self.where))

    @cached_property
    def variables(self) -> tuple[str, ...]:
        seen: list[str] = []
        for atom in self.premises + (self.conclusion,):
            for v in atom.args:
                if v not in seen:
                    seen.append(v)
        return tuple(seen)

    @cached_property
    def bound_metas(self) -> tuple[str, ...]:
        return tuple(a.index.metas[0] for a in self.premises if a.index is not None and a.index.metas)

    @cached_property
    def free_metas(self) -> tuple[str, ...]:
        bound = set(self.bound_metas)
        idx = self.conclusion.index
        metas = () if idx is None else idx.metas
        return tuple(m for m in metas if m not in bound)

    def __str__(self) -> str:
        body = ", ".join(str(p) for p in self.premises)
        text = f"{body} => {self.conclusion}" if body else f"=> {self.conclusion}"
        if self.where:
            text += " where " + ", ".join(str(w) for w in self.where)
        return text


@dataclass(frozen=True)
class LimitRule:
    """A closure operator standing for an infinitary archimedean scheme.

    ``met-arch`` turns an open up-set ``(v, 1]`` into ``[v, 1]``; ``lattice-arch``
    adds the meet of the generators of an up-set.
    """

    name: str
    family: str

    def __post_init__(self):
        if self.name not in ("met-arch", "lattice-arch"):
            raise TheoryError(f"unknown limit rule {self.name}")

    def __str__(self) -> str:
        return f"{self.name}({self.family})"


@dataclass(frozen=True)
class HornTheory:
    relations: tuple[Relation, ...]
    axioms: tuple[HornAxiom, ...]
    limit_rules: tuple[LimitRule, ...] = ()
    eq_witness: tuple[Atom, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "limit_rules", tuple(self.limit_rules))
        if self.eq_witness is not None:
            object.__setattr__(self, "eq_witness", tuple(self.eq_witness))
        seen = set()
        for r in self.relations:
            if r.name in seen:
                raise TheoryError(f"relation {r.name} declared twice")
            seen.add(r.name)
        object.__setattr__(self, "_rel", {r.name: r for r in self.relations})
        object.__setattr__(self, "_cache", {})

    def __hash__(self):
        return hash((self.relations, self.axioms, self.limit_rules, self.eq_witness))

    # ------------------------------------------------------------------
    def relation(self, name: str) -> Relation:
        try:
            return self._rel[name]
        except KeyError:
            raise TheoryError(f"unknown relation symbol {name}") from None

    def has_relation(self, name: str) -> bool:
        return name in self._rel

    def domain_of(self, name: str):
        return None if name == "=" else self.relation(name).domain

    @property
    def signature(self) -> tuple:
        """Concrete symbols for plain relations; families are listed by declaration."""
        return self.relations

    def index_generator(self, name: str, index):
        dom = self.relation(name).domain
        if dom is None:
            if index is not None:
                raise TheoryError(f"relation {name} takes no index")
            return None
        if index is None:
            raise TheoryError(f"relation {name} needs an index")
        return dom.principal(index)

    def native_axioms(self) -> tuple[HornAxiom, ...]:
        """The axioms plus reflexivity, symmetry, transitivity and congruence of ``=``."""
        if "native" not in self._cache:
            eqs = [
                HornAxiom((), Atom("=", ("x", "x")), name="eq-refl"),
                HornAxiom((Atom("=", ("x", "y")),), Atom("=", ("y", "x")), name="eq-sym"),
                HornAxiom((Atom("=", ("x", "y")), Atom("=", ("y", "z"))), Atom("=", ("x", "z")), name="eq-trans"),
            ]
            for r in self.relations:
                for i in range(r.arity):
                    xs = tuple(f"v{j}" for j in range(r.arity))
                    ys = tuple("w" if j == i else xs[j] for j in range(r.arity))
                    idx = None if r.domain is None else IndexExpr(("e",), None)
                    eqs.append(HornAxiom(
                        (Atom("=", (xs[i], "w")), Atom(r.name, xs, idx)),
                        Atom(r.name, ys, idx),
                        name=f"eq-cong:{r.name}:{i}",
                    ))
            self._cache["native"] = tuple(self.axioms) + tuple(eqs)
        return self._cache["native"]

    def logic_axioms(self) -> tuple[HornAxiom, ...]:
        """Axioms with each equality conclusion replaced by the Eq-witness atoms."""
        if "logic" not in self._cache:
            out = []
            for ax in self.axioms:
                if ax.conclusion.symbol != "=":
                    out.append(ax)
                    continue
                if self.eq_witness is None:
                    raise TheoryError(f"axiom {ax.name or ax} concludes equality but the theory has no Eq witness")
                a, b = ax.conclusion.args
                for i, w in enumerate(self.eq_witness):
                    out.append(HornAxiom(ax.premises, w.rename({"x": a, "y": b}), ax.where,
                                         name=f"{ax.name or 'axiom'}/eq{i}"))
            self._cache["logic"] = tuple(out)
        return self._cache["logic"]

    def eq_atoms(self, a, b) -> list:
        """Eq witness instantiated at points/terms ``a``, ``b`` as (symbol, args, generator)."""
        if self.eq_witness is None:
            return []
        out = []
        for w in self.eq_witness:
            args = tuple(a if v == "x" else b for v in w.args)
            gen = None
            if w.index is not None:
                gen = self.relation(w.symbol).domain.principal(w.index.const)
            out.append((w.symbol, args, gen))
        return out

    def up_axiom(self, family: str) -> HornAxiom:
        """The axiom witnessing upward closure of a graded family."""
        for ax in self.axioms:
            if is_up_axiom(ax, self) and ax.conclusion.symbol == family:
                return ax
        raise TheoryError(f"family {family} has no upward-closure axiom")

    def limit_rule(self, family: str) -> LimitRule | None:
        for lr in self.limit_rules:
            if lr.family == family:
                return lr
        return None


def is_up_axiom(ax: HornAxiom, theory: HornTheory) -> bool:
    """``F[e](v) => F[e+f](v)`` (rational) or ``F[p](v) => F[q](v) where q >= p``."""
    if len(ax.premises) != 1:
        return False
    p, c = ax.premises[0], ax.conclusion
    if p.symbol != c.symbol or p.args != c.args or p.index is None or c.index is None:
        return False
    if len(set(p.args)) != len(p.args):
        return False
    if len(p.index.metas) != 1 or p.index.const is not None:
        return False
    e = p.index.metas[0]
    dom = theory.relation(p.symbol).domain
    if isinstance(dom, UnitInterval):
        if e not in c.index.metas or c.index.const not in (None, Fraction(0)):
            return False
        free = [m for m in c.index.metas if m != e]
        if len(free) != 1:
            return False
        return all(w.op == ">=" and w.right == Fraction(0) for w in ax.where if w.left == free[0])
    if len(c.index.metas) != 1 or c.index.const is not None:
        return False
    q = c.index.metas[0]
    return q != e and any(w.left == q and w.op == ">=" and w.right == e for w in ax.where) and all(
        w.left == q and w.right == e for w in ax.where)


# ---------------------------------------------------------------------------
# instance semantics shared by the engine and the proof checkers


def feasible(ax: HornAxiom, dom, meta: str, binding: dict) -> tuple:
    """Generators of the feasible values of free metavariable ``meta``."""
    current = (dom.bottom(),)
    for w in ax.where:
        if w.left != meta:
            continue
        if isinstance(w.right, str):
            base = binding[w.right]
        else:
            base = dom.principal(w.right)
        gens = dom.strict(base) if w.op == ">" else (base,)
        current = dom.intersect(current, gens)
        if not current:
            return ()
    return current


def conclusion_bound(ax: HornAxiom, dom, binding: dict):
    """Index generator of the conclusion given generators for all metavariables."""
    idx = ax.conclusion.index
    if idx is None:
        return None
    if isinstance(dom, UnitInterval):
        gens = [binding[m] for m in idx.metas]
        if idx.const is not None:
            gens.append(Bound(idx.const))
        if not gens:
            return Bound(Fraction(0))
        return dom.add(gens)
    if idx.metas:
        return binding[idx.metas[0]]
    return dom.principal(idx.const)


def free_choices(ax: HornAxiom, dom, binding: dict) -> list[dict]:
    """All canonical assignments of free metavariables (least feasible values)."""
    free = ax.free_metas
    if not free:
        return [{}]
    options = []
    for m in free:
        opts = feasible(ax, dom, m, binding)
        if not opts:
            return []
        options.append(opts)
    return [dict(zip(free, combo)) for combo in product(*options)]


def premise_generator(atom: Atom, dom):
    """The generator a premise must carry exactly when its index is constant."""
    if atom.index is None or atom.index.metas:
        return None
    return dom.principal(atom.index.const if atom.index.const is not None else Fraction(0))


def check_free_value(ax: HornAxiom, dom, meta: str, value, binding: dict) -> bool:
    """Whether a proof's choice for a free metavariable satisfies the side conditions."""
    return any(covers(g, value) for g in feasible(ax, dom, meta, binding))
