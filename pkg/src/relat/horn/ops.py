"""Entailment, saturation, reflection and the built-in theories."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from ..domains import UNIT, Bound, FiniteLattice, UnitInterval, covers, format_rational
from ..structures import Fact, Model, PreStructure, StructureError, point_key, show_point
from .closure import _MISSING, Closure, Reason
from .theory import (
    Atom,
    HornAxiom,
    HornTheory,
    IndexExpr,
    LimitRule,
    Relation,
    SideCondition,
    TheoryError,
    check_free_value,
    conclusion_bound,
    is_up_axiom,
)


class FuelExhausted(RuntimeError):
    """Saturation hit its round bound before reaching a fixpoint."""


# ---------------------------------------------------------------------------
# derivations


@dataclass(frozen=True, eq=False)
class Derivation:
    """A tree of axiom instances ending in ``conclusion``.

    ``rule`` is ``hyp`` (an input edge), ``axiom`` (a Horn axiom instance),
    ``limit`` (a limit-rule firing) or ``up`` (weakening a graded edge to a
    larger index, justified by the family's upward-closure axiom).
    """

    conclusion: Fact
    rule: str
    axiom: object = None
    valuation: tuple = ()
    metas: tuple = ()
    premises: tuple = ()

    def nodes(self):
        seen = set()
        stack = [self]
        while stack:
            d = stack.pop()
            if id(d) in seen:
                continue
            seen.add(id(d))
            yield d
            stack.extend(d.premises)

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def render(self, indent: int = 0) -> str:
        head = "  " * indent + f"{self.conclusion}  [{self.rule}"
        if self.axiom is not None:
            head += f" {getattr(self.axiom, 'name', '') or self.axiom}"
        head += "]"
        return "\n".join([head] + [p.render(indent + 1) for p in self.premises])


def extract(closure: Closure, key: tuple, required=None, memo=None, up=None) -> Derivation:
    """Read a derivation of ``key`` (weakened to ``required``) out of the reasons."""
    if memo is None:
        memo = {}
    sym, args, gen = key
    node = memo.get(key)
    if node is None:
        stack = [(key, False)]
        while stack:
            k, ready = stack.pop()
            if k in memo:
                continue
            reason = closure.reasons[k]
            if not ready:
                stack.append((k, True))
                for src, _ in reason.premises:
                    if src not in memo:
                        stack.append((src, False))
                continue
            prem = tuple(_weaken(closure, memo[src], req) for src, req in reason.premises)
            memo[k] = Derivation(Fact(*k), reason.rule, reason.axiom, reason.binding, reason.metas, prem)
        node = memo[key]
    return _weaken(closure, node, gen if required is None else required)


def _weaken(closure: Closure, d: Derivation, required) -> Derivation:
    c = d.conclusion
    if required is None or c.bound == required:
        return d
    ax = closure.theory.up_axiom(c.symbol)
    return Derivation(Fact(c.symbol, c.args, required), "up", ax, (), (), (d,))


def check_instance(ax: HornAxiom, theory: HornTheory, valuation: dict, metas: dict,
                   premises: list, conclusion: tuple) -> str | None:
    """Validate one axiom instance; returns an error message or None.

    ``premises`` and ``conclusion`` are ``(symbol, args, generator)`` triples
    over whatever points the valuation maps into.
    """
    if len(premises) != len(ax.premises):
        return f"axiom {ax.name or ax} expects {len(ax.premises)} premises, got {len(premises)}"
    for v in ax.variables:
        if v not in valuation:
            return f"valuation misses variable {v}"
    bound_metas = set(ax.bound_metas)
    for atom, (sym, args, gen) in zip(ax.premises, premises):
        if sym != atom.symbol or tuple(args) != tuple(valuation[v] for v in atom.args):
            return f"premise {sym} does not instantiate {atom}"
        if atom.index is None:
            if gen is not None:
                return f"premise {atom} carries an index"
        elif atom.index.metas:
            m = atom.index.metas[0]
            if metas.get(m) != gen:
                return f"premise {atom} index does not match metavariable {m}"
        else:
            dom = theory.domain_of(atom.symbol)
            if gen != dom.principal(atom.index.const):
                return f"premise {atom} index is not the constant"
    dom = theory.domain_of(ax.conclusion.symbol)
    for m in ax.free_metas:
        if m not in metas:
            return f"missing value for metavariable {m}"
        if not check_free_value(ax, dom, m, metas[m], metas):
            return f"metavariable {m} violates its side condition"
    for m in bound_metas:
        if m not in metas:
            return f"missing value for metavariable {m}"
    want = (ax.conclusion.symbol, tuple(valuation[v] for v in ax.conclusion.args),
            conclusion_bound(ax, dom, metas) if dom is not None else None)
    sym, args, gen = conclusion
    if (sym, tuple(args)) != want[:2] or gen != want[2]:
        return f"conclusion {sym}{tuple(args)} is not the instance of {ax.name or ax}"
    return None


def check_limit(rule, theory: HornTheory, premises: list, conclusion: tuple) -> str | None:
    if rule not in theory.limit_rules:
        return f"limit rule {rule} is not part of the theory"
    sym, args, gen = conclusion
    if sym != rule.family:
        return "limit rule applied to the wrong family"
    if not premises or any(p[0] != sym or tuple(p[1]) != tuple(args) for p in premises):
        return "limit premises must share symbol and arguments with the conclusion"
    gens = tuple(p[2] for p in premises)
    dom = theory.domain_of(sym)
    if rule.name == "met-arch":
        if len(gens) != 1 or gens[0].closed:
            return "met-arch needs one open up-set"
    elif len(gens) < 2 or len(set(gens)) != len(gens):
        return "lattice-arch needs at least two distinct generators"
    if dom.limit(gens) != gen:
        return "limit conclusion is not the closure of its premises"
    return None


def check_up(theory: HornTheory, ax, premise: tuple, conclusion: tuple) -> str | None:
    sym, args, gen = conclusion
    try:
        want = theory.up_axiom(sym)
    except TheoryError as exc:
        return str(exc)
    if ax != want:
        return "upward step does not cite the family's upward-closure axiom"
    if premise[0] != sym or tuple(premise[1]) != tuple(args):
        return "upward step changes symbol or arguments"
    if gen is None or not covers(premise[2], gen):
        return "upward step does not weaken the index"
    return None


def check_derivation(d: Derivation, theory: HornTheory, base=None, *, equality: str = "native") -> bool:
    return derivation_error(d, theory, base, equality=equality) is None


def derivation_error(d: Derivation, theory: HornTheory, base=None, *, equality: str = "native") -> str | None:
    """Replay every step of a derivation; returns the first problem found."""
    axioms = set(theory.native_axioms() if equality == "native" else theory.logic_axioms())
    base_pre = None
    if base is not None:
        base_pre = PreStructure({a for f in base for a in Fact(*f).args}, [Fact(*f) for f in base])
    for node in d.nodes():
        c = node.conclusion
        prem = [p.conclusion for p in node.premises]
        if node.rule == "hyp":
            if node.premises:
                return "hypothesis with premises"
            if base_pre is not None and not base_pre.covers(c.symbol, c.args, c.bound):
                return f"{c} is not an input edge"
            continue
        if node.rule == "up":
            if len(prem) != 1:
                return "upward step needs one premise"
            err = check_up(theory, node.axiom, prem[0], c)
        elif node.rule == "limit":
            err = check_limit(node.axiom, theory, prem, c)
        elif node.rule == "axiom":
            if node.axiom not in axioms:
                return f"axiom {node.axiom} is not part of the theory"
            err = check_instance(node.axiom, theory, dict(node.valuation), dict(node.metas), prem, c)
        else:
            err = f"unknown rule {node.rule}"
        if err:
            return f"at {c}: {err}"
    return None


# ---------------------------------------------------------------------------
# entailment and saturation


def _goal_fact(goal) -> Fact:
    if hasattr(goal, "fact"):
        return goal.fact()
    return Fact(*goal)


def _workspace(theory: HornTheory, carrier, facts) -> Closure:
    cl = Closure(theory, sorted(set(carrier), key=point_key))
    for f in facts:
        f = _goal_fact(f)
        cl.add_fact(f.symbol, f.args, f.bound, Reason("hyp"))
    return cl


def entails(theory: HornTheory, base, goal, fuel: int | None = None, carrier=None) -> Derivation | None:
    """Decide whether ``base`` entails ``goal``; ``fuel`` bounds saturation rounds.

    ``goal`` is an ``Edge`` or a ``Fact`` (symbol ``=`` for equalities).  Returns a
    derivation, ``None`` when the fixpoint is reached without the goal, and
    raises ``FuelExhausted`` when the bound is hit first.
    """
    base = [_goal_fact(f) for f in base]
    goal = _goal_fact(goal)
    pts = set(carrier or ())
    for f in base + [goal]:
        pts.update(f.args)
    cl = _workspace(theory, pts, base)
    rounds = 0
    while True:
        w = cl.witness(goal.symbol, goal.args, goal.bound)
        if w is not _MISSING:
            return extract(cl, (goal.symbol, goal.args, w), goal.bound)
        if not cl.pending():
            return None
        if fuel is not None and rounds >= fuel:
            raise FuelExhausted(f"no fixpoint after {fuel} rounds")
        cl.step()
        rounds += 1


def saturation_closure(theory: HornTheory, pre: PreStructure) -> Closure:
    cl = _workspace(theory, pre.carrier, pre.facts)
    cl.run()
    return cl


def saturate(theory: HornTheory, pre: PreStructure) -> frozenset:
    """All derivable edges, plus equalities ``x = y`` with ``x != y``."""
    cl = saturation_closure(theory, pre)
    return frozenset(f for f in cl.facts() if not (f.symbol == "=" and f.args[0] == f.args[1]))


def _classes(carrier, facts) -> dict:
    parent = {p: p for p in carrier}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for f in facts:
        if f.symbol == "=":
            a, b = find(f.args[0]), find(f.args[1])
            if a != b:
                parent[a] = b
    groups: dict = {}
    for p in carrier:
        groups.setdefault(find(p), []).append(p)
    q = {}
    for members in groups.values():
        rep = min(members, key=point_key)
        for m in members:
            q[m] = rep
    return q


def reflect(theory: HornTheory, pre: PreStructure) -> tuple[Model, dict]:
    """The reflection ``R X`` and the quotient map onto its carrier."""
    sat = saturate(theory, pre)
    q = _classes(pre.carrier, sat)
    facts = [Fact(f.symbol, tuple(q[a] for a in f.args), f.bound) for f in sat if f.symbol != "="]
    model = Model.trusted(PreStructure(set(q.values()), facts), theory)
    return model, q


def is_model(theory: HornTheory, pre: PreStructure) -> bool:
    for f in saturate(theory, pre):
        if f.symbol == "=":
            return False
        if not pre.covers(f.symbol, f.args, f.bound):
            return False
    return True


def as_model(theory: HornTheory, pre: PreStructure) -> Model:
    if isinstance(pre, Model) and pre.theory == theory:
        return pre
    if not is_model(theory, pre):
        raise StructureError(f"{pre} is not a model of {theory.name or 'the theory'}")
    return Model.trusted(pre, theory)


def model(theory: HornTheory, carrier, facts=()) -> Model:
    """Saturate-and-check convenience: build a pre-structure and insist it is a model."""
    return as_model(theory, PreStructure(carrier, facts))


def close(theory: HornTheory, carrier, facts=()) -> Model:
    """The reflection of a pre-structure, asserting no points were identified."""
    m, q = reflect(theory, PreStructure(carrier, facts))
    if len(m.carrier) != len(set(carrier)):
        raise StructureError("reflection identified points")
    return m


# ---------------------------------------------------------------------------
# metrics


def metric_to_structure(points, matrix, family: str = "eq") -> PreStructure:
    pts = list(points)
    n = len(pts)
    if len(set(pts)) != n or len(matrix) != n or any(len(row) != n for row in matrix):
        raise StructureError("distance matrix does not match the points")
    d = [[Fraction(v) for v in row] for row in matrix]
    for i in range(n):
        if d[i][i] != 0:
            raise StructureError(f"nonzero self-distance at {show_point(pts[i])}")
        for j in range(n):
            if d[i][j] < 0 or d[i][j] > 1:
                raise StructureError(f"distance {d[i][j]} outside [0,1]")
            if d[i][j] != d[j][i]:
                raise StructureError(f"asymmetric distance between {show_point(pts[i])} and {show_point(pts[j])}")
            if i != j and d[i][j] == 0:
                raise StructureError(f"distinct points {show_point(pts[i])}, {show_point(pts[j])} at distance 0")
    for i, j, k in product(range(n), repeat=3):
        if d[i][k] > d[i][j] + d[j][k]:
            raise StructureError(
                "triangle inequality fails on "
                f"({show_point(pts[i])}, {show_point(pts[j])}, {show_point(pts[k])})"
            )
    facts = [Fact(family, (pts[i], pts[j]), Bound(d[i][j])) for i in range(n) for j in range(n)]
    return PreStructure(pts, facts)


def structure_to_metric(m: PreStructure, family: str = "eq") -> tuple[tuple, list[list[Fraction]]]:
    """Points and distance matrix; pairs with no edge are at distance 1."""
    pts = m.carrier
    out = []
    for a in pts:
        row = []
        for b in pts:
            gens = m.gens(family, (a, b))
            row.append(min((g.value for g in gens), default=Fraction(1)))
        out.append(row)
    return pts, out


def capped_shortest_paths(n: int, weights: dict) -> list[list[Fraction | None]]:
    """Floyd-Warshall with ``min(a + b, 1)`` on exact rationals (``None`` = no path)."""
    d = [[None] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = Fraction(0)
    for (i, j), w in weights.items():
        for a, b in ((i, j), (j, i)):
            if d[a][b] is None or w < d[a][b]:
                d[a][b] = Fraction(w)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] is not None and d[k][j] is not None:
                    s = min(d[i][k] + d[k][j], Fraction(1))
                    if d[i][j] is None or s < d[i][j]:
                        d[i][j] = s
    return d


# ---------------------------------------------------------------------------
# built-in theories


def _a(sym, *args, idx=None):
    return Atom(sym, tuple(args), idx)


def _m(*metas, const=None):
    return IndexExpr(tuple(metas), const)


def _same_axioms(rels) -> list[HornAxiom]:
    """A fresh equality predicate ``same`` with explicit closure axioms."""
    axs = [
        HornAxiom((), _a("same", "x", "x"), name="same-refl"),
        HornAxiom((_a("same", "x", "y"),), _a("=", "x", "y"), name="same-equal"),
    ]
    for r in list(rels) + [Relation("same", 2)]:
        xs = tuple(f"x{i}" for i in range(r.arity))
        ys = tuple(f"y{i}" for i in range(r.arity))
        idx = None if r.domain is None else _m("p")
        prem = tuple(_a("same", x, y) for x, y in zip(xs, ys)) + (Atom(r.name, xs, idx),)
        axs.append(HornAxiom(prem, Atom(r.name, ys, idx), name=f"same-closed:{r.name}"))
    return axs


def builtin_theory(name: str, table=None) -> HornTheory:
    """``set``, ``pos``, ``met``, ``lvalued`` (with a lattice) or ``partial`` (with an arity table)."""
    if name == "set":
        return HornTheory((), (), (), None, name="set")
    if name == "pos":
        rels = (Relation("le", 2),)
        axs = (
            HornAxiom((), _a("le", "x", "x"), name="refl"),
            HornAxiom((_a("le", "x", "y"), _a("le", "y", "z")), _a("le", "x", "z"), name="trans"),
            HornAxiom((_a("le", "x", "y"), _a("le", "y", "x")), _a("=", "x", "y"), name="antisym"),
        )
        th = HornTheory(rels, axs, (), (_a("le", "x", "y"), _a("le", "y", "x")), name="pos")
    elif name == "met":
        z = Fraction(0)
        rels = (Relation("eq", 2, UNIT),)
        axs = (
            HornAxiom((), _a("eq", "x", "x", idx=_m(const=z)), name="Refl"),
            HornAxiom((_a("eq", "x", "y", idx=_m(const=z)),), _a("=", "x", "y"), name="Equal"),
            HornAxiom((_a("eq", "x", "y", idx=_m("e")),), _a("eq", "y", "x", idx=_m("e")), name="Sym"),
            HornAxiom(
                (_a("eq", "x", "y", idx=_m("e")), _a("eq", "y", "z", idx=_m("f"))),
                _a("eq", "x", "z", idx=_m("e", "f")),
                name="Triang",
            ),
            HornAxiom((_a("eq", "x", "y", idx=_m("e")),), _a("eq", "x", "y", idx=_m("e", "f")), name="Up"),
        )
        th = HornTheory(rels, axs, (LimitRule("met-arch", "eq"),),
                        (_a("eq", "x", "y", idx=_m(const=z)),), name="met")
    elif name == "lvalued":
        if not isinstance(table, FiniteLattice):
            raise TheoryError("lvalued needs a FiniteLattice table")
        rels = (Relation("alpha", 2, table),)
        axs = [
            HornAxiom((_a("alpha", "x", "y", idx=_m("p")),), _a("alpha", "x", "y", idx=_m("q")),
                      (SideCondition("q", ">=", "p"),), name="Up"),
        ]
        axs += _same_axioms(rels)
        rels = rels + (Relation("same", 2),)
        th = HornTheory(rels, tuple(axs), (LimitRule("lattice-arch", "alpha"),),
                        (_a("same", "x", "y"),), name=f"lvalued({table.name})")
    elif name == "partial":
        ops = dict(table or {})
        if not ops:
            raise TheoryError("partial needs a nonempty operation table")
        rels = []
        axs = []
        for f in sorted(ops):
            n = ops[f]
            if not isinstance(n, int) or n < 0:
                raise TheoryError(f"operation {f}: arity must be a natural number")
            rel = Relation(f"alpha_{f}", n + 1)
            rels.append(rel)
            xs = tuple(f"x{i}" for i in range(n))
            axs.append(HornAxiom((Atom(rel.name, xs + ("y",)), Atom(rel.name, xs + ("z",))),
                                 _a("=", "y", "z"), name=f"functional:{f}"))
        axs += _same_axioms(rels)
        rels.append(Relation("same", 2))
        th = HornTheory(tuple(rels), tuple(axs), (), (_a("same", "x", "y"),), name="partial")
    else:
        raise TheoryError(f"unknown builtin theory {name!r}")
    validate_theory(th)
    return th


# ---------------------------------------------------------------------------
# load-time validation


def validate_theory(th: HornTheory) -> HornTheory:
    """Reject axioms the canonical engine cannot handle and check the Eq witness."""
    if th.relations and th.eq_witness is None:
        raise TheoryError("a theory with relations needs an Eq witness")
    for ax in th.axioms:
        _validate_axiom(th, ax)
    for lr in th.limit_rules:
        dom = th.relation(lr.family).domain if th.has_relation(lr.family) else None
        want = UnitInterval if lr.name == "met-arch" else FiniteLattice
        if not isinstance(dom, want):
            raise TheoryError(f"limit rule {lr.name} does not fit family {lr.family}")
    for r in th.relations:
        if r.domain is not None:
            th.up_axiom(r.name)
    if th.eq_witness is not None:
        for w in th.eq_witness:
            if w.symbol == "=" or set(w.args) - {"x", "y"}:
                raise TheoryError("Eq witness atoms must be relations in x and y")
            rel = th.relation(w.symbol)
            if len(w.args) != rel.arity:
                raise TheoryError(f"Eq witness atom {w} has the wrong arity")
            if (rel.domain is None) != (w.index is None) or (w.index is not None and w.index.metas):
                raise TheoryError(f"Eq witness atom {w} needs a constant index")
        _check_eq_coherence(th)
    return th


def _validate_axiom(th: HornTheory, ax: HornAxiom):
    label = ax.name or str(ax)
    meta_dom: dict = {}
    seen_prem_metas: set = set()

    def atom_ok(atom: Atom, premise: bool):
        if atom.symbol == "=":
            if premise:
                raise TheoryError(f"{label}: equality may only appear as a conclusion")
            if len(atom.args) != 2 or atom.index is not None:
                raise TheoryError(f"{label}: malformed equality")
            return
        rel = th.relation(atom.symbol)
        if len(atom.args) != rel.arity:
            raise TheoryError(f"{label}: {atom.symbol} has arity {rel.arity}")
        if (rel.domain is None) != (atom.index is None):
            raise TheoryError(f"{label}: index use on {atom.symbol} does not match its declaration")
        if atom.index is None:
            return
        idx = atom.index
        for m in idx.metas:
            if meta_dom.setdefault(m, rel.domain) is not rel.domain and meta_dom[m] != rel.domain:
                raise TheoryError(f"{label}: metavariable {m} used in two domains")
        if idx.const is not None:
            rel.domain.principal(idx.const)
        if premise:
            if len(idx.metas) > 1 or (idx.metas and idx.const not in (None, Fraction(0))):
                raise TheoryError(f"{label}: premise index must be a constant or one metavariable")
            for m in idx.metas:
                if m in seen_prem_metas:
                    raise TheoryError(f"{label}: metavariable {m} bound by two premises")
                seen_prem_metas.add(m)
        elif isinstance(rel.domain, FiniteLattice):
            if len(idx.metas) + (idx.const is not None) != 1:
                raise TheoryError(f"{label}: lattice index must be one metavariable or constant")

    for p in ax.premises:
        atom_ok(p, True)
    atom_ok(ax.conclusion, False)
    free = set(ax.free_metas)
    for w in ax.where:
        if w.left not in free:
            raise TheoryError(f"{label}: side condition on {w.left} cannot be canonicalized")
        if w.op not in (">", ">="):
            raise TheoryError(f"{label}: only lower-bound side conditions are supported")
        if isinstance(w.right, str) and w.right not in seen_prem_metas:
            raise TheoryError(f"{label}: side condition refers to unbound {w.right}")


def _check_eq_coherence(th: HornTheory):
    eq_xy = [Fact(s, a, g) for s, a, g in th.eq_atoms("x", "y")]
    if entails(th, eq_xy, Fact("=", ("x", "y")), carrier=("x", "y")) is None:
        raise TheoryError("Eq witness does not entail equality")
    for s, a, g in th.eq_atoms("x", "x"):
        if entails(th, [], Fact(s, a, g), carrier=("x",)) is None:
            raise TheoryError(f"Eq witness atom {s} is not reflexive")
    # closure of every relation under Eq, using only the theory's own axioms
    for r in th.relations:
        xs = tuple(f"x{i}" for i in range(r.arity))
        ys = tuple(f"y{i}" for i in range(r.arity))
        if r.domain is None:
            samples = [None]
        elif isinstance(r.domain, UnitInterval):
            samples = [Bound(0), Bound(Fraction(1, 2)), Bound(Fraction(1, 2), False), Bound(1)]
        else:
            samples = [r.domain.principal(e) for e in r.domain.elements]
        for g in samples:
            base = [Fact(s, a, b) for x, y in zip(xs, ys) for s, a, b in th.eq_atoms(x, y)]
            base.append(Fact(r.name, xs, g))
            cl = Closure(th, xs + ys, equality="eq")
            for f in base:
                cl.add_fact(f.symbol, f.args, f.bound, Reason("hyp"))
            cl.run()
            if not cl.holds(r.name, ys, g):
                raise TheoryError(f"relation {r.name} is not closed under the Eq witness")


def show_fact(f: Fact) -> str:
    return str(f)


__all__ = [
    "Derivation",
    "FuelExhausted",
    "builtin_theory",
    "capped_shortest_paths",
    "check_derivation",
    "derivation_error",
    "entails",
    "is_model",
    "metric_to_structure",
    "reflect",
    "saturate",
    "structure_to_metric",
    "validate_theory",
]
