"""Randomized derive queries and single-node proof corruptions.

Each mutation is chosen so that the corrupted node itself is locally invalid:
a relation symbol outside the signature, a missing premise, a context edge
that the context does not have, an index strictly stronger than anything the
node's rule can justify, or a variable that is not a context point.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import library
from .domains import Bound, FiniteLattice
from .logic import derive, saturate_judgements
from .proofs import Proof, proof_error
from .structures import Fact
from .terms import Def, Rel, Var

MUTATIONS = ("bogus-symbol", "drop-premise", "forge-edge", "strengthen", "foreign-variable")
BOGUS = "bogus_rel"


@dataclass
class Fixture:
    name: str
    variety: object
    context: object
    depth: int


def default_fixtures() -> list[Fixture]:
    sl = library.semilattice()
    mj = library.met_join()
    mu = library.met_free_unary()
    half = Fraction(1, 2)
    return [
        Fixture("semilattice/discrete2", sl, library.pos_model(["x", "y"]), 3),
        Fixture("semilattice/chain2", sl, library.pos_model(["x", "y"], [("x", "y")]), 3),
        Fixture("semilattice/point", sl, library.pos_model(["x"]), 3),
        Fixture("met-join/pair", mj, library.met_space(["x", "y"], {("x", "y"): half}), 3),
        Fixture("met-join/far", mj, library.met_space(["x", "y"], {("x", "y"): Fraction(3, 4)}), 3),
        Fixture("met-unary/pair", mu, library.met_space(["x", "y"], {("x", "y"): Fraction(1, 4)}), 2),
    ]


def _stronger(b):
    """A generator strictly stronger than ``b``, or None."""
    if isinstance(b, Bound):
        if not b.closed:
            return Bound(b.value, True)
        if b.value > 0:
            return Bound(b.value / 2, True)
        return None
    if b is not None and isinstance(b.lattice, FiniteLattice):
        below = [e for e in b.lattice.elements if e != b.element and b.lattice.leq(e, b.element)]
        return b.lattice.principal(below[0]) if below else None
    return None


def _strongest_over(p: Proof):
    """A generator strictly stronger than the claim and every same-symbol premise."""
    c = p.claim
    cands = [c.bound] + [q.claim.bound for q in p.premises
                         if isinstance(q.claim, Rel) and q.claim.symbol == c.symbol]
    if not all(isinstance(b, Bound) for b in cands):
        if len(cands) == 1:
            return _stronger(c.bound)
        return None
    low = min(cands, key=lambda b: (b.value, not b.closed))
    s = _stronger(low)
    if s is None or any(not s.covers(b) or s == b for b in cands):
        return None
    return s


def applicable(p: Proof) -> list[str]:
    out = []
    if isinstance(p.claim, Rel):
        out.append("bogus-symbol")
        if p.claim.bound is not None and _strongest_over(p) is not None:
            out.append("strengthen")
    if p.premises:
        out.append("drop-premise")
    if p.rule == "Ctx":
        out.append("forge-edge")
    if p.rule == "Var":
        out.append("foreign-variable")
    return out


def _fresh(ctx) -> str:
    fresh = "forged_point"
    while fresh in ctx.carrier:
        fresh += "_"
    return fresh


def corrupt_node(p: Proof, kind: str) -> Proof:
    c = p.claim
    if kind == "bogus-symbol":
        return Proof(p.context, Rel(BOGUS, c.args, c.bound), p.rule, p.data, p.premises)
    if kind == "drop-premise":
        return Proof(p.context, c, p.rule, p.data, p.premises[:-1])
    if kind == "forge-edge":
        e = Fact(*p.data["edge"])
        args = (_fresh(p.context),) + tuple(e.args[1:])
        return Proof(p.context, Rel(c.symbol, tuple(Var(a) for a in args), c.bound), "Ctx",
                     {"edge": Fact(e.symbol, args, e.bound)})
    if kind == "strengthen":
        return Proof(p.context, Rel(c.symbol, c.args, _strongest_over(p)), p.rule, p.data, p.premises)
    if kind == "foreign-variable":
        return Proof(p.context, Def(Var(_fresh(p.context))), "Var")
    raise ValueError(f"unknown mutation {kind}")


def replace_node(root: Proof, target: Proof, new: Proof) -> Proof:
    """Copy of ``root`` with every occurrence of ``target`` replaced by ``new``."""
    memo: dict = {id(target): new}
    order = list(root.nodes())
    for q in reversed(order):
        if id(q) in memo:
            continue
        prem = tuple(memo.get(id(s), s) for s in q.premises)
        if any(a is not b for a, b in zip(prem, q.premises)):
            memo[id(q)] = Proof(q.context, q.claim, q.rule, q.data, prem)
        else:
            memo[id(q)] = q
    return memo[id(root)]


def mutate(p: Proof, rng: random.Random) -> tuple[Proof, str, Proof]:
    """Corrupt one randomly chosen node; returns (mutant, kind, original node)."""
    nodes = [q for q in p.nodes() if applicable(q)]
    node = rng.choice(nodes)
    kind = rng.choice(applicable(node))
    return replace_node(p, node, corrupt_node(node, kind)), kind, node


def random_goal(bank, rng: random.Random):
    """A derivable judgement half of the time, otherwise a random candidate."""
    if rng.random() < 0.5:
        js = bank.judgements()
        return rng.choice(js)
    terms = bank.terms()
    th = bank.theory
    if rng.random() < 0.25:
        return Def(rng.choice(terms))
    rel = rng.choice(th.relations)
    args = tuple(rng.choice(terms) for _ in range(rel.arity))
    bound = None
    if rel.domain is not None:
        if isinstance(rel.domain, FiniteLattice):
            bound = rel.domain.principal(rng.choice(rel.domain.elements))
        else:
            bound = Bound(Fraction(rng.randint(0, 8), 8))
    return Rel(rel.name, args, bound)


@dataclass
class FuzzReport:
    queries: int = 0
    proofs: int = 0
    valid: int = 0
    mutants: int = 0
    rejected: int = 0
    kinds: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.valid == self.proofs and self.rejected == self.mutants and not self.failures


def fuzz(count: int, seed: int = 0, fixtures=None, *, guard=None) -> FuzzReport:
    rng = random.Random(seed)
    fixtures = fixtures or default_fixtures()
    banks = [saturate_judgements(f.variety, f.context, f.depth, guard=guard) for f in fixtures]
    rep = FuzzReport()
    for _ in range(count):
        i = rng.randrange(len(fixtures))
        fx, bank = fixtures[i], banks[i]
        goal = random_goal(bank, rng)
        rep.queries += 1
        p = derive(fx.variety, fx.context, goal, fx.depth, guard=guard)
        if p is None:
            continue
        rep.proofs += 1
        err = proof_error(p, fx.variety)
        if err is None:
            rep.valid += 1
        else:
            rep.failures.append((fx.name, str(goal), err))
            continue
        m, kind, _ = mutate(p, rng)
        rep.mutants += 1
        rep.kinds[kind] = rep.kinds.get(kind, 0) + 1
        if proof_error(m, fx.variety) is not None:
            rep.rejected += 1
        else:
            rep.failures.append((fx.name, str(goal), f"mutation {kind} accepted"))
    return rep
