"""Proof objects for the relational logic and an independent checker.

A proof node records its context, its claim (``Rel`` or ``Def``), the rule
name, the rule's side data and its premises.  Premise order is canonical for
each rule, so the checker compares premise claims positionally.

Graded claims carry one index generator and stand for every index in its
up-set.  The structural ``Up`` node weakens such a claim to a smaller up-set;
it cites the family's upward-closure axiom.
"""

from __future__ import annotations

from .horn.ops import check_instance, check_limit, check_up
from .horn.theory import HornAxiom, LimitRule
from .domains import covers
from .structures import Fact
from .terms import App, Def, Rel, Term, Var, subterms, substitute

RULES = ("Var", "Ctx", "Mor", "E-Ar", "I-Ar", "RelAx", "Ax", "Up")


class Proof:
    __slots__ = ("context", "claim", "rule", "data", "premises")

    def __init__(self, context, claim, rule: str, data=None, premises=()):
        self.context = context
        self.claim = claim
        self.rule = rule
        self.data = dict(data or {})
        self.premises = tuple(premises)

    def nodes(self):
        """Distinct nodes (shared subproofs once), root first."""
        seen = set()
        stack = [self]
        while stack:
            p = stack.pop()
            if id(p) in seen:
                continue
            seen.add(id(p))
            yield p
            stack.extend(reversed(p.premises))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def depth(self) -> int:
        memo: dict = {}

        def rec(p):
            if id(p) not in memo:
                memo[id(p)] = 1 + max((rec(q) for q in p.premises), default=0)
            return memo[id(p)]

        return rec(self)

    def render(self) -> str:
        lines = []
        ids = {}
        order = list(self.nodes())
        for p in reversed(order):
            ids[id(p)] = len(ids)
        for p in reversed(order):
            prem = ", ".join(f"#{ids[id(q)]}" for q in p.premises)
            lines.append(f"#{ids[id(p)]} {p.claim}  [{p.rule}{': ' + prem if prem else ''}]")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Proof({self.claim} by {self.rule})"


def subst_dict(pairs) -> dict:
    return {k: v for k, v in pairs}


def _rel_triple(c):
    return (c.symbol, c.args, c.bound)


def _arity(V, name):
    return V.op(name).arity


def expected_ax_premises(ax, tau: dict) -> list:
    """Premise claims shared by (Ax) and (I-Ar)."""
    out = [Rel(f.symbol, tuple(tau[a] for a in f.args), f.bound) for f in ax.presentation]
    out += [Def(tau[y]) for y in ax.context.carrier]
    return out


def iar_conclusion(triple_subterm: App, edge: Fact, tau: dict) -> Rel:
    return Rel(edge.symbol, tuple(substitute(triple_subterm.arg(k), tau) for k in edge.args), edge.bound)


def node_error(p: Proof, V) -> str | None:
    """Check one rule instance (premise claims only, not their proofs)."""
    ctx = p.context
    c = p.claim
    prem = [q.claim for q in p.premises]
    for q in p.premises:
        if q.context is not ctx and q.context != ctx:
            return "premise over a different context"
    theory = V.theory
    r = p.rule
    if r == "Var":
        if prem or not isinstance(c, Def) or not isinstance(c.term, Var):
            return "Var concludes the definedness of a variable, without premises"
        if c.term.point not in ctx.carrier:
            return f"{c.term} is not a context point"
        return None
    if isinstance(c, Def):
        if r != "E-Ar":
            return f"{r} cannot conclude a definedness judgement"
        t = c.term
        if not isinstance(t, App):
            return "E-Ar concludes an operation term"
        ar = _arity(V, t.op)
        if t.keys != ar.carrier:
            return f"arguments of {t} do not match the arity"
        f = dict(t.args)
        want = [Rel(e.symbol, tuple(f[a] for a in e.args), e.bound) for e in sorted(ar.facts, key=Fact.sort_key)]
        want += [Def(f[i]) for i in ar.carrier]
        return None if prem == want else "E-Ar premises do not match the arity edges"
    if not isinstance(c, Rel):
        return "unknown claim"
    try:
        rel = theory.relation(c.symbol)
    except Exception:
        return f"unknown relation {c.symbol}"
    if len(c.args) != rel.arity or (rel.domain is None) != (c.bound is None):
        return f"malformed claim {c}"
    if r == "Ctx":
        e = p.data.get("edge")
        if prem or e is None:
            return "Ctx cites one context edge and has no premises"
        e = Fact(*e)
        if not ctx.covers(e.symbol, e.args, e.bound):
            return f"{e} is not an edge of the context"
        if c != Rel(e.symbol, tuple(Var(a) for a in e.args), e.bound):
            return "Ctx conclusion differs from the cited edge"
        return None
    if r == "Up":
        if len(prem) != 1 or not isinstance(prem[0], Rel):
            return "Up has one relational premise"
        return check_up(theory, p.data.get("axiom"), _rel_triple(prem[0]), _rel_triple(c))
    if r == "Mor":
        name = p.data.get("op")
        fams = p.data.get("families")
        if name not in V.ops or fams is None:
            return "Mor needs an operation and argument families"
        ar = _arity(V, name)
        if len(fams) != rel.arity or any(len(fi) != len(ar.carrier) for fi in fams):
            return "Mor families have the wrong shape"
        terms = tuple(App(name, list(zip(ar.carrier, fi))) for fi in fams)
        if c.args != terms:
            return "Mor conclusion is not the operation applied to the families"
        nj = len(ar.carrier)
        if len(prem) != nj + len(fams):
            return "Mor premise count"
        for j in range(nj):
            q = prem[j]
            if not isinstance(q, Rel) or q.symbol != c.symbol or q.args != tuple(fi[j] for fi in fams):
                return f"Mor premise {j} does not relate the j-th arguments"
            if not covers(q.bound, c.bound):
                return f"Mor premise {j} is weaker than the conclusion"
        if prem[nj:] != [Def(t) for t in terms]:
            return "Mor definedness premises"
        return None
    if r in ("Ax", "I-Ar"):
        ax = p.data.get("axiom")
        if ax not in V.axioms:
            return "cited axiom is not an axiom of the variety"
        tau = subst_dict(p.data.get("subst", ()))
        if set(tau) != set(ax.context.carrier) or not all(isinstance(v, Term) for v in tau.values()):
            return "substitution is not total on the axiom context"
        if prem != expected_ax_premises(ax, tau):
            return f"{r} premises do not instantiate the axiom context"
        if r == "Ax":
            if c != ax.relation.substitute(tau):
                return "Ax conclusion is not the substituted axiom"
            return None
        s = p.data.get("subterm")
        e = p.data.get("edge")
        if not isinstance(s, App) or not any(s in subterms(t) for t in ax.relation.args):
            return "I-Ar subterm does not occur in the axiom"
        e = Fact(*e) if e is not None else None
        if e is None or not _arity(V, s.op).covers(e.symbol, e.args, e.bound):
            return "I-Ar edge is not an edge of the arity"
        if c != iar_conclusion(s, e, tau):
            return "I-Ar conclusion is not the instantiated arity edge"
        return None
    if r == "RelAx":
        ax = p.data.get("axiom")
        tau = subst_dict(p.data.get("subst", ()))
        rels = [q for q in prem if isinstance(q, Rel)]
        nrel = len(rels)
        if prem[:nrel] != rels:
            return "RelAx relational premises come first"
        defs = prem[nrel:]
        if defs != [Def(t) for t in c.args]:
            return "RelAx definedness premises must cover the conclusion terms"
        if isinstance(ax, LimitRule):
            return check_limit(ax, theory, [_rel_triple(q) for q in rels], _rel_triple(c))
        if not isinstance(ax, HornAxiom) or ax not in theory.logic_axioms():
            return "cited Horn axiom is not part of the theory"
        if not all(isinstance(v, Term) for v in tau.values()):
            return "substitution values must be terms"
        return check_instance(ax, theory, tau, subst_dict(p.data.get("metas", ())),
                              [_rel_triple(q) for q in rels], _rel_triple(c))
    return f"unknown rule {r}"


def proof_error(p: Proof, V) -> str | None:
    """First invalid node of a proof, as a message; None if the proof checks."""
    if not isinstance(p, Proof):
        return "not a proof"
    for node in p.nodes():
        if node.rule not in RULES:
            return f"unknown rule {node.rule}"
        try:
            err = node_error(node, V)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            err = f"malformed side data ({exc.__class__.__name__}: {exc})"
        if err:
            return f"{node.rule} node for {node.claim}: {err}"
    return None


def check_proof(p: Proof, V) -> bool:
    return proof_error(p, V) is None
