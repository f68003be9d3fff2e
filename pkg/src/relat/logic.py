"""Saturation of derivable judgements, goal-directed derivation and the
admissible rules (arity, subterm, substitution) as proof transformations.

A ``JudgementBank`` runs the Horn closure (in Eq mode) over the derivably
defined terms and interleaves it with the term-level rules:

* (Var) and (Ctx) seed the bank with the context;
* (E-Ar) defines ``σ(f)`` for argument maps ``f`` valued in class
  representatives (plus any explicitly requested goal terms);
* (Ax) fires variety axioms with substitutions valued in representatives;
  compound pattern subterms are defined bottom-up from their (I-Ar) facts;
* (Mor) relates two applications of the same operation argument-wise.

Terms deeper than the bound are never created; every candidate dropped for
depth is counted so the bank knows whether it is complete.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domains import covers
from .horn.closure import _MISSING, Closure, Reason
from .horn.ops import FuelExhausted
from .horn.theory import TheoryError
from .proofs import Proof, check_proof, iar_conclusion, proof_error  # noqa: F401  (re-export)
from .structops import GuardExceeded, get_guard
from .structures import Fact, PreStructure, point_key
from .terms import App, Def, Rel, Term, Var, subterms, substitute


class LogicError(ValueError):
    """An ill-posed goal or an invalid input to an admissible rule."""


def _tau_key(tau: dict, points) -> tuple:
    return tuple((y, tau[y]) for y in points)


def _match(pattern: Term, term: Term, tau: dict) -> bool:
    """Syntactic matching of a pattern against a term, extending ``tau``."""
    if isinstance(pattern, Var):
        old = tau.get(pattern.point)
        if old is None:
            tau[pattern.point] = term
            return True
        return old == term
    if not isinstance(term, App) or term.op != pattern.op or term.keys != pattern.keys:
        return False
    return all(_match(p, t, tau) for (_, p), (_, t) in zip(pattern.args, term.args))


class JudgementBank:
    """Derivable judgements over a finite context, for terms of bounded depth."""

    def __init__(self, variety, context: PreStructure, depth: int, *, universe=None,
                 fuel: int | None = None, guard: int | None = None):
        if depth < 0:
            raise LogicError("depth must be non-negative")
        self.variety = variety
        self.theory = variety.theory
        self.context = context
        self.depth = depth
        self.universe = None if universe is None else frozenset(universe)
        self.targets: set = set(self.universe or ())
        self.fuel = fuel
        self.guard = get_guard(guard)
        self.closure = Closure(self.theory, (), equality="eq")
        self.defined: dict = {}  # term -> ("Var",) | ("E-Ar", rel premises)
        self.by_op: dict = {}
        self.blocked: set = set()
        self._done: set = set()
        self.rep: dict = {}
        self.rounds = 0
        for x in context.carrier:
            self._define(Var(x), ("Var",))
        for f in sorted(context.facts, key=Fact.sort_key):
            self.closure.add_fact(f.symbol, tuple(Var(a) for a in f.args), f.bound, Reason("Ctx", data=f))
        self.saturate()

    # ------------------------------------------------------------------
    # state

    @property
    def complete(self) -> bool:
        """No candidate was dropped for exceeding the depth bound."""
        return not self.blocked and self.universe is None

    def _define(self, t: Term, reason) -> bool:
        if t in self.defined:
            return False
        self.defined[t] = reason
        self.closure.add_point(t)
        if isinstance(t, App):
            self.by_op.setdefault(t.op, []).append(t)
        return True

    def is_defined(self, t: Term) -> bool:
        return t in self.defined

    def witness(self, rel: Rel):
        return self.closure.witness(rel.symbol, rel.args, rel.bound)

    def holds(self, rel: Rel) -> bool:
        return all(a in self.defined for a in rel.args) and self.witness(rel) is not _MISSING

    def equal(self, s: Term, t: Term) -> bool:
        if s == t:
            return s in self.defined
        return s in self.defined and t in self.defined and self.closure.equal(s, t)

    def terms(self) -> list:
        return sorted(self.defined, key=lambda t: t.sort_key)

    def judgements(self):
        """Every stored judgement: definedness first, then relational generators."""
        out = [Def(t) for t in self.terms()]
        rels = [Rel(f.symbol, f.args, f.bound) for f in self.closure.facts()]
        rels.sort(key=lambda r: (r.symbol, tuple(a.sort_key for a in r.args), str(r.bound)))
        return out + rels

    # ------------------------------------------------------------------
    # fixpoint

    def saturate(self):
        while True:
            self.closure.run()
            self._classes()
            budget = [self.guard]
            changed = self._mor()
            changed |= self._axioms(budget)
            changed |= self._expand(budget)
            if not changed and not self.closure.pending():
                return
            self.rounds += 1
            if self.fuel is not None and self.rounds >= self.fuel:
                raise FuelExhausted(f"judgement saturation not finished after {self.fuel} rounds")

    def ensure(self, terms) -> None:
        """Also consider the given terms (and their subterms) for (E-Ar)."""
        new = set()
        for t in terms:
            new |= {s for s in subterms(t) if isinstance(s, App)}
        new -= self.targets
        if new:
            self.targets |= new
            self.saturate()

    def _classes(self):
        parent = {t: t for t in self.defined}

        def find(t):
            while parent[t] != t:
                parent[t] = parent[parent[t]]
                t = parent[t]
            return t

        wit = self.theory.eq_witness
        if wit:
            first = wit[0]
            ix, iy = first.args.index("x"), first.args.index("y")
            for args in self.closure.by_sym.get(first.symbol, ()):
                a, b = args[ix], args[iy]
                if a != b and find(a) != find(b) and self.closure.equal(a, b):
                    parent[find(a)] = find(b)
        groups: dict = {}
        for t in self.defined:
            groups.setdefault(find(t), []).append(t)
        rep = {}
        for members in groups.values():
            r = min(members, key=lambda u: u.sort_key)
            for m in members:
                rep[m] = r
        self.rep = rep

    def reps(self) -> list:
        return sorted({r for r in self.rep.values()}, key=lambda t: t.sort_key)

    def _tick(self, budget):
        budget[0] -= 1
        if budget[0] < 0:
            raise GuardExceeded(f"judgement saturation enumerated more than {self.guard} candidates")

    # (Mor) --------------------------------------------------------------

    def _mor(self) -> bool:
        changed = False
        cl = self.closure
        for name in sorted(self.by_op):
            terms = self.by_op[name]
            keys = self.variety.op(name).arity.carrier
            for r in self.theory.relations:
                dom = r.domain
                for fam in _tuples(terms, r.arity):
                    combos = [()]
                    prem_args = []
                    ok = True
                    for j in keys:
                        args = tuple(t.arg(j) for t in fam)
                        gens = cl.gens(r.name, args)
                        if not gens:
                            ok = False
                            break
                        prem_args.append(args)
                        combos = [c + (g,) for c in combos for g in gens]
                    if not ok:
                        continue
                    for combo in combos:
                        if dom is None:
                            concl = (None,)
                        else:
                            concl = (dom.bottom(),)
                            for g in combo:
                                concl = dom.intersect(concl, (g,))
                        prem = tuple(((r.name, a, g), g) for a, g in zip(prem_args, combo))
                        data = (name, tuple(t.values for t in fam))
                        for c in concl:
                            if cl.add_fact(r.name, fam, c, Reason("Mor", premises=prem, data=data)):
                                changed = True
        return changed

    # (Ax) and (I-Ar) ----------------------------------------------------

    def _axioms(self, budget) -> bool:
        changed = False
        reps = self.reps()
        for ai, ax in enumerate(self.variety.axioms):
            pts = ax.context.carrier
            if self.universe is None:
                seeds = [{}]
            else:
                seeds = self._seeds(ax)
            for seed in seeds:
                pool = reps if self.universe is None else self.terms()
                for tau in self._substitutions(ax.context, ax.presentation, pool, seed, budget):
                    key = (ai, _tau_key(tau, pts))
                    if key in self._done:
                        continue
                    self._done.add(key)
                    changed |= self._fire_axiom(ax, tau)
        return changed

    def _seeds(self, ax) -> list:
        pats = [s for t in ax.relation.args for s in subterms(t) if isinstance(s, App)]
        if not pats:
            return [{}]
        top = max(pats, key=lambda s: s.sort_key)
        out = []
        for u in sorted(self.targets, key=lambda t: t.sort_key):
            tau: dict = {}
            if _match(top, u, tau):
                out.append(tau)
        return out

    def _substitutions(self, ctx, presentation, pool, seed: dict, budget):
        """Maps ``ctx -> pool`` extending ``seed`` satisfying the presentation."""
        pts = list(ctx.carrier)
        for y, t in seed.items():
            if t not in self.defined:
                return
        order = [y for y in pts if y not in seed]
        pos = {y: i for i, y in enumerate(order)}
        checks = [[] for _ in order]
        pre = []
        for f in presentation:
            free = [pos[a] for a in f.args if a in pos]
            if free:
                checks[max(free)].append(f)
            else:
                pre.append(f)
        tau = dict(seed)
        cl = self.closure
        if any(cl.witness(f.symbol, tuple(tau[a] for a in f.args), f.bound) is _MISSING for f in pre):
            return

        def rec(i):
            if i == len(order):
                yield dict(tau)
                return
            y = order[i]
            for t in pool:
                self._tick(budget)
                tau[y] = t
                if all(cl.witness(f.symbol, tuple(tau[a] for a in f.args), f.bound) is not _MISSING
                       for f in checks[i]):
                    yield from rec(i + 1)
            tau.pop(y, None)

        yield from rec(0)

    def _fire_axiom(self, ax, tau: dict) -> bool:
        cl = self.closure
        changed = False
        subst = _tau_key(tau, ax.context.carrier)
        prem = tuple(((f.symbol, args, cl.witness(f.symbol, args, f.bound)), f.bound)
                     for f in ax.presentation for args in [tuple(tau[a] for a in f.args)])
        comps = sorted({s for t in ax.relation.args for s in subterms(t) if isinstance(s, App)},
                       key=lambda s: s.sort_key)
        ok = True
        for s in comps:
            img = substitute(s, tau)
            if img.depth > self.depth:
                self.blocked.add(img)
                ok = False
                continue
            if self.universe is not None and img not in self.targets and img not in self.defined:
                ok = False
                continue
            if any(a not in self.defined for a in img.values):
                ok = False
                continue
            ar = self.variety.op(s.op).arity
            edges = sorted(ar.facts, key=Fact.sort_key)
            for e in edges:
                c = iar_conclusion(s, e, tau)
                if cl.add_fact(c.symbol, c.args, c.bound,
                               Reason("I-Ar", premises=prem, data=(ax, s, e, subst))):
                    changed = True
            if img not in self.defined:
                rp = tuple(((e.symbol, a, cl.witness(e.symbol, a, e.bound)), e.bound)
                           for e in edges for a in [tuple(img.arg(k) for k in e.args)])
                changed |= self._define(img, ("E-Ar", rp))
        if ok:
            c = ax.relation.substitute(tau)
            if all(a in self.defined for a in c.args):
                if cl.add_fact(c.symbol, c.args, c.bound, Reason("Ax", premises=prem, data=(ax, subst))):
                    changed = True
        return changed

    # (E-Ar) -------------------------------------------------------------

    def _expand(self, budget) -> bool:
        changed = False
        for t in sorted(self.targets - set(self.defined), key=lambda u: u.sort_key):
            if t.depth <= self.depth and all(a in self.defined for a in t.values):
                changed |= self._try_define(t)
        if self.universe is not None:
            return changed
        reps = self.reps()
        for name in sorted(self.variety.ops):
            ar = self.variety.op(name).arity
            for tau in self._substitutions(ar, sorted(ar.facts, key=Fact.sort_key), reps, {}, budget):
                t = App(name, list(tau.items()))
                if t in self.defined:
                    continue
                if t.depth > self.depth:
                    self.blocked.add(t)
                    continue
                changed |= self._try_define(t)
        return changed

    def _try_define(self, t: App) -> bool:
        cl = self.closure
        ar = self.variety.op(t.op).arity
        rp = []
        for e in sorted(ar.facts, key=Fact.sort_key):
            a = tuple(t.arg(k) for k in e.args)
            w = cl.witness(e.symbol, a, e.bound)
            if w is _MISSING:
                return False
            rp.append(((e.symbol, a, w), e.bound))
        return self._define(t, ("E-Ar", tuple(rp)))

    # ------------------------------------------------------------------
    # proofs

    def prove(self, claim) -> Proof | None:
        if isinstance(claim, Def):
            if claim.term not in self.defined:
                return None
            return _Extractor(self).def_proof(claim.term)
        if not self.holds(claim):
            return None
        w = self.witness(claim)
        return _Extractor(self).rel_proof((claim.symbol, claim.args, w), claim.bound)


def _tuples(items, n):
    if n == 0:
        yield ()
        return
    for t in items:
        for rest in _tuples(items, n - 1):
            yield (t,) + rest


class _Extractor:
    """Reads proofs out of the bank's reasons, sharing subproofs."""

    def __init__(self, bank: JudgementBank):
        self.bank = bank
        self.ctx = bank.context
        self.rels: dict = {}
        self.defs: dict = {}

    def def_proof(self, t: Term) -> Proof:
        self._build([("def", t)])
        return self.defs[t]

    def rel_proof(self, key, required) -> Proof:
        self._build([("rel", key)])
        return self._weaken(self.rels[key], required)

    def _weaken(self, p: Proof, required) -> Proof:
        c = p.claim
        if required is None or c.bound == required:
            return p
        ax = self.bank.theory.up_axiom(c.symbol)
        return Proof(self.ctx, Rel(c.symbol, c.args, required), "Up", {"axiom": ax}, (p,))

    def _deps(self, item):
        kind, x = item
        if kind == "def":
            reason = self.bank.defined[x]
            if reason[0] == "Var":
                return []
            return [("rel", k) for k, _ in reason[1]] + [("def", a) for a in x.values]
        r = self.bank.closure.reasons[x]
        deps = [("rel", k) for k, _ in r.premises]
        if r.rule in ("Ax", "I-Ar"):
            deps += [("def", t) for _, t in r.data[-1]]
        elif r.rule != "Ctx":
            deps += [("def", a) for a in x[1]]
        return deps

    def _build(self, roots):
        stack = [(item, False) for item in roots]
        while stack:
            item, ready = stack.pop()
            table = self.defs if item[0] == "def" else self.rels
            if item[1] in table:
                continue
            if not ready:
                stack.append((item, True))
                for d in self._deps(item):
                    t2 = self.defs if d[0] == "def" else self.rels
                    if d[1] not in t2:
                        stack.append((d, False))
                continue
            table[item[1]] = self._node(item)

    def _node(self, item) -> Proof:
        kind, x = item
        ctx = self.ctx
        if kind == "def":
            reason = self.bank.defined[x]
            if reason[0] == "Var":
                return Proof(ctx, Def(x), "Var")
            prem = [self._weaken(self.rels[k], req) for k, req in reason[1]]
            prem += [self.defs[a] for a in x.values]
            return Proof(ctx, Def(x), "E-Ar", {"op": x.op}, prem)
        sym, args, gen = x
        r = self.bank.closure.reasons[x]
        claim = Rel(sym, args, gen)
        rels = [self._weaken(self.rels[k], req) for k, req in r.premises]
        if r.rule == "Ctx":
            return Proof(ctx, claim, "Ctx", {"edge": r.data})
        if r.rule in ("axiom", "limit"):
            data = {"axiom": r.axiom, "subst": r.binding, "metas": r.metas}
            return Proof(ctx, claim, "RelAx", data, rels + [self.defs[a] for a in args])
        if r.rule == "Mor":
            name, fams = r.data
            return Proof(ctx, claim, "Mor", {"op": name, "families": fams}, rels + [self.defs[a] for a in args])
        if r.rule == "Ax":
            ax, subst = r.data
            return Proof(ctx, claim, "Ax", {"axiom": ax, "subst": subst}, rels + [self.defs[t] for _, t in subst])
        if r.rule == "I-Ar":
            ax, s, e, subst = r.data
            return Proof(ctx, claim, "I-Ar", {"axiom": ax, "subterm": s, "edge": e, "subst": subst},
                         rels + [self.defs[t] for _, t in subst])
        raise LogicError(f"unknown reason {r.rule}")


# ---------------------------------------------------------------------------
# goal-directed interface

_BANKS: dict = {}


def saturate_judgements(V, X: PreStructure, depth: int, *, fuel=None, guard=None) -> JudgementBank:
    """The bank of judgements over ``X`` with terms of depth at most ``depth``."""
    key = (id(V), X, depth)
    bank = _BANKS.get(key)
    if bank is None or bank.variety is not V:
        bank = JudgementBank(V, X, depth, fuel=fuel, guard=guard)
        _BANKS[key] = bank
    return bank


def clear_cache():
    _BANKS.clear()


def _goal_terms(goal) -> tuple:
    return goal.terms


def check_goal(V, X: PreStructure, goal):
    if isinstance(goal, Def):
        V.check_term(goal.term, X.carrier)
    elif isinstance(goal, Rel):
        if goal.symbol == "=":
            raise LogicError("equality goals go through derive_equal (the Eq witness)")
        V.check_rel(goal, X.carrier)
    else:
        raise LogicError(f"not a judgement: {goal!r}")


@dataclass
class QueryResult:
    status: str  # "proved", "absent" (bank complete) or "depth" (bound reached)
    proof: Proof | None
    bank: JudgementBank


def query(V, X: PreStructure, goal, depth: int, *, focus: bool = False, fuel=None, guard=None) -> QueryResult:
    check_goal(V, X, goal)
    if focus:
        universe = set().union(*[{s for s in subterms(t) if isinstance(s, App)} for t in goal.terms])
        bank = JudgementBank(V, X, depth, universe=universe, fuel=fuel, guard=guard)
    else:
        bank = saturate_judgements(V, X, depth, fuel=fuel, guard=guard)
        bank.ensure(goal.terms)
    p = bank.prove(goal)
    if p is not None:
        return QueryResult("proved", p, bank)
    return QueryResult("absent" if bank.complete else "depth", None, bank)


def derive(V, X: PreStructure, goal, depth: int, *, focus: bool = False, fuel=None, guard=None) -> Proof | None:
    """A checkable proof of ``goal`` within the depth bound, or None."""
    return query(V, X, goal, depth, focus=focus, fuel=fuel, guard=guard).proof


def derive_equal(V, X: PreStructure, s: Term, t: Term, depth: int, **kw) -> list[Proof] | None:
    """Proofs of every Eq-witness judgement relating ``s`` and ``t``."""
    atoms = V.theory.eq_atoms(s, t)
    if not atoms:
        if s == t:
            p = derive(V, X, Def(s), depth, **kw)
            return None if p is None else [p]
        return None
    out = []
    for sym, args, gen in atoms:
        p = derive(V, X, Rel(sym, args, gen), depth, **kw)
        if p is None:
            return None
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# admissible rules


def _require_valid(p: Proof, V):
    err = proof_error(p, V)
    if err:
        raise LogicError(f"input proof is invalid: {err}")


def admissible_arity(p: Proof, edge, V) -> Proof:
    """From ``X ⊢ ↓σ(m)`` and an edge ``α(f)`` of ``ar(σ)``, a proof of ``X ⊢ α(m·f)``."""
    _require_valid(p, V)
    if not isinstance(p.claim, Def) or not isinstance(p.claim.term, App):
        raise LogicError("arity rule needs a definedness proof of an operation term")
    t = p.claim.term
    e = Fact(*edge)
    ar = V.op(t.op).arity
    if not ar.covers(e.symbol, e.args, e.bound):
        raise LogicError(f"{e} is not an edge of the arity of {t.op}")
    # the last rule can only be (E-Ar); pick a premise covering the edge
    facts = sorted(ar.facts, key=Fact.sort_key)
    target = Rel(e.symbol, tuple(t.arg(k) for k in e.args), e.bound)
    for f, q in zip(facts, p.premises):
        if f.symbol == e.symbol and f.args == e.args and covers(f.bound, e.bound):
            if q.claim == target:
                return q
            ax = V.theory.up_axiom(e.symbol)
            return Proof(p.context, target, "Up", {"axiom": ax}, (q,))
    raise LogicError("no premise for the edge")  # unreachable on valid input


def _ax_subterm_def(p: Proof, s: Term, V) -> Proof:
    """Definedness of ``τ·s`` for a pattern subterm ``s`` of an (Ax)/(I-Ar) node."""
    ax = p.data["axiom"]
    tau = dict(p.data["subst"])
    npres = len(ax.presentation)
    defs = {y: q for y, q in zip(ax.context.carrier, p.premises[npres:])}
    subst = tuple(p.data["subst"])
    ctx = p.context
    memo: dict = {}

    def go(u):
        if u in memo:
            return memo[u]
        if isinstance(u, Var):
            out = defs[u.point]
        else:
            ar = V.op(u.op).arity
            # the arity facts come from (I-Ar), which shares the node's premises
            prem = [Proof(ctx, iar_conclusion(u, e, tau), "I-Ar",
                          {"axiom": ax, "subterm": u, "edge": e, "subst": subst}, p.premises)
                    for e in sorted(ar.facts, key=Fact.sort_key)]
            prem += [go(a) for a in u.values]
            out = Proof(ctx, Def(substitute(u, tau)), "E-Ar", {"op": u.op}, prem)
        memo[u] = out
        return out

    return go(s)


def _def_of_arg(p: Proof, t: Term, V) -> Proof:
    """A proof of ``↓t`` for a term ``t`` occurring as an argument of ``p``'s claim."""
    while True:
        c = p.claim
        if isinstance(c, Def):
            if c.term != t:
                raise LogicError("term mismatch")
            return p
        if p.rule == "Up":
            p = p.premises[0]
            continue
        if p.rule == "Ctx":
            return Proof(p.context, Def(t), "Var")
        if p.rule in ("Mor", "RelAx"):
            n = len(c.args)
            for a, q in zip(c.args, p.premises[len(p.premises) - n:]):
                if a == t:
                    return q
        if p.rule == "Ax":
            ax = p.data["axiom"]
            for g in ax.relation.args:
                if substitute(g, dict(p.data["subst"])) == t:
                    return _ax_subterm_def(p, g, V)
        if p.rule == "I-Ar":
            s = p.data["subterm"]
            for k in Fact(*p.data["edge"]).args:
                if substitute(s.arg(k), dict(p.data["subst"])) == t:
                    return _ax_subterm_def(p, s.arg(k), V)
        raise LogicError(f"{t} is not an argument of {c}")


def admissible_subterm(p: Proof, u: Term, V) -> Proof:
    """From a proof of a judgement over terms ``f`` and ``u ∈ sub(f)``, a proof of ``↓u``."""
    _require_valid(p, V)
    c = p.claim
    for t in c.terms:
        if u in subterms(t):
            q = _def_of_arg(p, t, V) if isinstance(c, Rel) else p
            # descend through (E-Ar) nodes to u
            while q.claim.term != u:
                term = q.claim.term
                n = len(term.values)
                for a, d in zip(term.values, q.premises[len(q.premises) - n:]):
                    if u in subterms(a):
                        q = d
                        break
            return q
    raise LogicError(f"{u} is not a subterm of the judgement")


def admissible_substitute(tau: dict, premises, p: Proof, V, X: PreStructure) -> Proof:
    """Transport a proof over ``Y`` to ``X`` along ``tau: Y -> terms over X``.

    ``premises`` must prove ``X ⊢ α(τ·f)`` for every edge of ``Y`` and
    ``X ⊢ ↓τ(y)`` for every point ``y``.
    """
    Y = p.context
    tau = {y: (t if isinstance(t, Term) else Var(t)) for y, t in tau.items()}
    given = {}
    for q in premises:
        _require_valid(q, V)
        if q.context != X:
            raise LogicError("admissibility premise over a different context")
        given.setdefault(q.claim, q)
    for y in Y.carrier:
        if y not in tau:
            raise LogicError(f"substitution misses {y}")
        if Def(tau[y]) not in given:
            raise LogicError(f"missing admissibility premise def({tau[y]})")
    for f in Y.facts:
        want = Rel(f.symbol, tuple(tau[a] for a in f.args), f.bound)
        if want not in given:
            raise LogicError(f"missing admissibility premise {want}")
    theory = V.theory
    memo: dict = {}

    def sub_claim(c):
        return c.substitute(tau)

    def ctx_proof(e: Fact):
        for f in Y.facts:
            if f.symbol == e.symbol and f.args == e.args and covers(f.bound, e.bound):
                q = given[Rel(f.symbol, tuple(tau[a] for a in f.args), f.bound)]
                if f.bound == e.bound:
                    return q
                return Proof(X, sub_claim(Rel(e.symbol, e.args, e.bound)), "Up",
                             {"axiom": theory.up_axiom(e.symbol)}, (q,))
        raise LogicError(f"{e} is not an edge of the source context")

    order = list(p.nodes())
    for node in reversed(order):
        if id(node) in memo:
            continue
        prem = tuple(memo[id(q)] for q in node.premises)
        c = node.claim
        data = dict(node.data)
        if node.rule == "Var":
            new = given[Def(tau[c.term.point])]
        elif node.rule == "Ctx":
            new = ctx_proof(Fact(*data["edge"]))
        else:
            if node.rule == "RelAx":
                data["subst"] = tuple((v, substitute(t, tau)) for v, t in data.get("subst", ()))
            elif node.rule in ("Ax", "I-Ar"):
                data["subst"] = tuple((y, substitute(t, tau)) for y, t in data["subst"])
            elif node.rule == "Mor":
                data["families"] = tuple(tuple(substitute(t, tau) for t in fi) for fi in data["families"])
            new = Proof(X, sub_claim(c), node.rule, data, prem)
        memo[id(node)] = new
    return memo[id(p)]
