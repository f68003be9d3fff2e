"""Semi-naive forward chaining for Horn theories with graded families.

The workspace stores, per ``(symbol, args)``, the antichain of index
generators derived so far, plus the first reason recorded for each
``(symbol, args, generator)``.  Reasons only cite facts that already had a
reason when they were recorded, so the reason graph is acyclic and proofs
can be read back without search.

Two equality regimes are supported.  In ``native`` mode ``=`` is an ordinary
relation with generated reflexivity, symmetry, transitivity and congruence
axioms; this is what ``saturate`` and ``reflect`` use.  In ``eq`` mode
equality never appears: axioms concluding ``x = y`` conclude the Eq-witness
atoms instead.  The relational logic runs in ``eq`` mode.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

from ..domains import covers
from ..structures import Fact
from .theory import HornAxiom, HornTheory, conclusion_bound, free_choices

_MISSING = object()


class Reason(NamedTuple):
    rule: str  # "hyp", "axiom", "limit", or a rule name supplied by a caller
    axiom: object = None
    binding: tuple = ()  # ((variable, point), ...)
    metas: tuple = ()  # ((metavariable, generator), ...)
    premises: tuple = ()  # ((source key, required generator), ...)
    data: object = None  # caller-specific payload


class _Atom(NamedTuple):
    symbol: str
    args: tuple
    kind: str  # "plain", "const", "meta"
    required: object  # generator for constant indices
    meta: str | None


class _Compiled:
    __slots__ = ("axiom", "atoms", "dom", "extra_vars", "concl_vars", "memo")

    def __init__(self, ax: HornAxiom, theory: HornTheory):
        self.axiom = ax
        atoms = []
        for p in ax.premises:
            dom = theory.domain_of(p.symbol)
            if p.index is None:
                atoms.append(_Atom(p.symbol, p.args, "plain", None, None))
            elif p.index.metas:
                atoms.append(_Atom(p.symbol, p.args, "meta", None, p.index.metas[0]))
            else:
                atoms.append(_Atom(p.symbol, p.args, "const", dom.principal(p.index.const), None))
        self.atoms = tuple(atoms)
        self.dom = theory.domain_of(ax.conclusion.symbol)
        bound = {v for p in ax.premises for v in p.args}
        seen = []
        for v in ax.conclusion.args:
            if v not in bound and v not in seen:
                seen.append(v)
        self.extra_vars = tuple(seen)
        self.concl_vars = ax.conclusion.args
        self.memo: dict = {}  # premise metas -> [(all metas, conclusion bound)]

    def outcomes(self, metas: dict) -> list:
        key = tuple(sorted(metas.items()))
        out = self.memo.get(key)
        if out is None:
            out = []
            ax, dom = self.axiom, self.dom
            choices = free_choices(ax, dom, metas) if dom is not None else [{}]
            for free in choices:
                allm = dict(metas)
                allm.update(free)
                bound = conclusion_bound(ax, dom, allm) if dom is not None else None
                out.append((tuple(sorted(allm.items())), bound))
            self.memo[key] = out
        return out


class Closure:
    """A private saturation workspace over a growing carrier."""

    def __init__(self, theory: HornTheory, points=(), *, equality: str = "native", axioms=None):
        if equality not in ("native", "eq"):
            raise ValueError("equality must be 'native' or 'eq'")
        self.theory = theory
        self.equality = equality
        if axioms is None:
            axioms = theory.native_axioms() if equality == "native" else theory.logic_axioms()
        self.compiled = [_Compiled(ax, theory) for ax in axioms]
        self.limits = {lr.family: lr for lr in theory.limit_rules}
        self.points: list = []
        self._pointset: set = set()
        self.table: dict = {}  # (symbol, args) -> list of generators
        self.by_pos: dict = {}  # symbol -> [ {value: [args, ...]} per position ]
        self.by_sym: dict = {}  # symbol -> [args, ...]
        self.reasons: dict = {}  # (symbol, args, generator) -> Reason
        self._delta: list = []
        self._dirty = False
        self.rounds = 0
        for p in points:
            self.add_point(p)

    # ------------------------------------------------------------------
    # state

    def add_point(self, p) -> bool:
        if p in self._pointset:
            return False
        self._pointset.add(p)
        self.points.append(p)
        self._dirty = True
        return True

    def has_point(self, p) -> bool:
        return p in self._pointset

    def gens(self, symbol: str, args) -> tuple:
        return tuple(self.table.get((symbol, tuple(args)), ()))

    def witness(self, symbol: str, args, bound=None):
        """A stored generator yielding ``symbol[bound](args)``, or ``_MISSING``."""
        for g in self.table.get((symbol, tuple(args)), ()):
            if covers(g, bound):
                return g
        return _MISSING

    def holds(self, symbol: str, args, bound=None) -> bool:
        return self.witness(symbol, args, bound) is not _MISSING

    def facts(self):
        for (sym, args), gens in self.table.items():
            for g in gens:
                yield Fact(sym, args, g)

    def add_fact(self, symbol: str, args, bound, reason: Reason) -> bool:
        """Record a fact; returns False when an existing generator subsumes it."""
        args = tuple(args)
        for a in args:
            if a not in self._pointset:
                raise ValueError(f"fact over unknown point {a!r}")
        key = (symbol, args)
        gens = self.table.get(key)
        if gens is None:
            gens = self.table[key] = []
            self.by_sym.setdefault(symbol, []).append(args)
            idx = self.by_pos.get(symbol)
            if idx is None:
                idx = self.by_pos[symbol] = [dict() for _ in args]
            for i, a in enumerate(args):
                idx[i].setdefault(a, []).append(args)
        for g in gens:
            if covers(g, bound):
                return False
        if bound is not None:
            gens[:] = [g for g in gens if not covers(bound, g)]
        gens.append(bound)
        fkey = (symbol, args, bound)
        if fkey not in self.reasons:
            self.reasons[fkey] = reason
        self._delta.append(fkey)
        return True

    # ------------------------------------------------------------------
    # evaluation

    def _candidates(self, atom: _Atom, binding: dict):
        best = None
        idx = self.by_pos.get(atom.symbol)
        if idx is None:
            return ()
        for i, v in enumerate(atom.args):
            b = binding.get(v, _MISSING)
            if b is not _MISSING:
                lst = idx[i].get(b, ())
                if best is None or len(lst) < len(best):
                    best = lst
                    if not best:
                        return ()
        if best is None:
            best = self.by_sym.get(atom.symbol, ())
        return best

    def _index_options(self, atom: _Atom, gens):
        if atom.kind == "plain":
            return [(None, None)] if gens and gens[0] is None else []
        if atom.kind == "const":
            for g in gens:
                if covers(g, atom.required):
                    return [(g, atom.required)]
            return []
        return [(g, g) for g in gens]

    def _solve(self, comp: _Compiled, remaining: list, binding: dict, metas: dict, prem: list, seed, out: list):
        if not remaining:
            out.append((dict(binding), dict(metas), tuple(prem)))
            return
        # pick the atom with the most bound arguments
        if seed is not None and seed[0] in remaining:
            j = seed[0]
        else:
            best_j, best_n = None, -1
            for k in remaining:
                n = sum(1 for v in comp.atoms[k].args if v in binding)
                if n > best_n:
                    best_j, best_n = k, n
            j = best_j
        atom = comp.atoms[j]
        rest = [k for k in remaining if k != j]
        if seed is not None and seed[0] == j:
            cands = [(seed[1], (seed[2],))]
        else:
            cands = [(args, self.table[(atom.symbol, args)]) for args in self._candidates(atom, binding)]
        for args, gens in cands:
            newly = []
            ok = True
            for v, a in zip(atom.args, args):
                b = binding.get(v, _MISSING)
                if b is _MISSING:
                    binding[v] = a
                    newly.append(v)
                elif b != a:
                    ok = False
                    break
            if ok:
                for g, req in self._index_options(atom, list(gens)):
                    prem[j] = ((atom.symbol, args, g), req)
                    if atom.meta is not None:
                        metas[atom.meta] = g
                    self._solve(comp, rest, binding, metas, prem, seed, out)
                if atom.meta is not None:
                    metas.pop(atom.meta, None)
            for v in newly:
                del binding[v]

    def _conclude(self, comp: _Compiled, matches, pending: list):
        ax = comp.axiom
        for binding, metas, prem in matches:
            extra = comp.extra_vars
            tuples = product(self.points, repeat=len(extra)) if extra else [()]
            outcomes = comp.outcomes(metas)
            sym = ax.conclusion.symbol
            for vals in tuples:
                full = dict(binding)
                full.update(zip(extra, vals))
                args = tuple(full[v] for v in comp.concl_vars)
                gens = self.table.get((sym, args), ())
                for allm, bound in outcomes:
                    if any(covers(g, bound) for g in gens):
                        continue  # subsumed; the reason would be discarded anyway
                    reason = Reason("axiom", ax, tuple(sorted(full.items())), allm, prem)
                    pending.append((sym, args, bound, reason))

    def step(self) -> bool:
        """One semi-naive round; returns whether any fact was added."""
        delta = self._delta
        self._delta = []
        dirty = self._dirty
        self._dirty = False
        by_symbol: dict = {}
        for key in delta:
            by_symbol.setdefault(key[0], []).append(key)
        pending: list = []
        for comp in self.compiled:
            n = len(comp.atoms)
            if n == 0 or (dirty and comp.extra_vars):
                if n == 0 and not dirty:
                    continue
                out: list = []
                self._solve(comp, list(range(n)), {}, {}, [None] * n, None, out)
                self._conclude(comp, out, pending)
                continue
            for i, atom in enumerate(comp.atoms):
                for key in by_symbol.get(atom.symbol, ()):
                    out = []
                    self._solve(comp, list(range(n)), {}, {}, [None] * n, (i, key[1], key[2]), out)
                    self._conclude(comp, out, pending)
        changed = False
        for sym, args, bound, reason in pending:
            if self.add_fact(sym, args, bound, reason):
                changed = True
        if self._apply_limits():
            changed = True
        self.rounds += 1
        return changed

    def _apply_limits(self) -> bool:
        if not self.limits:
            return False
        changed = False
        todo = [k for k in self._delta if k[0] in self.limits]
        seen = set()
        while todo:
            sym, args, _ = todo.pop()
            if (sym, args) in seen:
                continue
            seen.add((sym, args))
            gens = tuple(self.table[(sym, args)])
            dom = gens[0].domain
            new = dom.limit(gens)
            if new is None:
                continue
            reason = Reason("limit", self.limits[sym], (), (), tuple(((sym, args, g), g) for g in gens))
            if self.add_fact(sym, args, new, reason):
                changed = True
        return changed

    def pending(self) -> bool:
        return bool(self._delta) or self._dirty

    def run(self, max_rounds: int | None = None) -> bool:
        """Saturate; returns True at fixpoint, False if ``max_rounds`` ran out first."""
        n = 0
        while self.pending():
            if max_rounds is not None and n >= max_rounds:
                return False
            self.step()
            n += 1
        return True

    def equal(self, a, b) -> bool:
        if a == b:
            return True
        if self.equality == "native":
            return ("=", (a, b)) in self.table
        atoms = self.theory.eq_atoms(a, b)
        return bool(atoms) and all(self.holds(s, args, g) for s, args, g in atoms)
