"""Relational symbols, edges and finite pre-structures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .domains import Bound, Grade, covers, format_rational, gen_key


class StructureError(ValueError):
    """A structure refers to an undeclared point or has a malformed edge."""


def point_key(p) -> tuple:
    """Deterministic sort key for carrier points of any supported shape."""
    if isinstance(p, str):
        return (0, p, ())
    if isinstance(p, bool):
        return (4, repr(p), ())
    if isinstance(p, int):
        return (1, f"{p:+021d}", ())
    sk = getattr(p, "sort_key", None)
    if sk is not None:
        return (2, "", sk)
    if isinstance(p, tuple):
        return (3, "", tuple(point_key(x) for x in p))
    return (4, repr(p), ())


def show_point(p) -> str:
    if isinstance(p, tuple):
        return "(" + ",".join(show_point(x) for x in p) + ")"
    return str(p)


@dataclass(frozen=True)
class RelSymbol:
    """A relation symbol; ``index`` selects one member of a graded family."""

    name: str
    arity: int
    index: Fraction | Grade | None = None

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise StructureError(f"relation {self.name}: arity must be a positive integer")
        if self.index is not None and not isinstance(self.index, Grade):
            Bound(Fraction(self.index))  # range check
            object.__setattr__(self, "index", Fraction(self.index))

    def generator(self):
        if self.index is None:
            return None
        if isinstance(self.index, Grade):
            return self.index
        return Bound(self.index)


@dataclass(frozen=True)
class Edge:
    symbol: RelSymbol
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) != self.symbol.arity:
            raise StructureError(
                f"edge {self.symbol.name}: {len(self.points)} points for arity {self.symbol.arity}"
            )

    def fact(self) -> "Fact":
        return Fact(self.symbol.name, self.points, self.symbol.generator())


class Fact(NamedTuple):
    """One stored edge: symbol name, argument tuple and index generator.

    For plain relations ``bound`` is ``None``; for graded families it is a
    ``Bound`` or ``Grade`` generator and the fact stands for every index in
    its up-set.  The distinguished equality symbol is ``"="``.
    """

    symbol: str
    args: tuple
    bound: object = None

    def sort_key(self):
        return (self.symbol, tuple(point_key(a) for a in self.args), gen_key(self.bound))

    def __str__(self) -> str:
        return render_atom(self.symbol, self.args, self.bound)


def render_atom(symbol: str, args, bound=None) -> str:
    parts = [show_point(a) for a in args]
    if symbol == "=":
        return f"{parts[0]} = {parts[1]}"
    idx = "" if bound is None else f"[{bound}]"
    return f"{symbol}{idx}(" + ", ".join(parts) + ")"


def normalize_facts(facts: Iterable[Fact]) -> dict:
    """Group facts per (symbol, args) and reduce index generators to an antichain."""
    table: dict = {}
    for f in facts:
        f = Fact(*f)
        table.setdefault((f.symbol, f.args), []).append(f.bound)
    out = {}
    for key, gens in table.items():
        if gens[0] is None:
            if any(g is not None for g in gens):
                raise StructureError(f"relation {key[0]} used both plain and graded")
            out[key] = (None,)
        else:
            out[key] = gens[0].domain.minimize(gens)
    return out


class PreStructure:
    """A finite carrier with a finite set of edges (not necessarily a model)."""

    __slots__ = ("carrier", "table", "facts", "_hash")

    def __init__(self, carrier: Iterable = (), facts: Iterable = ()):
        pts = set(carrier)
        self.carrier = tuple(sorted(pts, key=point_key))
        facts = [f.fact() if isinstance(f, Edge) else Fact(*f) for f in facts]
        for f in facts:
            for a in f.args:
                if a not in pts:
                    raise StructureError(f"edge {f} mentions undeclared point {show_point(a)}")
            if f.symbol == "=":
                raise StructureError("equality is not a relation of the signature")
        self.table = normalize_facts(facts)
        self.facts = frozenset(
            Fact(sym, args, g) for (sym, args), gens in self.table.items() for g in gens
        )
        self._hash = None

    # ------------------------------------------------------------------
    @property
    def edges(self) -> list[Fact]:
        return sorted(self.facts, key=Fact.sort_key)

    def gens(self, symbol: str, args) -> tuple:
        return self.table.get((symbol, tuple(args)), ())

    def covers(self, symbol: str, args, bound=None) -> bool:
        """Whether the structure contains the edge ``symbol[bound](args)``."""
        for g in self.table.get((symbol, tuple(args)), ()):
            if covers(g, bound):
                return True
        return False

    def holds(self, symbol: str, args, index=None) -> bool:
        gens = self.table.get((symbol, tuple(args)), ())
        if index is None:
            return bool(gens) and gens[0] is None
        return any(g is not None and g.admits(index) for g in gens)

    def symbols(self) -> set[str]:
        return {sym for sym, _ in self.table}

    def underlying(self) -> "PreStructure":
        return PreStructure(self.carrier, self.facts)

    def restrict(self, points) -> "PreStructure":
        keep = set(points)
        return PreStructure(keep, [f for f in self.facts if set(f.args) <= keep])

    def rename(self, mapping) -> "PreStructure":
        return PreStructure(
            [mapping[p] for p in self.carrier],
            [Fact(f.symbol, tuple(mapping[a] for a in f.args), f.bound) for f in self.facts],
        )

    def __eq__(self, other):
        if not isinstance(other, PreStructure):
            return NotImplemented
        return self.carrier == other.carrier and self.facts == other.facts

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.carrier, self.facts))
        return self._hash

    def __len__(self):
        return len(self.carrier)

    def __repr__(self) -> str:
        pts = " ".join(show_point(p) for p in self.carrier)
        body = "; ".join(str(f) for f in self.edges)
        return f"{type(self).__name__}({{{pts}}}; {body})"


class Model(PreStructure):
    """A pre-structure known to satisfy a Horn theory."""

    __slots__ = ("theory",)

    def __init__(self, carrier=(), facts=(), theory=None):
        super().__init__(carrier, facts)
        self.theory = theory

    @classmethod
    def trusted(cls, pre: PreStructure, theory) -> "Model":
        m = cls.__new__(cls)
        m.carrier = pre.carrier
        m.table = pre.table
        m.facts = pre.facts
        m._hash = None
        m.theory = theory
        return m

    @property
    def underlying_structure(self) -> PreStructure:
        return self.underlying()


def edge(symbol: str, *points, index=None, arity=None) -> Edge:
    """Convenience constructor: ``edge("le", "a", "b")``."""
    return Edge(RelSymbol(symbol, arity or len(points), index), points)


def show_index(gen) -> str:
    if isinstance(gen, Bound):
        return format_rational(gen.value) if gen.closed else ">" + format_rational(gen.value)
    return str(gen)
