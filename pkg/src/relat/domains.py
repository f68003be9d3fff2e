"""Index domains for graded relation families.

A graded family such as the metric relations ``eq[e]`` is upward closed in its
index: if ``eq[e](x, y)`` holds then so does ``eq[f](x, y)`` for every
``f >= e``.  The set of indices that hold for one argument tuple is therefore
an up-set of the index domain, and we store it as an antichain of
*generators*, each standing for its principal up-set.

Two domains are supported:

* ``UNIT``: the rationals in ``[0, 1]``.  Up-sets are intervals ``[v, 1]``
  (closed generator) or ``(v, 1]`` (open generator), so an antichain has at
  most one element.
* ``FiniteLattice``: a finite meet-semilattice given by an order table.
  Up-sets are unions of principal filters.

Generators are self-describing values (``Bound`` and ``Grade``) so structures
can compare them without consulting a signature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

ZERO = Fraction(0)
ONE = Fraction(1)


class DomainError(ValueError):
    """An index lies outside its domain, or a lattice table is malformed."""


def as_rational(value) -> Fraction:
    """Parse an exact rational in ``[0, 1]`` from an int, Fraction or ``"p/q"``."""
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    elif isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                q = Fraction(int(num), int(den))
            else:
                q = Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {value!r}") from exc
    else:
        raise DomainError(f"not a rational: {value!r}")
    if q < 0 or q > 1:
        raise DomainError(f"rational {format_rational(q)} outside [0,1]")
    return q


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# rational unit interval


@dataclass(frozen=True, order=True)
class Bound:
    """Generator of the up-set ``[value, 1]`` (closed) or ``(value, 1]``."""

    value: Fraction
    closed: bool = True

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0 or self.value > 1:
            raise DomainError(f"bound {self.value} outside [0,1]")
        if self.value == 1 and not self.closed:
            raise DomainError("empty up-set (1, 1]")

    @property
    def domain(self) -> "UnitInterval":
        return UNIT

    def admits(self, index) -> bool:
        """Whether the concrete index lies in the up-set."""
        index = Fraction(index)
        return self.value < index or (self.closed and self.value == index)

    def __hash__(self):
        v = self.value
        return hash((v.numerator, v.denominator, self.closed))

    def covers(self, other: "Bound") -> bool:
        """Whether ``up(self)`` contains ``up(other)``."""
        if self.value != other.value:
            return self.value < other.value
        return self.closed or not other.closed

    def __str__(self) -> str:
        text = format_rational(self.value)
        return text if self.closed else ">" + text


class UnitInterval:
    """Operations on up-sets of the rational interval ``[0, 1]``."""

    name = "rational"
    finite = False

    def __repr__(self) -> str:
        return "UNIT"

    def __reduce__(self):
        return "UNIT"

    def principal(self, index) -> Bound:
        return Bound(as_rational(index), True)

    def bottom(self) -> Bound:
        return Bound(ZERO, True)

    def parse_index(self, text: str) -> Fraction:
        return as_rational(text)

    def minimize(self, gens: Iterable[Bound]) -> tuple[Bound, ...]:
        best = None
        for g in gens:
            if best is None or g.covers(best):
                best = g
        return () if best is None else (best,)

    def intersect(self, left: tuple, right: tuple) -> tuple:
        if not left or not right:
            return ()
        a, b = left[0], right[0]
        return (b,) if a.covers(b) else (a,)

    def union(self, left: tuple, right: tuple) -> tuple:
        return self.minimize(tuple(left) + tuple(right))

    def strict(self, gen: Bound) -> tuple:
        """Generators of ``{f : f > e for some e in up(gen)}``."""
        if gen.value == ONE:
            return ()
        return (Bound(gen.value, False),)

    def add(self, gens: Iterable[Bound]) -> Bound:
        """Capped sum of up-sets: ``up(a) + up(b)`` intersected with ``[0,1]``."""
        total = ZERO
        closed = True
        for g in gens:
            total += g.value
            closed = closed and g.closed
        if total >= ONE:
            return Bound(ONE, True)
        return Bound(total, closed)

    def limit(self, gens: tuple) -> Bound | None:
        """Archimedean closure: an open generator ``(v, 1]`` becomes ``[v, 1]``."""
        if len(gens) == 1 and not gens[0].closed:
            return Bound(gens[0].value, True)
        return None

    def key(self, gen: Bound):
        return (gen.value, not gen.closed)


UNIT = UnitInterval()


# ---------------------------------------------------------------------------
# finite lattices


@dataclass(frozen=True)
class FiniteLattice:
    """A finite meet-semilattice given by its elements and order pairs.

    ``order`` holds pairs ``(a, b)`` meaning ``a <= b``; reflexive and
    transitive closure is taken on construction.  Every pair of elements must
    have a greatest lower bound, and any listed meets must agree with it.
    """

    name: str
    elements: tuple[str, ...]
    order: frozenset = field(default_factory=frozenset)
    finite = True

    def __post_init__(self):
        elems = tuple(self.elements)
        if len(set(elems)) != len(elems) or not elems:
            raise DomainError(f"lattice {self.name}: elements must be distinct and nonempty")
        leq = {(a, a) for a in elems}
        for a, b in self.order:
            if a not in elems or b not in elems:
                raise DomainError(f"lattice {self.name}: unknown element in {a} <= {b}")
            leq.add((a, b))
        changed = True
        while changed:
            changed = False
            for a, b in list(leq):
                for c, d in list(leq):
                    if b == c and (a, d) not in leq:
                        leq.add((a, d))
                        changed = True
        for a in elems:
            for b in elems:
                if a != b and (a, b) in leq and (b, a) in leq:
                    raise DomainError(f"lattice {self.name}: {a} and {b} are order-equivalent")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "order", frozenset(leq))
        meets = {}
        for a in elems:
            for b in elems:
                lower = [c for c in elems if (c, a) in leq and (c, b) in leq]
                top = [c for c in lower if all((d, c) in leq for d in lower)]
                if len(top) != 1:
                    raise DomainError(f"lattice {self.name}: {a} and {b} have no meet")
                meets[a, b] = top[0]
        object.__setattr__(self, "_meets", meets)

    @classmethod
    def from_table(cls, name: str, elements, order, meets=None) -> "FiniteLattice":
        lat = cls(name, tuple(elements), frozenset(tuple(p) for p in order))
        for (a, b), m in dict(meets or {}).items():
            if lat.meet(a, b) != m:
                raise DomainError(
                    f"lattice {name}: listed meet {a} /\\ {b} = {m} is not the greatest lower bound"
                )
        return lat

    # ------------------------------------------------------------------
    def leq(self, a: str, b: str) -> bool:
        return (a, b) in self.order

    def meet(self, a: str, b: str) -> str:
        return self._meets[a, b]

    def principal(self, index) -> "Grade":
        if isinstance(index, Grade):
            index = index.element
        if index not in self.elements:
            raise DomainError(f"{index!r} is not an element of lattice {self.name}")
        return Grade(self, index)

    def parse_index(self, text: str) -> "Grade":
        return self.principal(text.strip())

    def bottom_elements(self) -> tuple[str, ...]:
        return tuple(a for a in self.elements if not any(self.leq(b, a) and b != a for b in self.elements))

    def bottom(self) -> "Grade":
        (b,) = self.bottom_elements()  # a meet-semilattice has a least element
        return Grade(self, b)

    def minimize(self, gens: Iterable["Grade"]) -> tuple:
        pool = {g.element for g in gens}
        keep = [a for a in pool if not any(b != a and self.leq(b, a) for b in pool)]
        return tuple(Grade(self, a) for a in sorted(keep, key=self.elements.index))

    def upset(self, gens: Iterable["Grade"]) -> set[str]:
        return {a for a in self.elements if any(self.leq(g.element, a) for g in gens)}

    def intersect(self, left: tuple, right: tuple) -> tuple:
        common = self.upset(left) & self.upset(right)
        return self.minimize(Grade(self, a) for a in common)

    def union(self, left: tuple, right: tuple) -> tuple:
        return self.minimize(tuple(left) + tuple(right))

    def strict(self, gen: "Grade") -> tuple:
        above = [a for a in self.elements if a != gen.element and self.leq(gen.element, a)]
        return self.minimize(Grade(self, a) for a in above)

    def limit(self, gens: tuple) -> "Grade | None":
        """Meet closure: an up-set generated by several elements contains their meet."""
        if len(gens) < 2:
            return None
        m = gens[0].element
        for g in gens[1:]:
            m = self.meet(m, g.element)
        return Grade(self, m)

    def key(self, gen: "Grade"):
        return self.elements.index(gen.element)

    def __hash__(self):
        return hash((self.name, self.elements, self.order))

    def __eq__(self, other):
        if not isinstance(other, FiniteLattice):
            return NotImplemented
        return (self.name, self.elements, self.order) == (other.name, other.elements, other.order)


@dataclass(frozen=True)
class Grade:
    """Generator of the principal filter ``{q : element <= q}`` in a finite lattice."""

    lattice: FiniteLattice
    element: str

    @property
    def domain(self) -> FiniteLattice:
        return self.lattice

    def admits(self, index) -> bool:
        if isinstance(index, Grade):
            index = index.element
        return self.lattice.leq(self.element, index)

    def covers(self, other: "Grade") -> bool:
        return self.lattice.leq(self.element, other.element)

    def __lt__(self, other: "Grade") -> bool:
        return self.lattice.key(self) < other.lattice.key(other)

    def __str__(self) -> str:
        return self.element

    def __repr__(self) -> str:
        return f"Grade({self.element!r})"


def gen_key(gen) -> tuple:
    """A total sort key for generators (``None`` for plain relations first)."""
    if gen is None:
        return (0,)
    if isinstance(gen, Bound):
        return (1, gen.value, not gen.closed)
    return (2, gen.lattice.key(gen))


def covers(strong, weak) -> bool:
    """Whether generator ``strong`` yields every index ``weak`` does (plain: both None)."""
    if strong is None or weak is None:
        return strong is None and weak is None
    if type(strong) is not type(weak):
        return False
    return strong.covers(weak)
