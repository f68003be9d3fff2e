"""Operation terms over a context, with structure-valued arities.

An application ``App(op, args)`` stores its arguments as pairs
``(arity point, term)`` sorted by arity point, so the argument map is total on
the arity carrier and no positional convention is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .structures import point_key, render_atom, show_point


class Term:
    __slots__ = ()

    depth: int

    @property
    def sort_key(self) -> tuple:
        return (self.depth, str(self))


class Var(Term):
    __slots__ = ("point", "_hash")

    def __init__(self, point):
        self.point = point
        self._hash = hash(("var", point))

    depth = 0

    def __eq__(self, other):
        return isinstance(other, Var) and self.point == other.point

    def __hash__(self):
        return self._hash

    def __str__(self) -> str:
        return show_point(self.point)

    def __repr__(self) -> str:
        return f"Var({self.point!r})"


class App(Term):
    __slots__ = ("op", "args", "depth", "_hash", "_str")

    def __init__(self, op: str, args):
        if isinstance(args, dict):
            args = args.items()
        pairs = tuple(sorted(((k, t) for k, t in args), key=lambda kv: point_key(kv[0])))
        for _, t in pairs:
            if not isinstance(t, Term):
                raise TypeError(f"argument {t!r} of {op} is not a term")
        self.op = op
        self.args = pairs
        self.depth = 1 + max((t.depth for _, t in pairs), default=0)
        self._hash = hash((op, pairs))
        self._str = None

    def arg(self, key) -> Term:
        for k, t in self.args:
            if k == key:
                return t
        raise KeyError(key)

    @property
    def keys(self) -> tuple:
        return tuple(k for k, _ in self.args)

    @property
    def values(self) -> tuple:
        return tuple(t for _, t in self.args)

    def __eq__(self, other):
        return (
            isinstance(other, App)
            and self._hash == other._hash
            and self.op == other.op
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __str__(self) -> str:
        if self._str is None:
            self._str = f"{self.op}(" + ", ".join(str(t) for _, t in self.args) + ")"
        return self._str

    def braced(self) -> str:
        """Explicit-key rendering ``op{k->t, ...}``."""
        inner = ", ".join(
            f"{show_point(k)}->{t.braced() if isinstance(t, App) else t}" for k, t in self.args
        )
        return f"{self.op}{{{inner}}}"

    def __repr__(self) -> str:
        return f"App({self.op!r}, {dict(self.args)!r})"


def app(op: str, *terms, keys=None) -> App:
    """Positional constructor; ``keys`` defaults to the arity points ``0, 1, ...``."""
    terms = [t if isinstance(t, Term) else Var(t) for t in terms]
    if keys is None:
        keys = range(len(terms))
    return App(op, list(zip(keys, terms)))


def subterms(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if s in out:
            continue
        out.add(s)
        if isinstance(s, App):
            stack.extend(s.values)
    return out


def variables(t: Term) -> set:
    return {s.point for s in subterms(t) if isinstance(s, Var)}


def substitute(t: Term, tau) -> Term:
    """Apply ``tau`` (point -> term) to every variable."""
    if isinstance(t, Var):
        return tau[t.point]
    return App(t.op, [(k, substitute(s, tau)) for k, s in t.args])


def rename_vars(t: Term, mapping) -> Term:
    return substitute(t, {p: Var(q) for p, q in mapping.items()}) if mapping else t


@dataclass(frozen=True)
class Rel:
    """A relational claim ``symbol[bound](args)`` over terms."""

    symbol: str
    args: tuple
    bound: object = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(a if isinstance(a, Term) else Var(a) for a in self.args))

    def __str__(self) -> str:
        return render_atom(self.symbol, self.args, self.bound)

    def substitute(self, tau) -> "Rel":
        return Rel(self.symbol, tuple(substitute(a, tau) for a in self.args), self.bound)

    @property
    def terms(self) -> tuple:
        return self.args


@dataclass(frozen=True)
class Def:
    """A definedness claim ``↓term``."""

    term: Term

    def __str__(self) -> str:
        return f"def({self.term})"

    def substitute(self, tau) -> "Def":
        return Def(substitute(self.term, tau))

    @property
    def terms(self) -> tuple:
        return (self.term,)
