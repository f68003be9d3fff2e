"""Standard small varieties used by the fixtures, tests and CLI."""

from __future__ import annotations

from fractions import Fraction

from .algebra import OpSymbol, SigmaAlgebra, SigmaRelation, Variety
from .horn.ops import as_model, builtin_theory, close, metric_to_structure
from .structures import Fact, Model
from .terms import App, Rel, Var, app


def pos_model(points, edges=()) -> Model:
    """The pos model generated by ``le`` edges (reflexive-transitive closure)."""
    return close(builtin_theory("pos"), points, [Fact("le", e) for e in edges])


def met_space(points, dist: dict) -> Model:
    """A metric model from a sparse distance table ``{(a, b): d}``; unlisted pairs are at 1."""
    pts = list(points)
    n = len(pts)
    d = [[Fraction(0) if i == j else Fraction(1) for j in range(n)] for i in range(n)]
    for (a, b), v in dist.items():
        i, j = pts.index(a), pts.index(b)
        d[i][j] = d[j][i] = Fraction(v)
    return as_model(builtin_theory("met"), metric_to_structure(pts, d))


def _dist(points, d: Fraction) -> Model:
    return met_space(points, {(points[0], points[1]): d}) if len(points) == 2 else met_space(points, {})


def empty_variety(theory_name: str = "pos") -> Variety:
    return Variety(builtin_theory(theory_name), (), (), name=f"empty-{theory_name}")


def semilattice() -> Variety:
    """Join-semilattices over posets: ``join`` is the least upper bound."""
    th = builtin_theory("pos")
    two = pos_model(["x", "y"])
    j = App("join", [("x", Var("x")), ("y", Var("y"))])
    upper = pos_model(["x", "y", "z"], [("x", "z"), ("y", "z")])
    axioms = (
        SigmaRelation(two, Rel("le", (Var("x"), j)), (), name="upper-left"),
        SigmaRelation(two, Rel("le", (Var("y"), j)), (), name="upper-right"),
        SigmaRelation(upper, Rel("le", (j, Var("z"))),
                      (Fact("le", ("x", "z")), Fact("le", ("y", "z"))), name="least"),
    )
    return Variety(th, (OpSymbol("join", two),), axioms, name="semilattice")


def met_join() -> Variety:
    """One binary operation ``c`` defined only on pairs at distance at most 1/2.

    Axioms: idempotence, commutativity and absorption ``c(x, c(x, y)) = c(x, y)``,
    equalities written with the ``eq[0]`` witness.
    """
    th = builtin_theory("met")
    half = Fraction(1, 2)
    ar = _dist(["a", "b"], half)
    zero = th.index_generator("eq", 0)

    def c(s, t):
        return App("c", [("a", s), ("b", t)])

    x, y = Var("x"), Var("y")
    one = _dist(["x"], half)
    pair = _dist(["x", "y"], half)
    gen = (Fact("eq", ("x", "y"), th.index_generator("eq", half)),)
    axioms = (
        SigmaRelation(one, Rel("eq", (c(x, x), x), zero), (), name="idem"),
        SigmaRelation(pair, Rel("eq", (c(x, y), c(y, x)), zero), gen, name="comm"),
        SigmaRelation(pair, Rel("eq", (c(x, c(x, y)), c(x, y)), zero), gen, name="absorb"),
    )
    return Variety(th, (OpSymbol("c", ar),), axioms, name="met-join")


def met_retract() -> Variety:
    """A unary ``s`` on metric spaces: idempotent and moving each point by at most 1/4."""
    th = builtin_theory("met")
    one = _dist(["x"], Fraction(1))
    x = Var("x")

    def s(t):
        return App("s", [("a", t)])

    axioms = (
        SigmaRelation(one, Rel("eq", (s(s(x)), s(x)), th.index_generator("eq", 0)), (), name="idem"),
        SigmaRelation(one, Rel("eq", (s(x), x), th.index_generator("eq", Fraction(1, 4))), (), name="near"),
    )
    return Variety(th, (OpSymbol("s", _dist(["a"], Fraction(1))),), axioms, name="met-retract")


def met_free_unary() -> Variety:
    """A unary operation ``s`` over metric spaces with no axioms (never stabilizes)."""
    th = builtin_theory("met")
    return Variety(th, (OpSymbol("s", _dist(["a"], Fraction(1))),), (), name="met-unary")


# ---------------------------------------------------------------------------
# Cauchy prefixes and a limit operation

CAUCHY_N = 8


def cauchy_points(n: int = CAUCHY_N) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


def cauchy_context(n: int = CAUCHY_N) -> Model:
    """``x_1..x_n`` with ``d(x_i, x_j) = |1/i - 1/j|``."""
    pts = cauchy_points(n)
    dist = {(pts[i], pts[j]): abs(Fraction(1, i + 1) - Fraction(1, j + 1))
            for i in range(n) for j in range(i + 1, n)}
    return met_space(pts, dist)


def cauchy_presentation(n: int = CAUCHY_N) -> tuple:
    """Consecutive distances generate the whole prefix (by the triangle rule)."""
    pts = cauchy_points(n)
    return tuple(Fact("eq", (pts[i], pts[i + 1]), builtin_theory("met").index_generator(
        "eq", Fraction(1, i + 1) - Fraction(1, i + 2))) for i in range(n - 1))


def lim_term(n: int = CAUCHY_N) -> App:
    return App("lim", [(p, Var(p)) for p in cauchy_points(n)])


def cauchy(n: int = CAUCHY_N) -> Variety:
    """``lim`` with arity the prefix and axioms ``lim =_{1/j} x_k`` for ``j <= k``."""
    th = builtin_theory("met")
    ctx = cauchy_context(n)
    pres = cauchy_presentation(n)
    lim = lim_term(n)
    pts = cauchy_points(n)
    axioms = []
    for k in range(1, n + 1):
        for j in range(1, k + 1):
            axioms.append(SigmaRelation(
                ctx, Rel("eq", (lim, Var(pts[k - 1])), th.index_generator("eq", Fraction(1, j))),
                pres, name=f"lim-{j}-{k}"))
    return Variety(th, (OpSymbol("lim", ctx),), tuple(axioms), name="cauchy")


class _ProjectionTable:
    """Operation table ``f -> f(last point)``; entries are computed on demand."""

    def __init__(self, index: int):
        self.index = index

    def get(self, key, default=None):
        return key[self.index]

    def items(self):
        return ()


def cauchy_countermodel(n: int = CAUCHY_N) -> SigmaAlgebra:
    """The prefix itself with ``lim(f) = f(x_n)``: an algebra of the variety.

    It satisfies every ``lim`` axiom, and at the identity assignment
    ``d(lim, x_2) = 1/2 - 1/n``, so no bound below that is derivable.
    """
    V = cauchy(n)
    A = SigmaAlgebra(V, cauchy_context(n), {}, check=False)
    A.tables = {"lim": _ProjectionTable(n - 1)}
    return A


__all__ = [
    "CAUCHY_N",
    "cauchy",
    "cauchy_context",
    "cauchy_countermodel",
    "cauchy_points",
    "empty_variety",
    "lim_term",
    "met_free_unary",
    "met_retract",
    "met_join",
    "met_space",
    "pos_model",
    "semilattice",
]
