"""Finite Hom-sets, internal hom, tensor and the closed-monoidal adjunction."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations, product

from .domains import covers
from .horn.closure import Closure, Reason
from .horn.ops import reflect, saturation_closure
from .horn.theory import HornTheory
from .structures import Fact, Model, PreStructure, point_key, show_point

DEFAULT_GUARD = 10**6


class GuardExceeded(RuntimeError):
    """An enumeration would exceed the configured size guard."""


def get_guard(guard: int | None = None) -> int:
    if guard is not None:
        return guard
    env = os.environ.get("RELAT_GUARD")
    if env:
        try:
            return int(env)
        except ValueError:
            raise GuardExceeded(f"RELAT_GUARD is not an integer: {env!r}") from None
    return DEFAULT_GUARD


@dataclass(frozen=True, eq=False)
class Morphism:
    """A carrier map; ``images`` is aligned with ``source.carrier``."""

    source: PreStructure
    target: PreStructure
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "_map", dict(zip(self.source.carrier, self.images)))

    @classmethod
    def from_map(cls, source, target, mapping) -> "Morphism":
        return cls(source, target, tuple(mapping[p] for p in source.carrier))

    def __call__(self, p):
        return self._map[p]

    @property
    def mapping(self) -> dict:
        return dict(self._map)

    def __eq__(self, other):
        return isinstance(other, Morphism) and self.images == other.images and \
            self.source == other.source and self.target == other.target

    def __hash__(self):
        return hash(self.images)

    def is_valid(self) -> bool:
        return preserves(self.source, self.target, self._map)

    def __repr__(self) -> str:
        body = ", ".join(f"{show_point(a)}->{show_point(b)}" for a, b in zip(self.source.carrier, self.images))
        return f"Morphism({body})"


def preserves(X: PreStructure, Y: PreStructure, mapping) -> bool:
    for f in X.facts:
        if not Y.covers(f.symbol, tuple(mapping[a] for a in f.args), f.bound):
            return False
    return True


def compose(g: Morphism, f: Morphism) -> Morphism:
    return Morphism(f.source, g.target, tuple(g(f(p)) for p in f.source.carrier))


def identity(X: PreStructure) -> Morphism:
    return Morphism(X, X, X.carrier)


def iter_maps(X: PreStructure, Y: PreStructure, guard: int | None = None, fixed=None):
    """Relation-preserving maps ``X -> Y`` as image tuples, lexicographically.

    The guard bounds the number of partial assignments the backtracking
    search tries, so sparse hom-sets over large naive spaces stay cheap.
    """
    limit = get_guard(guard)
    budget = [limit]
    pts = X.carrier
    pos = {p: i for i, p in enumerate(pts)}
    checks = [[] for _ in pts]
    for f in X.facts:
        if f.args:
            checks[max(pos[a] for a in f.args)].append(f)
    targets = Y.carrier
    fixed = fixed or {}
    assign: dict = {}

    def rec(i):
        if i == len(pts):
            yield tuple(assign[p] for p in pts)
            return
        p = pts[i]
        options = (fixed[p],) if p in fixed else targets
        for t in options:
            budget[0] -= 1
            if budget[0] < 0:
                raise GuardExceeded(f"map enumeration {show_point(X.carrier)} -> {show_point(Y.carrier)} "
                                    f"tried more than {limit} partial assignments")
            assign[p] = t
            if all(Y.covers(f.symbol, tuple(assign[a] for a in f.args), f.bound) for f in checks[i]):
                yield from rec(i + 1)
        assign.pop(p, None)

    yield from rec(0)


def morphisms(X: PreStructure, Y: PreStructure, guard: int | None = None) -> list[Morphism]:
    return [Morphism(X, Y, imgs) for imgs in iter_maps(X, Y, guard)]


def is_embedding(m: Morphism) -> bool:
    if len(set(m.images)) != len(m.images):
        return False
    X, Y = m.source, m.target
    inv = {b: a for a, b in zip(X.carrier, m.images)}
    for f in Y.facts:
        if all(a in inv for a in f.args):
            if not X.covers(f.symbol, tuple(inv[a] for a in f.args), f.bound):
                return False
    return True


def _relations(theory, *structs):
    """(name, arity, domain) for every relation to be computed on a hom/product."""
    if theory is not None:
        return [(r.name, r.arity, r.domain) for r in theory.relations]
    seen = {}
    for s in structs:
        for f in s.facts:
            dom = None if f.bound is None else f.bound.domain
            seen.setdefault(f.symbol, (f.symbol, len(f.args), dom))
    return [seen[k] for k in sorted(seen)]


def internal_hom(X: PreStructure, Y: PreStructure, theory: HornTheory | None = None,
                 guard: int | None = None) -> PreStructure:
    """``[X, Y]``: relation-preserving maps with the pointwise structure.

    Points of the result are image tuples aligned with ``X.carrier``.  The
    relation list comes from ``theory`` (or ``Y.theory`` for a model); without
    either it is read off the edges present in ``Y``.
    """
    theory = theory or getattr(Y, "theory", None)
    maps = list(iter_maps(X, Y, guard))
    rels = _relations(theory, X, Y)
    facts = []
    npts = len(X.carrier)
    for name, arity, dom in rels:
        if len(maps) ** arity > get_guard(guard) * 10:
            raise GuardExceeded(f"{len(maps)}^{arity} hom tuples exceed the guard")
        for tup in product(maps, repeat=arity):
            if dom is None:
                if all(Y.covers(name, tuple(f[i] for f in tup)) for i in range(npts)):
                    facts.append(Fact(name, tup, None))
                continue
            gens = (dom.bottom(),)
            for i in range(npts):
                gens = dom.intersect(gens, Y.gens(name, tuple(f[i] for f in tup)))
                if not gens:
                    break
            for g in gens:
                facts.append(Fact(name, tup, g))
    out = PreStructure(maps, facts)
    if isinstance(Y, Model):
        return Model.trusted(out, Y.theory)
    return out


def evaluate_at(X: PreStructure, point, x):
    """Apply an internal-hom point (image tuple) to ``x``."""
    return point[X.carrier.index(x)]


def tensor(X: PreStructure, Y: PreStructure) -> PreStructure:
    """Edges that vary in one coordinate while the other stays constant."""
    carrier = [(x, y) for x in X.carrier for y in Y.carrier]
    facts = []
    for f in X.facts:
        for y in Y.carrier:
            facts.append(Fact(f.symbol, tuple((a, y) for a in f.args), f.bound))
    for f in Y.facts:
        for x in X.carrier:
            facts.append(Fact(f.symbol, tuple((x, b) for b in f.args), f.bound))
    return PreStructure(carrier, facts)


def manhattan(theory: HornTheory, X: PreStructure, Y: PreStructure) -> Model:
    return reflect(theory, tensor(X, Y))[0]


def find_isomorphism(X: PreStructure, Y: PreStructure) -> dict | None:
    """A bijection mapping the edges of X exactly onto those of Y, if any."""
    if len(X.carrier) != len(Y.carrier) or len(X.facts) != len(Y.facts):
        return None

    def profile(S, p):
        return tuple(sorted((f.symbol, tuple(i for i, a in enumerate(f.args) if a == p), str(f.bound))
                            for f in S.facts if p in f.args))

    px = {p: profile(X, p) for p in X.carrier}
    py = {p: profile(Y, p) for p in Y.carrier}
    if sorted(px.values()) != sorted(py.values()):
        return None
    pts = X.carrier
    assign: dict = {}
    used: set = set()

    def consistent():
        for f in X.facts:
            if all(a in assign for a in f.args):
                gens = Y.gens(f.symbol, tuple(assign[a] for a in f.args))
                if f.bound not in gens:
                    return False
        return True

    def rec(i):
        if i == len(pts):
            return True
        p = pts[i]
        for t in Y.carrier:
            if t in used or px[p] != py[t]:
                continue
            assign[p] = t
            used.add(t)
            if consistent() and rec(i + 1):
                return True
            used.discard(t)
            del assign[p]
        return False

    if rec(0):
        return dict(assign)
    return None


# ---------------------------------------------------------------------------
# adjunction


@dataclass
class AdjunctionReport:
    hom_curried: int  # |Hom(Y, [X, Z])|
    hom_uncurried: int  # |Hom(R(Y (x) X), Z)|
    bijective: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.bijective and not self.failures


def check_tensor_hom_adjunction(theory: HornTheory, X: PreStructure, Y: PreStructure, Z: PreStructure,
                                guard: int | None = None) -> AdjunctionReport:
    """Verify ``g -> g#`` with ``g#(y, x) = g(y)(x)`` is a bijection of Hom-sets."""
    hom_xz = internal_hom(X, Z, theory, guard)
    curried = morphisms(Y, hom_xz, guard)
    t = tensor(Y, X)
    R, q = reflect(theory, t)
    uncurried = morphisms(R, Z, guard)
    failures = []
    xi = {x: i for i, x in enumerate(X.carrier)}

    def sharp(g: Morphism):
        out = {}
        for (y, x) in t.carrier:
            v = g(y)[xi[x]]
            r = q[(y, x)]
            if r in out and out[r] != v:
                return None
            out[r] = v
        m = Morphism.from_map(R, Z, out)
        return m if m.is_valid() else None

    def flat(h: Morphism):
        out = {}
        for y in Y.carrier:
            out[y] = tuple(h(q[(y, x)]) for x in X.carrier)
        if any(v not in set(hom_xz.carrier) for v in out.values()):
            return None
        m = Morphism.from_map(Y, hom_xz, out)
        return m if m.is_valid() else None

    images = set()
    for g in curried:
        s = sharp(g)
        if s is None:
            failures.append(("sharp undefined", g))
            continue
        images.add(s.images)
        back = flat(s)
        if back is None or back.images != g.images:
            failures.append(("roundtrip g", g))
    for h in uncurried:
        b = flat(h)
        if b is None:
            failures.append(("flat undefined", h))
            continue
        s = sharp(b)
        if s is None or s.images != h.images:
            failures.append(("roundtrip h", h))
    bijective = len(images) == len(curried) == len(uncurried) and not failures
    return AdjunctionReport(len(curried), len(uncurried), bijective, failures)


# ---------------------------------------------------------------------------
# generatedness


@dataclass(frozen=True)
class GeneratednessWitness:
    generating_edges: tuple
    bound: int


def is_generated_by(theory: HornTheory, X: PreStructure, edges) -> bool:
    facts = [e.fact() if hasattr(e, "fact") else Fact(*e) for e in edges]
    for f in facts:
        if not X.covers(f.symbol, f.args, f.bound):
            return False
    cl = saturation_closure(theory, PreStructure(X.carrier, facts))
    return all(cl.holds(f.symbol, f.args, f.bound) for f in X.facts)


def find_generating_subset(theory: HornTheory, X: PreStructure, size_bound: int) -> GeneratednessWitness | None:
    """Smallest generating subset of at most ``size_bound`` edges (exhaustive search)."""
    empty = saturation_closure(theory, PreStructure(X.carrier, ()))
    pool = sorted((f for f in X.facts if not empty.holds(f.symbol, f.args, f.bound)), key=Fact.sort_key)
    for k in range(0, min(size_bound, len(pool)) + 1):
        for subset in combinations(pool, k):
            if is_generated_by(theory, X, subset):
                return GeneratednessWitness(tuple(subset), k)
    return None


def presentation(theory: HornTheory, X: PreStructure) -> tuple:
    """A small generating edge set (greedy: drop edges entailed by the rest)."""
    facts = sorted(X.facts, key=Fact.sort_key)
    keep = list(facts)
    for f in facts:
        trial = [g for g in keep if g != f]
        if is_generated_by(theory, X, trial):
            keep = trial
    return tuple(keep)


# ---------------------------------------------------------------------------
# enriched functors


@dataclass
class Functor:
    """An object map and a morphism action (``mor`` takes and returns ``Morphism``)."""

    obj: object
    mor: object


@dataclass
class EnrichmentReport:
    ok: bool
    functorial: bool
    checked_edges: int
    violations: list = field(default_factory=list)


def check_enriched(F: Functor, samples, theory: HornTheory | None = None, guard: int | None = None) -> EnrichmentReport:
    """Check that ``F`` maps edges of ``[X, Y]`` to edges of ``[FX, FY]`` for sample pairs."""
    violations = []
    functorial = True
    checked = 0
    objs = {}
    for X in samples:
        objs[X] = F.obj(X)
    for X in samples:
        FX = objs[X]
        fid = F.mor(identity(X))
        if fid.images != identity(FX).images:
            functorial = False
            violations.append(("identity", X))
    for X, Y in product(samples, repeat=2):
        FX, FY = objs[X], objs[Y]
        hom = internal_hom(X, Y, theory, guard)
        image = {}
        for p in hom.carrier:
            image[p] = F.mor(Morphism(X, Y, p))
        for f in hom.facts:
            checked += 1
            args = [image[p] for p in f.args]
            for i, fx in enumerate(FX.carrier):
                if not FY.covers(f.symbol, tuple(a.images[i] for a in args), f.bound):
                    violations.append(("edge", X, Y, f))
                    break
        for Z in samples:
            for f in hom.carrier:
                for g in morphisms(Y, Z, guard):
                    fm, gm = Morphism(X, Y, f), g
                    lhs = F.mor(compose(gm, fm))
                    rhs = compose(F.mor(gm), image[f])
                    if lhs.images != rhs.images:
                        functorial = False
                        violations.append(("composition", X, Y, Z))
    return EnrichmentReport(not violations, functorial, checked, violations)
