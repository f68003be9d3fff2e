"""JSON proof documents.

A document embeds the context and lists proof nodes bottom-up; premises refer
to earlier node ids, so shared subproofs are written once.  Axioms are cited
by position (variety axioms, theory logic axioms) or by family (upward
closure, limit rules), which keeps documents independent of Python objects.
"""

from __future__ import annotations

import json

from ..domains import Bound, FiniteLattice, as_rational
from ..horn.ops import as_model
from ..horn.theory import HornAxiom, LimitRule
from ..proofs import Proof
from ..structures import Fact, PreStructure, show_point
from ..terms import App, Def, Rel, Var

SCHEMA_VERSION = 1


class SerialError(ValueError):
    """A proof document that does not decode against the given variety."""


# ---------------------------------------------------------------------------
# encoding


def point_json(p) -> str:
    return show_point(p)


def bound_json(b):
    return None if b is None else str(b)


def term_json(t):
    if isinstance(t, Var):
        return {"var": point_json(t.point)}
    return {"op": t.op, "args": [{"key": point_json(k), "term": term_json(s)} for k, s in t.args]}


def edge_json(f: Fact) -> dict:
    f = Fact(*f)
    return {"symbol": f.symbol, "args": [point_json(a) for a in f.args], "bound": bound_json(f.bound)}


def claim_json(c) -> dict:
    if isinstance(c, Def):
        return {"kind": "def", "term": term_json(c.term)}
    return {"kind": "rel", "symbol": c.symbol, "args": [term_json(a) for a in c.args], "bound": bound_json(c.bound)}


def context_json(X: PreStructure) -> dict:
    return {"points": [point_json(p) for p in X.carrier],
            "edges": [edge_json(f) for f in sorted(X.facts, key=Fact.sort_key)]}


def _meta_family(ax: HornAxiom, meta: str) -> str:
    for atom in ax.premises + (ax.conclusion,):
        if atom.index is not None and meta in atom.index.metas:
            return atom.symbol
    return ax.conclusion.symbol


def _axiom_ref(p: Proof, V) -> dict:
    ax = p.data.get("axiom")
    if p.rule in ("Ax", "I-Ar"):
        for i, a in enumerate(V.axioms):
            if a is ax or a == ax:
                return {"kind": "variety", "index": i, "name": a.name}
        return {"kind": "variety", "index": -1}
    if p.rule == "Up":
        return {"kind": "up", "family": p.claim.symbol}
    if isinstance(ax, LimitRule):
        return {"kind": "limit", "family": ax.family, "name": ax.name}
    for i, a in enumerate(V.theory.logic_axioms()):
        if a == ax:
            return {"kind": "horn", "index": i, "name": a.name}
    return {"kind": "horn", "index": -1}


def _data_json(p: Proof, V) -> dict:
    d = p.data
    r = p.rule
    if r == "Ctx":
        return {"edge": edge_json(d["edge"])}
    if r == "Up":
        return {"axiom": _axiom_ref(p, V)}
    if r == "Mor":
        return {"op": d["op"], "families": [[term_json(t) for t in fam] for fam in d["families"]]}
    if r == "E-Ar":
        return {"op": p.claim.term.op}
    if r in ("Ax", "I-Ar"):
        out = {"axiom": _axiom_ref(p, V),
               "subst": [{"point": point_json(k), "term": term_json(t)} for k, t in d["subst"]]}
        if r == "I-Ar":
            out["subterm"] = term_json(d["subterm"])
            out["edge"] = edge_json(d["edge"])
        return out
    if r == "RelAx":
        ax = d["axiom"]
        out = {"axiom": _axiom_ref(p, V),
               "subst": [{"var": v, "term": term_json(t)} for v, t in d.get("subst", ())]}
        metas = []
        for m, g in d.get("metas", ()):
            metas.append({"meta": m, "family": _meta_family(ax, m) if isinstance(ax, HornAxiom) else ax.family,
                          "bound": bound_json(g)})
        out["metas"] = metas
        return out
    return {}


def proof_to_json(p: Proof, V, source: dict | None = None) -> dict:
    ids: dict = {}
    nodes = []

    def visit(root):
        stack = [(root, False)]
        while stack:
            q, ready = stack.pop()
            if id(q) in ids:
                continue
            if not ready:
                stack.append((q, True))
                for s in reversed(q.premises):
                    if id(s) not in ids:
                        stack.append((s, False))
                continue
            ids[id(q)] = len(nodes)
            nodes.append({"id": len(nodes), "rule": q.rule, "claim": claim_json(q.claim),
                          "premises": [ids[id(s)] for s in q.premises], "data": _data_json(q, V)})

    visit(p)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "proof", "variety": V.name,
           "context": context_json(p.context), "root": ids[id(p)], "nodes": nodes}
    if source:
        doc["source"] = dict(source)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# decoding


class _Decoder:
    def __init__(self, V, ctx: PreStructure):
        self.V = V
        self.ctx = ctx
        self.points = {point_json(p): p for p in ctx.carrier}

    def point(self, s):
        if s not in self.points:
            raise SerialError(f"unknown context point {s!r}")
        return self.points[s]

    def bound(self, symbol: str, text):
        th = self.V.theory
        if text is None:
            return None
        if not th.has_relation(symbol):
            raise SerialError(f"unknown relation {symbol!r}")
        dom = th.relation(symbol).domain
        if dom is None:
            raise SerialError(f"relation {symbol} takes no index")
        return decode_bound(dom, text)

    def term(self, j):
        if not isinstance(j, dict):
            raise SerialError("a term is an object")
        if "var" in j:
            return Var(self.point(j["var"]))
        op = j.get("op")
        if op not in self.V.ops:
            raise SerialError(f"unknown operation {op!r}")
        keys = {point_json(k): k for k in self.V.ops[op].arity.carrier}
        args = []
        for a in j.get("args", ()):
            if a.get("key") not in keys:
                raise SerialError(f"{a.get('key')!r} is not a point of the arity of {op}")
            args.append((keys[a["key"]], self.term(a["term"])))
        return App(op, args)

    def edge(self, j, points=None) -> Fact:
        pts = points or self.points
        args = []
        for a in j["args"]:
            if a not in pts:
                raise SerialError(f"unknown point {a!r} in edge")
            args.append(pts[a])
        return Fact(j["symbol"], tuple(args), self.bound(j["symbol"], j.get("bound")))

    def claim(self, j):
        if j.get("kind") == "def":
            return Def(self.term(j["term"]))
        if j.get("kind") != "rel":
            raise SerialError("claim kind must be rel or def")
        return Rel(j["symbol"], tuple(self.term(a) for a in j["args"]), self.bound(j["symbol"], j.get("bound")))

    def axiom(self, ref, rule):
        kind = ref.get("kind")
        th = self.V.theory
        if kind == "variety":
            i = ref.get("index")
            if not isinstance(i, int) or not 0 <= i < len(self.V.axioms):
                raise SerialError(f"no variety axiom {i}")
            return self.V.axioms[i]
        if kind == "horn":
            axs = th.logic_axioms()
            i = ref.get("index")
            if not isinstance(i, int) or not 0 <= i < len(axs):
                raise SerialError(f"no theory axiom {i}")
            return axs[i]
        if kind == "up":
            try:
                return th.up_axiom(ref.get("family"))
            except Exception as exc:
                raise SerialError(str(exc)) from None
        if kind == "limit":
            lr = th.limit_rule(ref.get("family"))
            if lr is None:
                raise SerialError(f"no limit rule for {ref.get('family')!r}")
            return lr
        raise SerialError(f"unknown axiom reference {kind!r}")

    def data(self, rule, j, claim):
        if rule == "Ctx":
            return {"edge": self.edge(j["edge"])}
        if rule == "Up":
            return {"axiom": self.axiom(j["axiom"], rule)}
        if rule == "Mor":
            return {"op": j["op"], "families": tuple(tuple(self.term(t) for t in fam) for fam in j["families"])}
        if rule == "E-Ar":
            return {"op": j.get("op")}
        if rule in ("Ax", "I-Ar"):
            ax = self.axiom(j["axiom"], rule)
            cpts = {point_json(p): p for p in ax.context.carrier}
            subst = []
            for s in j["subst"]:
                if s["point"] not in cpts:
                    raise SerialError(f"{s['point']!r} is not a point of the axiom context")
                subst.append((cpts[s["point"]], self.term(s["term"])))
            out = {"axiom": ax, "subst": tuple(subst)}
            if rule == "I-Ar":
                s = _PatternDecoder(self.V, cpts).term(j["subterm"])
                out["subterm"] = s
                arity_pts = {point_json(p): p for p in self.V.ops[s.op].arity.carrier} if isinstance(s, App) else {}
                out["edge"] = self.edge(j["edge"], arity_pts)
            return out
        if rule == "RelAx":
            ax = self.axiom(j["axiom"], rule)
            subst = tuple((s["var"], self.term(s["term"])) for s in j.get("subst", ()))
            metas = tuple((m["meta"], self.bound(m["family"], m["bound"])) for m in j.get("metas", ()))
            return {"axiom": ax, "subst": subst, "metas": metas}
        return {}


class _PatternDecoder(_Decoder):
    """Terms over an axiom context (for the I-Ar subterm)."""

    def __init__(self, V, points: dict):
        self.V = V
        self.points = points


def decode_bound(dom, text: str):
    if isinstance(dom, FiniteLattice):
        return dom.principal(text)
    text = str(text)
    closed = not text.startswith(">")
    return Bound(as_rational(text.lstrip(">")), closed)


def context_from_json(j, theory) -> PreStructure:
    pts = list(j["points"])
    facts = []
    for e in j["edges"]:
        b = e.get("bound")
        dom = theory.relation(e["symbol"]).domain if theory.has_relation(e["symbol"]) else None
        if b is not None and dom is None:
            raise SerialError(f"edge {e['symbol']} carries an index")
        facts.append(Fact(e["symbol"], tuple(e["args"]), None if b is None else decode_bound(dom, b)))
    return as_model(theory, PreStructure(pts, facts))


def proof_from_json(doc: dict, V) -> Proof:
    """Rebuild a proof; raises SerialError on anything that does not decode."""
    try:
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SerialError(f"unsupported schema_version {doc.get('schema_version')!r}")
        ctx = context_from_json(doc["context"], V.theory)
        dec = _Decoder(V, ctx)
        built: dict = {}
        for n in doc["nodes"]:
            nid = n["id"]
            if nid in built:
                raise SerialError(f"node id {nid} repeated")
            prem = []
            for i in n["premises"]:
                if i not in built:
                    raise SerialError(f"node {nid} cites undefined premise {i}")
                prem.append(built[i])
            claim = dec.claim(n["claim"])
            built[nid] = Proof(ctx, claim, n["rule"], dec.data(n["rule"], n.get("data", {}), claim), prem)
        root = doc["root"]
        if root not in built:
            raise SerialError("root node is missing")
        return built[root]
    except SerialError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SerialError(f"malformed proof document ({exc.__class__.__name__}: {exc})") from None
