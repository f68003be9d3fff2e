import copy
import random
from functools import lru_cache

from hypothesis import given, settings, strategies as st

from relat.cli.serial import SerialError, proof_from_json, proof_to_json
from relat.fuzz import MUTATIONS, applicable, corrupt_node, default_fixtures, fuzz, mutate, replace_node
from relat.logic import saturate_judgements
from relat.proofs import proof_error

FIXTURES = default_fixtures()
BANKS = [saturate_judgements(f.variety, f.context, f.depth) for f in FIXTURES]


@lru_cache(maxsize=None)
def proofs_of(i):
    bank = BANKS[i]
    return tuple(bank.prove(j) for j in bank.judgements())


def test_fuzz_report_small():
    rep = fuzz(150, seed=3)
    assert rep.ok and rep.proofs > 0 and rep.mutants == rep.proofs
    assert set(rep.kinds) <= set(MUTATIONS)


def test_every_mutation_kind_is_rejected():
    seen = set()
    for i, fx in enumerate(FIXTURES):
        for p in proofs_of(i)[:60]:
            for node in p.nodes():
                for kind in applicable(node):
                    m = replace_node(p, node, corrupt_node(node, kind))
                    assert proof_error(m, fx.variety) is not None, (fx.name, kind, str(p.claim))
                    seen.add(kind)
    assert seen == set(MUTATIONS)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(FIXTURES) - 1), st.randoms(use_true_random=False))
def test_json_roundtrip_preserves_validity(i, rng):
    fx = FIXTURES[i]
    p = rng.choice(proofs_of(i))
    q = proof_from_json(proof_to_json(p, fx.variety), fx.variety)
    assert q.claim == p.claim and proof_error(q, fx.variety) is None
    m, kind, _ = mutate(p, rng)
    try:
        back = proof_from_json(proof_to_json(m, fx.variety), fx.variety)
    except SerialError:
        return  # a forged point does not even decode against the stored context
    assert proof_error(back, fx.variety) is not None, kind


def _json_mutants(doc, rng):
    """Edits on the serialized document; each breaks the proof or the document."""
    nodes = doc["nodes"]
    k = rng.randrange(len(nodes))
    out = []
    d = copy.deepcopy(doc)
    d["nodes"][k]["rule"] = "Bogus"
    out.append(("rule", d))
    if nodes[k]["premises"]:
        d = copy.deepcopy(doc)
        d["nodes"][k]["premises"].pop()
        out.append(("premise", d))
        d = copy.deepcopy(doc)
        d["nodes"][k]["premises"][0] = len(nodes) + 5
        out.append(("dangling", d))
    d = copy.deepcopy(doc)
    d["nodes"][k]["claim"] = {"kind": "rel", "symbol": "nosuch", "args": [], "bound": None}
    out.append(("symbol", d))
    d = copy.deepcopy(doc)
    d["context"]["points"].append("stray")
    d["context"]["edges"].append({"symbol": "nosuch", "args": ["stray"], "bound": None})
    out.append(("context", d))
    d = copy.deepcopy(doc)
    d["schema_version"] = 99
    out.append(("version", d))
    return out


def test_json_level_mutations_rejected():
    rng = random.Random(11)
    count = 0
    for i, fx in enumerate(FIXTURES):
        for p in proofs_of(i)[:25]:
            doc = proof_to_json(p, fx.variety)
            for kind, bad in _json_mutants(doc, rng):
                count += 1
                try:
                    q = proof_from_json(bad, fx.variety)
                except SerialError:
                    continue
                assert proof_error(q, fx.variety) is not None, (fx.name, kind)
    assert count > 100
