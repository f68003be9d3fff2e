import json
import shutil
import subprocess
from importlib import resources

import pytest

jsonschema = pytest.importorskip("jsonschema")

from relat.cli import main

SCHEMA = json.loads(resources.files("relat.cli").joinpath("schema.json").read_text())
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@pytest.fixture
def run(fixtures_dir, monkeypatch, capsys):
    monkeypatch.chdir(fixtures_dir)

    def go(*argv):
        code = main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err

    return go


def run_json(run, *argv):
    code, out, err = run(*argv, "--json")
    doc = json.loads(out)
    VALIDATOR.validate(doc)
    return code, doc


CASES = [
    (("reflect", "--theory", "pos", "--structure", "cycle.rs"), 0),
    (("reflect", "--theory", "pos.rt", "--structure", "chain2.rs"), 0),
    (("saturate", "--theory", "met", "--structure", "cauchy.rs"), 0),
    (("saturate", "--variety", "semilattice.rv", "--context", "discrete2.rs", "--depth", "2"), 0),
    (("derive", "--variety", "semilattice.rv", "--context", "chain2.rs", "--goal", "le(join{x->x,y->y}, y)"), 0),
    (("derive", "--variety", "semilattice.rv", "--context", "discrete2.rs", "--goal", "le(join(x, y), y)"), 1),
    (("derive", "--variety", "met_join.rv", "--context", "pair.rs", "--goal", "c(x, y) = c(y, x)"), 0),
    (("free", "--variety", "semilattice.rv", "--context", "discrete2.rs"), 0),
    (("check-model", "--theory", "pos", "--structure", "cycle.rs"), 1),
    (("check-model", "--theory", "pos", "--structure", "chain2.rs"), 1),
    (("check-model", "--theory", "pos", "--structure", "chain2_model.rs"), 0),
    (("check-algebra", "--variety", "semilattice.rv", "--algebra", "chain.ra"), 0),
    (("check-algebra", "--variety", "semilattice.rv", "--algebra", "broken.ra"), 1),
    (("hom", "--theory", "pos", "chain2.rs", "discrete2.rs"), 0),
    (("tensor", "--theory", "met", "a.rs", "b.rs"), 0),
    (("monad-laws", "--variety", "semilattice.rv", "--objects", "point.rs", "discrete2.rs"), 0),
    (("extract", "--variety", "semilattice.rv", "--arity", "point.rs"), 0),
    (("roundtrip", "--variety", "semilattice.rv", "--arity", "point.rs", "--carrier-bound", "2"), 0),
    (("fuzz-proofs", "--count", "40"), 0),
]


@pytest.mark.parametrize("argv, code", CASES, ids=[" ".join(a[:1] + a[-1:]) for a, _ in CASES])
def test_commands_exit_codes_and_schema(run, argv, code):
    got, doc = run_json(run, *argv)
    assert got == code
    assert doc["command"] == argv[0]
    got_text, out, _ = run(*argv)
    assert got_text == code and out.strip()


def test_tensor_reports_manhattan_distances(run):
    code, out, _ = run("tensor", "--theory", "met", "a.rs", "b.rs")
    assert code == 0
    for d in ("1/4", "1/2", "3/4"):
        assert f"eq[{d}]" in out


def test_output_is_deterministic(run):
    argv = ("derive", "--variety", "met_join.rv", "--context", "pair.rs", "--goal", "c(x, y) = c(y, x)", "--json")
    first = run(*argv)[1]
    second = run(*argv)[1]
    assert first == second


def test_derive_proof_file_checks(run, tmp_path):
    proof = tmp_path / "p.json"
    code, _, _ = run("derive", "--variety", "semilattice.rv", "--context", "chain2.rs",
                     "--goal", "le(join{x->x,y->y}, y)", "--proof", str(proof))
    assert code == 0
    VALIDATOR.validate(json.loads(proof.read_text()))
    code, out, _ = run("check-proof", "--variety", "semilattice.rv", "--proof", str(proof))
    assert code == 0
    # flip the conclusion of the root node: the checker must refuse it
    doc = json.loads(proof.read_text())
    root = doc["nodes"][doc["root"]]
    root["claim"]["args"].reverse()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run("check-proof", "--variety", "semilattice.rv", "--proof", str(bad))
    assert code == 1
    bad.write_text("{\"schema_version\": 1, \"nodes\": 3}")
    code, out, _ = run("check-proof", "--variety", "semilattice.rv", "--proof", str(bad))
    assert code == 1 and "does not decode" in out
    bad.write_text("not json")
    code, _, err = run("check-proof", "--variety", "semilattice.rv", "--proof", str(bad))
    assert code == 2 and "not JSON" in err


def test_cauchy_focused_derivation(run):
    ok = run("derive", "--variety", "cauchy.rv", "--context", "cauchy.rs", "--focus", "--depth", "2",
             "--goal", "eq[1/4](lim(x1, x2, x3, x4, x5, x6, x7, x8), x5)")
    assert ok[0] == 0
    no = run("derive", "--variety", "cauchy.rv", "--context", "cauchy.rs", "--focus", "--depth", "2",
             "--goal", "eq[1/8](lim(x1, x2, x3, x4, x5, x6, x7, x8), x2)")
    assert no[0] == 1


@pytest.mark.parametrize("argv", [
    ("reflect", "--theory", "pos", "--structure", "bad_point.rs"),
    ("reflect", "--theory", "met", "--structure", "bad_range.rs"),
    ("reflect", "--theory", "pos", "--structure", "missing.rs"),
    ("derive", "--variety", "semilattice.rv", "--context", "chain2.rs", "--goal", "le(x, meet(x, y))"),
    ("reflect", "--theory", "nosuch", "--structure", "chain2.rs"),
])
def test_usage_and_parse_errors_exit_2(run, argv):
    code, _, err = run(*argv)
    assert code == 2 and err.startswith("relat:")


def test_parse_error_position(run):
    _, _, err = run("reflect", "--theory", "pos", "--structure", "bad_point.rs")
    assert "bad_point.rs:3:11:" in err


def test_guard_exceeded_is_a_negative_answer(run):
    code, _, err = run("hom", "--theory", "met", "--guard", "3", "cauchy.rs", "cauchy.rs")
    assert code == 1 and "guard" in err.lower()


def test_unstable_free_algebra(run):
    code, doc = run_json(run, "free", "--variety", "unary.rv", "--context", "single.rs", "--depth", "2")
    assert code == 1 and doc["stabilized"] is False


@pytest.mark.skipif(shutil.which("relat") is None, reason="console script not installed")
def test_console_script(fixtures_dir):
    p = subprocess.run(["relat", "check-model", "--theory", "pos", "--structure", "chain2_model.rs"],
                       cwd=fixtures_dir, capture_output=True, text=True)
    assert p.returncode == 0
    p = subprocess.run(["relat", "--version"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("relat ")
