import io
import json

import pytest

from invlogic.cli import SYNTH_NAMES, run
from invlogic.logic import parse_formula


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    text = buf.getvalue()
    # argparse rejects malformed command lines before any report is written
    return code, json.loads(text) if text else None


@pytest.fixture
def files(tmp_path):
    paths = {}

    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
        return str(p)

    write("dp3.fms", "vocab E/2\ndomain 3\nrel E: 0 1, 1 2\n")
    write("p2.fms", "vocab P/1\ndomain 2\nrel P: 0\n")
    call("gen", "ba", "--atoms", "2", "-o", str(tmp_path / "ba2.fms"))
    paths["ba2.fms"] = str(tmp_path / "ba2.fms")
    code, rep = call("synth", "even-le")
    write("even.fo", rep["formula"])
    paths["dir"] = str(tmp_path)
    return paths


def test_eval_directed_path(files):
    code, rep = call("eval", "-s", files["dp3.fms"], "-f", "exists x. forall y. !E(y,x)")
    assert code == 0 and rep["result"] is True
    assert rep["command"][0] == "eval"


def test_invariance_even_ba2(files):
    code, rep = call("invariance", "--scheme", "linear-order", "-s", files["ba2.fms"], "-f", "@" + files["even.fo"],
                     "--mode", "exhaustive")
    assert code == 0
    assert (rep["invariant"], rep["value"], rep["expansions"]) == (True, True, 24)
    assert rep["seed"] == 0


def test_gurevich_three_atoms():
    code, rep = call("gurevich", "--atoms", "3", "--mode", "exhaustive")
    assert code == 0
    assert rep["parity"] == "odd" and rep["value"] is False and rep["invariant"] is True


def test_invariant_eval(files):
    code, rep = call("invariant-eval", "--scheme", "linear-order", "-s", files["ba2.fms"], "-f", "@" + files["even.fo"])
    assert code == 0 and rep["result"] is True


def test_violation_exit_and_replay(files):
    f = "exists x. P(x) & forall y. LE(x,y)"
    code, rep = call("invariance", "--scheme", "linear-order", "-s", files["p2.fms"], "-f", f, "--expect-invariant")
    assert code == 1 and rep["invariant"] is False
    values = set()
    for exp in rep["counterexample"]:
        c, r = call("eval", "-s", files["p2.fms"], "-f", f, "--expansion", json.dumps(exp))
        assert c == 0
        values.add(r["result"])
    assert values == {True, False}


def test_violation_without_flag_exits_zero(files):
    code, rep = call("invariance", "--scheme", "linear-order", "-s", files["p2.fms"], "-f",
                     "exists x. P(x) & forall y. LE(x,y)")
    assert code == 0 and rep["invariant"] is False


def test_epsilon_violation_replay(files):
    f = "P(eps y. (y = y))"
    code, rep = call("invariance", "--scheme", "epsilon", "-s", files["p2.fms"], "-f", f, "--expect-invariant")
    assert code == 1
    values = set()
    for oracle in rep["counterexample"]:
        c, r = call("eval", "-s", files["p2.fms"], "-f", f, "--oracle", json.dumps(oracle))
        values.add(r["result"])
    assert values == {True, False}


def test_epsilon_full_mode(files):
    code, rep = call("invariance", "--scheme", "epsilon", "--mode", "full", "-s", files["p2.fms"], "-f",
                     "P(eps y. (P(y)))")
    assert code == 0 and rep["invariant"] and rep["value"] and rep["explored"] == 4


def test_usage_errors(files):
    assert call("eval", "-s", files["dp3.fms"], "-f", "exists x E(x,x)")[0] == 2
    assert call("eval", "-s", files["dir"] + "/missing.fms", "-f", "true")[0] == 2
    assert call("eval", "-s", files["dp3.fms"], "-f", "P(x)")[0] == 2
    assert call("invariance", "-s", files["dp3.fms"], "-f", "true", "--scheme", "no-such")[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("synth", "nothing")[0] == 2


def test_cap_exit(files):
    code, rep = call("invariance", "--scheme", "linear-order", "-s", files["ba2.fms"], "-f", "true", "--cap", "5")
    assert code == 3 and rep["error"] == "resource cap"


def test_reports_deterministic(files):
    argv = ["invariance", "--scheme", "linear-order", "-s", files["ba2.fms"], "-f", "@" + files["even.fo"],
            "--mode", "sampled", "--samples", "10", "--seed", "4"]
    _, a = call(*argv)
    _, b = call(*argv)
    a.pop("wall_time_s")
    b.pop("wall_time_s")
    assert a == b and a["seed"] == 4


def test_jobs_flag(files):
    argv = ["invariance", "--scheme", "local-order", "-s", files["ba2.fms"], "-f", "exists x, y, z. LO(x,y,z)"]
    _, a = call(*argv)
    _, b = call(*argv, "--jobs", "2")
    assert a["expansions"] == b["expansions"] and a["value"] == b["value"]


@pytest.mark.parametrize("name", [n for n in SYNTH_NAMES if n not in ("successor", "hanf-sentence", "eliminate",
                                                                       "epsilon-local")])
def test_synth_outputs_parse(name):
    extra = ["--vocab", "Sub/2"] if name in ("even-lo",) else []
    code, rep = call("synth", name, "--r", "1", *extra)
    assert code == 0
    parse_formula(rep["formula"])


def test_synth_successor_library():
    code, rep = call("synth", "successor", "--k", "2")
    assert code == 0
    assert {"phi1", "phi2_guard", "phi2", "identity_perm", "phi_guard", "phi_insertion"} <= set(rep["formulas"])


def test_synth_hanf_sentence(files):
    code, rep = call("synth", "hanf-sentence", "-s", files["dp3.fms"], "--realized", "--r", "1", "--t", "2")
    assert code == 0
    c, r = call("eval", "-s", files["dp3.fms"], "-f", rep["formula"])
    assert r["result"] is True


def test_synth_epsilon(files):
    code, rep = call("synth", "eliminate", "-f", "P(eps y. (P(y)))")
    assert code == 0 and "eps" not in rep["formula"]
    code, rep = call("synth", "epsilon-local", "-s", files["p2.fms"], "-f", "P(eps y. (P(y)))", "--r", "0")
    assert code == 0
    parse_formula(rep["formula"])


def test_hanf_iso_ef(files):
    p3 = files["dp3.fms"]
    code, rep = call("hanf", "-s", p3, "-s", p3, "--r", "1", "--t", "2")
    assert code == 0 and rep["equivalent"]
    code, rep = call("iso", "-s", p3, "-s", p3)
    assert rep["isomorphic"] and rep["mapping"] == [0, 1, 2]
    code, rep = call("ef", "-s", p3, "-s", p3, "-k", "2")
    assert rep["duplicator_wins"] and set(rep) >= {"rounds", "nodes_explored"}


def test_gen_kinds(files):
    code, rep = call("gen", "cycle", "--n", "6")
    assert code == 0 and rep["size"] == 6 and rep["structure"].count("\n") == 3
    code, rep = call("gen", "unary", "--counts", "P=2", "none=1")
    assert rep["size"] == 3
    code, rep = call("gen", "rand", "--n", "8", "--d", "2", "--seed", "7")
    again = call("gen", "rand", "--n", "8", "--d", "2", "--seed", "7")[1]
    assert rep["structure"] == again["structure"] and rep["seed"] == 7
    assert call("gen", "ba", "--atoms", "9")[0] == 2


def test_schemes_list():
    code, rep = call("schemes", "list")
    assert "linear-order" in rep["schemes"] and "epsilon" in rep["schemes"]


def test_experiment_command():
    code, rep = call("experiment", "prop5_11")
    assert code == 0 and rep["passed"]
    assert call("experiment", "nope")[0] == 2
    assert call("experiment", "prop5_11", "--param", "bogus=1")[0] == 2
