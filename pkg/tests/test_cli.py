import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from cubeslice import jsonio
from cubeslice.cli import EXIT_ERROR, EXIT_FALSE, EXIT_OK, main
from cubeslice.cube_core import Hyperplane, HyperplaneFamily, find_unsliced_edge


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return _write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


AXIS3 = {"n": 3, "planes": [{"normal": ["1", "0", "0"], "mu": "0"},
                            {"normal": ["0", "1", "0"], "mu": "0"},
                            {"normal": ["0", "0", "1"], "mu": "0"}]}
EMPTY1 = {"n": 1, "planes": []}
# three level sets of x1 + x2 cover the square; every normal is skew
COVER2 = {"n": 2, "planes": [{"normal": [1, 1], "mu": 0}, {"normal": [1, 1], "mu": 2},
                             {"normal": [1, 1], "mu": -2}]}


# verify and find-unsliced


def test_verify_axis(write, capsys):
    code, rep, _ = run(["verify", "--family", write("a.json", AXIS3)], capsys)
    assert code == EXIT_OK
    assert rep["slices_all_edges"] is True
    assert rep["schema"] == jsonio.SCHEMA_VERSION and rep["command"] == "verify"


def test_verify_empty_n1(write, capsys):
    code, rep, _ = run(["verify", "--family", write("e.json", EMPTY1)], capsys)
    assert code == EXIT_FALSE
    assert rep["witness"] == {"base": [-1], "direction": 0}
    assert rep["unsliced_edges"] == 1


def test_find_unsliced(write, capsys):
    code, rep, _ = run(["find-unsliced", "--family", write("e.json", EMPTY1)], capsys)
    assert code == EXIT_OK and rep["edge"]["direction"] == 0
    code, rep, _ = run(["find-unsliced", "--family", write("a.json", AXIS3)], capsys)
    assert code == EXIT_FALSE and rep["edge"] is None


def test_out_file(write, tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["verify", "--family", write("a.json", AXIS3), "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    text = out.read_text()
    assert text.endswith("\n") and json.loads(text)["slices_all_edges"]


# error paths


def test_malformed_json(write, capsys):
    code, _, err = run(["verify", "--family", write("bad.json", "{not json")], capsys)
    assert code == EXIT_ERROR
    assert err.startswith("error: malformed input:")


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["verify", "--family", str(tmp_path / "nope.json")], capsys)
    assert code == EXIT_ERROR and "malformed input" in err


def test_dimension_mismatch(write, capsys):
    fam = {"n": 3, "planes": [{"normal": [1, 1], "mu": 0}]}
    code, _, err = run(["verify", "--family", write("d.json", fam)], capsys)
    assert code == EXIT_ERROR
    assert err.startswith("error: dimension mismatch:")


def test_guard_exceeded(write, capsys):
    code, _, err = run(["verify", "--family", write("a.json", AXIS3), "--guard", "2"], capsys)
    assert code == EXIT_ERROR
    assert err.startswith("error: guard exceeded:")


def test_bad_rational(write, capsys):
    fam = {"n": 1, "planes": [{"normal": ["1/0"], "mu": 0}]}
    code, _, err = run(["verify", "--family", write("r.json", fam)], capsys)
    assert code == EXIT_ERROR and "malformed input" in err
    fam = {"n": 1, "planes": [{"normal": [True], "mu": 0}]}
    code, _, err = run(["verify", "--family", write("b.json", fam)], capsys)
    assert code == EXIT_ERROR and "malformed input" in err


def test_distinct_error_messages(write, capsys):
    seen = set()
    for argv in (["verify", "--family", write("m.json", "[")],
                 ["verify", "--family", write("d.json", {"n": 2, "planes": [{"normal": [1]}]})],
                 ["verify", "--family", write("a.json", AXIS3), "--guard", "1"],
                 ["cover-to-slice", "--family", write("a.json", AXIS3)]):
        code, _, err = run(argv, capsys)
        assert code == EXIT_ERROR
        seen.add(err.split(":")[1].strip())
    assert seen == {"malformed input", "dimension mismatch", "guard exceeded", "not skew"}


# cover-to-slice


def test_cover_to_slice(write, capsys):
    code, rep, _ = run(["cover-to-slice", "--family", write("c.json", COVER2)], capsys)
    assert code == EXIT_OK
    assert rep["covering"] and rep["slices_all_edges"]
    S = jsonio.family_from_json(rep["family"])
    assert len(S) == 6 and find_unsliced_edge(S) is None


def test_cover_to_slice_not_covering(write, capsys):
    fam = {"n": 2, "planes": [{"normal": [1, 1], "mu": 0}]}
    code, rep, _ = run(["cover-to-slice", "--family", write("c.json", fam)], capsys)
    assert code == EXIT_FALSE and rep["covering"] is False


def test_cover_to_slice_not_skew(write, capsys):
    code, _, err = run(["cover-to-slice", "--family", write("a.json", AXIS3)], capsys)
    assert code == EXIT_ERROR and "not skew" in err


# bang


def test_bang_solve(write, capsys):
    inst = {"M": [["1", "1/2"], ["1/2", "1"]], "gamma": ["1", "-1"], "theta": "1/2"}
    code, rep, _ = run(["bang-solve", "--instance", write("b.json", inst)], capsys)
    assert code == EXIT_OK
    assert rep["epsilon"] == [-1, 1]
    assert rep["verdict"] is True
    assert all(Fraction(m) >= Fraction(1, 2) for m in rep["margins"])


def test_bang_invalid(write, capsys):
    inst = {"M": [["2"]], "gamma": ["0"], "theta": "1"}
    code, _, err = run(["bang-solve", "--instance", write("b.json", inst)], capsys)
    assert code == EXIT_ERROR and "invalid instance" in err
    inst = {"M": [["1", "0"]], "gamma": ["0"], "theta": "1"}
    code, _, err = run(["bang-solve", "--instance", write("c.json", inst)], capsys)
    assert code == EXIT_ERROR and "dimension mismatch" in err


# measures


MEASURE = {"p": ["1/3", "1/2", "3/4"]}


def test_sample_chain_echoes_seed(write, capsys):
    m = write("m.json", MEASURE)
    code, rep, _ = run(["sample-chain", "--measure", m, "--seed", "17", "--count", "4"], capsys)
    assert code == EXIT_OK
    assert rep["seed"] == 17
    assert len(rep["chains"]) == 4
    assert all(sorted(c) == [0, 1, 2] for c in rep["chains"])
    _, again, _ = run(["sample-chain", "--measure", m, "--seed", "17", "--count", "4"], capsys)
    assert again == rep


def test_invalid_measure(write, capsys):
    code, _, err = run(["check-anticoncentration", "--measure", write("m.json", {"p": ["1"]})], capsys)
    assert code == EXIT_ERROR and "invalid measure" in err


def test_lym_and_sperner(write, capsys):
    m = write("m.json", MEASURE)
    ac = write("ac.json", {"sets": [[0], [1, 2]]})
    code, rep, _ = run(["check-lym", "--measure", m, "--antichain", ac], capsys)
    assert code == EXIT_OK
    assert {"value", "bound", "verdict"} <= set(rep)
    assert Fraction(rep["value"]) <= 1 and rep["verdict"]
    code, rep, _ = run(["check-sperner", "--measure", m, "--antichain", ac], capsys)
    assert code == EXIT_OK
    assert Fraction(rep["value"]) <= Fraction(rep["bound"])


def test_not_antichain(write, capsys):
    m = write("m.json", MEASURE)
    ac = write("ac.json", {"sets": [[0], [0, 2]]})
    code, _, err = run(["check-lym", "--measure", m, "--antichain", ac], capsys)
    assert code == EXIT_ERROR and "not an antichain" in err
    ac = write("ac2.json", {"sets": [[5]]})
    code, _, err = run(["check-sperner", "--measure", m, "--antichain", ac], capsys)
    assert code == EXIT_ERROR and "dimension mismatch" in err


def test_anticoncentration(write, capsys):
    code, rep, _ = run(["check-anticoncentration", "--measure",
                        write("u.json", {"p": ["1/2"] * 4})], capsys)
    assert code == EXIT_OK
    assert rep["value"] == "3/8" and rep["verdict"] is True
    assert rep["bound"] == pytest.approx(1.7724538509055159)


def test_check_monotone(write, capsys):
    m = write("m.json", MEASURE)
    code, rep, _ = run(["check-monotone", "--function", write("f.json", {"n": 3, "table": "e8"}),
                        "--measure", m], capsys)
    assert code == EXIT_OK and rep["verdict"] and rep["u"] == [0, 0, 0]
    # majority shifted by u = 100 is 100-monotone
    code, rep, _ = run(["check-monotone", "--function", write("g.json", {"n": 3, "table": "d4"}),
                        "--measure", m, "--u", "100", "--weighting", "variance"], capsys)
    assert code == EXIT_OK and rep["weighting"] == "variance"


def test_check_monotone_errors(write, capsys):
    m = write("m.json", MEASURE)
    code, _, err = run(["check-monotone", "--function", write("f.json", {"n": 3, "table": "69"}),
                        "--measure", m], capsys)
    assert code == EXIT_ERROR and "not monotone" in err
    code, _, err = run(["check-monotone", "--function", write("f2.json", {"n": 3, "table": "e8"}),
                        "--measure", m, "--u", "10"], capsys)
    assert code == EXIT_ERROR and "dimension mismatch" in err
    code, _, err = run(["check-monotone", "--function", write("f3.json", {"n": 3, "table": "zz"}),
                        "--measure", m], capsys)
    assert code == EXIT_ERROR and "malformed input" in err


# decompose and the adversary


def test_decompose(write, capsys):
    V = write("V.json", {"rows": [[1, 0.001, 0.002], [0.5, 0.5, -0.1]]})
    code, rep, _ = run(["decompose", "--matrix", V], capsys)
    assert code == EXIT_OK and rep["verdict"] and rep["violations"] == []
    # at n = 3 the desk thresholds strip every column and row 1 exhausts with too few scales
    code, rep, _ = run(["decompose", "--matrix", V, "--desk", "--S", "3"], capsys)
    assert code == EXIT_FALSE and rep["result"]["exhausted"]
    assert any("< S=3" in v for v in rep["violations"])
    W = np.random.default_rng(5).standard_normal((2, 200))
    code, rep, _ = run(["decompose", "--matrix", write("W.json", {"rows": W.tolist()}),
                        "--desk", "--S", "3"], capsys)
    assert code == EXIT_OK and rep["params"]["S"] == 3 and rep["result"]["n_prime"] == 200
    code, _, err = run(["decompose", "--matrix", write("z.json", {"rows": [[0, 0]]})], capsys)
    assert code == EXIT_ERROR and "invalid input" in err
    code, _, err = run(["decompose", "--matrix", write("r.json", {"rows": [[1, 2], [1]]})], capsys)
    assert code == EXIT_ERROR and "dimension mismatch" in err


def test_find_missing_edge(write, tmp_path, capsys):
    fam = {"n": 6, "planes": [{"normal": ["3", "-1", "2", "1", "1", "-5"], "mu": "1/2"},
                              {"normal": ["1", "1", "1", "1", "1", "1"], "mu": "0"}]}
    f = write("fam.json", fam)
    trace = tmp_path / "t.json"
    code, rep, _ = run(["find-missing-edge", "--family", f, "--seed", "3", "--theta", "auto",
                        "--attempts", "64", "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    assert rep["seed"] == 3
    e = rep["outcome"]["edge"]
    H = jsonio.family_from_json(fam)
    from cubeslice.cube_core import CubeEdge, slices
    edge = CubeEdge(tuple(e["base"]), e["direction"])
    assert not any(slices(h, edge) for h in H.planes)
    tr = json.loads(trace.read_text())
    assert tr["seed"] == 3 and "decomposition" in tr and "sigma_i2" in tr
    _, again, _ = run(["find-missing-edge", "--family", f, "--seed", "3", "--attempts", "64"], capsys)
    assert again == rep


def test_find_missing_edge_theta(write, capsys):
    f = write("fam.json", {"n": 4, "planes": [{"normal": [1, 2, 3, 4], "mu": "1/2"}]})
    # n = 4 is far below the asymptotic range, so a miss is a legitimate outcome here
    code, rep, _ = run(["find-missing-edge", "--family", f, "--theta", "1/10"], capsys)
    assert code in (EXIT_OK, EXIT_FALSE) and rep["params"]["theta"] == pytest.approx(0.1)
    assert rep["first_failure"]["stage"] == "decompose"
    code, _, err = run(["find-missing-edge", "--family", f, "--theta", "-1"], capsys)
    assert code == EXIT_ERROR and "invalid input" in err
    code, _, err = run(["find-missing-edge", "--family", write("a.json", AXIS3)], capsys)
    assert code == EXIT_ERROR and "not skew" in err


def test_search_family(capsys):
    code, rep, _ = run(["search-family", "--n", "3", "--k", "3", "--budget", "20000",
                        "--seed", "1"], capsys)
    assert code == EXIT_OK and rep["success"] and rep["seed"] == 1
    assert find_unsliced_edge(jsonio.family_from_json(rep["family"])) is None
    code, rep, _ = run(["search-family", "--n", "3", "--k", "1", "--budget", "50"], capsys)
    assert code == EXIT_FALSE and rep["unsliced_edges"] > 0


def test_suite_subset(capsys):
    code, rep, err = run(["suite", "--seed", "42", "--only", "6"], capsys)
    assert code == EXIT_OK
    assert rep["seed"] == 42 and [c["id"] for c in rep["criteria"]] == [6]
    assert "[PASS]  6" in err
    code, _, err = run(["suite", "--only", "x"], capsys)
    assert code == EXIT_ERROR


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "cubeslice.cli", "--help"], capture_output=True,
                         text=True, check=True)
    for cmd in ("verify", "find-unsliced", "cover-to-slice", "bang-solve", "sample-chain",
                "check-sperner", "check-lym", "check-anticoncentration", "check-monotone",
                "decompose", "find-missing-edge", "search-family", "suite"):
        assert cmd in out.stdout


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# jsonio


def test_rational_roundtrip():
    H = HyperplaneFamily([Hyperplane([Fraction(-1, 3), 2], Fraction(7, 5))])
    assert jsonio.family_from_json(jsonio.family_to_json(H)) == H
    assert jsonio.parse_rational("0.25", "x") == Fraction(1, 4)
    assert jsonio.parse_rational(0.1, "x") == Fraction(1, 10)
    with pytest.raises(jsonio.InputError):
        jsonio.parse_rational(None, "x")
    with pytest.raises(jsonio.InputError):
        jsonio.parse_rational("abc", "x")


def test_dump_is_deterministic():
    a = jsonio.dump_json({"b": 1, "a": [1, 2]})
    assert a == jsonio.dump_json({"a": [1, 2], "b": 1})
    with pytest.raises(ValueError):
        jsonio.dump_json({"x": float("nan")})


def test_edge_family_json():
    A = jsonio.edge_family_from_json({"u": [1, 0], "edges": [{"a": [0], "dir": 1}]})
    assert A.n == 2 and len(A) == 1
    with pytest.raises(jsonio.InputError):
        jsonio.edge_family_from_json({"u": [1, 0]})
