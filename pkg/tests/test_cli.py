import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from make_golden import BUNDLED, CASES, run
from cpkit.cli import canonical_dumps, decode_matrix, encode_matrix, main

GOLDEN = Path(__file__).parent / "golden"


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_outputs(name):
    _, text = run(CASES[name])
    assert text == (GOLDEN / name).read_text()


def test_deterministic():
    assert run(CASES["expand_demo_model.json"]) == run(CASES["expand_demo_model.json"])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cpkit", "compare", str(BUNDLED / "transposition.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "compare_transposition.json").read_text()


def test_check_transposition(capsys):
    assert main(["check", str(BUNDLED / "transposition.json")]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["min_eigenvalue"] == pytest.approx(-1)
    assert report["completely_positive"] is False and "kraus_rank" not in report


def test_check_identity(capsys):
    assert main(["check", str(BUNDLED / "identity.json"), "--basis", "gellmann"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["min_eigenvalue"] == 0 and report["kraus_rank"] == 1


def test_check_custom_basis_file(tmp_path, capsys):
    from cpkit.bases import gellmann_basis

    basis = write(tmp_path, "b.json", {"dim": 2, "elements": [encode_matrix(x) for x in gellmann_basis(2)]})
    assert main(["check", str(BUNDLED / "transposition.json"), "--basis", basis]) == 1
    assert json.loads(capsys.readouterr().out)["basis"] == "custom"


def test_check_non_orthonormal_basis_file(tmp_path, capsys):
    elems = [encode_matrix(np.eye(2))] * 4
    basis = write(tmp_path, "b.json", {"dim": 2, "elements": elems})
    assert main(["check", str(BUNDLED / "identity.json"), "--basis", basis]) == 2
    assert "orthonormal" in capsys.readouterr().err


def test_check_ragged_file(tmp_path, capsys):
    doc = {"kind": "kraus", "dim": 2, "payload": [[[[1, 0], [0, 0]], [[0, 0]]]]}
    assert main(["check", write(tmp_path, "r.json", doc)]) == 2
    err = capsys.readouterr().err
    assert "payload[0][1]" in err and "ragged" in err


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"dim": 2, "payload": []}, "kind"),
        ({"kind": "magic", "dim": 2, "payload": []}, "kind"),
        ({"kind": "superop", "dim": 0, "payload": []}, "dim"),
        ({"kind": "superop", "dim": 2, "payload": [[[1, 0]]]}, "payload"),
        ({"kind": "gks", "dim": 1, "payload": [[[1, 0]]]}, "basis"),
        ({"kind": "choi", "dim": 1, "payload": [[[1, "x"]]]}, "payload[0][0]"),
    ],
)
def test_input_errors(tmp_path, capsys, doc, field):
    assert main(["check", write(tmp_path, "bad.json", doc)]) == 2
    assert field in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["check", "/nonexistent/channel.json"]) == 2
    assert "nonexistent" in capsys.readouterr().err


def test_tolerance_from_environment(monkeypatch, tmp_path, capsys):
    # slightly non-CP map: identity plus a small negative admixture
    s = np.eye(4) - 1e-6 * np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    path = write(tmp_path, "s.json", {"kind": "superop", "dim": 2, "payload": encode_matrix(s)})
    assert main(["check", path]) == 1
    monkeypatch.setenv("CPKIT_TOL", "1e-3")
    assert main(["check", path]) == 0
    assert main(["check", path, "--tol", "1e-9"]) == 1


def test_convert_gks_pauli(capsys):
    assert main(["convert", str(BUNDLED / "transposition.json"), "--to", "gks"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "gks" and doc["basis"] == "gellmann"
    assert np.allclose(decode_matrix(doc["payload"], "payload"), np.diag([1, 1, -1, 1]), atol=1e-15)


def test_convert_choi(capsys):
    main(["convert", str(BUNDLED / "transposition.json"), "--to", "choi"])
    doc = json.loads(capsys.readouterr().out)
    want = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    assert np.array_equal(decode_matrix(doc["payload"], "payload"), want)


def test_convert_kraus_round_trip(tmp_path, capsys):
    main(["convert", str(BUNDLED / "bitflip.json"), "--to", "superop"])
    superop_text = capsys.readouterr().out
    path = tmp_path / "s.json"
    path.write_text(superop_text)
    assert main(["convert", str(path), "--to", "kraus"]) == 0
    kraus = json.loads(capsys.readouterr().out)
    assert kraus["kind"] == "kraus" and len(kraus["payload"]) == 2
    kpath = tmp_path / "k.json"
    kpath.write_text(json.dumps(kraus))
    main(["convert", str(kpath), "--to", "superop"])
    again = json.loads(capsys.readouterr().out)
    assert np.allclose(
        decode_matrix(again["payload"], "p"), decode_matrix(json.loads(superop_text)["payload"], "p"), atol=1e-14
    )


def test_convert_round_trip_is_bit_consistent(tmp_path, capsys):
    main(["convert", str(BUNDLED / "bitflip.json"), "--to", "gks", "--basis", "gellmann"])
    first = capsys.readouterr().out
    doc = json.loads(first)
    assert canonical_dumps(doc) + "\n" == first
    path = tmp_path / "g.json"
    path.write_text(first)
    main(["convert", str(path), "--to", "gks", "--basis", "gellmann"])
    second = capsys.readouterr().out
    a = decode_matrix(json.loads(first)["payload"], "p")
    b = decode_matrix(json.loads(second)["payload"], "p")
    assert np.max(np.abs(a - b)) < 1e-15


def test_convert_kraus_not_cp(capsys):
    assert main(["convert", str(BUNDLED / "transposition.json"), "--to", "kraus"]) == 1
    assert "negative eigenvalue" in capsys.readouterr().err


def test_canonical_numbers_round_trip(rng):
    xs = rng.normal(size=50) * 10.0 ** rng.integers(-20, 20, size=50)
    for x in xs:
        assert float(canonical_dumps(float(x))) == x
    assert canonical_dumps([1.0, 0.1, True, None]) == "[1, 0.10000000000000001, true, null]"


def test_compare_transposition(capsys):
    main(["compare", str(BUNDLED / "transposition.json")])
    rows = {r["name"]: r for r in json.loads(capsys.readouterr().out)["rows"]}
    assert rows["dpj"]["psd"] and np.allclose(rows["dpj"]["eigenvalues"], [2, 0, 0, 0])
    assert np.allclose(rows["gks/pauli"]["eigenvalues"], [1, 1, 1, -1])
    for name in ("choi", "gks/pauli", "fc"):
        assert not rows[name]["psd"]
    assert rows["choi"]["hash"] == rows["fc"]["hash"] == rows["pskh/standard"]["hash"]
    assert rows["dpj"]["hash"] == rows["pskh/pauli"]["hash"]


def test_compare_identity(capsys):
    main(["compare", str(BUNDLED / "identity.json")])
    rows = {r["name"]: r for r in json.loads(capsys.readouterr().out)["rows"]}
    for name in ("choi", "gks/pauli", "pskh/standard", "fc"):
        assert rows[name]["psd"]
    # the dPJ image of the identity is the swap operator, spectrum (1, 1, 1, -1)
    for name in ("dpj", "pskh/pauli"):
        assert not rows[name]["psd"]
        assert np.allclose(rows[name]["eigenvalues"], [1, 1, 1, -1])


def test_compare_dimension_limit(tmp_path, capsys):
    doc = {"kind": "kraus", "dim": 5, "payload": [encode_matrix(np.eye(5))]}
    assert main(["compare", write(tmp_path, "big.json", doc)]) == 2


def test_compare_pretty(capsys):
    main(["compare", str(BUNDLED / "transposition.json"), "--pretty"])
    out = capsys.readouterr().out
    assert "dpj" in out and "+2.000000" in out


def model_doc(h_s, h_e, h_se, m):
    return {"n": 2, "m": m, "h_s": encode_matrix(h_s), "h_e": encode_matrix(h_e), "h_se": encode_matrix(h_se)}


def test_expand_demo(capsys):
    assert main(["expand", str(BUNDLED / "demo_model.json")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["exponent"] >= 2.9 and rep["passed"]
    assert rep["g2_provenance"][0][0] == "numeric" and rep["g2_provenance"][1][1] == "analytic"
    assert len(rep["samples"]) == 5 and rep["samples"][0]["t"] == 0.1


def test_expand_no_coupling_rank_one(tmp_path, capsys):
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    path = write(tmp_path, "m.json", model_doc(0.5 * z + 0.3 * x, z, np.zeros((4, 4)), 2))
    assert main(["expand", path]) == 0
    g2 = decode_matrix(json.loads(capsys.readouterr().out)["g2"], "g2")
    assert np.linalg.matrix_rank(g2[1:, 1:], tol=1e-12) == 1


def test_expand_single_level_environment(tmp_path, capsys):
    z = np.diag([1.0, -1.0])
    path = write(tmp_path, "m.json", model_doc(z, np.zeros((1, 1)), np.zeros((2, 2)), 1))
    assert main(["expand", path]) == 0
    g2 = decode_matrix(json.loads(capsys.readouterr().out)["g2"], "g2")
    h = np.array([0, 0, np.sqrt(2)])
    assert np.allclose(g2[1:, 1:], np.outer(h, h))


def test_expand_rejects_bad_models(tmp_path, capsys):
    bad = model_doc(np.array([[0, 1], [0, 0]]), np.eye(2), np.zeros((4, 4)), 2)
    assert main(["expand", write(tmp_path, "m.json", bad)]) == 2
    assert "h_s" in capsys.readouterr().err
    assert main(["expand", str(BUNDLED / "demo_model.json"), "--t-max", "2"]) == 2


def test_expand_pretty(capsys):
    main(["expand", str(BUNDLED / "demo_model.json"), "--pretty", "--samples", "3"])
    assert "log-log exponent" in capsys.readouterr().out


def test_console_script_available():
    exe = shutil.which("cpkit")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "check", str(BUNDLED / "identity.json")], capture_output=True, env=os.environ)
    assert proc.returncode == 0
