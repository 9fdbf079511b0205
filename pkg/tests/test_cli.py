import json

import numpy as np
import pytest

from channelforge import library
from channelforge.channel import choi_to_dict, unitary_channel
from channelforge.circuit import Circuit, Gate, serialize_circuit
from channelforge.cli import main, render_pretty
from channelforge.embed import degradable_embedding

ID_CHOI = [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]]


@pytest.fixture
def files(tmp_path):
    def circuit(name, c):
        p = tmp_path / f"{name}.json"
        p.write_bytes(serialize_circuit(c))
        return str(p)

    def choi(name, ch):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(choi_to_dict(ch)))
        return str(p)

    out = {
        "id": circuit("id", library.identity()),
        "x": circuit("x", library.pauli_x()),
        "id2": circuit("id2", library.identity()),
        "phase": choi("phase", unitary_channel(np.diag([1, np.exp(1j * np.pi / 3)]))),
        "dephasing": circuit("dephasing", library.dephasing()),
        "bad": str(tmp_path / "bad.json"),
        "tmp": tmp_path,
    }
    (tmp_path / "bad.json").write_text('{"version": 1, "input_qubits": 1, "gates": [')
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_compile_identity(capsys, files):
    code, out, _ = run(capsys, "compile", files["id"])
    assert code == 0
    doc = json.loads(out)
    assert (doc["dim_in"], doc["dim_out"]) == (2, 2)
    # entries are row-major [re, im] pairs
    m = np.array(doc["matrix"], dtype=float).reshape(4, 4, 2)
    np.testing.assert_allclose(m[..., 0], ID_CHOI)
    assert not m[..., 1].any()


def test_compile_with_stinespring(capsys, files):
    code, out, _ = run(capsys, "compile", files["dephasing"], "--stinespring")
    assert code == 0 and "stinespring" in json.loads(out)


def test_compile_malformed(capsys, files):
    code, _, err = run(capsys, "compile", files["bad"])
    assert code == 2 and "bad.json" in err and "line 1" in err


def test_compile_missing_file(capsys, files):
    code, _, err = run(capsys, "compile", str(files["tmp"] / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_compile_oversized(capsys, files, monkeypatch):
    monkeypatch.setenv("CHANNELFORGE_DIM_CAP", "16")
    big = files["tmp"] / "big.json"
    big.write_bytes(serialize_circuit(Circuit(3, (Gate("ancilla"), Gate("ancilla")))))
    code, _, err = run(capsys, "compile", str(big))
    assert code == 3 and "dimension cap exceeded" in err


@pytest.mark.parametrize("mode", ["degradable", "antidegradable"])
def test_embed_verify_identity(capsys, files, mode):
    code, out, _ = run(capsys, "embed", files["id"], "--mode", mode, "--verify")
    assert code == 0
    doc = json.loads(out)
    assert doc["flavor"] == mode and doc["verification"]["passed"]
    assert doc["verification"]["max_deviation"] < 1e-12


def test_embed_non_square(capsys, files):
    p = files["tmp"] / "ns.json"
    p.write_bytes(serialize_circuit(Circuit(2, (Gate("traceout", (1,)),))))
    code, _, err = run(capsys, "embed", str(p))
    assert code == 2 and "pad" in err


def test_verify_envelope(capsys, files):
    env = files["tmp"] / "env.json"
    code, _, _ = run(capsys, "embed", files["x"], "-o", str(env))
    assert code == 0
    assert run(capsys, "verify", str(env))[0] == 0


def test_verify_corrupted_envelope(capsys, files):
    e = degradable_embedding(library.depolarizing())
    doc = e.to_dict()
    doc["mate"]["gates"] = [g for g in doc["mate"]["gates"] if g["kind"] != "x"]
    p = files["tmp"] / "corrupt.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(p))
    assert code == 4 and json.loads(out)["passed"] is False


def test_dnorm(capsys, files):
    code, out, _ = run(capsys, "dnorm", files["id"], files["x"], "--witness")
    doc = json.loads(out)
    assert code == 0 and abs(doc["value"] - 2) <= 1e-7 and "witness" in doc


def test_dnorm_mixed_formats(capsys, files):
    code, out, _ = run(capsys, "dnorm", files["id"], files["phase"])
    assert code == 0 and abs(json.loads(out)["value"] - 1.0) <= 1e-6


@pytest.mark.parametrize("first, second, answer, code", [
    ("id", "x", "yes", 0),
    ("id", "id2", "no", 1),
    ("id", "phase", "indeterminate", 5),
])
def test_distinguish(capsys, files, first, second, answer, code):
    a, b = ("1.5", "0.5") if answer == "indeterminate" else ("1.9", "0.1")
    got, out, _ = run(capsys, "distinguish", files[first], files[second], "--a", a, "--b", b)
    assert got == code and json.loads(out)["answer"] == answer


@pytest.mark.parametrize("argv", [
    ["--a", "0.1", "--b", "0.5"],
    ["--a", "1.0", "--b", "0.9", "--tol", "0.1"],
    ["--a", "1.0", "--b", "0.5", "--tol", "-1"],
])
def test_distinguish_bad_config(capsys, files, argv):
    assert run(capsys, "distinguish", files["id"], files["x"], *argv)[0] == 2


def test_shape_mismatch(capsys, files):
    p = files["tmp"] / "two.json"
    p.write_bytes(serialize_circuit(library.identity(2)))
    assert run(capsys, "dnorm", files["id"], str(p))[0] == 2


def test_repeat(capsys, files, monkeypatch):
    code, out, _ = run(capsys, "repeat", files["dephasing"], "-k", "1")
    code2, out2, _ = run(capsys, "compile", files["dephasing"])
    assert code == code2 == 0 and json.loads(out)["matrix"] == json.loads(out2)["matrix"]
    code, out, _ = run(capsys, "repeat", files["id"], "-k", "2")
    assert json.loads(out)["dim_in"] == 4
    monkeypatch.setenv("CHANNELFORGE_DIM_CAP", "64")
    assert run(capsys, "repeat", files["id"], "-k", "4")[0] == 3
    assert run(capsys, "repeat", files["id"], "-k", "0")[0] == 2


def test_params(capsys):
    code, out, _ = run(capsys, "params", "--a", "1.8", "--b", "0.2")
    doc = json.loads(out)
    assert code == 0 and doc["k"] == 37 and doc["epsilon"] == pytest.approx(0.0054054, abs=1e-7)
    assert run(capsys, "params", "--a", "0.2", "--b", "1.8")[0] == 2


def test_pretty(capsys):
    code, out, _ = run(capsys, "params", "--a", "1.0", "--b", "0.5", "--pretty")
    assert code == 0 and out.splitlines()[0].split() == ["k", "12"]
    assert "nested:" in render_pretty({"nested": {"x": 1.0}})


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_demo_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["demo", "--seed", "42", "-o", str(a)]) == 0
    assert main(["demo", "--seed", "42", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["passed"] and all(doc["checks"].values())
    assert abs(doc["dnorm_degradable"] - doc["dnorm_phi"] / 2) <= 2e-7


def test_demo_default_seed(capsys):
    assert main(["demo"]) == 0


@pytest.mark.parametrize("tol", ["10", "0", "nan"])
def test_demo_rejects_tolerance(capsys, tol):
    assert main(["demo", "--tol", tol]) == 2
