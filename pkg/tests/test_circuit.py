import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from channelforge import library
from channelforge.channel import choi_from_stinespring
from channelforge.circuit import (ANCILLA, TRACEOUT, Circuit, Gate, compile_to_channel, controlled,
                                  normalize_to_stinespring, pad_to_square, parse_circuit, serialize_circuit,
                                  swap_registers)
from channelforge.embed import degradable_embedding
from channelforge.errors import CircuitError, CircuitParseError, SizeLimitError
from channelforge.linalg import is_psd, is_unitary, partial_trace
import reference

DEPHASING_CHOI = np.diag([1.0, 0, 0, 1])


def choi(c):
    return choi_from_stinespring(compile_to_channel(c)).m


def test_gate_validation():
    with pytest.raises(CircuitError, match="matrix dimension mismatch"):
        Gate("u", (0,), (), np.eye(3))
    with pytest.raises(CircuitError, match="not unitary"):
        Gate("u", (0,), (), np.array([[1, 1], [0, 1]]))
    with pytest.raises(CircuitError, match="unknown gate kind"):
        Gate("toffoli", (0, 1, 2))
    with pytest.raises(CircuitError, match="repeated wire"):
        Gate("cnot", (1, 1))


def test_gate_on_traced_wire_rejected():
    with pytest.raises(CircuitError, match="wire not live"):
        Circuit(1, (Gate(ANCILLA), Gate(TRACEOUT, (1,)), Gate("x", (1,))))


def test_output_count():
    c = Circuit(2, (Gate(ANCILLA), Gate(ANCILLA), Gate(TRACEOUT, (0,))))
    assert (c.ancilla_count, c.output_qubits, c.output_wires, c.traced_wires) == (2, 3, (1, 2, 3), (0,))


def test_swap_registers_and_controlled():
    s = swap_registers(2)
    assert is_unitary(s)
    # |01 10> -> |10 01>
    v = np.zeros(16)
    v[0b0110] = 1
    assert (s @ v)[0b1001] == 1
    cu = controlled(np.array([[0, 1], [1, 0]]), 1)
    np.testing.assert_array_equal(cu.real, reference.CNOT.real)


def test_normalize_already_normalized_is_unchanged():
    c = library.dephasing()
    assert normalize_to_stinespring(c) == c


def test_normalize_moves_ancilla_first():
    c = Circuit(1, (Gate("h", (0,)), Gate(ANCILLA), Gate("cnot", (0, 1)), Gate(TRACEOUT, (1,))))
    n = normalize_to_stinespring(c)
    assert [g.kind for g in n.gates] == ["ancilla", "h", "cnot", "traceout"]
    np.testing.assert_allclose(choi(n), choi(c), atol=1e-12)
    np.testing.assert_allclose(choi(c), reference.choi_by_simulation(c), atol=1e-12)


def test_normalize_moves_early_traceout_last():
    c = Circuit(2, (Gate(ANCILLA), Gate("cnot", (0, 2)), Gate(TRACEOUT, (2,)), Gate("h", (1,)),
                    Gate("cnot", (1, 0))))
    n = normalize_to_stinespring(c)
    assert n.gates[-1].kind == TRACEOUT and n.is_normalized()
    np.testing.assert_allclose(choi(n), choi(c), atol=1e-12)
    np.testing.assert_allclose(choi(c), reference.choi_by_simulation(c), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(0, 2), st.integers(0, 6))
def test_normalization_preserves_channel_and_counts(seed, nin, nanc, depth):
    rng = np.random.default_rng(seed)
    c = library.random_circuit(rng, nin, nanc, depth)
    n = normalize_to_stinespring(c)
    assert n.is_normalized()
    assert sorted(map(repr, n.gates)) == sorted(map(repr, c.gates))
    assert n.total_wires == c.total_wires
    np.testing.assert_allclose(choi(n), choi(c), atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(0, 2), st.integers(0, 3), st.integers(0, 6))
def test_compile_matches_interleaved_simulation(seed, nin, nanc, ntr, depth):
    rng = np.random.default_rng(seed)
    ntr = min(ntr, nin + nanc - 1)
    c = library.random_circuit(rng, nin, nanc, depth, n_traced=ntr)
    np.testing.assert_allclose(choi(c), reference.choi_by_simulation(c), atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 2))
def test_compile_is_cptp(seed, nin, nanc):
    c = library.random_circuit(np.random.default_rng(seed), nin, nanc, 5)
    rep = compile_to_channel(c)
    assert is_unitary(rep.u, 1e-10)
    j = choi_from_stinespring(rep)
    assert is_psd(j.m, 1e-9)
    np.testing.assert_allclose(partial_trace(j.m, [j.dim_in, j.dim_out], [1]), np.eye(j.dim_in), atol=1e-9)


def test_compile_empty_circuit_is_identity():
    rep = compile_to_channel(Circuit(1, ()))
    np.testing.assert_array_equal(rep.u, np.eye(2))
    assert rep.dim_env_out == 1
    np.testing.assert_array_equal(choi(Circuit(1, ())), [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])


def test_compile_dephasing():
    # hand computation: Phi(rho) = diag(rho00, rho11), so J = |00><00| + |11><11|
    np.testing.assert_allclose(choi(library.dephasing()), DEPHASING_CHOI, atol=1e-15)


def test_compile_x(rng):
    rep = compile_to_channel(library.pauli_x())
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = g @ g.conj().T
    x = reference.X
    np.testing.assert_allclose(rep.apply(rho), x @ rho @ x, atol=1e-14)


def test_compile_respects_cap(monkeypatch):
    monkeypatch.setenv("CHANNELFORGE_DIM_CAP", "16")
    c = Circuit(3, tuple(Gate(ANCILLA) for _ in range(2)))
    with pytest.raises(SizeLimitError, match="dimension cap exceeded"):
        compile_to_channel(c)


def test_explicit_output_order():
    c = Circuit(2, (), outputs=(1, 0))
    rep = compile_to_channel(c)
    np.testing.assert_array_equal(rep.u, reference.SWAP)


def test_stinespring_invariants(rng):
    rep = compile_to_channel(library.random_circuit(rng, 2, 1, 6, n_traced=2))
    assert rep.dim_in * rep.dim_env_ancilla == rep.dim_out * rep.dim_env_out
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    out = rep.apply(rho)
    assert abs(np.trace(out) - 1) <= 1e-10 and is_psd(out, 1e-10)


def test_pad_square_unchanged():
    c = library.dephasing()
    assert pad_to_square(c) is c


def test_pad_two_in_one_out():
    c = Circuit(2, (Gate("cnot", (0, 1)), Gate(TRACEOUT, (1,))))
    p = pad_to_square(c)
    assert (p.input_qubits, p.output_qubits) == (2, 2)
    rep = compile_to_channel(p)
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    out = rep.apply(rho)
    np.testing.assert_allclose(partial_trace(out, [2, 2], [0]), np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(partial_trace(out, [2, 2], [1]), compile_to_channel(c).apply(rho), atol=1e-14)


def test_pad_one_in_two_out():
    c = Circuit(1, (Gate(ANCILLA), Gate("h", (1,))))
    p = pad_to_square(c)
    assert (p.input_qubits, p.output_qubits) == (2, 2)
    rho = np.kron(np.diag([0.25, 0.75]), np.full((2, 2), 0.5))
    out = compile_to_channel(p).apply(rho)
    np.testing.assert_allclose(out, compile_to_channel(c).apply(np.diag([0.25, 0.75])), atol=1e-14)


def test_round_trip_embedding_circuit(rng):
    c = degradable_embedding(library.random_circuit(rng, 1, 1, 5)).embedded
    data = serialize_circuit(c)
    back = parse_circuit(data)
    assert back == c
    assert serialize_circuit(back) == data


@given(st.integers(0, 2**32 - 1))
def test_round_trip_is_bit_exact(seed):
    c = library.random_circuit(np.random.default_rng(seed), 2, 1, 6)
    back = parse_circuit(serialize_circuit(c))
    assert back == c
    for g, h in zip(c.gates, back.gates):
        if g.matrix is not None:
            assert g.matrix.tobytes() == h.matrix.tobytes()


def _doc(gates, n=1):
    return json.dumps({"version": 1, "input_qubits": n, "gates": gates})


@pytest.mark.parametrize("doc, match", [
    (_doc([{"kind": "u", "targets": [0], "matrix": [[1, 0]] * 9}]), "matrix dimension mismatch"),
    (_doc([{"kind": "ancilla"}, {"kind": "traceout", "targets": [1]}, {"kind": "h", "targets": [1]}]),
     "wire not live"),
    (_doc([{"kind": "frobnicate", "targets": [0]}]), "unknown gate kind"),
    (_doc([{"kind": "u", "targets": [0], "matrix": [[1, 0], [1, 0], [0, 0], [1, 0]]}]), "not unitary"),
    ('{"version": 1, "input_qubits": 1, "gates": [', "line 1 column"),
    (_doc([], n=-1), "input_qubits"),
])
def test_parse_errors(doc, match):
    with pytest.raises(CircuitParseError, match=match):
        parse_circuit(doc)


def test_parse_error_carries_path():
    doc = _doc([{"kind": "h", "targets": [0]}, {"kind": "u", "targets": [0], "matrix": [[1, 0]] * 3}])
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(doc)
    assert info.value.path == "$.gates[1].matrix"


def test_parse_nested_rows():
    doc = _doc([{"kind": "u", "targets": [0], "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}])
    np.testing.assert_array_equal(parse_circuit(doc).gates[0].matrix, reference.X)
