"""Stock circuits and a seeded random-circuit generator."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .circuit import ANCILLA, TRACEOUT, Circuit, Gate


def identity(n: int = 1) -> Circuit:
    return Circuit(n, ())


def pauli_x() -> Circuit:
    return Circuit(1, (Gate("x", (0,)),))


def phase(theta: float) -> Circuit:
    u = np.diag([1.0, np.exp(1j * theta)])
    return Circuit(1, (Gate("u", (0,), (), u),))


def dephasing() -> Circuit:
    """Completely dephasing qubit channel: CNOT the input onto a discarded ancilla."""
    return Circuit(1, (Gate(ANCILLA), Gate("cnot", (0, 1)), Gate(TRACEOUT, (1,))))


def depolarizing() -> Circuit:
    """Completely depolarizing qubit channel ``rho -> I/2``.

    The input is swapped into the environment and half of a Bell pair is
    output in its place.
    """
    return Circuit(1, (Gate(ANCILLA), Gate(ANCILLA), Gate("h", (1,)), Gate("cnot", (1, 2)),
                       Gate("swap", (0, 1)), Gate(TRACEOUT, (1,)), Gate(TRACEOUT, (2,))))


def swap_to_environment() -> Circuit:
    """Sends the input to the environment and outputs a fresh ``|0>``."""
    return Circuit(1, (Gate(ANCILLA), Gate("swap", (0, 1)), Gate(TRACEOUT, (1,))))


def mixture(c1: Circuit, c2: Circuit) -> Circuit:
    """Equal mixture of two square, ancilla-only circuits on the same inputs.

    A ``|+>`` coin selects which dilation runs; coin and both environments are
    discarded. Uses controlled versions of each circuit's compiled unitary.
    """
    from .circuit import compile_to_channel

    if c1.input_qubits != c2.input_qubits or not (c1.is_square and c2.is_square):
        raise ValueError("mixture needs two square circuits on the same number of inputs")
    a = c1.input_qubits
    u1 = compile_to_channel(c1).u
    u2 = compile_to_channel(c2).u
    e1, e2 = c1.ancilla_count, c2.ancilla_count
    coin = a
    E1 = list(range(a + 1, a + 1 + e1))
    E2 = list(range(a + 1 + e1, a + 1 + e1 + e2))
    A = list(range(a))
    gates = [Gate(ANCILLA) for _ in range(1 + e1 + e2)]
    gates += [Gate("h", (coin,)), Gate("cu", tuple(A + E2), (coin,), u2), Gate("x", (coin,)),
              Gate("cu", tuple(A + E1), (coin,), u1), Gate(TRACEOUT, (coin,))]
    gates += [Gate(TRACEOUT, (w,)) for w in E1 + E2]
    return Circuit(a, tuple(gates))


def _random_unitary(rng, d):
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1))


def random_circuit(rng, n_inputs: int = 1, n_ancillas: int = 1, depth: int = 4,
                   n_traced: int | None = None, interleave: bool = True) -> Circuit:
    """Random mixed-state circuit.

    Ancillas are introduced and wires traced out at random positions when
    ``interleave`` is set. ``n_traced`` defaults to ``n_ancillas`` (a square
    circuit); traced wires may be inputs as well as ancillas.
    """
    if n_traced is None:
        n_traced = n_ancillas
    if n_inputs < 1 or n_traced >= n_inputs + n_ancillas:
        raise ValueError("circuit must keep at least one input and one output wire")
    events = ["anc"] * n_ancillas + ["gate"] * depth + ["tr"] * n_traced
    if interleave:
        # reshuffle until no prefix would leave zero live wires
        while True:
            rng.shuffle(events)
            live_count, ok = n_inputs, True
            for ev in events:
                live_count += (ev == "anc") - (ev == "tr")
                if live_count < 1:
                    ok = False
                    break
            if ok:
                break
    gates: list = []
    live = list(range(n_inputs))
    nxt = n_inputs
    for ev in events:
        if ev == "anc":
            gates.append(Gate(ANCILLA))
            live.append(nxt)
            nxt += 1
        elif ev == "tr":
            w = live.pop(int(rng.integers(len(live))))
            gates.append(Gate(TRACEOUT, (w,)))
        else:
            gates.append(_random_gate(rng, live))
    return Circuit(n_inputs, tuple(gates))


def _random_gate(rng, live):
    if not live:
        raise ValueError("no live wires")
    choice = int(rng.integers(6)) if len(live) >= 2 else int(rng.integers(3))
    if choice == 0:
        return Gate("h", (live[int(rng.integers(len(live)))],))
    if choice == 1:
        return Gate("x", (live[int(rng.integers(len(live)))],))
    if choice == 2:
        return Gate("u", (live[int(rng.integers(len(live)))],), (), _random_unitary(rng, 2))
    pair = [int(w) for w in rng.choice(live, size=2, replace=False)]
    if choice == 3:
        return Gate("cnot", tuple(pair))
    if choice == 4:
        return Gate("u", tuple(pair), (), _random_unitary(rng, 4))
    return Gate("cu", (pair[1],), (pair[0],), _random_unitary(rng, 2))
