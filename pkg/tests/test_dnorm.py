import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from channelforge import library
from channelforge.channel import (ChannelPair, choi_from_kraus, choi_from_stinespring, identity_channel,
                                  tensor_power, unitary_channel)
from channelforge.circuit import Circuit, Gate, compile_to_channel, pad_to_square
from channelforge.dnorm import (decide_qcd, diamond_norm, identification_probability, repetition_bounds,
                                sampled_lower_bound, theorem_parameters, witness_value)
from channelforge.errors import ContractError
from channelforge.linalg import is_psd
import reference


def phase_pair(theta):
    return ChannelPair(identity_channel(2), unitary_channel(np.diag([1, np.exp(1j * theta)])))


def circuit_pair(rng, nq=1):
    c1, c2 = (choi_from_stinespring(compile_to_channel(library.random_circuit(rng, nq, 1, 5))) for _ in range(2))
    return ChannelPair(c1, c2)


# values frozen from an independent cvxpy/CLARABEL solve of the standard
# fidelity-style SDP (see the project notes); Kraus forms from reference.py
KRAUS_CASES = [
    (reference.amplitude_damping(0.3), reference.amplitude_damping(0.6), 0.6),
    (reference.depolarizing_kraus(0.5), [np.eye(2)], 0.75),
    (reference.amplitude_damping(0.4), [reference.ry(0.9)], 1.2153279320029635),
    ([reference.rz(1.1) @ reference.ry(0.4)], reference.depolarizing_kraus(0.2), 1.1030167222750242),
]


@pytest.mark.parametrize("k1, k2, expected", KRAUS_CASES)
def test_matches_external_solver(k1, k2, expected):
    r = diamond_norm(ChannelPair(choi_from_kraus(k1), choi_from_kraus(k2)))
    assert r.value == pytest.approx(expected, abs=1e-6)


def test_trivial_examples():
    same = ChannelPair(identity_channel(2), identity_channel(2))
    assert diamond_norm(same).value == pytest.approx(0.0, abs=1e-7)
    flip = ChannelPair(identity_channel(2), unitary_channel(reference.X))
    assert diamond_norm(flip).value == pytest.approx(2.0, abs=1e-7)


@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3, np.pi])
def test_phase_closed_form(theta):
    pair = phase_pair(theta)
    r = diamond_norm(pair)
    assert r.value == pytest.approx(2 * math.sin(theta / 2), abs=1e-6)
    assert sampled_lower_bound(pair, 500, seed=3) <= r.value + 1e-7


def test_grid_oracle_confirms_closed_form():
    assert reference.grid_dnorm_diag_phase(np.pi / 3) == pytest.approx(1.0, abs=1e-3)
    assert diamond_norm(phase_pair(np.pi / 3)).value == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1))
def test_sandwich_and_witness(seed):
    pair = circuit_pair(np.random.default_rng(seed))
    r = diamond_norm(pair, tol=1e-7)
    assert r.primal_bound <= r.value <= r.dual_bound
    assert r.gap <= 1e-7
    assert sampled_lower_bound(pair, 200, seed=seed) <= r.value + 1e-9
    assert is_psd(r.witness, 1e-12) and abs(np.trace(r.witness) - 1) <= 1e-9
    assert witness_value(pair.difference, r.witness) == pytest.approx(r.primal_bound, abs=1e-8)
    assert 0.0 <= r.value <= 2.0 + 1e-9


def test_symmetry(rng):
    pair = circuit_pair(rng)
    assert diamond_norm(pair).value == pytest.approx(diamond_norm(pair.swapped()).value, abs=1e-7)


def test_two_qubit_pair_and_determinism(rng):
    pair = circuit_pair(rng, nq=2)
    a, b = diamond_norm(pair), diamond_norm(pair)
    assert a.value == b.value and a.iterations == b.iterations
    assert np.array_equal(a.witness, b.witness)


def test_padding_invariance(rng):
    c1 = Circuit(2, (Gate("cnot", (0, 1)), Gate("traceout", (1,))))
    c2 = Circuit(2, (Gate("h", (1,)), Gate("cnot", (1, 0)), Gate("traceout", (1,))))
    ch = [choi_from_stinespring(compile_to_channel(c)) for c in (c1, c2)]
    padded = [choi_from_stinespring(compile_to_channel(pad_to_square(c))) for c in (c1, c2)]
    v = diamond_norm(ChannelPair(*ch)).value
    assert v == pytest.approx(diamond_norm(ChannelPair(*padded)).value, abs=1e-7)


def test_contract_errors():
    with pytest.raises(ContractError):
        diamond_norm(phase_pair(1.0), tol=0)
    with pytest.raises(ContractError):
        sampled_lower_bound(phase_pair(1.0), 0)


def test_sampled_examples():
    assert sampled_lower_bound(ChannelPair(identity_channel(2), identity_channel(2)), 10) == pytest.approx(0, abs=1e-12)
    flip = ChannelPair(identity_channel(2), unitary_channel(reference.X))
    assert sampled_lower_bound(flip, 1000, seed=0) >= 1.5
    assert sampled_lower_bound(flip, 50, seed=9) == sampled_lower_bound(flip, 50, seed=9)


@pytest.mark.parametrize("value, expected", [(0, 0.5), (2, 1.0), (1, 0.75)])
def test_identification_probability(value, expected):
    assert identification_probability(value) == expected


@pytest.mark.parametrize("value", [-0.1, 2.1])
def test_identification_probability_range(value):
    with pytest.raises(ContractError):
        identification_probability(value)


@pytest.mark.parametrize("delta, k, lower, upper", [
    (1.0, 2, 0.442398, 2.0),
    (2.0, 1, 0.786939, 2.0),
])
def test_repetition_bounds(delta, k, lower, upper):
    r = repetition_bounds(delta, k)
    assert r.lower == pytest.approx(lower, abs=1e-6)
    assert r.upper == pytest.approx(upper)
    assert r.lower < r.upper


def test_repetition_bounds_limits():
    assert repetition_bounds(1e-6, 3).lower == pytest.approx(0, abs=1e-11)
    for bad in [(0.0, 1), (1.0, 0), (1.0, 1.5)]:
        with pytest.raises(ContractError):
            repetition_bounds(*bad)


@pytest.mark.parametrize("a, b, k", [(1.8, 0.2, 37), (1.0, 0.5, 12), (1.5, 0.1, None), (1e-6, 0.5e-6, 1)])
def test_theorem_parameters(a, b, k):
    kk, eps = theorem_parameters(a, b)
    if k is not None:
        assert kk == k
    assert kk >= math.ceil(-16 * math.log(1 - a / 2))
    assert 2 - 2 * math.exp(-kk * (1 - 2 * eps) / 8) > a
    assert kk * eps < b
    assert eps == pytest.approx(min(0.25, b / kk), rel=1e-12)


def test_theorem_parameters_examples():
    assert theorem_parameters(1.8, 0.2) == (37, pytest.approx(0.2 / 37, rel=1e-12))
    assert theorem_parameters(1.0, 0.5)[1] == pytest.approx(0.041667, abs=1e-6)


@pytest.mark.parametrize("a, b", [(0.5, 0.5), (2.5, 0.1), (0.1, 0.2)])
def test_theorem_parameters_precondition(a, b):
    with pytest.raises(ContractError):
        theorem_parameters(a, b)


def test_decide_qcd():
    flip = ChannelPair(identity_channel(2), unitary_channel(reference.X))
    assert decide_qcd(flip, 1.9, 0.1) == "yes"
    same = ChannelPair(identity_channel(2), identity_channel(2))
    assert decide_qcd(same, 1.9, 0.1) == "no"
    assert decide_qcd(phase_pair(np.pi / 3), 1.5, 0.5) == "indeterminate"
    with pytest.raises(ContractError):
        decide_qcd(flip, 1.0, 0.9, tol=0.1)


def _lemma_pair():
    # phase gap giving delta = 2 sin(0.5) ~ 0.9589
    return phase_pair(1.0)


def _check_lemma(pair, k):
    delta = diamond_norm(pair).value
    bounds = repetition_bounds(delta, k)
    big = ChannelPair(tensor_power(pair.first, k), tensor_power(pair.second, k))
    v = diamond_norm(big).value
    assert bounds.lower < v <= bounds.upper + 1e-7


def test_lemma_sandwich_k2():
    _check_lemma(_lemma_pair(), 2)


def test_lemma_sandwich_k2_noisy():
    pair = ChannelPair(choi_from_kraus(reference.amplitude_damping(0.3)),
                       choi_from_kraus(reference.depolarizing_kraus(0.6)))
    _check_lemma(pair, 2)


@pytest.mark.slow
def test_lemma_sandwich_k3():
    _check_lemma(_lemma_pair(), 3)
