"""Circuits embedding an arbitrary channel into a degradable or antidegradable one.

Given a square circuit ``phi`` with dilation ``U`` on ``A ⊗ E``:

* the degradable embedding outputs ``1/2 |0><0| ⊗ rho + 1/2 |1><1| ⊗ phi(rho)``
  on ``[flag C][A]``, discarding ``[copy][E]``. Its degrading map takes
  ``[C][A]`` to ``[C][E]``.
* the antidegradable embedding outputs
  ``1/2 |0><0| ⊗ |0><0| + 1/2 |1><1| ⊗ phi(rho)`` on ``[C][A]``, discarding
  ``[copy][R][E]`` where ``R`` receives the swapped-out input. Its
  antidegrading map takes ``[copy][R][E]`` back to ``[C][R]``.

Every controlled-``U`` in these circuits carries the same matrix, the
dilation of ``phi`` with its output side reordered to ``[outputs][traced]``,
so the mate identities hold exactly rather than up to an isometry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import ChoiMatrix, choi_from_stinespring, complementary_channel, compose
from .circuit import (ANCILLA, TRACEOUT, Circuit, Gate, circuit_from_dict, circuit_to_dict,
                      compile_to_channel, swap_registers)
from .errors import CircuitError, CircuitParseError, ContractError

DEGRADABLE = "degradable"
ANTIDEGRADABLE = "antidegradable"


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    embedded: Circuit
    mate: Circuit
    flavor: str
    flag_wire: int

    def to_dict(self) -> dict:
        return {"version": 1, "flavor": self.flavor, "flag_wire": self.flag_wire,
                "embedded": circuit_to_dict(self.embedded), "mate": circuit_to_dict(self.mate)}

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict()).encode("utf-8")

    def __eq__(self, other):
        if not isinstance(other, EmbeddingResult):
            return NotImplemented
        return (self.flavor, self.flag_wire) == (other.flavor, other.flag_wire) and \
            self.embedded == other.embedded and self.mate == other.mate


def embedding_from_dict(doc, path: str = "$") -> EmbeddingResult:
    if not isinstance(doc, dict):
        raise CircuitParseError("embedding envelope must be an object", path)
    flavor = doc.get("flavor")
    if flavor not in (DEGRADABLE, ANTIDEGRADABLE):
        raise CircuitParseError(f"unknown flavor {flavor!r}", f"{path}.flavor")
    flag = doc.get("flag_wire")
    if not isinstance(flag, int) or isinstance(flag, bool):
        raise CircuitParseError("flag_wire must be an integer", f"{path}.flag_wire")
    for key in ("embedded", "mate"):
        if key not in doc:
            raise CircuitParseError(f"missing {key}", path)
    return EmbeddingResult(circuit_from_dict(doc["embedded"], f"{path}.embedded"),
                           circuit_from_dict(doc["mate"], f"{path}.mate"), flavor, flag)


def _prepare(phi: Circuit):
    if not phi.is_square:
        raise ContractError(f"circuit maps {phi.input_qubits} qubits to {phi.output_qubits}; pad it first")
    rep = compile_to_channel(phi)
    a = phi.input_qubits
    e = phi.ancilla_count
    return rep.u, a, e


def degradable_embedding(phi: Circuit) -> EmbeddingResult:
    u, a, e = _prepare(phi)
    A = list(range(a))
    flag, copy = a, a + 1
    E = list(range(a + 2, a + 2 + e))
    gates = [Gate(ANCILLA) for _ in range(2 + e)]
    gates += [Gate("h", (flag,)),
              Gate("cu", tuple(A + E), (flag,), u),
              Gate("cnot", (flag, copy)),
              Gate(TRACEOUT, (copy,))]
    gates += [Gate(TRACEOUT, (w,)) for w in E]
    embedded = Circuit(a, tuple(gates), tuple([flag] + A))

    # mate: inputs [C][A], fresh E, flip the flag, controlled-U, drop A
    mA = list(range(1, a + 1))
    mE = list(range(a + 1, a + 1 + e))
    mg = [Gate(ANCILLA) for _ in range(e)]
    mg += [Gate("x", (0,)), Gate("cu", tuple(mA + mE), (0,), u)]
    mg += [Gate(TRACEOUT, (w,)) for w in mA]
    mate = Circuit(1 + a, tuple(mg), tuple([0] + mE))
    return EmbeddingResult(embedded, mate, DEGRADABLE, flag)


def antidegradable_embedding(phi: Circuit) -> EmbeddingResult:
    u, a, e = _prepare(phi)
    A = list(range(a))
    flag, copy = a, a + 1
    R = list(range(a + 2, 2 * a + 2))
    E = list(range(2 * a + 2, 2 * a + 2 + e))
    sw = swap_registers(a)
    gates = [Gate(ANCILLA) for _ in range(2 + a + e)]
    gates += [Gate("h", (flag,)),
              Gate("cu", tuple(A + R), (flag,), sw),
              Gate("x", (flag,)),
              Gate("cu", tuple(A + E), (flag,), u),
              Gate("cnot", (flag, copy)),
              Gate(TRACEOUT, (copy,))]
    gates += [Gate(TRACEOUT, (w,)) for w in R + E]
    embedded = Circuit(a, tuple(gates), tuple([flag] + A))

    # mate: inputs [copy][R][E]; fresh F swapped into R when the copy reads 1,
    # then flip and run U on (R, E)
    mR = list(range(1, a + 1))
    mE = list(range(a + 1, a + 1 + e))
    mF = list(range(a + 1 + e, 2 * a + 1 + e))
    mg = [Gate(ANCILLA) for _ in range(a)]
    mg += [Gate("cu", tuple(mR + mF), (0,), sw),
           Gate("x", (0,)),
           Gate("cu", tuple(mR + mE), (0,), u)]
    mg += [Gate(TRACEOUT, (w,)) for w in mE + mF]
    mate = Circuit(1 + a + e, tuple(mg), tuple([0] + mR))
    return EmbeddingResult(embedded, mate, ANTIDEGRADABLE, flag)


def embed(phi: Circuit, flavor: str) -> EmbeddingResult:
    if flavor == DEGRADABLE:
        return degradable_embedding(phi)
    if flavor == ANTIDEGRADABLE:
        return antidegradable_embedding(phi)
    raise ValueError(f"unknown flavor {flavor!r}")


@dataclass
class VerificationReport:
    passed: bool
    max_deviation: float
    tol: float
    offending: list = field(default_factory=list)
    detail: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_deviation": self.max_deviation, "tol": self.tol,
                "offending": [list(ix) for ix in self.offending], "detail": self.detail}


def _compare(lhs: ChoiMatrix, rhs: ChoiMatrix, tol: float, limit: int = 20) -> VerificationReport:
    if (lhs.dim_in, lhs.dim_out) != (rhs.dim_in, rhs.dim_out):
        return VerificationReport(False, float("inf"), tol, [],
                                  f"shape mismatch {lhs.dim_in}->{lhs.dim_out} vs {rhs.dim_in}->{rhs.dim_out}")
    dev = np.abs(lhs.m - rhs.m)
    worst = float(dev.max(initial=0.0))
    bad = np.argwhere(dev > tol)
    order = np.argsort(-dev[tuple(bad.T)], kind="stable")[:limit] if bad.size else []
    offending = [tuple(int(v) for v in bad[i]) for i in order]
    return VerificationReport(worst <= tol, worst, tol, offending)


def _compiled(c: Circuit, what: str):
    try:
        return compile_to_channel(c)
    except CircuitError as exc:
        raise CircuitError(f"{what}: {exc}") from None


def verify_degrading(e: EmbeddingResult, tol: float = 1e-9) -> VerificationReport:
    """Check ``Delta ∘ Psi == Psi^C`` entrywise on Choi matrices."""
    if e.flavor != DEGRADABLE:
        raise ContractError("verify_degrading needs a degradable embedding")
    rep = _compiled(e.embedded, "embedded")
    psi = choi_from_stinespring(rep)
    target = complementary_channel(rep)
    mate = choi_from_stinespring(_compiled(e.mate, "mate"))
    if mate.dim_in != psi.dim_out:
        return VerificationReport(False, float("inf"), tol, [], "mate input does not match channel output")
    return _compare(compose(mate, psi), target, tol)


def verify_antidegrading(e: EmbeddingResult, tol: float = 1e-9) -> VerificationReport:
    """Check ``A ∘ Lambda^C == Lambda`` entrywise on Choi matrices."""
    if e.flavor != ANTIDEGRADABLE:
        raise ContractError("verify_antidegrading needs an antidegradable embedding")
    rep = _compiled(e.embedded, "embedded")
    lam = choi_from_stinespring(rep)
    env = complementary_channel(rep)
    mate = choi_from_stinespring(_compiled(e.mate, "mate"))
    if mate.dim_in != env.dim_out:
        return VerificationReport(False, float("inf"), tol, [], "mate input does not match environment")
    return _compare(compose(mate, env), lam, tol)


def verify(e: EmbeddingResult, tol: float = 1e-9) -> VerificationReport:
    return verify_degrading(e, tol) if e.flavor == DEGRADABLE else verify_antidegrading(e, tol)
