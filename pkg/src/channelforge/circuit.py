"""Mixed-state circuits: unitary gates plus ancilla introduction and trace-out.

Wires carry stable integer labels. The declared inputs are ``0..n-1``; each
``ancilla`` gate introduces the next unused label, and ``traceout`` retires a
label for good. Because labels are never reused, moving every ancilla to the
front and every trace-out to the back is a stable partition of the gate list,
which is how :func:`normalize_to_stinespring` works.

The circuit document is UTF-8 JSON::

    {"version": 1, "input_qubits": 1,
     "gates": [{"kind": "ancilla"},
               {"kind": "cnot", "targets": [0, 1]},
               {"kind": "traceout", "targets": [1]}],
     "outputs": [0]}

``outputs`` is optional and fixes the order of the output register; when it
is absent the surviving wires are output in ascending label order. Matrices
are row-major lists of ``[re, im]`` pairs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import CircuitError, CircuitParseError, ShapeError
from .linalg import check_dim, is_unitary, partial_trace, tensor_product

ANCILLA = "ancilla"
TRACEOUT = "traceout"
UNITARY_KINDS = ("h", "x", "cnot", "swap", "cu", "u")
KINDS = (ANCILLA, TRACEOUT) + UNITARY_KINDS

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
_ARITY = {"h": 1, "x": 1, "cnot": 2, "swap": 2}


def swap_registers(nqubits: int) -> np.ndarray:
    """Unitary exchanging two ``nqubits``-qubit registers."""
    d = 2 ** nqubits
    idx = np.arange(d * d).reshape(d, d).T.reshape(-1)
    p = np.zeros((d * d, d * d), dtype=np.complex128)
    p[np.arange(d * d), idx] = 1.0
    return p


def controlled(u: np.ndarray, ncontrols: int = 1) -> np.ndarray:
    """Block-diagonal controlled unitary; acts when every control is ``|1>``."""
    d = u.shape[0]
    total = 2 ** ncontrols * d
    out = np.eye(total, dtype=np.complex128)
    out[total - d:, total - d:] = u
    return out


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple = ()
    controls: tuple = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.matrix is not None:
            object.__setattr__(self, "matrix", np.array(self.matrix, dtype=np.complex128))
        _check_gate(self)

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY_KINDS

    @property
    def wires(self) -> tuple:
        """Wires the gate touches, controls first (the order of :meth:`unitary`)."""
        return self.controls + self.targets

    def unitary(self) -> np.ndarray:
        if self.kind == "h":
            return _H
        if self.kind == "x":
            return _X
        if self.kind == "cnot":
            return _CNOT
        if self.kind == "swap":
            return _SWAP
        if self.kind == "u":
            return self.matrix
        if self.kind == "cu":
            return controlled(self.matrix, len(self.controls))
        raise CircuitError(f"{self.kind} is not a unitary gate")

    def relabel(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping(t) for t in self.targets),
                    tuple(mapping(c) for c in self.controls), self.matrix)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.targets, self.controls) != (other.kind, other.targets, other.controls):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return self.matrix.shape == other.matrix.shape and bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self):
        parts = [self.kind]
        if self.controls:
            parts.append(f"controls={list(self.controls)}")
        if self.targets:
            parts.append(f"targets={list(self.targets)}")
        if self.matrix is not None:
            parts.append(f"matrix={self.matrix.shape[0]}x{self.matrix.shape[1]}")
        return f"Gate({', '.join(parts)})"


def _check_gate(g: Gate) -> None:
    if g.kind not in KINDS:
        raise CircuitError(f"unknown gate kind {g.kind!r}")
    if g.kind == ANCILLA:
        if g.targets or g.controls or g.matrix is not None:
            raise CircuitError("ancilla gate takes no operands")
        return
    if g.kind == TRACEOUT:
        if len(g.targets) != 1 or g.controls:
            raise CircuitError("traceout removes exactly one wire")
        return
    if len(set(g.wires)) != len(g.wires):
        raise CircuitError(f"repeated wire in {g.kind} gate: {list(g.wires)}")
    if g.kind in _ARITY:
        if len(g.targets) != _ARITY[g.kind] or g.controls:
            raise CircuitError(f"{g.kind} needs {_ARITY[g.kind]} target wire(s)")
        if g.matrix is not None:
            raise CircuitError(f"{g.kind} gate does not take a matrix")
        return
    if not g.targets:
        raise CircuitError(f"{g.kind} gate needs targets")
    if g.kind == "cu" and not g.controls:
        raise CircuitError("cu gate needs at least one control")
    if g.kind == "u" and g.controls:
        raise CircuitError("u gate takes no controls; use cu")
    if g.matrix is None:
        raise CircuitError(f"{g.kind} gate needs a matrix")
    d = 2 ** len(g.targets)
    if g.matrix.ndim != 2 or g.matrix.shape != (d, d):
        raise CircuitError(f"matrix dimension mismatch: {g.matrix.shape} for {len(g.targets)} target(s)")
    if not is_unitary(g.matrix, 1e-10):
        raise CircuitError("matrix is not unitary")


@dataclass(frozen=True, eq=False)
class Circuit:
    input_qubits: int
    gates: tuple = ()
    outputs: tuple | None = None
    _live: tuple = field(init=False, repr=False)
    _traced: tuple = field(init=False, repr=False)
    _nanc: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.outputs is not None:
            object.__setattr__(self, "outputs", tuple(int(o) for o in self.outputs))
        if int(self.input_qubits) < 0:
            raise CircuitError("input_qubits must be non-negative")
        object.__setattr__(self, "input_qubits", int(self.input_qubits))
        live = list(range(self.input_qubits))
        alive = set(live)
        nxt = self.input_qubits
        traced = []
        for pos, g in enumerate(self.gates):
            path = f"gates[{pos}]"
            if not isinstance(g, Gate):
                raise CircuitError("not a Gate", path)
            if g.kind == ANCILLA:
                live.append(nxt)
                alive.add(nxt)
                nxt += 1
                continue
            for w in g.wires:
                if w not in alive:
                    raise CircuitError(f"wire not live: {w}", path)
            if g.kind == TRACEOUT:
                w = g.targets[0]
                alive.discard(w)
                live.remove(w)
                traced.append(w)
        if self.outputs is not None:
            if sorted(self.outputs) != sorted(live):
                raise CircuitError(f"outputs {list(self.outputs)} must list the live wires {sorted(live)}",
                                   "outputs")
            live = list(self.outputs)
        else:
            live = sorted(live)
        object.__setattr__(self, "_live", tuple(live))
        object.__setattr__(self, "_traced", tuple(traced))
        object.__setattr__(self, "_nanc", nxt - self.input_qubits)

    @property
    def ancilla_count(self) -> int:
        return self._nanc

    @property
    def total_wires(self) -> int:
        return self.input_qubits + self._nanc

    @property
    def output_wires(self) -> tuple:
        return self._live

    @property
    def traced_wires(self) -> tuple:
        """Discarded wires in the order they were traced out."""
        return self._traced

    @property
    def output_qubits(self) -> int:
        return len(self._live)

    @property
    def is_square(self) -> bool:
        return self.output_qubits == self.input_qubits

    def is_normalized(self) -> bool:
        rank = {ANCILLA: 0, TRACEOUT: 2}
        ranks = [rank.get(g.kind, 1) for g in self.gates]
        return ranks == sorted(ranks)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.input_qubits == other.input_qubits and self.gates == other.gates
                and self.output_wires == other.output_wires)

    def __len__(self):
        return len(self.gates)


def normalize_to_stinespring(c: Circuit) -> Circuit:
    """Move every ancilla to the front and every trace-out to the back.

    Each group keeps its relative order, so wire labels and the trace-out
    order are unchanged.
    """
    anc = [g for g in c.gates if g.kind == ANCILLA]
    uni = [g for g in c.gates if g.is_unitary]
    tr = [g for g in c.gates if g.kind == TRACEOUT]
    return Circuit(c.input_qubits, tuple(anc + uni + tr), c.outputs)


@dataclass(frozen=True, eq=False)
class StinespringRep:
    """Unitary dilation of a channel.

    ``u`` maps ``A ⊗ E_anc`` (inputs, then ancillas in introduction order) to
    ``B ⊗ E_out`` where ``B`` is the output register in ``output_wires`` order
    and ``E_out`` the discarded register in ``env_wires`` order. The channel is
    ``rho -> Tr_{E_out} u (rho ⊗ |0><0|) u^*``.
    """

    u: np.ndarray
    dim_in: int
    dim_env_ancilla: int
    dim_out: int
    dim_env_out: int
    output_wires: tuple = ()
    env_wires: tuple = ()

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.complex128)
        object.__setattr__(self, "u", u)
        if self.dim_in * self.dim_env_ancilla != self.dim_out * self.dim_env_out:
            raise ShapeError("dim_in * dim_env_ancilla must equal dim_out * dim_env_out")
        if u.shape != (self.dim_in * self.dim_env_ancilla,) * 2:
            raise ShapeError(f"unitary has shape {u.shape}, expected side {self.dim_in * self.dim_env_ancilla}")

    def isometry(self) -> np.ndarray:
        """``V: A -> B ⊗ E_out`` obtained by feeding ``|0>`` into every ancilla."""
        return self.u[:, :: self.dim_env_ancilla]

    def apply(self, rho) -> np.ndarray:
        v = self.isometry()
        full = v @ np.asarray(rho, dtype=np.complex128) @ v.conj().T
        return partial_trace(full, [self.dim_out, self.dim_env_out], [1])

    def complement(self) -> "StinespringRep":
        """Rep of the complementary channel: output and environment exchange roles."""
        d = self.dim_out * self.dim_env_out
        idx = np.arange(d).reshape(self.dim_out, self.dim_env_out).T.reshape(-1)
        return StinespringRep(self.u[idx], self.dim_in, self.dim_env_ancilla,
                              self.dim_env_out, self.dim_out, self.env_wires, self.output_wires)

    def tensor(self, other: "StinespringRep") -> "StinespringRep":
        """Rep of ``self ⊗ other`` with registers grouped as [A1 A2], [B1 B2] etc."""
        a1, e1, b1, f1 = self.dim_in, self.dim_env_ancilla, self.dim_out, self.dim_env_out
        a2, e2, b2, f2 = other.dim_in, other.dim_env_ancilla, other.dim_out, other.dim_env_out
        check_dim(a1 * e1 * a2 * e2, "tensor product of dilations")
        u = tensor_product(self.u, other.u)
        t = u.reshape(b1, f1, b2, f2, a1, e1, a2, e2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
        d = a1 * e1 * a2 * e2
        shift = 1 + max(self.output_wires + self.env_wires, default=-1)
        ow = self.output_wires + tuple(w + shift for w in other.output_wires)
        ew = self.env_wires + tuple(w + shift for w in other.env_wires)
        return StinespringRep(t.reshape(d, d), a1 * a2, e1 * e2, b1 * b2, f1 * f2, ow, ew)


def compile_to_channel(c: Circuit, backend=None) -> StinespringRep:
    """Build the dilation unitary of a circuit.

    Registers of the input side are ordered [declared inputs][ancillas in
    introduction order]; the output side is [output wires][traced wires].
    """
    n = c.total_wires
    check_dim(2 ** n, "compiled circuit")
    norm = normalize_to_stinespring(c)
    u = np.eye(2 ** n, dtype=np.complex128)
    for g in norm.gates:
        if g.is_unitary:
            u = kernels.apply_gate(u, g.unitary(), g.wires, n, backend=backend)
    order = list(c.output_wires) + list(c.traced_wires)
    idx = np.arange(2 ** n).reshape((2,) * n).transpose(order).reshape(-1) if n else np.arange(1)
    return StinespringRep(u[idx], 2 ** c.input_qubits, 2 ** c.ancilla_count,
                          2 ** c.output_qubits, 2 ** len(c.traced_wires),
                          tuple(c.output_wires), tuple(c.traced_wires))


def pad_to_square(c: Circuit) -> Circuit:
    """Add untouched wires to the smaller side so inputs and outputs match.

    Extra outputs are fresh ``|0>`` ancillas appended to the output register.
    Extra inputs get the next input labels (existing ancilla labels shift up)
    and are traced out at the end.
    """
    nin, nout = c.input_qubits, c.output_qubits
    if nin == nout:
        return c
    if nout < nin:
        extra = nin - nout
        first = c.total_wires
        gates = c.gates + tuple(Gate(ANCILLA) for _ in range(extra))
        return Circuit(nin, gates, tuple(c.output_wires) + tuple(range(first, first + extra)))
    extra = nout - nin

    def shift(w):
        return w if w < nin else w + extra

    gates = tuple(g.relabel(shift) for g in c.gates)
    gates += tuple(Gate(TRACEOUT, (nin + k,)) for k in range(extra))
    return Circuit(nout, gates, tuple(shift(w) for w in c.output_wires))


# --- serialization ----------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]


def matrix_from_json(obj, path: str = "matrix", shape: tuple | None = None) -> np.ndarray:
    """Decode a flat row-major list of ``[re, im]`` pairs (or a list of such rows)."""
    if not isinstance(obj, list):
        raise CircuitParseError("matrix must be a list", path)
    try:
        if obj and isinstance(obj[0], list) and obj[0] and isinstance(obj[0][0], list):
            rows = [[complex(float(e[0]), float(e[1])) for e in row] for row in obj]
            if len({len(r) for r in rows}) > 1:
                raise CircuitParseError("ragged matrix rows", path)
            m = np.array(rows, dtype=np.complex128)
        else:
            flat = []
            for e in obj:
                if not isinstance(e, list) or len(e) != 2:
                    raise CircuitParseError("entries must be [re, im] pairs", path)
                flat.append(complex(float(e[0]), float(e[1])))
            m = np.array(flat, dtype=np.complex128)
            if shape is None:
                side = math.isqrt(len(flat))
                if side * side != len(flat):
                    raise CircuitParseError(f"matrix dimension mismatch: {len(flat)} entries is not a square", path)
                shape = (side, side)
            if len(flat) != shape[0] * shape[1]:
                raise CircuitParseError(f"matrix dimension mismatch: {len(flat)} entries for shape {shape}", path)
            m = m.reshape(shape)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, CircuitParseError):
            raise
        raise CircuitParseError(f"bad matrix entry ({exc})", path) from None
    if shape is not None and m.shape != tuple(shape):
        raise CircuitParseError(f"matrix dimension mismatch: {m.shape} vs {tuple(shape)}", path)
    return m


def gate_to_json(g: Gate) -> dict:
    doc = {"kind": g.kind}
    if g.controls:
        doc["controls"] = list(g.controls)
    if g.targets:
        doc["targets"] = list(g.targets)
    if g.matrix is not None:
        doc["matrix"] = matrix_to_json(g.matrix)
    return doc


def circuit_to_dict(c: Circuit) -> dict:
    doc = {"version": 1, "input_qubits": c.input_qubits,
           "gates": [gate_to_json(g) for g in c.gates]}
    if c.outputs is not None:
        doc["outputs"] = list(c.outputs)
    return doc


def serialize_circuit(c: Circuit) -> bytes:
    return json.dumps(circuit_to_dict(c)).encode("utf-8")


def _int_list(obj, path):
    if not isinstance(obj, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in obj):
        raise CircuitParseError("expected a list of integers", path)
    return obj


def circuit_from_dict(doc, path: str = "$") -> Circuit:
    if not isinstance(doc, dict):
        raise CircuitParseError("circuit document must be an object", path)
    if doc.get("version", 1) != 1:
        raise CircuitParseError(f"unsupported version {doc.get('version')!r}", f"{path}.version")
    nin = doc.get("input_qubits")
    if not isinstance(nin, int) or isinstance(nin, bool) or nin < 0:
        raise CircuitParseError("input_qubits must be a non-negative integer", f"{path}.input_qubits")
    raw = doc.get("gates", [])
    if not isinstance(raw, list):
        raise CircuitParseError("gates must be a list", f"{path}.gates")
    gates = []
    for i, g in enumerate(raw):
        gp = f"{path}.gates[{i}]"
        if not isinstance(g, dict) or "kind" not in g:
            raise CircuitParseError("gate must be an object with a kind", gp)
        kind = g["kind"]
        if kind not in KINDS:
            raise CircuitParseError(f"unknown gate kind {kind!r}", f"{gp}.kind")
        targets = _int_list(g.get("targets", []), f"{gp}.targets")
        controls = _int_list(g.get("controls", []), f"{gp}.controls")
        matrix = None
        if "matrix" in g:
            matrix = matrix_from_json(g["matrix"], f"{gp}.matrix")
        try:
            gates.append(Gate(kind, tuple(targets), tuple(controls), matrix))
        except CircuitError as exc:
            raise CircuitParseError(exc.message, gp) from None
    outputs = doc.get("outputs")
    if outputs is not None:
        outputs = tuple(_int_list(outputs, f"{path}.outputs"))
    try:
        return Circuit(nin, tuple(gates), outputs)
    except CircuitError as exc:
        sub = exc.path or ""
        where = f"{path}.{sub}" if sub else path
        raise CircuitParseError(exc.message, where) from None


def parse_circuit(data) -> Circuit:
    """Decode a circuit document from ``bytes`` or ``str``."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CircuitParseError(f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CircuitParseError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return circuit_from_dict(doc)


# --- small builders -----------------------------------------------------------

def unitary_circuit(u: np.ndarray) -> Circuit:
    """Circuit applying ``u`` to all of its input qubits."""
    u = np.asarray(u, dtype=np.complex128)
    n = int(round(math.log2(u.shape[0])))
    return Circuit(n, (Gate("u", tuple(range(n)), (), u),))


def wires_of(gates: Sequence[Gate]) -> set:
    return {w for g in gates for w in g.wires}
