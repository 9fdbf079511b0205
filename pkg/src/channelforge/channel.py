"""Choi-matrix representation of channels and the operations built on it.

The Choi matrix of ``Phi: L(A) -> L(B)`` is ``sum_ij |i><j| ⊗ Phi(|i><j|)``,
input factor first and unnormalised (its trace is ``dim_in``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import StinespringRep, matrix_from_json, matrix_to_json
from .errors import CircuitParseError, ShapeError
from .linalg import check_dim, is_psd, partial_trace


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    m: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.complex128)
        object.__setattr__(self, "m", m)
        d = self.dim_in * self.dim_out
        if m.shape != (d, d):
            raise ShapeError(f"Choi matrix of a {self.dim_in}->{self.dim_out} map must be {d}x{d}, got {m.shape}")

    @property
    def tensor(self) -> np.ndarray:
        """View indexed ``[a, b, a', b']``."""
        return self.m.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    def __sub__(self, other: "ChoiMatrix") -> "ChoiMatrix":
        _same_shape(self, other)
        return ChoiMatrix(self.m - other.m, self.dim_in, self.dim_out)

    def __add__(self, other: "ChoiMatrix") -> "ChoiMatrix":
        _same_shape(self, other)
        return ChoiMatrix(self.m + other.m, self.dim_in, self.dim_out)

    def scale(self, c: float) -> "ChoiMatrix":
        return ChoiMatrix(c * self.m, self.dim_in, self.dim_out)

    def is_cptp(self, tol: float = 1e-9) -> bool:
        if not is_psd(self.m, tol):
            return False
        marg = partial_trace(self.m, [self.dim_in, self.dim_out], [1])
        return bool(np.max(np.abs(marg - np.eye(self.dim_in))) <= tol)

    def allclose(self, other: "ChoiMatrix", atol: float = 1e-10) -> bool:
        return (self.dim_in, self.dim_out) == (other.dim_in, other.dim_out) and \
            bool(np.max(np.abs(self.m - other.m), initial=0.0) <= atol)


def _same_shape(a: ChoiMatrix, b: ChoiMatrix) -> None:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ShapeError(f"channel shapes differ: {a.dim_in}->{a.dim_out} vs {b.dim_in}->{b.dim_out}")


@dataclass(frozen=True)
class ChannelPair:
    first: ChoiMatrix
    second: ChoiMatrix

    def __post_init__(self):
        _same_shape(self.first, self.second)

    @property
    def difference(self) -> ChoiMatrix:
        return self.first - self.second

    def swapped(self) -> "ChannelPair":
        return ChannelPair(self.second, self.first)


def _choi_from_isometry(v: np.ndarray, dim_in: int, dim_keep: int, dim_drop: int, keep_first: bool) -> np.ndarray:
    check_dim(dim_in * dim_keep, "Choi matrix")
    t = v.reshape(dim_keep, dim_drop, dim_in) if keep_first else v.reshape(dim_drop, dim_keep, dim_in)
    if keep_first:
        vec = t.transpose(2, 0, 1)  # [a, keep, drop]
    else:
        vec = t.transpose(2, 1, 0)
    j = np.einsum("abe,cde->abcd", vec, vec.conj(), optimize=True)
    d = dim_in * dim_keep
    return j.reshape(d, d)


def choi_from_stinespring(s: StinespringRep) -> ChoiMatrix:
    m = _choi_from_isometry(s.isometry(), s.dim_in, s.dim_out, s.dim_env_out, keep_first=True)
    return ChoiMatrix(m, s.dim_in, s.dim_out)


def complementary_channel(s: StinespringRep) -> ChoiMatrix:
    """Choi matrix of the canonical complement: trace out ``B``, keep ``E_out``."""
    m = _choi_from_isometry(s.isometry(), s.dim_in, s.dim_env_out, s.dim_out, keep_first=False)
    return ChoiMatrix(m, s.dim_in, s.dim_env_out)


def choi_from_kraus(kraus, dim_in: int | None = None) -> ChoiMatrix:
    ks = [np.asarray(k, dtype=np.complex128) for k in kraus]
    dim_out, d_in = ks[0].shape
    if dim_in is not None and d_in != dim_in:
        raise ShapeError("Kraus operators do not match dim_in")
    vecs = np.stack([k.T for k in ks])  # [k, a, b] = K[b, a]
    j = np.einsum("kab,kcd->abcd", vecs, vecs.conj())
    return ChoiMatrix(j.reshape(d_in * dim_out, d_in * dim_out), d_in, dim_out)


def choi_from_map(fn, dim_in: int, dim_out: int) -> ChoiMatrix:
    """Assemble a Choi matrix by evaluating ``fn`` on every ``|i><j|``."""
    j = np.zeros((dim_in, dim_out, dim_in, dim_out), dtype=np.complex128)
    for a in range(dim_in):
        for c in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=np.complex128)
            e[a, c] = 1.0
            j[a, :, c, :] = fn(e)
    d = dim_in * dim_out
    return ChoiMatrix(j.reshape(d, d), dim_in, dim_out)


def identity_channel(d: int) -> ChoiMatrix:
    return choi_from_kraus([np.eye(d)])


def unitary_channel(u) -> ChoiMatrix:
    return choi_from_kraus([np.asarray(u)])


def apply(c: ChoiMatrix, rho) -> np.ndarray:
    """Apply the channel to ``rho``.

    ``rho`` may be an operator on ``A`` or on ``A ⊗ F`` for any reference
    ``F``; in the latter case the result is ``(Phi ⊗ id_F)(rho)`` on ``B ⊗ F``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % c.dim_in:
        raise ShapeError(f"state of shape {rho.shape} does not fit input dimension {c.dim_in}")
    f = rho.shape[0] // c.dim_in
    r = rho.reshape(c.dim_in, f, c.dim_in, f)
    out = np.einsum("afcg,abcd->bfdg", r, c.tensor, optimize=True)
    d = c.dim_out * f
    return out.reshape(d, d)


def compose(outer: ChoiMatrix, inner: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of ``outer ∘ inner``."""
    if outer.dim_in != inner.dim_out:
        raise ShapeError(f"cannot compose: outer takes {outer.dim_in}, inner gives {inner.dim_out}")
    j = np.einsum("abcd,bedf->aecf", inner.tensor, outer.tensor, optimize=True)
    d = inner.dim_in * outer.dim_out
    return ChoiMatrix(j.reshape(d, d), inner.dim_in, outer.dim_out)


def tensor_channels(c1: ChoiMatrix, c2: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of ``c1 ⊗ c2`` ordered [A1 A2][B1 B2]."""
    a1, b1, a2, b2 = c1.dim_in, c1.dim_out, c2.dim_in, c2.dim_out
    d = a1 * a2 * b1 * b2
    check_dim(d, "tensor power Choi matrix")
    t = np.einsum("abcd,efgh->aebfcgdh", c1.tensor, c2.tensor, optimize=True)
    return ChoiMatrix(t.reshape(d, d), a1 * a2, b1 * b2)


def tensor_power(c: ChoiMatrix, k: int) -> ChoiMatrix:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    check_dim((c.dim_in * c.dim_out) ** k, "tensor power Choi matrix")
    out = c
    for _ in range(int(k) - 1):
        out = tensor_channels(out, c)
    return out


# --- serialization ------------------------------------------------------------

def choi_to_dict(c: ChoiMatrix) -> dict:
    return {"version": 1, "kind": "choi", "dim_in": c.dim_in, "dim_out": c.dim_out,
            "matrix": matrix_to_json(c.m)}


def choi_from_dict(doc, path: str = "$") -> ChoiMatrix:
    if not isinstance(doc, dict):
        raise CircuitParseError("channel document must be an object", path)
    for key in ("dim_in", "dim_out"):
        v = doc.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise CircuitParseError(f"{key} must be a positive integer", f"{path}.{key}")
    d = doc["dim_in"] * doc["dim_out"]
    check_dim(d, "Choi matrix")
    if "matrix" not in doc:
        raise CircuitParseError("missing matrix", path)
    m = matrix_from_json(doc["matrix"], f"{path}.matrix", (d, d))
    return ChoiMatrix(m, doc["dim_in"], doc["dim_out"])


def stinespring_to_dict(s: StinespringRep) -> dict:
    return {"u": matrix_to_json(s.u), "dim_in": s.dim_in, "dim_env_ancilla": s.dim_env_ancilla,
            "dim_out": s.dim_out, "dim_env_out": s.dim_env_out,
            "output_wires": list(s.output_wires), "env_wires": list(s.env_wires)}


def stinespring_from_dict(doc, path: str = "$.stinespring") -> StinespringRep:
    if not isinstance(doc, dict):
        raise CircuitParseError("stinespring must be an object", path)
    try:
        side = doc["dim_in"] * doc["dim_env_ancilla"]
        u = matrix_from_json(doc["u"], f"{path}.u", (side, side))
        return StinespringRep(u, doc["dim_in"], doc["dim_env_ancilla"], doc["dim_out"],
                              doc["dim_env_out"], tuple(doc.get("output_wires", ())),
                              tuple(doc.get("env_wires", ())))
    except (KeyError, TypeError, ShapeError) as exc:
        raise CircuitParseError(f"bad stinespring block ({exc})", path) from None
