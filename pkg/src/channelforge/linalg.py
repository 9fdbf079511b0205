"""Dense complex linear algebra on ``numpy`` arrays.

Matrices are plain ``complex128`` arrays. Multipartite operators use
big-endian subsystem order: the first entry of ``dims`` is the most
significant tensor factor, exactly as ``np.kron`` lays them out.
"""
from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

from .config import dim_cap
from .errors import ContractError, ShapeError, SizeLimitError

HERMITIAN_REPAIR_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def check_dim(n: int, what: str = "matrix") -> None:
    """Raise :class:`SizeLimitError` when a side length exceeds the cap."""
    cap = dim_cap()
    if n > cap:
        raise SizeLimitError(f"dimension cap exceeded: {what} needs {n} > {cap}")


def tensor_product(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    check_dim(a.shape[0] * b.shape[0], "tensor product")
    check_dim(a.shape[1] * b.shape[1], "tensor product")
    return np.kron(a, b)


def kron_all(mats: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = tensor_product(out, m)
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"square matrix required, got {m.shape}")
    if any(int(d) < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive: {list(dims)}")
    if prod(dims) != m.shape[0]:
        raise ShapeError(f"dims {list(dims)} do not multiply to {m.shape[0]}")


def partial_trace(m, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems listed in ``traced``; survivors keep their order."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    traced = sorted(set(int(t) for t in traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise ShapeError(f"traced indices {traced} out of range for {len(dims)} subsystems")
    if not traced:
        return m.copy()
    kept = [i for i in range(len(dims)) if i not in traced]
    n = len(dims)
    t = m.reshape(dims + dims)
    perm = kept + traced
    t = t.transpose(perm + [p + n for p in perm])
    dk = prod(dims[i] for i in kept)
    dt = prod(dims[i] for i in traced)
    return np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator.

    The returned operator has subsystem ``k`` equal to subsystem ``perm[k]`` of
    the input.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(len(dims))):
        raise ShapeError(f"{perm} is not a permutation of {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims).transpose(perm + [p + n for p in perm])
    return t.reshape(m.shape)


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary P with ``P (x_0 ⊗ ... ⊗ x_k) = x_perm[0] ⊗ ... ⊗ x_perm[k]``."""
    dims = [int(d) for d in dims]
    total = prod(dims)
    idx = np.arange(total).reshape(dims).transpose(perm).reshape(-1)
    p = np.zeros((total, total), dtype=np.complex128)
    p[np.arange(total), idx] = 1.0
    return p


def hermitize(m, tol: float = HERMITIAN_REPAIR_TOL) -> np.ndarray:
    """Return ``(M + M^H)/2``; drift larger than ``tol`` is a contract error."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"square matrix required, got {m.shape}")
    drift = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if drift > tol * scale:
        raise ContractError(f"matrix is not Hermitian (drift {drift:.3e})")
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in ascending order and the unitary of eigenvectors."""
    h = hermitize(m)
    w, v = np.linalg.eigh(h)
    return w, v


def eigvalsh(m) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(m))


def trace_norm(m) -> float:
    """Schatten-1 norm. Hermitian input uses the eigenvalue route."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"trace norm needs a square matrix, got {m.shape}")
    if m.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) <= HERMITIAN_REPAIR_TOL * scale:
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def is_psd(m, tol: float = 1e-9) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    if m.size == 0:
        return True
    if np.max(np.abs(m - m.conj().T)) > max(tol, HERMITIAN_REPAIR_TOL):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] >= -tol)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def psd_sqrt(m) -> np.ndarray:
    """Square root of a PSD matrix, clipping tiny negative eigenvalues."""
    w, v = hermitian_eig(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def project_density(m) -> np.ndarray:
    """Nearest-by-clipping density matrix: drop negative eigenvalues, renormalise."""
    w, v = hermitian_eig(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(m.shape[0], dtype=np.complex128) / m.shape[0]
    w = w / w.sum()
    return (v * w) @ v.conj().T


def ket(bits: str) -> np.ndarray:
    """Computational basis column vector, e.g. ``ket("01")``."""
    v = np.zeros((2 ** len(bits), 1), dtype=np.complex128)
    v[int(bits, 2), 0] = 1.0
    return v


def projector(bits: str) -> np.ndarray:
    k = ket(bits)
    return k @ k.conj().T
