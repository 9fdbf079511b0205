"""Hot loops with a compiled numba path and an equivalent numpy path.

The compiled path is used unless ``CHANNELFORGE_NUMBA=0`` is set (or numba is
missing). Every public function also accepts ``backend="numba"|"numpy"`` so
the two paths can be compared directly; see ``benchmarks/bench_kernels.py``.
"""
from __future__ import annotations

import numpy as np

from .config import numba_enabled

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _pick(backend):
    if backend is None:
        return "numba" if (HAVE_NUMBA and numba_enabled()) else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# --- gate application -------------------------------------------------------

def _apply_gate_numpy(mat, gate, targets, nqubits):
    k = len(targets)
    cols = mat.shape[1]
    t = mat.reshape((2,) * nqubits + (cols,))
    g = gate.reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the gate's output axes first
    t = np.moveaxis(t, list(range(k)), list(targets))
    return np.ascontiguousarray(t.reshape(mat.shape))


if HAVE_NUMBA:

    @njit(cache=True)
    def _apply_gate_nb(mat, gate, targets, nqubits):
        k = targets.shape[0]
        dim = mat.shape[0]
        cols = mat.shape[1]
        sub = 1 << k
        offsets = np.zeros(sub, dtype=np.int64)
        mask = 0
        for j in range(k):
            mask |= 1 << (nqubits - 1 - targets[j])
        for s in range(sub):
            off = 0
            for j in range(k):
                if (s >> (k - 1 - j)) & 1:
                    off |= 1 << (nqubits - 1 - targets[j])
            offsets[s] = off
        out = np.empty_like(mat)
        idx = np.empty(sub, dtype=np.int64)
        for base in range(dim):
            if base & mask:
                continue
            for s in range(sub):
                idx[s] = base | offsets[s]
            for c in range(cols):
                for r in range(sub):
                    acc = 0j
                    for s in range(sub):
                        acc += gate[r, s] * mat[idx[s], c]
                    out[idx[r], c] = acc
        return out

    @njit(cache=True)
    def _schur_sparse_nb(ptr, rows, cols, vals, X, Sinv, M):
        m = ptr.shape[0] - 1
        for i in range(m):
            if ptr[i] == ptr[i + 1]:
                continue
            for j in range(i, m):
                acc = 0.0
                for a in range(ptr[i], ptr[i + 1]):
                    p = rows[a]
                    q = cols[a]
                    va = vals[a]
                    for c in range(ptr[j], ptr[j + 1]):
                        acc += (va * vals[c] * X[q, rows[c]] * Sinv[cols[c], p]).real
                M[i, j] += acc
                if i != j:
                    M[j, i] += acc


def apply_gate(mat, gate, targets, nqubits, backend=None):
    """Left-multiply ``mat`` (shape ``(2**nqubits, cols)``) by ``gate`` on ``targets``.

    Qubit 0 is the most significant bit of the row index.
    """
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    targets = np.asarray(targets, dtype=np.int64)
    if _pick(backend) == "numba":
        return _apply_gate_nb(mat, gate, targets, int(nqubits))
    return _apply_gate_numpy(mat, gate, [int(t) for t in targets], int(nqubits))


# --- Schur complement -------------------------------------------------------

class SparseConstraints:
    """Constraint matrices of one block in CSR-by-constraint coordinate form.

    Entries of constraint ``i`` live in ``rows/cols/vals[ptr[i]:ptr[i+1]]``.
    """

    def __init__(self, m, n, ci, rows, cols, vals):
        order = np.argsort(ci, kind="stable")
        ci = np.asarray(ci, dtype=np.int64)[order]
        self.m = int(m)
        self.n = int(n)
        self.rows = np.ascontiguousarray(np.asarray(rows, dtype=np.int64)[order])
        self.cols = np.ascontiguousarray(np.asarray(cols, dtype=np.int64)[order])
        self.vals = np.ascontiguousarray(np.asarray(vals, dtype=np.complex128)[order])
        self.ci = ci
        self.ptr = np.searchsorted(ci, np.arange(self.m + 1)).astype(np.int64)

    @property
    def nnz(self):
        return self.vals.shape[0]

    def dense(self):
        a = np.zeros((self.m, self.n, self.n), dtype=np.complex128)
        np.add.at(a, (self.ci, self.rows, self.cols), self.vals)
        return a

    def apply(self, x):
        """Vector of ``Re Tr(A_i X)``."""
        contrib = (self.vals * x[self.cols, self.rows]).real
        return np.bincount(self.ci, weights=contrib, minlength=self.m)

    def adjoint(self, y):
        """``sum_i y_i A_i``."""
        w = y[self.ci] * self.vals
        lin = self.rows * self.n + self.cols
        re = np.bincount(lin, weights=w.real, minlength=self.n * self.n)
        im = np.bincount(lin, weights=w.imag, minlength=self.n * self.n)
        return (re + 1j * im).reshape(self.n, self.n)


def schur_dense(a, x, sinv):
    """``M_ij = Re Tr(A_i X A_j S^{-1})`` for dense ``a`` of shape ``(m, n, n)``."""
    m = a.shape[0]
    g = np.matmul(np.matmul(x, a), sinv)
    lhs = a.reshape(m, -1)
    rhs = np.ascontiguousarray(g.transpose(0, 2, 1)).reshape(m, -1)
    return (lhs @ rhs.T).real


def schur_sparse(sp: SparseConstraints, x, sinv, backend=None):
    """Same contraction as :func:`schur_dense` for coordinate-form constraints."""
    if _pick(backend) == "numba":
        out = np.zeros((sp.m, sp.m))
        _schur_sparse_nb(sp.ptr, sp.rows, sp.cols, sp.vals,
                         np.ascontiguousarray(x), np.ascontiguousarray(sinv), out)
        return out
    return schur_dense(sp.dense(), x, sinv)
