"""Primal-dual interior-point method for complex Hermitian SDPs.

Solves the standard-form pair::

    (P)  min  sum_b <C_b, X_b>   s.t.  sum_b <A_bi, X_b> = b_i,  X_b ⪰ 0
    (D)  max  b·y                s.t.  C_b - sum_i y_i A_bi = S_b ⪰ 0

with Hermitian data, real ``y``, an infeasible start, the HKM search
direction and Mehrotra's predictor-corrector step. The solver only promises an
approximate primal-dual pair; callers turn that pair into rigorous bounds.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .kernels import SparseConstraints

log = logging.getLogger(__name__)

DENSE_FILL = 0.1
# iterations without a new best iterate before giving up
NO_PROGRESS = 20


@dataclass
class Block:
    """One PSD block: cost matrix plus the block's slice of every constraint.

    Exactly one of ``dense`` (shape ``(m, n, n)``) and ``sparse`` is set.
    """

    c: np.ndarray
    dense: np.ndarray | None = None
    sparse: SparseConstraints | None = None

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def op(self, x):
        if self.dense is not None:
            m = self.dense.shape[0]
            return (self.dense.reshape(m, -1) @ x.T.reshape(-1)).real
        return self.sparse.apply(x)

    def adj(self, y):
        if self.dense is not None:
            return np.tensordot(y, self.dense, axes=1)
        return self.sparse.adjoint(y)

    def schur(self, x, sinv, backend=None):
        if self.dense is not None:
            return kernels.schur_dense(self.dense, x, sinv)
        return kernels.schur_sparse(self.sparse, x, sinv, backend=backend)

    def fro_norms(self):
        """Frobenius norm of each constraint matrix restricted to this block."""
        if self.dense is not None:
            return np.sqrt(np.sum(np.abs(self.dense) ** 2, axis=(1, 2)))
        sq = np.bincount(self.sparse.ci, weights=np.abs(self.sparse.vals) ** 2, minlength=self.sparse.m)
        return np.sqrt(sq)


def make_block(c, m, ci=None, rows=None, cols=None, vals=None, dense=None) -> Block:
    """Build a block from coordinate data, densifying when the fill is high."""
    c = np.asarray(c, dtype=np.complex128)
    n = c.shape[0]
    if dense is not None:
        return Block(c, dense=np.ascontiguousarray(dense, dtype=np.complex128))
    sp = SparseConstraints(m, n, ci, rows, cols, vals)
    if sp.nnz > DENSE_FILL * m * n * n and m * n * n <= 4_000_000:
        return Block(c, dense=sp.dense())
    return Block(c, sparse=sp)


@dataclass
class SDPResult:
    x: list
    s: list
    y: np.ndarray
    pobj: float
    dobj: float
    iterations: int
    status: str
    relgap: float
    pinf: float
    dinf: float
    history: list = field(default_factory=list, repr=False)


def _inner(a, b):
    return float(np.sum(a * b.conj()).real)


def _herm(a):
    return 0.5 * (a + a.conj().T)


def _max_step(x, dx):
    """Largest ``alpha`` keeping ``x + alpha dx`` PSD (``x`` positive definite)."""
    try:
        lo = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    li = sla.solve_triangular(lo, np.eye(x.shape[0]), lower=True)
    w = np.linalg.eigvalsh(_herm(li @ dx @ li.conj().T))
    if w[0] >= 0:
        return math.inf
    return -1.0 / w[0]


def _initial_point(blocks, b):
    x0, s0 = [], []
    for blk in blocks:
        n = blk.n
        norms = blk.fro_norms()
        xi = max(10.0, math.sqrt(n), float(np.max(math.sqrt(n) * (1 + np.abs(b)) / (1 + norms), initial=0)))
        cn = float(np.linalg.norm(blk.c))
        eta = max(10.0, math.sqrt(n), float(np.max(norms, initial=0)), cn)
        x0.append(xi * np.eye(n, dtype=np.complex128))
        s0.append(eta * np.eye(n, dtype=np.complex128))
    return x0, s0


def solve(blocks, b, *, gap_tol=1e-10, feas_tol=1e-10, max_iter=500, backend=None) -> SDPResult:
    b = np.asarray(b, dtype=float)
    m = b.shape[0]
    ntot = sum(blk.n for blk in blocks)
    x, s = _initial_point(blocks, b)
    y = np.zeros(m)
    normb = float(np.linalg.norm(b))
    normc = math.sqrt(sum(float(np.linalg.norm(blk.c)) ** 2 for blk in blocks))
    best = None
    status = "max_iter"
    history = []
    stall = 0
    it = 0

    for it in range(max_iter + 1):
        ax = sum(blk.op(xb) for blk, xb in zip(blocks, x))
        aty = [blk.adj(y) for blk in blocks]
        rp = b - ax
        rd = [_herm(blk.c - a - sb) for blk, a, sb in zip(blocks, aty, s)]
        mu = sum(_inner(xb, sb) for xb, sb in zip(x, s)) / ntot
        pobj = sum(_inner(blk.c, xb) for blk, xb in zip(blocks, x))
        dobj = float(b @ y)
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / (1 + normb)
        dinf = math.sqrt(sum(float(np.linalg.norm(r)) ** 2 for r in rd)) / (1 + normc)
        history.append((it, pobj, dobj, relgap, pinf, dinf))
        score = max(relgap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, [xb.copy() for xb in x], [sb.copy() for sb in s], y.copy(),
                    pobj, dobj, relgap, pinf, dinf, it)
        if relgap < gap_tol and pinf < feas_tol and dinf < feas_tol:
            status = "optimal"
            break
        if it == max_iter:
            break
        if it - best[-1] > NO_PROGRESS:
            status = "stalled"
            break

        try:
            sinv = []
            for sb in s:
                lo = np.linalg.cholesky(sb)
                li = sla.solve_triangular(lo, np.eye(sb.shape[0]), lower=True)
                sinv.append(li.conj().T @ li)
        except np.linalg.LinAlgError:
            status = "numerical"
            break

        mat = np.zeros((m, m))
        for blk, xb, si in zip(blocks, x, sinv):
            mat += blk.schur(xb, si, backend=backend)
        mat = 0.5 * (mat + mat.T)
        try:
            factor = sla.cho_factor(mat, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            reg = 1e-14 * max(1.0, float(np.max(np.diag(mat))))
            try:
                factor = sla.cho_factor(mat + reg * np.eye(m), lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                status = "numerical"
                break
        xrd = [xb @ r @ si for xb, r, si in zip(x, rd, sinv)]

        def direction(rr):
            rhs = rp - sum(blk.op(r - q) for blk, r, q in zip(blocks, rr, xrd))
            dy = sla.cho_solve(factor, rhs, check_finite=False)
            ds = [r - blk.adj(dy) for blk, r in zip(blocks, rd)]
            dx = [_herm(r - xb @ d @ si) for r, xb, d, si in zip(rr, x, ds, sinv)]
            return dx, dy, ds

        def steps(dx, ds, gamma):
            ap = min(1.0, gamma * min(_max_step(xb, d) for xb, d in zip(x, dx)))
            ad = min(1.0, gamma * min(_max_step(sb, d) for sb, d in zip(s, ds)))
            return ap, ad

        # predictor
        dxa, dya, dsa = direction([-xb for xb in x])
        ap, ad = steps(dxa, dsa, 1.0)
        mu_aff = sum(_inner(xb + ap * d1, sb + ad * d2)
                     for xb, d1, sb, d2 in zip(x, dxa, s, dsa)) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        # corrector
        rr = [sigma * mu * si - xb - d1 @ d2 @ si for si, xb, d1, d2 in zip(sinv, x, dxa, dsa)]
        dx, dy, ds = direction(rr)
        gamma = 0.9 + 0.09 * min(ap, ad)
        ap, ad = steps(dx, ds, gamma)
        x = [xb + ap * d for xb, d in zip(x, dx)]
        y = y + ad * dy
        s = [_herm(sb + ad * d) for sb, d in zip(s, ds)]
        if max(ap, ad) < 1e-9:
            stall += 1
            if stall >= 3:
                status = "stalled"
                break
        else:
            stall = 0

    _, bx, bs, by, pobj, dobj, relgap, pinf, dinf, bit = best
    if status != "optimal":
        log.debug("sdp stopped with status %s after %d iterations", status, it)
    return SDPResult(bx, bs, by, pobj, dobj, it, status, relgap, pinf, dinf, history)


# --- Hermitian bases ------------------------------------------------------------

def hermitian_basis(k: int):
    """Orthonormal basis of k×k Hermitian matrices in coordinate form.

    Returns ``(idx, rows, cols, vals)``; basis element ``s`` is the sum of
    ``vals`` at ``(rows, cols)`` where ``idx == s``. Diagonal units come first.
    """
    idx, rows, cols, vals = [], [], [], []
    r2 = 1 / math.sqrt(2)
    s = 0
    for p in range(k):
        idx.append(s); rows.append(p); cols.append(p); vals.append(1.0)
        s += 1
    for p in range(k):
        for q in range(p + 1, k):
            idx += [s, s]; rows += [p, q]; cols += [q, p]; vals += [r2, r2]
            s += 1
            idx += [s, s]; rows += [p, q]; cols += [q, p]; vals += [-1j * r2, 1j * r2]
            s += 1
    return (np.array(idx, dtype=np.int64), np.array(rows, dtype=np.int64),
            np.array(cols, dtype=np.int64), np.array(vals, dtype=np.complex128))


def hermitian_basis_dense(k: int) -> np.ndarray:
    idx, rows, cols, vals = hermitian_basis(k)
    out = np.zeros((k * k, k, k), dtype=np.complex128)
    out[idx, rows, cols] = vals
    return out


def basis_coefficients(h) -> np.ndarray:
    """Coordinates ``Tr(B_s H)`` of a Hermitian matrix in :func:`hermitian_basis`."""
    h = np.asarray(h, dtype=np.complex128)
    k = h.shape[0]
    idx, rows, cols, vals = hermitian_basis(k)
    contrib = (vals * h[cols, rows]).real
    return np.bincount(idx, weights=contrib, minlength=k * k)


def basis_combination(coeffs, k: int) -> np.ndarray:
    """Inverse of :func:`basis_coefficients`."""
    idx, rows, cols, vals = hermitian_basis(k)
    out = np.zeros((k, k), dtype=np.complex128)
    np.add.at(out, (rows, cols), np.asarray(coeffs)[idx] * vals)
    return out
