"""Certified diamond norms and the quantities derived from them.

The diamond norm of a difference of channels is computed from the
semidefinite pair

    max <J, Y>   s.t.  0 ⪯ Y ⪯ rho ⊗ I_B,  rho a density matrix on A
    min ||Tr_B Z||_inf   s.t.  Z ⪰ J,  Z ⪰ 0

whose common value is half the norm (``J`` is the Choi matrix of the
difference). The interior-point output is converted into two rigorous
numbers: the trace distance actually produced by an explicit input state
(lower bound) and the objective of a repaired dual-feasible ``Z`` (upper
bound).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .channel import ChannelPair, ChoiMatrix, apply
from .errors import ContractError, SolverError
from .linalg import check_dim, hermitize, partial_trace, project_density, psd_sqrt, trace_norm

DEFAULT_TOL = 1e-7


@dataclass
class DiamondNormResult:
    value: float
    primal_bound: float
    dual_bound: float
    witness: np.ndarray
    iterations: int

    @property
    def gap(self) -> float:
        return self.dual_bound - self.primal_bound

    def to_dict(self, include_witness: bool = False) -> dict:
        from .circuit import matrix_to_json

        doc = {"value": self.value, "primal_bound": self.primal_bound,
               "dual_bound": self.dual_bound, "iterations": self.iterations}
        if include_witness:
            doc["witness"] = matrix_to_json(self.witness)
        return doc


@dataclass(frozen=True)
class RepetitionBounds:
    lower: float
    upper: float
    k: int
    delta: float


def _diamond_blocks(j: np.ndarray, da: int, db: int):
    n = da * db
    m1 = n * n
    m = m1 + da * da
    bi, br, bc, bv = sdp.hermitian_basis(n)
    ai, ar, ac, av = sdp.hermitian_basis(da)
    # A-basis lifted to A ⊗ I_B
    rep = np.arange(db)
    li = np.repeat(ai, db) + m1
    lr = (np.repeat(ar, db) * db + np.tile(rep, ar.size))
    lc = (np.repeat(ac, db) * db + np.tile(rep, ac.size))
    lv = np.repeat(av, db)
    zero_n = np.zeros((n, n), dtype=np.complex128)
    z_block = sdp.make_block(zero_n, m, np.concatenate([bi, li]), np.concatenate([br, lr]),
                             np.concatenate([bc, lc]), np.concatenate([bv, lv]))
    w_block = sdp.make_block(zero_n, m, bi, br, bc, -bv)
    p_block = sdp.make_block(np.zeros((da, da), dtype=np.complex128), m, ai + m1, ar, ac, av)
    diag = ar == ac
    t_block = sdp.make_block(np.ones((1, 1), dtype=np.complex128), m, ai[diag] + m1,
                             np.zeros(diag.sum(), dtype=np.int64), np.zeros(diag.sum(), dtype=np.int64),
                             -av[diag])
    b = np.zeros(m)
    b[:m1] = sdp.basis_coefficients(j)
    return [z_block, w_block, p_block, t_block], b


def _witness_state(rho: np.ndarray) -> np.ndarray:
    """Purification ``sum K[a,f] |a>|f>`` with ``K = sqrt(rho)^T``."""
    k = psd_sqrt(rho).T
    psi = k.reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def witness_value(diff: ChoiMatrix, witness: np.ndarray) -> float:
    """Trace norm of ``(Xi ⊗ id)(witness)`` for a Hermitian-preserving ``Xi``."""
    return trace_norm(apply(diff, witness))


def diamond_norm(pair: ChannelPair, tol: float = DEFAULT_TOL, max_iter: int = 500,
                 backend=None) -> DiamondNormResult:
    """Diamond norm of ``pair.first - pair.second`` with a certified gap ``<= tol``."""
    if not tol > 0:
        raise ContractError("tol must be positive")
    diff = pair.difference
    da, db = diff.dim_in, diff.dim_out
    check_dim(da * db, "diamond norm Choi matrix")
    j = hermitize(diff.m)
    blocks, b = _diamond_blocks(j, da, db)
    gap_tol = min(1e-10, tol * 1e-3)
    res = sdp.solve(blocks, b, gap_tol=gap_tol, feas_tol=gap_tol, max_iter=max_iter, backend=backend)

    rho = project_density(res.s[2])
    witness = _witness_state(rho)
    primal = witness_value(diff, witness)

    z = hermitize(res.x[0], tol=1e-6)
    shift = max(0.0, -float(np.linalg.eigvalsh(z - j)[0]), -float(np.linalg.eigvalsh(z)[0]))
    top = float(np.linalg.eigvalsh(hermitize(partial_trace(z, [da, db], [1]), tol=1e-6))[-1])
    dual = min(2.0, 2.0 * (top + shift * db))
    primal = min(primal, 2.0)
    if dual < primal:
        # both sides are exact up to rounding here
        dual = primal
    if dual - primal > tol:
        raise SolverError(f"diamond norm gap {dual - primal:.3e} exceeds tolerance {tol:.1e} "
                          f"(solver status {res.status})", lower=primal, upper=dual,
                          iterations=res.iterations)
    return DiamondNormResult(0.5 * (primal + dual), primal, dual, witness, res.iterations)


def identification_probability(value: float) -> float:
    """Best single-shot success probability for telling two channels apart."""
    if not 0.0 <= value <= 2.0:
        raise ContractError(f"diamond norm of a channel difference lies in [0, 2], got {value}")
    return 0.5 + value / 4.0


def repetition_bounds(delta: float, k: int) -> RepetitionBounds:
    """Bounds on the k-fold parallel-repetition norm given single-copy norm ``delta``."""
    if not delta > 0:
        raise ContractError("delta must be positive")
    if int(k) != k or k < 1:
        raise ContractError("k must be a positive integer")
    k = int(k)
    return RepetitionBounds(2.0 - 2.0 * math.exp(-k * delta * delta / 8.0), k * delta, k, float(delta))


def theorem_parameters(a: float, b: float) -> tuple[int, float]:
    """Repetition count and base threshold amplifying ``(1-eps, eps)`` to ``(a, b)``.

    ``k = ceil(-16 ln(1 - a/2))`` and ``eps = min(1/4, b/k)``; ``eps`` is then
    nudged one ulp at a time below ``b/k`` so ``k * eps < b`` holds strictly
    in floating point.
    """
    if not 0 < b < a < 2:
        raise ContractError(f"need 0 < b < a < 2, got a={a}, b={b}")
    k = max(1, math.ceil(-16.0 * math.log(1.0 - a / 2.0)))
    while True:
        eps = min(0.25, b / k)
        while k * eps >= b:
            eps = math.nextafter(eps, 0.0)
        if 2.0 - 2.0 * math.exp(-k * (1.0 - 2.0 * eps) / 8.0) > a:
            return k, eps
        k += 1


def decide_qcd(pair: ChannelPair, a: float, b: float, tol: float = DEFAULT_TOL) -> str:
    """Answer the promise problem: ``"yes"`` (norm >= a), ``"no"`` (<= b) or ``"indeterminate"``."""
    if not 0 <= b < a <= 2:
        raise ContractError(f"need 0 <= b < a <= 2, got a={a}, b={b}")
    if not 0 < tol < (a - b) / 2:
        raise ContractError("tol must be positive and below half the promise gap")
    value = diamond_norm(pair, tol).value
    if value >= a - tol:
        return "yes"
    if value <= b + tol:
        return "no"
    return "indeterminate"


def sampled_lower_bound(pair: ChannelPair, samples: int, seed=0, batch: int = 256) -> float:
    """Largest output trace distance over random pure inputs on ``A ⊗ F``.

    Independent of the SDP path; it can only under-estimate the norm.
    """
    if samples < 1:
        raise ContractError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    diff = pair.difference
    da, db = diff.dim_in, diff.dim_out
    jt = diff.tensor  # [a, b, c, d]
    best = 0.0
    done = 0
    while done < samples:
        nb = min(batch, samples - done)
        z = rng.standard_normal((nb, da, da)) + 1j * rng.standard_normal((nb, da, da))
        z /= np.linalg.norm(z.reshape(nb, -1), axis=1)[:, None, None]
        # output[b, f, d, g] = sum_{a,c} psi[a,f] conj(psi[c,g]) J[a,b,c,d]
        out = np.einsum("naf,ncg,abcd->nbfdg", z, z.conj(), jt, optimize=True)
        out = out.reshape(nb, db * da, db * da)
        out = 0.5 * (out + out.conj().transpose(0, 2, 1))
        vals = np.abs(np.linalg.eigvalsh(out)).sum(axis=1)
        best = max(best, float(vals.max()))
        done += nb
    return best
