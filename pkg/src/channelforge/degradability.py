"""Semidefinite tests for degradability and antidegradability.

Both questions have the form: given Choi matrices ``J`` (of ``Phi: A -> B``)
and ``T`` (of ``Gamma: A -> F``), is there a channel ``D: B -> F`` with
``D ∘ Phi = Gamma``? With ``L(D)`` the Choi matrix of ``D ∘ Phi`` we solve

    min t   s.t.  L(D) - T ⪯ t I,   Tr_F D = I_B,   D ⪰ 0.

Both ``L(D)`` and ``T`` have trace ``dim A``, so ``t = 0`` forces equality and
any ``t > 0`` lower-bounds ``||L(D) - T||`` in every unitarily invariant norm.

``L`` has Kraus operators ``W_k ⊗ I_F`` where ``W_k`` are the eigenvectors of
``J`` reshaped to ``A x B``. Only the restriction of ``D`` to the span ``V`` of
their rows matters, so the search runs over channels ``V -> F`` and the
result is extended to ``B`` afterwards. This is exact, not a relaxation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from . import sdp
from .channel import ChoiMatrix, choi_from_stinespring, choi_to_dict, complementary_channel, compose
from .circuit import StinespringRep
from .errors import ContractError, SizeLimitError, SolverError
from .linalg import check_dim, hermitize, partial_trace

DEFAULT_TOL = 1e-7
CERT_CPTP_TOL = 1e-8
RANK_TOL = 1e-10
# largest (constraint count)**2 we are willing to factor densely
MAX_SCHUR_ENTRIES = 30_000_000


@dataclass
class FeasibilityReport:
    """Outcome of a degradability-type test.

    ``residual`` is the Frobenius distance between the composed certificate
    and the target (or of the best repaired candidate when infeasible).
    ``infeasibility_margin`` is a certified lower bound on the largest
    eigenvalue of ``L(D) - T`` over all channels ``D``.
    """

    feasible: bool
    residual: float
    certificate: ChoiMatrix | None = None
    infeasibility_margin: float | None = None
    iterations: int = 0
    status: str = ""

    def to_dict(self, include_certificate: bool = False) -> dict:
        doc = {"feasible": self.feasible, "residual": self.residual,
               "infeasibility_margin": self.infeasibility_margin,
               "iterations": self.iterations, "status": self.status}
        if include_certificate and self.certificate is not None:
            doc["certificate"] = choi_to_dict(self.certificate)
        return doc


def link_kraus(j: ChoiMatrix):
    """Operators ``W_k`` with ``J = sum_k vec(W_k) vec(W_k)^*`` and an isometry onto their row span."""
    w, v = np.linalg.eigh(hermitize(j.m, tol=1e-8))
    keep = w > RANK_TOL * max(1.0, float(w[-1]))
    wk = (v[:, keep] * np.sqrt(w[keep])).T.reshape(-1, j.dim_in, j.dim_out)
    stacked = wk.reshape(-1, j.dim_out)
    _, s, vh = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * max(1.0, float(s[0]))))
    q = vh[:rank].conj().T  # dim_out x rank
    return wk, q


class LinkBlock:
    """The ``D`` block: rows ``L*(B_i)`` for the ``N x N`` basis, then ``B_r ⊗ I_F`` for trace preservation."""

    def __init__(self, w: np.ndarray, dim_f: int):
        self.w = w  # (r, dA, dv)
        self.r, self.da, self.dv = w.shape
        self.df = dim_f
        self.big_n = self.da * dim_f
        self.nn = self.big_n ** 2
        self.m = self.nn + self.dv ** 2
        self.c = np.zeros((self.n, self.n), dtype=np.complex128)
        bi, br, bc, bv = sdp.hermitian_basis(self.big_n)
        self._coef = sps.csr_matrix((bv, (bi, br * self.big_n + bc)), shape=(self.nn, self.nn))
        self._tp = np.stack([np.kron(b, np.eye(dim_f)) for b in sdp.hermitian_basis_dense(self.dv)])

    @property
    def n(self) -> int:
        return self.dv * self.df

    def link(self, x):
        x4 = x.reshape(self.dv, self.df, self.dv, self.df)
        out = np.einsum("kab,bfcg,kdc->afdg", self.w, x4, self.w.conj(), optimize=True)
        return out.reshape(self.big_n, self.big_n)

    def link_adj(self, y):
        y4 = y.reshape(self.da, self.df, self.da, self.df)
        out = np.einsum("kab,afcg,kcd->bfdg", self.w.conj(), y4, self.w, optimize=True)
        return out.reshape(self.n, self.n)

    def _tr_f(self, x):
        return np.einsum("afbf->ab", x.reshape(self.dv, self.df, self.dv, self.df))

    def op(self, x):
        return np.concatenate([sdp.basis_coefficients(self.link(x)),
                               sdp.basis_coefficients(self._tr_f(x))])

    def adj(self, y):
        h = sdp.basis_combination(y[self.nn:], self.dv)
        return self.link_adj(sdp.basis_combination(y[:self.nn], self.big_n)) + np.kron(h, np.eye(self.df))

    def _pair(self, x):
        """``K_k X K_l^*`` for every ``k, l`` as an array ``[k, l, N, N]``."""
        x4 = x.reshape(self.dv, self.df, self.dv, self.df)
        t = np.einsum("kab,bfcg->kafcg", self.w, x4, optimize=True)
        out = np.einsum("kafcg,ldc->klafdg", t, self.w.conj(), optimize=True)
        return out.reshape(self.r, self.r, self.big_n, self.big_n)

    def schur(self, x, sinv, backend=None):
        big_n, nn, r = self.big_n, self.nn, self.r
        p = self._pair(x)
        q = self._pair(sinv).transpose(1, 0, 2, 3)  # [k, l] holds K_l S^-1 K_k^*
        # elem[(q, r'), (s, p')] = sum_kl P_kl[q, r'] Q_lk[s, p']
        elem = p.reshape(r * r, nn).T @ q.reshape(r * r, nn)
        elem = elem.reshape(big_n, big_n, big_n, big_n).transpose(3, 0, 1, 2).reshape(nn, nn)
        mll = (self._coef @ (self._coef @ elem).T).T.real
        z = [x @ b @ sinv for b in self._tp]
        mlt = np.stack([sdp.basis_coefficients(self.link(zj)) for zj in z], axis=1)
        mtt = np.stack([sdp.basis_coefficients(self._tr_f(zj)) for zj in z], axis=1)
        return np.block([[mll, mlt], [mlt.T, mtt]])

    def fro_norms(self):
        eye = np.eye(self.n, dtype=np.complex128)
        return np.sqrt(np.clip(np.diag(self.schur(eye, eye)), 0.0, None))


def _residual(cert: ChoiMatrix, j: ChoiMatrix, target: ChoiMatrix) -> float:
    return float(np.linalg.norm(compose(cert, j).m - target.m))


def _psd_part(g):
    w, v = np.linalg.eigh(hermitize(g, tol=1e-6))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def _repair(d: np.ndarray, dv: int, df: int) -> np.ndarray | None:
    """Clip to PSD and rescale the input side so the map is trace preserving."""
    d = _psd_part(d)
    marg = hermitize(partial_trace(d, [dv, df], [1]), tol=1e-6)
    mw, mv = np.linalg.eigh(marg)
    if mw[0] <= 1e-12:
        return None
    left = np.kron((mv * mw ** -0.5) @ mv.conj().T, np.eye(df))
    return hermitize(left @ d @ left.conj().T, tol=1e-6)


def _extend(d: np.ndarray, q: np.ndarray, df: int) -> ChoiMatrix:
    """Channel on the full input: ``d`` on the span of ``q``, trace-and-prepare ``I/df`` elsewhere."""
    db = q.shape[0]
    lift = np.kron(q, np.eye(df))
    perp = np.eye(db) - q @ q.conj().T
    full = lift @ d @ lift.conj().T + np.kron(perp, np.eye(df) / df)
    return ChoiMatrix(hermitize(full, tol=1e-6), db, df)


def _dual_bound(res: sdp.SDPResult, blk: LinkBlock, target: ChoiMatrix) -> float:
    """Objective of a repaired dual-feasible point; a lower bound on the optimal ``t``."""
    y = res.y
    g = _psd_part(-sdp.basis_combination(y[:blk.nn], blk.big_n))
    h = sdp.basis_combination(y[blk.nn:], blk.dv)
    scale = max(1.0, float(np.trace(g).real))
    g, h = g / scale, h / scale
    slack = blk.link_adj(g) - np.kron(h, np.eye(blk.df))
    lam = max(0.0, -float(np.linalg.eigvalsh(hermitize(slack, tol=1e-6))[0]))
    t = hermitize(target.m)
    return float(-np.sum(t * g.T).real + np.trace(h).real - lam * blk.dv)


def find_mate(j: ChoiMatrix, target: ChoiMatrix, tol: float = DEFAULT_TOL,
              certificate_hint: ChoiMatrix | None = None, max_iter: int = 200,
              backend=None) -> FeasibilityReport:
    """Decide whether some channel ``D`` satisfies ``D ∘ J = target`` within ``tol``.

    A ``certificate_hint`` that already satisfies the identity is accepted
    without solving; otherwise it is ignored.
    """
    if not tol > 0:
        raise ContractError("tol must be positive")
    if j.dim_in != target.dim_in:
        raise ContractError("both maps must act on the same input space")
    check_dim(j.dim_out * target.dim_out, "mate Choi matrix")
    if certificate_hint is not None:
        if (certificate_hint.dim_in, certificate_hint.dim_out) != (j.dim_out, target.dim_out):
            raise ContractError("certificate hint has the wrong shape")
        if certificate_hint.is_cptp(CERT_CPTP_TOL):
            r = _residual(certificate_hint, j, target)
            if r <= tol:
                return FeasibilityReport(True, r, certificate_hint, status="hint")

    wk, q = link_kraus(j)
    df = target.dim_out
    blk = LinkBlock(wk @ q, df)
    check_dim(blk.big_n, "composed Choi matrix")
    if blk.m ** 2 > MAX_SCHUR_ENTRIES:
        raise SizeLimitError(f"dimension cap exceeded: degradability SDP has {blk.m} constraints")
    nn = blk.nn
    bi, br, bc, bv = sdp.hermitian_basis(blk.big_n)
    p_block = sdp.make_block(np.zeros((blk.big_n, blk.big_n)), blk.m, bi, br, bc, bv)
    diag = br == bc
    zeros = np.zeros(int(diag.sum()), dtype=np.int64)
    t_block = sdp.make_block(np.ones((1, 1)), blk.m, bi[diag], zeros, zeros, -bv[diag])
    b = np.concatenate([sdp.basis_coefficients(hermitize(target.m)),
                        sdp.basis_coefficients(np.eye(blk.dv))])

    gap = min(1e-10, 1e-3 * tol)
    res = sdp.solve([blk, p_block, t_block], b, gap_tol=gap, feas_tol=gap, max_iter=max_iter,
                    backend=backend)
    d = _repair(res.x[0], blk.dv, df)
    cert = _extend(d, q, df) if d is not None else None
    residual = _residual(cert, j, target) if cert is not None else float("inf")
    if cert is not None and residual <= tol and cert.is_cptp(CERT_CPTP_TOL):
        return FeasibilityReport(True, residual, cert, iterations=res.iterations, status=res.status)
    margin = _dual_bound(res, blk, target)
    if margin > tol:
        return FeasibilityReport(False, residual, None, margin, res.iterations, res.status)
    raise SolverError(f"degradability test inconclusive: residual {residual:.3e}, dual margin {margin:.3e} "
                      f"(solver status {res.status})", lower=margin, upper=residual,
                      iterations=res.iterations)


def test_degradable(s: StinespringRep, tol: float = DEFAULT_TOL,
                    certificate_hint: ChoiMatrix | None = None, backend=None) -> FeasibilityReport:
    """Is there a channel ``D`` with ``D ∘ Phi = Phi^c``?"""
    return find_mate(choi_from_stinespring(s), complementary_channel(s), tol, certificate_hint,
                     backend=backend)


def test_antidegradable(s: StinespringRep, tol: float = DEFAULT_TOL,
                        certificate_hint: ChoiMatrix | None = None, backend=None) -> FeasibilityReport:
    """Is there a channel ``A`` with ``A ∘ Phi^c = Phi``?"""
    return find_mate(complementary_channel(s), choi_from_stinespring(s), tol, certificate_hint,
                     backend=backend)


# keep pytest from collecting these when a test module imports them by name
test_degradable.__test__ = False
test_antidegradable.__test__ = False
