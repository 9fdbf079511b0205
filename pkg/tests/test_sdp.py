"""The interior-point solver on problems with known optima."""
import numpy as np
import pytest

from channelforge import sdp
from conftest import random_hermitian


def _eigmax_problem(c):
    """min <C, X> s.t. Tr X = 1, X ⪰ 0  has value lambda_min(C)."""
    n = c.shape[0]
    ci = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    blk = sdp.make_block(c, 1, ci, idx, idx, np.ones(n))
    return [blk], np.array([1.0])


@pytest.mark.parametrize("backend", ["numba", "numpy"])
@pytest.mark.parametrize("n", [2, 5, 12])
def test_min_eigenvalue(rng, n, backend):
    c = random_hermitian(rng, n)
    blocks, b = _eigmax_problem(c)
    res = sdp.solve(blocks, b, backend=backend)
    assert res.status == "optimal"
    assert res.pobj == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-8)
    assert res.dobj == pytest.approx(res.pobj, abs=1e-8)


def test_fidelity_like_two_block(rng):
    """min t s.t. t I - C = S ⪰ 0, written with a slack block: value lambda_max(C)."""
    n = 4
    c = random_hermitian(rng, n)
    m = n * n
    bi, br, bc, bv = sdp.hermitian_basis(n)
    s_block = sdp.make_block(np.zeros((n, n)), m, bi, br, bc, bv)
    diag = br == bc
    zeros = np.zeros(int(diag.sum()), dtype=np.int64)
    t_block = sdp.make_block(np.ones((1, 1)), m, bi[diag], zeros, zeros, -bv[diag])
    b = -sdp.basis_coefficients(c)
    res = sdp.solve([s_block, t_block], b)
    assert res.status == "optimal"
    assert res.pobj == pytest.approx(np.linalg.eigvalsh(c)[-1], abs=1e-8)


def test_result_history_and_iterations(rng):
    blocks, b = _eigmax_problem(random_hermitian(rng, 3))
    res = sdp.solve(blocks, b, max_iter=3)
    assert res.iterations <= 3 and len(res.history) >= 1
    assert res.status in {"max_iter", "optimal"}


def test_dense_and_sparse_blocks_agree(rng):
    c = random_hermitian(rng, 6)
    blocks, b = _eigmax_problem(c)
    dense_block = sdp.Block(blocks[0].c, dense=blocks[0].sparse.dense() if blocks[0].sparse else blocks[0].dense)
    r1 = sdp.solve(blocks, b)
    r2 = sdp.solve([dense_block], b)
    assert r1.pobj == pytest.approx(r2.pobj, abs=1e-9)
