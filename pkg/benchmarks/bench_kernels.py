"""Compare the numba and numpy paths of the two compiled kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (numba compiles on first call), then timed.
Results from the two backends are checked against each other.
"""
import argparse
import time

import numpy as np
from scipy.stats import unitary_group

from channelforge import kernels, sdp


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_gates(nq, repeat, rng):
    mat = np.eye(2 ** nq, dtype=np.complex128)
    gates = [(unitary_group.rvs(4, random_state=rng), tuple(int(w) for w in rng.choice(nq, 2, replace=False)))
             for _ in range(20)]

    def run(backend):
        out = mat
        for g, t in gates:
            out = kernels.apply_gate(out, g, t, nq, backend=backend)
        return out

    a, b = run("numba"), run("numpy")
    assert np.allclose(a, b, atol=1e-10)
    return best_of(lambda: run("numba"), repeat), best_of(lambda: run("numpy"), repeat)


def bench_schur(k, repeat, rng):
    n = k * k
    bi, br, bc, bv = sdp.hermitian_basis(n)
    sp = kernels.SparseConstraints(n * n, n, bi, br, bc, bv)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x = g @ g.conj().T + np.eye(n)
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    sinv = np.linalg.inv(h @ h.conj().T + np.eye(n))
    a = kernels.schur_sparse(sp, x, sinv, backend="numba")
    b = kernels.schur_sparse(sp, x, sinv, backend="numpy")
    assert np.allclose(a, b, atol=1e-8 * np.abs(b).max())
    return (best_of(lambda: kernels.schur_sparse(sp, x, sinv, backend="numba"), repeat),
            best_of(lambda: kernels.schur_sparse(sp, x, sinv, backend="numpy"), repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numba [s]':>12}{'numpy [s]':>12}{'ratio':>8}")
    for nq in (6, 8, 10):
        tn, tp = bench_gates(nq, args.repeat, rng)
        print(f"{f'apply_gate x20, {nq} qubits':<28}{tn:>12.5f}{tp:>12.5f}{tp / tn:>8.2f}")
    for k in (2, 3, 4):
        tn, tp = bench_schur(k, args.repeat, rng)
        print(f"{f'schur_sparse, n={k * k}':<28}{tn:>12.5f}{tp:>12.5f}{tp / tn:>8.2f}")


if __name__ == "__main__":
    main()
