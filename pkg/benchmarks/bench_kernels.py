"""Time each numba kernel against its numpy twin on representative inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Numba timings exclude the first (compiling) call.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fichain import kernels as K
from fichain import motifs as M
from fichain.geometry import LatticeSpec, build_geometry


def _grid(N):
    dA, dB = M.dispersion_arrays(N)
    g = M._grid_layout(np.asarray(dA, dtype=np.int64), np.asarray(dB, dtype=np.int64))
    return g.dA, g.dB_idx, g.nA, g.nB, g.b0


def cases():
    dA, dB, nA, nB, b0 = _grid(22)
    yield "motif_grid_dp N=22 m=2", (2, False, dA, dB, nA, nB, b0), K.motif_grid_dp_numpy, K.motif_grid_dp_numba
    dA, dB, nA, nB, b0 = _grid(14)
    yield "bruteforce N=14 m=3", (14, 3, False, dA, dB, nA, nB, b0), K.bruteforce_histogram_numpy, K.bruteforce_histogram_numba
    h = build_geometry(LatticeSpec(10, 21)).h
    yield "chain_hamiltonian N=10 m=2", (10, 2, -1.0, h), K.chain_hamiltonian_numpy, K.chain_hamiltonian_numba
    x = np.random.default_rng(0).normal(size=(200, 200))
    a = x + x.T
    yield "jacobi 200x200", (a,), K.jacobi_eigenvalues_numpy, K.jacobi_eigenvalues_numba
    qF = 0.5 ** np.arange(1, 21, dtype=float)
    g = np.arange(22, dtype=float)
    yield "composition_sum 2^20 masks", (qF, g), K.composition_partition_sum_numpy, K.composition_partition_sum_numba


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, fargs, np_fn, nb_fn in cases():
        t_np = best_of(np_fn, fargs, args.repeat)
        if K.NUMBA_AVAILABLE:
            nb_fn(*fargs)  # compile
            t_nb = best_of(nb_fn, fargs, args.repeat)
            print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}")
        else:
            print(f"{name:32s} {t_np:10.4f} {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
