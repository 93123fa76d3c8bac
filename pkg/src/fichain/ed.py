"""Exact diagonalization of the chain Hamiltonian on the full m**N spin space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import CapExceededError, ConvergenceError, DomainError
from .geometry import ChainGeometry
from .motifs import SpectrumTable

DEFAULT_DIM_CAP = 4096


def build_hamiltonian(geometry: ChainGeometry, m: int, epsilon: int, *, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Dense sum_{i != j} h_ij (1 - epsilon S_ij), S_ij swapping the spins at sites i, j."""
    if epsilon not in (1, -1):
        raise DomainError(f"epsilon must be +1 or -1, got {epsilon}")
    N = geometry.spec.N
    if m**N > dim_cap:
        raise CapExceededError(f"dimension m**N = {m ** N} exceeds the cap of {dim_cap}")
    return kernels.chain_hamiltonian(N, m, epsilon, geometry.h)


def digit_permutation_matrix(N: int, m: int, perm) -> np.ndarray:
    """Matrix relabelling the spin values of every site by ``perm`` (a permutation of range(m))."""
    perm = np.asarray(perm, dtype=np.int64)
    dim = m**N
    idx = np.arange(dim, dtype=np.int64)
    place = m ** np.arange(N - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // place[None, :]) % m
    image = perm[digits] @ place
    P = np.zeros((dim, dim))
    P[image, idx] = 1.0
    return P


def eigenvalues(matrix: np.ndarray, *, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a real symmetric matrix, ascending, by Jacobi rotations.

    The matrix is first split into the connected components of its nonzero
    pattern (for the chain these are the fixed-content sectors), and each
    block is diagonalized on its own.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
    if not np.allclose(a, a.T, atol=1e-12 * scale, rtol=0.0):
        raise DomainError("matrix is not symmetric")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    n_comp, labels = connected_components(csr_matrix(a != 0.0), directed=False)
    out = []
    for c in range(n_comp):
        sel = np.flatnonzero(labels == c)
        block = a[np.ix_(sel, sel)]
        if len(sel) == 1:
            out.append(block[0])
            continue
        diag, _, converged = kernels.jacobi_eigenvalues(block, tol, max_sweeps)
        if not converged:
            raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
        out.append(diag)
    return np.sort(np.concatenate(out))


@dataclass(frozen=True)
class EDComparison:
    max_abs_error: float
    tol: float
    n_states: int

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tol


def verify_against_motifs(eigs, table: SpectrumTable, beta=None, tol: float = 1e-8) -> EDComparison:
    """Greedy match of sorted eigenvalues against the table's levels repeated by degeneracy.

    ``beta`` overrides the table's own beta when evaluating level values.
    """
    eigs = np.sort(np.asarray(eigs, dtype=float))
    if len(eigs) != table.total:
        raise DomainError(f"{len(eigs)} eigenvalues cannot match {table.total} table states")
    b = float(table.beta if beta is None else beta)
    values = np.array([k.A * b + k.B for k in table.levels])
    degs = np.array([int(d) for d in table.levels.values()], dtype=np.int64)
    expected = np.sort(np.repeat(values, degs))
    err = float(np.max(np.abs(eigs - expected))) if len(eigs) else 0.0
    return EDComparison(max_abs_error=err, tol=tol, n_states=len(eigs))
