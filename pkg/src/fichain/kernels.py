"""Hot inner loops, each in a numba kernel and a pure-numpy twin.

The numba kernels are used whenever numba imports and the environment
variable ``FICHAIN_DISABLE_NUMBA`` is unset (or ``0``/``false``).  Setting it
to ``1`` routes every call through the numpy implementations, which produce
identical results.  Both twins stay importable under explicit names
(``*_numba`` / ``*_numpy``) so tests and the benchmark can run them side by
side.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def decorator(func):
            return func

        return decorator


ENV_FLAG = "FICHAIN_DISABLE_NUMBA"


def numba_enabled() -> bool:
    """True when calls dispatch to the numba kernels."""
    flag = os.environ.get(ENV_FLAG, "").strip().lower()
    return NUMBA_AVAILABLE and flag in ("", "0", "false", "no", "off")


def backend_name() -> str:
    return "numba" if numba_enabled() else "numpy"


# ---------------------------------------------------------------------------
# Motif dynamic programming on a dense (A, B) lattice grid
# ---------------------------------------------------------------------------
#
# state[k, a, b] counts occupancy prefixes ending in kappa = k whose energy
# key sits at grid cell (a, b).  Bond t adds (dA[t], dB[t]) when its motif bit
# is set.  ``rising`` selects the rule: bit set iff kappa' > kappa (True) or
# iff kappa' <= kappa (False).


def motif_grid_dp_numpy(m, rising, dA, dB, nA, nB, b0):
    state = np.zeros((m, nA, nB), dtype=np.int64)
    state[:, 0, b0] = 1
    lower = np.empty_like(state)
    for t in range(len(dA)):
        da, db = int(dA[t]), int(dB[t])
        total = state.sum(axis=0)
        lower[0] = 0
        np.cumsum(state[:-1], axis=0, out=lower[1:])
        upper = total[None, :, :] - lower
        if rising:
            moved, kept = lower, upper
        else:
            moved, kept = upper, lower
        new = kept.copy()
        if db >= 0:
            new[:, da:, db:] += moved[:, : nA - da, : nB - db]
        else:
            new[:, da:, : nB + db] += moved[:, : nA - da, -db:]
        state = new
    return state.sum(axis=0)


@njit(cache=True)
def motif_grid_dp_numba(m, rising, dA, dB, nA, nB, b0):
    state = np.zeros((m, nA, nB), dtype=np.int64)
    for k in range(m):
        state[k, 0, b0] = 1
    new = np.zeros_like(state)
    for t in range(dA.shape[0]):
        da = dA[t]
        db = dB[t]
        new[:, :, :] = 0
        for a in range(nA):
            for b in range(nB):
                tot = 0
                for k in range(m):
                    tot += state[k, a, b]
                if tot == 0:
                    continue
                acc = 0
                for k in range(m):
                    low = acc
                    up = tot - acc
                    if rising:
                        mv = low
                        kp = up
                    else:
                        mv = up
                        kp = low
                    new[k, a, b] += kp
                    if mv != 0:
                        new[k, a + da, b + db] += mv
                    acc += state[k, a, b]
        state, new = new, state
    out = np.zeros((nA, nB), dtype=np.int64)
    for k in range(m):
        out += state[k]
    return out


def motif_grid_dp(m, rising, dA, dB, nA, nB, b0):
    dA = np.ascontiguousarray(dA, dtype=np.int64)
    dB = np.ascontiguousarray(dB, dtype=np.int64)
    if numba_enabled():
        return motif_grid_dp_numba(m, bool(rising), dA, dB, nA, nB, b0)
    return motif_grid_dp_numpy(m, bool(rising), dA, dB, nA, nB, b0)


# ---------------------------------------------------------------------------
# Brute-force enumeration of all m**N occupancy sequences (the DP's oracle)
# ---------------------------------------------------------------------------


def bruteforce_histogram_numpy(N, m, rising, dA, dB, nA, nB, b0, chunk=1 << 16):
    hist = np.zeros(nA * nB, dtype=np.int64)
    total = m**N
    place = m ** np.arange(N - 1, -1, -1, dtype=np.int64)
    dA = np.asarray(dA, dtype=np.int64)
    dB = np.asarray(dB, dtype=np.int64)
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % m
        if N > 1:
            if rising:
                bits = (digits[:, 1:] > digits[:, :-1]).astype(np.int64)
            else:
                bits = (digits[:, 1:] <= digits[:, :-1]).astype(np.int64)
            a = bits @ dA
            b = b0 + bits @ dB
        else:
            a = np.zeros(len(idx), dtype=np.int64)
            b = np.full(len(idx), b0, dtype=np.int64)
        hist += np.bincount(a * nB + b, minlength=nA * nB)
    return hist.reshape(nA, nB)


@njit(cache=True)
def bruteforce_histogram_numba(N, m, rising, dA, dB, nA, nB, b0):
    hist = np.zeros((nA, nB), dtype=np.int64)
    digits = np.zeros(N, dtype=np.int64)
    total = 1
    for _ in range(N):
        total *= m
    for _ in range(total):
        a = 0
        b = b0
        for i in range(N - 1):
            if rising:
                bit = digits[i + 1] > digits[i]
            else:
                bit = digits[i + 1] <= digits[i]
            if bit:
                a += dA[i]
                b += dB[i]
        hist[a, b] += 1
        # odometer increment, last site fastest
        pos = N - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < m:
                break
            digits[pos] = 0
            pos -= 1
    return hist


def bruteforce_histogram(N, m, rising, dA, dB, nA, nB, b0):
    dA = np.ascontiguousarray(dA, dtype=np.int64)
    dB = np.ascontiguousarray(dB, dtype=np.int64)
    if numba_enabled():
        return bruteforce_histogram_numba(N, m, bool(rising), dA, dB, nA, nB, b0)
    return bruteforce_histogram_numpy(N, m, bool(rising), dA, dB, nA, nB, b0)


# ---------------------------------------------------------------------------
# Dense chain Hamiltonian sum_{i != j} h_ij (1 - eps S_ij)
# ---------------------------------------------------------------------------
#
# Basis index s = sum_i s_i m**(N-1-i): site 0 is the most significant digit.


def chain_hamiltonian_numpy(N, m, epsilon, h):
    dim = m**N
    H = np.zeros((dim, dim))
    idx = np.arange(dim, dtype=np.int64)
    place = m ** np.arange(N - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // place[None, :]) % m
    diag = np.zeros(dim)
    for i in range(N):
        for j in range(i + 1, N):
            w = 2.0 * h[i, j]
            diag += w
            partner = idx + (digits[:, j] - digits[:, i]) * (place[i] - place[j])
            H[idx, partner] -= epsilon * w
    H[idx, idx] += diag
    return H


@njit(cache=True)
def chain_hamiltonian_numba(N, m, epsilon, h):
    dim = 1
    for _ in range(N):
        dim *= m
    H = np.zeros((dim, dim))
    place = np.ones(N, dtype=np.int64)
    for i in range(N - 2, -1, -1):
        place[i] = place[i + 1] * m
    digits = np.zeros(N, dtype=np.int64)
    for s in range(dim):
        rem = s
        for i in range(N):
            digits[i] = rem // place[i]
            rem -= digits[i] * place[i]
        for i in range(N):
            for j in range(i + 1, N):
                w = 2.0 * h[i, j]
                H[s, s] += w
                t = s + (digits[j] - digits[i]) * (place[i] - place[j])
                H[s, t] -= epsilon * w
    return H


def chain_hamiltonian(N, m, epsilon, h):
    h = np.ascontiguousarray(h, dtype=np.float64)
    if numba_enabled():
        return chain_hamiltonian_numba(N, m, float(epsilon), h)
    return chain_hamiltonian_numpy(N, m, float(epsilon), h)


# ---------------------------------------------------------------------------
# Jacobi eigenvalues of a dense real symmetric matrix
# ---------------------------------------------------------------------------
#
# numba: classical cyclic-by-row sweeps.  numpy: round-robin ordering, which
# rotates n/2 disjoint index pairs at once so every update is a vector op.
# Both return (diagonal after convergence, sweeps used, converged flag).


def _offdiag_norm(a):
    # direct sum; subtracting the diagonal from the Frobenius norm cancels badly near convergence
    off = a - np.diag(np.diag(a))
    return np.sqrt(np.sum(off * off))


def _round_robin(n):
    """Pairings for n (even) players; each round is a perfect matching."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        pairs = [(players[k], players[n - 1 - k]) for k in range(n // 2)]
        rounds.append(
            (
                np.array([min(p) for p in pairs], dtype=np.int64),
                np.array([max(p) for p in pairs], dtype=np.int64),
            )
        )
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues_numpy(a, tol=1e-14, max_sweeps=100):
    n0 = a.shape[0]
    if n0 == 1:
        return a.diagonal().copy(), 0, True
    n = n0 + (n0 % 2)
    w = np.zeros((n, n))
    w[:n0, :n0] = a
    scale = max(np.sqrt(np.sum(w * w)), np.finfo(float).tiny)
    rounds = _round_robin(n)
    for sweep in range(max_sweeps):
        if _offdiag_norm(w) <= tol * scale:
            return w.diagonal()[:n0].copy(), sweep, True
        for P, Q in rounds:
            apq = w[P, Q]
            active = apq != 0.0
            if not active.any():
                continue
            app = w[P, P]
            aqq = w[Q, Q]
            safe = np.where(active, apq, 1.0)
            with np.errstate(over="ignore", divide="ignore"):
                theta = (aqq - app) / (2.0 * safe)
                # a huge theta means a negligible rotation; t -> 1/(2 theta) -> 0
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cp = w[:, P].copy()
            cq = w[:, Q].copy()
            w[:, P] = cp * c - cq * s
            w[:, Q] = cp * s + cq * c
            rp = w[P, :].copy()
            rq = w[Q, :].copy()
            w[P, :] = c[:, None] * rp - s[:, None] * rq
            w[Q, :] = s[:, None] * rp + c[:, None] * rq
    converged = _offdiag_norm(w) <= tol * scale
    return w.diagonal()[:n0].copy(), max_sweeps, converged


@njit(cache=True)
def _diag_copy(w):
    out = np.empty(w.shape[0])
    for i in range(w.shape[0]):
        out[i] = w[i, i]
    return out


@njit(cache=True)
def jacobi_eigenvalues_numba(a, tol=1e-14, max_sweeps=100):
    w = a.copy()
    n = w.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += w[i, j] * w[i, j]
    scale = max(np.sqrt(fro), 1e-300)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += w[i, j] * w[i, j]
        if np.sqrt(off) <= tol * scale:
            return _diag_copy(w), sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if apq == 0.0:
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = w[k, p]
                    akq = w[k, q]
                    w[k, p] = c * akp - s * akq
                    w[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = w[p, k]
                    aqk = w[q, k]
                    w[p, k] = c * apk - s * aqk
                    w[q, k] = s * apk + c * aqk
    return _diag_copy(w), max_sweeps, False


def jacobi_eigenvalues(a, tol=1e-14, max_sweeps=100):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if numba_enabled():
        return jacobi_eigenvalues_numba(a, tol, max_sweeps)
    return jacobi_eigenvalues_numpy(a, tol, max_sweeps)


# ---------------------------------------------------------------------------
# Sum over the 2**(N-1) compositions of N of the closed partition function
# ---------------------------------------------------------------------------
#
# Bit i of a mask marks a block boundary after site i+1.  qF[i] = q**F(i+1);
# g[k] is the degeneracy of a block of length k.


def composition_partition_sum_numpy(qF, g, chunk=1 << 16):
    n_bonds = len(qF)
    total = 0.0
    for lo in range(0, 1 << n_bonds, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n_bonds), dtype=np.int64)
        term = np.ones(len(masks))
        run = np.ones(len(masks), dtype=np.int64)
        for i in range(n_bonds):
            bit = ((masks >> i) & 1).astype(bool)
            term *= np.where(bit, qF[i] * g[run], 1.0 - qF[i])
            run = np.where(bit, 1, run + 1)
        term *= g[run]
        total += term.sum()
    return float(total)


@njit(cache=True)
def composition_partition_sum_numba(qF, g):
    n_bonds = qF.shape[0]
    total = 0.0
    for mask in range(1 << n_bonds):
        term = 1.0
        run = 1
        for i in range(n_bonds):
            if (mask >> i) & 1:
                term *= qF[i] * g[run]
                run = 1
            else:
                term *= 1.0 - qF[i]
                run += 1
        total += term * g[run]
    return total


def composition_partition_sum(qF, g):
    qF = np.ascontiguousarray(qF, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    if numba_enabled():
        return float(composition_partition_sum_numba(qF, g))
    return composition_partition_sum_numpy(qF, g)
