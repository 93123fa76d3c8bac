"""Exact chain spectra from motifs and compositions.

Every chain energy is an integer combination A*beta + B, stored as an
`EnergyKey`.  `spectrum` runs a dynamic program over occupancy sequences
kappa in {0..m-1}^N, whose consecutive pairs fix the motif bits; counts are
exact Python integers.  `spectrum_bruteforce` enumerates all m**N sequences
and serves as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Iterator

import numpy as np

from . import kernels
from .errors import CapExceededError, DomainError
from .geometry import as_fraction

FAMILIES = ("FI", "HS", "PF")
DEFAULT_LEVEL_CAP = 10**7
DEFAULT_BRUTEFORCE_CAP = 2**24
GRID_CELL_BUDGET = 20_000_000
MAX_COMPOSITION_BONDS = 30


@dataclass(frozen=True, order=True)
class EnergyKey:
    """Energy A*beta + B with integer coefficients."""

    A: int
    B: int

    def __add__(self, other: EnergyKey) -> EnergyKey:
        return EnergyKey(self.A + other.A, self.B + other.B)

    def __sub__(self, other: EnergyKey) -> EnergyKey:
        return EnergyKey(self.A - other.A, self.B - other.B)

    def value(self, beta) -> Fraction:
        return self.A * as_fraction(beta) + self.B

    def sort_integer(self, beta: Fraction) -> int:
        """A*P + B*Q for beta = P/Q; orders keys exactly at fixed beta."""
        return self.A * beta.numerator + self.B * beta.denominator


ZERO_KEY = EnergyKey(0, 0)


@dataclass(frozen=True)
class Motif:
    delta: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(int(d) for d in self.delta))
        if any(d not in (0, 1) for d in self.delta):
            raise DomainError("motif entries must be 0 or 1")

    @property
    def N(self) -> int:
        return len(self.delta) + 1

    def complement(self) -> Motif:
        return Motif(tuple(1 - d for d in self.delta))


@dataclass(frozen=True)
class Composition:
    k: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        if not self.k or any(x < 1 for x in self.k):
            raise DomainError("composition parts must be positive")

    @property
    def N(self) -> int:
        return sum(self.k)

    @property
    def partial_sums(self) -> tuple[int, ...]:
        out, acc = [], 0
        for x in self.k:
            acc += x
            out.append(acc)
        return tuple(out)


def _check_epsilon(epsilon) -> int:
    if epsilon not in (1, -1):
        raise DomainError(f"epsilon must be +1 or -1, got {epsilon}")
    return int(epsilon)


def dispersion(j: int, N: int, family: str = "FI") -> EnergyKey:
    if not 1 <= j <= N - 1:
        raise DomainError(f"bond index j={j} outside [1, {N - 1}]")
    if family == "FI":
        return EnergyKey(j, j * (j + 1 - 2 * N))
    if family == "HS":
        return EnergyKey(0, j * (N - j))
    if family == "PF":
        return EnergyKey(0, j)
    raise DomainError(f"unknown dispersion family {family!r}")


def dispersion_arrays(N: int, family: str = "FI") -> tuple[np.ndarray, np.ndarray]:
    keys = [dispersion(j, N, family) for j in range(1, N)]
    return np.array([k.A for k in keys], dtype=np.int64), np.array([k.B for k in keys], dtype=np.int64)


def energy_sum(N: int, family: str = "FI") -> EnergyKey:
    """Sum of the dispersion over all bonds: the all-ones motif."""
    total = ZERO_KEY
    for j in range(1, N):
        total = total + dispersion(j, N, family)
    return total


def motif_from_occupancies(kappa, epsilon: int, m: int) -> Motif:
    epsilon = _check_epsilon(epsilon)
    kappa = [int(x) for x in kappa]
    if any(not 0 <= x < m for x in kappa):
        raise DomainError(f"occupancies must lie in [0, {m - 1}]")
    if epsilon == 1:
        return Motif(tuple(int(b > a) for a, b in zip(kappa, kappa[1:])))
    return Motif(tuple(int(b <= a) for a, b in zip(kappa, kappa[1:])))


def motif_energy(motif: Motif, N: int, family: str = "FI") -> EnergyKey:
    if len(motif.delta) != N - 1:
        raise DomainError(f"motif length {len(motif.delta)} does not match N-1={N - 1}")
    total = ZERO_KEY
    for j, bit in enumerate(motif.delta, start=1):
        if bit:
            total = total + dispersion(j, N, family)
    return total


def block_degeneracy(size: int, m: int, epsilon: int) -> int:
    if _check_epsilon(epsilon) == 1:
        return comb(m + size - 1, size)
    return comb(m, size)


def composition_degeneracy(k: Composition, m: int, epsilon: int) -> int:
    out = 1
    for size in k.k:
        out *= block_degeneracy(size, m, epsilon)
    return out


def compositions(N: int) -> Iterator[Composition]:
    """All 2**(N-1) compositions of N in binary-mask order.

    Bit i of the mask (least significant first) puts a block boundary after
    site i+1.
    """
    for mask in range(1 << (N - 1)):
        parts, run = [], 1
        for i in range(N - 1):
            if (mask >> i) & 1:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        yield Composition(tuple(parts))


def block_partial_sum(k: Composition, i: int) -> EnergyKey:
    """sum_{j<=i} k_j (beta - 2N + 2K_j - k_j + 1) as an EnergyKey.

    This is the exponent that multiplies n_i in the low-temperature expansion;
    it must equal the dispersion at K_i.
    """
    N = k.N
    K = k.partial_sums
    A = B = 0
    for j in range(i):
        A += k.k[j]
        B += k.k[j] * (-2 * N + 2 * K[j] - k.k[j] + 1)
    return EnergyKey(A, B)


# ---------------------------------------------------------------------------
# Spectrum tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumTable:
    N: int
    m: int
    epsilon: int
    beta: Fraction
    family: str
    levels: dict
    merged: bool = True

    @property
    def total(self) -> int:
        return sum(self.levels.values())

    def sorted_levels(self) -> list[tuple[EnergyKey, int]]:
        return sorted(self.levels.items(), key=lambda kv: (kv[0].sort_integer(self.beta), kv[0].A))

    def value_map(self) -> dict[Fraction, int]:
        """Energy value -> total degeneracy; the representation-free view of the table."""
        out: dict[Fraction, int] = {}
        for key, deg in self.levels.items():
            v = key.value(self.beta)
            out[v] = out.get(v, 0) + deg
        return out

    def energies(self) -> np.ndarray:
        """Ascending level values as floats (one entry per key)."""
        b = float(self.beta)
        return np.array([k.A * b + k.B for k, _ in self.sorted_levels()])

    def degeneracies(self) -> list[int]:
        return [d for _, d in self.sorted_levels()]


def _validate(N, m, epsilon, beta, family):
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    epsilon = _check_epsilon(epsilon)
    beta = as_fraction(beta)
    if family not in FAMILIES:
        raise DomainError(f"unknown dispersion family {family!r}")
    if family == "FI" and beta <= 2 * (N - 1):
        raise DomainError(f"beta={beta} must exceed 2(N-1)={2 * (N - 1)}")
    return int(N), int(m), epsilon, beta


@dataclass(frozen=True)
class _Grid:
    nA: int
    nB: int
    b0: int
    stride: int
    b_min: int
    dA: np.ndarray
    dB_idx: np.ndarray


def _grid_layout(dA: np.ndarray, dB: np.ndarray) -> _Grid:
    stride = 0
    for x in dB:
        stride = gcd(stride, int(x))
    stride = stride or 1
    b_min = int(dB[dB < 0].sum())
    b_max = int(dB[dB > 0].sum())
    return _Grid(
        nA=int(dA.sum()) + 1,
        nB=(b_max - b_min) // stride + 1,
        b0=-b_min // stride,
        stride=stride,
        b_min=b_min,
        dA=dA,
        dB_idx=dB // stride,
    )


def _grid_to_keys(hist: np.ndarray, grid: _Grid) -> dict[EnergyKey, int]:
    ia, ib = np.nonzero(hist)
    return {
        EnergyKey(int(a), int(b) * grid.stride + grid.b_min): int(hist[a, b])
        for a, b in zip(ia.tolist(), ib.tolist())
    }


def _sparse_dp(N, m, epsilon, dA, dB) -> dict[EnergyKey, int]:
    """Big-integer dict DP; used when counts or grid size exceed the dense path."""
    state = [{(0, 0): 1} for _ in range(m)]
    for t in range(N - 1):
        da, db = int(dA[t]), int(dB[t])
        new = [dict() for _ in range(m)]
        # prefix[k] accumulates states with kappa < k
        prefix: dict = {}
        total: dict = {}
        for s in state:
            for key, c in s.items():
                total[key] = total.get(key, 0) + c
        for k in range(m):
            lower = prefix
            if epsilon == 1:
                moved = lower
                kept = {key: c - lower.get(key, 0) for key, c in total.items()}
            else:
                kept = lower
                moved = {key: c - lower.get(key, 0) for key, c in total.items()}
            target = new[k]
            for key, c in kept.items():
                if c:
                    target[key] = target.get(key, 0) + c
            for (a, b), c in moved.items():
                if c:
                    nk = (a + da, b + db)
                    target[nk] = target.get(nk, 0) + c
            prefix = dict(prefix)
            for key, c in state[k].items():
                prefix[key] = prefix.get(key, 0) + c
        state = new
    out: dict[EnergyKey, int] = {}
    for s in state:
        for (a, b), c in s.items():
            if c:
                key = EnergyKey(a, b)
                out[key] = out.get(key, 0) + c
    return out


def merge_levels(raw: dict[EnergyKey, int], beta: Fraction) -> dict[EnergyKey, int]:
    """Merge keys with equal value at beta; the key with the smallest A represents the group."""
    groups: dict[int, tuple[EnergyKey, int]] = {}
    for key, deg in raw.items():
        v = key.sort_integer(beta)
        if v in groups:
            rep, total = groups[v]
            groups[v] = (min(rep, key), total + deg)
        else:
            groups[v] = (key, deg)
    return dict(groups.values())


def _finish(N, m, epsilon, beta, family, raw, merge, level_cap) -> SpectrumTable:
    levels = merge_levels(raw, beta) if merge else dict(raw)
    if len(levels) > level_cap:
        raise CapExceededError(f"{len(levels)} levels exceed the cap of {level_cap}")
    return SpectrumTable(N=N, m=m, epsilon=epsilon, beta=beta, family=family, levels=levels, merged=merge)


def spectrum(
    N: int,
    m: int,
    epsilon: int,
    beta,
    *,
    family: str = "FI",
    merge: bool = True,
    level_cap: int = DEFAULT_LEVEL_CAP,
) -> SpectrumTable:
    """Exact spectrum with degeneracies by dynamic programming over occupancies.

    With ``merge=False`` distinct lattice keys are kept apart even when they
    coincide at beta, which is the mode used for rational stand-ins of an
    irrational beta.
    """
    N, m, epsilon, beta = _validate(N, m, epsilon, beta, family)
    if N == 1:
        return _finish(N, m, epsilon, beta, family, {ZERO_KEY: m}, merge, level_cap)
    dA, dB = dispersion_arrays(N, family)
    grid = _grid_layout(dA, dB)
    fits_int64 = N * np.log2(m) < 62
    if fits_int64 and grid.nA * grid.nB * m <= GRID_CELL_BUDGET:
        hist = kernels.motif_grid_dp(m, epsilon == 1, grid.dA, grid.dB_idx, grid.nA, grid.nB, grid.b0)
        raw = _grid_to_keys(hist, grid)
    else:
        raw = _sparse_dp(N, m, epsilon, dA, dB)
    return _finish(N, m, epsilon, beta, family, raw, merge, level_cap)


def spectrum_bruteforce(
    N: int,
    m: int,
    epsilon: int,
    beta,
    *,
    family: str = "FI",
    merge: bool = True,
    cap: int = DEFAULT_BRUTEFORCE_CAP,
) -> SpectrumTable:
    """Same table as `spectrum`, by visiting every one of the m**N occupancy sequences."""
    N, m, epsilon, beta = _validate(N, m, epsilon, beta, family)
    if m**N > cap:
        raise CapExceededError(f"m**N = {m ** N} exceeds the brute-force cap of {cap}")
    if N == 1:
        return _finish(N, m, epsilon, beta, family, {ZERO_KEY: m}, merge, DEFAULT_LEVEL_CAP)
    dA, dB = dispersion_arrays(N, family)
    grid = _grid_layout(dA, dB)
    hist = kernels.bruteforce_histogram(N, m, epsilon == 1, grid.dA, grid.dB_idx, grid.nA, grid.nB, grid.b0)
    return _finish(N, m, epsilon, beta, family, _grid_to_keys(hist, grid), merge, DEFAULT_LEVEL_CAP)


def dual_spectrum(table: SpectrumTable) -> SpectrumTable:
    """Reflect every level about the all-ones motif energy; the result is the table for -epsilon."""
    top = energy_sum(table.N, table.family) if table.N > 1 else ZERO_KEY
    levels = {top - key: deg for key, deg in table.levels.items()}
    return SpectrumTable(
        N=table.N,
        m=table.m,
        epsilon=-table.epsilon,
        beta=table.beta,
        family=table.family,
        levels=levels,
        merged=table.merged,
    )


def tables_equal(left: SpectrumTable, right: SpectrumTable) -> bool:
    """Exact equality of the value -> degeneracy maps at each table's beta."""
    return left.beta == right.beta and left.value_map() == right.value_map()


# ---------------------------------------------------------------------------
# Closed-form partition function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionComparison:
    q: float
    composition_sum: float
    table_sum: float

    @property
    def rel_diff(self) -> float:
        return abs(self.composition_sum - self.table_sum) / max(abs(self.table_sum), np.finfo(float).tiny)


def partition_from_compositions(N, m, epsilon, beta, q, family: str = "FI") -> float:
    N, m, epsilon, beta = _validate(N, m, epsilon, beta, family)
    if N - 1 > MAX_COMPOSITION_BONDS:
        raise CapExceededError(f"2**{N - 1} compositions is beyond the enumeration cap")
    b = float(beta)
    g = np.array([float(block_degeneracy(k, m, epsilon)) if k else 0.0 for k in range(N + 1)])
    if N == 1:
        return float(g[1])
    qF = np.array([q ** (key.A * b + key.B) for key in (dispersion(j, N, family) for j in range(1, N))])
    return kernels.composition_partition_sum(qF, g)


def partition_from_table(table: SpectrumTable, q: float) -> float:
    b = float(table.beta)
    return float(sum(float(deg) * q ** (key.A * b + key.B) for key, deg in table.levels.items()))


def partition_eval(N, m, epsilon, beta, q: float, *, family: str = "FI", table: SpectrumTable | None = None):
    """Chain partition function at q = exp(-1/T), by compositions and by the table."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    if table is None:
        table = spectrum(N, m, epsilon, beta, family=family)
    return PartitionComparison(
        q=q,
        composition_sum=partition_from_compositions(N, m, epsilon, beta, q, family),
        table_sum=partition_from_table(table, q),
    )


# ---------------------------------------------------------------------------
# Extreme energies of the antiferromagnetic chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Extremes:
    E_min: EnergyKey
    E_max: EnergyKey
    min_motif: Motif
    j_range: tuple[int, int]


def max_energy_closed_form(N: int, beta) -> Fraction:
    return Fraction(N * (N - 1), 6) * (3 * as_fraction(beta) - 4 * N + 2)


def min_energy_closed_form(N: int, m: int, beta) -> Fraction:
    b = as_fraction(beta)
    Np = N // m
    return Fraction(Np, 6) * (
        m * m * (Np + 1) * (2 * Np + 1) - 3 * m * (Np + 1) * (b + 1) + 6 * N * (b - N + 1)
    )


def min_motif(N: int, m: int) -> Motif:
    """(N-1) mod m leading zeros, then repeated blocks 1 0...0 of length m."""
    lead = (N - 1) % m
    delta = [0] * lead
    while len(delta) < N - 1:
        delta.extend([1] + [0] * (m - 1))
    return Motif(tuple(delta[: N - 1]))


def extremes(N: int, m: int, beta) -> Extremes:
    """Extreme levels of the antiferromagnetic FI chain, with the minimum motif and j-range.

    The minimum motif's energy is checked against the closed form; a mismatch
    raises ``AssertionError``.
    """
    N, m, _, beta = _validate(N, m, -1, beta, "FI")
    if N == 1:
        return Extremes(ZERO_KEY, ZERO_KEY, Motif(()), (0, 0))
    motif = min_motif(N, m)
    low = motif_energy(motif, N)
    high = energy_sum(N)
    assert low.value(beta) == min_energy_closed_form(N, m, beta), "minimum motif disagrees with closed form"
    assert high.value(beta) == max_energy_closed_form(N, beta), "all-ones motif disagrees with closed form"
    Np = N // m
    j_lo = Fraction(Np * (2 * N - m - m * Np), 2)
    assert j_lo.denominator == 1
    return Extremes(E_min=low, E_max=high, min_motif=motif, j_range=(int(j_lo), N * (N - 1) // 2))
