"""Bound-state spectra of the scalar and spin dynamical models at finite coupling a.

Energies are exact rationals in (a, b, p).  Partition functions use the
shifted energies E_p - E0 and the weight exp(-(E_p - E0)/(4aT)), which tends
to the chain weight q**(sum_i p_i (beta + 2i - 2N)) with q = exp(-1/T) as
a grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import ceil, comb

import numpy as np

from .errors import CapExceededError, DomainError
from .geometry import as_fraction
from .motifs import block_degeneracy, partition_from_table, spectrum

DEFAULT_LEVEL_CAP = 10**6


@dataclass(frozen=True)
class DynamicalSpec:
    N: int
    m: int
    epsilon: int
    a: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if self.epsilon not in (1, -1):
            raise DomainError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.a <= Fraction(1, 2):
            raise DomainError(f"a must exceed 1/2, got {self.a}")
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @classmethod
    def from_ab(cls, N, m, epsilon, a, b) -> DynamicalSpec:
        a = as_fraction(a)
        return cls(N, m, epsilon, a, as_fraction(b) / a)

    @property
    def b(self) -> Fraction:
        return self.beta * self.a


def n_max(spec: DynamicalSpec) -> int | None:
    """Largest integer n >= 0 with n < (b-1)/2 - a(N-1), or None without bound states."""
    bound = (spec.b - 1) / 2 - spec.a * (spec.N - 1)
    if bound <= 0:
        return None
    return ceil(bound) - 1


def ground_energy_shift(spec: DynamicalSpec) -> Fraction:
    """E0 = (2/3) a N (a(N-1)(3 beta - 2N + 1) + 3(beta - N + 1))."""
    a, beta, N = spec.a, spec.beta, spec.N
    return Fraction(2, 3) * a * N * (a * (N - 1) * (3 * beta - 2 * N + 1) + 3 * (beta - N + 1))


def _check_p(p, spec: DynamicalSpec, n: int | None):
    p = tuple(int(x) for x in p)
    if len(p) != spec.N:
        raise DomainError(f"p must have {spec.N} entries")
    if any(x < 0 for x in p) or any(x < y for x, y in zip(p, p[1:])):
        raise DomainError(f"p={p} must be non-increasing and nonnegative")
    if n is not None and p and p[0] > n:
        raise DomainError(f"p_1={p[0]} exceeds n_max={n}")
    return p


def raw_energy(p, spec: DynamicalSpec) -> Fraction:
    """N b^2 - sum_i (2p_i + 1 + 2a(N-i) - b)^2 for any multi-index (1-based i)."""
    N, a, b = spec.N, spec.a, spec.b
    return N * b * b - sum((2 * pi + 1 + 2 * a * (N - i) - b) ** 2 for i, pi in enumerate(p, start=1))


def scalar_energy(p, spec: DynamicalSpec, *, check_bound: bool = True) -> tuple[Fraction, Fraction]:
    """Exact (E_p, E_p - E0) for a non-increasing p."""
    n = n_max(spec) if check_bound else None
    if check_bound and n is None:
        raise DomainError("the model has no bound states for these parameters")
    p = _check_p(p, spec, n)
    E = raw_energy(p, spec)
    return E, E - ground_energy_shift(spec)


@dataclass(frozen=True)
class ScalarLevel:
    p: tuple[int, ...]
    energy: Fraction
    shifted: Fraction


@dataclass(frozen=True)
class SpinLevelBlock:
    p: tuple[int, ...]
    blocks: tuple[int, ...]
    degeneracy: int
    energy: Fraction
    shifted: Fraction


def block_sizes(p) -> tuple[int, ...]:
    """Lengths of the runs of equal consecutive entries of p."""
    sizes: list[int] = []
    for i, x in enumerate(p):
        if i and x == p[i - 1]:
            sizes[-1] += 1
        else:
            sizes.append(1)
    return tuple(sizes)


def _admissible(spec: DynamicalSpec, cap: int):
    n = n_max(spec)
    if n is None:
        raise DomainError("the model has no bound states for these parameters")
    count = comb(n + spec.N, spec.N)
    if count > cap:
        raise CapExceededError(f"{count} multi-indices exceed the level cap of {cap}")
    for p in combinations_with_replacement(range(n, -1, -1), spec.N):
        yield p


def enumerate_scalar_levels(spec: DynamicalSpec, *, cap: int = DEFAULT_LEVEL_CAP) -> list[ScalarLevel]:
    E0 = ground_energy_shift(spec)
    out = []
    for p in _admissible(spec, cap):
        E = raw_energy(p, spec)
        out.append(ScalarLevel(p, E, E - E0))
    return out


def enumerate_spin_levels(spec: DynamicalSpec, *, cap: int = DEFAULT_LEVEL_CAP) -> list[SpinLevelBlock]:
    """Every admissible p with its spin degeneracy; p with zero degeneracy are dropped."""
    E0 = ground_energy_shift(spec)
    out = []
    for p in _admissible(spec, cap):
        sizes = block_sizes(p)
        deg = 1
        for k in sizes:
            deg *= block_degeneracy(k, spec.m, spec.epsilon)
        if deg:
            E = raw_energy(p, spec)
            out.append(SpinLevelBlock(p, sizes, deg, E, E - E0))
    return out


# ---------------------------------------------------------------------------
# Partition functions by dynamic programming over sites
# ---------------------------------------------------------------------------


def _site_log_weights(spec: DynamicalSpec, n: int, T: float) -> np.ndarray:
    """log w[i, v] for site i (0-based) holding value v.

    (E_p - E0)/(4a) = sum_i [p_i c_i - p_i(p_i+1)/a] - N/(4a) with
    c_i = beta + 2i - 2N (1-based i), so the weight factorizes over sites up to
    the constant exp(N/(4aT)).
    """
    a = float(spec.a)
    beta = float(spec.beta)
    N = spec.N
    v = np.arange(n + 1, dtype=float)
    c = beta + 2.0 * np.arange(1, N + 1) - 2.0 * N
    return -(np.outer(c, v) - v * (v + 1.0) / a) / T


def _run_partition(log_w: np.ndarray, g: np.ndarray) -> float:
    """Sum over non-increasing p of prod_i w_i(p_i) times prod over runs of g[run length].

    f[v, r] holds partial sums whose last value is v with a current run of r.
    """
    N, n1 = log_w.shape
    w = np.exp(log_w)
    f = np.zeros((n1, N + 1))
    f[:, 1] = w[0]
    for i in range(1, N):
        closed = f @ g  # close the running block with weight g[r]
        # values strictly greater than v' feed v'
        greater = np.concatenate([np.cumsum(closed[::-1])[::-1][1:], [0.0]])
        new = np.zeros_like(f)
        new[:, 2:] = f[:, 1:-1] * w[i][:, None]
        new[:, 1] = greater * w[i]
        f = new
    return float((f @ g).sum())


def partition_functions(spec: DynamicalSpec, T: float) -> tuple[float, float]:
    """(Z_scalar, Z_spin) at temperature T from the shifted energies."""
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    n = n_max(spec)
    if n is None:
        raise DomainError("the model has no bound states for these parameters")
    log_w = _site_log_weights(spec, n, float(T))
    N = spec.N
    offset = float(np.exp(N / (4.0 * float(spec.a) * T)))
    g_scalar = np.ones(N + 1)
    g_scalar[0] = 0.0
    g_spin = np.array([float(block_degeneracy(k, spec.m, spec.epsilon)) if k else 0.0 for k in range(N + 1)])
    return float(offset * _run_partition(log_w, g_scalar)), float(offset * _run_partition(log_w, g_spin))


@dataclass(frozen=True)
class FreezingProbe:
    a: Fraction
    n_max: int
    ratio: float
    error: float


@dataclass(frozen=True)
class FreezingReport:
    chain_Z: float
    probes: tuple[FreezingProbe, ...]

    @property
    def errors(self) -> list[float]:
        return [p.error for p in self.probes]

    @property
    def halving_ratios(self) -> list[float]:
        e = self.errors
        return [e[k + 1] / e[k] for k in range(len(e) - 1)]

    @property
    def monotone(self) -> bool:
        e = self.errors
        return all(e[k + 1] < e[k] for k in range(len(e) - 1))

    def ratios_within(self, lo: float = 0.3, hi: float = 0.7) -> bool:
        return all(lo <= r <= hi for r in self.halving_ratios)


def freezing_ratio_check(N, m, epsilon, beta, T, a_values) -> FreezingReport:
    """Compare Z_spin/Z_scalar at each a with the chain partition function at q = exp(-1/T)."""
    beta = as_fraction(beta)
    table = spectrum(N, m, epsilon, beta)
    chain_Z = partition_from_table(table, float(np.exp(-1.0 / T)))
    probes = []
    for a in a_values:
        spec = DynamicalSpec(N, m, epsilon, a, beta)
        n = n_max(spec)
        if n is None or n < 1:
            raise DomainError(f"a={a} gives fewer than two scalar levels")
        Zsc, Zsp = partition_functions(spec, T)
        ratio = Zsp / Zsc
        probes.append(FreezingProbe(a=spec.a, n_max=n, ratio=ratio, error=abs(ratio - chain_Z)))
    return FreezingReport(chain_Z=chain_Z, probes=tuple(probes))
