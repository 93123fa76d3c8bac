"""Dunkl-Cherednik operators on polynomials in z, in exact rational arithmetic.

Polynomials are dicts mapping exponent tuples to nonzero Fractions.  Site
indices are 0-based in the API; formulas quoted in docstrings use 1-based i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import DomainError
from .geometry import as_fraction

Poly = dict


def sorted_desc(n) -> tuple[int, ...]:
    return tuple(sorted(n, reverse=True))


def precedes(n, n_prime) -> bool:
    """n < n' in the monomial order: first nonzero entry of [n'] - [n] is positive."""
    if len(n) != len(n_prime):
        raise DomainError("multi-indices must have equal length")
    for x, y in zip(sorted_desc(n), sorted_desc(n_prime)):
        if x != y:
            return y > x
    return False


def precedes_or_same_class(n, n_prime) -> bool:
    """[n] <= [n'] (equal rearrangements allowed)."""
    return sorted_desc(n) == sorted_desc(n_prime) or precedes(n, n_prime)


def _add(poly: Poly, key, coeff) -> None:
    if not coeff:
        return
    c = poly.get(key, 0) + coeff
    if c:
        poly[key] = c
    else:
        poly.pop(key, None)


def _swap(n, i, j):
    n = list(n)
    n[i], n[j] = n[j], n[i]
    return tuple(n)


def divided_difference(n, i: int, j: int) -> list[tuple[tuple[int, ...], int]]:
    """(1 - K_ij) z^n / (z_i - z_j) as a list of (exponent, +-1) terms."""
    u, v = n[i], n[j]
    out = []
    if u > v:
        for k in range(u - v):
            e = list(n)
            e[i], e[j] = u - 1 - k, v + k
            out.append((tuple(e), 1))
    elif u < v:
        for k in range(v - u):
            e = list(n)
            e[i], e[j] = u + k, v - 1 - k
            out.append((tuple(e), -1))
    return out


def apply_J_minus(i: int, poly: Poly, a) -> Poly:
    """J_i^- = d/dz_i + a sum_{j != i} (1 - K_ij)/(z_i - z_j)."""
    a = as_fraction(a)
    out: Poly = {}
    for n, c in poly.items():
        N = len(n)
        if n[i]:
            e = list(n)
            e[i] -= 1
            _add(out, tuple(e), c * n[i])
        for j in range(N):
            if j != i:
                for e, sgn in divided_difference(n, i, j):
                    _add(out, e, a * c * sgn)
    return out


def apply_J_zero(i: int, poly: Poly, a, b, N: int | None = None) -> Poly:
    """J_i^0 = z_i d/dz_i + a sum_{j!=i} z_j/(z_i - z_j)(1 - K_ij) - a sum_{j>i} K_ij + a(N-1) + (1-b)/2."""
    a = as_fraction(a)
    b = as_fraction(b)
    out: Poly = {}
    for n, c in poly.items():
        if N is not None and len(n) != N:
            raise DomainError("monomial length does not match N")
        size = len(n)
        const = a * (size - 1) + (1 - b) / 2
        _add(out, n, c * (n[i] + const))
        for j in range(size):
            if j == i:
                continue
            for e, sgn in divided_difference(n, i, j):
                e = list(e)
                e[j] += 1
                _add(out, tuple(e), a * c * sgn)
            if j > i:
                _add(out, _swap(n, i, j), -a * c)
    return out


def lam(i: int, p, a, b) -> Fraction:
    """lambda_i(p) = p_i + (1-b)/2 + a(N + i + 1 - #(p_i) - 2 l(p_i)) with 1-based i and l.

    #(p_i) counts entries equal to p_i, l(p_i) is the first 1-based position holding it.
    """
    a = as_fraction(a)
    b = as_fraction(b)
    N = len(p)
    count = sum(1 for x in p if x == p[i])
    first = p.index(p[i]) + 1
    return p[i] + (1 - b) / 2 + a * (N + (i + 1) + 1 - count - 2 * first)


def eigen_energy(n, a, b) -> Fraction:
    """N b^2 - sum_i (2p_i + 1 + 2a(N-i) - b)^2 with p = [n]."""
    a = as_fraction(a)
    b = as_fraction(b)
    p = sorted_desc(n)
    N = len(p)
    return N * b * b - sum((2 * pi + 1 + 2 * a * (N - i) - b) ** 2 for i, pi in enumerate(p, start=1))


# ---------------------------------------------------------------------------
# Triangularity report on the monomial basis with n_i <= n_cap
# ---------------------------------------------------------------------------


@dataclass
class TriangularityReport:
    N: int
    n_cap: int
    a: Fraction
    b: Fraction
    basis_size: int = 0
    violations: dict = field(default_factory=lambda: {
        "J_minus_strict": [],
        "J_zero_weak": [],
        "sum_J_zero_sq": [],
        "H_prime_diagonal": [],
        "H_prime_triangular": [],
        "lambda_consistency": [],
        "closure": [],
    })
    h_diagonal: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def assertion_passed(self, name: str) -> bool:
        return not self.violations[name]


def _basis(N: int, n_cap: int):
    return list(product(range(n_cap + 1), repeat=N))


def triangularity_report(N: int, n_cap: int, a, b) -> TriangularityReport:
    """Check the triangular action of J^-, J^0, sum (J^0)^2 and H' on monomials.

    H' = -4 sum_i (J_i^0)^2 - 4b sum_i J_i^- + N b^2.  Violations are recorded
    as (column n, row n', detail) triples; an empty report means every
    assertion holds exactly at this (a, b).
    """
    if N < 1 or n_cap < 0:
        raise DomainError("need N >= 1 and n_cap >= 0")
    a = as_fraction(a)
    b = as_fraction(b)
    rep = TriangularityReport(N=N, n_cap=n_cap, a=a, b=b)
    basis = _basis(N, n_cap)
    rep.basis_size = len(basis)
    inside = set(basis)
    v = rep.violations
    for n in basis:
        phi = {n: Fraction(1)}
        p = sorted_desc(n)
        sum_minus: Poly = {}
        sum_sq: Poly = {}
        for i in range(N):
            jm = apply_J_minus(i, phi, a)
            for n2, c in jm.items():
                if not precedes(n2, n):
                    v["J_minus_strict"].append((n, n2, f"i={i}, coeff={c}"))
            _add_poly(sum_minus, jm)
            j0 = apply_J_zero(i, phi, a, b, N)
            for n2, c in j0.items():
                if n2 != n and not precedes_or_same_class(n2, n):
                    v["J_zero_weak"].append((n, n2, f"i={i}, coeff={c}"))
                if n2 not in inside:
                    v["closure"].append((n, n2, f"J_{i}^0 leaves the basis"))
            if n == p and j0.get(n, 0) != lam(i, p, a, b):
                v["lambda_consistency"].append((n, n, f"i={i}: diagonal {j0.get(n, 0)} vs lambda {lam(i, p, a, b)}"))
            _add_poly(sum_sq, apply_J_zero(i, j0, a, b, N))
        expected = sum(lam(i, p, a, b) ** 2 for i in range(N))
        if sum_sq.get(n, 0) != expected:
            v["sum_J_zero_sq"].append((n, n, f"diagonal {sum_sq.get(n, 0)} vs {expected}"))
        for n2, c in sum_sq.items():
            if n2 != n and not precedes(n2, n):
                v["sum_J_zero_sq"].append((n, n2, f"off-diagonal coeff {c}"))
        hp: Poly = {}
        _add_poly(hp, sum_sq, -4)
        _add_poly(hp, sum_minus, -4 * b)
        _add(hp, n, N * b * b)
        diag = hp.get(n, Fraction(0))
        rep.h_diagonal[n] = diag
        if diag != eigen_energy(n, a, b):
            v["H_prime_diagonal"].append((n, n, f"diagonal {diag} vs {eigen_energy(n, a, b)}"))
        for n2, c in hp.items():
            if n2 != n and not precedes(n2, n):
                v["H_prime_triangular"].append((n, n2, f"coeff {c}"))
            if n2 not in inside:
                v["closure"].append((n, n2, "H' leaves the basis"))
    v["closure"] = sorted(set(v["closure"]))
    return rep


def _add_poly(target: Poly, poly: Poly, scale=1) -> None:
    for k, c in poly.items():
        _add(target, k, scale * c)
