from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fichain.dunkl import (
    apply_J_minus,
    apply_J_zero,
    divided_difference,
    eigen_energy,
    lam,
    precedes,
    precedes_or_same_class,
    triangularity_report,
)
from fichain.errors import DomainError

multi = st.lists(st.integers(0, 5), min_size=3, max_size=3).map(tuple)


def evaluate(poly, z):
    total = Fraction(0)
    for n, c in poly.items():
        term = c
        for zi, ni in zip(z, n):
            term *= zi**ni
        total += term
    return total


class TestOrder:
    def test_examples(self):
        assert precedes((1, 2, 3, 2), (1, 2, 2, 6))
        assert precedes((1, 2, 2, 6), (1, 1, 6, 3))
        assert precedes((1, 2, 3, 2), (1, 1, 6, 3))

    def test_rearrangements_incomparable(self):
        for r in permutations((2, 0, 1)):
            assert not precedes(r, (0, 1, 2)) and not precedes((0, 1, 2), r)
            assert precedes_or_same_class(r, (0, 1, 2))

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            precedes((1, 0), (1, 0, 0))

    @given(multi, multi, multi)
    def test_strict_partial_order(self, x, y, z):
        assert not precedes(x, x)
        assert not (precedes(x, y) and precedes(y, x))
        if precedes(x, y) and precedes(y, z):
            assert precedes(x, z)


class TestOperators:
    @given(multi, st.integers(0, 2), st.integers(0, 2))
    def test_divided_difference_is_exact(self, n, i, j):
        if i == j:
            return
        poly = {}
        for e, s in divided_difference(n, i, j):
            poly[e] = poly.get(e, 0) + s
        z = (Fraction(2), Fraction(-3), Fraction(5, 7))
        swapped = list(n)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        lhs = evaluate({tuple(n): 1}, z) - evaluate({tuple(swapped): 1}, z)
        assert evaluate(poly, z) * (z[i] - z[j]) == lhs

    def test_J_minus_examples(self):
        assert apply_J_minus(0, {(0, 0): Fraction(1)}, 3) == {}
        assert apply_J_minus(0, {(1, 0): Fraction(1)}, Fraction(5, 2)) == {(0, 0): Fraction(7, 2)}

    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_J_zero_on_constant(self, N):
        a, b = Fraction(3, 2), Fraction(11)
        for i in range(N):
            out = apply_J_zero(i, {(0,) * N: Fraction(1)}, a, b, N)
            assert out == {(0,) * N: (1 - b) / 2 + a * i}
        assert lam(0, (0,) * N, a, b) == (1 - b) / 2

    def test_length_check(self):
        with pytest.raises(DomainError):
            apply_J_zero(0, {(0, 0): Fraction(1)}, 1, 5, N=3)


class TestReport:
    def test_two_sites(self):
        rep = triangularity_report(2, 2, 1, 5)
        assert rep.passed, rep.violations
        assert rep.h_diagonal[(0, 0)] == 30
        assert rep.h_diagonal[(1, 0)] == rep.h_diagonal[(0, 1)]
        assert rep.basis_size == 9

    @pytest.mark.parametrize("b", [5, Fraction(13, 3)])
    def test_single_site(self, b):
        rep = triangularity_report(1, 4, 2, b)
        assert rep.passed
        for (n,), e in rep.h_diagonal.items():
            assert e == b * b - (2 * n + 1 - b) ** 2

    def test_diagonal_is_the_energy_set(self):
        rep = triangularity_report(3, 2, 2, 20)
        for n, e in rep.h_diagonal.items():
            assert e == eigen_energy(n, 2, 20)
        assert set(rep.h_diagonal.values()) == {eigen_energy(p, 2, 20) for p in product(range(3), repeat=3)}

    def test_detects_wrong_energy(self):
        # a deliberately wrong b in the comparison must show up as a diagonal violation
        rep = triangularity_report(2, 1, 1, 5)
        assert all(e != eigen_energy(n, 1, 6) for n, e in rep.h_diagonal.items())

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            triangularity_report(0, 2, 1, 5)

    @given(st.integers(1, 3), st.integers(1, 2), st.fractions(Fraction(3, 5), Fraction(4)), st.fractions(Fraction(1), Fraction(30)))
    def test_random_rationals(self, N, n_cap, a, b):
        rep = triangularity_report(N, n_cap, a, b)
        assert rep.passed, {k: v[:2] for k, v in rep.violations.items() if v}
