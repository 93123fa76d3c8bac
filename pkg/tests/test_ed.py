from __future__ import annotations

from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from fichain import motifs as M
from fichain.ed import build_hamiltonian, digit_permutation_matrix, eigenvalues, verify_against_motifs
from fichain.errors import CapExceededError, DomainError
from fichain.geometry import LatticeSpec, build_geometry
from fichain.stats import closed_form_moments


def ed(N, m, eps, beta):
    return eigenvalues(build_hamiltonian(build_geometry(LatticeSpec(N, beta)), m, eps))


class TestEigenvalues:
    def test_two_by_two(self):
        np.testing.assert_allclose(eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1.0, 1.0], atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_array_equal(eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])

    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_random_against_lapack(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 40))
        a = x + x.T
        np.testing.assert_allclose(eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-10)


class TestHamiltonian:
    def test_two_sites(self):
        np.testing.assert_allclose(ed(2, 2, -1, 6), [0, 4, 4, 4], atol=1e-12)
        np.testing.assert_allclose(ed(2, 2, 1, 6), [0, 0, 0, 4], atol=1e-12)

    def test_single_site_is_zero(self):
        H = build_hamiltonian(build_geometry(LatticeSpec(1, 5)), 3, -1)
        assert H.shape == (3, 3) and not H.any()

    def test_dim_cap(self):
        with pytest.raises(CapExceededError):
            build_hamiltonian(build_geometry(LatticeSpec(13, 30)), 2, -1)

    @pytest.mark.parametrize("N,m,eps", [(3, 2, -1), (4, 3, 1), (5, 2, 1)])
    def test_trace_is_states_times_mean(self, N, m, eps):
        beta = Fraction(2 * N + 3)
        H = build_hamiltonian(build_geometry(LatticeSpec(N, beta)), m, eps)
        mu = closed_form_moments(N, m, beta, eps).mu
        assert np.trace(H) == pytest.approx(m**N * float(mu), rel=1e-12)

    @pytest.mark.parametrize("perm", list(permutations(range(3))))
    def test_commutes_with_flavor_relabelling(self, perm):
        H = build_hamiltonian(build_geometry(LatticeSpec(3, 7)), 3, -1)
        P = digit_permutation_matrix(3, 3, perm)
        np.testing.assert_allclose(P @ H, H @ P, atol=1e-12)


class TestAgainstMotifs:
    @pytest.mark.parametrize("N", [2, 3, 4, 5, 6, 7])
    @pytest.mark.parametrize("eps", [1, -1])
    def test_three_flavors(self, N, eps):
        beta = 2 * N + Fraction(1, 2)
        cmp = verify_against_motifs(ed(N, 3, eps, beta), M.spectrum(N, 3, eps, beta))
        assert cmp.passed, cmp

    def test_wrong_beta_is_caught(self):
        eigs = ed(5, 2, -1, 11)
        assert verify_against_motifs(eigs, M.spectrum(5, 2, -1, 11)).passed
        assert not verify_against_motifs(eigs, M.spectrum(5, 2, -1, 12)).passed

    def test_state_count_mismatch(self):
        with pytest.raises(DomainError):
            verify_against_motifs(np.zeros(3), M.spectrum(2, 2, -1, 6))
