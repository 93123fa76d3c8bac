"""Acceptance suite: one marked group per criterion, summarized at the end of the run.

Each test carries ``@pytest.mark.criterion(n)``; conftest prints a PASS/FAIL
line per criterion after the session.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from fichain import motifs as M
from fichain import stats as S
from fichain.dunkl import triangularity_report
from fichain.dynamics import freezing_ratio_check
from fichain.ed import build_hamiltonian, eigenvalues, verify_against_motifs
from fichain.errors import DomainError, NoCriticalPointError
from fichain.geometry import (
    LatticeSpec,
    build_geometry,
    coupling_identities,
    critical_point_from_zeros,
    gradient_residual,
    minimize_potential,
    potential_and_prepotential,
    potential_offset,
    sites_from_critical_point,
)

pytestmark = pytest.mark.acceptance


def grid_cases():
    for m, top in ((2, 10), (3, 7)):
        for N in range(1, top + 1):
            for eps in (1, -1):
                for beta in (Fraction(2 * N + 1), Fraction(2 * N + 2), Fraction(4 * N + 1, 2)):
                    yield N, m, eps, beta


GRID = list(grid_cases())


def case_id(case):
    N, m, eps, beta = case
    return f"N{N}-m{m}-e{eps:+d}-b{beta}"


# ---------------------------------------------------------------------------
# 1. DP spectrum equals brute-force enumeration
# ---------------------------------------------------------------------------


@pytest.mark.criterion(1)
@pytest.mark.parametrize("case", GRID, ids=case_id)
def test_c1_dp_equals_bruteforce(case):
    N, m, eps, beta = case
    dp = M.spectrum(N, m, eps, beta)
    bf = M.spectrum_bruteforce(N, m, eps, beta)
    assert dp.levels == bf.levels
    assert dp.total == bf.total == m**N


# ---------------------------------------------------------------------------
# 2. Exact diagonalization against motif tables
# ---------------------------------------------------------------------------


@pytest.mark.criterion(2)
@pytest.mark.parametrize("case", [c for c in GRID if c[1] ** c[0] <= 2048], ids=case_id)
def test_c2_ed_matches_tables(case):
    N, m, eps, beta = case
    table = M.spectrum(N, m, eps, beta)
    eigs = eigenvalues(build_hamiltonian(build_geometry(LatticeSpec(N, beta)), m, eps))
    e_max = float(M.max_energy_closed_form(N, beta))
    cmp = verify_against_motifs(eigs, table, tol=1e-7 * max(1.0, e_max))
    assert cmp.passed, cmp


@pytest.mark.criterion(2)
def test_c2_anchor():
    table = M.spectrum(4, 2, -1, 10)
    assert table.value_map() == {10: 1, 14: 3, 22: 4, 28: 3, 32: 5}
    eigs = eigenvalues(build_hamiltonian(build_geometry(LatticeSpec(4, 10)), 2, -1))
    assert verify_against_motifs(eigs, table, tol=1e-7 * 32).passed


# ---------------------------------------------------------------------------
# 3. Closed-form moments
# ---------------------------------------------------------------------------


@pytest.mark.criterion(3)
@pytest.mark.parametrize("N,m", [(N, 2) for N in range(1, 17)] + [(N, 3) for N in range(1, 17)])
def test_c3_moments_exact(N, m):
    for beta in (2 * N + 1, 2 * N + 2, 3 * N):
        cf = {eps: S.closed_form_moments(N, m, beta, eps) for eps in (1, -1)}
        for eps in (1, -1):
            emp = S.empirical_moments(M.spectrum(N, m, eps, beta))
            assert (emp.mu, emp.sigma2) == (cf[eps].mu, cf[eps].sigma2)
        assert cf[1].sigma2 == cf[-1].sigma2


@pytest.mark.criterion(3)
def test_c3_anchor():
    emp = S.empirical_moments(M.spectrum(4, 2, -1, 10))
    assert (emp.mu, emp.sigma2) == (24, 55)


# ---------------------------------------------------------------------------
# 4. Critical-point residual and sum identities
# ---------------------------------------------------------------------------


@pytest.mark.criterion(4)
@pytest.mark.parametrize("N", [2, 5, 10, 25, 50])
@pytest.mark.parametrize("which", ["2N+1", "3N"])
def test_c4_geometry_identities(N, which):
    beta = 2 * N + 1 if which == "2N+1" else 3 * N
    g = build_geometry(LatticeSpec(N, beta))
    assert np.max(np.abs(gradient_residual(g.zeta, beta))) <= 1e-9
    for check in coupling_identities(g):
        assert check.rel_error <= 1e-9, check


@pytest.mark.criterion(4)
def test_c4_anchor():
    assert build_geometry(LatticeSpec(2, 6)).h[0, 1] == pytest.approx(1.0, abs=1e-13)


# ---------------------------------------------------------------------------
# 5. Prepotential identity, unique maximum, no critical point below threshold
# ---------------------------------------------------------------------------


@pytest.mark.criterion(5)
def test_c5_prepotential_identity():
    rng = np.random.default_rng(20240501)
    done = 0
    while done < 100:
        N = int(rng.integers(1, 8))
        spec = LatticeSpec(N, Fraction(2 * N - 1) + Fraction(int(rng.integers(0, 40)), 4))
        x = np.sort(rng.normal(scale=1.5, size=N))
        if N > 1 and np.min(np.diff(x)) < 1e-3:
            continue
        U, _, grad = potential_and_prepotential(x, spec)
        assert abs(U - grad @ grad - float(potential_offset(spec))) <= 1e-8 * max(1.0, abs(U))
        done += 1


@pytest.mark.criterion(5)
@pytest.mark.parametrize("N,beta", [(2, 6), (4, 9), (6, Fraction(29, 2))])
def test_c5_unique_maximum(N, beta):
    spec = LatticeSpec(N, beta)
    g = build_geometry(spec)
    x_star = critical_point_from_zeros(g.zeta, beta)
    rng = np.random.default_rng(N)
    gap = np.min(np.diff(x_star)) if N > 1 else 1.0
    for _ in range(20):
        start = np.sort(x_star + rng.uniform(-0.45, 0.45, size=N) * gap)
        x = minimize_potential(spec, start)
        np.testing.assert_allclose(sites_from_critical_point(x, beta), g.xi, atol=1e-8)


@pytest.mark.criterion(5)
@pytest.mark.parametrize("N,beta", [(2, 2), (2, Fraction(3, 2)), (3, 4), (4, 5)])
def test_c5_no_critical_point(N, beta):
    spec = LatticeSpec(N, beta)
    assert not spec.has_sites
    with pytest.raises(NoCriticalPointError):
        minimize_potential(spec, np.linspace(-1.0, 1.0, N))


# ---------------------------------------------------------------------------
# 6. Freezing trick
# ---------------------------------------------------------------------------


@pytest.mark.criterion(6)
@pytest.mark.parametrize("N,beta", [(2, 6), (2, 10), (4, 10)])
@pytest.mark.parametrize("T", [1.0, 2.0])
def test_c6_freezing_converges(N, beta, T):
    rep = freezing_ratio_check(N, 2, -1, beta, T, [50, 100, 200])
    assert rep.monotone, rep.errors
    assert rep.ratios_within(0.3, 0.7), rep.halving_ratios


@pytest.mark.criterion(6)
def test_c6_four_sites_beta_six_rejected():
    # beta = 6 is not above 2(N-1) for N = 4, so the chain is undefined there
    with pytest.raises(DomainError):
        freezing_ratio_check(4, 2, -1, 6, 1.0, [50, 100, 200])


# ---------------------------------------------------------------------------
# 7. Dunkl triangularity
# ---------------------------------------------------------------------------


@pytest.mark.criterion(7)
@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("n_cap", [2, 3])
@pytest.mark.parametrize("a,b", [(1, 5), (2, 20)])
def test_c7_triangularity(N, n_cap, a, b):
    rep = triangularity_report(N, n_cap, a, b)
    for name in ("J_minus_strict", "J_zero_weak", "sum_J_zero_sq", "H_prime_diagonal", "H_prime_triangular"):
        assert rep.assertion_passed(name), (name, rep.violations[name][:3])


# ---------------------------------------------------------------------------
# 8. Duality
# ---------------------------------------------------------------------------


@pytest.mark.criterion(8)
@pytest.mark.parametrize("case", [c for c in GRID if c[2] == 1], ids=case_id)
def test_c8_duality(case):
    N, m, _, beta = case
    assert M.tables_equal(M.dual_spectrum(M.spectrum(N, m, 1, beta)), M.spectrum(N, m, -1, beta))
    assert M.energy_sum(N).value(beta) == Fraction(N * (N - 1), 6) * (3 * beta - 4 * N + 2)


# ---------------------------------------------------------------------------
# 9. Statistics at scale
# ---------------------------------------------------------------------------

_TABLES: dict = {}


def big_table(N, beta):
    key = (N, beta)
    if key not in _TABLES:
        _TABLES[key] = M.spectrum(N, 2, -1, beta)
    return _TABLES[key]


@pytest.mark.criterion(9)
def test_c9_gaussian_density():
    assert S.gaussian_comparison(big_table(20, 40)).sup_distance <= 0.02


@pytest.mark.criterion(9)
@pytest.mark.parametrize("N", [20, 24])
@pytest.mark.parametrize("beta", [49, 50])
def test_c9_dominant_spacing(N, beta):
    r = S.regime_diagnostics(big_table(N, beta))
    assert r.dominant == (1 if beta % 2 else 2)
    assert r.dominant_fraction > 0.9


@pytest.mark.criterion(9)
@pytest.mark.parametrize("N", [20, 24])
@pytest.mark.parametrize("beta", [49, 50])
def test_c9_spacings_law_rms(N, beta):
    table = big_table(N, beta)
    rms = S.compare_spacings_law(S.unfold_and_spacings(table), S.spacings_law_params(N, 2, beta)).rms
    assert rms <= 0.05, f"RMS {rms:.4f} exceeds 0.05"


@pytest.mark.criterion(9)
def test_c9_anchor():
    assert S.spacings_law_params(24, 2, 50).s_max == pytest.approx(2.87, abs=0.005)


# ---------------------------------------------------------------------------
# 10. Parity and lattice invariants
# ---------------------------------------------------------------------------


@pytest.mark.criterion(10)
@pytest.mark.parametrize("case", GRID, ids=case_id)
def test_c10_parity(case):
    N, m, eps, beta = case
    table = M.spectrum(N, m, eps, beta)
    assert all(k.B % 2 == 0 for k in table.levels)
    values = table.value_map()
    if beta.denominator == 1:
        assert all(v.denominator == 1 for v in values)
        if beta.numerator % 2 == 0:
            assert all(v.numerator % 2 == 0 for v in values)


@pytest.mark.criterion(10)
@pytest.mark.parametrize("N", [20, 24])
@pytest.mark.parametrize("beta", [49, 50])
def test_c10_parity_large(N, beta):
    values = big_table(N, beta).value_map()
    assert all(k.B % 2 == 0 for k in big_table(N, beta).levels)
    assert all(v.denominator == 1 for v in values)
    if beta % 2 == 0:
        assert all(v.numerator % 2 == 0 for v in values)
