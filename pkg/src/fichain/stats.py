"""Level density, moments, unfolding and spacing statistics of chain spectra."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import pi, sqrt

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .geometry import as_fraction
from .motifs import SpectrumTable, extremes, max_energy_closed_form, min_energy_closed_form

RMS_GRID_POINTS = 400


@dataclass(frozen=True)
class MomentReport:
    mu: Fraction
    sigma2: Fraction
    source: str

    @property
    def sigma(self) -> float:
        return sqrt(float(self.sigma2))


def closed_form_moments(N: int, m: int, beta, epsilon: int) -> MomentReport:
    b = as_fraction(beta)
    mu = Fraction(1, 12) * (1 - Fraction(epsilon, m)) * N * (N - 1) * (3 * b - 4 * N + 2)
    poly = 16 * N**3 - N**2 * (25 * b - 6) + N * (10 * b * b - 35 * b + 26) + (5 * b - 6) * (5 * b + 4)
    sigma2 = Fraction(1, 360) * (1 - Fraction(1, m * m)) * N * (N - 1) * poly
    return MomentReport(mu=mu, sigma2=sigma2, source="closed_form")


def empirical_moments(table: SpectrumTable) -> MomentReport:
    """Degeneracy-weighted mean and variance, exact in the rational beta of the table."""
    if not table.levels:
        raise DomainError("empty spectrum table")
    total = table.total
    mu = Fraction(0)
    second = Fraction(0)
    for key, deg in table.levels.items():
        e = key.value(table.beta)
        mu += deg * e
        second += deg * e * e
    mu /= total
    return MomentReport(mu=mu, sigma2=second / total - mu * mu, source="empirical")


def _distinct(table: SpectrumTable) -> tuple[np.ndarray, np.ndarray]:
    """Distinct level values (ascending floats) and their degeneracy weights summing to one."""
    vm = table.value_map()
    values = sorted(vm)
    total = table.total
    return (
        np.array([float(v) for v in values]),
        np.array([float(Fraction(vm[v], total)) for v in values]),
    )


@dataclass(frozen=True)
class GaussianComparison:
    sup_distance: float
    mu: float
    sigma: float
    levels: np.ndarray
    cdf: np.ndarray
    gaussian: np.ndarray


def gaussian_comparison(table: SpectrumTable) -> GaussianComparison:
    """sup |F - G| between the step cumulative level density and the Gaussian law.

    Both one-sided limits of F are compared at every level, since the supremum
    of a step function against a continuous CDF sits at a jump.
    """
    mom = closed_form_moments(table.N, table.m, table.beta, table.epsilon)
    mu, sigma = float(mom.mu), mom.sigma
    levels, w = _distinct(table)
    F = np.cumsum(w)
    F_left = F - w
    if sigma == 0.0:
        G = (levels >= mu).astype(float)
    else:
        G = ndtr((levels - mu) / sigma)
    D = float(max(np.max(np.abs(F - G)), np.max(np.abs(F_left - G))))
    return GaussianComparison(sup_distance=D, mu=mu, sigma=sigma, levels=levels, cdf=F, gaussian=G)


@dataclass(frozen=True)
class UnfoldedSpectrum:
    levels: np.ndarray
    eta: np.ndarray
    spacings: np.ndarray


def unfold_and_spacings(table: SpectrumTable) -> UnfoldedSpectrum:
    """Map distinct levels through the Gaussian CDF and normalize consecutive gaps to unit mean."""
    mom = closed_form_moments(table.N, table.m, table.beta, table.epsilon)
    levels, _ = _distinct(table)
    if len(levels) < 3:
        raise DomainError(f"unfolding needs at least 3 distinct levels, got {len(levels)}")
    eta = ndtr((levels - float(mom.mu)) / mom.sigma)
    if np.any(np.diff(eta) <= 0):
        raise DomainError("unfolded levels are not strictly increasing (Gaussian tail saturated)")
    return UnfoldedSpectrum(levels=levels, eta=eta, spacings=normalized_spacings(eta))


def normalized_spacings(eta) -> np.ndarray:
    """s_i = L (eta_{i+1} - eta_i)/(eta_{L+1} - eta_1), whose mean is one."""
    eta = np.asarray(eta, dtype=float)
    L = len(eta) - 1
    return L * np.diff(eta) / (eta[-1] - eta[0])


@dataclass(frozen=True)
class SpacingsLawParams:
    s_max: float
    s0: float


def spacings_law_params(N: int, m: int, beta, epsilon: int = -1) -> SpacingsLawParams:
    """s_max = (E_max - E_min)/(sqrt(2 pi) sigma) and s0 = s_max exp(-pi s_max^2 / 4).

    The energy range is the same for both signs of epsilon by duality, and so is sigma.
    """
    spread = max_energy_closed_form(N, beta) - min_energy_closed_form(N, m, beta)
    sigma = closed_form_moments(N, m, beta, epsilon).sigma
    if sigma == 0.0:
        raise DomainError("zero variance: the spacings law is undefined")
    s_max = float(spread) / (sqrt(2.0 * pi) * sigma)
    return SpacingsLawParams(s_max=s_max, s0=s_max * np.exp(-0.25 * pi * s_max**2))


def spacings_law_cdf(s, params: SpacingsLawParams):
    """P(s) = 1 - 2/(sqrt(pi) s_max) sqrt(log(s_max/s)), clamped to [0, 1]."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(s > params.s_max * (1 + 1e-12)):
        raise DomainError(f"s must lie in (0, s_max={params.s_max}]")
    logs = np.log(params.s_max / np.minimum(s, params.s_max))
    P = 1.0 - 2.0 / (sqrt(pi) * params.s_max) * np.sqrt(logs)
    out = np.clip(P, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def spacings_law(s, N: int, m: int, beta, epsilon: int = -1):
    return spacings_law_cdf(s, spacings_law_params(N, m, beta, epsilon))


def empirical_spacings_cdf(spacings: np.ndarray, s) -> np.ndarray:
    """Fraction of spacings <= s."""
    ordered = np.sort(np.asarray(spacings, dtype=float))
    return np.searchsorted(ordered, np.asarray(s, dtype=float), side="right") / len(ordered)


@dataclass(frozen=True)
class SpacingsComparison:
    rms: float
    grid: np.ndarray
    empirical: np.ndarray
    law: np.ndarray
    params: SpacingsLawParams


def compare_spacings_law(
    unfolded: UnfoldedSpectrum, params: SpacingsLawParams, points: int = RMS_GRID_POINTS
) -> SpacingsComparison:
    """RMS of empirical CDF minus P(s) on a uniform grid over [s0, s_max]."""
    grid = np.linspace(params.s0, params.s_max, points)
    emp = empirical_spacings_cdf(unfolded.spacings, grid)
    law = spacings_law_cdf(grid, params)
    rms = float(np.sqrt(np.mean((emp - law) ** 2)))
    return SpacingsComparison(rms=rms, grid=grid, empirical=emp, law=law, params=params)


# ---------------------------------------------------------------------------
# Raw level differences and clusters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeDiagnostics:
    differences: list
    histogram: dict
    dominant: Fraction
    dominant_fraction: float
    scatter: np.ndarray
    clusters: dict
    j_range: tuple[int, int] | None
    clusters_within_range: bool | None


def regime_diagnostics(table: SpectrumTable) -> RegimeDiagnostics:
    """Histogram of consecutive level differences, the dominant one and its share.

    ``scatter`` holds rows (e_i, dE_i) with e_i = (E_i - mu)/sigma at the lower
    level of each gap.  ``clusters`` maps each beta coefficient j of the level
    keys to the summed degeneracy; for epsilon = -1 the observed j are checked
    against the predicted range.
    """
    values = sorted(table.value_map())
    if not values:
        raise DomainError("empty spectrum table")
    diffs = [b - a for a, b in zip(values, values[1:])]
    hist = dict(sorted(Counter(diffs).items()))
    if diffs:
        dominant, count = max(hist.items(), key=lambda kv: (kv[1], -kv[0]))
        frac = count / len(diffs)
    else:
        dominant, frac = Fraction(0), 0.0
    mom = closed_form_moments(table.N, table.m, table.beta, table.epsilon)
    sigma = mom.sigma or 1.0
    scatter = np.array(
        [[(float(a) - float(mom.mu)) / sigma, float(d)] for a, d in zip(values, diffs)]
    ).reshape(-1, 2)
    clusters: dict[int, int] = {}
    for key, deg in table.levels.items():
        clusters[key.A] = clusters.get(key.A, 0) + deg
    clusters = dict(sorted(clusters.items()))
    j_range = None
    within = None
    if table.epsilon == -1 and table.family == "FI":
        j_range = extremes(table.N, table.m, table.beta).j_range
        within = all(j_range[0] <= j <= j_range[1] for j in clusters)
    return RegimeDiagnostics(
        differences=diffs,
        histogram=hist,
        dominant=dominant,
        dominant_fraction=frac,
        scatter=scatter,
        clusters=clusters,
        j_range=j_range,
        clusters_within_range=within,
    )


@dataclass(frozen=True)
class LevelHistogram:
    edges: np.ndarray
    density: np.ndarray
    rule: str


def level_density_histogram(table: SpectrumTable, bins: int | str = "fd") -> LevelHistogram:
    """Degeneracy-weighted level density; bin edges from the distinct levels (Freedman-Diaconis by default)."""
    levels, w = _distinct(table)
    edges = np.histogram_bin_edges(levels, bins=bins)
    density, edges = np.histogram(levels, bins=edges, weights=w, density=True)
    return LevelHistogram(edges=edges, density=density, rule=str(bins))
