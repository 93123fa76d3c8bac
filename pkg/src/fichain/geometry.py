"""Chain sites and couplings from generalized Laguerre zeros.

The N sites of the chain are xi_i = log(zeta_i)/2 where zeta_1 < ... < zeta_N
are the zeros of L_N^alpha with alpha = beta - 2N + 1.  The unique maximum x*
of the prepotential W in the ordered chamber is tied to the same zeros by
zeta_{N+1-i} = beta exp(-2 x*_i); this is a reflection plus a shift of the
sites, under which the chain Hamiltonian is invariant.  `minimize_potential`
finds x* by Newton ascent and `sites_from_critical_point` maps it back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import ConvergenceError, DomainError, NoCriticalPointError


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, ``"P/Q"`` or decimal string.

    Floats are converted through their shortest decimal repr so that ``2.5``
    becomes 5/2 rather than a binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise DomainError(f"beta must be finite, got {value}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational") from exc
    raise TypeError(f"unsupported type for a rational: {type(value).__name__}")


@dataclass(frozen=True)
class LatticeSpec:
    N: int
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @property
    def alpha(self) -> Fraction:
        """Laguerre parameter beta - 2N + 1."""
        return self.beta - 2 * self.N + 1

    @property
    def has_sites(self) -> bool:
        return self.beta > 2 * (self.N - 1)

    def require_sites(self) -> None:
        if not self.has_sites:
            raise DomainError(
                f"beta={self.beta} must exceed 2(N-1)={2 * (self.N - 1)} for the chain sites to exist"
            )


@dataclass(frozen=True)
class ChainGeometry:
    """Zeros, sites and couplings.  ``h`` has a zero diagonal, which is never used."""

    spec: LatticeSpec
    zeta: np.ndarray
    xi: np.ndarray
    h: np.ndarray = field(repr=False)


def laguerre_value_and_derivative(n: int, alpha: float, x):
    """L_n^alpha(x) and its derivative by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev, np.zeros_like(x)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    # x L_n' = n L_n - (n + alpha) L_{n-1}
    deriv = (n * cur - (n + alpha) * prev) / x
    return cur, deriv


def laguerre_zeros(N: int, beta, *, max_newton: int = 20) -> np.ndarray:
    """Ascending zeros of L_N^{beta-2N+1}.

    Eigenvalues of the symmetric tridiagonal Jacobi matrix give the starting
    values; a few Newton steps on the recurrence polish each one.

    Raises
    ------
    DomainError
        If beta <= 2(N-1), where the zeros are not all positive.
    ConvergenceError
        If the Newton polish leaves a zero unconverged or out of order.
    """
    spec = LatticeSpec(N, beta)
    spec.require_sites()
    alpha = float(spec.alpha)
    k = np.arange(N, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    z = np.sort(eigvalsh_tridiagonal(diag, off))
    for _ in range(max_newton):
        val, der = laguerre_value_and_derivative(N, alpha, z)
        step = val / der
        z = z - step
        if np.all(np.abs(step) <= 4 * np.finfo(float).eps * np.abs(z)):
            break
    else:
        val, der = laguerre_value_and_derivative(N, alpha, z)
        if np.any(np.abs(val / der) > 1e-13 * np.abs(z)):
            raise ConvergenceError(f"Newton polish of Laguerre zeros did not converge (N={N}, beta={beta})")
    if np.any(z <= 0) or np.any(np.diff(z) <= 0):
        raise ConvergenceError("polished Laguerre zeros are not positive and strictly increasing")
    return z


def coupling_matrix(zeta: np.ndarray) -> np.ndarray:
    """h_ij = zeta_i zeta_j / (zeta_i - zeta_j)**2 off the diagonal, 0 on it."""
    d = zeta[:, None] - zeta[None, :]
    np.fill_diagonal(d, 1.0)
    h = np.outer(zeta, zeta) / d**2
    np.fill_diagonal(h, 0.0)
    return h


def build_geometry(spec: LatticeSpec) -> ChainGeometry:
    zeta = laguerre_zeros(spec.N, spec.beta)
    return ChainGeometry(spec=spec, zeta=zeta, xi=0.5 * np.log(zeta), h=coupling_matrix(zeta))


def gradient_residual(zeta, beta) -> np.ndarray:
    """Residual of the critical-point system in zero coordinates.

    r_i = sum_{j != i} 2 zeta_i/(zeta_i - zeta_j) - zeta_i + beta - 2(N-1),
    which vanishes exactly at the zeros of L_N^{beta-2N+1}.
    """
    zeta = np.asarray(zeta, dtype=float)
    N = len(zeta)
    d = zeta[:, None] - zeta[None, :]
    np.fill_diagonal(d, 1.0)
    terms = 2.0 * zeta[:, None] / d
    np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1) - zeta + float(beta) - 2.0 * (N - 1)


# ---------------------------------------------------------------------------
# Potential, prepotential and the ascent on W
# ---------------------------------------------------------------------------


def _pair_differences(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise DomainError("x must be strictly increasing (inside the Weyl chamber)")
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, np.inf)
    return x, d


def potential_and_prepotential(x, spec: LatticeSpec):
    """Return (U, W, grad W) at a point of the ordered chamber.

    U = beta^2 sum (e^{-2x_i} - 1)^2 + sum_{i != j} sinh^{-2}(x_i - x_j)
    W = (N - beta - 1) sum x_i - beta/2 sum e^{-2x_i} + sum_{i<j} log|sinh(x_i - x_j)|
    """
    x, d = _pair_differences(x)
    beta = float(spec.beta)
    N = spec.N
    with np.errstate(over="ignore"):
        e = np.exp(-2.0 * x)
        inv_sinh2 = 1.0 / np.sinh(d) ** 2  # zero on the diagonal since sinh(inf) = inf
        U = beta**2 * np.sum((e - 1.0) ** 2) + inv_sinh2.sum()
        iu = np.triu_indices(N, 1)
        W = (N - beta - 1.0) * x.sum() - 0.5 * beta * e.sum() + np.sum(np.log(np.abs(np.sinh(d[iu]))))
    coth = 1.0 / np.tanh(d)  # tanh(inf) = 1 puts 1 on the diagonal
    np.fill_diagonal(coth, 0.0)
    grad = (N - beta - 1.0) + beta * e + coth.sum(axis=1)
    return float(U), float(W), grad


def potential_offset(spec: LatticeSpec) -> Fraction:
    """U0 = (2/3) N (N-1) (3 beta - 2N + 1), the constant in U = |grad W|^2 + U0."""
    N, beta = spec.N, spec.beta
    return Fraction(2, 3) * N * (N - 1) * (3 * beta - 2 * N + 1)


def prepotential_hessian(x, spec: LatticeSpec) -> np.ndarray:
    x, d = _pair_differences(x)
    with np.errstate(over="ignore"):
        inv_sinh2 = 1.0 / np.sinh(d) ** 2
    hess = inv_sinh2.copy()
    hess[np.diag_indices_from(hess)] = -(2.0 * float(spec.beta) * np.exp(-2.0 * x) + inv_sinh2.sum(axis=1))
    return hess


def finite_difference_hessian(x, spec: LatticeSpec, rel_step: float = 1e-5) -> np.ndarray:
    """Central differences of the analytic gradient, step rel_step*(1+|x_i|)."""
    x = np.asarray(x, dtype=float)
    N = len(x)
    hess = np.empty((N, N))
    for k in range(N):
        step = rel_step * (1.0 + abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += step
        xm[k] -= step
        hess[:, k] = (potential_and_prepotential(xp, spec)[2] - potential_and_prepotential(xm, spec)[2]) / (2 * step)
    return 0.5 * (hess + hess.T)


def critical_point_from_zeros(zeta, beta) -> np.ndarray:
    """x*_i = (log beta - log zeta_{N+1-i})/2, the maximizer of W."""
    zeta = np.asarray(zeta, dtype=float)
    return 0.5 * (np.log(float(beta)) - np.log(zeta[::-1]))


def sites_from_critical_point(x, beta) -> np.ndarray:
    """Inverse of `critical_point_from_zeros` followed by xi = log(zeta)/2."""
    x = np.asarray(x, dtype=float)
    zeta = float(beta) * np.exp(-2.0 * x[::-1])
    return 0.5 * np.log(zeta)


def minimize_potential(
    spec: LatticeSpec,
    start,
    *,
    tol: float = 1e-12,
    max_iter: int = 500,
    escape_radius: float = 200.0,
    flat_curvature: float = 1e-9,
) -> np.ndarray:
    """Maximize W (equivalently minimize U) by damped Newton ascent.

    Returns the critical point x*; `sites_from_critical_point` turns it into
    chain sites.  W is strictly concave on the chamber, so the Newton direction always
    ascends; backtracking keeps every iterate ordered and W increasing.

    Raises
    ------
    NoCriticalPointError
        When the iterates escape to infinity, stall on a numerically flat
        tail, or run out of iterations.  This is what happens for beta <= 2(N-1).
    """
    x = np.array(start, dtype=float)
    if x.shape != (spec.N,):
        raise DomainError(f"start must have {spec.N} coordinates")
    _, W, grad = potential_and_prepotential(x, spec)
    for _ in range(max_iter):
        hess = prepotential_hessian(x, spec)
        if np.max(np.abs(grad)) <= tol * (1.0 + float(spec.beta)):
            # W also flattens out along an escape to infinity; a true maximizer has O(1) curvature
            curvature = float(np.min(np.linalg.eigvalsh(-hess)))
            if curvature <= flat_curvature:
                raise NoCriticalPointError(
                    f"W is flat (curvature {curvature:.3g}) at |x| = {np.max(np.abs(x)):.3g}: "
                    f"the supremum sits at infinity for N={spec.N}, beta={spec.beta}"
                )
            return x
        direction = np.linalg.solve(hess, -grad)
        step = 1.0
        while True:
            trial = x + step * direction
            if np.all(np.diff(trial) > 0):
                _, W_trial, grad_trial = potential_and_prepotential(trial, spec)
                if W_trial >= W - 1e-14 * abs(W):
                    break
            step *= 0.5
            if step < 1e-16:
                raise ConvergenceError("line search failed to find an ascent step")
        x, W, grad = trial, W_trial, grad_trial
        if np.max(np.abs(x)) > escape_radius:
            raise NoCriticalPointError(
                f"ascent on W diverged (|x| > {escape_radius}); no critical point for "
                f"N={spec.N}, beta={spec.beta}"
            )
    raise NoCriticalPointError(f"no convergence in {max_iter} Newton steps for N={spec.N}, beta={spec.beta}")


# ---------------------------------------------------------------------------
# Power-sum and coupling identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def abs_error(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_error(self) -> float:
        return self.abs_error / max(abs(self.rhs), 1.0)


def closed_form_sums(N: int, beta) -> dict[str, Fraction]:
    """Exact values of the seven sums checked by `coupling_identities`."""
    b = as_fraction(beta)
    return {
        "sum_zeta": N * (b - N + 1),
        "sum_zeta2": N * b * (b - N + 1),
        "sum_zeta3": N * (N**3 - 2 * N**2 * (b + 1) + N * (3 * b + 1) + b * (b * b - 1)),
        "sum_zeta4": N * (N - b - 1) * (N**2 * (3 * b - 2) - N * (b + 1) * (3 * b - 2) - b * (b - 1) * (b - 2)),
        "sum_zeta2_over_diff2": Fraction(N * (N - 1), 12) * (3 * b - 4 * N + 8),
        "sum_zeta4_over_diff4": Fraction(N * (N - 1), 720)
        * (16 * N**3 + N**2 * (6 - 25 * b) + N * (10 * b * b - 35 * b - 454) + 25 * b * b + 350 * b + 576),
        "twice_sum_h": Fraction(N * (N - 1), 6) * (3 * b - 4 * N + 2),
    }


def coupling_identities(geometry: ChainGeometry) -> list[IdentityCheck]:
    z = geometry.zeta
    N = len(z)
    d = z[:, None] - z[None, :]
    off = ~np.eye(N, dtype=bool)
    ratio = np.zeros_like(d)
    ratio[off] = z[:, None].repeat(N, axis=1)[off] / d[off]
    lhs = {
        "sum_zeta": z.sum(),
        "sum_zeta2": np.sum(z**2),
        "sum_zeta3": np.sum(z**3),
        "sum_zeta4": np.sum(z**4),
        "sum_zeta2_over_diff2": np.sum(ratio**2),
        "sum_zeta4_over_diff4": np.sum(ratio**4),
        "twice_sum_h": 2.0 * geometry.h[off].sum(),
    }
    rhs = closed_form_sums(N, geometry.spec.beta)
    return [IdentityCheck(name, float(lhs[name]), float(rhs[name])) for name in rhs]
