"""Closed-form and semi-analytic steady-state predictions.

These are the independent references the simulations are tested against:
the exponential (Gibbs) law of the no-savings market, the Gamma form of the
uniform-savings market, and the Pareto tail exponents of the distributed-
savings market (both the self-consistency root and the mapping from the
behavior of the propensity density near 1).
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln

from . import lambda_dist
from .errors import ConfigError, ContractError
from .lambda_dist import LambdaDistSpec

__all__ = [
    "gibbs_temperature",
    "gamma_params",
    "gamma_density",
    "solve_selfconsistent_nu",
    "predicted_tail_exponent",
    "predicted_density_curve",
    "NO_POWER_LAW",
]

# Marker returned when a propensity spec cannot produce a power-law tail
# (support bounded away from 1).
NO_POWER_LAW = None


def gibbs_temperature(M: float, N: int) -> float:
    """Effective temperature of the no-savings market: T = M / N."""
    if M <= 0 or N < 1:
        raise ContractError("need M > 0 and N >= 1")
    return M / N


def gamma_params(lam: float):
    """Gamma-form parameters (alpha, T, C) for the uniform-savings market.

    The steady state is well approximated by C * m**alpha * exp(-m/T) with
    alpha = 3*lam / (1 - lam), T = 1/(alpha + 1) and C chosen so the density
    is normalized on [0, inf) at unit average money.
    """
    if not 0.0 <= lam < 1.0:
        raise ContractError(f"lam must be in [0, 1), got {lam}")
    alpha = 3.0 * lam / (1.0 - lam)
    T = 1.0 / (alpha + 1.0)
    C = math.exp((alpha + 1.0) * math.log(alpha + 1.0) - gammaln(alpha + 1.0))
    return alpha, T, C


def gamma_density(lam: float, m):
    """Predicted money density of the uniform-savings market at money m."""
    alpha, T, C = gamma_params(lam)
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore"):
        out = C * m ** alpha * np.exp(-m / T)
    return out


def solve_selfconsistent_nu(spec: LambdaDistSpec, nu_max: float = 64.0) -> float:
    """Root nu > 0 of 2 * E[lambda**nu] = 1 over the propensity distribution.

    The expectation is evaluated by adaptive quadrature (absolute tolerance
    1e-12); the root is bracketed and polished to 1e-10.  A spec for which
    no root exists in (0, nu_max] is outside the self-consistency regime.
    """

    def mean_pow(nu):
        if spec.kind == "fixed":
            return spec.value ** nu
        val, _ = quad(
            lambda lam: lambda_dist.density(spec, lam) * lam ** nu,
            0.0,
            1.0,
            epsabs=1e-12,
            epsrel=1e-12,
            limit=400,
        )
        if spec.kind == "mixed":
            val += spec.fraction * spec.lambda1 ** nu
        return val

    f = lambda nu: 2.0 * mean_pow(nu) - 1.0
    lo = 1e-12
    if f(lo) < 0.0:
        raise ConfigError("2*E[lambda**nu] < 1 already at nu -> 0; no root")
    hi = 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > nu_max:
            raise ConfigError(f"no self-consistent root in (0, {nu_max}]")
    return brentq(f, lo, hi, xtol=1e-10, rtol=1e-12)


def predicted_tail_exponent(spec: LambdaDistSpec):
    """Pareto exponent implied by the propensity density near lambda = 1.

    A density behaving as (1 - lambda)**delta up to 1 gives nu = 1 + delta;
    any family whose support reaches 1 with delta = 0 there (including every
    power_about_lambda0 with lambda0 != 1) gives the universal nu = 1.
    Support bounded away from 1 produces no power law (returns the
    NO_POWER_LAW marker).
    """
    k = spec.kind
    if k == "fixed":
        return NO_POWER_LAW
    if k == "uniform_interval":
        return 1.0 if spec.b >= 1.0 else NO_POWER_LAW
    if k == "power_about_lambda0":
        # |lambda0 - lam|**delta with lambda0 != 1 is flat near 1
        return 1.0
    if k == "power_about_one":
        if spec.delta < 0.0:
            raise ConfigError(
                "tail prediction needs delta >= 0 for the (1-lam)**delta family"
            )
        return 1.0 + spec.delta
    if k == "mixed":
        res = predicted_tail_exponent(spec.residual)
        return res
    if k == "annealed_lower_bound":
        # behaves like the quenched case driven by zeta near 1
        return predicted_tail_exponent(spec.zeta)
    raise ConfigError(f"cannot classify spec kind {k!r} near lambda = 1")


def predicted_density_curve(spec: LambdaDistSpec, c: float, m_grid) -> np.ndarray:
    """Predicted money density rho(1 - c/m) / m**2, normalized on the grid.

    Valid for m > c, where the mean-field relation m = c / (1 - lambda)
    maps money onto a propensity in (0, 1).
    """
    m = np.asarray(m_grid, dtype=float)
    if c <= 0.0:
        raise ContractError("c must be positive")
    if m.size < 2 or np.any(np.diff(m) <= 0):
        raise ContractError("m_grid must be strictly increasing with >= 2 points")
    if m[0] <= c:
        raise ContractError("grid must lie strictly above m = c")
    lam = 1.0 - c / m
    p = lambda_dist.density(spec, lam) / m ** 2
    norm = np.trapezoid(p, m)
    if norm <= 0.0:
        raise ConfigError("predicted curve has no mass on the given grid")
    return p / norm
