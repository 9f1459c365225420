"""Saving-propensity distributions.

A ``LambdaDistSpec`` declaratively describes how the saving propensity is
distributed over the population.  Supported families:

- ``fixed``: every agent uses the same value (an atom).
- ``uniform_interval``: uniform on [a, b] with 0 <= a < b < 1.
- ``power_about_lambda0``: density proportional to ``|lambda0 - lam|**delta``
  on [0, 1), with lambda0 != 1 and delta > -1 (delta may be negative, giving
  an integrable singularity).
- ``power_about_one``: density proportional to ``(1 - lam)**delta`` with
  delta > -1, i.e. a Beta(1, delta + 1) law.
- ``mixed``: a fraction of agents share one fixed value, the rest draw from
  a residual continuous spec.
- ``annealed_lower_bound``: each agent carries a quenched lower bound mu
  drawn from a sub-spec; its propensity is redrawn uniformly on [mu, 1) at
  every trade it takes part in.

Sampled values never reach 1: any agent at exactly 1 would condense all
money onto itself, so the support is capped at the largest double below 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, ContractError

__all__ = [
    "LAMBDA_MAX",
    "LambdaDistSpec",
    "fixed",
    "uniform_interval",
    "power_about_lambda0",
    "power_about_one",
    "mixed",
    "annealed_lower_bound",
    "density",
    "cdf",
    "ppf",
    "sample_quenched",
    "sample_annealed",
]

# Largest representable propensity strictly below 1.
LAMBDA_MAX = float(np.nextafter(1.0, 0.0))

_KINDS = (
    "fixed",
    "uniform_interval",
    "power_about_lambda0",
    "power_about_one",
    "mixed",
    "annealed_lower_bound",
)


@dataclass(frozen=True)
class LambdaDistSpec:
    kind: str
    value: Optional[float] = None  # fixed
    a: Optional[float] = None  # uniform_interval
    b: Optional[float] = None
    lambda0: Optional[float] = None  # power_about_lambda0
    delta: Optional[float] = None  # both power families
    fraction: Optional[float] = None  # mixed
    lambda1: Optional[float] = None
    residual: Optional["LambdaDistSpec"] = None
    zeta: Optional["LambdaDistSpec"] = None  # annealed_lower_bound

    def __post_init__(self):
        k = self.kind
        if k not in _KINDS:
            raise ConfigError(f"unknown lambda spec kind {k!r}")
        if k == "fixed":
            if self.value is None or not 0.0 <= self.value < 1.0:
                raise ConfigError(f"fixed value must be in [0, 1), got {self.value}")
        elif k == "uniform_interval":
            if self.a is None or self.b is None:
                raise ConfigError("uniform_interval needs endpoints a and b")
            if not 0.0 <= self.a < self.b <= 1.0:
                raise ConfigError(
                    f"uniform_interval needs 0 <= a < b <= 1, got [{self.a}, {self.b}]"
                )
        elif k == "power_about_lambda0":
            if self.lambda0 is None or self.delta is None:
                raise ConfigError("power_about_lambda0 needs lambda0 and delta")
            if not 0.0 <= self.lambda0 < 1.0:
                raise ConfigError("lambda0 must lie in [0, 1)")
            if self.delta <= -1.0:
                raise ConfigError("delta must exceed -1 for an integrable density")
        elif k == "power_about_one":
            if self.delta is None or self.delta <= -1.0:
                raise ConfigError("power_about_one needs delta > -1")
        elif k == "mixed":
            if self.fraction is None or not 0.0 <= self.fraction <= 1.0:
                raise ConfigError("mixture fraction must lie in [0, 1]")
            if self.lambda1 is None or not 0.0 <= self.lambda1 < 1.0:
                raise ConfigError("lambda1 must lie in [0, 1)")
            if self.residual is None:
                raise ConfigError("mixed spec needs a residual spec")
            if self.residual.kind in ("mixed", "annealed_lower_bound"):
                raise ConfigError("residual spec must be a simple continuous family")
        elif k == "annealed_lower_bound":
            if self.zeta is None:
                raise ConfigError("annealed_lower_bound needs a zeta spec for mu")
            if self.zeta.kind in ("mixed", "annealed_lower_bound"):
                raise ConfigError("zeta spec must be a simple family")

    # --- JSON round trip -------------------------------------------------

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for key in ("value", "a", "b", "lambda0", "delta", "fraction", "lambda1"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        if self.residual is not None:
            out["residual"] = self.residual.to_json()
        if self.zeta is not None:
            out["zeta"] = self.zeta.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LambdaDistSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError("lambda spec must be an object with a 'kind' key")
        allowed = {
            "kind", "value", "a", "b", "lambda0", "delta",
            "fraction", "lambda1", "residual", "zeta",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise ConfigError(f"unknown lambda spec keys: {sorted(unknown)}")
        kw = dict(obj)
        if "residual" in kw:
            kw["residual"] = cls.from_json(kw["residual"])
        if "zeta" in kw:
            kw["zeta"] = cls.from_json(kw["zeta"])
        return cls(**kw)


# --- convenience constructors --------------------------------------------

def fixed(value: float) -> LambdaDistSpec:
    return LambdaDistSpec("fixed", value=value)


def uniform_interval(a: float = 0.0, b: float = 1.0) -> LambdaDistSpec:
    return LambdaDistSpec("uniform_interval", a=a, b=b)


def power_about_lambda0(lambda0: float, delta: float) -> LambdaDistSpec:
    return LambdaDistSpec("power_about_lambda0", lambda0=lambda0, delta=delta)


def power_about_one(delta: float) -> LambdaDistSpec:
    return LambdaDistSpec("power_about_one", delta=delta)


def mixed(fraction: float, lambda1: float, residual: LambdaDistSpec) -> LambdaDistSpec:
    return LambdaDistSpec("mixed", fraction=fraction, lambda1=lambda1, residual=residual)


def annealed_lower_bound(zeta: LambdaDistSpec) -> LambdaDistSpec:
    return LambdaDistSpec("annealed_lower_bound", zeta=zeta)


# --- density / cdf / inverse cdf ------------------------------------------

def density(spec: LambdaDistSpec, lam):
    """Normalized density of the spec at lam (scalar or array).

    Outside [0, 1) the density is 0.  ``fixed`` is an atom and has no
    density; for ``mixed`` only the continuous part (weight 1 - fraction)
    is returned.  The ``annealed_lower_bound`` marginal is computed by
    quadrature over the zeta distribution of the lower bound.
    """
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    x = np.atleast_1d(lam)
    inside = (x >= 0.0) & (x < 1.0)
    out = np.zeros_like(x)
    k = spec.kind
    if k == "fixed":
        raise ConfigError("a fixed spec is an atom and has no density")
    if k == "uniform_interval":
        sup = inside & (x >= spec.a) & (x <= spec.b)
        out[sup] = 1.0 / (spec.b - spec.a)
    elif k == "power_about_lambda0":
        d, l0 = spec.delta, spec.lambda0
        z = (l0 ** (d + 1) + (1.0 - l0) ** (d + 1)) / (d + 1)
        with np.errstate(divide="ignore"):
            out[inside] = np.abs(l0 - x[inside]) ** d / z
    elif k == "power_about_one":
        d = spec.delta
        with np.errstate(divide="ignore"):
            out[inside] = (d + 1) * (1.0 - x[inside]) ** d
    elif k == "mixed":
        out[inside] = (1.0 - spec.fraction) * density(spec.residual, x[inside])
    elif k == "annealed_lower_bound":
        # marginal density: integral over mu <= lam of zeta(mu) / (1 - mu)
        def marg(v):
            if v <= 0.0:
                return 0.0
            val, _ = quad(
                lambda mu: density(spec.zeta, mu) / (1.0 - mu), 0.0, v, limit=200
            )
            return val

        out[inside] = [marg(v) for v in x[inside]]
    return float(out[0]) if scalar else out


def cdf(spec: LambdaDistSpec, lam):
    """Cumulative distribution function of the spec (atoms included)."""
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    x = np.atleast_1d(lam).astype(float)
    out = np.zeros_like(x)
    k = spec.kind
    if k == "fixed":
        out = (x >= spec.value).astype(float)
    elif k == "uniform_interval":
        out = np.clip((x - spec.a) / (spec.b - spec.a), 0.0, 1.0)
    elif k == "power_about_lambda0":
        d, l0 = spec.delta, spec.lambda0
        z = l0 ** (d + 1) + (1.0 - l0) ** (d + 1)
        xc = np.clip(x, 0.0, 1.0)
        below = xc <= l0
        out = np.empty_like(xc)
        out[below] = (l0 ** (d + 1) - (l0 - xc[below]) ** (d + 1)) / z
        out[~below] = (l0 ** (d + 1) + (xc[~below] - l0) ** (d + 1)) / z
        out[x < 0.0] = 0.0
        out[x >= 1.0] = 1.0
    elif k == "power_about_one":
        d = spec.delta
        xc = np.clip(x, 0.0, 1.0)
        out = 1.0 - (1.0 - xc) ** (d + 1)
    elif k == "mixed":
        out = (1.0 - spec.fraction) * cdf(spec.residual, x)
        out = out + spec.fraction * (x >= spec.lambda1)
    elif k == "annealed_lower_bound":
        out = np.array(
            [
                quad(lambda v: density(spec, v), 0.0, min(max(v, 0.0), 1.0), limit=200)[0]
                for v in x
            ]
        )
    return float(out[0]) if scalar else out


def ppf(spec: LambdaDistSpec, u):
    """Inverse CDF for the closed-form families (used for sampling)."""
    u = np.asarray(u, dtype=float)
    k = spec.kind
    if np.any((u < 0.0) | (u > 1.0)):
        raise ContractError("probabilities must lie in [0, 1]")
    if k == "fixed":
        return np.full_like(u, spec.value)
    if k == "uniform_interval":
        return spec.a + u * (spec.b - spec.a)
    if k == "power_about_lambda0":
        d, l0 = spec.delta, spec.lambda0
        z = l0 ** (d + 1) + (1.0 - l0) ** (d + 1)
        split = l0 ** (d + 1) / z
        out = np.empty_like(u)
        lo = u <= split
        out[lo] = l0 - (l0 ** (d + 1) - u[lo] * z) ** (1.0 / (d + 1))
        out[~lo] = l0 + (u[~lo] * z - l0 ** (d + 1)) ** (1.0 / (d + 1))
        return out
    if k == "power_about_one":
        d = spec.delta
        return 1.0 - (1.0 - u) ** (1.0 / (d + 1))
    raise ConfigError(f"no closed-form inverse CDF for kind {k!r}")


# --- sampling --------------------------------------------------------------

def sample_quenched(
    spec: LambdaDistSpec, population_size: int, rng: np.random.Generator
) -> np.ndarray:
    """One quenched propensity per agent, i.i.d. from the spec.

    For the mixed family exactly round(fraction * N) agents get the fixed
    value (the leading block of the returned array) so small populations
    are reproducible.  Values are capped just below 1.
    """
    if population_size < 2:
        raise ConfigError("population_size must be at least 2")
    n = population_size
    k = spec.kind
    if k == "mixed":
        n1 = int(round(spec.fraction * n))
        out = np.empty(n)
        out[:n1] = spec.lambda1
        out[n1:] = ppf(spec.residual, rng.random(n - n1))
    elif k == "annealed_lower_bound":
        raise ConfigError(
            "annealed specs have no quenched propensities; sample the zeta "
            "spec for the lower bounds and redraw per trade"
        )
    else:
        out = ppf(spec, rng.random(n))
    return np.minimum(out, LAMBDA_MAX)


def sample_annealed(
    agent_lower_bound: float, rng: np.random.Generator, size=None
):
    """Fresh propensity, uniform on [mu, 1); redrawn for every trade."""
    mu = agent_lower_bound
    if not 0.0 <= mu < 1.0:
        raise ConfigError(f"lower bound must be in [0, 1), got {mu}")
    lam = mu + rng.random(size) * (1.0 - mu)
    return np.minimum(lam, LAMBDA_MAX)
