"""Square-loss expert aggregation kernel.

Implements the primitives every engine in this package is built from:

1. square loss and its superprediction (soft-min mixture of expert losses),
2. the two substitution rules that turn a weighted mixture of expert
   forecasts into a single forecast guaranteed not to exceed the mixture's
   superprediction (generalized mean / plain weighted mean),
3. multiplicative exponential weight updates,
4. relative entropy between weight vectors,
5. a grid verifier for the substitution guarantee.

All exponential sums are evaluated in log space with a shift by the smallest
exponent carried by positive weight, so updates stay finite for losses far
beyond the overflow range of a naive implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

# Weight vectors must sum to 1 within this tolerance.
WEIGHT_SUM_TOL = 1e-9
# Default slack allowed when checking the substitution guarantee on a grid.
SUBST_CHECK_TOL = 1e-9
# Relative slack on the learning-rate admissibility checks.
_ETA_SLACK = 1e-12


class DimensionError(ValueError):
    """Inputs that should align (forecasts vs. weights, x vs. coefficients) do not."""


class ConfigurationError(ValueError):
    """A parameter combination is outside the admissible range."""


class DomainError(ValueError):
    """A numeric input is outside its documented domain."""


class StateError(RuntimeError):
    """An operation was invoked out of order or on inconsistent engine state."""


class InfiniteDivergenceError(ValueError):
    """Relative entropy is infinite: the comparison vector charges mass the base lacks."""


@dataclass(frozen=True)
class LossSpec:
    """Square-loss game on outcomes and forecasts in [-bound, bound].

    Attributes:
        bound: half-width of the outcome/forecast interval; must be positive.
        eta: learning rate of the exponential weighting; must be positive.
    """

    bound: float
    eta: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.bound) or self.bound <= 0:
            raise ConfigurationError(f"bound must be positive and finite, got {self.bound}")
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ConfigurationError(f"eta must be positive and finite, got {self.eta}")

    @property
    def mixable_eta_limit(self) -> float:
        """Largest eta for which the generalized-mean substitution is valid."""
        return 1.0 / (2.0 * self.bound**2)

    @property
    def exp_concave_eta_limit(self) -> float:
        """Largest eta for which the plain weighted mean is a valid substitution."""
        return 1.0 / (8.0 * self.bound**2)

    @classmethod
    def with_mixable_rate(cls, bound: float) -> "LossSpec":
        """Spec at the largest rate admissible for the generalized-mean rule."""
        return cls(bound=bound, eta=1.0 / (2.0 * bound**2))

    @classmethod
    def with_exp_concave_rate(cls, bound: float) -> "LossSpec":
        """Spec at the largest rate admissible for the weighted-mean rule."""
        return cls(bound=bound, eta=1.0 / (8.0 * bound**2))


def square_loss(y, gamma):
    """(y - gamma)^2, elementwise on array inputs."""
    y = np.asarray(y, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    out = (y - gamma) ** 2
    return float(out) if out.ndim == 0 else out


def _as_aligned(forecasts, weights) -> tuple[np.ndarray, np.ndarray]:
    c = np.atleast_1d(np.asarray(forecasts, dtype=float))
    p = np.atleast_1d(np.asarray(weights, dtype=float))
    if c.ndim != 1 or p.ndim != 1:
        raise DimensionError("forecasts and weights must be one-dimensional")
    if c.shape != p.shape:
        raise DimensionError(f"forecasts have length {c.size} but weights have length {p.size}")
    if c.size == 0:
        raise DimensionError("need at least one expert")
    return c, p


def validate_weights(weights, tol: float = WEIGHT_SUM_TOL) -> np.ndarray:
    """Check a probability vector: finite, nonnegative, sums to 1 within tol."""
    p = np.atleast_1d(np.asarray(weights, dtype=float))
    if not np.all(np.isfinite(p)):
        raise DomainError("weights must be finite")
    if np.any(p < 0):
        raise DomainError("weights must be nonnegative")
    s = float(p.sum())
    if abs(s - 1.0) > tol:
        raise DomainError(f"weights must sum to 1, got {s!r}")
    return p


def _check_forecast_range(c: np.ndarray, bound: float) -> None:
    if c.size and float(np.max(np.abs(c))) > bound * (1.0 + 1e-12) + 1e-15:
        raise DomainError(f"forecasts must lie in [-{bound}, {bound}]")


def superprediction(y: float, forecasts, weights, spec: LossSpec) -> float:
    """Soft-min aggregate loss the mixture guarantees at outcome y.

    g(y) = -(1/eta) * ln sum_i p_i * exp(-eta * (y - c_i)^2).
    Any forecast achieving square loss <= g(y) for all y in [-bound, bound]
    performs at least as well as the weighted expert pool in the exponential
    bookkeeping sense.
    """
    c, p = _as_aligned(forecasts, weights)
    p = validate_weights(p)
    return float(-logsumexp(-spec.eta * (y - c) ** 2, b=p) / spec.eta)


def subst_vovk(forecasts, weights, spec: LossSpec) -> float:
    """Generalized-mean substitution: a forecast beating the superprediction.

    gamma = (g(-bound) - g(bound)) / (4 * bound), valid (loss never exceeds
    the superprediction anywhere on the interval) whenever
    eta <= 1 / (2 * bound^2).  The result is clipped into [-bound, bound] to
    absorb rounding at the interval ends.
    """
    if spec.eta > spec.mixable_eta_limit * (1.0 + _ETA_SLACK):
        raise ConfigurationError(
            f"eta={spec.eta} exceeds the admissible limit {spec.mixable_eta_limit} "
            "for the generalized-mean substitution"
        )
    c, p = _as_aligned(forecasts, weights)
    p = validate_weights(p)
    _check_forecast_range(c, spec.bound)
    log_near = logsumexp(-spec.eta * (spec.bound - c) ** 2, b=p)
    log_far = logsumexp(-spec.eta * (spec.bound + c) ** 2, b=p)
    gamma = (log_near - log_far) / (4.0 * spec.eta * spec.bound)
    return float(np.clip(gamma, -spec.bound, spec.bound))


def subst_mean(forecasts, weights, spec: LossSpec | None = None) -> float:
    """Weighted-mean substitution, valid whenever eta <= 1 / (8 * bound^2)."""
    if spec is not None and spec.eta > spec.exp_concave_eta_limit * (1.0 + _ETA_SLACK):
        raise ConfigurationError(
            f"eta={spec.eta} exceeds the admissible limit {spec.exp_concave_eta_limit} "
            "for the weighted-mean substitution"
        )
    c, p = _as_aligned(forecasts, weights)
    p = validate_weights(p)
    if spec is not None:
        _check_forecast_range(c, spec.bound)
    return float(np.dot(c, p))


SUBSTITUTION_RULES = ("vovk", "mean")


def substitute(forecasts, weights, spec: LossSpec, rule: str) -> float:
    """Dispatch on the substitution rule name ('vovk' or 'mean')."""
    if rule == "vovk":
        return subst_vovk(forecasts, weights, spec)
    if rule == "mean":
        return subst_mean(forecasts, weights, spec)
    raise ConfigurationError(f"unknown substitution rule {rule!r}; expected one of {SUBSTITUTION_RULES}")


def admissible_eta_limit(spec: LossSpec, rule: str) -> float:
    if rule == "vovk":
        return spec.mixable_eta_limit
    if rule == "mean":
        return spec.exp_concave_eta_limit
    raise ConfigurationError(f"unknown substitution rule {rule!r}; expected one of {SUBSTITUTION_RULES}")


def exp_weight_update(weights, losses, spec: LossSpec) -> np.ndarray:
    """Multiplicative update w_i <- w_i * exp(-eta * l_i), renormalized.

    The exponent is shifted by the smallest eta*loss among entries carrying
    positive weight, so the normalizer never underflows to zero even when
    losses span hundreds of units of 1/eta.
    """
    l = np.atleast_1d(np.asarray(losses, dtype=float))
    p = validate_weights(weights)
    if l.shape != p.shape:
        raise DimensionError(f"losses have length {l.size} but weights have length {p.size}")
    if not np.all(np.isfinite(l)):
        raise DomainError("losses must be finite")
    z = spec.eta * l
    support = p > 0
    shift = float(z[support].min())
    factors = np.exp(-(z - shift), where=support, out=np.zeros_like(z))
    raw = p * factors
    total = float(raw.sum())
    return raw / total


def relative_entropy(q, p) -> float:
    """D(q || p) = sum_i q_i ln(q_i / p_i), with 0 * ln 0 = 0.

    Raises InfiniteDivergenceError when some q_i > 0 has p_i = 0.
    """
    q = validate_weights(q)
    p = validate_weights(p)
    if q.shape != p.shape:
        raise DimensionError(f"q has length {q.size} but p has length {p.size}")
    active = q > 0
    if np.any(active & (p <= 0)):
        raise InfiniteDivergenceError("q charges mass where p has none")
    return float(np.sum(q[active] * (np.log(q[active]) - np.log(p[active]))))


class SubstitutionCheck(NamedTuple):
    passed: bool
    worst_violation: float


def verify_substitution(
    gamma: float,
    forecasts,
    weights,
    spec: LossSpec,
    grid_points: int = 1001,
    tol: float = SUBST_CHECK_TOL,
) -> SubstitutionCheck:
    """Check square_loss(y, gamma) <= superprediction(y) on an outcome grid.

    Returns the pass flag and the worst violation max_y(loss - superprediction)
    over an evenly spaced grid of outcomes covering [-bound, bound].
    """
    if grid_points < 3:
        raise ConfigurationError("grid_points must be at least 3")
    c, p = _as_aligned(forecasts, weights)
    p = validate_weights(p)
    ys = np.linspace(-spec.bound, spec.bound, grid_points)
    # g(y) on the whole grid in one log-sum-exp pass.
    expo = -spec.eta * (ys[:, None] - c[None, :]) ** 2
    g = -logsumexp(expo, b=p[None, :], axis=1) / spec.eta
    violations = (ys - gamma) ** 2 - g
    worst = float(violations.max())
    return SubstitutionCheck(passed=worst <= tol, worst_violation=worst)
