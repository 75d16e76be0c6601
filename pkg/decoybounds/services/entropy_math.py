# decoybounds/services/entropy_math.py
"""
Binary entropy and the series coefficients of the aggregate photon states.
"""
import logging
import math
from itertools import islice

import numpy as np
from scipy.special import entr, factorial
from scipy.stats import poisson

from decoybounds.api.models import SeriesCoefficient
from decoybounds.errors import DomainError, InvalidIntensityError
from decoybounds.settings import PROBABILITY_TOLERANCE, settings

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)
# relative size of the last Omega term kept
_CONVERGED = 2.0**-60
_MAX_SERIES_ORDER = 1000


def clamp_probability(x, tolerance: float = PROBABILITY_TOLERANCE):
    """Clamp x into [0, 1], rejecting values further than tolerance outside."""
    values = np.asarray(x, dtype=float)
    if np.any(np.isnan(values)):
        raise DomainError("probability is NaN")
    if np.any(values < -tolerance) or np.any(values > 1.0 + tolerance):
        raise DomainError(f"probability outside [0, 1]: {x!r}")
    clamped = np.clip(values, 0.0, 1.0)
    return float(clamped) if clamped.ndim == 0 else clamped


def binary_entropy(x):
    """
    Binary Shannon entropy in bits, with 0*log2(0) = 0.

    Accepts a scalar or an array; scalars come back as float.
    """
    p = np.asarray(clamp_probability(x), dtype=float)
    h = (entr(p) + entr(1.0 - p)) / _LN2
    h = np.clip(h, 0.0, 1.0)
    return float(h) if h.ndim == 0 else h


def _check_pair(mu: float, nu: float) -> None:
    if not (nu > 0 and mu > nu):
        raise InvalidIntensityError(
            f"intensities must satisfy 0 < nu < mu, got mu={mu}, nu={nu}"
        )


def _exp_remainder(x: float) -> float:
    # e^x - 1 - x - x^2/2
    return math.expm1(x) - x - 0.5 * x * x


def omega_closed_form(mu: float, nu: float) -> float:
    """Closed form of Omega; loses digits to cancellation as nu approaches mu or 0."""
    _check_pair(mu, nu)
    return (nu * _exp_remainder(mu) / mu - mu * _exp_remainder(nu) / nu) / (mu - nu)


def _omega_terms(mu: float, nu: float):
    # term i is mu nu h_{i-3}(mu, nu) / i!, h_k = sum over a + b = k of mu^a nu^b
    h = 1.0
    nu_power = 1.0
    weight = mu * nu / 6.0
    i = 3
    while True:
        yield weight * h
        i += 1
        nu_power *= nu
        h = mu * h + nu_power
        weight /= i


def _omega_converged(mu: float, nu: float, min_terms: int) -> float:
    terms = []
    for term in islice(_omega_terms(mu, nu), max(_MAX_SERIES_ORDER, min_terms)):
        terms.append(term)
        if len(terms) >= min_terms and term <= _CONVERGED * math.fsum(terms):
            break
    return math.fsum(terms)


def omega_coefficient(mu: float, nu: float, cutoff: int | None = None) -> SeriesCoefficient:
    """
    Weight of the aggregate multi-photon state in the BB84 yield equation,
    sum over i >= 3 of (mu^(i-1) nu - nu^(i-1) mu) / (i! (mu - nu)).

    The reported value is the series summed to convergence with
    cancellation-free terms; the series truncated at the cutoff and its tail
    bound are carried alongside. Each term is majorized by
    mu^(i-1) nu / (i! (mu - nu)), so the tail beyond the cutoff is at most
    nu e^mu P[Poisson(mu) > cutoff] / (mu (mu - nu)).
    """
    _check_pair(mu, nu)
    order = settings.series_cutoff if cutoff is None else cutoff
    if order < 3:
        raise DomainError(f"series truncation order must be >= 3, got {order}")

    value = _omega_converged(mu, nu, order - 2)
    truncated = math.fsum(islice(_omega_terms(mu, nu), order - 2))
    tail = float(nu * math.exp(mu) * poisson.sf(order, mu) / (mu * (mu - nu)))

    logger.debug(
        "Omega(%g, %g) = %.17g, closed form %.17g", mu, nu, value, omega_closed_form(mu, nu)
    )

    return SeriesCoefficient(
        value=value,
        truncated_sum=truncated,
        truncation_order=order,
        tail_bound=tail,
    )


def upsilon_weights(
    mu_a: float, nu_a: float, mu_b: float, nu_b: float, cutoff: int
) -> np.ndarray:
    """
    Matrix of the MDI correction weights Upsilon_ij for 0 <= i, j <= cutoff.

    Entries outside 1 <= i, j and 4 <= i + j are zero.
    """
    i = np.arange(cutoff + 1, dtype=float)[:, None]
    j = np.arange(cutoff + 1, dtype=float)[None, :]
    weights = (
        nu_a ** (i - 1) * mu_b ** (j - 1) * nu_b * (mu_a - nu_a)
        + mu_a ** (i - 1) * nu_b ** (j - 1) * nu_a * (mu_b - nu_b)
        - nu_a ** (i - 1) * nu_b ** (j - 1) * (mu_a * mu_b - nu_a * nu_b)
    )
    included = (i >= 1) & (j >= 1) & (i + j >= 4)
    return np.where(included, weights, 0.0)


def pi_coefficient(
    mu_a: float, nu_a: float, mu_b: float, nu_b: float, cutoff: int | None = None
) -> SeriesCoefficient:
    """
    Weight of the aggregate state in the MDI two-single-photon yield equation,
    sum over i, j >= 1 with i + j >= 4 of Upsilon_ij / (i! j! (mu_a - nu_a)(mu_b - nu_b)).

    Dropping the negative part of Upsilon_ij and using
    sum over i + j > n of x^i y^j / (i! j!) <= e^(x+y) P[Poisson(x+y) > n]
    bounds the omitted terms by
        [nu_b (mu_a - nu_a) / (nu_a mu_b) e^(nu_a+mu_b) P[Poisson(nu_a+mu_b) > n]
         + nu_a (mu_b - nu_b) / (mu_a nu_b) e^(mu_a+nu_b) P[Poisson(mu_a+nu_b) > n]]
        / ((mu_a - nu_a)(mu_b - nu_b)).
    """
    _check_pair(mu_a, nu_a)
    _check_pair(mu_b, nu_b)
    order = settings.series_cutoff if cutoff is None else cutoff
    if order < 4:
        raise DomainError(f"series truncation order must be >= 4, got {order}")

    weights = upsilon_weights(mu_a, nu_a, mu_b, nu_b, order)
    i = np.arange(order + 1, dtype=float)[:, None]
    j = np.arange(order + 1, dtype=float)[None, :]
    included = (i >= 1) & (j >= 1) & (i + j >= 4) & (i + j <= order)
    if np.any(weights[included] <= 0):
        bad = np.argwhere(included & (weights <= 0))[0]
        raise DomainError(f"non-positive Upsilon weight at (i, j) = {tuple(bad)}")

    scale = (mu_a - nu_a) * (mu_b - nu_b)
    terms = weights / (factorial(i) * factorial(j) * scale)
    # correctly rounded, so adding positive terms never lowers the sum
    truncated = math.fsum(terms[included].tolist())

    tail = (
        nu_b * (mu_a - nu_a) / (nu_a * mu_b)
        * math.exp(nu_a + mu_b) * poisson.sf(order, nu_a + mu_b)
        + nu_a * (mu_b - nu_b) / (mu_a * nu_b)
        * math.exp(mu_a + nu_b) * poisson.sf(order, mu_a + nu_b)
    ) / scale
    logger.debug("Pi truncated at order %d: %.17g (tail <= %.3g)", order, truncated, tail)

    return SeriesCoefficient(
        value=truncated,
        truncated_sum=truncated,
        truncation_order=order,
        tail_bound=float(tail),
    )
