# decoybounds/services/decoy_bb84.py
"""
Three-intensity decoy-state BB84: separate bounds on the single-photon yield
and error rate, the global bound on the privacy amplification term, and the
secure key rate.
"""
import logging
import math
from typing import Literal

from decoybounds.api.models import (
    Bb84Bounds,
    Bb84Observables,
    Estimate,
    Flag,
    MinProblem,
    merge_flags,
)
from decoybounds.errors import DomainError, InfeasibleDomainError
from decoybounds.services.entropy_math import binary_entropy, omega_coefficient
from decoybounds.services.minimizer import corollary_min
from decoybounds.settings import CORRECTION_TOLERANCE

logger = logging.getLogger(__name__)

Mode = Literal["separate", "global"]


def _decoy_error_excess(obs: Bb84Observables) -> float:
    # e^upsilon E_upsilon Q_upsilon - e_0 Y_0
    return math.exp(obs.upsilon) * obs.error_gains.upsilon - obs.e0y0


def _signal_error_excess(obs: Bb84Observables) -> float:
    return math.exp(obs.mu) * obs.error_gains.mu - obs.e0y0


def y1_lower(obs: Bb84Observables) -> Estimate:
    """Lower bound on Y_1 from the gain equations, clamped at 0."""
    mu, nu = obs.mu, obs.upsilon
    value = mu / (nu * (mu - nu)) * (math.exp(nu) * obs.gains.upsilon - obs.y0) - nu / (
        mu * (mu - nu)
    ) * (math.exp(mu) * obs.gains.mu - obs.y0)
    if value <= 0:
        logger.warning("Y1 lower bound %.6g is not positive; no key", value)
        return Estimate(value=0.0, flags=(Flag.NO_KEY,))
    return Estimate(value=value)


def _raw_e1_upper(obs: Bb84Observables, y1_l: float) -> float:
    if y1_l <= 0:
        raise DomainError(f"e1 upper bound needs Y1_L > 0, got {y1_l}")
    return _decoy_error_excess(obs) / (obs.upsilon * y1_l)


def e1_upper(obs: Bb84Observables, y1_l: float) -> Estimate:
    """
    Upper bound on e_1 from the decoy QBER equation, clamped to [0, 1/2].

    Raises:
        DomainError: Y1_L is not positive
    """
    value = _raw_e1_upper(obs, y1_l)
    if value >= 0.5:
        logger.warning("e1 upper bound %.6g saturates at 1/2", value)
        return Estimate(value=0.5, flags=(Flag.ERROR_SATURATED,))
    if value < 0:
        logger.warning("e1 upper bound %.6g is negative; clamped to 0", value)
        return Estimate(value=0.0, flags=(Flag.ERROR_CLAMPED,))
    return Estimate(value=value)


def theta(obs: Bb84Observables) -> Estimate:
    """
    Yield information carried by the QBER equations,
    [upsilon (e^mu E_mu Q_mu - e_0 Y_0) - mu (e^upsilon E_upsilon Q_upsilon - e_0 Y_0)]
    / (mu (mu - upsilon)). Negative values only arise from inconsistent data
    and are clamped to 0.
    """
    mu, nu = obs.mu, obs.upsilon
    signal = nu * _signal_error_excess(obs)
    decoy = mu * _decoy_error_excess(obs)
    value = (signal - decoy) / (mu * (mu - nu))
    noise = CORRECTION_TOLERANCE * (abs(signal) + abs(decoy)) / (mu * (mu - nu))
    if value < -noise:
        logger.warning("theta %.6g is negative; clamped to 0", value)
        return Estimate(value=0.0, flags=(Flag.CORRECTION_CLAMPED,))
    if value <= noise:
        return Estimate(value=0.0)
    return Estimate(value=value)


def _separate_term(y1_l: float, e1_u: float) -> float:
    if e1_u >= 0.5:
        return 0.0
    return max(y1_l * (1.0 - binary_entropy(e1_u)), 0.0)


def global_bound_bb84(obs: Bb84Observables, cutoff: int | None = None) -> Bb84Bounds:
    """
    Separate and global lower bounds on Y_1[1 - H(e_1)].

    The global bound minimizes over the aggregate multi-photon state with
    A = Y1_L, B = e1_U Y1_L - theta, C = Omega, D = e1_U Y1_L, E = A. While
    theta < Omega this is Y1_G = Y1_L + theta, e1_G = e1_U Y1_L / Y1_G.
    """
    omega = omega_coefficient(obs.mu, obs.upsilon, cutoff)
    lower = y1_lower(obs)
    correction = theta(obs)

    if Flag.NO_KEY in lower.flags:
        return Bb84Bounds(
            y1_lower=0.0,
            e1_upper=0.5,
            theta=correction.value,
            y1_global=0.0,
            e1_global=0.5,
            omega=omega,
            pa_separate=0.0,
            pa_global=0.0,
            flags=merge_flags(lower.flags, correction.flags),
        )

    y1_l = lower.value
    upper = e1_upper(obs, y1_l)
    pa_separate = _separate_term(y1_l, upper.value)
    flags = merge_flags(lower.flags, upper.flags, correction.flags)

    def fallback(*extra: Flag) -> Bb84Bounds:
        return Bb84Bounds(
            y1_lower=y1_l,
            e1_upper=upper.value,
            theta=correction.value,
            y1_global=y1_l,
            e1_global=upper.value,
            omega=omega,
            pa_separate=pa_separate,
            pa_global=pa_separate,
            flags=merge_flags(flags, extra),
        )

    if correction.value == 0.0:
        return fallback(Flag.ZERO_CORRECTION)

    # Unsaturated e1_U Y1_L keeps D an honest bound on e_1 Y_1.
    bound = max(_raw_e1_upper(obs, y1_l), 0.0) * y1_l
    floor = bound - correction.value
    if floor < 0:
        logger.warning("e1Y1 lower estimate %.6g is negative; using separate bound", floor)
        return fallback(Flag.GLOBAL_FALLBACK)

    problem = MinProblem(A=y1_l, B=floor, C=omega.value, D=bound, E=y1_l)
    try:
        solution = corollary_min(problem)
    except InfeasibleDomainError as e:
        logger.warning("global bound infeasible: %s", e)
        y1_g = y1_l + correction.value
        return Bb84Bounds(
            y1_lower=y1_l,
            e1_upper=upper.value,
            theta=correction.value,
            y1_global=y1_g,
            e1_global=min(bound / y1_g, 0.5),
            omega=omega,
            pa_separate=pa_separate,
            pa_global=0.0,
            problem=problem,
            flags=merge_flags(flags, (Flag.GLOBAL_INFEASIBLE,)),
        )

    y1_g = problem.A + problem.C * solution.y
    e1_g = (problem.B + problem.C * solution.x * solution.y) / y1_g
    if solution.case_id == 1:
        y1_g = y1_l + correction.value
        e1_g = bound / y1_g
    return Bb84Bounds(
        y1_lower=y1_l,
        e1_upper=upper.value,
        theta=correction.value,
        y1_global=y1_g,
        e1_global=e1_g,
        omega=omega,
        pa_separate=pa_separate,
        pa_global=max(solution.value, 0.0),
        problem=problem,
        min_case=solution.case_id,
        flags=flags,
    )


def privacy_term(bounds: Bb84Bounds, mode: Mode) -> float:
    return bounds.pa_global if mode == "global" else bounds.pa_separate


def secure_key_rate(
    single_photon_probability: float,
    privacy: float,
    gain: float,
    error_gain: float,
    error_correction_f: float,
) -> Estimate:
    """p_1 * privacy - Q f H(E), reported as 0 when negative."""
    qber = error_gain / gain if gain > 0 else 0.0
    rate = single_photon_probability * privacy - gain * error_correction_f * binary_entropy(
        min(qber, 1.0)
    )
    if rate <= 0:
        return Estimate(value=0.0, flags=(Flag.BELOW_THRESHOLD,))
    return Estimate(value=rate)


def key_rate_bb84(
    obs: Bb84Observables,
    bounds: Bb84Bounds,
    mode: Mode,
    error_correction_f: float = 1.16,
) -> Estimate:
    """Secure key rate with p_1 = mu e^-mu and the chosen privacy term."""
    p1 = obs.mu * math.exp(-obs.mu)
    return secure_key_rate(
        p1,
        privacy_term(bounds, mode),
        obs.gains.mu,
        obs.error_gains.mu,
        error_correction_f,
    )


def asymptotic_key_rate_bb84(
    obs: Bb84Observables, y1: float, e1: float, error_correction_f: float = 1.16
) -> Estimate:
    """Key rate with the true single-photon yield and error rate."""
    privacy = _separate_term(y1, min(e1, 0.5))
    return secure_key_rate(
        obs.mu * math.exp(-obs.mu),
        privacy,
        obs.gains.mu,
        obs.error_gains.mu,
        error_correction_f,
    )
