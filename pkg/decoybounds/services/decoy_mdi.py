# decoybounds/services/decoy_mdi.py
"""
Three-intensity decoy-state MDI-QKD: vacuum-eliminated statistics, bounds on
the two-single-photon yield and error rate, the global bound on the privacy
amplification term, and the secure key rate.

Z and X basis statistics are not distinguished; in the asymptotic setting the
two-single-photon yields of both bases coincide.
"""
import logging
import math

from decoybounds.api.models import (
    MDI_PAIR_KEYS,
    TILDE_KEYS,
    Estimate,
    Flag,
    MdiBounds,
    MdiIntensities,
    MdiObservables,
    MdiTildeStats,
    MinProblem,
    merge_flags,
)
from decoybounds.errors import DomainError, InfeasibleDomainError, MissingPairError
from decoybounds.services.decoy_bb84 import Mode, secure_key_rate
from decoybounds.services.entropy_math import binary_entropy, pi_coefficient
from decoybounds.services.minimizer import corollary_min
from decoybounds.settings import CORRECTION_TOLERANCE

logger = logging.getLogger(__name__)


def _eliminate_vacuum(values: dict[str, float], key: str, intensities: MdiIntensities) -> float:
    alice_key, bob_key = key.split("_")
    q1 = intensities.alice(alice_key)
    q2 = intensities.bob(bob_key)
    return (
        values[key]
        + math.exp(-(q1 + q2)) * values["0_0"]
        - math.exp(-q1) * values[f"0_{bob_key}"]
        - math.exp(-q2) * values[f"{alice_key}_0"]
    )


def tilde_stats(obs: MdiObservables) -> MdiTildeStats:
    """
    Gains and error-gains with every term where one party sent vacuum
    removed, for the four signal/decoy pairs.

    Raises:
        MissingPairError: an intensity pair is absent from the observables
    """
    for label, values in (("Q", obs.gains), ("EQ", obs.error_gains)):
        missing = [key for key in MDI_PAIR_KEYS if key not in values]
        if missing:
            raise MissingPairError(f"{label} lacks intensity pairs {missing}")

    tilde_q = {key: _eliminate_vacuum(obs.gains, key, obs.intensities) for key in TILDE_KEYS}
    tilde_eq = {
        key: _eliminate_vacuum(obs.error_gains, key, obs.intensities) for key in TILDE_KEYS
    }
    flags = ()
    negative = [key for key in TILDE_KEYS if tilde_q[key] < 0 or tilde_eq[key] < 0]
    if negative:
        logger.warning("negative vacuum-eliminated statistics for pairs %s", negative)
        flags = (Flag.NEGATIVE_TILDE,)
    return MdiTildeStats(
        intensities=obs.intensities, tilde_q=tilde_q, tilde_eq=tilde_eq, flags=flags
    )


def _two_photon_combination(values: dict[str, float], intensities: MdiIntensities) -> float:
    # Cramer solution of the decoy/decoy, signal/decoy and decoy/signal equations
    mu_a, nu_a = intensities.mu_a, intensities.nu_a
    mu_b, nu_b = intensities.mu_b, intensities.nu_b
    combination = (
        math.exp(nu_a + nu_b) * (mu_a * mu_b - nu_a * nu_b) / (nu_a * nu_b) * values["nu_nu"]
        - math.exp(mu_a + nu_b) * nu_a * (mu_b - nu_b) / (mu_a * nu_b) * values["mu_nu"]
        - math.exp(nu_a + mu_b) * nu_b * (mu_a - nu_a) / (nu_a * mu_b) * values["nu_mu"]
    )
    return combination / ((mu_a - nu_a) * (mu_b - nu_b))


def y11_lower(t: MdiTildeStats, intensities: MdiIntensities | None = None) -> Estimate:
    """Lower bound on Y_11, clamped at 0."""
    value = _two_photon_combination(t.tilde_q, intensities or t.intensities)
    if value <= 0:
        logger.warning("Y11 lower bound %.6g is not positive; no key", value)
        return Estimate(value=0.0, flags=(Flag.NO_KEY,))
    return Estimate(value=value)


def e11y11_lower(t: MdiTildeStats, intensities: MdiIntensities | None = None) -> Estimate:
    """
    Lower estimate of e_11 Y_11 from the same combination of error-gains.

    A negative estimate is returned unclamped, since delta is measured from it.
    """
    value = _two_photon_combination(t.tilde_eq, intensities or t.intensities)
    if value < 0:
        logger.warning("e11Y11 lower estimate %.6g is negative", value)
        return Estimate(value=value, flags=(Flag.NEGATIVE_ERROR_FLOOR,))
    return Estimate(value=value)


def _raw_e11_upper(t: MdiTildeStats, y11_l: float, intensities: MdiIntensities) -> float:
    if y11_l <= 0:
        raise DomainError(f"e11 upper bound needs Y11_L > 0, got {y11_l}")
    nu_a, nu_b = intensities.nu_a, intensities.nu_b
    return math.exp(nu_a + nu_b) * t.tilde_eq["nu_nu"] / (nu_a * nu_b * y11_l)


def e11_upper(
    t: MdiTildeStats, y11_l: float, intensities: MdiIntensities | None = None
) -> Estimate:
    """
    Upper bound on e_11 from the decoy/decoy error-gain, clamped to [0, 1/2].

    Raises:
        DomainError: Y11_L is not positive
    """
    value = _raw_e11_upper(t, y11_l, intensities or t.intensities)
    if value >= 0.5:
        logger.warning("e11 upper bound %.6g saturates at 1/2", value)
        return Estimate(value=0.5, flags=(Flag.ERROR_SATURATED,))
    if value < 0:
        logger.warning("e11 upper bound %.6g is negative; clamped to 0", value)
        return Estimate(value=0.0, flags=(Flag.ERROR_CLAMPED,))
    return Estimate(value=value)


def global_bound_mdi(
    t: MdiTildeStats,
    intensities: MdiIntensities | None = None,
    cutoff: int | None = None,
) -> MdiBounds:
    """
    Separate and global lower bounds on Y_11[1 - H(e_11)].

    The corollary instance is A = Y11_L, B = (e11 Y11)^L, C = Pi,
    D = e11_U Y11_L, E = A; while delta = D - B < Pi the minimum sits at
    Y11_G = Y11_L + delta, e11_G = e11_U Y11_L / Y11_G.
    """
    intensities = intensities or t.intensities
    pi = pi_coefficient(
        intensities.mu_a, intensities.nu_a, intensities.mu_b, intensities.nu_b, cutoff
    )
    lower = y11_lower(t, intensities)
    floor = e11y11_lower(t, intensities)

    if Flag.NO_KEY in lower.flags:
        return MdiBounds(
            y11_lower=0.0,
            e11y11_lower=floor.value,
            e11_upper=0.5,
            delta=0.0,
            y11_global=0.0,
            e11_global=0.5,
            pi=pi,
            pa_separate=0.0,
            pa_global=0.0,
            flags=merge_flags(t.flags, lower.flags, floor.flags),
        )

    y11_l = lower.value
    upper = e11_upper(t, y11_l, intensities)
    pa_separate = (
        0.0 if upper.value >= 0.5 else max(y11_l * (1.0 - binary_entropy(upper.value)), 0.0)
    )
    bound = max(_raw_e11_upper(t, y11_l, intensities), 0.0) * y11_l
    delta = bound - floor.value
    flags = merge_flags(t.flags, lower.flags, upper.flags, floor.flags)

    def fallback(delta_value: float, *extra: Flag) -> MdiBounds:
        return MdiBounds(
            y11_lower=y11_l,
            e11y11_lower=floor.value,
            e11_upper=upper.value,
            delta=delta_value,
            y11_global=y11_l,
            e11_global=upper.value,
            pi=pi,
            pa_separate=pa_separate,
            pa_global=pa_separate,
            flags=merge_flags(flags, extra),
        )

    noise = CORRECTION_TOLERANCE * max(bound, abs(floor.value))
    if delta < -noise:
        logger.warning("delta %.6g is negative; clamped to 0", delta)
        return fallback(0.0, Flag.CORRECTION_CLAMPED, Flag.ZERO_CORRECTION)
    if delta <= noise:
        return fallback(0.0, Flag.ZERO_CORRECTION)
    if floor.value < 0:
        return fallback(delta, Flag.GLOBAL_FALLBACK)

    problem = MinProblem(A=y11_l, B=floor.value, C=pi.value, D=bound, E=y11_l)
    try:
        solution = corollary_min(problem)
    except InfeasibleDomainError as e:
        logger.warning("global bound infeasible: %s", e)
        y11_g = y11_l + delta
        return MdiBounds(
            y11_lower=y11_l,
            e11y11_lower=floor.value,
            e11_upper=upper.value,
            delta=delta,
            y11_global=y11_g,
            e11_global=min(bound / y11_g, 0.5),
            pi=pi,
            pa_separate=pa_separate,
            pa_global=0.0,
            problem=problem,
            flags=merge_flags(flags, (Flag.GLOBAL_INFEASIBLE,)),
        )

    if solution.case_id == 1:
        y11_g = y11_l + delta
        e11_g = bound / y11_g
    else:
        y11_g = problem.A + problem.C * solution.y
        e11_g = (problem.B + problem.C * solution.x * solution.y) / y11_g
    return MdiBounds(
        y11_lower=y11_l,
        e11y11_lower=floor.value,
        e11_upper=upper.value,
        delta=delta,
        y11_global=y11_g,
        e11_global=e11_g,
        pi=pi,
        pa_separate=pa_separate,
        pa_global=max(solution.value, 0.0),
        problem=problem,
        min_case=solution.case_id,
        flags=flags,
    )


def key_rate_mdi(
    obs: MdiObservables,
    bounds: MdiBounds,
    mode: Mode,
    error_correction_f: float = 1.16,
) -> Estimate:
    """Secure key rate with p_11 = mu_a mu_b e^-(mu_a + mu_b)."""
    privacy = bounds.pa_global if mode == "global" else bounds.pa_separate
    return secure_key_rate(
        _p11(obs.intensities),
        privacy,
        obs.gains["mu_mu"],
        obs.error_gains["mu_mu"],
        error_correction_f,
    )


def asymptotic_key_rate_mdi(
    obs: MdiObservables, y11: float, e11: float, error_correction_f: float = 1.16
) -> Estimate:
    """Key rate with the true two-single-photon yield and error rate."""
    privacy = 0.0 if e11 >= 0.5 else y11 * (1.0 - binary_entropy(e11))
    return secure_key_rate(
        _p11(obs.intensities),
        privacy,
        obs.gains["mu_mu"],
        obs.error_gains["mu_mu"],
        error_correction_f,
    )


def _p11(intensities: MdiIntensities) -> float:
    return (
        intensities.mu_a
        * intensities.mu_b
        * math.exp(-(intensities.mu_a + intensities.mu_b))
    )
