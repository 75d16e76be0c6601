# decoybounds/services/channel_sim.py
"""
Asymptotic channel models producing observable statistics and the
photon-number resolved ground truth they were generated from.
"""
import logging
import math

import numpy as np
from scipy.special import factorial
from scipy.stats import poisson

from decoybounds.api.models import (
    MDI_PAIR_KEYS,
    Bb84Observables,
    ChannelParams,
    IntensityTriple,
    MdiIntensities,
    MdiObservables,
    PhotonYieldTable,
)
from decoybounds.errors import (
    InsufficientCutoffError,
    InvalidIntensityError,
    InvalidParamsError,
)
from decoybounds.services.entropy_math import (
    omega_coefficient,
    pi_coefficient,
    upsilon_weights,
)
from decoybounds.settings import PROBABILITY_TOLERANCE, TABLE_TAIL_TOLERANCE, settings

logger = logging.getLogger(__name__)

MIN_TABLE_CUTOFF = 8


def _check_intensities(upsilon: float, mu: float) -> None:
    if not (upsilon > 0 and mu > upsilon):
        raise InvalidIntensityError(
            f"intensities must satisfy 0 < upsilon < mu, got upsilon={upsilon}, mu={mu}"
        )


def poisson_weights(intensity: float, cutoff: int) -> np.ndarray:
    """Poisson photon-number distribution truncated at cutoff."""
    return poisson.pmf(np.arange(cutoff + 1), intensity)


def bb84_observables(params: ChannelParams, upsilon: float, mu: float) -> Bb84Observables:
    """
    Gains and error-gains of the standard asymptotic model, Y_0 = p_d and
    Y_i = Y_0 + 1 - (1 - eta)^i, summed in closed form.
    """
    _check_intensities(upsilon, mu)
    eta = params.transmittance
    y0 = params.dark_count
    e0y0 = params.background_error * y0

    def gain(nu: float) -> float:
        return y0 - math.expm1(-eta * nu)

    def error_gain(nu: float) -> float:
        return e0y0 - params.misalignment * math.expm1(-eta * nu)

    return Bb84Observables(
        upsilon=upsilon,
        mu=mu,
        gains=IntensityTriple(omega=y0, upsilon=gain(upsilon), mu=gain(mu)),
        error_gains=IntensityTriple(
            omega=e0y0, upsilon=error_gain(upsilon), mu=error_gain(mu)
        ),
    )


def bb84_true_single_photon(params: ChannelParams) -> tuple[float, float]:
    """Single-photon yield and error rate of the asymptotic model."""
    eta = params.transmittance
    y0 = params.dark_count
    y1 = y0 + eta
    e1 = (params.background_error * y0 + params.misalignment * eta) / y1
    return y1, e1


def bb84_photon_yields(params: ChannelParams, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Y_i and e_i * Y_i of the asymptotic model for 0 <= i <= cutoff."""
    eta = params.transmittance
    y0 = params.dark_count
    detected = 1.0 - (1.0 - eta) ** np.arange(cutoff + 1, dtype=float)
    yields = y0 + detected
    error_yields = params.background_error * y0 + params.misalignment * detected
    return yields, error_yields


def bb84_observables_from_yields(
    yields, error_yields, upsilon: float, mu: float
) -> Bb84Observables:
    """
    Poisson expansion of the gain and QBER equations for an arbitrary
    photon-number model; photon numbers past the given sequence yield nothing.
    """
    _check_intensities(upsilon, mu)
    yields = np.asarray(yields, dtype=float)
    error_yields = np.asarray(error_yields, dtype=float)
    if yields.shape != error_yields.shape or yields.ndim != 1:
        raise InvalidParamsError("yields and error_yields must be 1-d sequences of equal length")
    if np.any(yields < 0) or np.any(
        (error_yields < 0) | (error_yields > yields + PROBABILITY_TOLERANCE)
    ):
        raise InvalidParamsError("need 0 <= e_i Y_i <= Y_i for every photon number")
    cutoff = len(yields) - 1

    def expand(values: np.ndarray, nu: float) -> float:
        return float(poisson_weights(nu, cutoff) @ values)

    return Bb84Observables(
        upsilon=upsilon,
        mu=mu,
        gains=IntensityTriple(
            omega=float(yields[0]),
            upsilon=expand(yields, upsilon),
            mu=expand(yields, mu),
        ),
        error_gains=IntensityTriple(
            omega=float(error_yields[0]),
            upsilon=expand(error_yields, upsilon),
            mu=expand(error_yields, mu),
        ),
    )


def bb84_aggregate_state(
    yields, error_yields, upsilon: float, mu: float
) -> tuple[float, float]:
    """
    Yield and error rate (Y_rho, e_rho) of the aggregate multi-photon state
    mixing photon numbers i >= 3 with weights proportional to
    (mu^(i-1) upsilon - upsilon^(i-1) mu) / i!, normalized by Omega. Photon
    numbers past the given sequence count as zero yield.
    """
    _check_intensities(upsilon, mu)
    yields = np.asarray(yields, dtype=float)
    error_yields = np.asarray(error_yields, dtype=float)
    i = np.arange(len(yields), dtype=float)
    weights = np.where(
        i >= 3,
        (mu ** (i - 1) * upsilon - upsilon ** (i - 1) * mu) / (factorial(i) * (mu - upsilon)),
        0.0,
    )
    omega = omega_coefficient(mu, upsilon).value
    y_rho = float(weights @ yields) / omega
    ey_rho = float(weights @ error_yields) / omega
    e_rho = ey_rho / y_rho if y_rho > 0 else 0.0
    return y_rho, e_rho


def mdi_yield_table_default(
    params_a: ChannelParams, params_b: ChannelParams, cutoff: int | None = None
) -> PhotonYieldTable:
    """
    Qualitative product-loss model of the untrusted relay:
    Y_ij = y_0 + [1 - (1 - eta_a)^i][1 - (1 - eta_b)^j] / 2 with y_0 = p_d and
    e_ij Y_ij = e_0 y_0 + e_d (Y_ij - y_0).

    Detector terms (p_d, e_0, e_d) are taken from params_a; each arm
    contributes only its loss. Estimator properties hold for any valid
    table, so this model is not meant to match a physical relay.
    """
    order = settings.table_cutoff if cutoff is None else cutoff
    if order < MIN_TABLE_CUTOFF:
        raise InsufficientCutoffError(
            f"yield table cutoff must be >= {MIN_TABLE_CUTOFF}, got {order}"
        )
    y0 = params_a.dark_count
    n = np.arange(order + 1, dtype=float)
    arm_a = 1.0 - (1.0 - params_a.transmittance) ** n
    arm_b = 1.0 - (1.0 - params_b.transmittance) ** n
    signal = 0.5 * np.outer(arm_a, arm_b)
    yields = y0 + signal
    error_yields = params_a.background_error * y0 + params_a.misalignment * signal
    error_rates = np.divide(
        error_yields,
        yields,
        out=np.full_like(yields, params_a.background_error),
        where=yields > 0,
    )
    return PhotonYieldTable.from_arrays(
        yields,
        np.clip(error_rates, 0.0, 1.0),
        tail_policy="product-loss model truncated at cutoff",
    )


def table_tail_bound(intensities: MdiIntensities, cutoff: int) -> float:
    """Omitted Poisson mass past the cutoff for the strongest pair, with Y_ij <= 1."""
    return float(
        poisson.sf(cutoff, max(intensities.mu_a, intensities.nu_a))
        + poisson.sf(cutoff, max(intensities.mu_b, intensities.nu_b))
    )


def mdi_observables_from_table(
    table: PhotonYieldTable, intensities: MdiIntensities
) -> MdiObservables:
    """
    Gains and error-gains for all nine intensity pairs as truncated double
    Poisson sums over the table.
    """
    tail = table_tail_bound(intensities, table.cutoff)
    if tail > TABLE_TAIL_TOLERANCE:
        raise InsufficientCutoffError(
            f"table cutoff {table.cutoff} leaves a Poisson tail of {tail:.3g}"
        )
    yields = table.yield_matrix()
    error_yields = table.error_yield_matrix()

    gains = {}
    error_gains = {}
    for key in MDI_PAIR_KEYS:
        alice_key, bob_key = key.split("_")
        p_a = poisson_weights(intensities.alice(alice_key), table.cutoff)
        p_b = poisson_weights(intensities.bob(bob_key), table.cutoff)
        gains[key] = float(p_a @ yields @ p_b)
        error_gains[key] = min(float(p_a @ error_yields @ p_b), gains[key])

    return MdiObservables(
        intensities=intensities, gains=gains, error_gains=error_gains, tail_bound=tail
    )


def mdi_true_y11_e11(table: PhotonYieldTable) -> tuple[float, float]:
    """Two-single-photon yield and error rate read off the table."""
    y11 = table.yields[1][1]
    e11 = table.error_rates[1][1] if y11 > 0 else 0.0
    return y11, e11


def mdi_aggregate_state(
    table: PhotonYieldTable, intensities: MdiIntensities
) -> tuple[float, float]:
    """
    Yield and error rate (Y_psi, e_psi) of the aggregate state mixing the
    table's (i, j) entries with i, j >= 1 and i + j >= 4, normalized by Pi.
    """
    mu_a, nu_a = intensities.mu_a, intensities.nu_a
    mu_b, nu_b = intensities.mu_b, intensities.nu_b
    n = np.arange(table.cutoff + 1, dtype=float)
    weights = upsilon_weights(mu_a, nu_a, mu_b, nu_b, table.cutoff) / (
        np.outer(factorial(n), factorial(n)) * (mu_a - nu_a) * (mu_b - nu_b)
    )
    total = pi_coefficient(
        mu_a, nu_a, mu_b, nu_b, cutoff=max(settings.series_cutoff, 2 * table.cutoff)
    ).value
    y_psi = float((weights * table.yield_matrix()).sum()) / total
    ey_psi = float((weights * table.error_yield_matrix()).sum()) / total
    e_psi = ey_psi / y_psi if y_psi > 0 else 0.0
    return y_psi, e_psi
