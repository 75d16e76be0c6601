"""
Pydantic models for the decoybounds service and library.
"""

from enum import Enum
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from decoybounds.settings import PROBABILITY_TOLERANCE, settings


class ErrorCode(str, Enum):
    """Error codes for API responses and CLI diagnostics"""

    INTERNAL_ERROR = "INTERNAL_ERROR"
    DOMAIN_ERROR = "DOMAIN_ERROR"
    INVALID_INTENSITY = "INVALID_INTENSITY"
    INVALID_PARAMS = "INVALID_PARAMS"
    INSUFFICIENT_CUTOFF = "INSUFFICIENT_CUTOFF"
    MISSING_PAIR = "MISSING_PAIR"
    INFEASIBLE_DOMAIN = "INFEASIBLE_DOMAIN"
    CONFIG_ERROR = "CONFIG_ERROR"
    IO_ERROR = "IO_ERROR"


class Flag(str, Enum):
    """Non-fatal conditions recorded by estimators and sweeps"""

    NO_KEY = "no_key"
    ERROR_SATURATED = "error_saturated"
    ERROR_CLAMPED = "error_clamped"
    CORRECTION_CLAMPED = "correction_clamped"
    ZERO_CORRECTION = "zero_correction"
    NEGATIVE_TILDE = "negative_tilde"
    NEGATIVE_ERROR_FLOOR = "negative_error_floor"
    GLOBAL_INFEASIBLE = "global_infeasible"
    GLOBAL_FALLBACK = "global_fallback"
    BELOW_THRESHOLD = "below_threshold"


def merge_flags(*groups) -> tuple[Flag, ...]:
    """Union of flag collections in a stable order."""
    merged = set()
    for group in groups:
        merged.update(group)
    return tuple(sorted(merged, key=lambda flag: flag.value))


class Estimate(BaseModel):
    """A scalar estimate with the flags raised while computing it"""

    model_config = ConfigDict(frozen=True)

    value: float
    flags: tuple[Flag, ...] = ()


class SeriesCoefficient(BaseModel):
    """An infinite-series coefficient with its truncation audit trail"""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    truncated_sum: float = Field(ge=0)
    truncation_order: int = Field(ge=3)
    tail_bound: float = Field(ge=0)


class ChannelParams(BaseModel):
    """Physical channel model parameters with typical fiber-link defaults"""

    model_config = ConfigDict(frozen=True)

    loss_db: float = Field(default=0.0, ge=0)
    dark_count: float = Field(default=3e-6, ge=0, lt=1)
    misalignment: float = Field(default=0.015, ge=0, lt=1)
    background_error: float = Field(default=0.5, ge=0, le=1)
    error_correction_f: float = Field(default=1.16, ge=1)

    @property
    def transmittance(self) -> float:
        """Overall transmittance, detection efficiency folded in."""
        return 10.0 ** (-self.loss_db / 10.0)


class IntensityTriple(BaseModel):
    """One value per BB84 intensity class"""

    model_config = ConfigDict(frozen=True)

    omega: float = Field(ge=0, le=1)
    upsilon: float = Field(ge=0, le=1)
    mu: float = Field(ge=0, le=1)


class Bb84Observables(BaseModel):
    """Measurable gains and error-gains of three-intensity BB84"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    upsilon: float = Field(gt=0)
    mu: float = Field(gt=0)
    gains: IntensityTriple = Field(alias="Q")
    error_gains: IntensityTriple = Field(alias="EQ")

    @model_validator(mode="after")
    def check_consistency(self):
        if self.upsilon >= self.mu:
            raise ValueError("decoy intensity upsilon must be below signal mu")
        for name in ("omega", "upsilon", "mu"):
            q = getattr(self.gains, name)
            eq = getattr(self.error_gains, name)
            if eq > q + PROBABILITY_TOLERANCE:
                raise ValueError(f"error-gain exceeds gain for intensity {name}")
        return self

    @property
    def y0(self) -> float:
        """Background yield, equal to the vacuum gain."""
        return self.gains.omega

    @property
    def e0y0(self) -> float:
        return self.error_gains.omega


class PhotonYieldTable(BaseModel):
    """Photon-number resolved yields Y_ij and error rates e_ij for MDI-QKD"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    cutoff: int = Field(ge=0)
    yields: tuple[tuple[float, ...], ...] = Field(alias="Y")
    error_rates: tuple[tuple[float, ...], ...] = Field(alias="e")
    tail_policy: str = "entries beyond cutoff taken as zero"

    @model_validator(mode="after")
    def check_shape(self):
        size = self.cutoff + 1
        for label, rows in (("Y", self.yields), ("e", self.error_rates)):
            if len(rows) != size or any(len(row) != size for row in rows):
                raise ValueError(f"{label} must be a {size}x{size} matrix")
            for row in rows:
                if any(not 0.0 <= value <= 1.0 for value in row):
                    raise ValueError(f"{label} entries must lie in [0, 1]")
        return self

    @classmethod
    def from_arrays(cls, yields, error_rates, tail_policy: str | None = None):
        """Build a table from two square array-likes."""
        yields = np.asarray(yields, dtype=float)
        error_rates = np.asarray(error_rates, dtype=float)
        extra = {} if tail_policy is None else {"tail_policy": tail_policy}
        return cls(
            cutoff=yields.shape[0] - 1,
            yields=tuple(map(tuple, yields.tolist())),
            error_rates=tuple(map(tuple, error_rates.tolist())),
            **extra,
        )

    def yield_matrix(self) -> np.ndarray:
        return np.asarray(self.yields, dtype=float)

    def error_matrix(self) -> np.ndarray:
        return np.asarray(self.error_rates, dtype=float)

    def error_yield_matrix(self) -> np.ndarray:
        """Element-wise e_ij * Y_ij."""
        return self.error_matrix() * self.yield_matrix()

    def to_json(self) -> str:
        """Serialize as {"cutoff": n, "Y": [[...]], "e": [[...]]}."""
        return self.model_dump_json(
            by_alias=True, include={"cutoff", "yields", "error_rates"}
        )


class MdiIntensities(BaseModel):
    """Decoy and signal intensities of both MDI parties"""

    model_config = ConfigDict(frozen=True)

    mu_a: float = Field(gt=0)
    nu_a: float = Field(gt=0)
    mu_b: float = Field(gt=0)
    nu_b: float = Field(gt=0)

    @model_validator(mode="after")
    def check_ordering(self):
        if self.nu_a >= self.mu_a or self.nu_b >= self.mu_b:
            raise ValueError("decoy intensities must be below signal intensities")
        return self

    def alice(self, key: str) -> float:
        return {"mu": self.mu_a, "nu": self.nu_a, "0": 0.0}[key]

    def bob(self, key: str) -> float:
        return {"mu": self.mu_b, "nu": self.nu_b, "0": 0.0}[key]


# Alice's class first, Bob's second
MDI_PAIR_KEYS = (
    "mu_mu",
    "mu_nu",
    "nu_mu",
    "nu_nu",
    "mu_0",
    "0_mu",
    "nu_0",
    "0_nu",
    "0_0",
)
TILDE_KEYS = ("mu_mu", "mu_nu", "nu_mu", "nu_nu")


class MdiObservables(BaseModel):
    """Gains and error-gains for every MDI intensity pair"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    intensities: MdiIntensities
    gains: dict[str, float] = Field(alias="Q")
    error_gains: dict[str, float] = Field(alias="EQ")
    tail_bound: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_ranges(self):
        for key, q in self.gains.items():
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"gain {key} must lie in [0, 1]")
            eq = self.error_gains.get(key)
            if eq is not None and not 0.0 <= eq <= q + PROBABILITY_TOLERANCE:
                raise ValueError(f"error-gain {key} must lie in [0, gain]")
        return self


class MdiTildeStats(BaseModel):
    """Gains and error-gains with the vacuum contributions eliminated"""

    model_config = ConfigDict(frozen=True)

    intensities: MdiIntensities
    tilde_q: dict[str, float]
    tilde_eq: dict[str, float]
    flags: tuple[Flag, ...] = ()


class MinProblem(BaseModel):
    """Instance of f(x, y) = (A + Cy)[1 - H((B + Cxy)/(A + Cy))] with bounds D, E"""

    model_config = ConfigDict(frozen=True)

    A: float = Field(gt=0)
    B: float = Field(ge=0)
    C: float = Field(gt=0)
    D: float
    E: float


class MinSolution(BaseModel):
    """Minimizer location and value; case_id is None for grid searches"""

    model_config = ConfigDict(frozen=True)

    case_id: int | None = None
    x: float
    y: float
    value: float


class Bb84Bounds(BaseModel):
    """Separate and global single-photon bounds for BB84"""

    model_config = ConfigDict(frozen=True)

    y1_lower: float
    e1_upper: float
    theta: float
    y1_global: float
    e1_global: float
    omega: SeriesCoefficient
    pa_separate: float
    pa_global: float
    problem: MinProblem | None = None
    min_case: int | None = None
    flags: tuple[Flag, ...] = ()


class MdiBounds(BaseModel):
    """Separate and global two-single-photon bounds for MDI-QKD"""

    model_config = ConfigDict(frozen=True)

    y11_lower: float
    e11y11_lower: float
    e11_upper: float
    delta: float
    y11_global: float
    e11_global: float
    pi: SeriesCoefficient
    pa_separate: float
    pa_global: float
    problem: MinProblem | None = None
    min_case: int | None = None
    flags: tuple[Flag, ...] = ()


class SweepConfig(BaseModel):
    """Configuration of a channel-loss sweep"""

    model_config = ConfigDict(extra="forbid")

    protocol: Literal["bb84", "mdi"] = "bb84"
    loss_start: float = Field(default=0.0, ge=0)
    loss_end: float = Field(default=30.0, ge=0)
    loss_step: float = 0.5
    mu: float = 0.5
    nu: float = 0.1
    mu_b: float | None = None
    nu_b: float | None = None
    channel: ChannelParams = ChannelParams()
    output: Path = Path("sweep.csv")
    observables: Path | None = None
    yield_table: Path | None = None
    workers: int = Field(default_factory=lambda: settings.sweep_workers, ge=1)
    series_cutoff: int = Field(default_factory=lambda: settings.series_cutoff, ge=4)
    table_cutoff: int = Field(default_factory=lambda: settings.table_cutoff, ge=8)

    @model_validator(mode="after")
    def check_grid_and_intensities(self):
        if self.loss_step <= 0:
            raise ValueError("loss_step must be positive")
        if self.loss_start > self.loss_end:
            raise ValueError("loss_start must not exceed loss_end")
        if not 0 < self.nu < self.mu:
            raise ValueError("intensities must satisfy 0 < nu < mu")
        if not 0 < self.nu_b_value < self.mu_b_value:
            raise ValueError("intensities must satisfy 0 < nu_b < mu_b")
        if self.yield_table is not None and self.protocol != "mdi":
            raise ValueError("yield_table applies to the mdi protocol only")
        return self

    @property
    def mu_b_value(self) -> float:
        return self.mu if self.mu_b is None else self.mu_b

    @property
    def nu_b_value(self) -> float:
        return self.nu if self.nu_b is None else self.nu_b

    def mdi_intensities(self) -> MdiIntensities:
        return MdiIntensities(
            mu_a=self.mu, nu_a=self.nu, mu_b=self.mu_b_value, nu_b=self.nu_b_value
        )

    def loss_grid(self) -> list[float]:
        """Loss points from loss_start to loss_end inclusive."""
        count = int(np.floor((self.loss_end - self.loss_start) / self.loss_step + 1e-9))
        return [round(self.loss_start + k * self.loss_step, 12) for k in range(count + 1)]


class SweepRequest(SweepConfig):
    """Sweep submitted over HTTP: model inputs only, bounded worker pool"""

    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_http_limits(self):
        if self.observables is not None or self.yield_table is not None:
            raise ValueError("observables and yield_table files are not accepted over HTTP")
        if self.workers > settings.api_max_workers:
            raise ValueError(f"workers must not exceed {settings.api_max_workers}")
        return self


class SweepRow(BaseModel):
    """One loss point of a sweep; single-photon (BB84) or two-single-photon (MDI)"""

    model_config = ConfigDict(frozen=True)

    loss_db: float
    yield_lower: float
    yield_global: float
    yield_true: float
    error_upper: float
    error_global: float
    error_true: float
    rate_separate: float
    rate_global: float
    rate_asymptotic: float
    ratio_yield_separate: float
    ratio_yield_global: float
    ratio_error_separate: float
    ratio_error_global: float
    ratio_rate_separate: float
    ratio_rate_global: float
    correction: float
    flags: tuple[Flag, ...] = ()


class Bb84EstimateRequest(BaseModel):
    """Request model for BB84 bound estimation"""

    observables: Bb84Observables
    error_correction_f: float = Field(default=1.16, ge=1)


class Bb84Estimate(BaseModel):
    """Response model for BB84 bound estimation"""

    bounds: Bb84Bounds
    rate_separate: float
    rate_global: float
    flags: tuple[Flag, ...] = ()


class MdiEstimateRequest(BaseModel):
    """Request model for MDI bound estimation"""

    observables: MdiObservables
    error_correction_f: float = Field(default=1.16, ge=1)
    series_cutoff: int = Field(default_factory=lambda: settings.series_cutoff, ge=4)


class MdiEstimate(BaseModel):
    """Response model for MDI bound estimation"""

    tilde: MdiTildeStats
    bounds: MdiBounds
    rate_separate: float
    rate_global: float
    flags: tuple[Flag, ...] = ()


class HealthResponse(BaseModel):
    """Response model for health check endpoint"""

    status: str
    version: str
    message: str


class ErrorResponse(BaseModel):
    """Error response model"""

    error_code: ErrorCode
    message: str
