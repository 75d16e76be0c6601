# decoybounds/settings.py
"""
Process-level settings read from the environment.
"""
import os

# Absolute slack before a probability outside [0, 1] is a domain error.
PROBABILITY_TOLERANCE = 1e-12

# Largest omitted Poisson mass accepted when summing a truncated yield table.
TABLE_TAIL_TOLERANCE = 1e-12

# Relative size below which a theta or delta correction is rounding noise.
CORRECTION_TOLERANCE = 1e-12


class Settings:
    """Settings for the estimators, sweeps and the HTTP service."""

    def __init__(self):
        """Initialize the settings from environment variables."""
        self.series_cutoff = int(os.getenv("DECOYBOUNDS_SERIES_CUTOFF", "30"))
        self.table_cutoff = int(os.getenv("DECOYBOUNDS_TABLE_CUTOFF", "16"))
        self.sweep_workers = int(os.getenv("DECOYBOUNDS_SWEEP_WORKERS", "1"))
        self.log_level = os.getenv("DECOYBOUNDS_LOG_LEVEL", "INFO").upper()
        self.host = os.getenv("DECOYBOUNDS_HOST", "0.0.0.0")
        self.port = int(os.getenv("DECOYBOUNDS_PORT", "8083"))
        self.api_max_workers = int(os.getenv("DECOYBOUNDS_API_MAX_WORKERS", "4"))


# Create a singleton instance
settings = Settings()
