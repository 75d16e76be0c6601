# decoybounds/services/sweep.py
"""
Channel-loss sweeps comparing separate and global estimation, and the CSV
and summary files they are reported in.
"""
import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from pydantic import ValidationError

from decoybounds.api.models import (
    Bb84Observables,
    MdiObservables,
    PhotonYieldTable,
    SweepConfig,
    SweepRow,
    merge_flags,
)
from decoybounds.errors import ConfigError, ReportError
from decoybounds.services.channel_sim import (
    bb84_observables,
    bb84_true_single_photon,
    mdi_observables_from_table,
    mdi_true_y11_e11,
    mdi_yield_table_default,
)
from decoybounds.services.decoy_bb84 import (
    asymptotic_key_rate_bb84,
    global_bound_bb84,
    key_rate_bb84,
)
from decoybounds.services.decoy_mdi import (
    asymptotic_key_rate_mdi,
    global_bound_mdi,
    key_rate_mdi,
    tilde_stats,
)

logger = logging.getLogger(__name__)

NAN = float("nan")

_ROW_FIELDS = (
    "loss_db",
    "yield_lower",
    "yield_global",
    "yield_true",
    "error_upper",
    "error_global",
    "error_true",
    "rate_separate",
    "rate_global",
    "rate_asymptotic",
    "ratio_yield_separate",
    "ratio_yield_global",
    "ratio_error_separate",
    "ratio_error_global",
    "ratio_rate_separate",
    "ratio_rate_global",
    "correction",
)

CSV_HEADERS = {
    "bb84": (
        "loss_db",
        "Y1_L",
        "Y1_G",
        "Y1_true",
        "e1_U",
        "e1_G",
        "e1_true",
        "R_separate",
        "R_global",
        "R_asymptotic",
        "ratio_Y1_separate",
        "ratio_Y1_global",
        "ratio_e1_separate",
        "ratio_e1_global",
        "ratio_R_separate",
        "ratio_R_global",
        "theta",
        "flags",
    ),
    "mdi": (
        "loss_db",
        "Y11_L",
        "Y11_G",
        "Y11_true",
        "e11_U",
        "e11_G",
        "e11_true",
        "R_separate",
        "R_global",
        "R_asymptotic",
        "ratio_Y11_separate",
        "ratio_Y11_global",
        "ratio_e11_separate",
        "ratio_e11_global",
        "ratio_R_separate",
        "ratio_R_global",
        "delta",
        "flags",
    ),
}


def _ratio(numerator: float, denominator: float) -> float:
    if math.isnan(numerator) or math.isnan(denominator) or denominator == 0:
        return NAN
    return numerator / denominator


def _row(
    loss_db: float,
    estimates: tuple[float, float, float, float, float, float],
    rates: tuple[float, float, float],
    correction: float,
    flags,
) -> SweepRow:
    y_l, y_g, y_true, e_u, e_g, e_true = estimates
    r_sep, r_glob, r_asym = rates
    return SweepRow(
        loss_db=loss_db,
        yield_lower=y_l,
        yield_global=y_g,
        yield_true=y_true,
        error_upper=e_u,
        error_global=e_g,
        error_true=e_true,
        rate_separate=r_sep,
        rate_global=r_glob,
        rate_asymptotic=r_asym,
        ratio_yield_separate=_ratio(y_l, y_true),
        ratio_yield_global=_ratio(y_g, y_true),
        # error ratios are true/estimate so that 1 is the asymptotic limit
        ratio_error_separate=_ratio(e_true, e_u),
        ratio_error_global=_ratio(e_true, e_g),
        ratio_rate_separate=_ratio(r_sep, r_asym),
        ratio_rate_global=_ratio(r_glob, r_asym),
        correction=correction,
        flags=flags,
    )


def bb84_row(
    config: SweepConfig,
    loss_db: float,
    observables: Bb84Observables | None = None,
) -> SweepRow:
    """One BB84 sweep point; external observables leave the truth columns nan."""
    params = config.channel.model_copy(update={"loss_db": loss_db})
    f = params.error_correction_f
    obs = observables or bb84_observables(params, config.nu, config.mu)
    bounds = global_bound_bb84(obs, config.series_cutoff)
    separate = key_rate_bb84(obs, bounds, "separate", f)
    global_ = key_rate_bb84(obs, bounds, "global", f)

    if observables is None:
        y1_true, e1_true = bb84_true_single_photon(params)
        asymptotic = asymptotic_key_rate_bb84(obs, y1_true, e1_true, f).value
    else:
        y1_true = e1_true = asymptotic = NAN

    logger.debug("bb84 row at %.3f dB: flags %s", loss_db, bounds.flags)
    return _row(
        loss_db,
        (
            bounds.y1_lower,
            bounds.y1_global,
            y1_true,
            bounds.e1_upper,
            bounds.e1_global,
            e1_true,
        ),
        (separate.value, global_.value, asymptotic),
        bounds.theta,
        merge_flags(bounds.flags, separate.flags, global_.flags),
    )


def mdi_row(
    config: SweepConfig,
    loss_db: float,
    table: PhotonYieldTable | None = None,
    observables: MdiObservables | None = None,
) -> SweepRow:
    """
    One MDI sweep point with loss_db on each arm. An external table replaces
    the product-loss model; external observables leave the truth columns nan.
    """
    params = config.channel.model_copy(update={"loss_db": loss_db})
    f = params.error_correction_f
    if observables is None:
        if table is None:
            table = mdi_yield_table_default(params, params, config.table_cutoff)
        obs = mdi_observables_from_table(table, config.mdi_intensities())
    else:
        obs = observables

    bounds = global_bound_mdi(tilde_stats(obs), cutoff=config.series_cutoff)
    separate = key_rate_mdi(obs, bounds, "separate", f)
    global_ = key_rate_mdi(obs, bounds, "global", f)

    if observables is None:
        y11_true, e11_true = mdi_true_y11_e11(table)
        asymptotic = asymptotic_key_rate_mdi(obs, y11_true, e11_true, f).value
    else:
        y11_true = e11_true = asymptotic = NAN

    logger.debug("mdi row at %.3f dB: flags %s", loss_db, bounds.flags)
    return _row(
        loss_db,
        (
            bounds.y11_lower,
            bounds.y11_global,
            y11_true,
            bounds.e11_upper,
            bounds.e11_global,
            e11_true,
        ),
        (separate.value, global_.value, asymptotic),
        bounds.delta,
        merge_flags(bounds.flags, separate.flags, global_.flags),
    )


def _read_json_model(path: Path, model, label: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {label} {path}: {e}") from e
    try:
        return model.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    except ValidationError as e:
        raise ConfigError(f"invalid {label} {path}: {_describe(e)}") from e


def _describe(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc']) or '<root>'}: {item['msg']}"
        for item in error.errors()
    )


def load_sweep_config(path: Path | None = None, overrides: dict | None = None) -> SweepConfig:
    """
    Build a SweepConfig from an optional JSON file with overrides applied on
    top; None-valued overrides are ignored.

    Raises:
        ConfigError: unreadable or malformed JSON, or a schema violation
    """
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level JSON value must be an object")
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid sweep config: {_describe(e)}") from e


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """
    Evaluate every loss point of the config, in loss order.

    With external observables the sweep collapses to one row at loss_start.
    Rows are computed in a process pool when config.workers > 1.
    """
    if config.observables is not None:
        model = Bb84Observables if config.protocol == "bb84" else MdiObservables
        observables = _read_json_model(config.observables, model, "observables")
        logger.info("Estimating bounds for external observables %s", config.observables)
        if config.protocol == "bb84":
            return [bb84_row(config, config.loss_start, observables=observables)]
        return [mdi_row(config, config.loss_start, observables=observables)]

    if config.protocol == "bb84":
        evaluate = partial(bb84_row, config)
    else:
        table = None
        if config.yield_table is not None:
            table = _read_json_model(config.yield_table, PhotonYieldTable, "yield table")
        evaluate = partial(mdi_row, config, table=table)

    grid = config.loss_grid()
    logger.info(
        "Sweeping %s over %d loss points (%.3f to %.3f dB)",
        config.protocol,
        len(grid),
        grid[0],
        grid[-1],
    )
    if config.workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            rows = list(executor.map(evaluate, grid))
    else:
        rows = [evaluate(loss_db) for loss_db in grid]
    logger.info("Sweep finished with %d rows", len(rows))
    return rows


def _format(value: float) -> str:
    return f"{value:.17g}"


def summarize(rows: list[SweepRow]) -> dict:
    """Largest loss with a positive rate per mode and the largest rate-ratio gap."""

    def max_loss(attribute: str) -> float | None:
        losses = [row.loss_db for row in rows if getattr(row, attribute) > 0]
        return max(losses) if losses else None

    gaps = [
        row.ratio_rate_global - row.ratio_rate_separate
        for row in rows
        if not (math.isnan(row.ratio_rate_global) or math.isnan(row.ratio_rate_separate))
    ]
    return {
        "rows": len(rows),
        "max_loss_global": max_loss("rate_global"),
        "max_loss_separate": max_loss("rate_separate"),
        "max_ratio_gap": max(gaps) if gaps else None,
    }


def summary_path(output: Path) -> Path:
    return Path(output).with_suffix(".summary.json")


def emit_report(rows: list[SweepRow], config: SweepConfig) -> tuple[Path, Path]:
    """
    Write the sweep CSV and its .summary.json next to it.

    Raises:
        ConfigError: no rows to report; nothing is written
        ReportError: either file cannot be written
    """
    if not rows:
        raise ConfigError("cannot report an empty sweep")

    output = Path(config.output)
    summary = {"protocol": config.protocol, **summarize(rows)}
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        with output.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_HEADERS[config.protocol])
            for row in rows:
                writer.writerow(
                    [_format(getattr(row, name)) for name in _ROW_FIELDS]
                    + [";".join(flag.value for flag in row.flags)]
                )
        summary_file = summary_path(output)
        summary_file.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write report {output}: {e}") from e

    logger.info("Wrote %d rows to %s and summary to %s", len(rows), output, summary_file)
    return output, summary_file
