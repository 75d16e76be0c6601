# decoybounds/api/routes.py
"""
API routes for the decoy-state bounds service.
"""
import json
import logging
from typing import List

from fastapi import APIRouter, status
from fastapi.responses import JSONResponse

from decoybounds.api.models import (
    Bb84Estimate,
    Bb84EstimateRequest,
    ErrorCode,
    ErrorResponse,
    MdiEstimate,
    MdiEstimateRequest,
    MinProblem,
    MinSolution,
    SweepRequest,
    SweepRow,
    merge_flags,
)
from decoybounds.errors import DecoyBoundsError
from decoybounds.services.decoy_bb84 import global_bound_bb84, key_rate_bb84
from decoybounds.services.decoy_mdi import global_bound_mdi, key_rate_mdi, tilde_stats
from decoybounds.services.minimizer import corollary_min
from decoybounds.services.sweep import run_sweep

logger = logging.getLogger(__name__)

router = APIRouter()

_ERROR_RESPONSES = {
    400: {"model": ErrorResponse, "description": "Input outside the estimator's domain"},
    500: {"model": ErrorResponse, "description": "Internal server error"},
}


def _bad_request(e: DecoyBoundsError) -> JSONResponse:
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content=e.to_response().model_dump(mode="json"),
    )


def _internal_error(e: Exception) -> JSONResponse:
    logger.exception("Unhandled error")
    error_response = ErrorResponse(
        error_code=ErrorCode.INTERNAL_ERROR,
        message=f"Internal Server Error: {str(e)}",
    )
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=error_response.model_dump(mode="json"),
    )


@router.post(
    "/bb84/bounds",
    tags=["bb84"],
    response_model=Bb84Estimate,
    responses=_ERROR_RESPONSES,
)
async def estimate_bb84(request: Bb84EstimateRequest):
    """Separate and global single-photon bounds with both key rates."""
    try:
        obs = request.observables
        bounds = global_bound_bb84(obs)
        separate = key_rate_bb84(obs, bounds, "separate", request.error_correction_f)
        global_ = key_rate_bb84(obs, bounds, "global", request.error_correction_f)
        return Bb84Estimate(
            bounds=bounds,
            rate_separate=separate.value,
            rate_global=global_.value,
            flags=merge_flags(bounds.flags, separate.flags, global_.flags),
        )
    except DecoyBoundsError as e:
        return _bad_request(e)
    except Exception as e:
        return _internal_error(e)


@router.post(
    "/mdi/bounds",
    tags=["mdi"],
    response_model=MdiEstimate,
    responses=_ERROR_RESPONSES,
)
async def estimate_mdi(request: MdiEstimateRequest):
    """Vacuum-eliminated statistics, two-single-photon bounds and key rates."""
    try:
        obs = request.observables
        tilde = tilde_stats(obs)
        bounds = global_bound_mdi(tilde, cutoff=request.series_cutoff)
        separate = key_rate_mdi(obs, bounds, "separate", request.error_correction_f)
        global_ = key_rate_mdi(obs, bounds, "global", request.error_correction_f)
        return MdiEstimate(
            tilde=tilde,
            bounds=bounds,
            rate_separate=separate.value,
            rate_global=global_.value,
            flags=merge_flags(bounds.flags, separate.flags, global_.flags),
        )
    except DecoyBoundsError as e:
        return _bad_request(e)
    except Exception as e:
        return _internal_error(e)


@router.post(
    "/minimize",
    tags=["minimizer"],
    response_model=MinSolution,
    responses=_ERROR_RESPONSES,
)
async def minimize(problem: MinProblem):
    """Closed-form minimum of the privacy amplification term."""
    try:
        return corollary_min(problem)
    except DecoyBoundsError as e:
        return _bad_request(e)
    except Exception as e:
        return _internal_error(e)


@router.post(
    "/sweeps",
    tags=["sweeps"],
    response_model=List[SweepRow],
    responses=_ERROR_RESPONSES,
)
def sweep(config: SweepRequest):
    """Run a loss sweep and return its rows; no files are written. nan becomes null."""
    try:
        rows = run_sweep(config)
        return JSONResponse(content=[json.loads(row.model_dump_json()) for row in rows])
    except DecoyBoundsError as e:
        return _bad_request(e)
    except Exception as e:
        return _internal_error(e)
