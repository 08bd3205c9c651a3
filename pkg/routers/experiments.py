import logging

from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from core.errors import ContractumError
from schemas.experiment import ExperimentConfig, RunOutcome
from services.runner import run

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/run", response_model=RunOutcome)
async def run_experiment(config: ExperimentConfig) -> RunOutcome:
    """
    Run one experiment with the CLI's semantics.

    Configuration problems come back with exit_code 2 in the body; domain
    errors raised while computing become a 400.
    """
    try:
        return await run_in_threadpool(run, config)
    except ContractumError as exc:
        logger.warning("experiment %s failed: %s", config.command, exc)
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
