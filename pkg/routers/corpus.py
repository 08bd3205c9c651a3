from typing import Any, Dict, List

from fastapi import APIRouter, Depends

from dependencies.sources import corpus_entry
from models.corpus import CorpusEntry
from services.corpus import corpus_registry, verify_all_claims

router = APIRouter()


@router.get("")
async def list_corpus() -> List[Dict[str, Any]]:
    """Labels, tags and expected facts of every built-in entry."""
    return [entry.summary() for entry in corpus_registry().values()]


@router.get("/claims/example17")
async def example17_claims() -> List[Dict[str, Any]]:
    return [claim.model_dump(mode="json") for claim in verify_all_claims()]


@router.get("/{label}")
async def get_corpus_entry(entry: CorpusEntry = Depends(corpus_entry)) -> Dict[str, Any]:
    """
    The entry with its map in the multimap JSON schema; maps built from a
    callable have no description and report `null`.
    """
    description = entry.mapping.description
    return {
        **entry.summary(),
        "domain": entry.mapping.domain.model_dump(mode="json"),
        "description": description.model_dump(mode="json") if description is not None else None,
    }
