from fastapi import HTTPException, status

from models.corpus import CorpusEntry
from services.corpus import get_entry


def corpus_entry(label: str) -> CorpusEntry:
    try:
        return get_entry(label)
    except KeyError:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Unknown corpus entry: {label}")
