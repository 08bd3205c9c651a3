from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.control import ControlFunction


class SummabilityCriterion(str, Enum):
    TAIL_RATIO = "tail_ratio"
    BOUND_FIT = "bound_fit"


class SummabilityVerdict(str, Enum):
    SUMMABLE = "summable_evidence"
    INCONCLUSIVE = "inconclusive"
    DIVERGING = "diverging_evidence"


class PhiSequence(BaseModel):
    """phi_0 = t0, phi_{n+1} = phi(phi_n) * phi_n, with running partial sums."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    phi: ControlFunction = Field(exclude=True)
    t0: float
    values: List[float]
    partial_sums: List[float]
    truncated_at: Optional[int] = None

    def __len__(self) -> int:
        return len(self.values)

    @property
    def total(self) -> float:
        return self.partial_sums[-1]


class SummabilityReport(BaseModel):
    verdict: SummabilityVerdict
    criterion: SummabilityCriterion
    max_tail_ratio: Optional[float] = None
    exponent: Optional[float] = None
    terms: int
    truncated_at: Optional[int] = None
