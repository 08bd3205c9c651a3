from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.control import ControlFunction
from models.geometry import Point
from models.multimap import SelectionRecord


class StopReason(str, Enum):
    CONVERGED = "converged"
    MAX_STEPS = "max_steps"
    SELECTION_FAILED = "selection_failed"
    MONOTONICITY_VIOLATED = "monotonicity_violated"


class LimitCase(str, Enum):
    CASE_I = "case_I"      # 0 < delta < nabla
    CASE_II = "case_II"    # 0 < delta = nabla
    CASE_III = "case_III"  # 0 = delta = nabla


class IterationTrace(BaseModel):
    x0: Point
    x_final: Point
    steps: List[SelectionRecord] = Field(default_factory=list)
    d_F_final: float
    delta_est: float
    nabla_est: float
    stop_reason: StopReason

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def converged(self) -> bool:
        return self.stop_reason == StopReason.CONVERGED

    def d_F_values(self) -> List[float]:
        """d_F(x_0), ..., d_F(x_final)."""
        if not self.steps:
            return [self.d_F_final]
        return [s.d_F_x for s in self.steps] + [self.steps[-1].d_F_y]

    def step_lengths(self) -> List[float]:
        return [s.d_xy for s in self.steps]


class TheoremVariant(str, Enum):
    T14 = "T14"
    T15 = "T15"
    T16 = "T16"


class TheoremMode(BaseModel):
    """Which hypothesis set to validate and the control functions it needs."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    variant: TheoremVariant
    alpha: Optional[ControlFunction] = None
    beta: Optional[ControlFunction] = None
    gamma: Optional[ControlFunction] = None
    C: Optional[float] = None
    p: Optional[float] = None
    neighborhood: float = 1.0


class ReichProbeReport(BaseModel):
    """Outcome of running the iteration under a beta that is only checked for (R)."""

    map_label: str
    beta_R: str
    beta_MT: str
    runs: int
    converged: int
    stop_reasons: Dict[str, int] = Field(default_factory=dict)
    max_final_d_F: float
    note: str = "experiment only; no convergence claim is made"
