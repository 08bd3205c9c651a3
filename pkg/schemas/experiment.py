from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from models.summability import SummabilityCriterion
from models.trace import TheoremVariant

Command = Literal["check-map", "iterate", "verify-theorem", "summability", "example-ciric"]


class GridSpec(BaseModel):
    lo: float = 0.0
    hi: Optional[float] = None
    step: Optional[float] = Field(default=None, gt=0)


class ExperimentConfig(BaseModel):
    """
    One experiment. `map_source` and `controls_source` are either
    "corpus:<label>" or a path to a JSON file; controls default to the
    corpus entry's when the map comes from the corpus.
    """

    command: Command
    map_source: Optional[str] = None
    controls_source: Optional[str] = None

    # grids and samples
    grid: GridSpec = Field(default_factory=GridSpec)
    sample_step: Optional[float] = Field(default=None, gt=0)
    pairs: int = Field(default=0, ge=0)

    # iteration
    x0: Optional[Union[float, List[float]]] = None
    starts: int = Field(default=0, ge=0)
    eps_fp: Optional[float] = Field(default=None, gt=0)
    max_steps: Optional[int] = Field(default=None, ge=1)

    # theorem modes and summability
    mode: TheoremVariant = TheoremVariant.T14
    C: Optional[float] = None
    p: Optional[float] = None
    neighborhood: float = Field(default=1.0, gt=0)
    reich_experiment: bool = False
    t0: Optional[float] = None
    N: int = Field(default=10_000, ge=1)
    criterion: SummabilityCriterion = SummabilityCriterion.TAIL_RATIO

    output: Optional[str] = None
    seed: int = 0

    @model_validator(mode="after")
    def _required(self):
        if self.command in ("check-map", "iterate") and self.map_source is None:
            raise ValueError(f"{self.command} needs a map source")
        if self.reich_experiment and self.map_source is None:
            raise ValueError("the (R) experiment needs a map source")
        if self.command == "summability" and None in (self.C, self.p, self.t0):
            raise ValueError("summability needs C, p and t0")
        return self


class RunOutcome(BaseModel):
    exit_code: int
    report: Dict[str, Any]
    files: List[str] = Field(default_factory=list)
    message: str = ""
