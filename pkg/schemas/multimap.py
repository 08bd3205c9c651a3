from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

from core.config import settings

PointLike = Union[float, List[float]]


class ConstantImage(BaseModel):
    kind: Literal["constant"] = "constant"
    value: float

    def __call__(self, x: float) -> float:
        return self.value


class LinearImage(BaseModel):
    kind: Literal["linear"] = "linear"
    a: float
    b: float = 0.0

    def __call__(self, x: float) -> float:
        return self.a * x + self.b


ImageExpr = Union[ConstantImage, LinearImage]


class Branch(BaseModel):
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False
    images: List[ImageExpr] = Field(min_length=1)

    def contains(self, x: float) -> bool:
        tol = settings.tol
        if self.lo == self.hi:
            return abs(x - self.lo) <= tol
        above = x >= self.lo - tol if self.lo_closed else x > self.lo + tol
        below = x <= self.hi + tol if self.hi_closed else x < self.hi - tol
        return above and below


class PiecewiseMapDescription(BaseModel):
    kind: Literal["piecewise-1d"] = "piecewise-1d"
    label: str = "piecewise-map"
    branches: List[Branch] = Field(min_length=1)


class TableMapDescription(BaseModel):
    kind: Literal["table"] = "table"
    label: str = "table-map"
    entries: List[Tuple[PointLike, List[PointLike]]] = Field(min_length=1)


MapDescription = Union[PiecewiseMapDescription, TableMapDescription]


class MapDescriptionEnvelope(BaseModel):
    """Wrapper used to parse either description kind from raw JSON."""

    description: MapDescription = Field(discriminator="kind")
    domain_step: Optional[float] = None
