"""
Multivalued maps, their domains, and step-selection records.
"""
import math
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from core.errors import OutOfDomainError
from models.geometry import FiniteClosedSet, Metric, Point
from schemas.multimap import MapDescription


class BoxDomain(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["box"] = "box"
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    step: Optional[float] = Field(default=None, gt=0)

    def contains(self, x: Point) -> bool:
        tol = settings.tol
        return x.dim == len(self.lo) and all(l - tol <= c <= h + tol for c, l, h in zip(x.coords, self.lo, self.hi))

    def sample(self, step: Optional[float] = None) -> List[Point]:
        step = step or self.step or settings.grid_step
        axes = []
        for l, h in zip(self.lo, self.hi):
            if not (math.isfinite(l) and math.isfinite(h)):
                raise ValueError("cannot grid an unbounded box")
            count = max(1, int(round((h - l) / step)))
            axes.append((l, h, count))
        size = math.prod(count + 1 for _, _, count in axes)
        if size > settings.max_sample_points:
            raise ValueError(f"a grid of step {step} has {size} points, above the cap of {settings.max_sample_points}")
        axes = [np.linspace(l, h, count + 1) for l, h, count in axes]
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = np.stack([m.ravel() for m in mesh], axis=-1)
        return [Point(coords=tuple(row)) for row in flat]

    def random_points(self, n: int, rng: np.random.Generator) -> List[Point]:
        draws = rng.uniform(self.lo, self.hi, size=(n, len(self.lo)))
        return [Point(coords=tuple(row)) for row in draws]

    def diameter(self, metric: Metric) -> float:
        return metric(Point(coords=self.lo), Point(coords=self.hi))

    def bounds(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        return self.lo, self.hi


class PointListDomain(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["points"] = "points"
    points: Tuple[Point, ...] = Field(min_length=1)

    def contains(self, x: Point) -> bool:
        return any(p.close_to(x) for p in self.points)

    def sample(self, step: Optional[float] = None) -> List[Point]:
        return list(self.points)

    def random_points(self, n: int, rng: np.random.Generator) -> List[Point]:
        picks = rng.integers(0, len(self.points), size=n)
        return [self.points[i] for i in picks]

    def diameter(self, metric: Metric) -> float:
        arr = np.asarray([p.coords for p in self.points])
        return float(metric.pairwise(arr, arr).max())

    def bounds(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        arr = np.asarray([p.coords for p in self.points])
        return tuple(arr.min(axis=0)), tuple(arr.max(axis=0))


Domain = Union[BoxDomain, PointListDomain]


class MultivaluedMap(BaseModel):
    """x -> F(x), a nonempty finite set for every domain point."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    fn: Callable[[Point], Union[FiniteClosedSet, Sequence]] = Field(exclude=True)
    domain: Domain = Field(discriminator="kind")
    description: Optional[MapDescription] = None

    def __call__(self, x: "Point | float | Sequence[float]") -> FiniteClosedSet:
        x = Point.coerce(x)
        if not self.domain.contains(x):
            raise OutOfDomainError(f"{x.coords} lies outside the domain of {self.label}")
        value = self.fn(x)
        if isinstance(value, FiniteClosedSet):
            return value
        return FiniteClosedSet.of(value)


class SelectionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: Point
    y: Point
    d_xy: float
    d_F_x: float
    d_F_y: float
    condition_A_margin: float
    condition_B_margin: float

    @property
    def succeeded(self) -> bool:
        tol = settings.tol
        return self.condition_A_margin >= -tol and self.condition_B_margin >= -tol

    def worst_margin(self) -> float:
        return min(self.condition_A_margin, self.condition_B_margin)
