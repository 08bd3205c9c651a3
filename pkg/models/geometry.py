"""
Points, finite closed sets and metrics.
"""
import math
from typing import Callable, Iterable, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.distance import cdist

from core.config import settings
from core.errors import EmptyValueSetError


class Point(BaseModel):
    model_config = ConfigDict(frozen=True)

    coords: Tuple[float, ...] = Field(min_length=1)

    @field_validator("coords")
    @classmethod
    def _finite(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(c) for c in value):
            raise ValueError("point coordinates must be finite")
        return tuple(float(c) for c in value)

    @classmethod
    def of(cls, *coords: float) -> "Point":
        return cls(coords=tuple(coords))

    @classmethod
    def coerce(cls, value: "Point | float | Sequence[float]") -> "Point":
        if isinstance(value, Point):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            return cls(coords=(float(value),))
        return cls(coords=tuple(float(c) for c in value))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def close_to(self, other: "Point", tol: Optional[float] = None) -> bool:
        tol = settings.tol if tol is None else tol
        return self.dim == other.dim and max(abs(a - b) for a, b in zip(self.coords, other.coords)) <= tol

    def __lt__(self, other: "Point") -> bool:
        return self.coords < other.coords

    def __float__(self) -> float:
        if self.dim != 1:
            raise TypeError("only one-dimensional points convert to float")
        return self.coords[0]


def _dedup(points: Iterable[Point], tol: float) -> Tuple[Point, ...]:
    kept: list[Point] = []
    for point in sorted(points):
        if not any(point.close_to(k, tol) for k in kept):
            kept.append(point)
    return tuple(kept)


class FiniteClosedSet(BaseModel):
    """Nonempty finite point set, lexicographically sorted, no two points within tol."""

    model_config = ConfigDict(frozen=True)

    points: Tuple[Point, ...]

    @model_validator(mode="before")
    @classmethod
    def _normalise(cls, data):
        raw = data.get("points", ()) if isinstance(data, dict) else data
        points = [Point.coerce(p) for p in raw]
        if not points:
            raise EmptyValueSetError()
        if len({p.dim for p in points}) != 1:
            raise ValueError("points of a set must share one dimension")
        return {"points": _dedup(points, settings.tol)}

    @classmethod
    def of(cls, points: Iterable["Point | float | Sequence[float]"]) -> "FiniteClosedSet":
        points = list(points)
        if not points:
            raise EmptyValueSetError()
        return cls(points=points)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def as_array(self) -> np.ndarray:
        return np.asarray([p.coords for p in self.points], dtype=float)

    def contains(self, x: Point, tol: Optional[float] = None) -> bool:
        return any(p.close_to(x, tol) for p in self.points)

    def union(self, other: "FiniteClosedSet") -> "FiniteClosedSet":
        return FiniteClosedSet(points=self.points + other.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


class Metric(BaseModel):
    """A distance on R^d; built-ins go through scipy's cdist, custom ones through a callable."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    kind: Literal["euclidean", "absolute", "custom"]
    fn: Optional[Callable[[np.ndarray, np.ndarray], float]] = Field(default=None, exclude=True)

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray, np.ndarray], float], name: str, sample: Sequence[Point]) -> "Metric":
        # Imported here: the axiom check lives with the other metric primitives.
        from services.metric_core import verify_metric_axioms

        metric = cls(name=name, kind="custom", fn=fn)
        verify_metric_axioms(metric, sample)
        return metric

    def pairwise(self, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
        xa = np.atleast_2d(np.asarray(xa, dtype=float))
        xb = np.atleast_2d(np.asarray(xb, dtype=float))
        if self.kind == "euclidean":
            return cdist(xa, xb, "euclidean")
        if self.kind == "absolute":
            if xa.shape[1] != 1:
                raise ValueError("the absolute-difference metric is defined on R only")
            return cdist(xa, xb, "cityblock")
        return cdist(xa, xb, lambda u, v: float(self.fn(u, v)))

    def __call__(self, x: Point, y: Point) -> float:
        return float(self.pairwise(x.as_array()[None, :], y.as_array()[None, :])[0, 0])


EUCLIDEAN = Metric(name="euclidean", kind="euclidean")
ABSOLUTE = Metric(name="absolute", kind="absolute")
