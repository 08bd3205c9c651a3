"""
Sampling specifications for grids on the half line and for metric balls.
"""
import itertools
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from core.errors import EmptySampleError
from models.geometry import Metric, Point


class Grid(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float = 0.0
    hi: float = Field(default_factory=lambda: settings.grid_max)
    step: float = Field(default_factory=lambda: settings.grid_step, gt=0)
    extra: Tuple[float, ...] = ()
    include_lo: bool = True

    @model_validator(mode="after")
    def _ordered(self):
        if self.hi < self.lo:
            raise ValueError("grid upper end lies below its lower end")
        return self

    def points(self) -> np.ndarray:
        count = max(1, int(round((self.hi - self.lo) / self.step)))
        base = np.linspace(self.lo, self.hi, count + 1)
        extra = np.asarray([e for e in self.extra if self.lo <= e <= self.hi], dtype=float)
        values = np.unique(np.concatenate([base, extra]))
        if not self.include_lo:
            values = values[values > self.lo + settings.tol]
        return values

    def restricted(self, lo: Optional[float] = None, hi: Optional[float] = None, include_lo: Optional[bool] = None) -> "Grid":
        return self.model_copy(update={
            "lo": self.lo if lo is None else max(self.lo, lo),
            "hi": self.hi if hi is None else min(self.hi, hi),
            "include_lo": self.include_lo if include_lo is None else include_lo,
        })

    def describe(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "step": self.step, "extra": list(self.extra), "include_lo": self.include_lo}


class BallSampling(BaseModel):
    """
    Sample of a closed metric ball around a centre.

    The sample holds the centre, a lattice of the given step, explicit points
    inside the ball, and points approaching the centre geometrically along each
    axis (centre +- r * 2**-j). Points outside `bounds` are dropped.
    """

    model_config = ConfigDict(frozen=True)

    step: Optional[float] = Field(default=None, gt=0)
    points: Tuple[Point, ...] = ()
    approach_depth: int = Field(default=0, ge=0)
    bounds: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def _in_bounds(self, p: Point) -> bool:
        if self.bounds is None:
            return True
        lo, hi = self.bounds
        tol = settings.tol
        return all(l - tol <= c <= h + tol for c, l, h in zip(p.coords, lo, hi))

    def sample(self, centre: Point, radius: float, metric: Metric) -> List[Point]:
        candidates: List[Point] = []
        base = centre.as_array()

        if self.step is not None:
            reach = int(math.floor(radius / self.step + 1e-9))
            offsets = [k * self.step for k in range(-reach, reach + 1)]
            for combo in itertools.product(offsets, repeat=centre.dim):
                candidates.append(Point(coords=tuple(base + np.asarray(combo))))

        candidates.extend(self.points)

        for axis in range(centre.dim):
            for j in range(1, self.approach_depth + 1):
                shift = radius * 2.0 ** (-j)
                for sign in (1.0, -1.0):
                    moved = base.copy()
                    moved[axis] += sign * shift
                    candidates.append(Point(coords=tuple(moved)))

        candidates = [p for p in candidates if p.dim == centre.dim and self._in_bounds(p)]
        if candidates:
            dists = metric.pairwise(base[None, :], np.asarray([p.coords for p in candidates]))[0]
            candidates = [p for p, d in zip(candidates, dists) if d <= radius + settings.tol]
        if not candidates:
            raise EmptySampleError(f"sampling spec yields no point within {radius} of {centre.coords}")
        return [centre] + candidates
