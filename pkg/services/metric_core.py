"""
Point-set distance, Hausdorff distance and neighbourhood infima on finite sets.
"""
import logging
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from core.config import settings
from core.errors import EmptyValueSetError, MetricAxiomError
from models.geometry import EUCLIDEAN, FiniteClosedSet, Metric, Point
from models.sampling import BallSampling

logger = logging.getLogger(__name__)

SetLike = Union[FiniteClosedSet, Sequence]
SampleSpec = Union[BallSampling, float, Sequence]


def as_closed_set(value: SetLike) -> FiniteClosedSet:
    if isinstance(value, FiniteClosedSet):
        return value
    points = list(value)
    if not points:
        raise EmptyValueSetError()
    return FiniteClosedSet.of(points)


def dist_point_set(x: Point, A: SetLike, m: Metric = EUCLIDEAN) -> float:
    A = as_closed_set(A)
    x = Point.coerce(x)
    return float(m.pairwise(x.as_array()[None, :], A.as_array()).min())


def directed_hausdorff(A: SetLike, B: SetLike, m: Metric = EUCLIDEAN) -> float:
    A, B = as_closed_set(A), as_closed_set(B)
    return float(m.pairwise(A.as_array(), B.as_array()).min(axis=1).max())


def hausdorff(A: SetLike, B: SetLike, m: Metric = EUCLIDEAN) -> float:
    A, B = as_closed_set(A), as_closed_set(B)
    matrix = m.pairwise(A.as_array(), B.as_array())
    return float(max(matrix.min(axis=1).max(), matrix.min(axis=0).max()))


def _as_ball_sampling(samples: SampleSpec) -> BallSampling:
    if isinstance(samples, BallSampling):
        return samples
    if isinstance(samples, (int, float)):
        return BallSampling(step=float(samples))
    return BallSampling(points=tuple(Point.coerce(p) for p in samples))


def neighborhood_inf(h: Callable[[Point], float], x: Point, r: float, samples: SampleSpec, m: Metric = EUCLIDEAN) -> float:
    """Minimum of h over the sampled closed ball of radius r around x, x included."""
    if r <= 0:
        raise ValueError("neighbourhood radius must be positive")
    x = Point.coerce(x)
    points = _as_ball_sampling(samples).sample(x, r, m)
    return min(float(h(p)) for p in points)


def verify_metric_axioms(m: Metric, sample: Iterable[Point]) -> None:
    """Identity, symmetry and triangle inequality on every sampled pair/triple, within tol."""
    tol = settings.tol
    points = [Point.coerce(p) for p in sample]
    if not points:
        raise MetricAxiomError("cannot check metric axioms on an empty sample")
    arr = np.asarray([p.coords for p in points])
    matrix = m.pairwise(arr, arr)

    if np.any(matrix < -tol):
        raise MetricAxiomError(f"{m.name}: negative distance")
    if np.any(np.abs(np.diag(matrix)) > tol):
        raise MetricAxiomError(f"{m.name}: d(x, x) != 0")
    if np.any(np.abs(matrix - matrix.T) > tol):
        raise MetricAxiomError(f"{m.name}: not symmetric")
    # d(i, k) <= d(i, j) + d(j, k) for every triple
    through = matrix[:, :, None] + matrix[None, :, :]
    gap = matrix[:, None, :] - through
    if np.any(gap > tol):
        i, j, k = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise MetricAxiomError(
            f"{m.name}: triangle inequality fails for {points[i].coords}, {points[j].coords}, {points[k].coords}"
        )
    logger.debug("metric %s passed the axiom check on %d points", m.name, len(points))
