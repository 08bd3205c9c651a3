"""
Multivalued maps: construction from JSON descriptions, the distance function
d_F, step selection, and the map-wide (alpha, beta) and Hausdorff checkers.
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core.config import settings
from core.errors import OutOfDomainError, PerturbationError, SelectionError
from core.parallel import fan_out
from models.control import ControlFunction, RangeContract, Shape
from models.geometry import EUCLIDEAN, FiniteClosedSet, Metric, Point
from models.multimap import BoxDomain, Domain, MultivaluedMap, PointListDomain, SelectionRecord
from models.reports import MapCheckKind, MapCheckReport, Verdict, Witness, sorted_witnesses
from models.sampling import Grid
from schemas.multimap import (
    Branch,
    ConstantImage,
    MapDescription,
    PiecewiseMapDescription,
    TableMapDescription,
)
from services.metric_core import as_closed_set, dist_point_set, hausdorff

logger = logging.getLogger(__name__)

PointPair = Tuple[Point, Point]


# construction


def _piecewise_fn(description: PiecewiseMapDescription) -> Callable[[Point], List[float]]:
    points = [b for b in description.branches if b.lo == b.hi]
    intervals = [b for b in description.branches if b.lo != b.hi]

    def evaluate(x: Point) -> List[float]:
        t = float(x)
        for branch in points + intervals:
            if branch.contains(t):
                return [image(t) for image in branch.images]
        raise OutOfDomainError(f"{description.label}: no branch covers x={t}")

    return evaluate


def _table_fn(description: TableMapDescription) -> Callable[[Point], FiniteClosedSet]:
    table = [(Point.coerce(x), FiniteClosedSet.of(images)) for x, images in description.entries]

    def evaluate(x: Point) -> FiniteClosedSet:
        for key, images in table:
            if key.close_to(x):
                return images
        raise OutOfDomainError(f"{description.label}: no entry for {x.coords}")

    return evaluate


def map_from_description(description: MapDescription, domain_step: Optional[float] = None) -> MultivaluedMap:
    """Build a map from its JSON description; piecewise maps live on the hull of their branches."""
    if isinstance(description, PiecewiseMapDescription):
        lo = min(b.lo for b in description.branches)
        hi = max(b.hi for b in description.branches)
        domain: Domain = BoxDomain(lo=(lo,), hi=(hi,), step=domain_step)
        fn = _piecewise_fn(description)
    else:
        domain = PointListDomain(points=tuple(Point.coerce(x) for x, _ in description.entries))
        fn = _table_fn(description)
    return MultivaluedMap(label=description.label, fn=fn, domain=domain, description=description)


def describe(F: MultivaluedMap) -> MapDescription:
    if F.description is None:
        raise ValueError(f"{F.label} was built from a callable and has no JSON description")
    return F.description


# distance function and selection


def d_F(F: MultivaluedMap, x, m: Metric = EUCLIDEAN) -> float:
    x = Point.coerce(x)
    return dist_point_set(x, F(x), m)


def distance_function(F: MultivaluedMap, m: Metric = EUCLIDEAN) -> Callable[[Point], float]:
    """x -> d_F(x) as a plain callable, for the positivity checkers."""
    return lambda x: d_F(F, x, m)


def _record(F: MultivaluedMap, x: Point, y: Point, d_F_x: float, alpha: ControlFunction, beta: ControlFunction, m: Metric) -> SelectionRecord:
    d_xy = m(x, y)
    d_F_y = d_F(F, y, m)
    return SelectionRecord(
        x=x,
        y=y,
        d_xy=d_xy,
        d_F_x=d_F_x,
        d_F_y=d_F_y,
        condition_A_margin=alpha(d_xy) * d_F_x - d_xy,
        condition_B_margin=beta(d_xy) * d_xy - d_F_y,
    )


def select_step(F: MultivaluedMap, x, alpha: ControlFunction, beta: ControlFunction, m: Metric = EUCLIDEAN) -> SelectionRecord:
    """
    Pick y in F(x) with d(x, y) <= alpha(d(x, y)) d_F(x) and d_F(y) <= beta(d(x, y)) d(x, y).

    Among admissible images the closest one wins, ties broken lexicographically.
    A fixed point selects itself.
    """
    x = Point.coerce(x)
    images = F(x)
    d_F_x = dist_point_set(x, images, m)
    tol = settings.tol

    if d_F_x <= tol:
        dists = m.pairwise(x.as_array()[None, :], images.as_array())[0]
        y = images.points[int(np.argmin(dists))]
        return _record(F, x, y, d_F_x, alpha, beta, m)

    records = [_record(F, x, y, d_F_x, alpha, beta, m) for y in images]
    admissible = [r for r in records if r.succeeded]
    if not admissible:
        near_miss = max(records, key=lambda r: (r.worst_margin(), tuple(-c for c in r.y.coords)))
        raise SelectionError(f"not an (α,β)-mapping at x={x.coords}", record=near_miss)
    return min(admissible, key=lambda r: (r.d_xy, r.y.coords))


# map-wide checks


def _selection_witness(F: MultivaluedMap, alpha: ControlFunction, beta: ControlFunction, m: Metric, x: Point) -> Optional[Witness]:
    try:
        select_step(F, x, alpha, beta, m)
    except SelectionError as exc:
        record: SelectionRecord = exc.record
        return Witness(input=x.coords, value=record.worst_margin(), detail=f"best image {record.y.coords}")
    return None


def check_ab_mapping(
    F: MultivaluedMap,
    alpha: ControlFunction,
    beta: ControlFunction,
    m: Metric = EUCLIDEAN,
    sample: Optional[Sequence] = None,
) -> MapCheckReport:
    points = [Point.coerce(p) for p in (sample if sample is not None else F.domain.sample())]
    found = fan_out(lambda x: _selection_witness(F, alpha, beta, m, x), points)
    witnesses = [w for w in found if w is not None]
    report = MapCheckReport(
        kind=MapCheckKind.AB_MAPPING,
        verdict=Verdict.VIOLATED if witnesses else Verdict.HOLDS,
        witnesses=sorted_witnesses(witnesses),
        sample={"size": len(points), "map": F.label},
        checked=len(points),
    )
    logger.info("(alpha,beta)-mapping check of %s on %d points: %s", F.label, len(points), report.verdict.value)
    return report


def check_ab_contraction(
    F: MultivaluedMap,
    alpha: ControlFunction,
    beta: ControlFunction,
    m: Metric = EUCLIDEAN,
    sample: Optional[Sequence] = None,
    t_step: Optional[float] = None,
) -> MapCheckReport:
    """The mapping check plus alpha(t) beta(t) < 1 - margin on a t-grid over (0, diam]."""
    mapping = check_ab_mapping(F, alpha, beta, m, sample)
    diameter = F.domain.diameter(m)
    hi = max(diameter, settings.tol)
    step = t_step or max(settings.grid_step, hi / settings.max_sample_points)
    grid = Grid(lo=0.0, hi=hi, step=step, include_lo=False)
    ts = [float(t) for t in grid.points() if alpha.contains(float(t)) and beta.contains(float(t))]
    products = [alpha(t) * beta(t) for t in ts]
    ceiling = 1.0 - settings.margin
    product_witnesses = [
        Witness(input=(t,), value=v, detail="alpha*beta not below 1") for t, v in zip(ts, products) if v >= ceiling
    ]
    witnesses = list(mapping.witnesses) + product_witnesses
    report = MapCheckReport(
        kind=MapCheckKind.AB_CONTRACTION,
        verdict=Verdict.VIOLATED if witnesses else Verdict.HOLDS,
        witnesses=sorted_witnesses(witnesses),
        sample={**mapping.sample, "t_grid": grid.describe(), "diameter": diameter},
        checked=mapping.checked,
        max_product=max(products) if products else None,
    )
    logger.info("(alpha,beta)-contraction check of %s: %s (max product %s)", F.label, report.verdict.value, report.max_product)
    return report


def _hausdorff_witness(F: MultivaluedMap, k: ControlFunction, m: Metric, pair: PointPair) -> Optional[Witness]:
    x, y = pair
    d = m(x, y)
    H = hausdorff(F(x), F(y), m)
    slack = k(d) * d - H
    if slack < -settings.tol:
        return Witness(input=x.coords + y.coords, value=slack, detail=f"H={H} at d={d}")
    return None


def check_hausdorff_contraction(F: MultivaluedMap, k: ControlFunction, m: Metric = EUCLIDEAN, pair_sample: Sequence[PointPair] = ()) -> MapCheckReport:
    pairs = [(Point.coerce(x), Point.coerce(y)) for x, y in pair_sample]
    found = fan_out(lambda pair: _hausdorff_witness(F, k, m, pair), pairs)
    witnesses = [w for w in found if w is not None]
    report = MapCheckReport(
        kind=MapCheckKind.HAUSDORFF_K_CONTRACTION,
        verdict=Verdict.VIOLATED if witnesses else Verdict.HOLDS,
        witnesses=sorted_witnesses(witnesses),
        sample={"pairs": len(pairs), "map": F.label, "k": k.label},
        checked=len(pairs),
    )
    logger.info("Hausdorff %s-contraction check of %s on %d pairs: %s", k.label, F.label, len(pairs), report.verdict.value)
    return report


def embed_hausdorff(k: ControlFunction, slack: float, cap: Optional[float] = None) -> Tuple[ControlFunction, ControlFunction]:
    """
    Controls (alpha, beta) under which a Hausdorff k-contraction is an (alpha, beta)-contraction:
    beta = k and alpha = min(1 + slack (1 - k) / max(k, guard), cap).
    """
    if not 0.0 < slack < 1.0:
        raise ValueError("slack must lie in (0, 1)")
    cap = settings.embed_cap if cap is None else cap
    guard = settings.denominator_guard

    def alpha_of(kt: float) -> float:
        return min(1.0 + slack * (1.0 - kt) / max(kt, guard), cap)

    domain = dict(domain_lo=k.domain_lo, domain_hi=k.domain_hi, domain_lo_open=k.domain_lo_open, domain_hi_open=k.domain_hi_open)
    label = f"embed[{k.label},{slack}]"
    if k.pieces is not None and all(p.shape.kind == "constant" for p in k.pieces):
        pieces = [p.model_copy(update={"shape": Shape.constant(alpha_of(p.shape.params[0]))}) for p in k.pieces]
        alpha = ControlFunction.piecewise(pieces, label, RangeContract.ALPHA, **domain)
    else:
        alpha = ControlFunction.from_callable(lambda t: alpha_of(k(t)), label, RangeContract.ALPHA, **domain)
    return alpha, k


# perturbation and semicontinuity


def _split_description(description: Optional[MapDescription], x0: Point, G_x0: FiniteClosedSet) -> Optional[MapDescription]:
    if not isinstance(description, PiecewiseMapDescription) or x0.dim != 1 or G_x0.dim != 1:
        return None
    t = float(x0)
    point = Branch(lo=t, hi=t, lo_closed=True, hi_closed=True, images=[ConstantImage(value=float(g)) for g in G_x0])
    branches: List[Branch] = []
    for b in description.branches:
        if b.lo == b.hi:
            if abs(b.lo - t) > settings.tol:
                branches.append(b)
            continue
        if not b.contains(t):
            branches.append(b)
            continue
        if t > b.lo + settings.tol:
            branches.append(b.model_copy(update={"hi": t, "hi_closed": False}))
        if t < b.hi - settings.tol:
            branches.append(b.model_copy(update={"lo": t, "lo_closed": False}))
    branches.append(point)
    branches.sort(key=lambda b: (b.lo, b.hi))
    return PiecewiseMapDescription(label=f"{description.label}+perturbed", branches=branches)


def perturb_at(F: MultivaluedMap, x0, G_x0, m: Metric = EUCLIDEAN) -> MultivaluedMap:
    """G = F away from x0 and G(x0) = G_x0, which must lie strictly farther from x0 than F(x0)."""
    x0 = Point.coerce(x0)
    G_x0 = as_closed_set(G_x0)
    before = d_F(F, x0, m)
    after = dist_point_set(x0, G_x0, m)
    if before <= settings.tol:
        raise PerturbationError(f"{x0.coords} is a fixed point of {F.label}")
    if after - before <= settings.margin:
        raise PerturbationError(f"new value must raise dist(x0, .) strictly: {after} vs {before}")

    def evaluate(x: Point):
        return G_x0 if x.close_to(x0) else F.fn(x)

    logger.info("perturbed %s at %s: d jumps from %s to %s", F.label, x0.coords, before, after)
    return MultivaluedMap(
        label=f"{F.label}+perturbed",
        fn=evaluate,
        domain=F.domain,
        description=_split_description(F.description, x0, G_x0),
    )


def lower_semicontinuity_gap(
    h: Callable[[Point], float],
    x0,
    radius: float = 0.1,
    depth: Optional[int] = None,
    domain: Optional[Domain] = None,
) -> float:
    """h(x0) minus the liminf of h along x0 +- radius * 2**-j; positive means h drops at x0."""
    x0 = Point.coerce(x0)
    depth = settings.approach_depth if depth is None else depth
    base = x0.as_array()
    tail: List[float] = []
    for j in range(depth // 2, depth + 1):
        for axis in range(x0.dim):
            for sign in (1.0, -1.0):
                moved = base.copy()
                moved[axis] += sign * radius * 2.0 ** (-j)
                point = Point(coords=tuple(moved))
                if point.close_to(x0) or (domain is not None and not domain.contains(point)):
                    continue
                tail.append(float(h(point)))
    if not tail:
        raise ValueError("no approach point lies in the domain")
    return float(h(x0)) - min(tail)


def random_pairs(domain: Domain, n: int, rng: np.random.Generator) -> List[PointPair]:
    points = domain.random_points(2 * n, rng)
    return list(zip(points[::2], points[1::2]))


def random_starts(domain: Domain, n: int, rng: np.random.Generator) -> List[Point]:
    return domain.random_points(n, rng)
