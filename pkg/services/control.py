"""
Property checkers for control functions and the derived constructions
(p from gamma, the alpha bound, the polynomial gamma family).

(MT) and (R) are lim-sup conditions and cannot be decided from point
queries; they are checked as semi-decision procedures. For every grid point t
the supremum over the window (t, t + window] must stay at or below 1 - margin.
With declared pieces that supremum is exact, otherwise it is sampled on a
uniform sub-grid plus points t + window * 2**-j approaching t from the right.
"""
import logging
import math
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from core.config import settings
from core.errors import HypothesisError, RangeContractError
from models.control import CONTRACT_MESSAGES, ControlFunction, Piece, RangeContract, Shape, violates_contract
from models.geometry import EUCLIDEAN, Metric, Point
from models.reports import PropertyKind, PropertyReport, Witness
from models.sampling import BallSampling, Grid
from services.metric_core import neighborhood_inf

logger = logging.getLogger(__name__)

DEFAULT_A_GRID = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0)
WINDOW_SUBDIVISIONS = 20


def grid_points(f: ControlFunction, grid: Optional[Grid] = None, *others: ControlFunction) -> np.ndarray:
    """Grid points inside f's domain, with every declared breakpoint added."""
    grid = grid or Grid()
    extra = list(grid.extra)
    for g in (f,) + others:
        extra.extend(b for b in g.breakpoints() if math.isfinite(b))
    ts = grid.model_copy(update={"extra": tuple(extra)}).points()
    return np.asarray([t for t in ts if f.contains(float(t)) and all(g.contains(float(t)) for g in others)])


# window suprema


def exact_window_sup(f: ControlFunction, t: float, window: float) -> Optional[float]:
    """Sup of f over (t, t + window] from the piece shapes; None if no piece meets the window."""
    if f.pieces is None:
        raise ValueError(f"{f.label} has no piece descriptors")
    tol = settings.tol
    right = t + window
    best: Optional[float] = None
    for piece in f.pieces:
        if piece.is_point:
            if t + tol < piece.lo <= right + tol:
                value = piece.shape(piece.lo)
                best = value if best is None else max(best, value)
            continue
        lo, hi = max(piece.lo, t), min(piece.upper, right)
        if hi - lo <= tol:
            continue
        _, sup = piece.shape.extremes(lo, hi)
        best = sup if best is None else max(best, sup)
    return best


def sampled_window_sup(f: ControlFunction, t: float, window: float, depth: Optional[int] = None) -> Optional[float]:
    depth = settings.approach_depth if depth is None else depth
    uniform = [t + window * k / WINDOW_SUBDIVISIONS for k in range(1, WINDOW_SUBDIVISIONS + 1)]
    approach = [t + window * 2.0 ** (-j) for j in range(1, depth + 1)]
    values = [f(s) for s in uniform + approach if f.contains(s)]
    return max(values) if values else None


def window_sup(f: ControlFunction, t: float, window: float) -> Optional[float]:
    if f.pieces is not None:
        return exact_window_sup(f, t, window)
    return sampled_window_sup(f, t, window)


def _require_unit_interval(f: ControlFunction, ts: Iterable[float]) -> None:
    for t in ts:
        value = f(float(t))
        if violates_contract(RangeContract.BETA, value):
            raise RangeContractError(f"{CONTRACT_MESSAGES[RangeContract.BETA]}: {f.label}({float(t)}) = {value}")


def _limsup_report(kind: PropertyKind, f: ControlFunction, ts: np.ndarray, window: float, grid: Grid) -> PropertyReport:
    _require_unit_interval(f, ts)
    ceiling = 1.0 - settings.margin
    witnesses: List[Witness] = []
    for t in ts:
        sup = window_sup(f, float(t), window)
        if sup is None:
            continue
        if violates_contract(RangeContract.BETA, sup) and sup > 1.0:
            raise RangeContractError(f"{CONTRACT_MESSAGES[RangeContract.BETA]}: sup of {f.label} near {float(t)} is {sup}")
        if sup > ceiling:
            witnesses.append(Witness(input=(float(t),), value=sup, detail=f"sup over (t, t+{window}]"))
    report = PropertyReport.build(kind, witnesses, grid=grid.describe(), window=window,
                                  exact=f.pieces is not None, label=f.label)
    logger.info("%s check of %s: %s (%d witnesses)", kind.value, f.label, report.verdict.value, len(witnesses))
    return report


def check_MT(f: ControlFunction, grid: Optional[Grid] = None, window: Optional[float] = None) -> PropertyReport:
    grid = grid or Grid()
    window = settings.mt_window if window is None else window
    return _limsup_report(PropertyKind.MT, f, grid_points(f, grid), window, grid)


def check_R(f: ControlFunction, grid: Optional[Grid] = None, window: Optional[float] = None) -> PropertyReport:
    grid = (grid or Grid()).model_copy(update={"include_lo": False})
    window = settings.mt_window if window is None else window
    ts = grid_points(f, grid)
    ts = ts[ts > settings.tol]
    return _limsup_report(PropertyKind.R, f, ts, window, grid)


# infima and essential positivity


def exact_inf(h: ControlFunction, lo: float, hi: float) -> Optional[float]:
    """Inf of h over [lo, hi] from the piece shapes."""
    if h.pieces is None:
        raise ValueError(f"{h.label} has no piece descriptors")
    tol = settings.tol
    best: Optional[float] = None
    for piece in h.pieces:
        if piece.is_point:
            if lo - tol <= piece.lo <= hi + tol:
                value = piece.shape(piece.lo)
                best = value if best is None else min(best, value)
            continue
        left, right = max(piece.lo, lo), min(piece.upper, hi)
        if right - left > tol or (abs(right - left) <= tol and piece.contains(left)):
            inf, _ = piece.shape.extremes(left, right)
            best = inf if best is None else min(best, inf)
    return best


def sampled_inf(h: ControlFunction, lo: float, hi: float, sample: Optional[Grid] = None) -> Optional[float]:
    grid = (sample or Grid(hi=hi)).model_copy(update={"lo": lo, "hi": hi, "include_lo": True})
    ts = grid_points(h, grid)
    if ts.size == 0:
        return None
    return float(h.values(ts).min())


def check_essentially_positive(h: ControlFunction, a_grid: Optional[Sequence[float]] = None, sample: Optional[Grid] = None) -> PropertyReport:
    sample = sample or Grid()
    t_max = min(h.upper, sample.hi)
    ts = grid_points(h, sample.restricted(hi=t_max))
    for t in ts:
        if h(float(t)) < -settings.tol:
            raise RangeContractError(f"not a nonnegative function: {h.label}({float(t)}) = {h(float(t))}")

    a_values = [a for a in (a_grid or DEFAULT_A_GRID) if 0 < a <= t_max]
    witnesses: List[Witness] = []
    for a in a_values:
        inf = exact_inf(h, a, t_max) if h.pieces is not None else sampled_inf(h, a, t_max, sample)
        if inf is not None and inf <= settings.margin:
            witnesses.append(Witness(input=(a,), value=inf, detail=f"inf over [{a}, {t_max}]"))
    report = PropertyReport.build(PropertyKind.ESSENTIALLY_POSITIVE, witnesses, a_grid=a_values, t_max=t_max,
                                  sample=sample.describe(), label=h.label)
    logger.info("essential positivity of %s: %s", h.label, report.verdict.value)
    return report


# stable positivity


def check_stably_positive(
    h: Callable[[Point], float],
    domain_sample: Sequence[Point],
    r: float,
    m: Metric = EUCLIDEAN,
    min_radius: Optional[float] = None,
) -> PropertyReport:
    """
    For every sampled x with h(x) > margin some ball around x must keep a positive
    sampled infimum. Radii r, r/2, r/4, ... are tried down to min_radius; each ball
    sample holds the domain points inside it, a lattice of a quarter radius and
    points approaching x geometrically, all clipped to the sample's bounding box.
    """
    if r <= 0:
        raise ValueError("neighbourhood radius must be positive")
    points = [Point.coerce(p) for p in domain_sample]
    if not points:
        raise ValueError("stable positivity needs a nonempty domain sample")
    min_radius = settings.margin if min_radius is None else min_radius
    margin = settings.margin

    coords = np.asarray([p.coords for p in points])
    bounds = (tuple(coords.min(axis=0)), tuple(coords.max(axis=0)))
    witnesses: List[Witness] = []
    for x in points:
        if h(x) <= margin:
            continue
        nearby = m.pairwise(x.as_array()[None, :], coords)[0]
        radius, best = r, -math.inf
        while radius >= min_radius:
            inside = tuple(points[i] for i in np.flatnonzero(nearby <= radius))
            sampling = BallSampling(step=radius / 4, points=inside, approach_depth=settings.approach_depth, bounds=bounds)
            inf = neighborhood_inf(h, x, radius, sampling, m)
            best = max(best, inf)
            if inf > margin:
                break
            radius /= 2
        else:
            witnesses.append(Witness(input=x.coords, value=best, detail=f"no sampled ball down to radius {min_radius} keeps h positive"))

    report = PropertyReport.build(PropertyKind.STABLY_POSITIVE, witnesses, radius=r, min_radius=min_radius, sample_size=len(points))
    logger.info("stable positivity on %d points: %s", len(points), report.verdict.value)
    return report


# monotonicity and boundedness


def check_nonincreasing(f: ControlFunction, grid: Optional[Grid] = None) -> PropertyReport:
    grid = grid or Grid()
    ts = grid_points(f, grid)
    values = f.values(ts)
    witnesses = [
        Witness(input=(float(ts[i]), float(ts[i + 1])), value=float(values[i + 1] - values[i]), detail="increase")
        for i in range(len(ts) - 1)
        if values[i + 1] > values[i] + settings.tol
    ]
    return PropertyReport.build(PropertyKind.NONINCREASING, witnesses, grid=grid.describe(), label=f.label)


def check_bounded(f: ControlFunction, grid: Optional[Grid] = None, bound: float = math.inf) -> PropertyReport:
    grid = grid or Grid()
    ts = grid_points(f, grid)
    values = f.values(ts)
    witnesses = [
        Witness(input=(float(t),), value=float(v), detail=f"exceeds {bound}")
        for t, v in zip(ts, values)
        if not math.isfinite(v) or v > bound
    ]
    return PropertyReport.build(PropertyKind.BOUNDED, witnesses, grid=grid.describe(), label=f.label,
                                sup=float(values.max()) if values.size else None)


# derived constructions


def p_from_gamma(gamma: ControlFunction) -> ControlFunction:
    """p(s) = s - (1 - s) * gamma(s); constant gamma pieces become affine p pieces."""
    label = f"p[{gamma.label}]"
    domain = dict(domain_lo=gamma.domain_lo, domain_hi=gamma.domain_hi,
                  domain_lo_open=gamma.domain_lo_open, domain_hi_open=gamma.domain_hi_open)
    if gamma.pieces is not None and all(piece.shape.kind == "constant" for piece in gamma.pieces):
        pieces = [
            piece.model_copy(update={"shape": Shape.affine(1.0 + piece.shape.params[0], -piece.shape.params[0])})
            for piece in gamma.pieces
        ]
        return ControlFunction.piecewise(pieces, label, RangeContract.GENERIC, **domain)
    return ControlFunction.from_callable(lambda s: s - (1.0 - s) * gamma(s), label, RangeContract.GENERIC, **domain)


def alpha_bound_from(beta: ControlFunction, gamma: ControlFunction, grid: Optional[Grid] = None) -> ControlFunction:
    """t -> 1 + gamma(1 - beta(t)); gamma only ever sees arguments in (0, 1]."""
    for t in grid_points(beta, grid):
        if beta(float(t)) >= 1.0:
            raise RangeContractError(f"{CONTRACT_MESSAGES[RangeContract.BETA]}: {beta.label}({float(t)}) >= 1")

    def bound(t: float) -> float:
        s = 1.0 - beta(t)
        if s <= 0.0:
            logger.warning("%s evaluated at %s outside (0, 1]", gamma.label, s)
        return 1.0 + gamma(s)

    return ControlFunction.from_callable(
        bound, f"1+{gamma.label}(1-{beta.label})", RangeContract.ALPHA,
        domain_lo=beta.domain_lo, domain_hi=beta.domain_hi,
        domain_lo_open=beta.domain_lo_open, domain_hi_open=beta.domain_hi_open,
    )


def gamma_poly_family(m: int) -> ControlFunction:
    """gamma(s) = s + s**2 + ... + s**m on (0, 1]."""
    if m < 1:
        raise ValueError("the polynomial gamma family starts at m = 1")
    powers = tuple(range(1, m + 1))
    return ControlFunction.from_callable(
        lambda s: float(sum(s ** k for k in powers)), f"gamma_poly[{m}]", RangeContract.GAMMA,
        domain_lo=0.0, domain_hi=1.0, domain_lo_open=True,
    )


def check_power_floor(p: ControlFunction, exponent: float, grid: Optional[Grid] = None) -> PropertyReport:
    """p(s) >= s**exponent - tol at every grid point of p's domain."""
    grid = grid or Grid(hi=1.0)
    ts = grid_points(p, grid)
    witnesses = [
        Witness(input=(float(s),), value=p(float(s)) - float(s) ** exponent, detail=f"below s^{exponent}")
        for s in ts
        if p(float(s)) < float(s) ** exponent - settings.tol
    ]
    return PropertyReport.build(PropertyKind.POWER_BOUND, witnesses, exponent=exponent, grid=grid.describe(), label=p.label)


def lemma21_certificate(alpha: ControlFunction, beta: ControlFunction, gamma: ControlFunction, grid: Optional[Grid] = None) -> PropertyReport:
    """
    alpha * beta <= 1 - p(1 - beta) pointwise, then (MT) for the product.
    Raises HypothesisError when alpha exceeds 1 + gamma(1 - beta) somewhere.
    """
    grid = grid or Grid()
    ts = grid_points(alpha, grid, beta)
    bound = alpha_bound_from(beta, gamma, grid)
    for t in ts:
        if alpha(float(t)) > bound(float(t)) + settings.tol:
            raise HypothesisError(f"hypothesis (2) fails: {alpha.label}({float(t)}) = {alpha(float(t))} > {bound(float(t))}")

    p = p_from_gamma(gamma)
    witnesses: List[Witness] = []
    for t in ts:
        t = float(t)
        product = alpha(t) * beta(t)
        majorant = 1.0 - p(1.0 - beta(t))
        if product > majorant + settings.tol:
            witnesses.append(Witness(input=(t,), value=product - majorant, detail="product above 1 - p(1 - beta)"))

    product = alpha.product(beta)
    try:
        mt = check_MT(product, grid)
        witnesses.extend(mt.witnesses)
        mt_verdict = mt.verdict.value
    except RangeContractError as exc:
        witnesses.append(Witness(input=(), value=1.0, detail=str(exc)))
        mt_verdict = "range_violation"
    return PropertyReport.build(PropertyKind.PRODUCT_MAJORANT, witnesses, grid=grid.describe(), product_mt=mt_verdict,
                                labels=[alpha.label, beta.label, gamma.label])


def q_epsilon(alpha: ControlFunction, beta: ControlFunction, p: Optional[ControlFunction], eps: float, grid: Optional[Grid] = None) -> float:
    """
    Sampled sup of alpha * beta over {t : alpha(t) >= 1 + eps}; -inf when that set
    misses the grid. With p given, each product must respect 1 - p(1 - beta(t)).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    best = -math.inf
    for t in grid_points(alpha, grid, beta):
        t = float(t)
        if alpha(t) < 1.0 + eps - settings.tol:
            continue
        product = alpha(t) * beta(t)
        if p is not None and product > 1.0 - p(1.0 - beta(t)) + settings.tol:
            raise HypothesisError(f"product {product} at t={t} exceeds 1 - p(1 - beta(t))")
        best = max(best, product)
    return best
