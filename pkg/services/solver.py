"""
Hypothesis validation, the Picard-type iteration, trace diagnostics and
fixed-point verification.
"""
import logging
import math
from collections import Counter
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.config import settings
from core.errors import MalformedModeError, RangeContractError, SelectionError, TraceTooShortError
from core.parallel import fan_out
from models.control import ControlFunction
from models.geometry import EUCLIDEAN, Metric, Point
from models.multimap import MultivaluedMap, SelectionRecord
from models.reports import HypothesisCheck, PreconditionReport, PropertyKind, PropertyReport, Verdict, Witness
from models.sampling import Grid
from models.trace import IterationTrace, LimitCase, ReichProbeReport, StopReason, TheoremMode, TheoremVariant
from services.control import (
    alpha_bound_from,
    check_bounded,
    check_essentially_positive,
    check_MT,
    check_nonincreasing,
    check_R,
    grid_points,
    p_from_gamma,
)
from services.multimap import d_F, select_step

logger = logging.getLogger(__name__)

REQUIRED_INPUTS = {
    TheoremVariant.T14: ("alpha", "beta", "gamma"),
    TheoremVariant.T15: ("alpha", "beta"),
    TheoremVariant.T16: ("alpha", "beta", "C", "p"),
}


# preconditions


def _from_report(label: str, report: PropertyReport) -> HypothesisCheck:
    return HypothesisCheck(
        label=label,
        verdict=report.verdict,
        witness=report.witnesses[0] if report.witnesses else None,
        detail=f"{report.property.value} on {report.parameters.get('label', '')}".strip(),
    )


def _from_witnesses(label: str, witnesses: List[Witness], detail: str) -> HypothesisCheck:
    return HypothesisCheck(
        label=label,
        verdict=Verdict.VIOLATED if witnesses else Verdict.HOLDS,
        witness=witnesses[0] if witnesses else None,
        detail=detail,
    )


def _mt_or_range(label: str, f: ControlFunction, grid: Grid) -> HypothesisCheck:
    try:
        return _from_report(label, check_MT(f, grid))
    except RangeContractError as exc:
        return HypothesisCheck(label=label, verdict=Verdict.VIOLATED, witness=Witness(input=(), value=1.0, detail=str(exc)), detail=str(exc))


def _check_mode_inputs(mode: TheoremMode) -> None:
    missing = [name for name in REQUIRED_INPUTS[mode.variant] if getattr(mode, name) is None]
    if missing:
        raise MalformedModeError(f"{mode.variant.value} needs {', '.join(missing)}")
    if mode.variant == TheoremVariant.T16:
        if mode.C <= 0:
            raise MalformedModeError("C must be positive")
        if not 0 < mode.p < 1:
            raise MalformedModeError("p must lie in (0, 1)")
        if mode.neighborhood <= 0:
            raise MalformedModeError("the neighbourhood of 0 must have positive radius")


def _t14_checks(mode: TheoremMode, grid: Grid) -> List[HypothesisCheck]:
    alpha, beta, gamma = mode.alpha, mode.beta, mode.gamma
    checks = [_mt_or_range("beta_has_MT", beta, grid)]

    bound = alpha_bound_from(beta, gamma, grid)
    over = [
        Witness(input=(t,), value=alpha(t) - bound(t), detail="alpha above 1 + gamma(1 - beta)")
        for t in map(float, grid_points(alpha, grid, beta))
        if alpha(t) > bound(t) + settings.tol
    ]
    checks.append(_from_witnesses("alpha_below_gamma_bound", over, "alpha(t) <= 1 + gamma(1 - beta(t))"))

    unit = Grid(lo=0.0, hi=1.0, step=grid.step)
    checks.append(_from_report("gamma_bounded", check_bounded(gamma, unit)))

    near_zero = [2.0 ** (-j) for j in range(60, 81) if gamma.contains(2.0 ** (-j))]
    tail = [Witness(input=(s,), value=gamma(s), detail="gamma not vanishing at 0") for s in near_zero if gamma(s) >= settings.margin]
    checks.append(_from_witnesses("gamma_limit_zero", tail, "gamma(s) -> 0 as s -> 0"))

    checks.append(_from_report("p_essentially_positive", check_essentially_positive(p_from_gamma(gamma), sample=unit)))
    return checks


def _t15_checks(mode: TheoremMode, grid: Grid) -> List[HypothesisCheck]:
    product = mode.alpha.product(mode.beta)
    return [
        _mt_or_range("product_has_MT", product, grid),
        _from_report("alpha_nonincreasing", check_nonincreasing(mode.alpha, grid)),
    ]


def _t16_checks(mode: TheoremMode, grid: Grid) -> List[HypothesisCheck]:
    alpha, beta, C, p = mode.alpha, mode.beta, mode.C, mode.p
    checks = [_from_report("alpha_bounded", check_bounded(alpha, grid))]
    ts = [t for t in map(float, grid_points(alpha, grid, beta)) if 0.0 < t <= mode.neighborhood + settings.tol]
    over = [
        Witness(input=(t,), value=alpha(t) * beta(t) - (1.0 - C * t ** p), detail="alpha*beta above 1 - C t^p")
        for t in ts
        if alpha(t) * beta(t) > 1.0 - C * t ** p + settings.tol
    ]
    checks.append(_from_witnesses("power_majorant_near_zero", over, f"alpha*beta <= 1 - {C} t^{p} on (0, {mode.neighborhood}]"))
    return checks


def validate_preconditions(mode: TheoremMode, grid: Optional[Grid] = None) -> PreconditionReport:
    _check_mode_inputs(mode)
    grid = grid or Grid()
    if mode.variant == TheoremVariant.T14:
        checks = _t14_checks(mode, grid)
    elif mode.variant == TheoremVariant.T15:
        checks = _t15_checks(mode, grid)
    else:
        checks = _t16_checks(mode, grid)

    alpha_values = mode.alpha.values(grid_points(mode.alpha, grid))
    overall = Verdict.HOLDS if all(c.verdict == Verdict.HOLDS for c in checks) else Verdict.VIOLATED
    report = PreconditionReport(mode=mode.variant.value, checks=checks, overall=overall, C_sup_alpha=float(alpha_values.max()))
    logger.info("%s preconditions: %s", mode.variant.value, overall.value)
    return report


# iteration


def _tail_estimates(steps: List[SelectionRecord], d_F_final: float) -> Tuple[float, float]:
    if not steps:
        return d_F_final, d_F_final
    quartile = steps[-max(1, len(steps) // 4):]
    return d_F_final, min(s.d_xy for s in quartile)


def iterate(
    F: MultivaluedMap,
    x0,
    alpha: ControlFunction,
    beta: ControlFunction,
    m: Metric = EUCLIDEAN,
    eps_fp: Optional[float] = None,
    max_steps: Optional[int] = None,
) -> IterationTrace:
    eps_fp = settings.eps_fp if eps_fp is None else eps_fp
    max_steps = settings.max_steps if max_steps is None else max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")

    x0 = Point.coerce(x0)
    x, current = x0, d_F(F, x0, m)
    steps: List[SelectionRecord] = []
    while True:
        if current <= eps_fp:
            reason = StopReason.CONVERGED
            break
        if len(steps) >= max_steps:
            reason = StopReason.MAX_STEPS
            break
        try:
            record = select_step(F, x, alpha, beta, m)
        except SelectionError as exc:
            logger.debug("selection failed at %s: %s", x.coords, exc)
            reason = StopReason.SELECTION_FAILED
            break
        steps.append(record)
        x, previous, current = record.y, current, record.d_F_y
        if current >= previous + settings.tol:
            reason = StopReason.MONOTONICITY_VIOLATED
            break

    delta, nabla = _tail_estimates(steps, current)
    trace = IterationTrace(x0=x0, x_final=x, steps=steps, d_F_final=current, delta_est=delta, nabla_est=nabla, stop_reason=reason)
    logger.info("iteration of %s from %s: %s after %d steps (d_F=%s)", F.label, x0.coords, reason.value, len(steps), current)
    return trace


def trace_invariants(trace: IterationTrace, C_sup_alpha: float, steps_nonincreasing: bool = False) -> PropertyReport:
    """
    Per step: chaining, condition (B_n), strict decrease of d_F while it exceeds
    the margin, and d_F(x_n) <= d_n <= C d_F(x_n). Optionally d_n nonincreasing.
    """
    tol, margin = settings.tol, settings.margin
    witnesses: List[Witness] = []
    for n, step in enumerate(trace.steps):
        if step.condition_B_margin < -tol:
            witnesses.append(Witness(input=(n,), value=step.condition_B_margin, detail="condition (B_n)"))
        if step.d_F_x > margin and step.d_F_y >= step.d_F_x:
            witnesses.append(Witness(input=(n,), value=step.d_F_y - step.d_F_x, detail="d_F not decreasing"))
        if step.d_F_x > step.d_xy + tol:
            witnesses.append(Witness(input=(n,), value=step.d_xy - step.d_F_x, detail="d_n below d_F(x_n)"))
        if step.d_xy > C_sup_alpha * step.d_F_x + tol:
            witnesses.append(Witness(input=(n,), value=C_sup_alpha * step.d_F_x - step.d_xy, detail="d_n above C d_F(x_n)"))
        if n + 1 < len(trace.steps):
            following = trace.steps[n + 1]
            if not step.y.close_to(following.x):
                witnesses.append(Witness(input=(n,), value=math.inf, detail="steps do not chain"))
            if steps_nonincreasing and following.d_xy >= step.d_xy + tol:
                witnesses.append(Witness(input=(n + 1,), value=following.d_xy - step.d_xy, detail="d_n increased"))
    return PropertyReport.build(PropertyKind.TRACE_INVARIANTS, witnesses, C_sup_alpha=C_sup_alpha,
                                steps=len(trace.steps), steps_nonincreasing=steps_nonincreasing)


def classify_limit_case(trace: IterationTrace) -> LimitCase:
    """
    Delta is the last d_F value, nabla the smallest step of the final quartile.
    Delta and nabla count as equal when they differ by no more than the margin
    plus the spread of d_F over that quartile. A converged trace is case III.
    """
    if len(trace.steps) < settings.min_trace_len and not trace.converged:
        raise TraceTooShortError(f"{len(trace.steps)} steps are too few to estimate the limits")
    delta, nabla = trace.delta_est, trace.nabla_est
    if trace.converged or delta <= settings.margin:
        return LimitCase.CASE_III
    values = trace.d_F_values()
    quartile = values[-max(2, len(values) // 4):]
    spread = max(quartile) - min(quartile)
    return LimitCase.CASE_II if nabla - delta <= settings.margin + spread else LimitCase.CASE_I


def verify_fixed_point(F: MultivaluedMap, x_star, m: Metric = EUCLIDEAN, tol: Optional[float] = None) -> bool:
    tol = settings.eps_fp if tol is None else tol
    return d_F(F, x_star, m) <= tol


# tail diagnostics


def fit_geometric_tail(trace: IterationTrace) -> Tuple[float, Optional[int]]:
    """
    Least-squares ratio q of d_F(x_n) over the last half of the trace and the
    first index N from which d_F(x_n) <= d_F(x_0) q**n holds for good.
    """
    values = np.asarray(trace.d_F_values(), dtype=float)
    n = np.arange(values.size)
    positive = values > 0
    tail = n[positive][n[positive] >= values.size // 2]
    if tail.size < 2:
        raise TraceTooShortError("a geometric fit needs two positive tail values")
    slope, _ = np.polyfit(tail, np.log(values[tail]), 1)
    q = float(np.exp(slope))
    if q >= 1.0:
        return q, None
    envelope = values[0] * q ** n
    holds = values <= envelope + settings.tol
    if not holds[-1]:
        return q, None
    failing = np.flatnonzero(~holds)
    return q, int(failing[-1] + 1) if failing.size else 0


def cauchy_tail_bound(trace: IterationTrace, C_sup_alpha: float, q: float, start: int = 0) -> PropertyReport:
    """Sum of d_k over k >= n against C d_F(x_n) / (1 - q) for every n >= start."""
    if not 0.0 <= q < 1.0:
        raise ValueError("q must lie in [0, 1)")
    steps = np.asarray(trace.step_lengths(), dtype=float)
    d_F_values = np.asarray([s.d_F_x for s in trace.steps], dtype=float)
    tails = np.cumsum(steps[::-1])[::-1]
    bounds = C_sup_alpha * d_F_values / (1.0 - q)
    witnesses = [
        Witness(input=(n,), value=float(tails[n] - bounds[n]), detail="tail sum above C d_F / (1 - q)")
        for n in range(start, steps.size)
        if tails[n] > bounds[n] + settings.tol
    ]
    remaining = C_sup_alpha * trace.d_F_final / (1.0 - q)
    return PropertyReport.build(PropertyKind.CAUCHY_TAIL, witnesses, q=q, C_sup_alpha=C_sup_alpha, start=start,
                                total=float(steps.sum()), remaining_bound=remaining)


def probe_reich_variant(
    F: MultivaluedMap,
    alpha: ControlFunction,
    beta: ControlFunction,
    starts: Sequence,
    m: Metric = EUCLIDEAN,
    grid: Optional[Grid] = None,
    eps_fp: Optional[float] = None,
    max_steps: Optional[int] = None,
) -> ReichProbeReport:
    """
    Desk-scale search for behaviour when beta only has (R): report both
    properties and how iterations from the given starts end.
    """
    grid = grid or Grid()
    verdicts = {}
    for name, check in (("R", check_R), ("MT", check_MT)):
        try:
            verdicts[name] = check(beta, grid).verdict.value
        except RangeContractError as exc:
            verdicts[name] = f"range_violation: {exc}"

    traces = fan_out(lambda x0: iterate(F, x0, alpha, beta, m, eps_fp, max_steps), [Point.coerce(s) for s in starts])
    reasons = Counter(t.stop_reason.value for t in traces)
    return ReichProbeReport(
        map_label=F.label,
        beta_R=verdicts["R"],
        beta_MT=verdicts["MT"],
        runs=len(traces),
        converged=reasons.get(StopReason.CONVERGED.value, 0),
        stop_reasons=dict(sorted(reasons.items())),
        max_final_d_F=max((t.d_F_final for t in traces), default=0.0),
    )
