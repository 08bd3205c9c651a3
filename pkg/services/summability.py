"""
The phi_n recursion, the power-rate majorant and its explicit bound, and a
finite-data summability verdict.

Summability of phi_n cannot be decided from finitely many terms, so verdicts
are evidence only: a tail ratio bounded away from 1, or a fitted decay
exponent n**-e with e clearly above 1.
"""
import csv
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from core.config import settings
from core.errors import MajorantError, TraceTooShortError
from models.control import ControlFunction, RangeContract
from models.reports import PropertyKind, PropertyReport, Witness
from models.summability import PhiSequence, SummabilityCriterion, SummabilityReport, SummabilityVerdict
from models.trace import IterationTrace

logger = logging.getLogger(__name__)

RATIO_STABILITY = 0.9


def phi_power(C: float, p: float) -> ControlFunction:
    """t -> 1 - C t**p on its validity domain [0, C**(-1/p))."""
    if C <= 0:
        raise ValueError("C must be positive")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    edge = C ** (-1.0 / p)
    return ControlFunction.from_callable(
        lambda t: 1.0 - C * t ** p, f"1-{C}t^{p}", RangeContract.GENERIC,
        domain_lo=0.0, domain_hi=edge, domain_hi_open=True,
    )


def validity_edge(C: float, p: float) -> float:
    return C ** (-1.0 / p)


def phi_sequence(phi: ControlFunction, t0: float, N: int) -> PhiSequence:
    if N < 1:
        raise ValueError("N must be at least 1")
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    values = [float(t0)]
    truncated_at = None
    for n in range(N):
        current = values[-1]
        if current <= settings.tol:
            truncated_at = n
            break
        factor = phi(current)
        if not 0.0 < factor < 1.0:
            raise MajorantError(f"majorant leaves (0,1): {phi.label}({current}) = {factor} at n={n}")
        values.append(factor * current)
    if truncated_at is not None:
        logger.debug("phi sequence of %s truncated at n=%d", phi.label, truncated_at)
    return PhiSequence(phi=phi, t0=t0, values=values, partial_sums=np.cumsum(values).tolist(), truncated_at=truncated_at)


def power_bound(C: float, p: float, t0: float, n: np.ndarray) -> np.ndarray:
    """(pC n + t0**-p) ** (-1/p)."""
    return (p * C * np.asarray(n, dtype=float) + t0 ** (-p)) ** (-1.0 / p)


def bound_check(C: float, p: float, t0: float, N: int) -> PropertyReport:
    seq = phi_sequence(phi_power(C, p), t0, N)
    values = np.asarray(seq.values)
    n = np.arange(values.size)
    bounds = power_bound(C, p, t0, n)
    witnesses: List[Witness] = [
        Witness(input=(int(i),), value=float(values[i] - bounds[i]), detail="phi_n above the power bound")
        for i in np.flatnonzero(values > bounds + settings.tol)
    ]
    increments = np.diff(values ** (-p))
    witnesses.extend(
        Witness(input=(int(i),), value=float(increments[i]), detail=f"increment not above pC={p * C}")
        for i in np.flatnonzero(increments <= p * C - settings.margin)
    )
    report = PropertyReport.build(PropertyKind.PHI_BOUND, witnesses, C=C, p=p, t0=t0, N=N,
                                  terms=len(seq), truncated_at=seq.truncated_at)
    logger.info("power bound C=%s p=%s t0=%s over %d terms: %s", C, p, t0, len(seq), report.verdict.value)
    return report


def _fit_exponent(values: np.ndarray) -> float:
    n = np.arange(values.size)
    tail = n[max(1, values.size // 2):]
    tail = tail[values[tail] > 0]
    slope, _ = np.polyfit(np.log(tail), np.log(values[tail]), 1)
    return float(-slope)


def summability_verdict(seq: PhiSequence, criterion: SummabilityCriterion = SummabilityCriterion.TAIL_RATIO) -> SummabilityReport:
    values = np.asarray(seq.values)
    if values.size < settings.min_phi_terms and seq.truncated_at is None:
        raise TraceTooShortError(f"{values.size} terms are too few for a summability verdict")
    if values.size < 3:
        raise TraceTooShortError("a summability verdict needs at least three terms")

    ratios = values[1:] / values[:-1]
    tail = ratios[ratios.size // 2:]
    max_ratio = float(tail.max())
    if criterion == SummabilityCriterion.TAIL_RATIO:
        settled = (1.0 - tail[-1]) / (1.0 - tail[0]) >= RATIO_STABILITY if tail[0] < 1.0 else False
        if max_ratio <= 1.0 - settings.margin and settled:
            return SummabilityReport(verdict=SummabilityVerdict.SUMMABLE, criterion=SummabilityCriterion.TAIL_RATIO,
                                     max_tail_ratio=max_ratio, terms=values.size, truncated_at=seq.truncated_at)

    exponent = _fit_exponent(values)
    if exponent > 1.0 + settings.exponent_margin:
        verdict = SummabilityVerdict.SUMMABLE
    elif exponent <= 1.0:
        verdict = SummabilityVerdict.DIVERGING
    else:
        verdict = SummabilityVerdict.INCONCLUSIVE
    logger.info("summability of %s: %s (exponent %.4f)", seq.phi.label, verdict.value, exponent)
    return SummabilityReport(verdict=verdict, criterion=SummabilityCriterion.BOUND_FIT, max_tail_ratio=max_ratio,
                             exponent=exponent, terms=values.size, truncated_at=seq.truncated_at)


def check_trace_majorant(trace: IterationTrace, phi: ControlFunction) -> PropertyReport:
    """d_F(x_{n+1}) <= phi(d_F(x_n)) d_F(x_n) along a trace."""
    witnesses = [
        Witness(input=(n,), value=step.d_F_y - phi(step.d_F_x) * step.d_F_x, detail="d_F above the majorant")
        for n, step in enumerate(trace.steps)
        if step.d_F_y > phi(step.d_F_x) * step.d_F_x + settings.tol
    ]
    return PropertyReport.build(PropertyKind.TRACE_MAJORANT, witnesses, phi=phi.label, steps=len(trace.steps))


def export_csv(seq: PhiSequence, C: Optional[float], p: Optional[float], path: Union[str, Path]) -> Path:
    """Columns n, phi_n, bound_n, partial_sum; bound_n is empty without (C, p)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = np.arange(len(seq))
    bounds = power_bound(C, p, seq.t0, n) if C is not None and p is not None else [None] * len(seq)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "phi_n", "bound_n", "partial_sum"])
        for i, value, bound, total in zip(n, seq.values, bounds, seq.partial_sums):
            writer.writerow([int(i), repr(value), "" if bound is None else repr(float(bound)), repr(total)])
    logger.info("wrote %d phi terms to %s", len(seq), path)
    return path
