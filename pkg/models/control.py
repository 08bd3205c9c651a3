"""
Control functions on the half line with optional piecewise descriptors.
"""
import math
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from core.errors import OutOfDomainError, RangeContractError


class RangeContract(str, Enum):
    ALPHA = "alpha"      # [1, inf)
    BETA = "beta"        # [0, 1)
    GAMMA = "gamma"      # [0, inf) on (0, 1]
    GENERIC = "generic"  # any finite value


CONTRACT_MESSAGES = {
    RangeContract.ALPHA: "not a [1,inf)-valued function",
    RangeContract.BETA: "not a [0,1)-valued function",
    RangeContract.GAMMA: "not a [0,inf)-valued function",
    RangeContract.GENERIC: "function takes a non-finite value",
}


def violates_contract(contract: RangeContract, value: float) -> bool:
    if not math.isfinite(value):
        return True
    tol = settings.tol
    if contract == RangeContract.ALPHA:
        return value < 1.0 - tol
    if contract == RangeContract.BETA:
        return value < -tol or value >= 1.0
    if contract == RangeContract.GAMMA:
        return value < -tol
    return False


class Shape(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "affine"]
    params: Tuple[float, ...]

    @model_validator(mode="after")
    def _arity(self):
        expected = 1 if self.kind == "constant" else 2
        if len(self.params) != expected:
            raise ValueError(f"{self.kind} shape takes {expected} parameter(s)")
        return self

    @classmethod
    def constant(cls, c: float) -> "Shape":
        return cls(kind="constant", params=(float(c),))

    @classmethod
    def affine(cls, a: float, b: float) -> "Shape":
        return cls(kind="affine", params=(float(a), float(b)))

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.params[0]
        a, b = self.params
        return a * t + b

    def extremes(self, lo: float, hi: float) -> Tuple[float, float]:
        """(inf, sup) over [lo, hi]; endpoint limits count for open ends."""
        if self.kind == "constant":
            c = self.params[0]
            return c, c
        slope = self.params[0]
        if math.isfinite(hi):
            far = self(hi)
        else:
            far = math.copysign(math.inf, slope) if slope else self(lo)
        near = self(lo)
        return min(near, far), max(near, far)


class Piece(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: Optional[float] = None  # None stands for +inf
    lo_closed: bool = True
    hi_closed: bool = False
    shape: Shape

    @model_validator(mode="after")
    def _ordered(self):
        if self.hi is not None and self.hi < self.lo:
            raise ValueError("piece upper end lies below its lower end")
        return self

    @property
    def upper(self) -> float:
        return math.inf if self.hi is None else self.hi

    @property
    def is_point(self) -> bool:
        return self.hi is not None and self.hi == self.lo

    def contains(self, t: float, tol: Optional[float] = None) -> bool:
        tol = settings.tol if tol is None else tol
        if self.is_point:
            return abs(t - self.lo) <= tol
        above = t >= self.lo - tol if self.lo_closed else t > self.lo + tol
        if self.hi is None:
            return above
        below = t <= self.hi + tol if self.hi_closed else t < self.hi - tol
        return above and below


class ControlFunction(BaseModel):
    """
    A numerical function of t >= 0 (gamma-type functions live on (0, 1]).

    Either `pieces` or `fn` defines the values; when pieces are present they
    are the single source of truth so window suprema can be computed exactly.
    The range contract is enforced on a sample at construction.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    range_contract: RangeContract = RangeContract.GENERIC
    pieces: Optional[Tuple[Piece, ...]] = None
    fn: Optional[Callable[[float], float]] = Field(default=None, exclude=True)
    domain_lo: float = 0.0
    domain_hi: Optional[float] = None
    domain_lo_open: bool = False
    domain_hi_open: bool = False

    @model_validator(mode="after")
    def _validate(self):
        if self.pieces is None and self.fn is None:
            raise ValueError("a control function needs pieces or a callable")
        if self.pieces is not None:
            if not self.pieces:
                raise ValueError("piece list is empty")
            self._check_partition()
        self.enforce_contract(self.range_contract, self.construction_sample())
        return self

    @cached_property
    def point_pieces(self) -> Tuple[Piece, ...]:
        return tuple(p for p in self.pieces or () if p.is_point)

    @cached_property
    def interval_pieces(self) -> Tuple[Piece, ...]:
        return tuple(p for p in self.pieces or () if not p.is_point)

    def _check_partition(self) -> None:
        ordered = sorted(self.pieces, key=lambda p: (p.lo, p.upper))
        tol = settings.tol
        for left, right in zip(ordered, ordered[1:]):
            if abs(left.upper - right.lo) > tol:
                raise ValueError(f"pieces leave a gap or overlap between {left.upper} and {right.lo}")
            if left.is_point and right.is_point:
                raise ValueError(f"two point pieces at {right.lo}")
            # a point piece owns its own location
            if (left.is_point or left.hi_closed) == (right.is_point or right.lo_closed):
                raise ValueError(f"boundary {right.lo} must belong to exactly one piece")

    # constructors

    @classmethod
    def constant(cls, c: float, label: str, contract: RangeContract = RangeContract.GENERIC, **domain) -> "ControlFunction":
        lo = domain.get("domain_lo", 0.0)
        piece = Piece(lo=lo, hi=domain.get("domain_hi"), lo_closed=not domain.get("domain_lo_open", False),
                      hi_closed=not domain.get("domain_hi_open", False) and domain.get("domain_hi") is not None,
                      shape=Shape.constant(c))
        return cls(label=label, range_contract=contract, pieces=(piece,), **domain)

    @classmethod
    def piecewise(cls, pieces: Sequence[Piece], label: str, contract: RangeContract = RangeContract.GENERIC, **domain) -> "ControlFunction":
        return cls(label=label, range_contract=contract, pieces=tuple(pieces), **domain)

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], label: str, contract: RangeContract = RangeContract.GENERIC, **domain) -> "ControlFunction":
        return cls(label=label, range_contract=contract, fn=fn, **domain)

    # domain and evaluation

    @property
    def upper(self) -> float:
        return math.inf if self.domain_hi is None else self.domain_hi

    def contains(self, t: float) -> bool:
        tol = settings.tol
        above = t > self.domain_lo + tol if self.domain_lo_open else t >= self.domain_lo - tol
        if self.domain_hi is None:
            return above
        below = t < self.domain_hi - tol if self.domain_hi_open else t <= self.domain_hi + tol
        return above and below

    def piece_at(self, t: float) -> Optional[Piece]:
        for piece in self.point_pieces:
            if piece.contains(t):
                return piece
        for piece in self.interval_pieces:
            if piece.contains(t):
                return piece
        return None

    def raw(self, t: float) -> float:
        """Evaluate without the domain check."""
        if self.pieces is not None:
            piece = self.piece_at(t)
            if piece is None:
                raise OutOfDomainError(f"{self.label}: no piece covers t={t}")
            return float(piece.shape(t))
        return float(self.fn(t))

    def __call__(self, t: float) -> float:
        if not self.contains(t):
            raise OutOfDomainError(f"{self.label} evaluated outside its domain at t={t}")
        return self.raw(t)

    def values(self, ts: Iterable[float]) -> np.ndarray:
        return np.fromiter((self(float(t)) for t in ts), dtype=float)

    def breakpoints(self) -> List[float]:
        if self.pieces is None:
            return []
        ends = {p.lo for p in self.pieces} | {p.hi for p in self.pieces if p.hi is not None}
        return sorted(ends)

    def construction_sample(self) -> np.ndarray:
        hi = max(self.domain_lo, settings.grid_max) if self.domain_hi is None else self.domain_hi
        ts = np.linspace(self.domain_lo, hi, 401)
        ts = np.unique(np.concatenate([ts, np.asarray([b for b in self.breakpoints() if math.isfinite(b)])]))
        return np.asarray([t for t in ts if self.contains(float(t))])

    def enforce_contract(self, contract: RangeContract, ts: Iterable[float]) -> None:
        for t in ts:
            value = self(float(t))
            if violates_contract(contract, value):
                raise RangeContractError(f"{CONTRACT_MESSAGES[contract]}: {self.label}({float(t)}) = {value}")

    # combinators

    def product(self, other: "ControlFunction", label: Optional[str] = None) -> "ControlFunction":
        first, second = self, other
        return ControlFunction.from_callable(
            lambda t: first(t) * second(t),
            label or f"{self.label}*{other.label}",
            RangeContract.GENERIC,
            domain_lo=max(self.domain_lo, other.domain_lo),
            domain_hi=None if self.domain_hi is None and other.domain_hi is None else min(self.upper, other.upper),
        )
