from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from models.control import ControlFunction, Piece, RangeContract, Shape


class ShapeSpec(BaseModel):
    kind: Literal["constant", "affine"]
    params: List[float]


class PieceSpec(BaseModel):
    lo: float
    hi: Optional[float] = None
    lo_closed: bool = True
    hi_closed: bool = False
    shape: ShapeSpec


class ControlFunctionSpec(BaseModel):
    """JSON description of a piecewise control function."""

    label: str
    range_contract: RangeContract = RangeContract.GENERIC
    pieces: List[PieceSpec] = Field(min_length=1)
    domain_lo: float = 0.0
    domain_hi: Optional[float] = None
    domain_lo_open: bool = False
    domain_hi_open: bool = False

    def build(self) -> ControlFunction:
        pieces = [
            Piece(lo=p.lo, hi=p.hi, lo_closed=p.lo_closed, hi_closed=p.hi_closed,
                  shape=Shape(kind=p.shape.kind, params=tuple(p.shape.params)))
            for p in self.pieces
        ]
        return ControlFunction.piecewise(
            pieces, self.label, self.range_contract,
            domain_lo=self.domain_lo, domain_hi=self.domain_hi,
            domain_lo_open=self.domain_lo_open, domain_hi_open=self.domain_hi_open,
        )

    @classmethod
    def describe(cls, f: ControlFunction) -> "ControlFunctionSpec":
        if f.pieces is None:
            raise ValueError(f"{f.label} has no piece descriptors and cannot be serialised")
        return cls(
            label=f.label,
            range_contract=f.range_contract,
            pieces=[
                PieceSpec(lo=p.lo, hi=p.hi, lo_closed=p.lo_closed, hi_closed=p.hi_closed,
                          shape=ShapeSpec(kind=p.shape.kind, params=list(p.shape.params)))
                for p in f.pieces
            ],
            domain_lo=f.domain_lo, domain_hi=f.domain_hi,
            domain_lo_open=f.domain_lo_open, domain_hi_open=f.domain_hi_open,
        )


class ControlSetSpec(BaseModel):
    """Controls file accepted by the CLI: any subset of alpha, beta, gamma, k."""

    alpha: Optional[ControlFunctionSpec] = None
    beta: Optional[ControlFunctionSpec] = None
    gamma: Optional[ControlFunctionSpec] = None
    k: Optional[ControlFunctionSpec] = None
