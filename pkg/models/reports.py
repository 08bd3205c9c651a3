"""
Machine-readable verdicts shared by all checkers.
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class Verdict(str, Enum):
    HOLDS = "holds_on_sample"
    VIOLATED = "violated"


class PropertyKind(str, Enum):
    R = "R"
    MT = "MT"
    ESSENTIALLY_POSITIVE = "essentially_positive"
    STABLY_POSITIVE = "stably_positive"
    NONINCREASING = "nonincreasing"
    BOUNDED = "bounded"
    PRODUCT_MAJORANT = "product_majorant"
    TRACE_INVARIANTS = "trace_invariants"
    POWER_BOUND = "power_bound"
    CAUCHY_TAIL = "cauchy_tail"
    PHI_BOUND = "phi_bound"
    TRACE_MAJORANT = "trace_majorant"


class Witness(BaseModel):
    input: Tuple[float, ...]
    value: float
    detail: str = ""


def sorted_witnesses(witnesses: List[Witness]) -> List[Witness]:
    return sorted(witnesses, key=lambda w: (w.input, w.detail))


class PropertyReport(BaseModel):
    property: PropertyKind
    verdict: Verdict
    witnesses: List[Witness] = Field(default_factory=list)
    parameters: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _witnessed(self):
        if self.verdict == Verdict.VIOLATED and not self.witnesses:
            raise ValueError("a violated report needs at least one witness")
        return self

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.HOLDS

    @classmethod
    def build(cls, kind: PropertyKind, witnesses: List[Witness], **parameters: Any) -> "PropertyReport":
        return cls(
            property=kind,
            verdict=Verdict.VIOLATED if witnesses else Verdict.HOLDS,
            witnesses=sorted_witnesses(witnesses),
            parameters=parameters,
        )


class MapCheckKind(str, Enum):
    AB_MAPPING = "ab_mapping"
    AB_CONTRACTION = "ab_contraction"
    HAUSDORFF_K_CONTRACTION = "hausdorff_k_contraction"


class MapCheckReport(BaseModel):
    kind: MapCheckKind
    verdict: Verdict
    witnesses: List[Witness] = Field(default_factory=list)
    sample: Dict[str, Any] = Field(default_factory=dict)
    checked: int = 0
    max_product: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.HOLDS


class HypothesisCheck(BaseModel):
    label: str
    verdict: Verdict
    witness: Optional[Witness] = None
    detail: str = ""


class PreconditionReport(BaseModel):
    mode: str
    checks: List[HypothesisCheck]
    overall: Verdict
    C_sup_alpha: float

    @property
    def holds(self) -> bool:
        return self.overall == Verdict.HOLDS

    def check(self, label: str) -> HypothesisCheck:
        for item in self.checks:
            if item.label == label:
                return item
        raise KeyError(label)


class ClaimVerdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"


class ClaimStep(BaseModel):
    """One recomputed inequality; exact values are rendered as fractions."""

    label: str
    lhs: str
    relation: str
    rhs: str
    lhs_value: float
    rhs_value: float
    holds: bool
    equality_case: bool = False


class ClaimReport(BaseModel):
    claim: str
    statement: str
    verdict: ClaimVerdict
    steps: List[ClaimStep] = Field(default_factory=list)
    facts: Dict[str, Any] = Field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == ClaimVerdict.HOLDS

    def step(self, label: str) -> ClaimStep:
        for item in self.steps:
            if item.label == label:
                return item
        raise KeyError(label)

    def as_text(self) -> str:
        lines = [f"[{self.claim}] {self.statement}: {self.verdict.value}"]
        for s in self.steps:
            mark = "ok" if s.holds else "FAILED"
            extra = " (equality)" if s.equality_case else ""
            lines.append(f"  - {s.label}: {s.lhs} {s.relation} {s.rhs} [{mark}]{extra}")
        return "\n".join(lines)
