from enum import Enum
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.control import ControlFunction
from models.multimap import MultivaluedMap


class CorpusTag(str, Enum):
    THEOREM = "theorem-compatible"
    REMARK = "remark"
    NON_THEOREM = "non-theorem"


class ExpectedFact(BaseModel):
    name: str
    value: Any
    provenance: Literal["PAPER", "DERIVED", "TRIVIAL"]
    rederived: bool = False


class ControlSet(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Optional[ControlFunction] = None
    beta: Optional[ControlFunction] = None
    gamma: Optional[ControlFunction] = None
    p: Optional[ControlFunction] = None
    k: Optional[ControlFunction] = None
    phi: Optional[ControlFunction] = None
    majorant_C: Optional[float] = None
    majorant_p: Optional[float] = None

    def labels(self) -> dict:
        named = {name: getattr(self, name) for name in ("alpha", "beta", "gamma", "p", "k", "phi")}
        out = {name: f.label for name, f in named.items() if f is not None}
        if self.majorant_C is not None:
            out["majorant"] = {"C": self.majorant_C, "p": self.majorant_p}
        return out


class CorpusEntry(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    mapping: MultivaluedMap
    controls: ControlSet = Field(default_factory=ControlSet)
    expected: List[ExpectedFact] = Field(default_factory=list)
    tag: CorpusTag = CorpusTag.THEOREM
    note: str = ""

    def fact(self, name: str) -> ExpectedFact:
        for item in self.expected:
            if item.name == name:
                return item
        raise KeyError(name)

    def summary(self) -> dict:
        return {
            "label": self.label,
            "tag": self.tag.value,
            "note": self.note,
            "controls": self.controls.labels(),
            "expected": [f.model_dump() for f in self.expected],
        }
