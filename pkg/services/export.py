"""
Report, trace and envelope writers. Reports are serialised with sorted keys so
the same experiment yields the same bytes.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import orjson

from core.config import settings
from models.trace import IterationTrace, LimitCase

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def envelope(command: str, verdict: str, body: Dict[str, Any]) -> Dict[str, Any]:
    return {"schema": settings.report_schema, "command": command, "verdict": verdict, **body}


def dumps(payload: Any) -> bytes:
    return orjson.dumps(payload, option=JSON_OPTIONS)


def write_report(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(payload) + b"\n")
    logger.info("report written to %s", path)
    return path


def coords_of(point) -> Union[float, List[float]]:
    return point.coords[0] if point.dim == 1 else list(point.coords)


def trace_records(trace: IterationTrace, case: Optional[LimitCase] = None) -> List[Dict[str, Any]]:
    """One record per step and a closing summary record."""
    records = [
        {
            "n": n,
            "x": coords_of(step.x),
            "y": coords_of(step.y),
            "d_n": step.d_xy,
            "dF_x": step.d_F_x,
            "dF_y": step.d_F_y,
            "marginA": step.condition_A_margin,
            "marginB": step.condition_B_margin,
        }
        for n, step in enumerate(trace.steps)
    ]
    records.append({
        "summary": True,
        "x0": coords_of(trace.x0),
        "x_final": coords_of(trace.x_final),
        "steps": len(trace.steps),
        "stop_reason": trace.stop_reason.value,
        "d_F_final": trace.d_F_final,
        "delta_est": trace.delta_est,
        "nabla_est": trace.nabla_est,
        "case": case.value if case is not None else None,
    })
    return records


def write_trace_jsonl(path: Union[str, Path], trace: IterationTrace, case: Optional[LimitCase] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [orjson.dumps(record, option=orjson.OPT_SORT_KEYS) for record in trace_records(trace, case)]
    path.write_bytes(b"\n".join(lines) + b"\n")
    return path
