"""
Dispatch of an ExperimentConfig to the computational modules.

Exit codes: 0 when every verdict holds (or every trace converged), 1 when a
check is violated or an iteration fails, 2 when the configuration is unusable.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import orjson
from pydantic import ValidationError

from core.errors import ConfigError, ContractumError, MalformedModeError, TraceTooShortError
from models.control import ControlFunction
from models.corpus import ControlSet
from models.geometry import Point
from models.multimap import MultivaluedMap
from models.sampling import Grid
from models.trace import LimitCase, TheoremMode
from schemas.control import ControlSetSpec
from schemas.experiment import ExperimentConfig, RunOutcome
from schemas.multimap import MapDescriptionEnvelope
from services import export
from services.control import grid_points, p_from_gamma
from services.corpus import get_entry, verify_all_claims
from services.multimap import (
    check_ab_contraction,
    check_hausdorff_contraction,
    map_from_description,
    random_pairs,
    random_starts,
)
from services.solver import (
    classify_limit_case,
    iterate,
    probe_reich_variant,
    trace_invariants,
    validate_preconditions,
)
from services.summability import bound_check, export_csv, phi_power, phi_sequence, summability_verdict

logger = logging.getLogger(__name__)

CORPUS_PREFIX = "corpus:"
REICH_STARTS = 10


# sources


def _load_json(source: str) -> Any:
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"file not found: {source}")
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"{source} is not valid JSON: {exc}") from exc


def _corpus_label(source: str) -> Optional[str]:
    return source[len(CORPUS_PREFIX):] if source.startswith(CORPUS_PREFIX) else None


def _entry(label: str):
    try:
        return get_entry(label)
    except KeyError:
        raise ConfigError(f"unknown corpus entry: {label}") from None


def resolve_map(source: str) -> Tuple[MultivaluedMap, Optional[ControlSet]]:
    label = _corpus_label(source)
    if label is not None:
        entry = _entry(label)
        return entry.mapping, entry.controls
    try:
        parsed = MapDescriptionEnvelope.model_validate(_load_json(source))
    except ValidationError as exc:
        raise ConfigError(f"{source} is not a map description: {exc}") from exc
    try:
        return map_from_description(parsed.description, parsed.domain_step), None
    except (ValueError, ContractumError) as exc:
        raise ConfigError(f"{source} describes an unusable map: {exc}") from exc


def resolve_controls(source: Optional[str], fallback: Optional[ControlSet]) -> ControlSet:
    if source is None:
        if fallback is None:
            raise ConfigError("no controls given and the map carries none")
        return fallback
    label = _corpus_label(source)
    if label is not None:
        return _entry(label).controls
    try:
        spec = ControlSetSpec.model_validate(_load_json(source))
    except ValidationError as exc:
        raise ConfigError(f"{source} is not a controls file: {exc}") from exc
    try:
        built = {name: getattr(spec, name).build() for name in ("alpha", "beta", "gamma", "k") if getattr(spec, name) is not None}
        if "gamma" in built:
            built["p"] = p_from_gamma(built["gamma"])
    except (ValueError, ContractumError) as exc:
        raise ConfigError(f"{source} holds an unusable control function: {exc}") from exc
    return ControlSet(**built)


def _require_controls(controls: ControlSet, *names: str) -> List[ControlFunction]:
    missing = [n for n in names if getattr(controls, n) is None]
    if missing:
        raise ConfigError(f"controls lack {', '.join(missing)}")
    return [getattr(controls, n) for n in names]


def _grid(config: ExperimentConfig) -> Grid:
    spec = config.grid
    updates = {k: v for k, v in (("lo", spec.lo), ("hi", spec.hi), ("step", spec.step)) if v is not None}
    return Grid(**updates)


# commands


def _check_map(config: ExperimentConfig, rng: np.random.Generator) -> Tuple[bool, Dict[str, Any], List[Path]]:
    F, corpus_controls = resolve_map(config.map_source)
    controls = resolve_controls(config.controls_source, corpus_controls)
    alpha, beta = _require_controls(controls, "alpha", "beta")
    try:
        sample = F.domain.sample(config.sample_step)
    except ValueError as exc:
        raise ConfigError(f"cannot sample the domain of {F.label}: {exc}") from exc
    reports = {"ab_contraction": check_ab_contraction(F, alpha, beta, sample=sample)}
    if controls.k is not None and config.pairs:
        pairs = random_pairs(F.domain, config.pairs, rng)
        reports["hausdorff_k_contraction"] = check_hausdorff_contraction(F, controls.k, pair_sample=pairs)
    ok = all(r.holds for r in reports.values())
    return ok, {"map": F.label, "reports": {k: r.model_dump(mode="json") for k, r in reports.items()}}, []


def _iterate(config: ExperimentConfig, rng: np.random.Generator, out: Optional[Path]) -> Tuple[bool, Dict[str, Any], List[Path]]:
    F, corpus_controls = resolve_map(config.map_source)
    controls = resolve_controls(config.controls_source, corpus_controls)
    alpha, beta = _require_controls(controls, "alpha", "beta")
    starts = []
    if config.x0 is not None:
        x0 = Point.coerce(config.x0)
        if not F.domain.contains(x0):
            raise ConfigError(f"x0={x0.coords} lies outside the domain of {F.label}")
        starts.append(x0)
    starts += random_starts(F.domain, config.starts, rng)
    if not starts:
        raise ConfigError("iterate needs x0 or a positive number of random starts")

    C_sup = float(alpha.values(grid_points(alpha, _grid(config))).max())
    runs, files = [], []
    for i, x0 in enumerate(starts):
        trace = iterate(F, x0, alpha, beta, eps_fp=config.eps_fp, max_steps=config.max_steps)
        invariants = trace_invariants(trace, C_sup)
        try:
            case: Optional[LimitCase] = classify_limit_case(trace)
        except TraceTooShortError:
            case = None
        runs.append({
            "x0": export.coords_of(trace.x0),
            "steps": len(trace),
            "stop_reason": trace.stop_reason.value,
            "x_final": export.coords_of(trace.x_final),
            "d_F_final": trace.d_F_final,
            "case": case.value if case else None,
            "invariants": invariants.verdict.value,
        })
        if out is not None:
            files.append(export.write_trace_jsonl(out / f"trace_{i:03d}.jsonl", trace, case))
    ok = all(r["stop_reason"] == "converged" and r["invariants"] == "holds_on_sample" for r in runs)
    return ok, {"map": F.label, "C_sup_alpha": C_sup, "runs": runs}, files


def _verify_theorem(config: ExperimentConfig, rng: np.random.Generator) -> Tuple[bool, Dict[str, Any], List[Path]]:
    F, fallback = None, None
    if config.map_source is not None:
        F, fallback = resolve_map(config.map_source)
    controls = resolve_controls(config.controls_source, fallback)
    mode = TheoremMode(
        variant=config.mode, alpha=controls.alpha, beta=controls.beta, gamma=controls.gamma,
        C=config.C if config.C is not None else controls.majorant_C,
        p=config.p if config.p is not None else controls.majorant_p,
        neighborhood=config.neighborhood,
    )
    report = validate_preconditions(mode, _grid(config))
    body = {"preconditions": report.model_dump(mode="json")}
    if config.reich_experiment:
        # does not enter the exit code
        alpha, beta = _require_controls(controls, "alpha", "beta")
        starts = random_starts(F.domain, config.starts or REICH_STARTS, rng)
        outcome = probe_reich_variant(F, alpha, beta, starts, grid=_grid(config),
                                    eps_fp=config.eps_fp, max_steps=config.max_steps)
        body["reich_experiment"] = outcome.model_dump(mode="json")
    return report.holds, body, []


def _summability(config: ExperimentConfig, out: Optional[Path]) -> Tuple[bool, Dict[str, Any], List[Path]]:
    try:
        phi = phi_power(config.C, config.p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not phi.contains(config.t0) or config.t0 <= 0:
        raise ConfigError(f"t0={config.t0} lies outside the validity domain of {phi.label}")
    bound = bound_check(config.C, config.p, config.t0, config.N)
    seq = phi_sequence(phi, config.t0, config.N)
    verdict = summability_verdict(seq, config.criterion)
    files = [export_csv(seq, config.C, config.p, out / "summability.csv")] if out is not None else []
    body = {
        "bound_check": bound.model_dump(mode="json"),
        "summability": verdict.model_dump(mode="json"),
        "partial_sum": seq.total,
    }
    return bound.holds, body, files


def _example_ciric() -> Tuple[bool, Dict[str, Any], List[Path]]:
    claims = verify_all_claims()
    body = {"claims": [c.model_dump(mode="json") for c in claims], "text": "\n".join(c.as_text() for c in claims)}
    return all(c.holds for c in claims), body, []


def run(config: ExperimentConfig) -> RunOutcome:
    rng = np.random.default_rng(config.seed)
    out = Path(config.output) if config.output else None
    try:
        if config.command == "check-map":
            ok, body, files = _check_map(config, rng)
        elif config.command == "iterate":
            ok, body, files = _iterate(config, rng, out)
        elif config.command == "verify-theorem":
            ok, body, files = _verify_theorem(config, rng)
        elif config.command == "summability":
            ok, body, files = _summability(config, out)
        else:
            ok, body, files = _example_ciric()
    except (ConfigError, MalformedModeError) as exc:
        logger.error("configuration error: %s", exc)
        report = export.envelope(config.command, "config_error", {"error": str(exc)})
        return RunOutcome(exit_code=2, report=report, message=str(exc))

    verdict = "holds" if ok else "fails"
    report = export.envelope(config.command, verdict, {"seed": config.seed, **body})
    if out is not None:
        files = [export.write_report(out / "report.json", report)] + files
    logger.info("%s finished: %s", config.command, verdict)
    return RunOutcome(exit_code=0 if ok else 1, report=report, files=[str(f) for f in files])


def load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(_load_json(path))
    except ValidationError as exc:
        raise ConfigError(f"{path} is not an experiment config: {exc}") from exc
