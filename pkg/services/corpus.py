"""
Built-in maps and controls: the three-branch example with its claim
verifications, and the standard corpus (a linear contraction, a two-point
Hausdorff contraction, a one-point perturbation and a stalling map).
"""
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.config import settings
from core.errors import CorpusValidationError
from models.control import ControlFunction, Piece, RangeContract, Shape
from models.corpus import ControlSet, CorpusEntry, CorpusTag, ExpectedFact
from models.geometry import EUCLIDEAN, FiniteClosedSet, Metric, Point
from models.multimap import BoxDomain, MultivaluedMap
from models.reports import ClaimReport, ClaimStep, ClaimVerdict, Witness
from models.sampling import Grid
from models.trace import TheoremMode, TheoremVariant
from schemas.multimap import Branch, ConstantImage, LinearImage, PiecewiseMapDescription
from services.control import alpha_bound_from, p_from_gamma
from services.multimap import (
    check_ab_contraction,
    check_ab_mapping,
    check_hausdorff_contraction,
    d_F,
    embed_hausdorff,
    map_from_description,
    perturb_at,
    random_pairs,
)
from services.solver import validate_preconditions

logger = logging.getLogger(__name__)

THIRD = 1.0 / 3.0
EXAMPLE17_BREAKPOINTS = (0.0, 1.0 / 3.0, 0.5, 0.75, 5.0 / 6.0, 1.0)
LOAD_SEED = 17


# rendering


def exact(value: float) -> str:
    """A small fraction when one lies within tol of the value, else the float."""
    guess = Fraction(value).limit_denominator(1000)
    return str(guess) if abs(float(guess) - value) <= settings.tol else repr(value)


def _step(label: str, lhs: str, relation: str, rhs: str, lhs_value: float, rhs_value: float) -> ClaimStep:
    tol, margin = settings.tol, settings.margin
    holds = {
        "<=": lhs_value <= rhs_value + tol,
        "<": rhs_value - lhs_value > margin,
        ">=": lhs_value >= rhs_value - tol,
        ">": lhs_value - rhs_value > margin,
    }[relation]
    return ClaimStep(
        label=label,
        lhs=f"{lhs} = {exact(lhs_value)}",
        relation=relation,
        rhs=f"{rhs} = {exact(rhs_value)}",
        lhs_value=lhs_value,
        rhs_value=rhs_value,
        holds=holds,
        equality_case=abs(lhs_value - rhs_value) <= tol,
    )


def _claim(claim: str, statement: str, steps: List[ClaimStep], facts: dict, extra_ok: bool = True) -> ClaimReport:
    verdict = ClaimVerdict.HOLDS if extra_ok and all(s.holds for s in steps) else ClaimVerdict.FAILS
    report = ClaimReport(claim=claim, statement=statement, verdict=verdict, steps=steps, facts=facts)
    logger.info("claim %s: %s", claim, verdict.value)
    return report


# controls


def _constant_pieces(spec: Sequence[tuple]) -> List[Piece]:
    """(lo, hi, lo_closed, hi_closed, value) tuples to constant pieces."""
    return [Piece(lo=lo, hi=hi, lo_closed=lc, hi_closed=hc, shape=Shape.constant(v)) for lo, hi, lc, hc, v in spec]


def constant_control(c: float, label: str, contract: RangeContract) -> ControlFunction:
    return ControlFunction.constant(c, label, contract)


def identity_gamma() -> ControlFunction:
    piece = Piece(lo=0.0, hi=1.0, lo_closed=False, hi_closed=True, shape=Shape.affine(1.0, 0.0))
    return ControlFunction.piecewise([piece], "gamma=s", RangeContract.GAMMA, domain_lo=0.0, domain_hi=1.0, domain_lo_open=True)


def zero_gamma() -> ControlFunction:
    return ControlFunction.constant(0.0, "gamma=0", RangeContract.GAMMA, domain_lo=0.0, domain_hi=1.0, domain_lo_open=True)


def ciric_case(beta: ControlFunction) -> ControlSet:
    """gamma(s) = s, hence alpha = 2 - beta."""
    gamma = identity_gamma()
    alpha = alpha_bound_from(beta, gamma)
    return ControlSet(alpha=alpha, beta=beta, gamma=gamma, p=p_from_gamma(gamma))


def proximinal_case(beta: ControlFunction) -> ControlSet:
    """gamma = 0, alpha = 1, p(s) = s."""
    gamma = zero_gamma()
    return ControlSet(alpha=constant_control(1.0, "alpha=1", RangeContract.ALPHA), beta=beta, gamma=gamma, p=p_from_gamma(gamma))


def example_17_controls() -> ControlSet:
    alpha = ControlFunction.piecewise(
        _constant_pieces([(0.0, 0.5, True, True, 4 / 3), (0.5, None, False, False, 8 / 3)]),
        "alpha", RangeContract.ALPHA,
    )
    beta = ControlFunction.piecewise(
        _constant_pieces([
            (0.0, THIRD, True, True, 2 / 3),
            (THIRD, 0.5, False, True, 0.5),
            (0.5, None, False, False, THIRD),
        ]),
        "beta", RangeContract.BETA,
    )
    gamma = ControlFunction.piecewise(
        _constant_pieces([
            (0.0, THIRD, False, False, 0.0),
            (THIRD, THIRD, True, True, THIRD),
            (THIRD, 0.5, False, False, 0.0),
            (0.5, 0.5, True, True, THIRD),
            (0.5, 2 / 3, False, False, 0.0),
            (2 / 3, 2 / 3, True, True, 5 / 3),
            (2 / 3, 1.0, False, True, 0.0),
        ]),
        "gamma", RangeContract.GAMMA, domain_lo=0.0, domain_hi=1.0, domain_lo_open=True,
    )
    p = p_from_gamma(gamma).model_copy(update={"label": "p"})
    return ControlSet(alpha=alpha, beta=beta, gamma=gamma, p=p)


def example_17_description() -> PiecewiseMapDescription:
    return PiecewiseMapDescription(
        label="example17",
        branches=[
            Branch(lo=0.0, hi=0.75, lo_closed=True, hi_closed=False, images=[LinearImage(a=2 / 3)]),
            Branch(lo=0.75, hi=1.0, lo_closed=True, hi_closed=False, images=[ConstantImage(value=0.5)]),
            Branch(lo=1.0, hi=1.0, lo_closed=True, hi_closed=True, images=[ConstantImage(value=THIRD), ConstantImage(value=0.75)]),
        ],
    )


# fixed points


def branch_fixed_points(description: PiecewiseMapDescription) -> List[float]:
    """Exact solutions of x = image(x) inside each branch."""
    found = []
    for branch in description.branches:
        for image in branch.images:
            if isinstance(image, ConstantImage):
                candidate: Optional[float] = image.value
            elif image.a != 1.0:
                candidate = image.b / (1.0 - image.a)
            else:
                candidate = branch.lo if image.b == 0.0 else None
            if candidate is not None and branch.contains(candidate):
                found.append(candidate)
    return found


def scan_fixed_points(F: MultivaluedMap, step: float = 1e-4, m: Metric = EUCLIDEAN) -> List[Point]:
    """Grid zeros of d_F plus, for piecewise maps, the exact branch solutions."""
    candidates = [x for x in F.domain.sample(step) if d_F(F, x, m) <= settings.tol]
    if isinstance(F.description, PiecewiseMapDescription):
        candidates.extend(Point.of(x) for x in branch_fixed_points(F.description) if d_F(F, x, m) <= settings.tol)
    if not candidates:
        return []
    return list(FiniteClosedSet.of(candidates).points)


# entries


def _require(condition: bool, message: str, witnesses: Optional[List[Witness]] = None) -> None:
    if not condition:
        raise CorpusValidationError(message, witnesses)


def example_17() -> CorpusEntry:
    F = map_from_description(example_17_description(), domain_step=1e-3)
    controls = example_17_controls()
    alpha, beta, gamma = controls.alpha, controls.beta, controls.gamma

    fixed = [float(x) for x in scan_fixed_points(F, 1e-4)]
    _require(fixed == [0.0], f"example17 fixed points re-derived as {fixed}")
    mismatched = [
        Witness(input=(x,), value=alpha(x) - (1.0 + gamma(1.0 - beta(x))))
        for x in EXAMPLE17_BREAKPOINTS + (2 / 3,)
        if abs(alpha(x) - (1.0 + gamma(1.0 - beta(x)))) > settings.tol
    ]
    _require(not mismatched, "alpha differs from 1 + gamma(1 - beta) at a breakpoint", mismatched)

    expected = [
        ExpectedFact(name="F(1)", value=["1/3", "3/4"], provenance="PAPER"),
        ExpectedFact(name="F(0.9)", value=["1/2"], provenance="PAPER"),
        ExpectedFact(name="fixed_points", value=fixed, provenance="DERIVED", rederived=True),
        ExpectedFact(name="alpha=1+gamma(1-beta)", value=True, provenance="DERIVED", rederived=True),
    ]
    return CorpusEntry(label="example17", mapping=F, controls=controls, expected=expected,
                       note="three-branch map, an (alpha,beta)-contraction but not a (2-beta,beta) one")


def _browder() -> CorpusEntry:
    description = PiecewiseMapDescription(
        label="browder", branches=[Branch(lo=0.0, hi=1.0, lo_closed=True, hi_closed=True, images=[LinearImage(a=2 / 3)])]
    )
    F = map_from_description(description, domain_step=1e-3)
    k = constant_control(2 / 3, "k=2/3", RangeContract.BETA)
    phi = ControlFunction.piecewise([Piece(lo=0.0, shape=Shape.affine(2 / 3, 0.0))], "phi=2t/3")
    controls = ControlSet(
        alpha=constant_control(1.0, "alpha=1", RangeContract.ALPHA), beta=k, k=k, phi=phi,
        majorant_C=THIRD, majorant_p=0.5,
    )
    fixed = [float(x) for x in scan_fixed_points(F, 1e-3)]
    expected = [
        ExpectedFact(name="fixed_points", value=fixed, provenance="TRIVIAL", rederived=True),
        ExpectedFact(name="k", value="2/3", provenance="TRIVIAL"),
    ]
    return CorpusEntry(label="browder", mapping=F, controls=controls, expected=expected,
                       note="singlevalued f(x)=2x/3 with phi(t)=2t/3")


def _hausdorff_two_point() -> CorpusEntry:
    description = PiecewiseMapDescription(
        label="hausdorff-two-point",
        branches=[Branch(lo=0.0, hi=1.0, lo_closed=True, hi_closed=True, images=[LinearImage(a=0.5), LinearImage(a=0.25, b=0.25)])],
    )
    F = map_from_description(description, domain_step=1e-3)
    k = constant_control(0.75, "k=3/4", RangeContract.BETA)
    alpha, beta = embed_hausdorff(k, 0.5)
    fixed = [float(x) for x in scan_fixed_points(F, 1e-3)]
    expected = [
        ExpectedFact(name="fixed_points", value=fixed, provenance="DERIVED", rederived=True),
        ExpectedFact(name="k", value="3/4", provenance="DERIVED"),
    ]
    return CorpusEntry(label="hausdorff-two-point", mapping=F, controls=ControlSet(alpha=alpha, beta=beta, k=k),
                       expected=expected, note="F(x)={x/2, x/4+1/4}, a Hausdorff 3/4-contraction")


def _remark31(browder: CorpusEntry) -> CorpusEntry:
    F = browder.mapping
    G = perturb_at(F, 0.5, [0.0])
    before, after = d_F(F, 0.5), d_F(G, 0.5)
    expected = [
        ExpectedFact(name="d_F(1/2)", value=exact(before), provenance="DERIVED", rederived=True),
        ExpectedFact(name="d_G(1/2)", value=exact(after), provenance="DERIVED", rederived=True),
    ]
    return CorpusEntry(label="remark31", mapping=G, controls=browder.controls, expected=expected, tag=CorpusTag.REMARK,
                       note="browder map moved to G(1/2)={0}: d_G stably positive, not lower semicontinuous")


def stall_beta() -> ControlFunction:
    """1/2 up to 0.3, then 1 - (t - 0.3)**2 / 2 (capped), so beta -> 1 as t -> 0.3 from the right."""
    def beta(t: float) -> float:
        if t <= 0.3:
            return 0.5
        return 1.0 - 0.5 * min((t - 0.3) ** 2, 1.0)

    return ControlFunction.from_callable(beta, "beta_stall", RangeContract.BETA)


def _stall() -> CorpusEntry:
    def step(x: Point) -> List[float]:
        t = float(x)
        return [t + 0.3 * (1.0 + 1.0 / (1.0 + abs(t)))]

    F = MultivaluedMap(label="stall", fn=step, domain=BoxDomain(lo=(0.0,), hi=(1e6,), step=1e3))
    controls = ControlSet(alpha=constant_control(1.0, "alpha=1", RangeContract.ALPHA), beta=stall_beta())
    expected = [ExpectedFact(name="limit_case", value="case_II", provenance="DERIVED")]
    return CorpusEntry(label="stall", mapping=F, controls=controls, expected=expected, tag=CorpusTag.NON_THEOREM,
                       note="violates (MT): d_F decreases to 0.3 and never reaches 0")


def _validate_theorem_entry(entry: CorpusEntry) -> None:
    F, controls = entry.mapping, entry.controls
    rng = np.random.default_rng(LOAD_SEED)
    if controls.k is not None:
        pairs = random_pairs(F.domain, 100, rng)
        report = check_hausdorff_contraction(F, controls.k, pair_sample=pairs)
        _require(report.holds, f"{entry.label} is not a Hausdorff {controls.k.label}-contraction", report.witnesses)
    report = check_ab_contraction(F, controls.alpha, controls.beta, sample=F.domain.sample(1e-2))
    _require(report.holds, f"{entry.label} fails its (alpha,beta)-contraction check", report.witnesses)


def standard_corpus() -> List[CorpusEntry]:
    browder = _browder()
    _validate_theorem_entry(browder)
    entries = [browder]
    try:
        two_point = _hausdorff_two_point()
        _validate_theorem_entry(two_point)
        entries.append(two_point)
    except CorpusValidationError as exc:
        logger.warning("rejected corpus entry hausdorff-two-point: %s", exc)
    entries.append(_remark31(browder))
    entries.append(_stall())
    return entries


@lru_cache(maxsize=1)
def corpus_registry() -> Dict[str, CorpusEntry]:
    entries = [example_17()] + standard_corpus()
    logger.info("corpus loaded: %s", ", ".join(e.label for e in entries))
    return {e.label: e for e in entries}


def get_entry(label: str) -> CorpusEntry:
    registry = corpus_registry()
    if label not in registry:
        raise KeyError(label)
    return registry[label]


# claim verifications


def verify_claim_1() -> ClaimReport:
    """At x=1 neither image works for any (2 - beta, beta)."""
    F = get_entry("example17").mapping
    x = Point.of(1.0)
    d_F_x = d_F(F, x)

    near = Point.of(0.75)
    d_near = EUCLIDEAN(x, near)
    forced_beta = d_F(F, near) / d_near

    far = Point.of(THIRD)
    d_far = EUCLIDEAN(x, far)
    forced_alpha = d_far / d_F_x

    steps = [
        _step("y=3/4: (B) forces beta(1/4) >= d_F(3/4)/d(1,3/4)", "required beta(1/4)", ">=", "1", forced_beta, 1.0),
        _step("y=1/3: (A) forces alpha(2/3) >= d(1,1/3)/d_F(1)", "required alpha(2/3)", ">", "sup(2 - beta)", forced_alpha, 2.0),
    ]
    facts = {"d_F(1)": exact(d_F_x), "forced_beta(1/4)": exact(forced_beta), "forced_alpha(2/3)": exact(forced_alpha)}
    return _claim("claim-1", "F is not a (2-beta, beta)-contraction", steps, facts)


def verify_claim_2() -> ClaimReport:
    """No constant alpha = a > 1 works."""
    entry = get_entry("example17")
    F = entry.mapping

    x = Point.of(0.5)
    images = F(x)
    y = images.points[0]
    d_xy = EUCLIDEAN(x, y)
    d_F_y = d_F(F, y)
    beta_floor = d_F_y / d_xy
    a_upper = 1.0 / beta_floor

    one = Point.of(1.0)
    a_lower = EUCLIDEAN(one, Point.of(THIRD)) / d_F(F, one)
    beta_at_quarter = d_F(F, Point.of(0.75)) / EUCLIDEAN(one, Point.of(0.75))

    steps = [
        _step("x=1/2 has the single image 1/3", "|F(1/2)|", "<=", "1", float(len(images)), 1.0),
        _step("x=1/2: (B) forces beta(1/6) >= d_F(1/3)/d(1/2,1/3)", "required beta(1/6)", ">=", "2/3", beta_floor, 2 / 3),
        _step("a beta(1/6) < 1 with beta(1/6) >= 2/3 caps a", "a upper bound", "<=", "3/2", a_upper, 1.5),
        _step("x=1, y=3/4 forces beta(1/4) >= 1", "required beta(1/4)", ">=", "1", beta_at_quarter, 1.0),
        _step("x=1, y=1/3 forces a >= 8/3, beyond the cap", "required a", ">", "a upper bound", a_lower, a_upper),
    ]

    sweep = {}
    for a in (1.1, 1.2, 1.3, 1.4):
        alpha = constant_control(a, f"alpha={a}", RangeContract.ALPHA)
        sweep[str(a)] = check_ab_mapping(F, alpha, entry.controls.beta, sample=F.domain.sample(1e-2)).verdict.value
    facts = {
        "d(1/2,1/3)": exact(d_xy),
        "d_F(1/3)": exact(d_F_y),
        "forced_beta(1/6)": exact(beta_floor),
        "a_upper": exact(a_upper),
        "a_lower": exact(a_lower),
        "feasible_a": "empty",
        "constant_alpha_sweep": sweep,
    }
    sweep_ok = all(v == "violated" for v in sweep.values())
    return _claim("claim-2", "F is not an (a, beta)-contraction for any constant a > 1", steps, facts, sweep_ok)


def _grid_step(label: str, lhs: str, rhs: str, xs: Sequence[float], lhs_fn, rhs_fn, strict: bool) -> ClaimStep:
    """Worst case of lhs(x) against rhs(x) over the grid points xs."""
    gaps = [lhs_fn(x) - rhs_fn(x) for x in xs]
    worst = int(np.argmax(gaps))
    x = xs[worst]
    return _step(f"{label} (worst at x={exact(x)})", lhs, "<" if strict else "<=", rhs, lhs_fn(x), rhs_fn(x))


def verify_claim_3() -> ClaimReport:
    """F is an (alpha, beta)-contraction and the controls satisfy the T14 hypotheses."""
    entry = get_entry("example17")
    F, controls = entry.mapping, entry.controls
    alpha, beta = controls.alpha, controls.beta

    grid = Grid(lo=0.0, hi=1.0, step=1e-3, extra=EXAMPLE17_BREAKPOINTS)
    xs = [float(x) for x in grid.points()]
    contraction = check_ab_contraction(F, alpha, beta, sample=xs)
    preconditions = validate_preconditions(
        TheoremMode(variant=TheoremVariant.T14, alpha=alpha, beta=beta, gamma=controls.gamma)
    )

    def dF(x: float) -> float:
        return d_F(F, x)

    one = Point.of(1.0)
    d = EUCLIDEAN(one, Point.of(THIRD))
    linear = [x for x in xs if x < 0.75 - settings.tol]
    middle = [x for x in xs if 0.75 - settings.tol <= x <= 5 / 6 + settings.tol]
    upper = [x for x in xs if 5 / 6 + settings.tol < x < 1.0 - settings.tol]
    positive_linear = [x for x in linear if x > settings.tol]

    steps = [
        _step("x=1, y=1/3: (A)", "d(1,1/3)", "<=", "alpha(2/3) d_F(1)", d, alpha(d) * dF(1.0)),
        _step("x=1, y=1/3: (B)", "d_F(1/3)", "<=", "beta(2/3) d(1,1/3)", dF(THIRD), beta(d) * d),
        _grid_step("0 < x < 3/4: (A)", "x/3", "alpha(x/3) x/3", positive_linear,
                   lambda x: x - 2 * x / 3, lambda x: alpha(x - 2 * x / 3) * dF(x), strict=True),
        _grid_step("0 <= x < 3/4: (B)", "2x/9", "(2/3)(x/3)", linear,
                   lambda x: dF(2 * x / 3), lambda x: beta(x - 2 * x / 3) * (x - 2 * x / 3), strict=False),
        _grid_step("3/4 <= x <= 5/6: (B)", "1/6", "(2/3)(x-1/2)", middle,
                   lambda x: dF(0.5), lambda x: beta(x - 0.5) * (x - 0.5), strict=False),
        _grid_step("5/6 < x < 1: (B)", "1/6", "(1/2)(x-1/2)", upper,
                   lambda x: dF(0.5), lambda x: beta(x - 0.5) * (x - 0.5), strict=True),
        _step("x=3/4: both branch readings give y=1/2", "2(3/4)/3", "<=", "1/2", 2 * 0.75 / 3, float(F(0.75).points[0])),
        _step("sampled max of alpha beta", "max alpha beta", "<", "1", contraction.max_product or 0.0, 1.0),
    ]
    facts = {
        "contraction": contraction.verdict.value,
        "preconditions_T14": preconditions.overall.value,
        "checked_points": contraction.checked,
        "max_product": exact(contraction.max_product or 0.0),
    }
    return _claim("claim-3", "F is an (alpha, beta)-contraction meeting the T14 hypotheses", steps, facts,
                  contraction.holds and preconditions.holds)


def verify_all_claims() -> List[ClaimReport]:
    return [verify_claim_1(), verify_claim_2(), verify_claim_3()]
