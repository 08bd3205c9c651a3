import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import HypothesisError, OutOfDomainError, RangeContractError
from models.control import ControlFunction, Piece, RangeContract, Shape
from models.geometry import Point
from models.reports import PropertyKind, Verdict
from models.sampling import Grid
from schemas.control import ControlFunctionSpec
from services.control import (
    alpha_bound_from,
    check_bounded,
    check_essentially_positive,
    check_MT,
    check_nonincreasing,
    check_power_floor,
    check_R,
    check_stably_positive,
    exact_window_sup,
    gamma_poly_family,
    lemma21_certificate,
    p_from_gamma,
    q_epsilon,
    sampled_window_sup,
)
from services.corpus import example_17_controls, identity_gamma


SMALL_GRID = Grid(hi=1.0, step=0.01)


def constant(c, contract=RangeContract.GENERIC):
    return ControlFunction.constant(c, f"const={c}", contract)


@st.composite
def piecewise_betas(draw):
    """Piecewise-constant [0,1)-valued functions, some of them hugging 1."""
    cuts = draw(st.lists(st.floats(min_value=0.05, max_value=1.5), min_size=0, max_size=3, unique=True))
    cuts = sorted(c for c in cuts if all(abs(c - o) > 1e-3 for o in cuts if o != c))
    levels = st.one_of(st.floats(min_value=0.0, max_value=0.99), st.just(1.0 - 1e-10))
    values = [draw(levels) for _ in range(len(cuts) + 1)]
    ends = [0.0] + cuts
    pieces = [
        Piece(lo=lo, hi=hi, lo_closed=i == 0, hi_closed=True, shape=Shape.constant(v))
        for i, (lo, hi, v) in enumerate(zip(ends, cuts, values))
    ]
    pieces.append(Piece(lo=ends[-1], lo_closed=not cuts, shape=Shape.constant(values[-1])))
    return ControlFunction.piecewise(pieces, "drawn", RangeContract.BETA)


class TestConstruction:
    def test_range_contract_rejects_one(self):
        with pytest.raises(RangeContractError, match=r"not a \[0,1\)-valued function"):
            ControlFunction.from_callable(lambda s: 1.0 - min(s, 0.5), "f", RangeContract.BETA)

    def test_alpha_contract(self):
        with pytest.raises(RangeContractError):
            constant(0.5, RangeContract.ALPHA)

    def test_overlapping_pieces_rejected(self):
        with pytest.raises(ValueError):
            ControlFunction.piecewise(
                [Piece(lo=0.0, hi=1.0, hi_closed=True, shape=Shape.constant(0.1)),
                 Piece(lo=1.0, lo_closed=True, shape=Shape.constant(0.2))],
                "overlap",
            )

    def test_gap_rejected(self):
        with pytest.raises(ValueError, match="gap"):
            ControlFunction.piecewise(
                [Piece(lo=0.0, hi=1.0, shape=Shape.constant(0.1)), Piece(lo=1.5, shape=Shape.constant(0.2))],
                "gap",
            )

    def test_example_values(self):
        controls = example_17_controls()
        alpha, beta, gamma, p = controls.alpha, controls.beta, controls.gamma, controls.p
        assert alpha(0.5) == pytest.approx(4 / 3)
        assert alpha(0.6) == pytest.approx(8 / 3)
        assert beta(1 / 3) == pytest.approx(2 / 3)
        assert beta(0.4) == pytest.approx(0.5)
        assert beta(0.6) == pytest.approx(1 / 3)
        assert gamma(1 / 3) == pytest.approx(1 / 3)
        assert gamma(2 / 3) == pytest.approx(5 / 3)
        assert gamma(0.9) == 0.0
        assert p(0.5) == pytest.approx(1 / 3)
        assert p(1 / 3) == pytest.approx(1 / 9)
        assert p(2 / 3) == pytest.approx(1 / 9)

    def test_gamma_undefined_at_zero(self):
        with pytest.raises(OutOfDomainError):
            example_17_controls().gamma(0.0)

    def test_json_description_preserves_values(self):
        beta = example_17_controls().beta
        rebuilt = ControlFunctionSpec.describe(beta).build()
        ts = [0.0, 0.2, 1 / 3, 0.4, 0.5, 0.7, 1.9]
        assert rebuilt.values(ts).tolist() == beta.values(ts).tolist()

    def test_callable_has_no_description(self):
        with pytest.raises(ValueError):
            ControlFunctionSpec.describe(ControlFunction.from_callable(lambda t: 0.5, "half"))


class TestLimsupChecks:
    def test_constant_half_has_MT(self):
        assert check_MT(constant(0.5, RangeContract.BETA)).holds

    def test_example_beta_has_MT(self):
        report = check_MT(example_17_controls().beta)
        assert report.holds
        assert report.parameters["exact"] is True

    def test_sampled_rational_beta_has_MT(self):
        beta = ControlFunction.from_callable(lambda t: t / (1 + t), "t/(1+t)", RangeContract.BETA)
        report = check_MT(beta, SMALL_GRID)
        assert report.holds
        assert report.parameters["exact"] is False

    def test_reich_only_function(self, reich_only_beta):
        mt = check_MT(reich_only_beta)
        assert mt.verdict == Verdict.VIOLATED
        assert [w.input for w in mt.witnesses] == [(0.0,)]
        assert check_R(reich_only_beta).holds

    def test_zero_function_has_R(self):
        assert check_R(constant(0.0, RangeContract.BETA)).holds

    def test_value_above_one_raises(self):
        with pytest.raises(RangeContractError):
            check_MT(constant(1.5), SMALL_GRID)

    @settings(max_examples=60, deadline=None)
    @given(beta=piecewise_betas())
    def test_MT_implies_R(self, beta):
        mt = check_MT(beta, SMALL_GRID)
        r = check_R(beta, SMALL_GRID)
        if mt.holds:
            assert r.holds
        if not r.holds:
            assert not mt.holds

    @settings(max_examples=60, deadline=None)
    @given(beta=piecewise_betas(), t=st.floats(min_value=0.0, max_value=1.5), window=st.floats(min_value=0.01, max_value=0.5))
    def test_sampled_sup_never_exceeds_exact(self, beta, t, window):
        as_callable = ControlFunction.from_callable(beta, "callable", RangeContract.BETA)
        exact = exact_window_sup(beta, t, window)
        sampled = sampled_window_sup(as_callable, t, window, depth=10)
        assert exact is not None and sampled is not None
        assert sampled <= exact + 1e-12


class TestPositivity:
    def test_identity_is_essentially_positive(self):
        h = ControlFunction.piecewise([Piece(lo=0.0, shape=Shape.affine(1.0, 0.0))], "s")
        assert check_essentially_positive(h).holds

    def test_example_p_is_essentially_positive(self):
        assert check_essentially_positive(example_17_controls().p).holds

    def test_shifted_ramp_is_not(self):
        h = ControlFunction.piecewise(
            [Piece(lo=0.0, hi=1.0, hi_closed=True, shape=Shape.constant(0.0)),
             Piece(lo=1.0, lo_closed=False, shape=Shape.affine(1.0, -1.0))],
            "max(0,s-1)",
        )
        report = check_essentially_positive(h)
        assert report.verdict == Verdict.VIOLATED
        assert any(w.input == (0.5,) for w in report.witnesses)

    def test_sampled_essential_positivity(self):
        h = ControlFunction.from_callable(lambda s: s * s, "s^2")
        assert check_essentially_positive(h, sample=Grid(hi=1.0, step=0.01)).holds

    def test_negative_values_rejected(self):
        with pytest.raises(RangeContractError):
            check_essentially_positive(constant(-0.5))

    def test_constant_is_stably_positive(self):
        points = [Point.of(x) for x in np.linspace(0.0, 1.0, 11)]
        assert check_stably_positive(lambda x: 1.0, points, 0.1).holds

    def test_jump_up_at_zero_is_not_stably_positive(self):
        def h(x: Point) -> float:
            t = x.coords[0]
            return 1.0 if t == 0.0 else abs(t)

        points = [Point.of(x) for x in np.linspace(0.0, 1.0, 101)]
        report = check_stably_positive(h, points, 0.1)
        assert report.verdict == Verdict.VIOLATED
        assert report.witnesses[0].input == (0.0,)
        assert all(w.input[0] < 0.01 for w in report.witnesses)

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            check_stably_positive(lambda x: 1.0, [Point.of(0.0)], 0.0)


class TestDerivedConstructions:
    def test_p_from_identity_gamma(self):
        p = p_from_gamma(identity_gamma())
        for s in (0.1, 0.5, 0.9, 1.0):
            assert p(s) == pytest.approx(s * s)

    def test_p_from_zero_gamma(self):
        gamma = ControlFunction.constant(0.0, "zero", RangeContract.GAMMA, domain_lo=0.0, domain_hi=1.0, domain_lo_open=True)
        p = p_from_gamma(gamma)
        assert p.pieces is not None
        assert p(0.25) == pytest.approx(0.25)

    def test_alpha_bound_for_identity_gamma(self):
        beta = example_17_controls().beta
        bound = alpha_bound_from(beta, identity_gamma())
        for t in (0.1, 0.4, 0.9):
            assert bound(t) == pytest.approx(2.0 - beta(t))

    def test_alpha_bound_for_example(self):
        controls = example_17_controls()
        bound = alpha_bound_from(controls.beta, controls.gamma)
        assert bound(0.2) == pytest.approx(4 / 3)
        assert bound(2 / 3) == pytest.approx(8 / 3)

    def test_alpha_bound_rejects_beta_reaching_one(self):
        with pytest.raises(RangeContractError):
            alpha_bound_from(constant(1.0), identity_gamma())

    def test_gamma_family_rejects_m_zero(self):
        with pytest.raises(ValueError):
            gamma_poly_family(0)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_gamma_family_power_floor(self, m):
        gamma = gamma_poly_family(m)
        p = p_from_gamma(gamma)
        assert gamma(0.5) == pytest.approx(sum(0.5 ** k for k in range(1, m + 1)))
        assert p(0.5) == pytest.approx(0.5 ** (m + 1))
        assert check_power_floor(p, m + 1, Grid(hi=1.0, step=0.01)).holds
        assert gamma(1e-9) < 1e-8

    def test_power_floor_fails_for_smaller_exponent(self):
        p = p_from_gamma(gamma_poly_family(2))
        report = check_power_floor(p, 2, Grid(hi=1.0, step=0.01))
        assert report.verdict == Verdict.VIOLATED
        assert report.property == PropertyKind.POWER_BOUND


class TestProductMajorant:
    def test_example_controls(self):
        controls = example_17_controls()
        report = lemma21_certificate(controls.alpha, controls.beta, controls.gamma)
        assert report.holds
        assert report.parameters["product_mt"] == "holds_on_sample"

    def test_identity_gamma_at_equality(self):
        beta = constant(0.5, RangeContract.BETA)
        alpha = constant(1.5, RangeContract.ALPHA)
        assert lemma21_certificate(alpha, beta, identity_gamma(), SMALL_GRID).holds

    def test_polynomial_gamma_with_two_level_beta(self):
        beta = ControlFunction.piecewise(
            [Piece(lo=0.0, hi=1.0, hi_closed=True, shape=Shape.constant(0.5)),
             Piece(lo=1.0, lo_closed=False, shape=Shape.constant(0.25))],
            "beta2", RangeContract.BETA,
        )
        gamma = gamma_poly_family(2)
        alpha = alpha_bound_from(beta, gamma)
        assert alpha(0.5) == pytest.approx(1.75)
        assert lemma21_certificate(alpha, beta, gamma, Grid(hi=2.0, step=0.01)).holds

    def test_alpha_above_bound_raises(self):
        with pytest.raises(HypothesisError, match=r"hypothesis \(2\) fails"):
            lemma21_certificate(constant(3.0, RangeContract.ALPHA), constant(0.5, RangeContract.BETA), identity_gamma(), SMALL_GRID)

    def test_q_epsilon_example(self):
        controls = example_17_controls()
        q = q_epsilon(controls.alpha, controls.beta, controls.p, 1.0)
        assert q == pytest.approx(8 / 9)

    def test_q_epsilon_identity_gamma(self):
        q = q_epsilon(constant(1.5, RangeContract.ALPHA), constant(0.5, RangeContract.BETA), p_from_gamma(identity_gamma()), 0.25, SMALL_GRID)
        assert q == pytest.approx(0.75)

    def test_q_epsilon_empty_set(self):
        q = q_epsilon(constant(1.0, RangeContract.ALPHA), constant(0.5, RangeContract.BETA), None, 0.1, SMALL_GRID)
        assert q == -math.inf

    def test_q_epsilon_requires_positive_eps(self):
        with pytest.raises(ValueError):
            q_epsilon(constant(1.0), constant(0.5), None, 0.0)


class TestMonotoneAndBounded:
    def test_example_alpha_increases(self):
        report = check_nonincreasing(example_17_controls().alpha)
        assert report.verdict == Verdict.VIOLATED
        assert report.witnesses[0].input[0] == pytest.approx(0.5)

    def test_constant_is_nonincreasing(self):
        assert check_nonincreasing(constant(1.0)).holds

    def test_bounded(self):
        alpha = example_17_controls().alpha
        report = check_bounded(alpha)
        assert report.holds
        assert report.parameters["sup"] == pytest.approx(8 / 3)
        assert check_bounded(alpha, bound=2.0).verdict == Verdict.VIOLATED
