import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.config import settings as config
from core.errors import OutOfDomainError, PerturbationError, SelectionError
from models.control import ControlFunction, RangeContract
from models.geometry import Point
from models.multimap import BoxDomain, PointListDomain
from models.reports import MapCheckKind, Verdict
from schemas.multimap import MapDescriptionEnvelope, PiecewiseMapDescription
from services.control import check_stably_positive
from services.corpus import ciric_case
from services.multimap import (
    check_ab_contraction,
    check_ab_mapping,
    check_hausdorff_contraction,
    d_F,
    describe,
    distance_function,
    embed_hausdorff,
    lower_semicontinuity_gap,
    map_from_description,
    perturb_at,
    random_pairs,
    select_step,
)


def constant(c, contract=RangeContract.GENERIC):
    return ControlFunction.constant(c, f"const={c}", contract)


def zero_map():
    envelope = MapDescriptionEnvelope.model_validate({
        "description": {
            "kind": "piecewise-1d",
            "label": "zero",
            "branches": [{"lo": 0.0, "hi": 1.0, "hi_closed": True, "images": [{"kind": "constant", "value": 0.0}]}],
        }
    })
    return map_from_description(envelope.description)


class TestConstruction:
    def test_example_images(self, example17):
        F = example17.mapping
        assert [p.coords for p in F(1.0)] == [(1 / 3,), (0.75,)]
        assert [p.coords for p in F(0.9)] == [(0.5,)]
        assert [p.coords for p in F(0.75)] == [(0.5,)]
        assert F(0.3).points[0].coords[0] == pytest.approx(0.2)

    def test_outside_domain(self, example17):
        with pytest.raises(OutOfDomainError):
            example17.mapping(1.5)

    def test_json_description(self):
        F = zero_map()
        assert isinstance(F.domain, BoxDomain)
        assert F.domain.lo == (0.0,) and F.domain.hi == (1.0,)
        assert [p.coords for p in F(0.4)] == [(0.0,)]
        assert isinstance(describe(F), PiecewiseMapDescription)

    def test_table_description(self):
        envelope = MapDescriptionEnvelope.model_validate({
            "description": {"kind": "table", "entries": [[[0.0, 0.0], [[0.0, 0.0]]], [[1.0, 1.0], [[0.0, 0.0], [1.0, 0.0]]]]}
        })
        F = map_from_description(envelope.description)
        assert isinstance(F.domain, PointListDomain)
        assert len(F((1.0, 1.0))) == 2
        assert d_F(F, (1.0, 1.0)) == pytest.approx(1.0)
        with pytest.raises(OutOfDomainError):
            F((0.5, 0.5))

    def test_callable_map_has_no_description(self, registry):
        with pytest.raises(ValueError):
            describe(registry["stall"].mapping)

    def test_domain_grid_is_capped(self, monkeypatch):
        domain = BoxDomain(lo=(0.0,), hi=(1.0,))
        monkeypatch.setattr(config, "max_sample_points", 200)
        assert len(domain.sample(0.01)) == 101
        with pytest.raises(ValueError, match="above the cap"):
            domain.sample(1e-3)

    def test_wide_domain_uses_its_own_step(self, registry):
        entry = registry["stall"]
        report = check_ab_contraction(entry.mapping, entry.controls.alpha, entry.controls.beta,
                                      sample=entry.mapping.domain.sample())
        assert report.checked == 1001
        assert report.sample["t_grid"]["step"] == pytest.approx(1e6 / config.max_sample_points)


class TestDistanceAndSelection:
    def test_example_distances(self, example17):
        F = example17.mapping
        assert d_F(F, 1.0) == pytest.approx(0.25)
        assert d_F(F, 0.9) == pytest.approx(0.4)
        assert d_F(F, 0.5) == pytest.approx(1 / 6)
        assert d_F(F, 0.0) == 0.0

    def test_select_at_one(self, example17):
        controls = example17.controls
        record = select_step(example17.mapping, 1.0, controls.alpha, controls.beta)
        assert record.y.coords[0] == pytest.approx(1 / 3)
        assert record.condition_A_margin == pytest.approx(0.0, abs=1e-12)
        assert record.condition_B_margin == pytest.approx(1 / 9)
        assert record.succeeded

    def test_fixed_point_selects_itself(self, example17):
        controls = example17.controls
        record = select_step(example17.mapping, 0.0, controls.alpha, controls.beta)
        assert record.y.coords == (0.0,)
        assert record.d_xy == 0.0

    def test_two_minus_beta_fails_at_one(self, example17):
        controls = ciric_case(example17.controls.beta)
        with pytest.raises(SelectionError, match="not an") as excinfo:
            select_step(example17.mapping, 1.0, controls.alpha, controls.beta)
        assert excinfo.value.record is not None
        assert not excinfo.value.record.succeeded

    @settings(max_examples=100, deadline=None)
    @given(x=st.floats(min_value=0.0, max_value=1.0))
    def test_selected_step_is_bracketed(self, example17, x):
        controls = example17.controls
        F = example17.mapping
        record = select_step(F, x, controls.alpha, controls.beta)
        assert F(x).contains(record.y)
        assert record.d_F_x <= record.d_xy + 1e-12
        assert record.d_xy <= controls.alpha(record.d_xy) * record.d_F_x + 1e-12


class TestMapChecks:
    def test_example_is_an_ab_mapping(self, example17):
        controls = example17.controls
        report = check_ab_mapping(example17.mapping, controls.alpha, controls.beta)
        assert report.kind == MapCheckKind.AB_MAPPING
        assert report.holds
        assert report.checked == 1001

    def test_linear_map(self, browder):
        controls = browder.controls
        assert check_ab_mapping(browder.mapping, controls.alpha, controls.beta).holds

    @pytest.mark.parametrize("a", [1.1, 1.2, 1.3, 1.4])
    def test_constant_alpha_fails_on_example(self, example17, a):
        report = check_ab_mapping(example17.mapping, constant(a, RangeContract.ALPHA), example17.controls.beta)
        assert report.verdict == Verdict.VIOLATED
        assert report.witnesses

    def test_example_contraction_product(self, example17):
        controls = example17.controls
        report = check_ab_contraction(example17.mapping, controls.alpha, controls.beta, sample=example17.mapping.domain.sample(1e-2))
        assert report.holds
        assert report.max_product == pytest.approx(8 / 9)

    def test_zero_beta_on_constant_map(self):
        report = check_ab_contraction(zero_map(), constant(1.0, RangeContract.ALPHA), constant(0.0, RangeContract.BETA))
        assert report.holds
        assert report.max_product == 0.0

    def test_product_at_one_is_reported(self):
        report = check_ab_contraction(zero_map(), constant(2.0, RangeContract.ALPHA), constant(0.5, RangeContract.BETA))
        assert report.verdict == Verdict.VIOLATED
        assert all(w.detail == "alpha*beta not below 1" for w in report.witnesses)

    def test_linear_map_is_hausdorff_contraction(self, browder, rng):
        pairs = random_pairs(browder.mapping.domain, 200, rng)
        report = check_hausdorff_contraction(browder.mapping, browder.controls.k, pair_sample=pairs)
        assert report.holds
        assert report.checked == 200

    def test_example_is_not_a_hausdorff_contraction(self, example17):
        k = constant(0.9, RangeContract.BETA)
        report = check_hausdorff_contraction(example17.mapping, k, pair_sample=[(1.0, 0.75)])
        assert report.verdict == Verdict.VIOLATED
        assert report.witnesses[0].input == (1.0, 0.75)

    def test_single_point_domain(self):
        envelope = MapDescriptionEnvelope.model_validate({"description": {"kind": "table", "entries": [[0.5, [0.25]]]}})
        F = map_from_description(envelope.description)
        k = constant(0.5, RangeContract.BETA)
        assert check_hausdorff_contraction(F, k, pair_sample=[(0.5, 0.5)]).holds


class TestHausdorffEmbedding:
    def test_constant_k(self):
        alpha, beta = embed_hausdorff(constant(0.5, RangeContract.BETA), 0.5)
        assert alpha(0.3) == pytest.approx(1.5)
        assert beta(0.3) == 0.5
        assert alpha.pieces is not None

    def test_zero_k_hits_the_cap(self):
        alpha, beta = embed_hausdorff(constant(0.0, RangeContract.BETA), 0.5)
        assert alpha(0.7) == 10.0
        assert alpha(0.7) * beta(0.7) == 0.0

    def test_rational_k(self):
        k = ControlFunction.from_callable(lambda t: t / (1 + t), "t/(1+t)", RangeContract.BETA)
        alpha, beta = embed_hausdorff(k, 0.5)
        for t in np.linspace(0.01, 2.0, 50):
            assert alpha(t) * beta(t) < 1.0

    @pytest.mark.parametrize("slack", [0.0, 1.0, -0.2])
    def test_slack_range(self, slack):
        with pytest.raises(ValueError):
            embed_hausdorff(constant(0.5, RangeContract.BETA), slack)

    def test_two_point_map_embeds(self, registry):
        entry = registry["hausdorff-two-point"]
        F, k = entry.mapping, entry.controls.k
        pairs = random_pairs(F.domain, 500, np.random.default_rng(3))
        assert check_hausdorff_contraction(F, k, pair_sample=pairs).holds

        alpha, beta = embed_hausdorff(k, 0.5)
        sample = [x for pair in pairs for x in pair]
        report = check_ab_contraction(F, alpha, beta, sample=sample)
        assert report.holds
        assert report.max_product < 1.0


class TestPerturbation:
    def test_perturbed_value(self, browder):
        G = perturb_at(browder.mapping, 0.5, [0.0])
        assert [p.coords for p in G(0.5)] == [(0.0,)]
        assert G(0.3).points[0].coords[0] == pytest.approx(0.2)
        assert d_F(G, 0.5) == pytest.approx(0.5)

    def test_description_gets_a_point_branch(self, browder):
        G = perturb_at(browder.mapping, 0.5, [0.0])
        branches = describe(G).branches
        assert len(branches) == 3
        assert [(b.lo, b.hi) for b in branches] == [(0.0, 0.5), (0.5, 0.5), (0.5, 1.0)]

    def test_same_distance_rejected(self, browder):
        with pytest.raises(PerturbationError):
            perturb_at(browder.mapping, 0.5, [1 / 3])

    def test_fixed_point_rejected(self, browder):
        with pytest.raises(PerturbationError, match="fixed point"):
            perturb_at(browder.mapping, 0.0, [1.0])

    def test_distance_drops_at_perturbation(self, registry):
        G = registry["remark31"].mapping
        gap = lower_semicontinuity_gap(distance_function(G), 0.5, domain=G.domain)
        assert gap > 0.3

    def test_distance_of_perturbed_map_is_stably_positive(self, registry):
        G = registry["remark31"].mapping
        sample = G.domain.sample(1e-3)
        report = check_stably_positive(distance_function(G), sample, 1e-2)
        assert report.holds
