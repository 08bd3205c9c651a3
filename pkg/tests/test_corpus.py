import time

import pytest

from models.corpus import CorpusTag
from models.reports import ClaimVerdict
from services.corpus import (
    branch_fixed_points,
    ciric_case,
    example_17_description,
    exact,
    get_entry,
    proximinal_case,
    stall_beta,
    verify_all_claims,
    verify_claim_1,
    verify_claim_2,
    verify_claim_3,
)
from services.multimap import d_F


class TestRendering:
    @pytest.mark.parametrize("value, text", [(1 / 3, "1/3"), (8 / 9, "8/9"), (2.0, "2"), (0.25, "1/4")])
    def test_small_fractions(self, value, text):
        assert exact(value) == text

    def test_irrational_stays_float(self):
        assert exact(2 ** 0.5) == repr(2 ** 0.5)


class TestRegistry:
    def test_labels(self, registry):
        assert set(registry) == {"example17", "browder", "hausdorff-two-point", "remark31", "stall"}

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            get_entry("nope")

    def test_tags(self, registry):
        assert registry["example17"].tag == CorpusTag.THEOREM
        assert registry["remark31"].tag == CorpusTag.REMARK
        assert registry["stall"].tag == CorpusTag.NON_THEOREM

    def test_example_facts(self, example17):
        assert example17.fact("fixed_points").value == [0.0]
        assert example17.fact("fixed_points").rederived
        assert example17.fact("F(1)").provenance == "PAPER"
        assert example17.fact("alpha=1+gamma(1-beta)").value is True

    def test_fixed_points_of_standard_maps(self, registry):
        assert registry["browder"].fact("fixed_points").value == [0.0]
        two_point = registry["hausdorff-two-point"].fact("fixed_points").value
        assert two_point == pytest.approx([0.0, 1 / 3])

    def test_branch_solutions(self):
        assert branch_fixed_points(example_17_description()) == [0.0]

    def test_perturbed_distance_jumps(self, registry):
        entry = registry["remark31"]
        assert entry.fact("d_F(1/2)").value == "1/6"
        assert entry.fact("d_G(1/2)").value == "1/2"
        assert d_F(entry.mapping, 0.5) > d_F(registry["browder"].mapping, 0.5)

    def test_summary_shape(self, example17):
        summary = example17.summary()
        assert summary["label"] == "example17"
        assert summary["controls"]["alpha"] == "alpha"
        assert {fact["name"] for fact in summary["expected"]} >= {"F(1)", "fixed_points"}

    def test_stall_beta_approaches_one(self):
        beta = stall_beta()
        assert beta(0.3) == 0.5
        assert beta(0.3 + 1e-6) > 1.0 - 1e-9


class TestStandardControls:
    def test_ciric_alpha(self, example17):
        controls = ciric_case(example17.controls.beta)
        assert controls.alpha(0.2) == pytest.approx(4 / 3)
        assert controls.alpha(0.8) == pytest.approx(5 / 3)
        assert controls.p(0.5) == pytest.approx(0.25)

    def test_proximinal_controls(self, example17):
        controls = proximinal_case(example17.controls.beta)
        assert controls.alpha(0.7) == 1.0
        assert controls.p(0.3) == pytest.approx(0.3)


class TestClaims:
    def test_claim_1(self, registry):
        started = time.perf_counter()
        report = verify_claim_1()
        assert time.perf_counter() - started < 1.0
        assert report.verdict == ClaimVerdict.HOLDS
        assert report.facts == {"d_F(1)": "1/4", "forced_beta(1/4)": "1", "forced_alpha(2/3)": "8/3"}
        assert report.steps[0].lhs_value == pytest.approx(1.0, abs=1e-12)
        assert report.steps[1].lhs_value == pytest.approx(8 / 3)

    def test_claim_2(self, registry):
        started = time.perf_counter()
        report = verify_claim_2()
        assert time.perf_counter() - started < 1.0
        assert report.holds
        assert report.facts["d_F(1/3)"] == "1/9"
        assert report.facts["forced_beta(1/6)"] == "2/3"
        assert report.facts["a_upper"] == "3/2"
        assert report.facts["feasible_a"] == "empty"
        assert set(report.facts["constant_alpha_sweep"].values()) == {"violated"}

    def test_claim_3(self, registry):
        started = time.perf_counter()
        report = verify_claim_3()
        assert time.perf_counter() - started < 5.0
        assert report.holds
        assert report.facts["contraction"] == "holds_on_sample"
        assert report.facts["preconditions_T14"] == "holds_on_sample"
        assert report.facts["max_product"] == "8/9"
        assert report.step("x=1, y=1/3: (A)").equality_case
        strict = [s for s in report.steps if s.relation == "<"]
        assert strict and all(s.rhs_value - s.lhs_value > 0 for s in strict)

    def test_all_claims_render(self, registry):
        claims = verify_all_claims()
        assert [c.claim for c in claims] == ["claim-1", "claim-2", "claim-3"]
        text = "\n".join(c.as_text() for c in claims)
        assert text.count(": holds") == 3
        assert "FAILED" not in text
