import pytest

from moscolab.classify import INDETERMINATE, RECURRENT, TRANSIENT, PathClassification
from moscolab.scenarios import (SCENARIOS, ClassificationRecord, ScenarioError, default_config, doubling_list,
                                run_scenario)


def test_registry_has_every_scenario():
    assert set(SCENARIOS) == {"prop15i", "prop15ii", "prop16i", "prop16ii", "prop18i", "prop18ii", "remark17",
                              "thm42-sweep", "const-alpha-sweep"}


def test_doubling_list():
    assert doubling_list(1, 16) == (1, 2, 4, 8, 16)
    assert doubling_list(2, 20) == (2, 4, 8, 16)
    with pytest.raises(ScenarioError):
        doubling_list(4, 2)


@pytest.mark.parametrize("sid,overrides,needle", [
    ("prop16ii", dict(n_list=(1, 2)), ">= 2"),
    ("prop16i", dict(n_list=(4, 2)), "increasing"),
    ("prop16i", dict(n_list=()), "empty"),
    ("thm42-sweep", dict(eps_list=(0.5, -1.0)), "positive"),
    ("const-alpha-sweep", dict(alpha_list=(2.0,)), "(0, 2)"),
    ("prop16i", dict(grid_n=8), "grid_n"),
    ("prop16i", dict(lambdas=(0.0,)), "lambdas"),
    ("prop16i", dict(times=(1.0, 2.0)), "times"),
])
def test_config_validation(sid, overrides, needle):
    with pytest.raises(ScenarioError, match=needle.replace("(", r"\(").replace(")", r"\)")):
        default_config(sid, **overrides).validate()


def test_unknown_scenario():
    with pytest.raises(ScenarioError):
        default_config("prop99")


def test_record_consistency_rules():
    rec = lambda prop, role: ClassificationRecord("x", PathClassification(prop, "ChungFuchs"), RECURRENT, role)
    assert rec(RECURRENT, "primary").consistent
    assert not rec(INDETERMINATE, "primary").consistent
    assert rec(INDETERMINATE, "corroboration").consistent
    assert not rec(TRANSIENT, "corroboration").consistent


def test_const_alpha_classification_only():
    result = run_scenario(default_config("const-alpha-sweep", alpha_list=(0.5, 1.5), mosco=False))
    primary = {r.param: r.classification.property for r in result.classifications if r.role == "primary"}
    assert list(primary.values()) == [TRANSIENT, RECURRENT]
    assert result.passed and result.exit_status == 0


def test_small_diffusion_run_has_all_parts():
    result = run_scenario(default_config("prop15ii", n_list=(1, 2, 4), grid_n=256, grid_l=10.0))
    assert len(result.classifications) == 4
    assert len(result.reports) == 1 and result.reports[0].indices == [1, 2, 4]
    assert result.assumptions and result.checks
    assert result.passed
