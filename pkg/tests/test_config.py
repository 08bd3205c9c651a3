import logging

from core.config import Settings
from core.logging import LOG_FORMAT, configure_logging
from core.parallel import fan_out


def test_defaults():
    config = Settings(_env_file=None)
    assert config.tol == 1e-12
    assert config.margin == 1e-9
    assert config.report_schema == "v1"
    assert config.max_sample_points == 200_000


def test_environment_override(monkeypatch):
    monkeypatch.setenv("CONTRACTUM_TOL", "1e-10")
    monkeypatch.setenv("CONTRACTUM_MAX_STEPS", "50")
    config = Settings(_env_file=None)
    assert config.tol == 1e-10
    assert config.max_steps == 50


def test_logging_installs_one_handler():
    configure_logging("DEBUG")
    configure_logging("WARNING")
    root = logging.getLogger()
    ours = [h for h in root.handlers if getattr(h, "_contractum", False)]
    assert len(ours) == 1
    assert ours[0].formatter._fmt == LOG_FORMAT
    assert root.level == logging.WARNING


def test_fan_out_keeps_order():
    items = list(range(37))
    assert fan_out(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert fan_out(lambda x: x + 1, [], workers=4) == []
