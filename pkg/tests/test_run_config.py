import json

import pytest

from src.config import DEFAULT_CONFIG
from src.errors import ConfigError
from src.exact_engine import ExactConfig
from src.hpa_engine import HpaConfig
from src.run_config import RunConfig, load_config, parse_config_text, parse_overrides

EXAMPLE = """
# Hahn echo on the 30-spin bath
engine = hpa
bath = fig2-30
temperature = 0.1      # K
n_samples = 2e2
keep_samples = yes
dt = none
"""


def test_defaults_come_from_default_config():
    cfg = RunConfig()
    assert cfg.engine == DEFAULT_CONFIG["run"]["engine"]
    assert cfg.n_samples == DEFAULT_CONFIG["hpa"]["n_samples"]
    assert cfg.lambda00 == DEFAULT_CONFIG["phonon"]["lambda00"]
    assert cfg.times.size == DEFAULT_CONFIG["run"]["n_points"]


def test_every_entry_point_shares_one_device_default():
    device = DEFAULT_CONFIG["run"]["device"]
    assert RunConfig().device == device
    assert ExactConfig().device == device
    assert HpaConfig().device == device
    assert "device" not in DEFAULT_CONFIG["hpa"]
    assert "device" not in DEFAULT_CONFIG["exact"]


def test_parse_text_file():
    cfg = parse_config_text(EXAMPLE)
    assert cfg.n_samples == 200 and isinstance(cfg.n_samples, int)
    assert cfg.keep_samples is True
    assert cfg.dt is None
    assert cfg.temperature == 0.1


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="n_sample"):
        parse_config_text("n_sample = 10")


@pytest.mark.parametrize("line,key", [
    ("temperature = -1", "temperature"),
    ("protocol = ramsey", "protocol"),
    ("n_samples = 0", "n_samples"),
    ("n_samples = 2.5", "n_samples"),
    ("keep_samples = maybe", "keep_samples"),
    ("t_max = soon", "t_max"),
    ("dt = 1", "dt"),
    ("n_points = 1", "n_points"),
])
def test_invalid_values_name_the_key(line, key):
    with pytest.raises(ConfigError, match=key):
        parse_config_text(line)


def test_malformed_lines():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("engine hpa")
    with pytest.raises(ConfigError, match="twice"):
        parse_config_text("B = 1\nB = 2")


def test_bath_selection_required_for_simulation_engines():
    with pytest.raises(ConfigError, match="bath"):
        RunConfig(engine="exact", bath=None)
    assert RunConfig(engine="exact", bath=None, ring_count=1).ring_count == 1
    assert RunConfig(engine="phonon", bath=None).bath is None


def test_load_manifest_and_overrides(tmp_path):
    cfg = RunConfig(engine="exact", bath="fig1-n-ring1", n_points=11)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"version": "0.1.0", "config": cfg.to_dict()}))
    back = load_config(str(path))
    assert back == cfg
    changed = load_config(str(path), {"B": "1.5e-3"})
    assert changed.B == 1.5e-3
    text = tmp_path / "run.cfg"
    text.write_text("engine = phonon\n")
    assert load_config(str(text)).engine == "phonon"
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.cfg"))


def test_parse_overrides():
    assert parse_overrides(["a=1", " b = x "]) == {"a": "1", "b": "x"}
    with pytest.raises(ConfigError):
        parse_overrides(["novalue"])
