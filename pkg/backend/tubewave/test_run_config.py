import json
import os

import pytest

from errors import ConfigError
from run_config import apply_overrides, build_config, load_config, parse_omega_range


@pytest.fixture
def raw(regression_dir):
    with open(os.path.join(regression_dir, "homogeneous.json"), encoding="utf-8") as f:
        return json.load(f)


def test_load_regression_config(regression_dir):
    config = load_config(os.path.join(regression_dir, "exponential_bump_g1.json"))
    assert config.name == "exponential_bump_g1"
    assert config.tube.c0_sq == pytest.approx(10.0)
    assert config.numerics.grid == 200 and config.numerics.x_max == 40.0
    assert config.numerics.oracle_method == "BackwardMarch"
    assert len(config.omegas) == 8
    assert os.path.isabs(config.outputs.directory)
    assert config.outputs.directory.endswith(os.path.join("out", "exponential_bump_g1"))


def test_table_paths_are_relative_to_the_config(regression_dir):
    config = load_config(os.path.join(regression_dir, "not_integrable.json"))
    assert config.profile.g1.tail_factor(40.0) == float("inf")


def test_negative_radius_names_the_field(raw):
    raw["tube"]["R"] = -0.01
    with pytest.raises(ConfigError, match="tube.R"):
        build_config(raw)


def test_missing_tube_parameter(raw):
    del raw["tube"]["E_inf"]
    with pytest.raises(ConfigError, match="tube.E_inf is required"):
        build_config(raw)


def test_unknown_section(raw):
    raw["boundary"] = {}
    with pytest.raises(ConfigError, match="boundary"):
        build_config(raw)


def test_numerics_are_validated(raw):
    raw["numerics"]["grid"] = 1
    with pytest.raises(ConfigError, match="numerics.grid"):
        build_config(raw)
    raw["numerics"]["grid"] = 200
    raw["numerics"]["oracle_method"] = "shooting"
    with pytest.raises(ConfigError, match="oracle_method"):
        build_config(raw)


def test_missing_channel_defaults_to_homogeneous(raw):
    del raw["profiles"]["g2"]
    assert build_config(raw).profile.is_homogeneous


def test_omega_range():
    omegas = parse_omega_range("1:20:8")
    assert len(omegas) == 8 and omegas[0] == 1.0 and omegas[-1] == 20.0
    for bad in ("1:20", "a:b:c", "1:20:0"):
        with pytest.raises(ConfigError):
            parse_omega_range(bad)


def test_overrides_take_precedence(raw):
    config = apply_overrides(
        build_config(raw), omega=3.0, omega_range="2:4:3", out="elsewhere", tol=1e-9, x_max=30.0,
        grid=50, plots=True,
    )
    assert config.omega == 3.0 and config.omegas == (2.0, 3.0, 4.0)
    assert config.outputs.directory == "elsewhere" and config.outputs.plots
    assert config.numerics.tol == 1e-9 and config.numerics.points[-1] == 30.0
    assert config.numerics.points.size == 50
    with pytest.raises(ConfigError):
        apply_overrides(config, x_max=-1.0)


def test_single_frequency_replaces_the_range(raw):
    raw["forcing"]["omega_range"] = "1:20:8"
    assert len(build_config(raw).omegas) == 8
    config = apply_overrides(build_config(raw), omega=3.0)
    assert config.omega == 3.0
    assert config.omegas == ()


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(broken))
    listed = tmp_path / "list.json"
    listed.write_text("[]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_config(str(listed))
