import json
from pathlib import Path

import pytest

from packages.core.config import (
    ConstraintConfig,
    DatasetConfig,
    RunConfig,
    apply_preset,
    load_run_config,
    parse_run_config,
)
from packages.core.constants import ABLATION_PRESETS
from packages.core.exceptions import ConfigError

CONFIGS_DIR = Path(__file__).parent.parent / "configs"


def _write(tmp_path, raw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


def test_defaults():
    config = RunConfig()
    assert config.dataset.blend_modes == ["direct", "gaussian", "poisson"]
    assert config.dataset.same_image_multiblend
    assert config.constraints.max_pair_iou == 0.75
    assert config.evaluation.min_box == (50, 30)


@pytest.mark.parametrize("name", ["default.json", "full_composition.json"])
def test_shipped_configs_are_valid(name):
    config = load_run_config(CONFIGS_DIR / name)
    assert config.dataset.background_reuse == 4


def test_unknown_key_is_named(tmp_path):
    with pytest.raises(ConfigError, match="constraints.max_iou"):
        load_run_config(_write(tmp_path, {"constraints": {"max_iou": 0.5}}))


def test_bad_values():
    with pytest.raises(ConfigError, match="scale_range"):
        parse_run_config({"augment": {"scale_range": [0.9, 0.3]}})
    with pytest.raises(ConfigError):
        parse_run_config({"dataset": {"blend_modes": ["direct", "direct"]}})
    with pytest.raises(ConfigError):
        parse_run_config({"dataset": {"blend_modes": []}})
    with pytest.raises(ConfigError):
        parse_run_config({"paths": {"distractors": ["a", "a"]}})


def test_missing_or_broken_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(broken)


def test_presets():
    assert set(ABLATION_PRESETS) >= {"no_blending", "all_blend_same_image", "no_occlusion"}
    raw = apply_preset({"dataset": {"master_seed": 3}}, "no_blending")
    assert raw["dataset"] == {"master_seed": 3, "blend_modes": ["direct"],
                              "same_image_multiblend": False}
    config = parse_run_config(apply_preset({}, "no_occlusion"))
    assert config.constraints.effective_max_pair_iou == 0.0
    with pytest.raises(ConfigError):
        apply_preset({}, "no_such_preset")


def test_environment_and_cli_precedence(tmp_path, monkeypatch):
    path = _write(tmp_path, {"dataset": {"master_seed": 1}, "workers": 1})
    monkeypatch.setenv("SYNTH_SEED", "99")
    monkeypatch.setenv("SYNTH_WORKERS", "3")
    config = load_run_config(path)
    assert config.dataset.master_seed == 99
    assert config.workers == 3

    config = load_run_config(path, overrides={"dataset": {"master_seed": 5}})
    assert config.dataset.master_seed == 5


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv("SYNTH_WORKERS", "many")
    with pytest.raises(ConfigError, match="SYNTH_WORKERS"):
        load_run_config()


def test_echo_excludes_workers():
    echo = RunConfig(workers=8).echo()
    assert "workers" not in echo
    assert echo == RunConfig(workers=1).echo()
    assert json.loads(json.dumps(echo)) == echo


def test_resolve_num_scenes():
    assert DatasetConfig().resolve_num_scenes(1548) == 6192
    assert DatasetConfig(num_scenes=10).resolve_num_scenes(1548) == 10


def test_effective_constraints():
    cons = ConstraintConfig(allow_truncation=False, allow_occlusion=False)
    assert cons.effective_min_visible_fraction == 1.0
    assert cons.effective_max_pair_iou == 0.0
