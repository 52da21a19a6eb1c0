import json

import numpy as np
import pytest

from conftest import save_png
from apps.synth_cli.main import main


def _manifest_bytes(out):
    return (out / "manifest.json").read_bytes()


def test_end_to_end(make_library, make_config, tmp_path, capsys):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out, evaluation={"min_box": [0, 0]})

    assert main(["extract-masks", "--config", str(config)]) == 0
    assert len(list(lib["masks_dir"].rglob("*.png"))) == 6

    assert main(["synthesize", "--config", str(config)]) == 0
    assert len(list((out / "images").glob("*.png"))) == 12
    assert "manifest sha256" in capsys.readouterr().out

    assert main(["verify", str(out)]) == 0
    assert main(["stats", str(out)]) == 0
    assert "scenes: 4" in capsys.readouterr().out

    coco = json.loads((out / "annotations" / "coco.json").read_text(encoding="utf-8"))
    detections = [
        {"image_id": ann["image_id"], "category_id": ann["category_id"],
         "bbox": ann["bbox"], "score": 1.0}
        for ann in coco["annotations"]
    ]
    dets_path = tmp_path / "dets.json"
    dets_path.write_text(json.dumps(detections), encoding="utf-8")
    result_path = tmp_path / "ap.json"
    assert main(["evaluate", str(out), str(dets_path), "--output", str(result_path)]) == 0
    result = json.loads(result_path.read_text(encoding="utf-8"))
    assert result["mAP"] == 1.0
    assert result["per_class"] and set(result["per_class"]) <= {"cup", "box"}


def test_worker_count_does_not_change_output(make_library, make_config, tmp_path):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out, dataset={"num_scenes": 6})

    assert main(["synthesize", "--config", str(config), "--workers", "1"]) == 0
    single = _manifest_bytes(out)
    single_image = (out / "images" / "scene_000005_poisson.png").read_bytes()
    for workers in ("2", "8"):
        assert main(["synthesize", "--config", str(config), "--workers", workers]) == 0
        assert _manifest_bytes(out) == single
        assert (out / "images" / "scene_000005_poisson.png").read_bytes() == single_image


def test_rerun_from_echoed_config_is_byte_identical(make_library, make_config, tmp_path):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out, dataset={"num_scenes": 5, "master_seed": 31})
    assert main(["synthesize", "--config", str(config), "--workers", "2"]) == 0
    first = _manifest_bytes(out)

    echoed = tmp_path / "echoed.json"
    echoed.write_text(json.dumps(json.loads(first)["config"]), encoding="utf-8")
    assert main(["synthesize", "--config", str(echoed)]) == 0
    assert _manifest_bytes(out) == first


def test_seed_override_changes_dataset(make_library, make_config, tmp_path):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out)
    assert main(["synthesize", "--config", str(config)]) == 0
    first = _manifest_bytes(out)
    assert main(["synthesize", "--config", str(config), "--seed", "8"]) == 0
    assert _manifest_bytes(out) != first


def test_multiblend_writes_every_mode(make_library, make_config, tmp_path):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out, dataset={"num_scenes": 10})
    assert main(["synthesize", "--config", str(config)]) == 0
    assert len(list((out / "images").glob("*.png"))) == 30
    assert len(list((out / "annotations" / "voc").glob("*.xml"))) == 30
    assert len(list((out / "blueprints").glob("*.json"))) == 10


def test_preset_single_mode(make_library, make_config, tmp_path):
    lib = make_library()
    out = tmp_path / "out"
    config = make_config(lib, output_dir=out)
    assert main(["synthesize", "--config", str(config), "--preset", "no_blending"]) == 0
    names = sorted(p.name for p in (out / "images").glob("*.png"))
    assert len(names) == 4
    assert all(name.endswith("_direct.png") for name in names)


def test_unknown_config_key(make_library, make_config, tmp_path, capsys):
    config = make_config(make_library(), augment={"rotaton_range": 10})
    assert main(["synthesize", "--config", str(config)]) == 2
    assert "augment.rotaton_range" in capsys.readouterr().err


def test_usage_error():
    assert main(["synthesize", "--workers", "0"]) == 2
    assert main([]) == 2


def test_corrupted_annotation_fails_verify(make_library, make_config, tmp_path):
    out = tmp_path / "out"
    config = make_config(make_library(), output_dir=out)
    assert main(["synthesize", "--config", str(config)]) == 0
    (out / "annotations" / "voc" / "scene_000002_gaussian.xml").write_text(
        "<annotation><size>", encoding="utf-8"
    )
    assert main(["verify", str(out)]) != 0


def test_extract_masks_is_noop_when_masks_exist(make_library, make_config, capsys):
    lib = make_library(masks_for=("cup", "box"))
    before = {p: p.read_bytes() for p in lib["masks_dir"].rglob("*.png")}
    assert main(["extract-masks", "--config", str(make_config(lib))]) == 0
    assert {p: p.read_bytes() for p in lib["masks_dir"].rglob("*.png")} == before
    assert "0 written" in capsys.readouterr().out


@pytest.fixture
def library_with_blank_view(make_library):
    lib = make_library(instances=("cup",), views=2)
    save_png(np.full((64, 64, 3), 255, dtype=np.uint8), lib["objects_dir"] / "cup" / "blank.png")
    return lib


def test_extract_masks_fails_on_blank_view(library_with_blank_view, make_config):
    config = make_config(library_with_blank_view)
    assert main(["extract-masks", "--config", str(config)]) == 1


def test_extract_masks_can_skip_failures(library_with_blank_view, make_config):
    lib = library_with_blank_view
    config = make_config(lib)
    assert main(["extract-masks", "--config", str(config), "--skip-failures"]) == 0
    report = (lib["masks_dir"] / "failures.txt").read_text(encoding="utf-8")
    assert report.startswith("cup/blank\tNoForeground")
    assert (lib["masks_dir"] / "cup" / "view_0.png").is_file()
