import json
import random

import pytest

from conftest import gradient_background, save_png
from packages.core.exceptions import ConfigError, CorruptDataset, EmptyAssets
from packages.core.imaging import BoundingBox
from packages.core.dataset import (
    AnnotatedImage,
    AssetStore,
    DatasetManifest,
    ImageRecord,
    box_from_voc,
    expected_record_count,
    read_coco,
    read_manifest,
    read_voc,
    scan_assets,
    voc_box,
    write_coco,
    write_manifest,
    write_voc,
)


def test_voc_box_conversion():
    assert voc_box(BoundingBox(0, 0, 10, 10)) == (1, 1, 10, 10)
    assert voc_box(BoundingBox(2.5, 3.5, 7.25, 9)) == (3, 4, 8, 9)
    assert box_from_voc((1, 1, 10, 10)) == BoundingBox(0, 0, 10, 10)


def test_voc_round_trip(tmp_path):
    image = AnnotatedImage(
        "scene_000003_poisson.png", 160, 120,
        (("cup", BoundingBox(4, 5, 40, 30)), ("box", BoundingBox(0, 60, 25, 120))),
    )
    path = write_voc(image, tmp_path / "voc")
    assert path.name == "scene_000003_poisson.xml"

    parsed = read_voc(path)
    assert parsed.filename == image.file_name
    assert (parsed.width, parsed.height, parsed.depth) == (160, 120, 3)
    assert parsed.objects == (("cup", (5, 6, 40, 30)), ("box", (1, 61, 25, 120)))
    assert parsed.boxes == list(image.annotations)


def test_voc_document_is_stable(tmp_path):
    image = AnnotatedImage("a.png", 10, 10, (("x", BoundingBox(1, 1, 3, 3)),))
    first = write_voc(image, tmp_path / "one").read_bytes()
    second = write_voc(image, tmp_path / "two").read_bytes()
    assert first == second
    assert first.endswith(b"\n")


def test_read_voc_rejects_garbage(tmp_path):
    path = tmp_path / "broken.xml"
    path.write_text("<annotation><filename>a.png</filename>", encoding="utf-8")
    with pytest.raises(CorruptDataset):
        read_voc(path)


def test_coco_round_trip(tmp_path):
    images = [
        AnnotatedImage("a.png", 64, 48, (("cup", BoundingBox(0.5, 1.25, 10.5, 20.75)),)),
        AnnotatedImage("b.png", 64, 48, ()),
        AnnotatedImage("c.png", 64, 48, (("box", BoundingBox(3, 4, 5, 6)),
                                         ("cup", BoundingBox(10, 10, 30, 20)))),
    ]
    path = write_coco(images, tmp_path / "coco.json", categories=["cup", "box", "mug"])
    document = json.loads(path.read_text(encoding="utf-8"))
    assert [img["id"] for img in document["images"]] == [1, 2, 3]
    assert [ann["id"] for ann in document["annotations"]] == [1, 2, 3]
    assert document["annotations"][0]["bbox"] == [0.5, 1.25, 10.0, 19.5]
    assert [c["name"] for c in document["categories"]] == ["cup", "box", "mug"]

    parsed, categories = read_coco(path)
    assert parsed == images
    assert categories == ["cup", "box", "mug"]


def test_coco_rejects_unknown_label(tmp_path):
    images = [AnnotatedImage("a.png", 8, 8, (("cat", BoundingBox(0, 0, 1, 1)),))]
    with pytest.raises(ValueError):
        write_coco(images, tmp_path / "coco.json", categories=["dog"])


def test_scan_is_sorted_and_listing_order_free(make_library):
    lib = make_library(instances=("zebra", "apple", "mango"), views=3)

    def shuffled(directory):
        entries = list(directory.iterdir())
        random.Random(13).shuffle(entries)
        return entries

    default = scan_assets(lib["objects_dir"], lib["backgrounds_dir"])
    scrambled = scan_assets(lib["objects_dir"], lib["backgrounds_dir"], lister=shuffled)
    assert default.target_labels == ("apple", "mango", "zebra")
    assert default.objects == scrambled.objects
    assert default.background_refs == scrambled.background_refs
    assert [v.view_id for v in default.objects["apple"]] == ["view_0", "view_1", "view_2"]


def test_scan_finds_masks(make_library):
    lib = make_library(instances=("cup", "box"), masks_for=("cup",))
    index = scan_assets(lib["objects_dir"], lib["backgrounds_dir"])
    missing = index.missing_masks()
    assert {label for label, _ in missing} == {"box"}
    assert all(view.mask_path is not None for view in index.objects["cup"])


def test_scan_without_backgrounds(make_library):
    lib = make_library(backgrounds=0)
    lib["backgrounds_dir"].mkdir(parents=True, exist_ok=True)
    with pytest.raises(EmptyAssets):
        scan_assets(lib["objects_dir"], lib["backgrounds_dir"])


def test_scan_distractor_checks(make_library):
    lib = make_library(instances=("cup",), distractors=("ball",))
    index = scan_assets(lib["objects_dir"], lib["backgrounds_dir"], ["ball"])
    assert index.target_labels == ("cup",)
    with pytest.raises(ConfigError):
        scan_assets(lib["objects_dir"], lib["backgrounds_dir"], ["ghost"])
    with pytest.raises(EmptyAssets):
        scan_assets(lib["objects_dir"], lib["backgrounds_dir"], ["cup", "ball"])


def test_asset_store_cutouts(make_library):
    lib = make_library(instances=("cup",), masks_for=("cup",))
    store = AssetStore(scan_assets(lib["objects_dir"], lib["backgrounds_dir"]))
    cutout = store.cutout("cup", "view_0")
    assert cutout.size == store.cutout_size("cup", "view_0")
    assert cutout.size == (36, 36)
    assert store.transformed_size("cup", "view_0", 0.5, 0.0) == store.transformed(
        "cup", "view_0", 0.5, 0.0
    ).size
    assert store.background_size("bg_000.png") == (160, 120)


def test_asset_store_extracts_missing_masks(make_library):
    lib = make_library(instances=("cup",))
    store = AssetStore(scan_assets(lib["objects_dir"], lib["backgrounds_dir"]))
    width, height = store.cutout_size("cup", "view_1")
    assert 36 <= width <= 42 and 36 <= height <= 42


def test_extra_background_files_are_ignored(make_library):
    lib = make_library(backgrounds=2)
    (lib["backgrounds_dir"] / "notes.txt").write_text("not an image", encoding="utf-8")
    save_png(gradient_background((160, 120), seed=9), lib["backgrounds_dir"] / "nested" / "bg.png")
    index = scan_assets(lib["objects_dir"], lib["backgrounds_dir"])
    assert index.background_refs == ("bg_000.png", "bg_001.png")


def _record(i, mode="direct"):
    return ImageRecord(
        image=f"images/scene_{i:06d}_{mode}.png",
        voc=f"annotations/voc/scene_{i:06d}_{mode}.xml",
        blueprint=f"blueprints/scene_{i:06d}.json",
        blueprint_id=f"scene_{i:06d}",
        scene_index=i,
        blend_mode=mode,
        seed=i,
        background="bg.png",
    )


def test_expected_record_count():
    assert expected_record_count(10, 0, 3, True) == 30
    assert expected_record_count(10, 2, 3, True) == 24
    assert expected_record_count(10, 2, 3, False) == 8


def test_manifest_round_trip_and_digest(tmp_path):
    config = {"dataset": {"blend_modes": ["direct", "poisson"], "same_image_multiblend": True}}
    manifest = DatasetManifest(
        config=config,
        num_scenes=2,
        records=(_record(0), _record(0, "poisson"), _record(1), _record(1, "poisson")),
    )
    digest = write_manifest(manifest, tmp_path / "one.json")
    assert write_manifest(manifest, tmp_path / "two.json") == digest
    assert read_manifest(tmp_path / "one.json") == manifest


def test_manifest_record_count_mismatch(tmp_path):
    config = {"dataset": {"blend_modes": ["direct", "poisson"], "same_image_multiblend": True}}
    manifest = DatasetManifest(config=config, num_scenes=2, records=(_record(0),))
    write_manifest(manifest, tmp_path / "manifest.json")
    with pytest.raises(CorruptDataset):
        read_manifest(tmp_path / "manifest.json")
