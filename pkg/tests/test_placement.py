import itertools
import math

import numpy as np
import pytest

from packages.core.config import AugmentConfig, ConstraintConfig
from packages.core.exceptions import PlacementExhausted, SceneUnsatisfiable
from packages.core.imaging import BoundingBox, clip_box, iou, transformed_extent, visible_fraction
from packages.core.scenes import (
    Placement,
    SceneBlueprint,
    blueprint_boxes,
    compose_blueprint,
    parse_blueprint,
    sample_placement,
    serialize_blueprint,
    target_annotations,
)


class FakeCatalog:
    """Каталог без пикселей: размеры считаются по описанному прямоугольнику."""

    def __init__(self, targets=("a", "b", "c"), distractors=(), views=("v0", "v1", "v2"),
                 cutout=(40, 30), canvas=(320, 240)):
        self.target_labels = tuple(targets)
        self.distractor_labels = tuple(distractors)
        self._views = tuple(views)
        self._cutout = cutout
        self._canvas = canvas

    def views(self, label):
        return self._views

    def cutout_size(self, label, view_id):
        return self._cutout

    def transformed_size(self, label, view_id, scale, rotation):
        return transformed_extent(self._cutout, scale, rotation)

    def background_size(self, background_ref):
        return self._canvas


def test_no_truncation_keeps_box_inside():
    rng = np.random.default_rng(3)
    cons = ConstraintConfig(allow_truncation=False)
    for _ in range(50):
        p = sample_placement(rng, [], (40, 30), (200, 150), AugmentConfig(), cons)
        assert visible_fraction(p.box, 200, 150) == 1.0


def test_no_occlusion_with_full_canvas_box_exhausts():
    rng = np.random.default_rng(0)
    cons = ConstraintConfig(allow_occlusion=False, max_attempts_per_object=20)
    with pytest.raises(PlacementExhausted):
        sample_placement(rng, [BoundingBox(0, 0, 200, 150)], (40, 30), (200, 150),
                         AugmentConfig(), cons)


def test_sample_placement_is_deterministic():
    args = ([], (40, 30), (200, 150), AugmentConfig(), ConstraintConfig())
    first = sample_placement(np.random.default_rng(42), *args)
    second = sample_placement(np.random.default_rng(42), *args)
    assert first == second


def test_sample_placement_respects_visibility_threshold():
    rng = np.random.default_rng(11)
    cons = ConstraintConfig(min_visible_fraction=0.25)
    for _ in range(200):
        p = sample_placement(rng, [], (40, 30), (64, 48), AugmentConfig(), cons)
        assert visible_fraction(p.box, 64, 48) >= 0.25 - 1e-9


def test_rotation_range_zero_gives_zero_rotation():
    rng = np.random.default_rng(5)
    p = sample_placement(rng, [], (40, 30), (200, 150), AugmentConfig(rotation_range=0.0),
                         ConstraintConfig())
    assert p.rotation == 0.0
    assert p.size == transformed_extent((40, 30), p.scale, 0.0)


def test_small_canvas_is_rejected():
    with pytest.raises(ValueError):
        sample_placement(np.random.default_rng(0), [], (10, 10), (20, 20), AugmentConfig(),
                         ConstraintConfig())


def test_single_object_scene():
    aug = AugmentConfig(objects_per_scene=(1, 1), distractors_per_scene=(0, 0))
    bp = compose_blueprint(np.random.default_rng(1), "bg.png", FakeCatalog(), aug,
                           ConstraintConfig(), "scene_000000", 1)
    assert len(bp.placements) == 1


def test_blueprint_serialization_is_deterministic():
    catalog = FakeCatalog(distractors=("d",))
    texts = [
        serialize_blueprint(compose_blueprint(np.random.default_rng(99), "bg.png", catalog,
                                              AugmentConfig(), ConstraintConfig(), "s", 99))
        for _ in range(2)
    ]
    assert texts[0] == texts[1]
    assert serialize_blueprint(parse_blueprint(texts[0])) == texts[0]


def test_view_sampling_off_uses_first_view():
    aug = AugmentConfig(use_view_sampling=False)
    bp = compose_blueprint(np.random.default_rng(4), "bg.png", FakeCatalog(), aug,
                           ConstraintConfig(), "s", 4)
    assert {p.view_id for p in bp.placements} == {"v0"}


def test_500_default_blueprints_satisfy_constraints():
    catalog = FakeCatalog(distractors=("d1", "d2"))
    cons = ConstraintConfig()
    canvas_w, canvas_h = catalog.background_size("bg.png")
    for seed in range(500):
        bp = parse_blueprint(serialize_blueprint(
            compose_blueprint(np.random.default_rng(seed), "bg.png", catalog, AugmentConfig(),
                              cons, f"s{seed}", seed)
        ))
        boxes = []
        for p in bp.placements:
            assert visible_fraction(p.box, canvas_w, canvas_h) >= 0.25 - 1e-9
            boxes.append(clip_box(p.box, canvas_w, canvas_h))
        for a, b in itertools.combinations(boxes, 2):
            assert iou(a, b) <= 0.75 + 1e-9


def test_unsatisfiable_scene():
    catalog = FakeCatalog(cutout=(400, 400), canvas=(64, 64))
    aug = AugmentConfig(scale_range=(1.0, 1.0), rotation_range=0.0)
    cons = ConstraintConfig(allow_truncation=False)
    with pytest.raises(SceneUnsatisfiable):
        compose_blueprint(np.random.default_rng(0), "bg.png", catalog, aug, cons, "s", 0)


def _placement(anchor, size=(20, 10), distractor=False, z=0, label="a"):
    return Placement(label, "v0", 1.0, 0.0, anchor, size, z, distractor)


def test_blueprint_boxes_centered_and_clipped():
    bp = SceneBlueprint("s", "bg.png", (100, 100), (_placement((40, 45)),))
    assert blueprint_boxes(bp) == [("a", BoundingBox(40, 45, 60, 55), False)]

    bp = SceneBlueprint("s", "bg.png", (100, 100), (_placement((-10, 0)),))
    assert blueprint_boxes(bp)[0][1].xmin == 0.0


def test_target_annotations_drop_distractors():
    bp = SceneBlueprint(
        "s", "bg.png", (100, 100),
        (_placement((0, 0)), _placement((50, 50), distractor=True, z=1, label="d")),
    )
    assert [label for label, _ in target_annotations(bp)] == ["a"]


def test_blueprint_needs_a_target():
    with pytest.raises(ValueError):
        SceneBlueprint("s", "bg.png", (100, 100), (_placement((0, 0), distractor=True),))


def test_anchor_draws_are_integer():
    rng = np.random.default_rng(8)
    p = sample_placement(rng, [], (33, 21), (120, 90), AugmentConfig(), ConstraintConfig())
    assert all(isinstance(v, int) for v in p.anchor)
    assert math.isfinite(p.scale)
