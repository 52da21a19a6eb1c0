import json

import numpy as np
import pytest

from packages.core.config import EvalConfig
from packages.core.evaluation import (
    Detection,
    average_precision,
    evaluate,
    filter_ground_truth,
    format_ap_table,
    match_detections,
    read_detections,
)
from packages.core.exceptions import CorruptDataset, NoGroundTruth
from packages.core.imaging import BoundingBox

GT_BOX = BoundingBox(0, 0, 100, 100)


def _oracle_ap(scores, flags, num_gt):
    """Перебор всех отсечек по score и площадь под огибающей точности."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points = []
    for k in range(1, len(order) + 1):
        tp = sum(flags[i] for i in order[:k])
        points.append((tp / num_gt, tp / k))
    levels = sorted({recall for recall, _ in points if recall > 0})
    area, previous = 0.0, 0.0
    for level in levels:
        envelope = max(precision for recall, precision in points if recall >= level)
        area += (level - previous) * envelope
        previous = level
    return area


def test_match_examples():
    cfg = EvalConfig()
    gts = [("cup", GT_BOX)]
    # IoU 0.6: пересечение 60x100 при объединении 100x100
    assert match_detections([Detection("cup", BoundingBox(0, 0, 60, 100), 0.9)], gts, cfg) == [True]
    assert match_detections([Detection("cup", BoundingBox(0, 0, 40, 100), 0.9)], gts, cfg) == [False]
    dets = [Detection("cup", BoundingBox(0, 0, 90, 100), 0.5),
            Detection("cup", BoundingBox(0, 0, 100, 95), 0.8)]
    assert match_detections(dets, gts, cfg) == [False, True]


def test_match_requires_same_label():
    assert match_detections([Detection("box", GT_BOX, 1.0)], [("cup", GT_BOX)], EvalConfig()) == [False]


def test_ap_examples():
    assert average_precision([1.0], [True], 1) == 1.0
    assert average_precision([0.9, 0.8], [False, True], 1) == pytest.approx(0.5)
    assert average_precision([], [], 3) == 0.0
    with pytest.raises(NoGroundTruth):
        average_precision([0.5], [False], 0)


def test_ap_matches_bruteforce_oracle():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        num_gt = int(rng.integers(1, 6))
        n = int(rng.integers(1, 11))
        scores = list(rng.random(n))
        flags = [False] * n
        for i in rng.permutation(n)[: int(rng.integers(0, min(n, num_gt) + 1))]:
            flags[i] = True
        expected = _oracle_ap(scores, flags, num_gt)
        assert abs(average_precision(scores, flags, num_gt) - expected) <= 1e-9


def test_ap_depends_only_on_ranking():
    rng = np.random.default_rng(4)
    scores = rng.random(10)
    flags = list(rng.random(10) < 0.5)
    base = average_precision(list(scores), flags, 6)
    assert average_precision(list(np.exp(3 * scores) - 7), flags, 6) == pytest.approx(base, abs=1e-12)
    assert average_precision(list(scores ** 3), flags, 6) == pytest.approx(base, abs=1e-12)


def test_voc11_interpolation():
    assert average_precision([1.0], [True], 1, "voc11") == pytest.approx(1.0)
    # Огибающая 1/2 на всех 11 точках
    assert average_precision([0.9, 0.8], [False, True], 1, "voc11") == pytest.approx(0.5)
    # Полнота 0.5: точки 0..0.5 дают 1, остальные 0
    assert average_precision([0.9], [True], 2, "voc11") == pytest.approx(6 / 11)


def test_small_boxes_are_filtered():
    gts = [("cup", BoundingBox(0, 0, 50, 30)), ("cup", BoundingBox(0, 0, 49, 100)),
           ("cup", BoundingBox(0, 0, 100, 29.5))]
    assert filter_ground_truth(gts, (50, 30)) == gts[:1]


def test_small_gt_does_not_count_and_its_detection_is_fp():
    gt = {1: [("cup", GT_BOX), ("cup", BoundingBox(200, 200, 220, 210))]}
    dets = {1: [Detection("cup", GT_BOX, 0.9), Detection("cup", BoundingBox(200, 200, 220, 210), 0.95)]}
    result = evaluate(gt, dets)
    assert result.num_gt == {"cup": 1}
    assert result.per_class["cup"] == pytest.approx(0.5)


def test_map_is_mean_of_classes():
    gt = {
        1: [("cup", GT_BOX), ("box", BoundingBox(200, 0, 300, 100))],
        2: [("box", GT_BOX)],
    }
    dets = {
        1: [Detection("cup", GT_BOX, 0.9), Detection("box", BoundingBox(400, 0, 500, 100), 0.8)],
        2: [Detection("box", GT_BOX, 0.7)],
        3: [Detection("ghost", GT_BOX, 0.6)],
    }
    result = evaluate(gt, dets)
    assert result.skipped == ("ghost",)
    assert set(result.per_class) == {"box", "cup"}
    assert result.mean_ap == pytest.approx(np.mean(list(result.per_class.values())))
    assert all(0.0 <= ap <= 1.0 for ap in result.per_class.values())


def test_perfect_detector():
    gt = {i: [("cup", BoundingBox(10 * i, 0, 10 * i + 60, 40))] for i in range(1, 5)}
    dets = {i: [Detection(label, box, 1.0) for label, box in boxes] for i, boxes in gt.items()}
    result = evaluate(gt, dets)
    assert result.mean_ap == 1.0
    assert "100.0" in format_ap_table(result)


def test_only_small_ground_truth_is_an_error():
    with pytest.raises(NoGroundTruth):
        evaluate({1: [("cup", BoundingBox(0, 0, 10, 10))]}, {})


def test_detection_score_must_be_finite():
    with pytest.raises(ValueError):
        Detection("cup", GT_BOX, float("nan"))


def test_read_detections(tmp_path):
    path = tmp_path / "dets.json"
    path.write_text(json.dumps([
        {"image_id": 1, "category_id": 2, "bbox": [0, 0, 10, 20], "score": 0.5},
        {"file_name": "b.png", "category": "cup", "bbox": [1, 2, 3, 4], "score": 0.25},
    ]), encoding="utf-8")
    result = read_detections(path, {1: 1, "a.png": 1, 2: 2, "b.png": 2}, {1: "cup", 2: "box"})
    assert result[1] == [Detection("box", BoundingBox(0, 0, 10, 20), 0.5)]
    assert result[2] == [Detection("cup", BoundingBox(1, 2, 4, 6), 0.25)]

    path.write_text(json.dumps([{"image_id": 9, "category_id": 1, "bbox": [0, 0, 1, 1],
                                 "score": 1}]), encoding="utf-8")
    with pytest.raises(CorruptDataset):
        read_detections(path, {1: 1}, {1: "cup"})
