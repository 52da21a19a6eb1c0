"""
AP / mAP детекций при пороге IoU 0.5.

GT-боксы меньше min_box (50x30) отбрасываются до сопоставления и не
входят в num_gt; детекция, попавшая только в такой бокс, считается FP.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import EvalConfig
from ..constants import INTERPOLATION_ALL_POINT, INTERPOLATION_VOC11
from ..exceptions import CorruptDataset, NoGroundTruth
from ..imaging import BoundingBox, iou

logger = logging.getLogger(__name__)

GroundTruth = Tuple[str, BoundingBox]
ImageKey = Union[int, str]


@dataclass(frozen=True)
class Detection:
    """Одна детекция: метка, бокс и уверенность."""

    label: str
    box: BoundingBox
    score: float

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"detection score must be finite, got {self.score}")


@dataclass(frozen=True)
class ApResult:
    """
    Итог оценки.

    Attributes:
        per_class: label -> AP в [0, 1] для классов с GT
        mean_ap: Среднее арифметическое per_class
        num_gt: label -> число GT после фильтра размеров
        skipped: Классы с детекциями, но без GT
    """

    per_class: Dict[str, float]
    mean_ap: float
    num_gt: Dict[str, int] = field(default_factory=dict)
    skipped: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict:
        return {
            "per_class": dict(self.per_class),
            "mAP": self.mean_ap,
            "num_gt": dict(self.num_gt),
            "skipped": list(self.skipped),
        }


def filter_ground_truth(
    gts: Sequence[GroundTruth], min_box: Tuple[float, float]
) -> List[GroundTruth]:
    """Оставляет GT с width >= min_w и height >= min_h."""
    min_w, min_h = min_box
    return [(label, box) for label, box in gts if box.width >= min_w and box.height >= min_h]


def match_detections(
    dets: Sequence[Detection], gts: Sequence[GroundTruth], cfg: EvalConfig
) -> List[bool]:
    """
    Сопоставляет детекции одного изображения с GT.

    Детекции обходятся по убыванию score (при равенстве - в порядке входа).
    Каждая берёт ещё не занятый GT своей метки с наибольшим IoU, если он не
    ниже порога; иначе это FP.

    Args:
        dets: Детекции изображения
        gts: GT изображения, уже отфильтрованные по размеру

    Returns:
        Флаги TP (True) / FP (False) в порядке входных детекций
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    used = [False] * len(gts)
    flags = [False] * len(dets)
    for i in order:
        det = dets[i]
        best_iou = -1.0
        best_gt = -1
        for j, (label, box) in enumerate(gts):
            if used[j] or label != det.label:
                continue
            overlap = iou(det.box, box)
            if overlap > best_iou:
                best_iou, best_gt = overlap, j
        if best_gt >= 0 and best_iou >= cfg.iou_threshold:
            used[best_gt] = True
            flags[i] = True
    return flags


def average_precision(
    scores: Sequence[float],
    flags: Sequence[bool],
    num_gt: int,
    interpolation: str = INTERPOLATION_ALL_POINT,
) -> float:
    """
    AP по детекциям одного класса со всех изображений.

    Детекции сортируются по убыванию score устойчиво, так что при равных
    score сохраняется порядок входа.

    Raises:
        NoGroundTruth: Если num_gt == 0
    """
    if num_gt < 1:
        raise NoGroundTruth(f"no ground truth for {len(scores)} detections")
    if not len(scores):
        return 0.0

    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    tp = np.asarray(flags, dtype=np.float64)[order]
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(1.0 - tp)
    recall = tp_cum / float(num_gt)
    precision = tp_cum / (tp_cum + fp_cum)

    if interpolation == INTERPOLATION_VOC11:
        ap = 0.0
        for t in np.arange(11) / 10.0:
            reached = recall >= t
            ap += (float(precision[reached].max()) if reached.any() else 0.0) / 11.0
        return ap

    if interpolation != INTERPOLATION_ALL_POINT:
        raise ValueError(f"unknown interpolation {interpolation!r}")

    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    changes = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[changes + 1] - mrec[changes]) * mpre[changes + 1]))


def evaluate(
    ground_truth: Mapping[ImageKey, Sequence[GroundTruth]],
    detections: Mapping[ImageKey, Sequence[Detection]],
    cfg: Optional[EvalConfig] = None,
) -> ApResult:
    """
    Считает AP по классам и mAP.

    Args:
        ground_truth: изображение -> GT (до фильтра размеров)
        detections: изображение -> детекции
        cfg: Протокол оценки

    Returns:
        ApResult; mAP усредняет только классы, у которых есть GT

    Raises:
        NoGroundTruth: Если после фильтра не осталось ни одного GT
    """
    cfg = cfg or EvalConfig()
    scores: Dict[str, List[float]] = {}
    flags: Dict[str, List[bool]] = {}
    num_gt: Dict[str, int] = {}

    unknown = [key for key in detections if key not in ground_truth]
    if unknown:
        logger.warning(f"[EVAL] detections for {len(unknown)} unknown images count as FP")

    keys = list(ground_truth) + unknown
    for key in keys:
        gts = filter_ground_truth(ground_truth.get(key, ()), cfg.min_box)
        for label, _ in gts:
            num_gt[label] = num_gt.get(label, 0) + 1
        dets = list(detections.get(key, ()))
        for det, flag in zip(dets, match_detections(dets, gts, cfg)):
            scores.setdefault(det.label, []).append(det.score)
            flags.setdefault(det.label, []).append(flag)

    if not num_gt:
        raise NoGroundTruth(
            f"no ground truth box of at least {cfg.min_box[0]}x{cfg.min_box[1]} pixels"
        )

    per_class: Dict[str, float] = {}
    skipped = []
    for label in sorted(set(num_gt) | set(scores)):
        try:
            per_class[label] = average_precision(
                scores.get(label, []), flags.get(label, []), num_gt.get(label, 0), cfg.interpolation
            )
        except NoGroundTruth as e:
            logger.warning(f"[EVAL] class {label} skipped: {e}")
            skipped.append(label)

    mean_ap = float(np.mean(list(per_class.values())))
    logger.info(f"[EVAL] {len(per_class)} classes, mAP={mean_ap:.4f}")
    return ApResult(
        per_class=per_class,
        mean_ap=mean_ap,
        num_gt={label: num_gt[label] for label in sorted(num_gt)},
        skipped=tuple(skipped),
    )


def format_ap_table(result: ApResult) -> str:
    """Строка заголовков (классы + mAP) и строка AP в процентах."""
    columns = list(result.per_class) + ["mAP"]
    values = [100.0 * ap for ap in result.per_class.values()] + [100.0 * result.mean_ap]
    table = pd.DataFrame([values], columns=columns, index=["AP"])
    return table.to_string(float_format=lambda v: f"{v:.1f}")


def read_detections(
    path: Union[str, Path],
    image_ids: Mapping[Union[int, str], ImageKey],
    categories: Mapping[int, str],
) -> Dict[ImageKey, List[Detection]]:
    """
    Читает результаты детектора в стиле COCO:
    [{"image_id", "category_id" | "category", "bbox": [x, y, w, h], "score"}].

    Args:
        image_ids: image_id (или file_name) из файла -> ключ изображения
        categories: category_id -> метка

    Raises:
        CorruptDataset: Если файл не читается или ссылается на неизвестное
    """
    path = Path(path)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(entries, list):
            raise ValueError("detections file must hold a JSON list")
        result: Dict[ImageKey, List[Detection]] = {}
        for entry in entries:
            image_ref = entry.get("image_id", entry.get("file_name"))
            if image_ref not in image_ids:
                raise ValueError(f"unknown image {image_ref!r}")
            if "category" in entry:
                label = str(entry["category"])
            else:
                label = categories[int(entry["category_id"])]
            x, y, w, h = (float(v) for v in entry["bbox"])
            result.setdefault(image_ids[image_ref], []).append(
                Detection(label=label, box=BoundingBox(x, y, x + w, y + h), score=float(entry["score"]))
            )
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CorruptDataset(f"unreadable detections: {e}", path) from e
    logger.info(f"[EVAL] {sum(len(v) for v in result.values())} detections from {path.name}")
    return result
