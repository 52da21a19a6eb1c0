"""
Статистика состава датасета по манифесту и чертежам.
"""

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from ..constants import MANIFEST_FILE
from ..dataset import manifest_digest
from ..imaging import clip_box, iou
from ..scenes import SceneBlueprint
from .loader import DatasetView, open_dataset

logger = logging.getLogger(__name__)

# Доля стороны холста: sqrt(площадь обрезанного бокса / площадь холста)
BOX_SCALE_BINS = np.round(np.arange(0.0, 1.01, 0.1), 1)
OCCLUSION_BINS = np.round(np.arange(0.0, 1.01, 0.1), 1)


@dataclass(frozen=True)
class DatasetStats:
    """
    Отчёт о составе датасета.

    Attributes:
        num_scenes: Сцены с чертежами
        num_images: Записи манифеста
        digest: sha256 манифеста
        background_usage: фон -> число сцен
        instance_frequency: DataFrame (count, percent) по целевым экземплярам
        view_coverage: (instance, view) -> число вставок
        box_scale: Гистограмма размеров обрезанных боксов относительно холста
        occlusion: Гистограмма максимального IoU вставки с остальными
    """

    num_scenes: int
    num_images: int
    digest: str
    background_usage: pd.Series
    instance_frequency: pd.DataFrame
    view_coverage: pd.Series
    box_scale: pd.Series
    occlusion: pd.Series


def background_usage(background_refs: Sequence[str]) -> pd.Series:
    """Сколько раз встречается каждый фон (по алфавиту)."""
    return pd.Series(list(background_refs), dtype=object).value_counts().sort_index()


def placement_table(blueprints: Sequence[SceneBlueprint]) -> pd.DataFrame:
    """Одна строка на вставку: метка, вид, масштаб, относительный размер бокса и максимальный IoU."""
    rows = []
    for bp in blueprints:
        canvas_w, canvas_h = bp.canvas_size
        boxes = [clip_box(p.box, canvas_w, canvas_h) for p in bp.placements]
        canvas_area = float(canvas_w * canvas_h)
        max_iou = [0.0] * len(boxes)
        for a, b in itertools.combinations(range(len(boxes)), 2):
            if boxes[a] is None or boxes[b] is None:
                continue
            overlap = iou(boxes[a], boxes[b])
            max_iou[a] = max(max_iou[a], overlap)
            max_iou[b] = max(max_iou[b], overlap)
        for placement, box, overlap in zip(bp.placements, boxes, max_iou):
            rows.append(
                {
                    "blueprint_id": bp.blueprint_id,
                    "background": bp.background_ref,
                    "instance": placement.instance_label,
                    "view": placement.view_id,
                    "scale": placement.scale,
                    "rotation": placement.rotation,
                    "box_scale": float(np.sqrt(box.area / canvas_area)) if box is not None else 0.0,
                    "is_distractor": placement.is_distractor,
                    "max_iou": overlap,
                }
            )
    columns = ["blueprint_id", "background", "instance", "view", "scale", "rotation",
               "box_scale", "is_distractor", "max_iou"]
    return pd.DataFrame(rows, columns=columns)


def _histogram(values: pd.Series, bins: np.ndarray) -> pd.Series:
    # Крайний бин включает правую границу, чтобы значение 1.0 не терялось
    binned = pd.cut(values, bins=bins, include_lowest=True)
    return binned.value_counts(sort=False)


def stats_from_view(view: DatasetView) -> DatasetStats:
    blueprints: List[SceneBlueprint] = list(view.blueprints.values())
    placements = placement_table(blueprints)
    targets = placements[~placements["is_distractor"].astype(bool)]

    counts = targets["instance"].value_counts().sort_index()
    frequency = pd.DataFrame(
        {"count": counts, "percent": 100.0 * counts / max(int(counts.sum()), 1)}
    )
    coverage = placements.groupby(["instance", "view"]).size()

    stats = DatasetStats(
        num_scenes=len(blueprints),
        num_images=len(view.manifest.records),
        digest=manifest_digest(view.root / MANIFEST_FILE),
        background_usage=background_usage([bp.background_ref for bp in blueprints]),
        instance_frequency=frequency,
        view_coverage=coverage,
        box_scale=_histogram(placements["box_scale"], BOX_SCALE_BINS),
        occlusion=_histogram(placements["max_iou"], OCCLUSION_BINS),
    )
    logger.info(
        f"[STATS] {stats.num_scenes} scenes, {stats.num_images} images, "
        f"{len(placements)} placements, {len(stats.background_usage)} backgrounds"
    )
    return stats


def dataset_stats(dataset_dir: Union[str, Path]) -> DatasetStats:
    """
    Считает статистику датасета.

    Raises:
        CorruptDataset: Если датасет не читается
    """
    return stats_from_view(open_dataset(dataset_dir))


def format_stats(stats: DatasetStats) -> str:
    """Текстовый отчёт для консоли."""
    usage = stats.background_usage
    lines = [
        f"scenes: {stats.num_scenes}",
        f"images: {stats.num_images}",
        f"manifest sha256: {stats.digest}",
        "",
        f"background usage: {len(usage)} backgrounds, "
        f"min {int(usage.min()) if len(usage) else 0}, max {int(usage.max()) if len(usage) else 0}",
        usage.value_counts().sort_index().rename_axis("uses").rename("backgrounds").to_string(),
        "",
        "instance frequency:",
        stats.instance_frequency.to_string(float_format=lambda v: f"{v:.1f}"),
        "",
        "view coverage:",
        stats.view_coverage.to_string(),
        "",
        "box scale (fraction of canvas side) histogram:",
        stats.box_scale[stats.box_scale > 0].to_string(),
        "",
        "occlusion (max IoU) histogram:",
        stats.occlusion.to_string(),
    ]
    return "\n".join(lines)
