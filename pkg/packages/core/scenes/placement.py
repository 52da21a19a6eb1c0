"""
Размещение объектов на сцене.

Из случайного потока и ограничений строится SceneBlueprint: какие вырезки,
где, с каким масштабом и поворотом. Чертёж не зависит от режима блендинга,
а боксы аннотаций считаются только из него, без пикселей.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from ..config import AugmentConfig, ConstraintConfig
from ..constants import MIN_CANVAS_SIDE
from ..exceptions import DegenerateTransform, PlacementExhausted, SceneUnsatisfiable
from ..imaging import BoundingBox, box_at, clip_box, iou, transformed_extent, visible_fraction

logger = logging.getLogger(__name__)

# (scale, rotation) -> (w, h) преобразованной вырезки
SizeMeasure = Callable[[float, float], Tuple[int, int]]

_FRACTION_EPS = 1e-9


@dataclass(frozen=True)
class Placement:
    """
    Одна вставка объекта.

    Attributes:
        instance_label: Метка экземпляра
        view_id: Идентификатор вида
        scale: Масштаб относительно исходной вырезки
        rotation: Угол в градусах (против часовой стрелки)
        anchor: (x, y) левого верхнего угла преобразованной вырезки на фоне
        size: (w, h) преобразованной вырезки
        z_order: Порядок вставки (0 - первой)
        is_distractor: Отвлекающий объект, в аннотации не попадает
    """

    instance_label: str
    view_id: str
    scale: float
    rotation: float
    anchor: Tuple[int, int]
    size: Tuple[int, int]
    z_order: int = 0
    is_distractor: bool = False

    @property
    def cutout_ref(self) -> Tuple[str, str]:
        return self.instance_label, self.view_id

    @property
    def box(self) -> BoundingBox:
        """Полный (не обрезанный) бокс вставки."""
        return box_at(self.anchor, self.size)


@dataclass(frozen=True)
class SceneBlueprint:
    """
    Полностью определённая сцена: фон, упорядоченные вставки, seed.

    canvas_size хранит размер фона, чтобы геометрию можно было
    пересчитать без загрузки изображения.
    """

    blueprint_id: str
    background_ref: str
    canvas_size: Tuple[int, int]
    placements: Tuple[Placement, ...] = field(default_factory=tuple)
    scene_seed: int = 0

    def __post_init__(self):
        if not any(not p.is_distractor for p in self.placements):
            raise ValueError(f"blueprint {self.blueprint_id} has no target placement")
        object.__setattr__(self, "placements", tuple(self.placements))


class SceneCatalog(Protocol):
    """То, что нужно чертёжнику от библиотеки ассетов."""

    @property
    def target_labels(self) -> Sequence[str]: ...

    @property
    def distractor_labels(self) -> Sequence[str]: ...

    def views(self, label: str) -> Sequence[str]: ...

    def cutout_size(self, label: str, view_id: str) -> Tuple[int, int]: ...

    def transformed_size(
        self, label: str, view_id: str, scale: float, rotation: float
    ) -> Tuple[int, int]: ...

    def background_size(self, background_ref: str) -> Tuple[int, int]: ...


def _anchor_range(extent: int, canvas: int, min_fraction: float) -> Tuple[int, int]:
    """
    Диапазон целых позиций по одной оси, где видимая доля >= min_fraction
    и на холсте остаётся хотя бы один пиксель.
    """
    low = max(math.ceil(min_fraction * extent - extent - _FRACTION_EPS), 1 - extent)
    high = min(math.floor(canvas - min_fraction * extent + _FRACTION_EPS), canvas - 1)
    return low, high


def sample_placement(
    rng: np.random.Generator,
    existing: Sequence[BoundingBox],
    cutout_dims: Tuple[int, int],
    canvas_dims: Tuple[int, int],
    aug: AugmentConfig,
    cons: ConstraintConfig,
    measure: Optional[SizeMeasure] = None,
    cutout_ref: Tuple[str, str] = ("", ""),
    z_order: int = 0,
    is_distractor: bool = False,
) -> Placement:
    """
    Сэмплирует одну вставку с учётом ограничений.

    Поворот и масштаб тянутся один раз, лимит попыток тратится на позицию:
    якорь равномерен на допустимых по видимости позициях, кандидат
    отклоняется, если IoU с любым из existing выше max_pair_iou.

    Args:
        rng: Поток случайных чисел сцены
        existing: Обрезанные по холсту боксы уже размещённых объектов
        cutout_dims: (w, h) исходной вырезки
        canvas_dims: (w, h) фона
        aug: Аугментации
        cons: Ограничения
        measure: Размер преобразованной вырезки; по умолчанию - описанный
            прямоугольник полной маски
        cutout_ref: (instance_label, view_id) для записи в Placement

    Returns:
        Placement

    Raises:
        PlacementExhausted: Если за max_attempts_per_object не нашлось позиции
    """
    canvas_w, canvas_h = canvas_dims
    if canvas_w < MIN_CANVAS_SIDE or canvas_h < MIN_CANVAS_SIDE:
        raise ValueError(f"canvas {canvas_w}x{canvas_h} is smaller than {MIN_CANVAS_SIDE}px")

    rotation = float(rng.uniform(-aug.rotation_range, aug.rotation_range)) if aug.rotation_range > 0 else 0.0
    scale_low, scale_high = aug.scale_range
    scale = float(rng.uniform(scale_low, scale_high)) if scale_high > scale_low else float(scale_low)

    if measure is not None:
        width, height = measure(scale, rotation)
    else:
        width, height = transformed_extent(cutout_dims, scale, rotation)

    min_fraction = cons.effective_min_visible_fraction
    max_iou = cons.effective_max_pair_iou
    x_low, x_high = _anchor_range(width, canvas_w, min_fraction)
    y_low, y_high = _anchor_range(height, canvas_h, min_fraction)
    if x_low > x_high or y_low > y_high:
        raise PlacementExhausted(
            f"{cutout_ref[0]}/{cutout_ref[1]} {width}x{height} cannot reach visible "
            f"fraction {min_fraction} on {canvas_w}x{canvas_h}"
        )

    for _ in range(cons.max_attempts_per_object):
        x = int(rng.integers(x_low, x_high + 1))
        y = int(rng.integers(y_low, y_high + 1))
        box = box_at((x, y), (width, height))
        if visible_fraction(box, canvas_w, canvas_h) < min_fraction - _FRACTION_EPS:
            continue
        clipped = clip_box(box, canvas_w, canvas_h)
        if clipped is None:
            continue
        if any(iou(clipped, other) > max_iou for other in existing):
            continue
        return Placement(
            instance_label=cutout_ref[0],
            view_id=cutout_ref[1],
            scale=scale,
            rotation=rotation,
            anchor=(x, y),
            size=(int(width), int(height)),
            z_order=z_order,
            is_distractor=is_distractor,
        )

    raise PlacementExhausted(
        f"{cutout_ref[0]}/{cutout_ref[1]}: no position after "
        f"{cons.max_attempts_per_object} attempts"
    )


def _draw_count(rng: np.random.Generator, interval: Tuple[int, int]) -> int:
    low, high = interval
    return int(rng.integers(low, high + 1))


def compose_blueprint(
    rng: np.random.Generator,
    background_ref: str,
    catalog: SceneCatalog,
    aug: AugmentConfig,
    cons: ConstraintConfig,
    blueprint_id: str = "",
    scene_seed: int = 0,
) -> SceneBlueprint:
    """
    Собирает чертёж сцены.

    Тянет objects_per_scene целевых и distractors_per_scene отвлекающих
    объектов, перемешивает их порядок и размещает по одному. Экземпляр
    выбирается равномерно с возвращением, вид - равномерно среди доступных
    (или канонический первый, если выборка видов выключена). Объекты,
    исчерпавшие попытки, выбрасываются.

    Raises:
        SceneUnsatisfiable: Если не удалось разместить ни одного целевого объекта
    """
    targets = list(catalog.target_labels)
    distractors = list(catalog.distractor_labels)
    if not targets:
        raise SceneUnsatisfiable(f"{blueprint_id}: asset index has no target instances")

    canvas_dims = catalog.background_size(background_ref)

    n_targets = _draw_count(rng, aug.objects_per_scene)
    n_distractors = _draw_count(rng, aug.distractors_per_scene) if distractors else 0
    kinds = np.array([False] * n_targets + [True] * n_distractors, dtype=bool)
    kinds = kinds[rng.permutation(kinds.size)] if kinds.size else kinds

    placements: List[Placement] = []
    boxes: List[BoundingBox] = []
    dropped = 0
    for is_distractor in kinds.tolist():
        pool = distractors if is_distractor else targets
        label = pool[int(rng.integers(len(pool)))]
        views = list(catalog.views(label))
        view_id = views[int(rng.integers(len(views)))] if aug.use_view_sampling else views[0]

        def measure(scale: float, rotation: float, _label=label, _view=view_id) -> Tuple[int, int]:
            return catalog.transformed_size(_label, _view, scale, rotation)

        try:
            placement = sample_placement(
                rng,
                boxes,
                catalog.cutout_size(label, view_id),
                canvas_dims,
                aug,
                cons,
                measure=measure,
                cutout_ref=(label, view_id),
                z_order=len(placements),
                is_distractor=is_distractor,
            )
        except (PlacementExhausted, DegenerateTransform) as e:
            dropped += 1
            logger.debug(f"[PLACEMENT] {blueprint_id}: dropped {label}/{view_id}: {e}")
            continue

        placements.append(placement)
        clipped = clip_box(placement.box, *canvas_dims)
        boxes.append(clipped)

    if not any(not p.is_distractor for p in placements):
        raise SceneUnsatisfiable(
            f"{blueprint_id}: none of {n_targets} target objects could be placed on {background_ref}"
        )

    if dropped:
        logger.debug(f"[PLACEMENT] {blueprint_id}: placed {len(placements)}, dropped {dropped}")

    return SceneBlueprint(
        blueprint_id=blueprint_id,
        background_ref=background_ref,
        canvas_size=(int(canvas_dims[0]), int(canvas_dims[1])),
        placements=tuple(placements),
        scene_seed=int(scene_seed),
    )


def blueprint_boxes(
    bp: SceneBlueprint, canvas_dims: Optional[Tuple[int, int]] = None
) -> List[Tuple[str, BoundingBox, bool]]:
    """
    Боксы вставок, обрезанные по холсту, в порядке вставок.

    Returns:
        Список (label, box, is_distractor)
    """
    canvas_w, canvas_h = canvas_dims or bp.canvas_size
    result = []
    for placement in bp.placements:
        clipped = clip_box(placement.box, canvas_w, canvas_h)
        if clipped is None:
            raise ValueError(
                f"blueprint {bp.blueprint_id}: placement {placement.z_order} is off-canvas"
            )
        result.append((placement.instance_label, clipped, placement.is_distractor))
    return result


def target_annotations(bp: SceneBlueprint) -> List[Tuple[str, BoundingBox]]:
    """Аннотации сцены: только целевые вставки, отвлекающие объекты отброшены."""
    return [(label, box) for label, box, is_distractor in blueprint_boxes(bp) if not is_distractor]
