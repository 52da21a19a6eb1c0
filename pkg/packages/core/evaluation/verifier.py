"""
Независимая проверка сгенерированного датасета.

Ограничения окклюзии и усечения пересчитываются по чертежам, аннотации
сверяются с чертежами и между вариантами блендинга одной сцены.
"""

import itertools
import logging
import xml.etree.ElementTree as ET
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from PIL import Image, UnidentifiedImageError

from ..config import ConstraintConfig
from ..dataset import file_sha256, read_coco, read_voc, voc_box
from ..exceptions import CorruptDataset
from ..imaging import clip_box, iou, visible_fraction
from ..scenes import SceneBlueprint, target_annotations
from .loader import DatasetView, open_dataset

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    blueprint_id: str
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.blueprint_id} [{self.kind}] {self.detail}"


@dataclass(frozen=True)
class VerificationReport:
    """Итог проверки: пустой список нарушений - датасет корректен."""

    scenes_checked: int
    images_checked: int
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_blueprint(bp: SceneBlueprint, cons: ConstraintConfig) -> List[Violation]:
    """Пересчитывает попарные IoU (по обрезанным боксам) и видимые доли."""
    canvas_w, canvas_h = bp.canvas_size
    min_fraction = cons.effective_min_visible_fraction
    max_iou = cons.effective_max_pair_iou
    violations = []

    clipped = []
    for placement in bp.placements:
        box = placement.box
        fraction = visible_fraction(box, canvas_w, canvas_h)
        if fraction < min_fraction - _EPS:
            violations.append(
                Violation(
                    bp.blueprint_id,
                    "truncation",
                    f"placement {placement.z_order} ({placement.instance_label}) visible "
                    f"{fraction:.4f} < {min_fraction}",
                )
            )
        clipped.append(clip_box(box, canvas_w, canvas_h))

    for (a, box_a), (b, box_b) in itertools.combinations(enumerate(clipped), 2):
        if box_a is None or box_b is None:
            continue
        overlap = iou(box_a, box_b)
        if overlap > max_iou + _EPS:
            violations.append(
                Violation(
                    bp.blueprint_id,
                    "occlusion",
                    f"placements {a} and {b} IoU {overlap:.4f} > {max_iou}",
                )
            )
    return violations


def voc_invariant_bytes(path: Path) -> bytes:
    """Элементы size и object VOC-файла: часть, общая для всех режимов сцены."""
    try:
        root = ET.parse(path).getroot()
    except (OSError, ET.ParseError) as e:
        raise CorruptDataset(f"unreadable VOC annotation: {e}", path) from e
    parts = [ET.tostring(node, encoding="utf-8") for node in root if node.tag in ("size", "object")]
    return b"".join(parts)


def _image_size(path: Path) -> Tuple[int, int]:
    try:
        with Image.open(path) as image:
            return int(image.width), int(image.height)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise CorruptDataset(f"unreadable image: {e}", path) from e


def verify_view(
    view: DatasetView, cons: Optional[ConstraintConfig] = None, check_digests: bool = True
) -> VerificationReport:
    """Проверяет уже открытый датасет."""
    cons = cons or view.constraints()
    violations: List[Violation] = []

    for bp in view.blueprints.values():
        violations.extend(check_blueprint(bp, cons))

    failed = set(view.manifest.failed_scenes)
    invariant: Dict[str, Dict[bytes, List[str]]] = defaultdict(dict)

    for record in view.manifest.records:
        bp = view.blueprints[record.blueprint_id]
        if record.scene_index in failed:
            violations.append(
                Violation(bp.blueprint_id, "manifest", "scene is listed as failed but has records")
            )

        image_path = view.root / record.image
        size = _image_size(image_path)
        if size != tuple(bp.canvas_size):
            violations.append(
                Violation(bp.blueprint_id, "image", f"{record.image} is {size}, canvas {bp.canvas_size}")
            )
        if check_digests and record.image_sha256 and file_sha256(image_path) != record.image_sha256:
            violations.append(Violation(bp.blueprint_id, "digest", f"{record.image} changed"))

        if record.voc is None:
            continue
        voc_path = view.root / record.voc
        parsed = read_voc(voc_path)
        expected = [(label, voc_box(box)) for label, box in target_annotations(bp)]
        if list(parsed.objects) != expected:
            violations.append(
                Violation(
                    bp.blueprint_id,
                    "annotation",
                    f"{record.voc} boxes differ from the blueprint",
                )
            )
        if parsed.filename != Path(record.image).name:
            violations.append(
                Violation(bp.blueprint_id, "annotation", f"{record.voc} names {parsed.filename}")
            )
        invariant[bp.blueprint_id].setdefault(voc_invariant_bytes(voc_path), []).append(
            record.blend_mode
        )

    for blueprint_id, variants in invariant.items():
        if len(variants) > 1:
            groups = " vs ".join("/".join(modes) for modes in variants.values())
            violations.append(
                Violation(blueprint_id, "invariance", f"VOC annotations differ across modes: {groups}")
            )

    if view.manifest.coco:
        violations.extend(_check_coco(view))

    report = VerificationReport(
        scenes_checked=len(view.blueprints),
        images_checked=len(view.manifest.records),
        violations=tuple(violations),
    )
    for violation in report.violations:
        logger.warning(f"[VERIFY] {violation}")
    logger.info(
        f"[VERIFY] {report.scenes_checked} scenes, {report.images_checked} images, "
        f"{len(report.violations)} violations"
    )
    return report


def _check_coco(view: DatasetView) -> List[Violation]:
    coco_path = view.root / view.manifest.coco
    images, _ = read_coco(coco_path)
    if len(images) != len(view.manifest.records):
        raise CorruptDataset(
            f"COCO has {len(images)} images, manifest {len(view.manifest.records)}", coco_path
        )
    violations = []
    for image, record in zip(images, view.manifest.records):
        bp = view.blueprints[record.blueprint_id]
        if image.file_name != Path(record.image).name:
            raise CorruptDataset(
                f"COCO image {image.file_name} out of order, expected {record.image}", coco_path
            )
        if list(image.annotations) != target_annotations(bp):
            violations.append(
                Violation(bp.blueprint_id, "coco", f"{image.file_name} boxes differ from the blueprint")
            )
    return violations


def verify_dataset(
    dataset_dir: Union[str, Path],
    cons: Optional[ConstraintConfig] = None,
    check_digests: bool = True,
) -> VerificationReport:
    """
    Проверяет датасет на диске.

    Args:
        dataset_dir: Корень датасета (там, где manifest.json)
        cons: Ограничения; по умолчанию - из эха конфига в манифесте
        check_digests: Сверять sha256 изображений

    Returns:
        VerificationReport с нарушениями по id сцен

    Raises:
        CorruptDataset: Если файлы не читаются или не согласованы
    """
    return verify_view(open_dataset(dataset_dir), cons, check_digests)
