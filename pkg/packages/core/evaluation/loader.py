"""
Открытие сгенерированного датасета: манифест, чертежи, GT.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

from ..config import ConstraintConfig, EvalConfig
from ..constants import MANIFEST_FILE
from ..dataset import DatasetManifest, read_coco, read_manifest, read_voc
from ..exceptions import CorruptDataset
from ..scenes import SceneBlueprint, read_blueprint
from .metrics import GroundTruth

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetView:
    """Прочитанный датасет."""

    root: Path
    manifest: DatasetManifest
    blueprints: Dict[str, SceneBlueprint]

    def constraints(self) -> ConstraintConfig:
        """Ограничения из эха конфига в манифесте."""
        return ConstraintConfig.model_validate(self.manifest.config.get("constraints", {}))

    def eval_config(self) -> EvalConfig:
        return EvalConfig.model_validate(self.manifest.config.get("evaluation", {}))


def open_dataset(dataset_dir: Union[str, Path]) -> DatasetView:
    """
    Читает манифест и все чертежи, на которые он ссылается.

    Raises:
        CorruptDataset: Если манифест или чертёж не читается либо не согласован
    """
    root = Path(dataset_dir)
    manifest = read_manifest(root / MANIFEST_FILE)

    blueprints: Dict[str, SceneBlueprint] = {}
    for record in manifest.records:
        if record.blueprint_id in blueprints:
            continue
        path = root / record.blueprint
        bp = read_blueprint(path)
        if bp.blueprint_id != record.blueprint_id:
            raise CorruptDataset(
                f"blueprint id {bp.blueprint_id} does not match record {record.blueprint_id}", path
            )
        blueprints[record.blueprint_id] = bp

    logger.debug(f"[VERIFY] opened {root}: {len(manifest.records)} records, {len(blueprints)} scenes")
    return DatasetView(root=root, manifest=manifest, blueprints=blueprints)


def dataset_ground_truth(
    view: DatasetView,
) -> Tuple[Dict[int, List[GroundTruth]], Dict[Union[int, str], int], Dict[int, str]]:
    """
    GT датасета с id изображений в порядке записей манифеста (с 1).

    Берётся из COCO, если он записан, иначе из VOC-файлов.

    Returns:
        (image_id -> GT, image_id/file_name -> image_id, category_id -> метка)
    """
    ground_truth: Dict[int, List[GroundTruth]] = {}
    aliases: Dict[Union[int, str], int] = {}

    if view.manifest.coco:
        images, categories = read_coco(view.root / view.manifest.coco)
        for image_id, image in enumerate(images, start=1):
            ground_truth[image_id] = list(image.annotations)
            aliases[image_id] = image_id
            aliases[image.file_name] = image_id
        return ground_truth, aliases, {i: name for i, name in enumerate(categories, start=1)}

    labels = set()
    for image_id, record in enumerate(view.manifest.records, start=1):
        if record.voc is None:
            raise CorruptDataset("dataset has neither COCO nor VOC annotations", view.root)
        parsed = read_voc(view.root / record.voc)
        ground_truth[image_id] = parsed.boxes
        labels.update(name for name, _ in parsed.objects)
        aliases[image_id] = image_id
        aliases[Path(record.image).name] = image_id
    return ground_truth, aliases, {i: name for i, name in enumerate(sorted(labels), start=1)}
