"""
Сериализация чертежей сцен.

Формат - канонический JSON (sort_keys, отступ 2, перевод строки в конце).
Именно этот текст сравнивается побайтно в проверках детерминизма.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from ..constants import FORMAT_VERSION
from ..exceptions import CorruptDataset, DatasetIoError
from .placement import Placement, SceneBlueprint

logger = logging.getLogger(__name__)


def blueprint_to_dict(bp: SceneBlueprint) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "blueprint_id": bp.blueprint_id,
        "background_ref": bp.background_ref,
        "canvas_size": list(bp.canvas_size),
        "scene_seed": bp.scene_seed,
        "placements": [
            {
                "instance_label": p.instance_label,
                "view_id": p.view_id,
                "scale": p.scale,
                "rotation": p.rotation,
                "anchor": list(p.anchor),
                "size": list(p.size),
                "z_order": p.z_order,
                "is_distractor": p.is_distractor,
            }
            for p in bp.placements
        ],
    }


def blueprint_from_dict(data: Dict[str, Any]) -> SceneBlueprint:
    placements = tuple(
        Placement(
            instance_label=str(item["instance_label"]),
            view_id=str(item["view_id"]),
            scale=float(item["scale"]),
            rotation=float(item["rotation"]),
            anchor=(int(item["anchor"][0]), int(item["anchor"][1])),
            size=(int(item["size"][0]), int(item["size"][1])),
            z_order=int(item["z_order"]),
            is_distractor=bool(item["is_distractor"]),
        )
        for item in data["placements"]
    )
    return SceneBlueprint(
        blueprint_id=str(data["blueprint_id"]),
        background_ref=str(data["background_ref"]),
        canvas_size=(int(data["canvas_size"][0]), int(data["canvas_size"][1])),
        placements=placements,
        scene_seed=int(data["scene_seed"]),
    )


def serialize_blueprint(bp: SceneBlueprint) -> str:
    return json.dumps(blueprint_to_dict(bp), sort_keys=True, indent=2) + "\n"


def parse_blueprint(text: str) -> SceneBlueprint:
    return blueprint_from_dict(json.loads(text))


def write_blueprint(bp: SceneBlueprint, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_blueprint(bp), encoding="utf-8")
    except OSError as e:
        raise DatasetIoError(f"cannot write blueprint {path}: {e}") from e
    return path


def read_blueprint(path: Union[str, Path]) -> SceneBlueprint:
    """
    Читает чертёж с диска.

    Raises:
        CorruptDataset: Если файл не читается или поля не согласованы
    """
    path = Path(path)
    try:
        return parse_blueprint(path.read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError, IndexError) as e:
        raise CorruptDataset(f"unreadable blueprint: {e}", path) from e
