"""
Чертежи сцен: размещение объектов с ограничениями окклюзии и усечения.
"""

from .blueprint_io import (
    blueprint_from_dict,
    blueprint_to_dict,
    parse_blueprint,
    read_blueprint,
    serialize_blueprint,
    write_blueprint,
)
from .placement import (
    Placement,
    SceneBlueprint,
    SceneCatalog,
    blueprint_boxes,
    compose_blueprint,
    sample_placement,
    target_annotations,
)

__all__ = [
    "Placement",
    "SceneBlueprint",
    "SceneCatalog",
    "blueprint_boxes",
    "blueprint_from_dict",
    "blueprint_to_dict",
    "compose_blueprint",
    "parse_blueprint",
    "read_blueprint",
    "sample_placement",
    "serialize_blueprint",
    "target_annotations",
    "write_blueprint",
]
