"""
Ввод-вывод датасета: ассеты, seed'ы, аннотации, манифест.
"""

from .assets import AssetIndex, AssetStore, ObjectView, scan_assets, scan_objects
from .manifest import (
    DatasetManifest,
    ImageRecord,
    expected_record_count,
    file_sha256,
    manifest_digest,
    read_manifest,
    serialize_manifest,
    write_manifest,
)
from .seeds import assign_backgrounds, derive_scene_seed, scene_rng
from .writers import (
    AnnotatedImage,
    VocAnnotation,
    box_from_voc,
    coco_document,
    object_element,
    read_coco,
    read_voc,
    size_element,
    voc_box,
    voc_document,
    write_coco,
    write_voc,
)

__all__ = [
    "AnnotatedImage",
    "AssetIndex",
    "AssetStore",
    "DatasetManifest",
    "ImageRecord",
    "ObjectView",
    "VocAnnotation",
    "assign_backgrounds",
    "box_from_voc",
    "coco_document",
    "derive_scene_seed",
    "expected_record_count",
    "file_sha256",
    "manifest_digest",
    "object_element",
    "read_coco",
    "read_manifest",
    "read_voc",
    "scan_assets",
    "scan_objects",
    "scene_rng",
    "serialize_manifest",
    "size_element",
    "voc_box",
    "voc_document",
    "write_coco",
    "write_manifest",
    "write_voc",
]
