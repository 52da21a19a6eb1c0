"""
Базовые растры, геометрия боксов и преобразования вырезок.
"""

from .geometry import BoundingBox, box_at, clip_box, intersection_area, iou, visible_fraction
from .raster import (
    Cutout,
    Raster,
    binarize,
    load_color,
    load_mask,
    make_cutout,
    save_raster,
    tight_slices,
)
from .transform import transform_cutout, transformed_extent

__all__ = [
    "BoundingBox",
    "Cutout",
    "Raster",
    "binarize",
    "box_at",
    "clip_box",
    "intersection_area",
    "iou",
    "load_color",
    "load_mask",
    "make_cutout",
    "save_raster",
    "tight_slices",
    "transform_cutout",
    "transformed_extent",
    "visible_fraction",
]
