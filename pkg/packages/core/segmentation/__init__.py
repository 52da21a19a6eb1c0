"""
Выделение масок объектов (классическая замена обученного сегментатора).
"""

from .mask_extractor import (
    square_structure,
    estimate_background_color,
    extract_mask,
    largest_component,
    refine_mask,
    threshold_foreground,
)

__all__ = [
    "square_structure",
    "estimate_background_color",
    "extract_mask",
    "largest_component",
    "refine_mask",
    "threshold_foreground",
]
