"""
Поворот и масштабирование вырезок.

Поворот против часовой стрелки (как видно на экране) вокруг центра
вырезки, затем масштаб. Цвет - билинейная интерполяция с зажимом по краю,
альфа - билинейная интерполяция с нулями снаружи и порогом 128.
"""

import logging
import math

import numpy as np
from scipy import ndimage

from ..constants import ALPHA_THRESHOLD, MASK_ON
from ..exceptions import DegenerateTransform
from .raster import Cutout, Raster, tight_slices

logger = logging.getLogger(__name__)

# |cos|/|sin| ниже порога считаются нулём (повороты на 90/180/270)
_TRIG_SNAP = 1e-12
_EXTENT_EPS = 1e-6


def _snapped_trig(rotation: float):
    theta = math.radians(rotation)
    cos, sin = math.cos(theta), math.sin(theta)
    if abs(cos) < _TRIG_SNAP:
        cos = 0.0
    if abs(sin) < _TRIG_SNAP:
        sin = 0.0
    return cos, sin


def transformed_extent(size, scale: float, rotation: float):
    """
    Размер (w, h) холста, описанного вокруг повёрнутого и масштабированного
    прямоугольника size. Плотный бокс маски не больше этого размера.
    """
    w, h = size
    cos, sin = _snapped_trig(rotation)
    ext_w = scale * (w * abs(cos) + h * abs(sin))
    ext_h = scale * (w * abs(sin) + h * abs(cos))
    return max(1, math.ceil(ext_w - _EXTENT_EPS)), max(1, math.ceil(ext_h - _EXTENT_EPS))


def transform_cutout(cutout: Cutout, scale: float, rotation: float) -> Cutout:
    """
    Поворачивает вырезку вокруг центра и масштабирует её.

    Args:
        cutout: Исходная (плотная) вырезка
        scale: Масштаб, > 0
        rotation: Угол в градусах, против часовой стрелки

    Returns:
        Новая плотная вырезка; при scale=1, rotation=0 - та же самая

    Raises:
        ValueError: Если scale <= 0
        DegenerateTransform: Если после преобразования маска пуста
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if scale == 1.0 and rotation % 360.0 == 0.0:
        return cutout

    w, h = cutout.size
    out_w, out_h = transformed_extent((w, h), scale, rotation)
    cos, sin = _snapped_trig(rotation)

    # Центры выходных пикселей в непрерывных координатах относительно центра
    ys, xs = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    u = xs + 0.5 - out_w / 2.0
    v = ys + 0.5 - out_h / 2.0

    # Обратное отображение в непрерывные координаты исходника
    src_x = (u * cos - v * sin) / scale + w / 2.0
    src_y = (u * sin + v * cos) / scale + h / 2.0
    rows = src_y - 0.5
    cols = src_x - 0.5

    color = cutout.color.pixels
    out_color = np.empty((out_h, out_w, 3), dtype=np.uint8)
    for channel in range(3):
        sampled = ndimage.map_coordinates(
            color[:, :, channel].astype(np.float64), [rows, cols], order=1, mode="nearest"
        )
        out_color[:, :, channel] = np.clip(np.rint(sampled), 0, 255).astype(np.uint8)

    # Рамка из нулей: снаружи исходной маски альфа равна нулю
    padded_alpha = np.pad(cutout.alpha.pixels.astype(np.float64), 1, mode="constant")
    sampled_alpha = ndimage.map_coordinates(
        padded_alpha, [rows + 1.0, cols + 1.0], order=1, mode="nearest"
    )
    out_alpha = np.where(sampled_alpha >= ALPHA_THRESHOLD, MASK_ON, 0).astype(np.uint8)

    if not out_alpha.any():
        raise DegenerateTransform(
            f"{cutout.instance_label}/{cutout.view_id}: empty mask after "
            f"scale={scale:.4f} rotation={rotation:.2f}"
        )

    row_slice, col_slice = tight_slices(out_alpha)
    return Cutout(
        color=Raster(np.ascontiguousarray(out_color[row_slice, col_slice])),
        alpha=Raster(np.ascontiguousarray(out_alpha[row_slice, col_slice])),
        instance_label=cutout.instance_label,
        view_id=cutout.view_id,
    )
