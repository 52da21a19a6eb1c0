"""
Прямая вставка и вставка с размытой альфой.

Функции *_into работают на изменяемом рабочем массиве холста (рендер
сцены вставляет объекты по очереди в один массив), публичные paste_*
возвращают новый растр.
"""

import math
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..exceptions import NoOverlap
from ..imaging import Cutout, Raster

Slices = Tuple[slice, slice]


def overlap_slices(
    canvas_size: Tuple[int, int], patch_size: Tuple[int, int], anchor: Tuple[int, int]
) -> Tuple[Slices, Slices]:
    """
    Пересечение патча, поставленного в anchor, с холстом.

    Returns:
        ((rows, cols) на холсте, (rows, cols) в патче)

    Raises:
        NoOverlap: Если патч не задевает холст
    """
    canvas_w, canvas_h = canvas_size
    patch_w, patch_h = patch_size
    x, y = anchor
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + patch_w, canvas_w), min(y + patch_h, canvas_h)
    if x1 <= x0 or y1 <= y0:
        raise NoOverlap(
            f"patch {patch_w}x{patch_h} at {anchor} misses canvas {canvas_w}x{canvas_h}"
        )
    canvas_slices = (slice(y0, y1), slice(x0, x1))
    patch_slices = (slice(y0 - y, y1 - y), slice(x0 - x, x1 - x))
    return canvas_slices, patch_slices


def paste_direct_into(canvas: np.ndarray, cutout: Cutout, anchor: Tuple[int, int]) -> None:
    """Копирует пиксели под маской в рабочий массив."""
    canvas_slices, patch_slices = overlap_slices(
        (canvas.shape[1], canvas.shape[0]), cutout.size, anchor
    )
    region = canvas[canvas_slices]
    mask = cutout.alpha.pixels[patch_slices] > 0
    region[mask] = cutout.color.pixels[patch_slices][mask]


def paste_direct(bg: Raster, cutout: Cutout, anchor: Tuple[int, int]) -> Raster:
    """
    Вставка без блендинга: out = a*src + (1-a)*bg с бинарной a.

    Raises:
        NoOverlap: Если вырезка не пересекается с фоном
    """
    canvas = np.array(bg.pixels)
    paste_direct_into(canvas, cutout, anchor)
    return Raster(canvas)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Нормированное 1D ядро Гаусса радиуса ceil(3*sigma)."""
    radius = kernel_radius(sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def kernel_radius(sigma: float) -> int:
    return int(math.ceil(3.0 * sigma))


def soft_alpha(alpha: np.ndarray, sigma: float) -> np.ndarray:
    """
    Размывает бинарную альфу, расширяя поле на радиус ядра с каждой стороны.

    Returns:
        Массив float64 формы (h + 2r, w + 2r) со значениями в [0, 1]
    """
    radius = kernel_radius(sigma)
    kernel = gaussian_kernel(sigma)
    hard = np.pad((alpha > 0).astype(np.float64), radius, mode="constant")
    blurred = ndimage.convolve1d(hard, kernel, axis=0, mode="constant", cval=0.0)
    blurred = ndimage.convolve1d(blurred, kernel, axis=1, mode="constant", cval=0.0)
    return np.clip(blurred, 0.0, 1.0)


def paste_gaussian_into(
    canvas: np.ndarray, cutout: Cutout, anchor: Tuple[int, int], sigma: float
) -> None:
    """Альфа-композиция с мягкой альфой; пиксели с нулевой альфой не трогаются."""
    canvas_size = (canvas.shape[1], canvas.shape[0])
    overlap_slices(canvas_size, cutout.size, anchor)

    radius = kernel_radius(sigma)
    alpha = soft_alpha(cutout.alpha.pixels, sigma)
    color = np.pad(
        cutout.color.pixels.astype(np.float64),
        ((radius, radius), (radius, radius), (0, 0)),
        mode="edge",
    )
    padded_size = (alpha.shape[1], alpha.shape[0])
    padded_anchor = (anchor[0] - radius, anchor[1] - radius)
    canvas_slices, patch_slices = overlap_slices(canvas_size, padded_size, padded_anchor)

    region = canvas[canvas_slices]
    a = alpha[patch_slices]
    touched = a > 0
    if not touched.any():
        return
    a = a[touched][:, None]
    blended = a * color[patch_slices][touched] + (1.0 - a) * region[touched].astype(np.float64)
    region[touched] = np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def paste_gaussian(bg: Raster, cutout: Cutout, anchor: Tuple[int, int], sigma: float) -> Raster:
    """
    Вставка с размытой по Гауссу альфой.

    Raises:
        NoOverlap: Если вырезка не пересекается с фоном
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    canvas = np.array(bg.pixels)
    paste_gaussian_into(canvas, cutout, anchor, sigma)
    return Raster(canvas)
