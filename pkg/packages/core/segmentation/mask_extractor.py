"""
Классическое выделение маски объекта на однородном фоне.

Порядок: статистика фона по рамке -> порог по евклидову расстоянию в RGB ->
открытие + закрытие квадратом -> крупнейшая 4-связная компонента -> заливка дыр.
Внешние маски (файл рядом с видом объекта) этот модуль полностью обходят.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..config import MaskParams
from ..constants import MASK_ON, MIN_MASK_IMAGE_SIDE
from ..exceptions import BadBorder, MaskVanished, NoForeground
from ..imaging import Raster

logger = logging.getLogger(__name__)

# 4-связность для компонент
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def square_structure(radius: int) -> np.ndarray:
    """Квадрат (2r+1)x(2r+1): диск радиуса r в метрике L∞."""
    ys, xs = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return np.maximum(np.abs(xs), np.abs(ys)) <= radius


def estimate_background_color(
    img: Raster, border_width: int
) -> Tuple[Tuple[float, float, float], Tuple[float, float, float]]:
    """
    Оценивает цвет фона по рамке изображения.

    Args:
        img: Цветной растр
        border_width: Ширина рамки в пикселях

    Returns:
        (mean RGB, std RGB) по пикселям рамки

    Raises:
        BadBorder: Если рамка не меньше половины меньшей стороны
    """
    if img.channels != 3:
        raise ValueError("background estimation needs a 3-channel raster")
    if border_width < 1 or border_width >= min(img.width, img.height) / 2:
        raise BadBorder(
            f"border_width={border_width} must be in [1, min({img.width}, {img.height})/2)"
        )

    frame = np.ones((img.height, img.width), dtype=bool)
    frame[border_width:-border_width, border_width:-border_width] = False
    samples = img.pixels[frame].astype(np.float64)

    mean = samples.mean(axis=0)
    std = samples.std(axis=0)
    return tuple(float(v) for v in mean), tuple(float(v) for v in std)


def _open_close(foreground: np.ndarray, radius: int) -> np.ndarray:
    """Открытие, затем закрытие квадратом; поле дополнено нулями, чтобы край не обрезал формы."""
    if radius == 0:
        return foreground.copy()
    structure = square_structure(radius)
    pad = radius + 1
    padded = np.pad(foreground, pad, mode="constant", constant_values=False)
    opened = ndimage.binary_opening(padded, structure=structure)
    closed = ndimage.binary_closing(opened, structure=structure)
    return closed[pad:-pad, pad:-pad]


def largest_component(foreground: np.ndarray) -> np.ndarray:
    """
    Оставляет крупнейшую 4-связную компоненту.

    При равных площадях побеждает компонента, встреченная раньше при
    построчном обходе.
    """
    labels, count = ndimage.label(foreground, structure=FOUR_CONNECTED)
    if count == 0:
        return np.zeros_like(foreground, dtype=bool)
    sizes = np.bincount(labels.ravel())[1:]
    winner = int(np.argmax(sizes)) + 1
    return labels == winner


def refine_mask(mask: Raster, morph_radius: int) -> Raster:
    """
    Чистит маску открытием и закрытием квадратом радиуса morph_radius (L∞).

    Args:
        mask: Непустая одноканальная маска
        morph_radius: Радиус структурного элемента; 0 - без изменений

    Returns:
        Очищенная бинарная маска

    Raises:
        MaskVanished: Если морфология стёрла всё
    """
    if mask.channels != 1:
        raise ValueError("refine_mask needs a 1-channel raster")
    foreground = mask.pixels > 0
    if not foreground.any():
        raise ValueError("refine_mask needs a non-empty mask")
    if morph_radius == 0:
        return mask

    refined = _open_close(foreground, morph_radius)
    if not refined.any():
        raise MaskVanished(f"morphology with radius {morph_radius} erased the mask")
    return Raster(np.where(refined, MASK_ON, 0).astype(np.uint8))


def threshold_foreground(img: Raster, params: MaskParams) -> np.ndarray:
    """Пиксели дальше color_threshold от цвета фона (евклидово расстояние в RGB)."""
    mean, std = estimate_background_color(img, params.border_width)
    diff = img.pixels.astype(np.float64) - np.asarray(mean)
    distance = np.sqrt(np.sum(diff * diff, axis=2))
    logger.debug(
        f"[MASKGEN] background mean={tuple(round(v, 1) for v in mean)} "
        f"std={tuple(round(v, 1) for v in std)}"
    )
    return distance > params.color_threshold


def extract_mask(img: Raster, params: MaskParams) -> Raster:
    """
    Выделяет бинарную маску объекта, снятого на однородном фоне.

    Args:
        img: Цветное изображение не меньше 32x32
        params: Параметры сегментации

    Returns:
        Маска (0/255), одна 4-связная компонента

    Raises:
        NoForeground: Если итоговая маска пуста
        BadBorder: Если рамка слишком широкая для изображения
    """
    if img.width < MIN_MASK_IMAGE_SIDE or img.height < MIN_MASK_IMAGE_SIDE:
        raise ValueError(
            f"image {img.width}x{img.height} is smaller than "
            f"{MIN_MASK_IMAGE_SIDE}x{MIN_MASK_IMAGE_SIDE}"
        )

    foreground = threshold_foreground(img, params)
    foreground = _open_close(foreground, params.morph_radius)
    foreground = largest_component(foreground)
    if params.fill_holes and foreground.any():
        foreground = ndimage.binary_fill_holes(foreground)

    if not foreground.any():
        raise NoForeground("no pixel differs from the border background color")

    return Raster(np.where(foreground, MASK_ON, 0).astype(np.uint8))
