"""
Растры и вырезки объектов.

Растр хранится как numpy-массив uint8: (H, W, 3) для цвета и (H, W) для
маски. Начало координат - левый верхний угол, x вправо, y вниз.
Массивы внутри значений помечаются read-only, чтобы их можно было
безопасно разделять между воркерами.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..constants import ALPHA_THRESHOLD, MASK_ON
from ..exceptions import DatasetIoError, UnreadableImage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class Raster:
    """
    8-битный растр: цвет (3 канала) или маска (1 канал).

    Attributes:
        pixels: Массив uint8 формы (H, W, 3) или (H, W)
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.dtype != np.uint8:
            raise ValueError(f"raster must be uint8, got {pixels.dtype}")
        if pixels.ndim == 3 and pixels.shape[2] != 3:
            raise ValueError(f"color raster must have 3 channels, got {pixels.shape[2]}")
        if pixels.ndim not in (2, 3):
            raise ValueError(f"raster must be 2D or 3D, got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError(f"raster must be at least 1x1, got shape {pixels.shape}")
        if pixels.flags.writeable:
            pixels = pixels.copy()
            pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def size(self) -> Tuple[int, int]:
        """(width, height)"""
        return self.width, self.height

    def __eq__(self, other) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True, eq=False)
class Cutout:
    """
    Вырезка вида объекта: цвет + бинарная альфа + метка экземпляра + id вида.

    Вырезка хранится "плотно": бокс {alpha > 0} касается всех четырёх краёв.
    """

    color: Raster
    alpha: Raster
    instance_label: str
    view_id: str

    def __post_init__(self):
        if self.color.channels != 3:
            raise ValueError("cutout color must be a 3-channel raster")
        if self.alpha.channels != 1:
            raise ValueError("cutout alpha must be a 1-channel raster")
        if self.color.size != self.alpha.size:
            raise ValueError(
                f"cutout color {self.color.size} and alpha {self.alpha.size} differ in size"
            )
        foreground = self.alpha.pixels > 0
        if not foreground.any():
            raise ValueError(f"cutout {self.instance_label}/{self.view_id} has an empty mask")
        rows = foreground.any(axis=1)
        cols = foreground.any(axis=0)
        if not (rows[0] and rows[-1] and cols[0] and cols[-1]):
            raise ValueError(f"cutout {self.instance_label}/{self.view_id} is not tight")

    @property
    def size(self) -> Tuple[int, int]:
        return self.color.size

    @property
    def ref(self) -> Tuple[str, str]:
        return self.instance_label, self.view_id


def binarize(mask: np.ndarray) -> np.ndarray:
    """Переводит маску в {0, 255} с порогом 128."""
    return np.where(np.asarray(mask) >= ALPHA_THRESHOLD, MASK_ON, 0).astype(np.uint8)


def tight_slices(mask: np.ndarray) -> Tuple[slice, slice]:
    """
    Срезы (rows, cols) плотного бокса ненулевых пикселей маски.

    Raises:
        ValueError: Если маска пустая
    """
    foreground = np.asarray(mask) > 0
    rows = np.flatnonzero(foreground.any(axis=1))
    cols = np.flatnonzero(foreground.any(axis=0))
    if rows.size == 0:
        raise ValueError("mask is empty")
    return slice(int(rows[0]), int(rows[-1]) + 1), slice(int(cols[0]), int(cols[-1]) + 1)


def make_cutout(color: np.ndarray, mask: np.ndarray, instance_label: str, view_id: str) -> Cutout:
    """
    Собирает плотную вырезку из полного кадра и маски.

    Args:
        color: Цветное изображение (H, W, 3)
        mask: Маска (H, W), ненулевые значения - объект

    Returns:
        Cutout, обрезанный по плотному боксу маски
    """
    alpha = binarize(np.where(np.asarray(mask) > 0, MASK_ON, 0))
    rows, cols = tight_slices(alpha)
    return Cutout(
        color=Raster(np.ascontiguousarray(color[rows, cols])),
        alpha=Raster(np.ascontiguousarray(alpha[rows, cols])),
        instance_label=instance_label,
        view_id=view_id,
    )


def load_color(path: PathLike) -> Raster:
    """Читает изображение как RGB-растр."""
    try:
        with Image.open(path) as image:
            return Raster(np.asarray(image.convert("RGB"), dtype=np.uint8))
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise UnreadableImage(path, str(e)) from e


def load_mask(path: PathLike) -> Raster:
    """Читает маску как одноканальный бинарный растр."""
    try:
        with Image.open(path) as image:
            return Raster(binarize(np.asarray(image.convert("L"), dtype=np.uint8)))
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise UnreadableImage(path, str(e)) from e


def save_raster(raster: Raster, path: PathLike) -> Path:
    """Сохраняет растр в PNG без потерь."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.array(raster.pixels)).save(path, format="PNG")
    except OSError as e:
        raise DatasetIoError(f"cannot write image {path}: {e}") from e
    return path
