"""
Арифметика боксов.

Соглашение: непрерывные пиксельные координаты, полуоткрытый бокс
[xmin, xmax) x [ymin, ymax), начало в левом верхнем углу.
Перевод в целочисленные форматы (VOC) делают только писатели аннотаций.
"""

from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class BoundingBox:
    """Осевой бокс с ненулевой площадью."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(
                f"invalid box ({self.xmin}, {self.ymin}, {self.xmax}, {self.ymax}): "
                f"need xmax > xmin and ymax > ymin"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height


def box_at(anchor: Tuple[int, int], size: Tuple[int, int]) -> BoundingBox:
    """Бокс вырезки размера (w, h), левый верхний угол которой в anchor."""
    x, y = anchor
    w, h = size
    return BoundingBox(float(x), float(y), float(x + w), float(y + h))


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    width = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    height = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if width <= 0 or height <= 0:
        return 0.0
    return width * height


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """
    Intersection over union двух боксов.

    Returns:
        Отношение в [0, 1]; 0 для непересекающихся боксов
    """
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union


def clip_box(box: BoundingBox, canvas_w: int, canvas_h: int) -> Optional[BoundingBox]:
    """Обрезает бокс по холсту; None, если от бокса ничего не осталось."""
    xmin = max(box.xmin, 0.0)
    ymin = max(box.ymin, 0.0)
    xmax = min(box.xmax, float(canvas_w))
    ymax = min(box.ymax, float(canvas_h))
    if xmax <= xmin or ymax <= ymin:
        return None
    return BoundingBox(xmin, ymin, xmax, ymax)


def visible_fraction(box: BoundingBox, canvas_w: int, canvas_h: int) -> float:
    """Доля площади бокса, попадающая в холст [0, W) x [0, H)."""
    canvas = BoundingBox(0.0, 0.0, float(canvas_w), float(canvas_h))
    return intersection_area(box, canvas) / box.area
