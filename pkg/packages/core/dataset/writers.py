"""
Писатели и читатели аннотаций: VOC XML (по файлу на изображение) и
COCO JSON (один файл на датасет).

Внутри боксы полуоткрытые и вещественные. В VOC они переводятся в
1-based целые включительные координаты:
    xmin = floor(xmin) + 1, ymin = floor(ymin) + 1, xmax = ceil(xmax), ymax = ceil(ymax)
В COCO пишется [x, y, w, h] в той же полуоткрытой системе.
"""

import json
import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..exceptions import CorruptDataset, DatasetIoError
from ..imaging import BoundingBox

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
VocBox = Tuple[int, int, int, int]
Annotation = Tuple[str, BoundingBox]


@dataclass(frozen=True)
class AnnotatedImage:
    """
    Одно изображение датасета с аннотациями (без пикселей).

    Attributes:
        file_name: Имя файла изображения
        width, height, depth: Размеры
        annotations: (label, box) целевых объектов
    """

    file_name: str
    width: int
    height: int
    annotations: Tuple[Annotation, ...] = field(default_factory=tuple)
    depth: int = 3


@dataclass(frozen=True)
class VocAnnotation:
    """Разобранный VOC-файл: боксы в 1-based целых координатах."""

    filename: str
    width: int
    height: int
    depth: int
    objects: Tuple[Tuple[str, VocBox], ...]

    @property
    def boxes(self) -> List[Annotation]:
        return [(name, box_from_voc(box)) for name, box in self.objects]


def voc_box(box: BoundingBox) -> VocBox:
    """Полуоткрытый вещественный бокс -> 1-based включительный целый."""
    return (
        int(math.floor(box.xmin)) + 1,
        int(math.floor(box.ymin)) + 1,
        int(math.ceil(box.xmax)),
        int(math.ceil(box.ymax)),
    )


def box_from_voc(box: VocBox) -> BoundingBox:
    """Обратное к voc_box для боксов на целых координатах."""
    xmin, ymin, xmax, ymax = box
    return BoundingBox(float(xmin - 1), float(ymin - 1), float(xmax), float(ymax))


def _sub(parent: ET.Element, tag: str, text: Optional[str] = None) -> ET.Element:
    node = ET.SubElement(parent, tag)
    if text is not None:
        node.text = text
    return node


def size_element(width: int, height: int, depth: int) -> ET.Element:
    node = ET.Element("size")
    _sub(node, "width", str(width))
    _sub(node, "height", str(height))
    _sub(node, "depth", str(depth))
    return node


def object_element(label: str, box: BoundingBox) -> ET.Element:
    node = ET.Element("object")
    _sub(node, "name", label)
    bndbox = _sub(node, "bndbox")
    for tag, value in zip(("xmin", "ymin", "xmax", "ymax"), voc_box(box)):
        _sub(bndbox, tag, str(value))
    return node


def voc_document(image: AnnotatedImage) -> str:
    """Текст VOC XML для изображения (с отступами, перевод строки в конце)."""
    root = ET.Element("annotation")
    _sub(root, "filename", image.file_name)
    root.append(size_element(image.width, image.height, image.depth))
    for label, box in image.annotations:
        root.append(object_element(label, box))
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode") + "\n"


def write_voc(image: AnnotatedImage, out_dir: PathLike) -> Path:
    """
    Пишет VOC XML рядом с остальными аннотациями.

    Имя файла - basename изображения с расширением .xml.

    Raises:
        DatasetIoError: Если файл не записывается
    """
    path = Path(out_dir) / f"{Path(image.file_name).stem}.xml"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(voc_document(image), encoding="utf-8")
    except OSError as e:
        raise DatasetIoError(f"cannot write VOC annotation {path}: {e}") from e
    return path


def _int_text(node: ET.Element, tag: str, path: Path) -> int:
    child = node.find(tag)
    if child is None or child.text is None:
        raise CorruptDataset(f"missing <{tag}>", path)
    try:
        return int(child.text.strip())
    except ValueError as e:
        raise CorruptDataset(f"<{tag}> is not an integer: {child.text!r}", path) from e


def read_voc(path: PathLike) -> VocAnnotation:
    """
    Читает VOC XML.

    Raises:
        CorruptDataset: Если файл не читается или не соответствует формату
    """
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except (OSError, ET.ParseError) as e:
        raise CorruptDataset(f"unreadable VOC annotation: {e}", path) from e

    filename = root.findtext("filename")
    size = root.find("size")
    if filename is None or size is None:
        raise CorruptDataset("VOC annotation lacks <filename> or <size>", path)

    objects = []
    for node in root.findall("object"):
        name = node.findtext("name")
        bndbox = node.find("bndbox")
        if name is None or bndbox is None:
            raise CorruptDataset("<object> lacks <name> or <bndbox>", path)
        box = tuple(_int_text(bndbox, tag, path) for tag in ("xmin", "ymin", "xmax", "ymax"))
        if box[0] > box[2] or box[1] > box[3]:
            raise CorruptDataset(f"inverted box {box} for {name}", path)
        objects.append((name, box))

    return VocAnnotation(
        filename=filename,
        width=_int_text(size, "width", path),
        height=_int_text(size, "height", path),
        depth=_int_text(size, "depth", path),
        objects=tuple(objects),
    )


def coco_document(images: Sequence[AnnotatedImage], categories: Sequence[str]) -> Dict:
    """
    Словарь COCO. id изображений и аннотаций - в порядке записей, с 1;
    категории нумеруются в переданном порядке.
    """
    category_ids = {name: i for i, name in enumerate(categories, start=1)}
    image_entries = []
    annotation_entries = []
    for image_id, image in enumerate(images, start=1):
        image_entries.append(
            {
                "id": image_id,
                "file_name": image.file_name,
                "width": image.width,
                "height": image.height,
            }
        )
        for label, box in image.annotations:
            if label not in category_ids:
                raise ValueError(f"label {label!r} of {image.file_name} is not a category")
            annotation_entries.append(
                {
                    "id": len(annotation_entries) + 1,
                    "image_id": image_id,
                    "category_id": category_ids[label],
                    "bbox": [float(box.xmin), float(box.ymin), float(box.width), float(box.height)],
                    "area": float(box.area),
                    "iscrowd": 0,
                }
            )
    return {
        "images": image_entries,
        "annotations": annotation_entries,
        "categories": [{"id": i, "name": name} for name, i in category_ids.items()],
    }


def write_coco(
    images: Sequence[AnnotatedImage],
    out_path: PathLike,
    categories: Optional[Sequence[str]] = None,
) -> Path:
    """
    Пишет один COCO JSON на все изображения.

    Args:
        images: Записи в порядке датасета
        out_path: Путь к файлу
        categories: Полный набор меток; по умолчанию - встреченные, по алфавиту

    Raises:
        DatasetIoError: Если файл не записывается
    """
    if categories is None:
        categories = sorted({label for image in images for label, _ in image.annotations})
    document = coco_document(images, categories)
    path = Path(out_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise DatasetIoError(f"cannot write COCO annotations {path}: {e}") from e
    logger.info(
        f"[COCO] {path.name}: {len(document['images'])} images, "
        f"{len(document['annotations'])} boxes, {len(categories)} categories"
    )
    return path


def read_coco(path: PathLike) -> Tuple[List[AnnotatedImage], List[str]]:
    """
    Читает COCO JSON обратно в записи.

    Returns:
        (записи в порядке id, категории в порядке id)

    Raises:
        CorruptDataset: Если файл не читается или ссылки не сходятся
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        categories = {int(c["id"]): str(c["name"]) for c in document["categories"]}
        grouped: Dict[int, List[Annotation]] = {int(img["id"]): [] for img in document["images"]}
        for ann in sorted(document["annotations"], key=lambda a: int(a["id"])):
            x, y, w, h = (float(v) for v in ann["bbox"])
            grouped[int(ann["image_id"])].append(
                (categories[int(ann["category_id"])], BoundingBox(x, y, x + w, y + h))
            )
        images = [
            AnnotatedImage(
                file_name=str(img["file_name"]),
                width=int(img["width"]),
                height=int(img["height"]),
                annotations=tuple(grouped[int(img["id"])]),
            )
            for img in sorted(document["images"], key=lambda i: int(i["id"]))
        ]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CorruptDataset(f"unreadable COCO annotations: {e}", path) from e
    return images, [categories[i] for i in sorted(categories)]
