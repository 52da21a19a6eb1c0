"""
Библиотека ассетов: объекты по видам и фоны.

Раскладка на диске:
    objects/<instance>/<view>.<ext>
    masks/<instance>/<view>.png      (необязательно)
    backgrounds/<name>.<ext>

Индекс не зависит от порядка, в котором файловая система отдаёт записи:
всё сортируется по пути.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from PIL import Image, UnidentifiedImageError

from ..config import MaskParams
from ..constants import IMAGE_EXTENSIONS, MASK_EXTENSION
from ..exceptions import ConfigError, EmptyAssets, UnreadableImage
from ..imaging import Cutout, Raster, load_color, load_mask, make_cutout, transform_cutout
from ..segmentation import extract_mask

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Lister = Callable[[Path], Iterable[Path]]


@dataclass(frozen=True)
class ObjectView:
    """Один вид экземпляра: файл цвета и (если есть) файл маски."""

    view_id: str
    color_path: Path
    mask_path: Optional[Path] = None


@dataclass(frozen=True)
class AssetIndex:
    """
    Детерминированный индекс ассетов.

    Attributes:
        objects: instance_label -> виды, отсортированные по пути
        distractor_labels: Метки, которые вставляются, но не аннотируются
        backgrounds: Пути фонов в лексикографическом порядке
        backgrounds_dir: Корень фонов (для относительных ссылок)
        background_sizes: ссылка фона -> (w, h)
    """

    objects: Dict[str, Tuple[ObjectView, ...]]
    distractor_labels: FrozenSet[str]
    backgrounds: Tuple[Path, ...]
    backgrounds_dir: Path
    background_sizes: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.backgrounds:
            raise ValueError("asset index needs at least one background")
        for label, views in self.objects.items():
            if not views:
                raise ValueError(f"instance {label} has no views")
        unknown = sorted(self.distractor_labels - set(self.objects))
        if unknown:
            raise ValueError(f"distractor labels {unknown} are not object instances")

    @property
    def target_labels(self) -> Tuple[str, ...]:
        return tuple(label for label in sorted(self.objects) if label not in self.distractor_labels)

    @property
    def background_refs(self) -> Tuple[str, ...]:
        """Ссылки фонов: путь относительно backgrounds_dir в posix-виде."""
        return tuple(path.relative_to(self.backgrounds_dir).as_posix() for path in self.backgrounds)

    def missing_masks(self) -> List[Tuple[str, ObjectView]]:
        """Виды без файла маски."""
        return [
            (label, view)
            for label in sorted(self.objects)
            for view in self.objects[label]
            if view.mask_path is None
        ]


def _default_lister(directory: Path) -> Iterable[Path]:
    return directory.iterdir()


def _is_image(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS


def _image_size(path: Path) -> Tuple[int, int]:
    """Читает только заголовок изображения."""
    try:
        with Image.open(path) as image:
            return int(image.width), int(image.height)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise UnreadableImage(path, str(e)) from e


def scan_objects(
    objects_dir: PathLike,
    masks_dir: Optional[PathLike] = None,
    lister: Optional[Lister] = None,
) -> Dict[str, Tuple[ObjectView, ...]]:
    """
    Сканирует objects/<instance>/<view>.<ext> и находит маски.

    Raises:
        EmptyAssets: Если нет ни одного экземпляра с изображениями
        UnreadableImage: Если изображение не читается
    """
    objects_dir = Path(objects_dir)
    masks_dir = Path(masks_dir) if masks_dir is not None else objects_dir.parent / "masks"
    lister = lister or _default_lister
    if not objects_dir.is_dir():
        raise EmptyAssets(f"objects directory not found: {objects_dir}")

    objects: Dict[str, Tuple[ObjectView, ...]] = {}
    for instance_dir in sorted(p for p in lister(objects_dir) if p.is_dir()):
        views = []
        for color_path in sorted(p for p in lister(instance_dir) if _is_image(p)):
            _image_size(color_path)
            mask_path = masks_dir / instance_dir.name / f"{color_path.stem}{MASK_EXTENSION}"
            views.append(
                ObjectView(
                    view_id=color_path.stem,
                    color_path=color_path,
                    mask_path=mask_path if mask_path.is_file() else None,
                )
            )
        if not views:
            logger.warning(f"[ASSETS] instance {instance_dir.name} has no images, skipped")
            continue
        view_ids = [view.view_id for view in views]
        if len(set(view_ids)) != len(view_ids):
            raise UnreadableImage(instance_dir, "two images share one view name")
        objects[instance_dir.name] = tuple(views)

    if not objects:
        raise EmptyAssets(f"no object instances under {objects_dir}")
    return objects


def scan_assets(
    objects_dir: PathLike,
    backgrounds_dir: PathLike,
    distractor_list: Sequence[str] = (),
    masks_dir: Optional[PathLike] = None,
    lister: Optional[Lister] = None,
) -> AssetIndex:
    """
    Сканирует ассеты и строит индекс.

    Args:
        objects_dir: Корень objects/
        backgrounds_dir: Корень backgrounds/
        distractor_list: Метки отвлекающих экземпляров
        masks_dir: Корень masks/ (по умолчанию рядом с objects/)
        lister: Перечисление записей директории (для тестов порядка)

    Returns:
        AssetIndex

    Raises:
        EmptyAssets: Если нет объектов, целевых экземпляров или фонов
        UnreadableImage: Если изображение не читается
        ConfigError: Если отвлекающая метка не найдена среди объектов
    """
    backgrounds_dir = Path(backgrounds_dir)
    lister = lister or _default_lister
    objects = scan_objects(objects_dir, masks_dir, lister)

    if not backgrounds_dir.is_dir():
        raise EmptyAssets(f"backgrounds directory not found: {backgrounds_dir}")

    distractors = frozenset(distractor_list)
    unknown = sorted(distractors - set(objects))
    if unknown:
        raise ConfigError(f"distractor labels not found among objects: {unknown}")
    if not set(objects) - distractors:
        raise EmptyAssets("every object instance is a distractor, nothing to annotate")

    backgrounds = tuple(sorted(p for p in lister(backgrounds_dir) if _is_image(p)))
    if not backgrounds:
        raise EmptyAssets(f"no background images under {backgrounds_dir}")
    sizes = {
        path.relative_to(backgrounds_dir).as_posix(): _image_size(path) for path in backgrounds
    }

    index = AssetIndex(
        objects=objects,
        distractor_labels=distractors,
        backgrounds=backgrounds,
        backgrounds_dir=backgrounds_dir,
        background_sizes=sizes,
    )
    n_views = sum(len(views) for views in objects.values())
    logger.info(
        f"[ASSETS] {len(objects)} instances ({len(distractors)} distractors), "
        f"{n_views} views, {len(index.missing_masks())} without masks, "
        f"{len(backgrounds)} backgrounds"
    )
    return index


class AssetStore:
    """
    Доступ к пикселям ассетов с кэшами на процесс.

    Реализует и каталог для чертёжника (размеры), и источник вырезок для
    рендера. Виды без маски сегментируются на лету.
    """

    def __init__(
        self,
        index: AssetIndex,
        mask_params: Optional[MaskParams] = None,
        cutout_cache: int = 256,
        transform_cache: int = 512,
        background_cache: int = 8,
    ):
        self.index = index
        self.mask_params = mask_params or MaskParams()
        self._views: Dict[str, Dict[str, ObjectView]] = {
            label: {view.view_id: view for view in views} for label, views in index.objects.items()
        }
        self._cutout = lru_cache(maxsize=cutout_cache)(self._load_cutout)
        self._transformed = lru_cache(maxsize=transform_cache)(self._transform)
        self._background = lru_cache(maxsize=background_cache)(self._load_background)

    @property
    def target_labels(self) -> Sequence[str]:
        return self.index.target_labels

    @property
    def distractor_labels(self) -> Sequence[str]:
        return tuple(sorted(self.index.distractor_labels))

    def views(self, label: str) -> Sequence[str]:
        return tuple(view.view_id for view in self.index.objects[label])

    def cutout(self, label: str, view_id: str) -> Cutout:
        return self._cutout(label, view_id)

    def cutout_size(self, label: str, view_id: str) -> Tuple[int, int]:
        return self.cutout(label, view_id).size

    def transformed(self, label: str, view_id: str, scale: float, rotation: float) -> Cutout:
        return self._transformed(label, view_id, float(scale), float(rotation))

    def transformed_size(
        self, label: str, view_id: str, scale: float, rotation: float
    ) -> Tuple[int, int]:
        return self.transformed(label, view_id, scale, rotation).size

    def background(self, background_ref: str) -> Raster:
        return self._background(background_ref)

    def background_size(self, background_ref: str) -> Tuple[int, int]:
        size = self.index.background_sizes.get(background_ref)
        if size is None:
            size = self.background(background_ref).size
        return size

    def _load_cutout(self, label: str, view_id: str) -> Cutout:
        view = self._views[label][view_id]
        color = load_color(view.color_path)
        if view.mask_path is not None:
            mask = load_mask(view.mask_path)
            if mask.size != color.size:
                raise UnreadableImage(
                    view.mask_path, f"mask is {mask.size}, image is {color.size}"
                )
        else:
            logger.debug(f"[MASKGEN] segmenting {label}/{view_id} on the fly")
            mask = extract_mask(color, self.mask_params)
        return make_cutout(color.pixels, mask.pixels, label, view_id)

    def _transform(self, label: str, view_id: str, scale: float, rotation: float) -> Cutout:
        return transform_cutout(self.cutout(label, view_id), scale, rotation)

    def _load_background(self, background_ref: str) -> Raster:
        return load_color(self.index.backgrounds_dir / background_ref)
