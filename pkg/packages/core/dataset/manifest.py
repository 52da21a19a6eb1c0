"""
Манифест датасета.

Манифест - канонический JSON: эхо конфига, записи по изображениям с
метаданными решателя и sha256 файлов, список упавших сцен. Пути в
записях относительные к корню датасета.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..constants import FORMAT_VERSION
from ..exceptions import CorruptDataset, DatasetIoError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_CHUNK = 1 << 20


@dataclass(frozen=True)
class ImageRecord:
    """
    Запись об одном изображении.

    Attributes:
        image: Путь изображения относительно корня датасета
        voc: Путь VOC-аннотации (None, если VOC не пишется)
        blueprint: Путь чертежа сцены
        blueprint_id: Идентификатор чертежа
        scene_index: Индекс сцены
        blend_mode: Режим блендинга
        seed: seed сцены
        background: Ссылка фона
        solver_pastes: Число пуассоновских вставок
        solver_iterations: Сумма итераций CG
        solver_residual: Худшая относительная невязка
        solver_unconverged: Число вставок без сходимости
        image_sha256: Хэш файла изображения
        voc_sha256: Хэш VOC-файла
    """

    image: str
    voc: Optional[str]
    blueprint: str
    blueprint_id: str
    scene_index: int
    blend_mode: str
    seed: int
    background: str
    solver_pastes: int = 0
    solver_iterations: int = 0
    solver_residual: float = 0.0
    solver_unconverged: int = 0
    image_sha256: str = ""
    voc_sha256: Optional[str] = None


@dataclass(frozen=True)
class DatasetManifest:
    """Манифест целиком."""

    config: Dict[str, Any]
    num_scenes: int
    records: Tuple[ImageRecord, ...] = field(default_factory=tuple)
    failed_scenes: Tuple[int, ...] = field(default_factory=tuple)
    coco: Optional[str] = None
    format_version: str = FORMAT_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": self.format_version,
            "config": self.config,
            "num_scenes": self.num_scenes,
            "failed_scenes": list(self.failed_scenes),
            "coco": self.coco,
            "records": [asdict(record) for record in self.records],
        }

    @property
    def blend_modes(self) -> List[str]:
        return list(self.config.get("dataset", {}).get("blend_modes", []))

    @property
    def multiblend(self) -> bool:
        return bool(self.config.get("dataset", {}).get("same_image_multiblend", True))


def expected_record_count(
    num_scenes: int, failed: int, num_modes: int, same_image_multiblend: bool
) -> int:
    """(сцены - упавшие) x (число режимов при multiblend, иначе 1)."""
    per_scene = num_modes if same_image_multiblend else 1
    return (num_scenes - failed) * per_scene


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as stream:
        for chunk in iter(lambda: stream.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def serialize_manifest(manifest: DatasetManifest) -> str:
    return json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: DatasetManifest, path: PathLike) -> str:
    """
    Пишет манифест.

    Returns:
        sha256 байтов манифеста (дайджест датасета)

    Raises:
        DatasetIoError: Если файл не записывается
    """
    path = Path(path)
    payload = serialize_manifest(manifest).encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as e:
        raise DatasetIoError(f"cannot write manifest {path}: {e}") from e
    digest = hashlib.sha256(payload).hexdigest()
    logger.info(
        f"[MANIFEST] {len(manifest.records)} records, "
        f"{len(manifest.failed_scenes)} failed scenes, digest={digest[:16]}"
    )
    return digest


def read_manifest(path: PathLike) -> DatasetManifest:
    """
    Читает манифест и проверяет число записей.

    Raises:
        CorruptDataset: Если файл не читается или число записей не сходится
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        manifest = DatasetManifest(
            config=dict(data["config"]),
            num_scenes=int(data["num_scenes"]),
            records=tuple(ImageRecord(**record) for record in data["records"]),
            failed_scenes=tuple(int(i) for i in data["failed_scenes"]),
            coco=data.get("coco"),
            format_version=str(data["format_version"]),
        )
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CorruptDataset(f"unreadable manifest: {e}", path) from e

    if manifest.format_version != FORMAT_VERSION:
        raise CorruptDataset(
            f"manifest format {manifest.format_version}, expected {FORMAT_VERSION}", path
        )
    expected = expected_record_count(
        manifest.num_scenes,
        len(manifest.failed_scenes),
        len(manifest.blend_modes),
        manifest.multiblend,
    )
    if len(manifest.records) != expected:
        raise CorruptDataset(
            f"manifest has {len(manifest.records)} records, expected {expected}", path
        )
    return manifest


def manifest_digest(path: PathLike) -> str:
    """sha256 файла манифеста."""
    try:
        return file_sha256(path)
    except OSError as e:
        raise CorruptDataset(f"unreadable manifest: {e}", path) from e
