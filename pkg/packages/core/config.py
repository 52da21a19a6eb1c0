"""
Конфигурация запуска синтезатора.

Декларативный JSON-конфиг валидируется моделями pydantic. Каждая модель
запрещает неизвестные ключи, у каждого поля есть значение по умолчанию.
Часть параметров можно переопределить переменными окружения (.env):

    SYNTH_WORKERS: число процессов-воркеров
    SYNTH_SEED: master_seed датасета
    SYNTH_LOG_LEVEL: уровень логирования CLI
    SYNTH_OUTPUT_DIR: выходная директория

Приоритет: флаг CLI > окружение > файл конфига > значения по умолчанию.
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import constants as C
from .exceptions import ConfigError

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    """Базовая секция конфига: неизвестные ключи - жёсткая ошибка."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class MaskParams(_Section):
    """Параметры классической сегментации объекта на однородном фоне."""

    border_width: int = Field(C.DEFAULT_BORDER_WIDTH, ge=1)
    color_threshold: float = Field(C.DEFAULT_COLOR_THRESHOLD, ge=1, le=441)
    morph_radius: int = Field(C.DEFAULT_MORPH_RADIUS, ge=0)
    fill_holes: bool = True


class AugmentConfig(_Section):
    """
    Аугментации при вставке объектов.

    rotation_range задаётся полушириной: 30 означает Uniform(-30, 30) градусов.
    scale_range - относительно размера исходной вырезки.
    """

    rotation_range: float = Field(C.DEFAULT_ROTATION_RANGE, ge=0, le=180)
    scale_range: Tuple[float, float] = C.DEFAULT_SCALE_RANGE
    use_view_sampling: bool = True
    objects_per_scene: Tuple[int, int] = C.DEFAULT_OBJECTS_PER_SCENE
    distractors_per_scene: Tuple[int, int] = C.DEFAULT_DISTRACTORS_PER_SCENE

    @field_validator("scale_range")
    @classmethod
    def _check_scale_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if not (0 < low <= high):
            raise ValueError(f"scale_range must be positive and ordered, got {value}")
        return value

    @field_validator("objects_per_scene", "distractors_per_scene")
    @classmethod
    def _check_interval(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        low, high = value
        if not (0 <= low <= high):
            raise ValueError(f"interval must be non-empty and non-negative, got {value}")
        return value


class ConstraintConfig(_Section):
    """Ограничения окклюзии и усечения."""

    max_pair_iou: float = Field(C.DEFAULT_MAX_PAIR_IOU, ge=0, le=1)
    min_visible_fraction: float = Field(C.DEFAULT_MIN_VISIBLE_FRACTION, gt=0, le=1)
    allow_truncation: bool = True
    allow_occlusion: bool = True
    max_attempts_per_object: int = Field(C.DEFAULT_MAX_ATTEMPTS, ge=1)

    @property
    def effective_max_pair_iou(self) -> float:
        """Без окклюзии объекты не должны пересекаться вовсе."""
        return self.max_pair_iou if self.allow_occlusion else 0.0

    @property
    def effective_min_visible_fraction(self) -> float:
        """Без усечения объект целиком внутри кадра."""
        return self.min_visible_fraction if self.allow_truncation else 1.0


class BlendSettings(_Section):
    """Числовые параметры режимов блендинга."""

    gaussian_sigma: float = Field(C.DEFAULT_GAUSSIAN_SIGMA, gt=0)
    poisson_tolerance: float = Field(C.DEFAULT_POISSON_TOLERANCE, gt=0)
    poisson_max_iters: int = Field(C.DEFAULT_POISSON_MAX_ITERS, ge=1)


class EvalConfig(_Section):
    """Протокол оценки: AP при IoU 0.5, GT-боксы не меньше 50x30."""

    iou_threshold: float = Field(C.DEFAULT_EVAL_IOU, gt=0, le=1)
    min_box: Tuple[float, float] = C.DEFAULT_MIN_BOX
    interpolation: str = C.INTERPOLATION_ALL_POINT

    @field_validator("interpolation")
    @classmethod
    def _check_interpolation(cls, value: str) -> str:
        if value not in (C.INTERPOLATION_ALL_POINT, C.INTERPOLATION_VOC11):
            raise ValueError(f"interpolation must be allpoint or voc11, got {value!r}")
        return value


class DatasetConfig(_Section):
    """
    Состав датасета.

    num_scenes=None означает "число фонов x background_reuse".
    """

    master_seed: int = Field(0, ge=0, lt=2**64)
    num_scenes: Optional[int] = Field(None, ge=1)
    background_reuse: int = Field(C.DEFAULT_BACKGROUND_REUSE, ge=1)
    blend_modes: List[str] = Field(default_factory=lambda: list(C.BLEND_MODES), min_length=1)
    same_image_multiblend: bool = True
    formats: List[str] = Field(default_factory=lambda: [C.FORMAT_VOC, C.FORMAT_COCO])
    failure_budget: int = Field(0, ge=0)

    @field_validator("blend_modes")
    @classmethod
    def _check_modes(cls, value: List[str]) -> List[str]:
        unknown = [mode for mode in value if mode not in C.BLEND_MODES]
        if unknown:
            raise ValueError(f"unknown blend modes {unknown}, expected {list(C.BLEND_MODES)}")
        if len(set(value)) != len(value):
            raise ValueError(f"duplicate blend modes in {value}")
        return value

    @field_validator("formats")
    @classmethod
    def _check_formats(cls, value: List[str]) -> List[str]:
        unknown = [fmt for fmt in value if fmt not in (C.FORMAT_VOC, C.FORMAT_COCO)]
        if unknown:
            raise ValueError(f"unknown annotation formats {unknown}")
        return value

    def resolve_num_scenes(self, num_backgrounds: int) -> int:
        """Возвращает фактическое число сцен для библиотеки фонов."""
        if self.num_scenes is not None:
            return self.num_scenes
        return num_backgrounds * self.background_reuse


class PathsConfig(_Section):
    """Пути к ассетам и выходной директории."""

    objects_dir: str = "assets/objects"
    backgrounds_dir: str = "assets/backgrounds"
    masks_dir: Optional[str] = None
    output_dir: str = "out"
    distractors: List[str] = Field(default_factory=list)

    def resolved_masks_dir(self) -> Path:
        """masks/ по умолчанию лежит рядом с objects/."""
        if self.masks_dir:
            return Path(self.masks_dir)
        return Path(self.objects_dir).parent / "masks"


class RunConfig(_Section):
    """Полный конфиг запуска (то, что эхом попадает в манифест)."""

    paths: PathsConfig = Field(default_factory=PathsConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    constraints: ConstraintConfig = Field(default_factory=ConstraintConfig)
    mask: MaskParams = Field(default_factory=MaskParams)
    blending: BlendSettings = Field(default_factory=BlendSettings)
    evaluation: EvalConfig = Field(default_factory=EvalConfig)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_distractors(self) -> "RunConfig":
        if len(set(self.paths.distractors)) != len(self.paths.distractors):
            raise ValueError("duplicate distractor labels")
        return self

    def echo(self) -> Dict[str, Any]:
        """Полностью разрешённый конфиг без runtime-параметров (workers)."""
        return self.model_dump(mode="json", exclude={"workers"})


def _format_validation_error(error: ValidationError) -> str:
    """Сводит ошибку pydantic к одной строке с именами ключей."""
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            parts.append(f"unknown config key '{location}'")
        else:
            parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_preset(raw: Dict[str, Any], preset: str) -> Dict[str, Any]:
    """
    Накладывает пресет абляции на сырой словарь конфига.

    Args:
        raw: Словарь конфига (как в JSON)
        preset: Имя пресета из constants.ABLATION_PRESETS

    Returns:
        Новый словарь с применёнными переопределениями

    Raises:
        ConfigError: Если пресет неизвестен
    """
    if preset not in C.ABLATION_PRESETS:
        raise ConfigError(
            f"unknown preset '{preset}', expected one of {sorted(C.ABLATION_PRESETS)}"
        )
    return _deep_merge(raw, C.ABLATION_PRESETS[preset])


def parse_run_config(raw: Dict[str, Any]) -> RunConfig:
    """Валидирует словарь конфига, ошибки pydantic превращает в ConfigError."""
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def load_run_config(
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
    env_path: Optional[Path] = None,
) -> RunConfig:
    """
    Создаёт конфиг запуска из JSON-файла, окружения и переопределений CLI.

    Args:
        config_path: Путь к JSON-конфигу (None - только значения по умолчанию)
        overrides: Переопределения от CLI в форме вложенного словаря
        preset: Имя пресета абляции
        env_path: Путь к .env файлу (если None, ищется в текущей директории)

    Returns:
        RunConfig: Провалидированный конфиг

    Raises:
        ConfigError: Если файл не читается или содержит неверные ключи/значения
    """
    if env_path:
        load_dotenv(dotenv_path=env_path)
    else:
        load_dotenv()

    raw: Dict[str, Any] = {}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {config_path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {config_path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be an object: {config_path}")

    if preset:
        raw = apply_preset(raw, preset)

    # Окружение поверх файла
    env_overrides: Dict[str, Any] = {}
    workers_env = os.getenv("SYNTH_WORKERS")
    if workers_env:
        env_overrides["workers"] = _env_int("SYNTH_WORKERS", workers_env)
    seed_env = os.getenv("SYNTH_SEED")
    if seed_env:
        env_overrides.setdefault("dataset", {})["master_seed"] = _env_int("SYNTH_SEED", seed_env)
    output_env = os.getenv("SYNTH_OUTPUT_DIR")
    if output_env:
        env_overrides.setdefault("paths", {})["output_dir"] = output_env
    raw = _deep_merge(raw, env_overrides)

    # CLI поверх окружения
    if overrides:
        raw = _deep_merge(raw, overrides)

    config = parse_run_config(raw)

    logger.info(f"[CONFIG] source={config_path or '<defaults>'} preset={preset or '-'}")
    logger.info(
        f"[CONFIG] seed={config.dataset.master_seed} scenes={config.dataset.num_scenes} "
        f"modes={config.dataset.blend_modes} multiblend={config.dataset.same_image_multiblend} "
        f"workers={config.workers}"
    )
    return config


def _env_int(name: str, value: str) -> int:
    try:
        return int(value.strip())
    except ValueError as e:
        raise ConfigError(f"environment variable {name} must be an integer, got {value!r}") from e
