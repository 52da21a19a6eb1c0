"""
Исключения генератора синтетических датасетов.

Все ошибки домена наследуются от SynthError, чтобы CLI мог
отличить ожидаемый отказ (код выхода 1) от ошибки конфигурации (код 2).
"""


class SynthError(Exception):
    """Базовая ошибка синтезатора."""


class ConfigError(SynthError):
    """Некорректный конфиг запуска (неизвестный ключ, неверное значение)."""


# --- imaging -----------------------------------------------------------------

class DegenerateTransform(SynthError):
    """После поворота/масштаба у маски не осталось ни одного пикселя."""


# --- segmentation ------------------------------------------------------------

class BadBorder(SynthError):
    """Ширина рамки не меньше половины меньшей стороны изображения."""


class NoForeground(SynthError):
    """Маска объекта получилась пустой."""


class MaskVanished(SynthError):
    """Морфология стёрла маску целиком."""


# --- placement ---------------------------------------------------------------

class PlacementExhausted(SynthError):
    """Исчерпан лимит попыток размещения объекта."""


class SceneUnsatisfiable(SynthError):
    """Ни один целевой объект не удалось разместить на сцене."""


# --- blending ----------------------------------------------------------------

class NoOverlap(SynthError):
    """Вырезка не пересекается с холстом ни одним пикселем."""


class SolverDiverged(SynthError):
    """Невязка решателя Пуассона стала нечисловой (nan/inf)."""


class RenderError(SynthError):
    """Ошибка рендера сцены с указанием blueprint_id."""

    def __init__(self, blueprint_id: str, cause: Exception):
        self.blueprint_id = blueprint_id
        self.cause = cause
        super().__init__(f"blueprint {blueprint_id}: {type(cause).__name__}: {cause}")


# --- dataset_io --------------------------------------------------------------

class EmptyAssets(SynthError):
    """Нет объектов или фонов в библиотеке ассетов."""


class UnreadableImage(SynthError):
    """Файл изображения не читается."""

    def __init__(self, path, reason: str = ""):
        self.path = path
        message = f"unreadable image: {path}"
        if reason:
            message += f" ({reason})"
        super().__init__(message)


class DatasetIoError(SynthError):
    """Ошибка записи файлов датасета."""


# --- evaluator ---------------------------------------------------------------

class NoGroundTruth(SynthError):
    """Для класса есть детекции, но нет ни одного GT-бокса."""


class CorruptDataset(SynthError):
    """Файлы датасета не читаются или не согласованы между собой."""

    def __init__(self, message: str, path=None):
        self.path = path
        if path is not None:
            message = f"{message} [{path}]"
        super().__init__(message)
