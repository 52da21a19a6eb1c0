"""
Константы генератора синтетических сцен.
Содержит значения по умолчанию рецепта, форматы и пресеты абляций.
"""

# Версия формата манифеста и чертежей сцен
FORMAT_VERSION = "1.0"

# Расширения, которые считаются изображениями при сканировании ассетов
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

# Маски всегда лежат в PNG с тем же basename, что и вид объекта
MASK_EXTENSION = ".png"

# Бинарная маска: 0 или 255
MASK_ON = 255
ALPHA_THRESHOLD = 128

# Ограничения размещения (окклюзия / усечение)
DEFAULT_MAX_PAIR_IOU = 0.75
DEFAULT_MIN_VISIBLE_FRACTION = 0.25
DEFAULT_MAX_ATTEMPTS = 100

# Аугментации
DEFAULT_ROTATION_RANGE = 30.0
DEFAULT_SCALE_RANGE = (0.3, 0.9)
DEFAULT_OBJECTS_PER_SCENE = (3, 8)
DEFAULT_DISTRACTORS_PER_SCENE = (0, 3)

# Минимальный размер холста для размещения
MIN_CANVAS_SIDE = 32

# Блендинг
BLEND_DIRECT = "direct"
BLEND_GAUSSIAN = "gaussian"
BLEND_POISSON = "poisson"
BLEND_MODES = (BLEND_DIRECT, BLEND_GAUSSIAN, BLEND_POISSON)

DEFAULT_GAUSSIAN_SIGMA = 2.0
DEFAULT_POISSON_TOLERANCE = 1e-6
DEFAULT_POISSON_MAX_ITERS = 10000

# Сегментация
DEFAULT_BORDER_WIDTH = 10
DEFAULT_COLOR_THRESHOLD = 30.0
DEFAULT_MORPH_RADIUS = 2
MIN_MASK_IMAGE_SIDE = 32

# Состав датасета: каждый фон используется ~4 раза
DEFAULT_BACKGROUND_REUSE = 4

# Оценка: AP при IoU 0.5, GT не меньше 50x30
DEFAULT_EVAL_IOU = 0.5
DEFAULT_MIN_BOX = (50, 30)
INTERPOLATION_ALL_POINT = "allpoint"
INTERPOLATION_VOC11 = "voc11"

# Форматы аннотаций
FORMAT_VOC = "voc"
FORMAT_COCO = "coco"

# Зарезервированный индекс потока для перестановки фонов
BACKGROUND_STREAM_INDEX = 2**63

# Раскладка выходной директории
IMAGES_DIR = "images"
ANNOTATIONS_DIR = "annotations"
VOC_DIR = "voc"
COCO_FILE = "coco.json"
BLUEPRINTS_DIR = "blueprints"
MANIFEST_FILE = "manifest.json"

# Пресеты абляций: набор переопределений поверх конфига запуска.
# Ключи - секции RunConfig, значения - поля секции.
ABLATION_PRESETS = {
    # Режимы блендинга
    "no_blending": {
        "dataset": {"blend_modes": [BLEND_DIRECT], "same_image_multiblend": False},
    },
    "gaussian_only": {
        "dataset": {"blend_modes": [BLEND_GAUSSIAN], "same_image_multiblend": False},
    },
    "poisson_only": {
        "dataset": {"blend_modes": [BLEND_POISSON], "same_image_multiblend": False},
    },
    "all_blend": {
        "dataset": {"blend_modes": list(BLEND_MODES), "same_image_multiblend": False},
    },
    "all_blend_same_image": {
        "dataset": {"blend_modes": list(BLEND_MODES), "same_image_multiblend": True},
    },
    # Аугментации и ограничения размещения
    "no_2d_rotation": {"augment": {"rotation_range": 0.0}},
    "no_3d_rotation": {"augment": {"use_view_sampling": False}},
    "no_truncation": {"constraints": {"allow_truncation": False}},
    "no_occlusion": {"constraints": {"allow_occlusion": False}},
    "all": {"augment": {"distractors_per_scene": [0, 0]}},
    "all_distractor": {},
}
