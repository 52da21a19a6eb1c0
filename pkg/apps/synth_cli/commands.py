"""
Подкоманды CLI.

Каждая команда возвращает код выхода: 0 - успех, 1 - нарушения или отказ.
Ошибки конфигурации (ConfigError) пробрасываются, их переводит в код 2
точка входа.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from packages.core.config import EvalConfig, MaskParams, load_run_config
from packages.core.constants import MASK_EXTENSION
from packages.core.dataset import scan_objects
from packages.core.evaluation import (
    dataset_ground_truth,
    evaluate,
    format_ap_table,
    format_stats,
    open_dataset,
    read_detections,
    stats_from_view,
    verify_view,
)
from packages.core.exceptions import (
    BadBorder,
    ConfigError,
    MaskVanished,
    NoForeground,
    UnreadableImage,
)
from packages.core.imaging import load_color, save_raster
from packages.core.segmentation import extract_mask
from packages.core.synthesis import synthesize

logger = logging.getLogger(__name__)


def cmd_extract_masks(
    objects_dir: Path,
    masks_out: Path,
    params: MaskParams,
    skip_failures: bool = False,
    report_path: Optional[Path] = None,
) -> int:
    """
    Строит маски для всех видов, у которых маски ещё нет.

    Args:
        objects_dir: Корень objects/
        masks_out: Куда писать masks/<instance>/<view>.png
        params: Параметры сегментации
        skip_failures: Не падать на изображениях без переднего плана
        report_path: Файл со списком неудач (по умолчанию masks_out/failures.txt)

    Returns:
        0, если все маски построены или неудачи пропущены; иначе 1
    """
    objects = scan_objects(objects_dir, masks_out)
    pending = [(label, view) for label, views in objects.items() for view in views if view.mask_path is None]
    total = sum(len(views) for views in objects.values())

    written = 0
    failures = []
    for label, view in pending:
        try:
            mask = extract_mask(load_color(view.color_path), params)
        except (NoForeground, MaskVanished, BadBorder, UnreadableImage, ValueError) as e:
            logger.warning(f"[MASKGEN] {label}/{view.view_id}: {e}")
            failures.append(f"{label}/{view.view_id}\t{type(e).__name__}: {e}")
            continue
        save_raster(mask, Path(masks_out) / label / f"{view.view_id}{MASK_EXTENSION}")
        written += 1

    print(
        f"🎭 masks: {total} views, {total - len(pending)} already present, "
        f"{written} written, {len(failures)} failed"
    )

    if failures and skip_failures:
        report_path = Path(report_path) if report_path else Path(masks_out) / "failures.txt"
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text("\n".join(failures) + "\n", encoding="utf-8")
        print(f"⚠️  failures listed in {report_path}")
        return 0
    if failures:
        for line in failures:
            print(f"❌ {line}")
        return 1
    return 0


def cmd_synthesize(
    config_path: Optional[Path],
    workers: Optional[int] = None,
    seed: Optional[int] = None,
    preset: Optional[str] = None,
    output_dir: Optional[Path] = None,
    num_scenes: Optional[int] = None,
) -> int:
    """
    Полная генерация датасета.

    Returns:
        0 при успехе; 1, если упавших сцен больше failure_budget
    """
    overrides: Dict[str, Any] = {}
    if workers is not None:
        overrides["workers"] = workers
    if seed is not None:
        overrides.setdefault("dataset", {})["master_seed"] = seed
    if num_scenes is not None:
        overrides.setdefault("dataset", {})["num_scenes"] = num_scenes
    if output_dir is not None:
        overrides.setdefault("paths", {})["output_dir"] = str(output_dir)

    config = load_run_config(config_path, overrides=overrides, preset=preset)
    result = synthesize(config)

    print(
        f"✅ {result.num_images} images from {result.num_scenes - len(result.failed_scenes)}"
        f"/{result.num_scenes} scenes -> {result.manifest_path.parent}"
    )
    print(f"manifest sha256: {result.digest}")
    if result.budget_exceeded:
        print(
            f"❌ {len(result.failed_scenes)} unsatisfiable scenes exceed the failure budget "
            f"{config.dataset.failure_budget}"
        )
        return 1
    return 0


def cmd_verify(dataset_dir: Path, check_digests: bool = True) -> int:
    """Проверка датасета; 1, если найдены нарушения."""
    report = verify_view(open_dataset(dataset_dir), check_digests=check_digests)
    for violation in report.violations:
        print(f"❌ {violation}")
    print(
        f"{'✅' if report.ok else '❌'} {report.scenes_checked} scenes, "
        f"{report.images_checked} images, {len(report.violations)} violations"
    )
    return 0 if report.ok else 1


def cmd_stats(dataset_dir: Path) -> int:
    """Печатает статистику состава датасета."""
    print(format_stats(stats_from_view(open_dataset(dataset_dir))))
    return 0


def cmd_evaluate(
    dataset_dir: Path,
    detections_file: Path,
    interpolation: Optional[str] = None,
    iou_threshold: Optional[float] = None,
    output: Optional[Path] = None,
) -> int:
    """
    AP по классам и mAP детекций против GT датасета.

    Протокол берётся из эха конфига в манифесте, флаги его переопределяют.
    """
    view = open_dataset(dataset_dir)
    settings = view.eval_config().model_dump()
    if interpolation is not None:
        settings["interpolation"] = interpolation
    if iou_threshold is not None:
        settings["iou_threshold"] = iou_threshold
    try:
        cfg = EvalConfig.model_validate(settings)
    except ValidationError as e:
        raise ConfigError(f"bad evaluation settings: {e.errors()[0]['msg']}") from e

    ground_truth, aliases, categories = dataset_ground_truth(view)
    detections = read_detections(detections_file, aliases, categories)
    result = evaluate(ground_truth, detections, cfg)

    print(format_ap_table(result))
    if result.skipped:
        print(f"⚠️  classes without ground truth skipped: {', '.join(result.skipped)}")
    if output is not None:
        output = Path(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        payload = {**result.to_dict(), "iou_threshold": cfg.iou_threshold,
                   "interpolation": cfg.interpolation}
        output.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"[EVAL] result written to {output}")
    return 0
