"""
Генерация датасета: чертёж, рендер и запись файлов сцен в пуле процессов.

Каждая сцена зависит только от (master_seed, индекс сцены, фон) и пишет
только свои файлы, поэтому результат не зависит от числа воркеров.
Манифест и COCO собираются в главном процессе в порядке индексов.
"""

import logging
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

from .blending import BlendMode, RenderedScene, modes_from_settings, render_multiblend
from .config import RunConfig
from .constants import (
    ANNOTATIONS_DIR,
    BLUEPRINTS_DIR,
    COCO_FILE,
    FORMAT_COCO,
    FORMAT_VOC,
    IMAGES_DIR,
    MANIFEST_FILE,
    VOC_DIR,
)
from .dataset import (
    AnnotatedImage,
    AssetIndex,
    AssetStore,
    DatasetManifest,
    ImageRecord,
    assign_backgrounds,
    derive_scene_seed,
    file_sha256,
    scan_assets,
    scene_rng,
    write_coco,
    write_manifest,
    write_voc,
)
from .exceptions import EmptyAssets, SceneUnsatisfiable
from .imaging import save_raster
from .scenes import compose_blueprint, write_blueprint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SceneJob:
    scene_index: int
    background_ref: str


@dataclass(frozen=True)
class SceneOutcome:
    """Итог одной сцены, возвращаемый воркером."""

    scene_index: int
    blueprint_id: str
    background_ref: str
    records: Tuple[ImageRecord, ...] = field(default_factory=tuple)
    images: Tuple[AnnotatedImage, ...] = field(default_factory=tuple)
    placements: int = 0
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass(frozen=True)
class SynthesisResult:
    manifest_path: Path
    digest: str
    num_scenes: int
    num_images: int
    failed_scenes: Tuple[int, ...]
    budget_exceeded: bool


def blueprint_id_for(scene_index: int) -> str:
    return f"scene_{scene_index:06d}"


class SceneWorker:
    """Всё, что нужно для сцены: конфиг, ассеты с кэшами, режимы."""

    def __init__(self, config: RunConfig, index: AssetIndex):
        self.config = config
        self.store = AssetStore(index, config.mask)
        self.modes: List[BlendMode] = modes_from_settings(
            config.dataset.blend_modes, config.blending
        )
        self.output_dir = Path(config.paths.output_dir)

    def _choose_modes(self, rng) -> List[BlendMode]:
        if self.config.dataset.same_image_multiblend:
            return list(self.modes)
        return [self.modes[int(rng.integers(len(self.modes)))]]

    def run(self, job: SceneJob) -> SceneOutcome:
        dataset = self.config.dataset
        seed = derive_scene_seed(dataset.master_seed, job.scene_index)
        rng = scene_rng(seed)
        blueprint_id = blueprint_id_for(job.scene_index)

        try:
            bp = compose_blueprint(
                rng,
                job.background_ref,
                self.store,
                self.config.augment,
                self.config.constraints,
                blueprint_id=blueprint_id,
                scene_seed=seed,
            )
        except SceneUnsatisfiable as e:
            return SceneOutcome(
                scene_index=job.scene_index,
                blueprint_id=blueprint_id,
                background_ref=job.background_ref,
                failure=str(e),
            )

        modes = self._choose_modes(rng)
        blueprint_path = write_blueprint(
            bp, self.output_dir / BLUEPRINTS_DIR / f"{blueprint_id}.json"
        )
        rendered = render_multiblend(bp, modes, self.store)

        records = []
        images = []
        for scene in rendered:
            record, image = self._write_scene(job, seed, scene, blueprint_path)
            records.append(record)
            images.append(image)

        return SceneOutcome(
            scene_index=job.scene_index,
            blueprint_id=blueprint_id,
            background_ref=job.background_ref,
            records=tuple(records),
            images=tuple(images),
            placements=len(bp.placements),
        )

    def _write_scene(
        self, job: SceneJob, seed: int, scene: RenderedScene, blueprint_path: Path
    ) -> Tuple[ImageRecord, AnnotatedImage]:
        file_name = f"{scene.blueprint_id}_{scene.blend_mode_tag}.png"
        image_path = save_raster(scene.image, self.output_dir / IMAGES_DIR / file_name)
        image = AnnotatedImage(
            file_name=file_name,
            width=scene.image.width,
            height=scene.image.height,
            annotations=scene.annotations,
        )

        voc_rel = None
        voc_digest = None
        if FORMAT_VOC in self.config.dataset.formats:
            voc_path = write_voc(image, self.output_dir / ANNOTATIONS_DIR / VOC_DIR)
            voc_rel = voc_path.relative_to(self.output_dir).as_posix()
            voc_digest = file_sha256(voc_path)

        record = ImageRecord(
            image=image_path.relative_to(self.output_dir).as_posix(),
            voc=voc_rel,
            blueprint=blueprint_path.relative_to(self.output_dir).as_posix(),
            blueprint_id=scene.blueprint_id,
            scene_index=job.scene_index,
            blend_mode=scene.blend_mode_tag,
            seed=seed,
            background=job.background_ref,
            solver_pastes=scene.solver.pastes,
            solver_iterations=scene.solver.iterations,
            solver_residual=scene.solver.max_residual,
            solver_unconverged=scene.solver.unconverged,
            image_sha256=file_sha256(image_path),
            voc_sha256=voc_digest,
        )
        return record, image


# Состояние процесса-воркера, задаётся инициализатором пула
_worker: Optional[SceneWorker] = None


def _init_worker(config: RunConfig, index: AssetIndex) -> None:
    global _worker
    _worker = SceneWorker(config, index)


def _run_job(job: SceneJob) -> SceneOutcome:
    return _worker.run(job)


def _iter_outcomes(
    config: RunConfig, index: AssetIndex, jobs: Sequence[SceneJob]
) -> Iterator[SceneOutcome]:
    if config.workers == 1:
        worker = SceneWorker(config, index)
        for job in jobs:
            yield worker.run(job)
        return

    with multiprocessing.Pool(
        processes=config.workers, initializer=_init_worker, initargs=(config, index)
    ) as pool:
        # imap сохраняет порядок задач, chunksize=1 даёт балансировку по сценам
        yield from pool.imap(_run_job, jobs, chunksize=1)


def _log_outcome(outcome: SceneOutcome, total: int) -> None:
    if outcome.failed:
        logger.warning(
            f"[SYNTH] {outcome.blueprint_id} ({outcome.scene_index + 1}/{total}) "
            f"bg={outcome.background_ref} FAILED: {outcome.failure}"
        )
        return
    solver = ", ".join(
        f"{r.blend_mode}:it={r.solver_iterations},res={r.solver_residual:.2e},"
        f"unconv={r.solver_unconverged}"
        for r in outcome.records
        if r.solver_pastes
    )
    logger.info(
        f"[SYNTH] {outcome.blueprint_id} ({outcome.scene_index + 1}/{total}) "
        f"bg={outcome.background_ref} placements={outcome.placements} "
        f"images={len(outcome.records)}" + (f" poisson[{solver}]" if solver else "")
    )


def synthesize(config: RunConfig, index: Optional[AssetIndex] = None) -> SynthesisResult:
    """
    Генерирует датасет по конфигу.

    Args:
        config: Конфиг запуска
        index: Готовый индекс ассетов (по умолчанию сканируется по config.paths)

    Returns:
        SynthesisResult с дайджестом манифеста и списком упавших сцен

    Raises:
        EmptyAssets, UnreadableImage: Проблемы с ассетами
        RenderError: Ошибка рендера сцены
        DatasetIoError: Ошибка записи
    """
    paths = config.paths
    if index is None:
        index = scan_assets(
            paths.objects_dir,
            paths.backgrounds_dir,
            paths.distractors,
            paths.resolved_masks_dir(),
        )
    refs = index.background_refs
    if not refs:
        raise EmptyAssets("no backgrounds to synthesize on")

    dataset = config.dataset
    num_scenes = dataset.resolve_num_scenes(len(refs))
    assignment = assign_backgrounds(refs, num_scenes, dataset.background_reuse, dataset.master_seed)
    jobs = [SceneJob(scene_index=i, background_ref=ref) for i, ref in enumerate(assignment)]

    output_dir = Path(paths.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(
        f"[SYNTH] {num_scenes} scenes on {len(refs)} backgrounds, "
        f"modes={dataset.blend_modes} multiblend={dataset.same_image_multiblend} "
        f"workers={config.workers} -> {output_dir}"
    )

    records: List[ImageRecord] = []
    images: List[AnnotatedImage] = []
    failed: List[int] = []
    for outcome in _iter_outcomes(config, index, jobs):
        _log_outcome(outcome, num_scenes)
        if outcome.failed:
            failed.append(outcome.scene_index)
            continue
        records.extend(outcome.records)
        images.extend(outcome.images)

    coco_rel = None
    if FORMAT_COCO in dataset.formats:
        coco_path = write_coco(
            images, output_dir / ANNOTATIONS_DIR / COCO_FILE, categories=index.target_labels
        )
        coco_rel = coco_path.relative_to(output_dir).as_posix()

    manifest = DatasetManifest(
        config=config.echo(),
        num_scenes=num_scenes,
        records=tuple(records),
        failed_scenes=tuple(failed),
        coco=coco_rel,
    )
    manifest_path = output_dir / MANIFEST_FILE
    digest = write_manifest(manifest, manifest_path)

    budget_exceeded = len(failed) > dataset.failure_budget
    if budget_exceeded:
        logger.error(
            f"[SYNTH] {len(failed)} unsatisfiable scenes exceed failure budget "
            f"{dataset.failure_budget}"
        )
    logger.info(f"[SYNTH] done: {len(records)} images, digest={digest}")

    return SynthesisResult(
        manifest_path=manifest_path,
        digest=digest,
        num_scenes=num_scenes,
        num_images=len(records),
        failed_scenes=tuple(failed),
        budget_exceeded=budget_exceeded,
    )
