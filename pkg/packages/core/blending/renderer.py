"""
Рендер чертежа сцены в пиксели.

Вставки выполняются строго по z_order в один рабочий массив, так что
каждая следующая вставка (в том числе пуассоновская) видит текущую
композицию как фон.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Protocol, Sequence, Tuple

import numpy as np

from ..constants import BLEND_DIRECT, BLEND_GAUSSIAN
from ..exceptions import RenderError, SynthError
from ..imaging import BoundingBox, Cutout, Raster
from ..scenes import SceneBlueprint, target_annotations
from .compositing import paste_direct_into, paste_gaussian_into
from .modes import BlendMode
from .poisson import paste_poisson_into

logger = logging.getLogger(__name__)


class CutoutSource(Protocol):
    """Откуда рендер берёт пиксели фонов и преобразованных вырезок."""

    def background(self, background_ref: str) -> Raster: ...

    def transformed(
        self, label: str, view_id: str, scale: float, rotation: float
    ) -> Cutout: ...


@dataclass(frozen=True)
class SolverSummary:
    """Сводка по пуассоновским решениям одной сцены."""

    pastes: int = 0
    iterations: int = 0
    max_residual: float = 0.0
    unconverged: int = 0

    @property
    def converged(self) -> bool:
        return self.unconverged == 0


@dataclass(frozen=True)
class RenderedScene:
    """
    Отрендеренная сцена.

    Attributes:
        image: Трёхканальный растр размера фона
        annotations: (label, box) только для целевых вставок
        blueprint_id: Идентификатор чертежа
        blend_mode_tag: Имя режима блендинга
        solver: Метаданные решателя (для direct/gaussian - нулевые)
    """

    image: Raster
    annotations: Tuple[Tuple[str, BoundingBox], ...]
    blueprint_id: str
    blend_mode_tag: str
    solver: SolverSummary = field(default_factory=SolverSummary)


def render_scene(bp: SceneBlueprint, mode: BlendMode, assets: CutoutSource) -> RenderedScene:
    """
    Рендерит чертёж в заданном режиме.

    Raises:
        RenderError: Любая ошибка ассетов или вставки, с blueprint_id
    """
    try:
        background = assets.background(bp.background_ref)
        if background.size != tuple(bp.canvas_size):
            raise ValueError(
                f"background {bp.background_ref} is {background.size}, "
                f"blueprint expects {tuple(bp.canvas_size)}"
            )
        if background.channels != 3:
            raise ValueError(f"background {bp.background_ref} is not a 3-channel image")

        canvas = np.array(background.pixels)
        pastes = iterations = unconverged = 0
        max_residual = 0.0
        for placement in sorted(bp.placements, key=lambda p: p.z_order):
            cutout = assets.transformed(
                placement.instance_label, placement.view_id, placement.scale, placement.rotation
            )
            if cutout.size != tuple(placement.size):
                raise ValueError(
                    f"{placement.instance_label}/{placement.view_id} transforms to "
                    f"{cutout.size}, blueprint recorded {tuple(placement.size)}"
                )

            if mode.kind == BLEND_DIRECT:
                paste_direct_into(canvas, cutout, placement.anchor)
            elif mode.kind == BLEND_GAUSSIAN:
                paste_gaussian_into(canvas, cutout, placement.anchor, mode.sigma)
            else:
                report = paste_poisson_into(
                    canvas, cutout, placement.anchor, mode.tolerance, mode.max_iters
                )
                pastes += 1
                iterations += report.iterations
                max_residual = max(max_residual, report.residual)
                unconverged += 0 if report.converged else 1
    except RenderError:
        raise
    except (SynthError, ValueError, OSError) as e:
        raise RenderError(bp.blueprint_id, e) from e

    return RenderedScene(
        image=Raster(canvas),
        annotations=tuple(target_annotations(bp)),
        blueprint_id=bp.blueprint_id,
        blend_mode_tag=mode.tag,
        solver=SolverSummary(
            pastes=pastes,
            iterations=iterations,
            max_residual=max_residual,
            unconverged=unconverged,
        ),
    )


def render_multiblend(
    bp: SceneBlueprint, modes: Sequence[BlendMode], assets: CutoutSource
) -> List[RenderedScene]:
    """Один и тот же чертёж во всех режимах; аннотации общие."""
    if not modes:
        raise ValueError("render_multiblend needs at least one blend mode")
    rendered = [render_scene(bp, mode, assets) for mode in modes]
    logger.debug(
        f"[RENDER] {bp.blueprint_id}: {', '.join(scene.blend_mode_tag for scene in rendered)}"
    )
    return rendered
