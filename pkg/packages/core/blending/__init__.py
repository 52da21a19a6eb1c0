"""
Блендинг: прямая вставка, размытая альфа, пуассоновское клонирование.
"""

from .compositing import (
    gaussian_kernel,
    kernel_radius,
    overlap_slices,
    paste_direct,
    paste_gaussian,
    soft_alpha,
)
from .modes import BlendMode, modes_from_settings
from .poisson import (
    PoissonSystem,
    SolverReport,
    build_poisson_system,
    paste_poisson,
    solve_channel,
    solve_poisson,
)
from .renderer import CutoutSource, RenderedScene, SolverSummary, render_multiblend, render_scene

__all__ = [
    "BlendMode",
    "CutoutSource",
    "PoissonSystem",
    "RenderedScene",
    "SolverReport",
    "SolverSummary",
    "build_poisson_system",
    "gaussian_kernel",
    "kernel_radius",
    "modes_from_settings",
    "overlap_slices",
    "paste_direct",
    "paste_gaussian",
    "paste_poisson",
    "render_multiblend",
    "render_scene",
    "soft_alpha",
    "solve_channel",
    "solve_poisson",
]
