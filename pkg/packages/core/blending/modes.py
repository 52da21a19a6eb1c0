"""
Режимы блендинга.
"""

from dataclasses import dataclass
from typing import List, Sequence

from ..config import BlendSettings
from ..constants import BLEND_DIRECT, BLEND_GAUSSIAN, BLEND_MODES, BLEND_POISSON


@dataclass(frozen=True)
class BlendMode:
    """
    Режим вставки: direct, gaussian(sigma) или poisson(tolerance, max_iters).

    Параметры, не относящиеся к выбранному режиму, игнорируются.
    """

    kind: str
    sigma: float = 2.0
    tolerance: float = 1e-6
    max_iters: int = 10000

    def __post_init__(self):
        if self.kind not in BLEND_MODES:
            raise ValueError(f"unknown blend mode {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    @property
    def tag(self) -> str:
        """Короткое имя для имён файлов и манифеста."""
        return self.kind

    @classmethod
    def direct(cls) -> "BlendMode":
        return cls(BLEND_DIRECT)

    @classmethod
    def gaussian(cls, sigma: float = 2.0) -> "BlendMode":
        return cls(BLEND_GAUSSIAN, sigma=sigma)

    @classmethod
    def poisson(cls, tolerance: float = 1e-6, max_iters: int = 10000) -> "BlendMode":
        return cls(BLEND_POISSON, tolerance=tolerance, max_iters=max_iters)


def modes_from_settings(names: Sequence[str], settings: BlendSettings) -> List[BlendMode]:
    """Строит режимы из имён конфига и числовых параметров блендинга."""
    return [
        BlendMode(
            kind=name,
            sigma=settings.gaussian_sigma,
            tolerance=settings.poisson_tolerance,
            max_iters=settings.poisson_max_iters,
        )
        for name in names
    ]
