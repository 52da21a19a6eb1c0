"""
Пуассоновский (градиентный) блендинг.

Неизвестные Omega - пиксели маски, не лежащие на краю холста. Для p из
Omega с 4-соседями N_p:

    |N_p| f_p - sum_{q in N_p & Omega} f_q
        = sum_{q in N_p \\ Omega} boundary_q + sum_{q in N_p} (src_p - src_q)

boundary_q - текущая композиция вне маски и исходник для пикселей маски
на краю холста. Система симметричная положительно определённая, решается
сопряжёнными градиентами с предобуславливателем Якоби, по каналу за раз,
в интенсивностях [0, 1].
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg

from ..exceptions import SolverDiverged
from ..imaging import Cutout, Raster
from .compositing import overlap_slices, paste_direct_into

logger = logging.getLogger(__name__)

_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class SolverReport:
    """
    Итог решения для одной вставки.

    Attributes:
        iterations: Сумма итераций CG по трём каналам
        residual: Худшая относительная невязка по каналам
        converged: Все каналы достигли tolerance
        unknowns: Число неизвестных (0 - откат на прямую вставку)
    """

    iterations: int
    residual: float
    converged: bool
    unknowns: int


@dataclass(frozen=True)
class PoissonSystem:
    """Разреженная система A f = b на окне холста."""

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    omega: np.ndarray
    initial: np.ndarray

    @property
    def unknowns(self) -> int:
        return int(self.matrix.shape[0])


def build_poisson_system(
    target: np.ndarray,
    source: np.ndarray,
    mask: np.ndarray,
    fixed: Optional[np.ndarray] = None,
) -> PoissonSystem:
    """
    Собирает систему на окне.

    Все массивы одного размера (h, w[, c]) в интенсивностях [0, 1]. Пиксели
    окна на его краю в Omega не входят (их соседи вне окна).

    Args:
        target: Текущая композиция (h, w, c)
        source: Исходник, определённый на всём окне (h, w, c)
        mask: Пиксели маски (h, w)
        fixed: Пиксели маски с условием f = src (край холста); по умолчанию нет

    Returns:
        PoissonSystem; при пустой Omega - система нулевого размера
    """
    height, width = mask.shape
    if target.ndim == 2:
        target = target[:, :, None]
        source = source[:, :, None]
    fixed = np.zeros_like(mask, dtype=bool) if fixed is None else fixed

    interior = np.zeros_like(mask, dtype=bool)
    interior[1:-1, 1:-1] = True
    omega = mask & ~fixed & interior

    boundary = target.copy()
    boundary[fixed] = source[fixed]

    ys, xs = np.nonzero(omega)
    n = ys.size
    index = np.full(mask.shape, -1, dtype=np.int64)
    index[ys, xs] = np.arange(n)

    channels = target.shape[2]
    rhs = np.zeros((n, channels), dtype=np.float64)
    rows, cols = [], []
    for dy, dx in _NEIGHBOURS:
        ny, nx = ys + dy, xs + dx
        neighbour = index[ny, nx]
        inside = neighbour >= 0
        rows.append(np.flatnonzero(inside))
        cols.append(neighbour[inside])
        rhs += np.where(inside[:, None], 0.0, boundary[ny, nx])
        rhs += source[ys, xs] - source[ny, nx]

    off_rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    off_cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    off_diag = sparse.csr_matrix(
        (-np.ones(off_rows.size), (off_rows, off_cols)), shape=(n, n)
    )
    matrix = (sparse.identity(n, format="csr") * float(len(_NEIGHBOURS)) + off_diag).tocsr()

    return PoissonSystem(
        matrix=matrix,
        rhs=rhs,
        omega=omega,
        initial=target[ys, xs].astype(np.float64),
    )


def solve_channel(
    matrix: sparse.csr_matrix,
    rhs: np.ndarray,
    x0: np.ndarray,
    tolerance: float,
    max_iters: int,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> Tuple[np.ndarray, int, float, bool]:
    """
    Один канал: CG с предобуславливателем Якоби.

    Returns:
        (решение, число итераций, относительная невязка ||b - Ax|| / ||b||,
        признак сходимости по критерию CG)

    Raises:
        SolverDiverged: Если невязка не конечна
    """
    iterations = 0

    def _count(xk: np.ndarray) -> None:
        nonlocal iterations
        iterations += 1
        if callback is not None:
            callback(xk)

    preconditioner = sparse.diags(1.0 / matrix.diagonal())
    solution, info = linalg.cg(
        matrix, rhs, x0=x0, rtol=tolerance, atol=0.0, maxiter=max_iters,
        M=preconditioner, callback=_count,
    )

    rhs_norm = float(np.linalg.norm(rhs))
    residual_norm = float(np.linalg.norm(rhs - matrix @ solution))
    residual = residual_norm / rhs_norm if rhs_norm > 0 else residual_norm
    if not np.isfinite(residual) or not np.all(np.isfinite(solution)):
        raise SolverDiverged(f"non-finite residual after {iterations} iterations")
    return solution, iterations, residual, info == 0


def solve_poisson(
    system: PoissonSystem, tolerance: float, max_iters: int
) -> Tuple[np.ndarray, SolverReport]:
    """Решает систему по каналам; начальное приближение - текущая композиция."""
    channels = system.rhs.shape[1]
    solution = np.empty_like(system.rhs)
    total_iterations = 0
    worst_residual = 0.0
    converged = True
    for channel in range(channels):
        x, iterations, residual, channel_converged = solve_channel(
            system.matrix,
            system.rhs[:, channel],
            system.initial[:, channel],
            tolerance,
            max_iters,
        )
        solution[:, channel] = x
        total_iterations += iterations
        worst_residual = max(worst_residual, residual)
        converged = converged and channel_converged

    report = SolverReport(
        iterations=total_iterations,
        residual=worst_residual,
        converged=converged,
        unknowns=system.unknowns,
    )
    return solution, report


def paste_poisson_into(
    canvas: np.ndarray,
    cutout: Cutout,
    anchor: Tuple[int, int],
    tolerance: float,
    max_iters: int,
) -> SolverReport:
    """
    Пуассоновская вставка в рабочий массив.

    Если Omega пуста (маска целиком на краю холста), выполняется
    прямая вставка.
    """
    canvas_h, canvas_w = canvas.shape[:2]
    canvas_slices, _ = overlap_slices((canvas_w, canvas_h), cutout.size, anchor)

    # Окно: прямоугольник вырезки на холсте плюс пиксель с каждой стороны
    row0 = max(canvas_slices[0].start - 1, 0)
    row1 = min(canvas_slices[0].stop + 1, canvas_h)
    col0 = max(canvas_slices[1].start - 1, 0)
    col1 = min(canvas_slices[1].stop + 1, canvas_w)
    window = (slice(row0, row1), slice(col0, col1))
    win_h, win_w = row1 - row0, col1 - col0

    # Исходник с зажимом по краю, приведённый к координатам окна
    x, y = anchor
    cut_h, cut_w = cutout.alpha.pixels.shape
    src_rows = np.clip(np.arange(row0, row1) - y, 0, cut_h - 1)
    src_cols = np.clip(np.arange(col0, col1) - x, 0, cut_w - 1)
    source = cutout.color.pixels[np.ix_(src_rows, src_cols)].astype(np.float64) / 255.0

    mask = np.zeros((win_h, win_w), dtype=bool)
    inside_rows = (np.arange(row0, row1) >= y) & (np.arange(row0, row1) < y + cut_h)
    inside_cols = (np.arange(col0, col1) >= x) & (np.arange(col0, col1) < x + cut_w)
    mask[np.ix_(inside_rows, inside_cols)] = (
        cutout.alpha.pixels[np.ix_(src_rows[inside_rows], src_cols[inside_cols])] > 0
    )

    edge = np.zeros_like(mask)
    if row0 == 0:
        edge[0, :] = True
    if row1 == canvas_h:
        edge[-1, :] = True
    if col0 == 0:
        edge[:, 0] = True
    if col1 == canvas_w:
        edge[:, -1] = True
    fixed = mask & edge

    target = canvas[window].astype(np.float64) / 255.0
    system = build_poisson_system(target, source, mask, fixed)
    if system.unknowns == 0:
        logger.debug(f"[POISSON] empty interior for {cutout.instance_label}, direct paste")
        paste_direct_into(canvas, cutout, anchor)
        return SolverReport(iterations=0, residual=0.0, converged=True, unknowns=0)

    solution, report = solve_poisson(system, tolerance, max_iters)
    if not report.converged:
        logger.warning(
            f"[POISSON] {cutout.instance_label}/{cutout.view_id}: unconverged after "
            f"{report.iterations} iterations, residual={report.residual:.3e}"
        )

    region = canvas[window]
    region[system.omega] = np.clip(np.rint(solution * 255.0), 0, 255).astype(np.uint8)
    region[fixed] = np.clip(np.rint(source[fixed] * 255.0), 0, 255).astype(np.uint8)
    return report


def paste_poisson(
    bg: Raster,
    cutout: Cutout,
    anchor: Tuple[int, int],
    tolerance: float = 1e-6,
    max_iters: int = 10000,
) -> Tuple[Raster, SolverReport]:
    """
    Бесшовная вставка решением уравнения Пуассона.

    Returns:
        (новый растр, отчёт решателя)

    Raises:
        NoOverlap: Если вырезка не пересекается с фоном
        SolverDiverged: Если невязка не конечна
    """
    if not tolerance > 0 or max_iters < 1:
        raise ValueError(f"bad solver parameters tolerance={tolerance} max_iters={max_iters}")
    canvas = np.array(bg.pixels)
    report = paste_poisson_into(canvas, cutout, anchor, tolerance, max_iters)
    return Raster(canvas), report
