"""
Детерминированное выведение seed'ов сцен.

seed(master, i) = splitmix64_finalize((master + GAMMA * (i + 1)) mod 2^64)

GAMMA нечётное, поэтому при фиксированном master отображение i -> вход
финализатора инъективно, а финализатор - биекция на 64-битных словах.
Отсюда: разные индексы никогда не дают одинаковый seed, и смена master
меняет seed каждой сцены. Функция не зависит от платформы, числа воркеров
и порядка обработки сцен.
"""

import math
from typing import List, Sequence

import numpy as np

from ..constants import BACKGROUND_STREAM_INDEX

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_scene_seed(master_seed: int, scene_index: int) -> int:
    """64-битный seed сцены scene_index."""
    if scene_index < 0:
        raise ValueError(f"scene index must be non-negative, got {scene_index}")
    return _finalize((int(master_seed) + GAMMA * (int(scene_index) + 1)) & MASK64)


def scene_rng(seed: int) -> np.random.Generator:
    """Независимый поток случайных чисел сцены."""
    return np.random.Generator(np.random.PCG64(seed))


def assign_backgrounds(
    background_refs: Sequence[str], num_scenes: int, reuse: int, master_seed: int
) -> List[str]:
    """
    Назначает фон каждой сцене.

    Фоны переставляются потоком с зарезервированным индексом, затем сцена i
    берёт permuted[i mod B], где B = min(len(backgrounds), ceil(num_scenes / reuse)).
    При num_scenes = len(backgrounds) * reuse каждый фон встречается ровно
    reuse раз.

    Returns:
        Ссылки фонов длины num_scenes
    """
    if not background_refs:
        raise ValueError("no backgrounds to assign")
    if num_scenes < 1 or reuse < 1:
        raise ValueError(f"num_scenes and reuse must be positive, got {num_scenes}, {reuse}")

    rng = scene_rng(derive_scene_seed(master_seed, BACKGROUND_STREAM_INDEX))
    order = rng.permutation(len(background_refs))
    used = min(len(background_refs), math.ceil(num_scenes / reuse))
    chosen = [background_refs[int(k)] for k in order[:used]]
    return [chosen[i % used] for i in range(num_scenes)]
