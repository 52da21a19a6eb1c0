"""
Общие фикстуры: синтетические изображения и крошечная библиотека ассетов.
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

# Корень проекта в sys.path, чтобы импортировать packages.core и apps
sys.path.insert(0, str(Path(__file__).parent.parent))

from packages.core.imaging import Cutout, Raster, make_cutout  # noqa: E402


def disk_mask(size, center, radius) -> np.ndarray:
    """Аналитический диск: центры пикселей на расстоянии <= radius."""
    width, height = size
    ys, xs = np.mgrid[0:height, 0:width]
    cx, cy = center
    return (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= radius * radius


def disk_image(size=(200, 200), radius=50, fg=(0, 0, 0), bg=(255, 255, 255)) -> np.ndarray:
    width, height = size
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:] = bg
    pixels[disk_mask(size, (width / 2, height / 2), radius)] = fg
    return pixels


def gradient_background(size=(160, 120), seed=0) -> np.ndarray:
    width, height = size
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width]
    base = rng.integers(40, 200, size=3)
    pixels = np.stack(
        [
            base[0] + 40 * xs / width,
            base[1] + 40 * ys / height,
            base[2] + 20 * (xs + ys) / (width + height),
        ],
        axis=2,
    )
    return np.clip(pixels, 0, 255).astype(np.uint8)


def disk_cutout(radius=10, color=(200, 40, 40), label="obj", view="v0") -> Cutout:
    size = (2 * radius + 4, 2 * radius + 4)
    mask = disk_mask(size, (size[0] / 2, size[1] / 2), radius)
    pixels = np.zeros((size[1], size[0], 3), dtype=np.uint8)
    pixels[:] = color
    return make_cutout(pixels, mask.astype(np.uint8) * 255, label, view)


def save_png(pixels: np.ndarray, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels).save(path, format="PNG")
    return path


@pytest.fixture
def make_library(tmp_path):
    """
    Фабрика библиотеки ассетов в tmp_path/assets.

    Экземпляры - цветные диски и квадраты на белом фоне 64x64, маски
    пишутся для части видов, фоны - градиенты 160x120.
    """

    def _make(instances=("cup", "box"), views=3, backgrounds=4, distractors=(),
              masks_for=None, bg_size=(160, 120)):
        root = tmp_path / "assets"
        palette = [(200, 40, 40), (40, 160, 60), (40, 60, 200), (180, 150, 20), (120, 40, 160)]
        for i, label in enumerate(list(instances) + list(distractors)):
            for v in range(views):
                radius = 18 + 2 * v
                pixels = disk_image((64, 64), radius, fg=palette[(i + v) % len(palette)])
                if i % 2 == 1:
                    pixels[:] = 255
                    side = 30 + 4 * v
                    offset = (64 - side) // 2
                    pixels[offset:offset + side, offset:offset + side] = palette[(i + v) % len(palette)]
                save_png(pixels, root / "objects" / label / f"view_{v}.png")
                if masks_for is not None and label in masks_for:
                    mask = np.any(pixels != 255, axis=2).astype(np.uint8) * 255
                    save_png(mask, root / "masks" / label / f"view_{v}.png")
        for b in range(backgrounds):
            save_png(gradient_background(bg_size, seed=b), root / "backgrounds" / f"bg_{b:03d}.png")
        return {
            "root": root,
            "objects_dir": root / "objects",
            "masks_dir": root / "masks",
            "backgrounds_dir": root / "backgrounds",
            "distractors": list(distractors),
        }

    return _make


@pytest.fixture
def make_config(tmp_path):
    """Фабрика JSON-конфига запуска поверх библиотеки make_library."""

    def _make(library, output_dir=None, name="config.json", **sections):
        raw = {
            "paths": {
                "objects_dir": str(library["objects_dir"]),
                "backgrounds_dir": str(library["backgrounds_dir"]),
                "output_dir": str(output_dir or tmp_path / "out"),
                "distractors": library["distractors"],
            },
            "dataset": {"num_scenes": 4, "master_seed": 7},
        }
        for section, values in sections.items():
            if isinstance(values, dict):
                raw.setdefault(section, {}).update(values)
            else:
                raw[section] = values
        path = tmp_path / name
        path.write_text(json.dumps(raw, indent=2), encoding="utf-8")
        return path

    return _make


@pytest.fixture
def white_disk_raster():
    return Raster(disk_image())


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("SYNTH_WORKERS", "SYNTH_SEED", "SYNTH_LOG_LEVEL", "SYNTH_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
