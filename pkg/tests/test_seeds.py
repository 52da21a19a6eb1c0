import pytest

from packages.core.dataset import assign_backgrounds, derive_scene_seed, scene_rng
from packages.core.evaluation import background_usage


def test_scene_seeds_are_unique():
    seeds = {derive_scene_seed(123, i) for i in range(1_000_000)}
    assert len(seeds) == 1_000_000


def test_master_seed_changes_every_scene():
    for i in range(10_000):
        assert derive_scene_seed(1, i) != derive_scene_seed(2, i)


def test_seed_is_a_pure_function():
    assert derive_scene_seed(2**64 - 1, 5) == derive_scene_seed(2**64 - 1, 5)
    assert 0 <= derive_scene_seed(2**64 - 1, 5) < 2**64
    with pytest.raises(ValueError):
        derive_scene_seed(0, -1)


def test_scene_rng_streams_repeat():
    a = scene_rng(derive_scene_seed(7, 3)).random(5)
    b = scene_rng(derive_scene_seed(7, 3)).random(5)
    assert (a == b).all()


def test_each_background_used_exactly_reuse_times():
    refs = [f"bg_{i:04d}.jpg" for i in range(1548)]
    assignment = assign_backgrounds(refs, 1548 * 4, 4, master_seed=0)
    usage = background_usage(assignment)
    assert len(usage) == 1548
    assert (usage == 4).all()


def test_assignment_with_fewer_scenes_than_backgrounds():
    refs = [f"bg_{i}.png" for i in range(10)]
    assignment = assign_backgrounds(refs, 6, 4, master_seed=3)
    assert len(assignment) == 6
    assert len(set(assignment)) == 2
    assert assignment == assign_backgrounds(refs, 6, 4, master_seed=3)


def test_assignment_rejects_empty_library():
    with pytest.raises(ValueError):
        assign_backgrounds([], 4, 4, 0)
