import numpy as np
import pytest

from somkit.errors import ValidationError
from somkit.rng import Stream, splitmix64


def test_splitmix64_reference_output():
    state, out = splitmix64(0)
    assert state == 0x9E3779B97F4A7C15
    assert out == 0xE220A8397B1DCDAF


def test_same_seed_replays_the_stream():
    a, b = Stream(42), Stream(42)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_different_seeds_diverge():
    assert Stream(1).next_u64() != Stream(2).next_u64()


def test_random_is_in_unit_interval():
    rng = Stream(7)
    draws = [rng.random() for _ in range(1000)]
    assert min(draws) >= 0.0
    assert max(draws) < 1.0


def test_randbelow_covers_its_range():
    rng = Stream(3)
    draws = {rng.randbelow(5) for _ in range(500)}
    assert draws == {0, 1, 2, 3, 4}


def test_randbelow_rejects_empty_range():
    with pytest.raises(ValidationError):
        Stream(0).randbelow(0)


def test_uniform_stays_in_box():
    low = np.array([0.0, -1.0, 5.0])
    high = np.array([1.0, 1.0, 5.0])
    points = Stream(11).uniform(low, high, 50)
    assert points.shape == (50, 3)
    assert np.all(points >= low) and np.all(points <= high)
    assert np.all(points[:, 2] == 5.0)


def test_sample_draws_distinct_indices():
    picked = Stream(5).sample(10, 10)
    assert sorted(picked) == list(range(10))
    with pytest.raises(ValidationError):
        Stream(5).sample(3, 4)


def test_spawned_seeds_are_distinct_and_replayable():
    seeds = Stream(8).spawn_seeds(3)
    assert len(set(seeds)) == 3
    assert seeds == Stream(8).spawn_seeds(3)
    assert Stream(seeds[0]).next_u64() != Stream(seeds[1]).next_u64()


def test_negative_seed_is_rejected():
    with pytest.raises(ValidationError):
        Stream(-1)
