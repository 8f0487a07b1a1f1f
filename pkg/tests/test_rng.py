import numpy as np
import pytest

from hardnesslab.rng import SEED_ENV_VAR, as_generator, child_seed, default_seed, substream


def test_same_triple_same_stream():
    a = substream(5, "goe", 3).standard_normal(100)
    b = substream(5, "goe", 3).standard_normal(100)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("other", [(6, "goe", 3), (5, "wishart", 3), (5, "goe", 4)])
def test_any_component_changes_stream(other):
    a = substream(5, "goe", 3).standard_normal(10)
    assert not np.array_equal(a, substream(*other).standard_normal(10))


def test_order_independence():
    first = [substream(1, "t", i).random() for i in range(5)]
    second = [substream(1, "t", i).random() for i in reversed(range(5))][::-1]
    assert first == second


def test_generator_passthrough():
    rng = np.random.default_rng(0)
    assert as_generator(rng) is rng
    with pytest.raises(TypeError):
        as_generator(1.5)
    with pytest.raises(ValueError):
        substream(-1)


def test_large_seed_and_child_seed():
    substream(2**64 - 1, "x")
    assert child_seed(3, "a") == child_seed(3, "a")
    assert 0 <= child_seed(3, "a") < 2**63


def test_default_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert default_seed(11) == 11
    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert default_seed(11) == 42
