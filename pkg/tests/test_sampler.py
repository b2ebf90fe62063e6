import zlib

import numpy as np
import pytest

from src.errors import ExhaustedError
from src.identities import get_identity
from src.report import format_params
from src.sampler import SampleConfig, is_admissible, rng_for, sample


def test_sample_config_validation():
    with pytest.raises(ValueError):
        SampleConfig(count=0)
    with pytest.raises(ValueError):
        SampleConfig(q_range=(0.1, 0.99))
    with pytest.raises(ValueError):
        SampleConfig(seed=-1)
    with pytest.raises(ValueError):
        SampleConfig(magnitude_cap=1.0)


def test_default_rng_test_vector():
    # documented in docs/sampling.md
    values = np.random.default_rng(42).random(3)
    assert values.tolist() == pytest.approx([0.7739560485559633, 0.4388784397520523, 0.8585979199113825], rel=1e-12)


def test_rng_for_test_vectors():
    # documented in docs/sampling.md
    assert zlib.crc32(b"thm1_bailey") == 21255244
    assert rng_for("thm1_bailey", 42).random(3).tolist() == [0.028794477681284625, 0.11345074825377, 0.050378891649434321]
    assert rng_for("q_binomial", 42).random(3).tolist() == [0.6932177224851277, 0.28281062878995011, 0.89377921287202011]


def test_first_draw_is_pinned():
    first = sample(get_identity("q_binomial"), SampleConfig(seed=42, count=1))[0]
    assert list(first) == ["a", "z", "q"]
    assert format_params(first) == {
        "a": "0.13202621800665457-0.63132284653028925i",
        "z": "-0.61382015131546996-0.24812635398323127i",
        "q": "0.29948901474773387-0.074526815718736816i",
    }


def test_sampling_is_deterministic():
    identity = get_identity("thm1_bailey")
    first = sample(identity, SampleConfig(seed=42, count=10))
    second = sample(identity, SampleConfig(seed=42, count=10))
    other = sample(identity, SampleConfig(seed=43, count=10))
    assert first == second
    assert first != other


def test_ramanujan_samples_lie_in_the_annulus():
    for p in sample(get_identity("ramanujan_1psi1"), SampleConfig(seed=42, count=3)):
        assert abs(p["c"] / p["a"]) < abs(p["z"]) < 1


def test_samples_are_admissible():
    identity = get_identity("thm1_bailey")
    draws = sample(identity, SampleConfig(seed=1, count=100))
    assert len(draws) == 100
    for p in draws:
        ok, reason = is_admissible(identity, p)
        assert ok, reason
        assert max(identity.region_moduli(p).values()) <= 0.9


def test_samples_cover_the_region():
    identity = get_identity("thm1_bailey")
    draws = sample(identity, SampleConfig(seed=8, count=1000))
    for label in ("z", "cd/abz", "d/a", "c/b"):
        assert max(identity.region_moduli(p)[label] for p in draws) > 0.8, label


def test_dougall_samples_have_enough_excess():
    for p in sample(get_identity("dougall_2h2"), SampleConfig(seed=42, count=50)):
        assert (p["c"] + p["d"] - p["a"] - p["b"]).real >= 3


def test_q_range_and_real_only():
    cfg = SampleConfig(seed=4, count=40, real_only=True, q_range=(0.1, 0.3))
    for p in sample(get_identity("heine_iii1"), cfg):
        assert all(complex(value).imag == 0 for value in p.values())
        assert 0.1 <= abs(p["q"]) <= 0.3


def test_finite_shift_draws_integer_m():
    for p in sample(get_identity("finite_shift"), SampleConfig(seed=6, count=20)):
        assert isinstance(p["m"], int)
        assert 1 <= p["m"] <= 5


def test_overrides_are_applied_before_admissibility():
    draws = sample(
        get_identity("thm1_bailey"),
        SampleConfig(seed=2, count=10),
        overrides={"c": lambda p: p["q"] ** 3},
    )
    for p in draws:
        assert p["c"] == p["q"] ** 3


def test_exhausted_sampling():
    cfg = SampleConfig(seed=0, count=2, attempt_cap=25)
    with pytest.raises(ExhaustedError) as info:
        sample(get_identity("q_binomial"), cfg, accept=lambda p: False)
    assert info.value.reason == "accept"
