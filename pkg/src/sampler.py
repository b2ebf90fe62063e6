"""Seeded rejection sampling of admissible parameters for catalog identities.

Streams come from numpy's PCG64 seeded through SeedSequence([seed, crc32(name)]),
so every identity has its own reproducible sequence (see docs/sampling.md).
"""
from __future__ import annotations

import math
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.config import CONFIG
from src.errors import ExhaustedError
from src.identities import IdentityDescriptor, Slot
from src.utils.logging import setup_logging


logger = setup_logging(name="sampler")

Params = Dict[str, Any]
Override = Callable[[Params], Any]
Accept = Callable[[Params], bool]


@dataclass(frozen=True)
class SampleConfig:
    seed: int = CONFIG.random_seed
    count: int = CONFIG.sample_count
    real_only: bool = False
    q_range: Tuple[float, float] = CONFIG.q_range
    magnitude_cap: float = CONFIG.magnitude_cap
    attempt_cap: int = CONFIG.attempt_cap

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")
        lo, hi = self.q_range
        if not 0 < lo <= hi <= CONFIG.q_ceiling:
            raise ValueError(f"q_range must satisfy 0 < lo <= hi <= {CONFIG.q_ceiling}, got {self.q_range}")
        if not 0 < self.magnitude_cap < 1:
            raise ValueError(f"magnitude_cap must be in (0, 1), got {self.magnitude_cap}")
        if self.attempt_cap < 1:
            raise ValueError(f"attempt_cap must be positive, got {self.attempt_cap}")


def rng_for(name: str, seed: int) -> np.random.Generator:
    entropy = [int(seed), zlib.crc32(name.encode("utf-8"))]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _polar(modulus: float, angle: float, real_only: bool) -> complex:
    if real_only:
        return complex(modulus if angle >= 0 else -modulus)
    return complex(modulus * math.cos(angle), modulus * math.sin(angle))


def _draw(slot: Slot, rng: np.random.Generator, cfg: SampleConfig) -> Any:
    if slot is Slot.SHIFT:
        return int(rng.integers(1, 6))
    if slot is Slot.BASE:
        modulus = float(rng.uniform(*cfg.q_range))
        angle = float(rng.uniform(-math.pi, math.pi))
        return complex(modulus) if cfg.real_only else _polar(modulus, angle, False)
    if slot in (Slot.CLASSICAL_NUMERATOR, Slot.CLASSICAL_DENOMINATOR):
        lo, hi = (-1.5, 0.9) if slot is Slot.CLASSICAL_NUMERATOR else (1.5, 4.5)
        real = float(rng.uniform(lo, hi))
        imag = float(rng.uniform(-0.5, 0.5))
        return complex(real, 0.0 if cfg.real_only else imag)
    lo, hi = CONFIG.modulus_range
    if slot is Slot.ARGUMENT:
        hi = cfg.magnitude_cap
    modulus = math.exp(float(rng.uniform(math.log(lo), math.log(hi))))
    angle = float(rng.uniform(-math.pi, math.pi))
    return _polar(modulus, angle, cfg.real_only)


def is_admissible(identity: IdentityDescriptor, params: Mapping[str, Any]) -> Tuple[bool, str]:
    verdict = identity.admissible(params)
    return verdict.ok, verdict.reason


def sample(
    identity: IdentityDescriptor,
    cfg: SampleConfig,
    overrides: Optional[Mapping[str, Override]] = None,
    accept: Optional[Accept] = None,
) -> List[Params]:
    """Draw cfg.count admissible parameter maps for `identity`.

    `overrides` replace drawn values (computed from the draw) before the
    admissibility test; `accept` is an extra predicate on the final map.
    """
    rng = rng_for(identity.name, cfg.seed)
    samples: List[Params] = []
    rejections: Counter = Counter()
    for _ in range(cfg.count):
        for _attempt in range(cfg.attempt_cap):
            params = {name: _draw(identity.draws[name], rng, cfg) for name in identity.params}
            for name, override in (overrides or {}).items():
                params[name] = override(params)
            ok, reason = is_admissible(identity, params)
            if ok and max(identity.region_moduli(params).values(), default=0.0) > cfg.magnitude_cap:
                ok, reason = False, "magnitude-cap"
            if ok and accept is not None and not accept(params):
                ok, reason = False, "accept"
            if ok:
                samples.append(params)
                break
            rejections[reason] += 1
        else:
            raise ExhaustedError(identity.name, cfg.attempt_cap, rejections.most_common(1)[0][0])
    total = sum(rejections.values())
    if total > 50 * cfg.count:
        logger.warning("%s: %d rejections for %d samples (%s)", identity.name, total, cfg.count, dict(rejections.most_common(3)))
    else:
        logger.debug("%s: %d samples, %d rejections", identity.name, cfg.count, total)
    return samples
