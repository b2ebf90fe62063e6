from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class Config:
    # numerics
    lattice_tol: float = 1e-9
    max_cancellation_digits: float = 16.0
    gamma_certified_radius: float = 50.0
    pochhammer_product_limit: int = 64
    # qcore
    product_threshold: float = 1e-16
    product_chunk: int = 65_536
    # series
    series_rel_stop: float = 1e-15
    series_tail_stop: float = 1e-14
    max_terms: int = 1_000_000
    h2_terms: int = 100_000
    h2_min_excess: float = 3.0
    # identities
    base_tol: float = 1e-8
    dougall_tol: float = 1e-5
    idem_margin: float = 0.1
    lattice_margin: float = 1e-3
    lattice_span: int = 60
    m_min: int = 1
    m_max: int = 8
    # sampler
    random_seed: int = 42
    sample_count: int = 100
    q_range: Tuple[float, float] = (0.05, 0.7)
    q_ceiling: float = 0.95
    modulus_range: Tuple[float, float] = (0.05, 2.0)
    magnitude_cap: float = 0.9
    attempt_cap: int = 10_000
    # report
    schema_version: str = "1"


CONFIG = Config()
