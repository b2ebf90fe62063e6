"""q-shifted factorials (x;q)_n, (x;q)_inf and products over parameter lists."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from src.config import CONFIG
from src.errors import PoleError
from src.numerics import EPS, EvalResult, Number, as_scalar
from src.utils.logging import setup_logging


logger = setup_logging(name="qcore")

INF = math.inf


@dataclass(frozen=True)
class QBase:
    q: complex

    def __post_init__(self) -> None:
        value = as_scalar(self.q)
        if not abs(value) < 1.0:
            raise ValueError(f"|q| must be < 1, got |q| = {abs(value)}")
        object.__setattr__(self, "q", value)

    @property
    def modulus(self) -> float:
        return abs(self.q)


QLike = Union[QBase, Number]


def as_base(q: QLike) -> QBase:
    return q if isinstance(q, QBase) else QBase(q)


def lattice_exponent(x: Number, q: QLike, tol: Optional[float] = None) -> Optional[int]:
    """Return n when x = q^n within relative tolerance `tol`, else None."""
    tol = CONFIG.lattice_tol if tol is None else tol
    x = complex(x)
    base = as_base(q)
    if x == 0:
        return None
    if base.modulus == 0:
        return 0 if abs(x - 1) < tol else None
    guess = round(math.log(abs(x)) / math.log(base.modulus))
    for n in (guess, guess - 1, guess + 1):
        try:
            if abs(x / base.q**n - 1) < tol:
                return n
        except (ZeroDivisionError, OverflowError):
            continue
    return None


def off_lattice(
    x: Number,
    q: QLike,
    lo: Optional[int] = None,
    hi: Optional[int] = None,
    margin: Optional[float] = None,
    span: Optional[int] = None,
) -> bool:
    """True when x keeps the margin from every q^n with lo <= n <= hi (|n| <= span)."""
    margin = CONFIG.lattice_margin if margin is None else margin
    span = CONFIG.lattice_span if span is None else span
    n = lattice_exponent(x, q, margin)
    if n is None or abs(n) > span:
        return True
    if lo is not None and n < lo:
        return True
    if hi is not None and n > hi:
        return True
    return False


def qpoch_inf(x: Number, q: QLike, threshold: Optional[float] = None) -> EvalResult:
    """(x;q)_inf truncated where the geometric tail drops below `threshold`.

    The discarded tail is not corrected; its bound goes into the error estimate.
    """
    threshold = CONFIG.product_threshold if threshold is None else threshold
    x = as_scalar(x)
    base = as_base(q)
    r = base.modulus
    ax = abs(x)
    if ax == 0:
        return EvalResult.exact(1)
    if r == 0:
        return EvalResult(1 - x, EPS)

    n_factors = max(1, math.ceil(math.log(threshold * (1 - r) / ax) / math.log(r)))
    while ax * r**n_factors / (1 - r) >= threshold:
        n_factors += 1
    tail = ax * r**n_factors / (1 - r)

    # fixed-size blocks keep memory bounded as |q| -> 1
    value = 1 + 0j
    weight_sum = 0.0
    power = 1 + 0j
    for start in range(0, n_factors, CONFIG.product_chunk):
        size = min(CONFIG.product_chunk, n_factors - start)
        powers = np.empty(size, dtype=complex)
        powers[0] = power
        powers[1:] = power * np.cumprod(np.full(size - 1, base.q))
        terms = x * powers
        factors = 1.0 - terms
        value *= complex(np.prod(factors))

        sizes = np.abs(factors)
        weights = 1.0 + np.abs(terms) * np.arange(start + 1, start + size + 1)
        nonzero = sizes > 0
        weight_sum += float(np.sum(weights[nonzero] / sizes[nonzero]))
        power = complex(powers[-1]) * base.q
    rounding = EPS * weight_sum
    logger.debug("qpoch_inf(%s, %s): %d factors, tail %.3e", x, base.q, n_factors, tail)
    return EvalResult(value, rounding + 2.0 * tail)


def qpoch(x: Number, q: QLike, n: int) -> EvalResult:
    x = as_scalar(x)
    base = as_base(q)
    n = int(n)
    if n == 0:
        return EvalResult.exact(1)

    value = 1 + 0j
    rounding = 0.0
    if n > 0:
        power = 1 + 0j
        for i in range(n):
            factor = 1 - x * power
            value *= factor
            if factor != 0:
                rounding += EPS * (1 + abs(x * power) * (i + 1)) / abs(factor)
            power *= base.q
        return EvalResult(value, rounding)

    inverse = 1 / base.q
    power = 1 + 0j
    for j in range(1, -n + 1):
        power *= inverse
        factor = 1 - x * power
        if abs(factor) < CONFIG.lattice_tol:
            raise PoleError(f"(x;q)_{n}: factor 1 - x q^-{j} vanishes at x={x!r}")
        value /= factor
        rounding += EPS * (1 + abs(x * power) * j) / abs(factor)
    return EvalResult(value, rounding)


def qpoch_list(xs: Iterable[Number], q: QLike, n: Union[int, float]) -> EvalResult:
    """(x1, ..., xk; q)_n, with n an integer or INF."""
    base = as_base(q)
    result = EvalResult.exact(1)
    for index, x in enumerate(xs):
        try:
            factor = qpoch_inf(x, base) if n == INF else qpoch(x, base, int(n))
        except PoleError as exc:
            raise PoleError(str(exc), index=index) from exc
        result = result * factor
    return result
