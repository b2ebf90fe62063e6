"""Unilateral rphi_s, bilateral rpsi_s and classical 2H2 series evaluators.

Every sum runs a term recurrence and stops only when the last term is
negligible and a geometric majorant of the remaining tail is below the
tail threshold. The majorant bound and the accumulated rounding are
reported in the result's relative error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from src.config import CONFIG
from src.errors import CapError, DivergesError, NumericalOverflowError, PoleError, SlowConvergenceError
from src.numerics import EPS, EvalResult, Number, as_scalar
from src.qcore import QBase, QLike, as_base, lattice_exponent, qpoch_list
from src.utils.logging import setup_logging


logger = setup_logging(name="series")

Ratio = Callable[[int], complex]
Majorant = Callable[[int], float]


class SeriesKind(str, Enum):
    UNILATERAL = "unilateral"
    BILATERAL = "bilateral"
    CLASSICAL_BILATERAL = "classical_bilateral"


class Verdict(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class SeriesSpec:
    kind: SeriesKind
    num: Tuple[complex, ...]
    den: Tuple[complex, ...]
    q: Optional[QBase] = None
    z: complex = 1 + 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "num", tuple(as_scalar(a) for a in self.num))
        object.__setattr__(self, "den", tuple(as_scalar(b) for b in self.den))
        object.__setattr__(self, "z", as_scalar(self.z))
        if self.kind is SeriesKind.CLASSICAL_BILATERAL:
            if len(self.num) != 2 or len(self.den) != 2:
                raise ValueError("classical bilateral series take exactly two numerator and two denominator parameters")
            if self.z != 1:
                raise ValueError("classical bilateral series are evaluated at argument 1 only")
            return
        if self.q is None:
            raise ValueError(f"{self.kind.value} series need a base q")
        object.__setattr__(self, "q", as_base(self.q))

    @classmethod
    def unilateral(cls, num: Sequence[Number], den: Sequence[Number], q: QLike, z: Number) -> "SeriesSpec":
        return cls(SeriesKind.UNILATERAL, tuple(num), tuple(den), as_base(q), z)

    @classmethod
    def bilateral(cls, num: Sequence[Number], den: Sequence[Number], q: QLike, z: Number) -> "SeriesSpec":
        return cls(SeriesKind.BILATERAL, tuple(num), tuple(den), as_base(q), z)

    @classmethod
    def classical(cls, a: Number, b: Number, c: Number, d: Number) -> "SeriesSpec":
        return cls(SeriesKind.CLASSICAL_BILATERAL, (a, b), (c, d))

    @property
    def power(self) -> int:
        """Exponent of the (-1)^k q^(k(k-1)/2) factor in the general term."""
        extra = 1 if self.kind is SeriesKind.UNILATERAL else 0
        return len(self.den) + extra - len(self.num)


@dataclass(frozen=True)
class ConvergenceClass:
    verdict: Verdict
    pos_tail_ratio: float
    neg_tail_ratio: Optional[float] = None
    excess: Optional[float] = None

    def describe(self) -> str:
        parts = [f"verdict={self.verdict.value}", f"pos_tail_ratio={self.pos_tail_ratio:.6g}"]
        if self.neg_tail_ratio is not None:
            parts.append(f"neg_tail_ratio={self.neg_tail_ratio:.6g}")
        if self.excess is not None:
            parts.append(f"excess={self.excess:.6g}")
        return " ".join(parts)


@dataclass
class _Partial:
    total: complex = 0j
    terms: int = 0
    max_partial: float = 0.0
    rounding: float = 0.0
    tail: float = 0.0
    stop: str = ""


def _verdict(ratios: Sequence[float]) -> Verdict:
    worst = max(ratios)
    if worst < 1 - CONFIG.lattice_tol:
        return Verdict.CONVERGES
    if worst <= 1 + CONFIG.lattice_tol:
        return Verdict.BOUNDARY
    return Verdict.DIVERGES


def _forward_stop(num: Sequence[complex], q: QBase) -> Optional[int]:
    """Smallest j >= 0 with a numerator equal to q^-j (the series stops after k = j)."""
    exponents = [lattice_exponent(a, q) for a in num]
    stops = [-n for n in exponents if n is not None and n <= 0]
    return min(stops) if stops else None


def _backward_stop(den: Sequence[complex], q: QBase) -> Optional[int]:
    """Smallest n >= 1 with a denominator equal to q^n (terms with k <= -n vanish)."""
    exponents = [lattice_exponent(b, q) for b in den]
    stops = [n for n in exponents if n is not None and n >= 1]
    return min(stops) if stops else None


def _tail_ratio(z: complex, power: int) -> float:
    if power == 0:
        return abs(z)
    return 0.0 if power > 0 else math.inf


def converges(spec: SeriesSpec) -> ConvergenceClass:
    if spec.kind is SeriesKind.CLASSICAL_BILATERAL:
        a, b = spec.num
        c, d = spec.den
        excess = (c + d - a - b).real
        if excess > 1 + CONFIG.lattice_tol:
            verdict = Verdict.CONVERGES
        elif excess < 1 - CONFIG.lattice_tol:
            verdict = Verdict.DIVERGES
        else:
            verdict = Verdict.BOUNDARY
        return ConvergenceClass(verdict, 1.0, 1.0, excess)

    pos = 0.0 if _forward_stop(spec.num, spec.q) is not None else _tail_ratio(spec.z, spec.power)
    if spec.kind is SeriesKind.UNILATERAL:
        return ConvergenceClass(_verdict([pos]), pos)

    if _backward_stop(spec.den, spec.q) is not None:
        neg = 0.0
    else:
        scale = abs(math.prod(spec.num, start=1 + 0j) * spec.z)
        top = abs(math.prod(spec.den, start=1 + 0j))
        neg = top / scale if scale > 0 else math.inf
    return ConvergenceClass(_verdict([pos, neg]), pos, neg)


def _forward_ratio(num: Sequence[complex], den: Sequence[complex], q: complex, z: complex, power: int, unilateral: bool) -> Ratio:
    def ratio(k: int) -> complex:
        qk = q**k
        top = 1 + 0j
        for a in num:
            factor = 1 - a * qk
            if abs(factor) < CONFIG.lattice_tol:
                return 0j
            top *= factor
        bottom = (1 - q * qk) if unilateral else 1 + 0j
        for b in den:
            factor = 1 - b * qk
            if abs(factor) < CONFIG.lattice_tol:
                raise PoleError(f"denominator parameter {b!r} equals q^-{k}")
            bottom *= factor
        return top / bottom * (-qk) ** power * z

    return ratio


def _forward_majorant(num: Sequence[complex], den: Sequence[complex], q: complex, z: complex, power: int, unilateral: bool) -> Majorant:
    r = abs(q)
    tops = [abs(a) for a in num]
    bottoms = [abs(b) for b in den]

    def bound(k: int) -> float:
        if power < 0:
            return math.inf
        rk = r**k
        bottom = math.prod((1 - b * rk for b in bottoms), start=(1 - r * rk) if unilateral else 1.0)
        if bottom <= 0:
            return math.inf
        top = math.prod((1 + a * rk for a in tops), start=abs(z))
        return top / bottom * rk**power

    return bound


def _backward_ratio(num: Sequence[complex], den: Sequence[complex], q: complex, z: complex) -> Ratio:
    sign = (-1) ** (len(den) - len(num))

    def ratio(k: int) -> complex:
        # t_{-(k+1)} / t_{-k}
        qm = q ** (k + 1)
        top = 1 + 0j
        for b in den:
            factor = qm - b
            if abs(factor) < CONFIG.lattice_tol * abs(qm):
                return 0j
            top *= factor
        bottom = 1 + 0j
        for a in num:
            factor = qm - a
            if abs(factor) < CONFIG.lattice_tol * abs(qm):
                raise PoleError(f"numerator parameter {a!r} equals q^{k + 1}")
            bottom *= factor
        return sign * top / (bottom * z)

    return ratio


def _backward_majorant(num: Sequence[complex], den: Sequence[complex], q: complex, z: complex) -> Majorant:
    r = abs(q)
    tops = [abs(b) for b in den]
    bottoms = [abs(a) for a in num]
    az = abs(z)

    def bound(k: int) -> float:
        rm = r ** (k + 1)
        if az == 0 or any(a <= rm for a in bottoms):
            return math.inf
        top = math.prod(b + rm for b in tops)
        bottom = math.prod(a - rm for a in bottoms)
        return top / (bottom * az)

    return bound


def _accumulate(
    first: complex,
    ratio: Ratio,
    majorant: Majorant,
    include_first: bool = True,
    flops: int = 8,
    rel_stop: Optional[float] = None,
    tail_stop: Optional[float] = None,
    max_terms: Optional[int] = None,
) -> _Partial:
    rel_stop = CONFIG.series_rel_stop if rel_stop is None else rel_stop
    tail_stop = CONFIG.series_tail_stop if tail_stop is None else tail_stop
    max_terms = CONFIG.max_terms if max_terms is None else max_terms

    term = complex(first)
    state = _Partial()
    if include_first:
        state.total = term
        state.max_partial = abs(term)
        state.rounding = EPS * abs(term)
    if term == 0:
        state.stop = "terminated"
        return state

    step = 0
    while True:
        if step >= max_terms:
            raise CapError(f"series did not meet the stopping rule within {max_terms} terms")
        factor = ratio(step)
        if factor == 0:
            state.stop = "terminated"
            break
        term *= factor
        step += 1
        state.terms = step
        if term == 0:
            state.stop = "underflow"
            break
        if not (math.isfinite(term.real) and math.isfinite(term.imag)):
            raise NumericalOverflowError(f"series term {step} is not finite")
        state.total += term
        size = abs(state.total)
        state.max_partial = max(state.max_partial, size)
        state.rounding += EPS * abs(term) * (1 + flops * step)
        rho = majorant(step)
        if rho < 1:
            tail = abs(term) * rho / (1 - rho)
            if abs(term) <= rel_stop * size and tail <= tail_stop * size:
                state.tail = tail
                state.stop = "converged"
                break
    return state


def _combine(parts: Sequence[_Partial]) -> EvalResult:
    total = sum((p.total for p in parts), 0j)
    size = abs(total)
    largest = max(p.max_partial for p in parts)
    error = sum(p.rounding + p.tail for p in parts)
    if size > 0:
        rel = error / size
        lost = math.log10(largest / size) if largest > size else 0.0
    else:
        rel = 0.0 if error == 0 else 1.0
        lost = CONFIG.max_cancellation_digits if largest > 0 else 0.0
    return EvalResult(total, rel, min(lost, CONFIG.max_cancellation_digits))


def _refuse(spec: SeriesSpec, verdict: ConvergenceClass) -> None:
    if verdict.verdict is not Verdict.CONVERGES:
        raise DivergesError(f"{spec.kind.value} series outside its convergence region: {verdict.describe()}", verdict)


def _flops(spec: SeriesSpec) -> int:
    return 3 * (len(spec.num) + len(spec.den)) + 6


def eval_phi(spec: SeriesSpec, **stopping) -> EvalResult:
    """Sum a unilateral series; `stopping` may override rel_stop, tail_stop, max_terms."""
    if spec.kind is not SeriesKind.UNILATERAL:
        raise ValueError(f"eval_phi needs a unilateral spec, got {spec.kind.value}")
    _refuse(spec, converges(spec))
    q = spec.q.q
    part = _accumulate(
        1,
        _forward_ratio(spec.num, spec.den, q, spec.z, spec.power, True),
        _forward_majorant(spec.num, spec.den, q, spec.z, spec.power, True),
        flops=_flops(spec),
        **stopping,
    )
    logger.debug("phi: %d terms, stop=%s", part.terms, part.stop)
    return _combine([part])


def _split_parts(spec: SeriesSpec, **stopping) -> Tuple[_Partial, _Partial]:
    if spec.kind is not SeriesKind.BILATERAL:
        raise ValueError(f"bilateral evaluation needs a bilateral spec, got {spec.kind.value}")
    _refuse(spec, converges(spec))
    q = spec.q.q
    positive = _accumulate(
        1,
        _forward_ratio(spec.num, spec.den, q, spec.z, spec.power, False),
        _forward_majorant(spec.num, spec.den, q, spec.z, spec.power, False),
        flops=_flops(spec),
        **stopping,
    )
    negative = _accumulate(
        1,
        _backward_ratio(spec.num, spec.den, q, spec.z),
        _backward_majorant(spec.num, spec.den, q, spec.z),
        include_first=False,
        flops=_flops(spec),
        **stopping,
    )
    logger.debug(
        "psi: %d positive terms (%s), %d negative terms (%s)",
        positive.terms,
        positive.stop,
        negative.terms,
        negative.stop,
    )
    return positive, negative


def eval_psi(spec: SeriesSpec, **stopping) -> EvalResult:
    if spec.power != 0:
        raise ValueError("bilateral series are evaluated for r = s only")
    return _combine(_split_parts(spec, **stopping))


def split_psi(spec: SeriesSpec, **stopping) -> Tuple[EvalResult, EvalResult]:
    if spec.power != 0:
        raise ValueError("bilateral series are evaluated for r = s only")
    positive, negative = _split_parts(spec, **stopping)
    return _combine([positive]), _combine([negative])


def _near_integer(x: complex, lo: Optional[int] = None, hi: Optional[int] = None, tol: Optional[float] = None) -> bool:
    tol = CONFIG.lattice_tol if tol is None else tol
    n = round(x.real)
    if lo is not None and n < lo:
        return False
    if hi is not None and n > hi:
        return False
    return abs(x - n) < tol


def eval_h2(a: Number, b: Number, c: Number, d: Number, terms: Optional[int] = None) -> EvalResult:
    """Classical 2H2 at argument 1, truncated at |k| <= K with an integral tail bound."""
    a, b, c, d = (as_scalar(x) for x in (a, b, c, d))
    excess = (c + d - a - b).real
    if excess < CONFIG.h2_min_excess:
        raise SlowConvergenceError(
            f"2H2 needs Re(c+d-a-b) >= {CONFIG.h2_min_excess} for a certified truncation, got {excess:.6g}"
        )
    for name, value in (("c", c), ("d", d)):
        if _near_integer(value, hi=0):
            raise PoleError(f"(c)_k vanishes: {name}={value!r} is a non-positive integer")
    for name, value in (("a", a), ("b", b)):
        if _near_integer(value, lo=1):
            raise PoleError(f"({name})_-k has a vanishing factor: {name}={value!r} is a positive integer")

    K = CONFIG.h2_terms if terms is None else int(terms)
    k = np.arange(K, dtype=float)
    forward = np.cumprod((a + k) * (b + k) / ((c + k) * (d + k)))
    backward = np.cumprod((c - 1 - k) * (d - 1 - k) / ((a - 1 - k) * (b - 1 - k)))
    if not (np.all(np.isfinite(forward)) and np.all(np.isfinite(backward))):
        raise NumericalOverflowError("2H2 terms overflow")

    pos_sum = 1 + complex(np.sum(forward))
    neg_sum = complex(np.sum(backward))
    total = pos_sum + neg_sum
    size = abs(total)
    if size == 0:
        raise NumericalOverflowError("2H2 sum vanishes to working precision")

    weights = 1 + 6 * (k + 1)
    rounding = EPS * float(np.sum(np.abs(forward) * weights) + np.sum(np.abs(backward) * weights) + 1)
    rounding += EPS * math.log2(K) * float(np.abs(forward).sum() + np.abs(backward).sum())
    # sum_{|k|>K} |t_k| <= C K^(1-s)/(s-1) with C = |t_K| K^s
    tail = (abs(forward[-1]) + abs(backward[-1])) * K / (excess - 1)
    largest = max(
        float(np.max(np.abs(1 + np.cumsum(forward)))),
        float(np.max(np.abs(np.cumsum(backward)))),
        1.0,
    )
    lost = math.log10(largest / size) if largest > size else 0.0
    logger.debug("h2: K=%d, tail bound %.3e, excess %.3f", K, tail, excess)
    return EvalResult(total, (rounding + tail) / size, min(lost, CONFIG.max_cancellation_digits))


def eval_series(spec: SeriesSpec, **stopping) -> EvalResult:
    if spec.kind is SeriesKind.UNILATERAL:
        return eval_phi(spec, **stopping)
    if spec.kind is SeriesKind.BILATERAL:
        return eval_psi(spec, **stopping)
    return eval_h2(*spec.num, *spec.den)


def reverse_psi(spec: SeriesSpec) -> SeriesSpec:
    """The k -> -k image: rpsi_r(a; b; z) = rpsi_r(q/b; q/a; b1...br/(a1...ar z))."""
    if spec.kind is not SeriesKind.BILATERAL or spec.power != 0:
        raise ValueError("reversal applies to bilateral series with r = s")
    q = spec.q.q
    argument = math.prod(spec.den, start=1 + 0j) / (math.prod(spec.num, start=1 + 0j) * spec.z)
    return SeriesSpec.bilateral([q / b for b in spec.den], [q / a for a in spec.num], spec.q, argument)


def iter_terms(spec: SeriesSpec, direction: int = 1) -> Iterator[complex]:
    """Yield t_0, t_1, ... (direction=1) or t_-1, t_-2, ... (direction=-1) by recurrence."""
    if spec.kind is SeriesKind.CLASSICAL_BILATERAL:
        raise ValueError("iter_terms covers q-series only")
    q = spec.q.q
    if direction > 0:
        ratio = _forward_ratio(spec.num, spec.den, q, spec.z, spec.power, spec.kind is SeriesKind.UNILATERAL)
        term = 1 + 0j
        yield term
    else:
        if spec.kind is not SeriesKind.BILATERAL:
            raise ValueError("only bilateral series have negative-index terms")
        ratio = _backward_ratio(spec.num, spec.den, q, spec.z)
        term = 1 + 0j
    k = 0
    while True:
        factor = ratio(k)
        if factor == 0:
            return
        term *= factor
        k += 1
        yield term


def term(spec: SeriesSpec, k: int) -> EvalResult:
    """The k-th term computed from scratch with q-shifted factorials."""
    if spec.kind is SeriesKind.CLASSICAL_BILATERAL:
        raise ValueError("term covers q-series only")
    if k < 0 and spec.kind is not SeriesKind.BILATERAL:
        raise ValueError("only bilateral series have negative-index terms")
    q = spec.q.q
    den = list(spec.den) + ([q] if spec.kind is SeriesKind.UNILATERAL else [])
    ratio = qpoch_list(spec.num, spec.q, k) / qpoch_list(den, spec.q, k)
    sign = (-1) ** (k * spec.power)
    return ratio * (sign * q ** (spec.power * k * (k - 1) // 2) * spec.z**k)


def eval_lattice_series(
    num: Sequence[Number],
    den: Sequence[Number],
    q: QLike,
    w: Number,
    c: Optional[Number] = None,
    lam: Optional[Number] = None,
    start: int = 0,
    **stopping,
) -> EvalResult:
    """Sum_{k>=start} (num;q)_k/(den;q)_k prod_{i=1..k}(c - lam q^i) w^k.

    Without `lam` the product factor is dropped. This is the form the
    split-series rewrites take once c sits on the lattice q^(1+m).
    """
    base = as_base(q)
    qv = base.q
    num = [as_scalar(x) for x in num]
    den = [as_scalar(y) for y in den]
    w = as_scalar(w)
    shifted = lam is not None
    cv = as_scalar(c) if shifted else 0j
    lv = as_scalar(lam) if shifted else 0j

    stops = _forward_stop(num, base) is not None
    if shifted and lv != 0:
        n = lattice_exponent(cv / lv, base)
        stops = stops or (n is not None and n >= 1)
    limit = abs(w) * (abs(cv) if shifted else 1.0)
    if not stops and limit >= 1 - CONFIG.lattice_tol:
        raise DivergesError(
            f"split series ratio tends to {limit:.6g} >= 1",
            ConvergenceClass(_verdict([limit]), limit),
        )

    def ratio(k: int) -> complex:
        qk = qv**k
        top = 1 + 0j
        for x in num:
            factor = 1 - x * qk
            if abs(factor) < CONFIG.lattice_tol:
                return 0j
            top *= factor
        if shifted:
            shift = lv * qk * qv
            factor = cv - shift
            if abs(factor) < CONFIG.lattice_tol * max(abs(shift), abs(cv)):
                return 0j
            top *= factor
        bottom = 1 + 0j
        for y in den:
            factor = 1 - y * qk
            if abs(factor) < CONFIG.lattice_tol:
                raise PoleError(f"denominator parameter {y!r} equals q^-{k}")
            bottom *= factor
        return top / bottom * w

    r = base.modulus
    tops = [abs(x) for x in num]
    bottoms = [abs(y) for y in den]

    def bound(k: int) -> float:
        rk = r**k
        bottom = math.prod(1 - y * rk for y in bottoms)
        if bottom <= 0:
            return math.inf
        top = math.prod((1 + x * rk for x in tops), start=abs(w))
        if shifted:
            top *= abs(cv) + abs(lv) * rk * r
        return top / bottom

    first = 1 + 0j
    for j in range(start):
        first *= ratio(j)
    if first == 0:
        return EvalResult.exact(0)
    part = _accumulate(
        first,
        lambda j: ratio(j + start),
        lambda j: bound(j + start),
        flops=3 * (len(num) + len(den)) + 8,
        **stopping,
    )
    return _combine([part])

