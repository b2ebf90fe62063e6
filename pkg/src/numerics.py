"""Complex scalars with error tracking, the complex gamma function and (x)_n."""
from __future__ import annotations

import cmath
import math
import re
import sys
from dataclasses import dataclass
from typing import Union

from src.config import CONFIG
from src.errors import NumericalOverflowError, PoleError, UsageError
from src.utils.logging import setup_logging


logger = setup_logging(name="numerics")

Scalar = complex
Number = Union[int, float, complex]

EPS = sys.float_info.epsilon

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LANCZOS_FLOOR = 1e-15
_SQRT_2PI = math.sqrt(2.0 * math.pi)

_UNSIGNED = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_SCALAR_RE = re.compile(rf"^([+-]?{_UNSIGNED})(?:([+-]{_UNSIGNED})i)?$")


def as_scalar(value: Number) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NumericalOverflowError(f"non-finite value {z!r}")
    return z


def format_scalar(value: Number) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    z = complex(value)
    text = f"{z.real:.17g}"
    if z.imag == 0:
        return text
    return f"{text}{z.imag:+.17g}i"


def parse_scalar(text: str) -> complex:
    """Parse `<real>` or `<real>[+|-]<real>i` (no spaces)."""
    match = _SCALAR_RE.match(text.strip())
    if match is None:
        raise UsageError(f"not a scalar literal: {text!r}")
    real, imag = match.groups()
    z = complex(float(real), float(imag) if imag else 0.0)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise UsageError(f"scalar literal out of range: {text!r}")
    return z


@dataclass(frozen=True)
class EvalResult:
    """A computed value with its accumulated relative error and lost digits.

    Arithmetic between results propagates both diagnostics: products and
    quotients add relative errors, sums take the worst input error and the
    error of the (possibly cancelling) sum, and cancellation digits record
    log10 of the largest operand magnitude over the result magnitude.
    """

    value: complex
    rel_err_estimate: float = 0.0
    cancellation_digits: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", as_scalar(self.value))
        if not self.rel_err_estimate >= 0.0:
            raise ValueError(f"rel_err_estimate must be >= 0, got {self.rel_err_estimate}")
        if not self.cancellation_digits >= 0.0:
            raise ValueError(f"cancellation_digits must be >= 0, got {self.cancellation_digits}")

    @classmethod
    def exact(cls, value: Number) -> "EvalResult":
        return cls(as_scalar(value))

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    def __mul__(self, other: Union["EvalResult", Number]) -> "EvalResult":
        other = _lift(other)
        return EvalResult(
            self.value * other.value,
            self.rel_err_estimate + other.rel_err_estimate + EPS,
            max(self.cancellation_digits, other.cancellation_digits),
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Union["EvalResult", Number]) -> "EvalResult":
        other = _lift(other)
        if other.value == 0:
            raise PoleError("division by a vanishing factor")
        return EvalResult(
            self.value / other.value,
            self.rel_err_estimate + other.rel_err_estimate + EPS,
            max(self.cancellation_digits, other.cancellation_digits),
        )

    def __rtruediv__(self, other: Number) -> "EvalResult":
        return _lift(other) / self

    def __add__(self, other: Union["EvalResult", Number]) -> "EvalResult":
        other = _lift(other)
        value = self.value + other.value
        scale = max(self.magnitude, other.magnitude)
        size = abs(value)
        spread = (
            self.magnitude * self.rel_err_estimate
            + other.magnitude * other.rel_err_estimate
            + EPS * scale
        )
        if size > 0:
            rel = spread / size
            lost = math.log10(scale / size) if scale > size else 0.0
        else:
            rel = 1.0 if spread > 0 else 0.0
            lost = CONFIG.max_cancellation_digits if scale > 0 else 0.0
        return EvalResult(
            value,
            max(self.rel_err_estimate, other.rel_err_estimate, rel),
            min(
                CONFIG.max_cancellation_digits,
                max(self.cancellation_digits, other.cancellation_digits, lost),
            ),
        )

    __radd__ = __add__

    def __neg__(self) -> "EvalResult":
        return EvalResult(-self.value, self.rel_err_estimate, self.cancellation_digits)

    def __sub__(self, other: Union["EvalResult", Number]) -> "EvalResult":
        return self + (-_lift(other))

    def __rsub__(self, other: Number) -> "EvalResult":
        return _lift(other) + (-self)


def _lift(value: Union[EvalResult, Number]) -> EvalResult:
    if isinstance(value, EvalResult):
        return value
    return EvalResult.exact(value)


def sinpi(z: Number) -> complex:
    """sin(pi z) with the argument reduced by the nearest integer first."""
    z = complex(z)
    n = round(z.real)
    s = cmath.sin(math.pi * (z - n))
    return -s if n % 2 else s


def _near_nonpositive_integer(z: complex, tol: float) -> bool:
    n = round(z.real)
    return n <= 0 and abs(z - n) < tol


def _lanczos(z: complex) -> complex:
    # valid for Re(z) >= 0.5
    z -= 1
    series = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += coeff / (z + i)
    t = z + _LANCZOS_G + 0.5
    try:
        return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * series
    except OverflowError as exc:
        raise NumericalOverflowError(f"gamma overflows at {z + 1!r}") from exc


def _lanczos_error(z: complex) -> float:
    t = z - 1 + _LANCZOS_G + 0.5
    return _LANCZOS_FLOOR + EPS * (abs(z) + 1.0) * (abs(cmath.log(t)) + 1.0)


def gamma(z: Number) -> EvalResult:
    z = as_scalar(z)
    if _near_nonpositive_integer(z, CONFIG.lattice_tol):
        raise PoleError(f"gamma has a pole at {z!r}")
    if abs(z) > CONFIG.gamma_certified_radius:
        logger.debug("gamma(%s) is outside the certified radius %s", z, CONFIG.gamma_certified_radius)
    if z.real < 0.5:
        w = 1 - z
        s = sinpi(z)
        value = math.pi / (s * _lanczos(w))
        reduced = z - round(z.real)
        rel = _lanczos_error(w) + EPS * (1.0 + math.pi * abs(reduced) / abs(s))
    else:
        value = _lanczos(z)
        rel = _lanczos_error(z)
    return EvalResult(value, rel)


def _pochhammer_product(x: complex, n: int) -> EvalResult:
    if n >= 0:
        return EvalResult(math.prod((x + i for i in range(n)), start=1 + 0j), n * EPS)
    m = -n
    denominator = 1 + 0j
    for j in range(1, m + 1):
        factor = x - j
        if abs(factor) < CONFIG.lattice_tol:
            raise PoleError(f"(x)_{n} has a vanishing factor x-{j} at x={x!r}")
        denominator *= factor
    return EvalResult(1 / denominator, (m + 1) * EPS)


def pochhammer(x: Number, n: int, method: str = "auto") -> EvalResult:
    """Shifted factorial (x)_n = Gamma(x+n)/Gamma(x) for any integer n.

    `method` is "product", "gamma" or "auto" (product up to the configured
    length, gamma ratio beyond it with a product fallback at gamma poles).
    """
    x = as_scalar(x)
    n = int(n)
    if n == 0:
        return EvalResult.exact(1)
    if method == "product":
        return _pochhammer_product(x, n)
    if method == "gamma":
        return gamma(x + n) / gamma(x)
    if method != "auto":
        raise ValueError(f"unknown pochhammer method {method!r}")
    if abs(n) <= CONFIG.pochhammer_product_limit:
        return _pochhammer_product(x, n)
    try:
        return gamma(x + n) / gamma(x)
    except (PoleError, NumericalOverflowError):
        return _pochhammer_product(x, n)
