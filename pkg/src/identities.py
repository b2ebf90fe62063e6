"""Catalog of q-series identities with admissibility predicates and independent sides.

Each descriptor names its parameter slots, the convergence region of both
sides (as labelled moduli that must stay below 1), the pole and degeneracy
exclusions, and two evaluators built only from the series and qcore
primitives. `check` compares the sides; `lattice_check` evaluates the
split-series forms of the three bilateral expansions at c = q^(1+m).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from src.config import CONFIG
from src.errors import InadmissibleError
from src.numerics import EvalResult, gamma
from src.qcore import INF, off_lattice, qpoch_list
from src.series import SeriesSpec, eval_h2, eval_lattice_series, eval_phi, eval_psi
from src.utils.logging import setup_logging


logger = setup_logging(name="identities")

Params = Mapping[str, Any]
Evaluator = Callable[[Params], EvalResult]
Guards = Callable[[Params], List[Tuple[str, bool]]]
Moduli = Callable[[Params], Dict[str, float]]

LATTICE_IDENTITIES = ("thm1_bailey", "thm2_expansion", "thm3_chen_gu")


class Slot(str, Enum):
    """How the sampler draws a parameter."""

    BASE = "base"
    PARAMETER = "parameter"
    ARGUMENT = "argument"
    CLASSICAL_NUMERATOR = "classical_numerator"
    CLASSICAL_DENOMINATOR = "classical_denominator"
    SHIFT = "shift"


class Side(str, Enum):
    LHS = "lhs"
    RHS = "rhs"


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class IdentityDescriptor:
    name: str
    params: Tuple[str, ...]
    region: str
    reference: str
    lhs: Evaluator
    rhs: Evaluator
    moduli: Moduli
    guards: Guards
    draws: Mapping[str, Slot]
    min_tol: float = 0.0

    def region_moduli(self, params: Params) -> Dict[str, float]:
        return self.moduli(params)

    def admissible(self, params: Params) -> Admissibility:
        for name in self.params:
            if name not in params:
                return Admissibility(False, f"missing:{name}")
        for name in params:
            if name not in self.params:
                return Admissibility(False, f"unexpected:{name}")
        ceiling = 1 - CONFIG.lattice_tol
        if "q" in self.params and not abs(complex(params["q"])) < ceiling:
            return Admissibility(False, "q")
        try:
            for label, modulus in self.moduli(params).items():
                if not modulus < ceiling:
                    return Admissibility(False, label)
            for label, ok in self.guards(params):
                if not ok:
                    return Admissibility(False, label)
        except ZeroDivisionError:
            return Admissibility(False, "zero-parameter")
        return Admissibility(True)


@dataclass(frozen=True)
class CheckResult:
    params: Dict[str, Any]
    lhs: EvalResult
    rhs: EvalResult
    rel_err: float
    effective_tol: float
    passed: bool
    extras: Dict[str, Any] = field(default_factory=dict)


def _unpack(p: Params, names: str) -> Tuple[complex, ...]:
    return tuple(complex(p[n]) for n in names)


def _prod(p: Params, *xs: complex) -> EvalResult:
    return qpoch_list(xs, p["q"], INF)


def _ratio(p: Params, num: Iterable[complex], den: Iterable[complex]) -> EvalResult:
    return _prod(p, *num) / _prod(p, *den)


def _phi(p: Params, num: Iterable[complex], den: Iterable[complex], z: complex) -> EvalResult:
    return eval_phi(SeriesSpec.unilateral(list(num), list(den), p["q"], z))


def _psi(p: Params, num: Iterable[complex], den: Iterable[complex], z: complex) -> EvalResult:
    return eval_psi(SeriesSpec.bilateral(list(num), list(den), p["q"], z))


def _off(x: complex, q: complex, lo: Optional[int] = None, hi: Optional[int] = None) -> bool:
    return off_lattice(x, q, lo, hi)


def _not_near_integer(x: complex, lo: Optional[int] = None, hi: Optional[int] = None) -> bool:
    n = round(x.real)
    if (lo is not None and n < lo) or (hi is not None and n > hi):
        return True
    return abs(x - n) >= CONFIG.lattice_margin


def _apart(x: complex, y: complex) -> bool:
    return abs(1 - x / y) > CONFIG.idem_margin


def _slots(params: Iterable[str]) -> Dict[str, Slot]:
    kinds = {"q": Slot.BASE, "z": Slot.ARGUMENT, "m": Slot.SHIFT}
    return {name: kinds.get(name, Slot.PARAMETER) for name in params}


def _swap(p: Params, x: str, y: str) -> Dict[str, Any]:
    swapped = dict(p)
    swapped[x], swapped[y] = p[y], p[x]
    return swapped


def idem_symmetrize(expr: Evaluator, x: str, y: str) -> Evaluator:
    """params -> expr(params) + expr(params with x and y interchanged)."""

    def symmetrized(p: Params) -> EvalResult:
        return expr(p) + expr(_swap(p, x, y))

    return symmetrized


def _ramanujan_lhs(p: Params) -> EvalResult:
    a, c, z = _unpack(p, "acz")
    return _psi(p, [a], [c], z)


def _ramanujan_rhs(p: Params) -> EvalResult:
    a, c, z, q = _unpack(p, "aczq")
    return _ratio(p, [q, c / a, a * z, q / (a * z)], [c, q / a, z, c / (a * z)])


def _ramanujan_moduli(p: Params) -> Dict[str, float]:
    a, c, z = _unpack(p, "acz")
    return {"z": abs(z), "c/az": abs(c / (a * z))}


def _ramanujan_guards(p: Params) -> List[Tuple[str, bool]]:
    a, c, q = _unpack(p, "acq")
    return [("pole:c", _off(c, q, hi=0)), ("pole:a", _off(a, q, lo=1))]


def _binomial_lhs(p: Params) -> EvalResult:
    a, z = _unpack(p, "az")
    return _phi(p, [a], [], z)


def _binomial_rhs(p: Params) -> EvalResult:
    a, z = _unpack(p, "az")
    return _prod(p, a * z) / _prod(p, z)


def _gauss_lhs(p: Params) -> EvalResult:
    a, b, c = _unpack(p, "abc")
    return _phi(p, [a, b], [c], c / (a * b))


def _gauss_rhs(p: Params) -> EvalResult:
    a, b, c = _unpack(p, "abc")
    return _ratio(p, [c / a, c / b], [c, c / (a * b)])


def _two_phi_one(p: Params) -> EvalResult:
    a, b, c, z = _unpack(p, "abcz")
    return _phi(p, [a, b], [c], z)


def _heine1_rhs(p: Params) -> EvalResult:
    a, b, c, z = _unpack(p, "abcz")
    return _ratio(p, [b, a * z], [c, z]) * _phi(p, [c / b, z], [a * z], b)


def _heine2_rhs(p: Params) -> EvalResult:
    a, b, c, z, q = _unpack(p, "abczq")
    return _ratio(p, [c / b, b * z], [c, z]) * _phi(p, [a * b * z / c, b], [b * z], c / b)


def _watson_term(p: Params) -> EvalResult:
    a, b, c, z, q = _unpack(p, "abczq")
    prefactor = _ratio(p, [b, c / a, a * z, q / (a * z)], [c, b / a, z, q / z])
    return prefactor * _phi(p, [a, q * a / c], [q * a / b], q * c / (a * b * z))


def _three_term_rhs(p: Params) -> EvalResult:
    a, b, c, z, q = _unpack(p, "abczq")
    first = _ratio(p, [a * b * z / c, q / c], [a * z / c, q / a]) * _phi(
        p, [c / a, q * c / (a * b * z)], [q * c / (a * z)], q * b / c
    )
    second = _ratio(
        p, [b, q / c, c / a, a * z / q, q * q / (a * z)], [c / q, q * b / c, q / a, a * z / c, q * c / (a * z)]
    ) * _phi(p, [q * a / c, q * b / c], [q * q / c], z)
    return first - second


def _two_psi_two(p: Params) -> EvalResult:
    a, b, c, d, z = _unpack(p, "abcdz")
    return _psi(p, [a, b], [c, d], z)


def _bilateral_moduli(p: Params) -> Dict[str, float]:
    a, b, c, d, z = _unpack(p, "abcdz")
    return {"z": abs(z), "cd/abz": abs(c * d / (a * b * z))}


def _thm1_prefactor(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return _ratio(p, [a * z, c / b, d / a, q * d / (a * b * z)], [z, d, q / b, c * d / (a * b * z)])


def _thm1_rhs(p: Params) -> EvalResult:
    a, b, c, d, z = _unpack(p, "abcdz")
    return _thm1_prefactor(p) * _psi(p, [a, a * b * z / d], [c, a * z], d / a)


def _thm1_moduli(p: Params) -> Dict[str, float]:
    a, b, c, d, z = _unpack(p, "abcdz")
    return {"z": abs(z), "cd/abz": abs(c * d / (a * b * z)), "d/a": abs(d / a), "c/b": abs(c / b)}


def _thm1_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return [
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q, hi=0)),
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:az", _off(a * z, q, hi=0)),
        ("pole:abz/d", _off(a * b * z / d, q, lo=1)),
    ]


def _thm2_term(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    prefactor = _ratio(p, [q, b, c / a, d / a, a * z, q / (a * z)], [c, d, q / a, b / a, z, q / z])
    return prefactor * _phi(p, [q * a / c, q * a / d], [q * a / b], c * d / (a * b * z))


_thm2_rhs = idem_symmetrize(_thm2_term, "a", "b")


def _thm2_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return [
        ("idem-degeneracy", _apart(a, b)),
        ("pole:b/a", _off(b / a, q)),
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q, hi=0)),
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:z", _off(z, q, lo=1)),
    ]


def _thm3_first(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    x = c * d / (a * b * z)
    prefactor = _ratio(p, [q, c / b, q / d, a * b * z / d, q * d / (a * b * z)], [q / a, q / b, c, a * z / d, x])
    return prefactor * _phi(p, [x, d / a], [q * d / (a * z)], q * b / d)


def _thm3_second_prefactor(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return _ratio(
        p,
        [q, b, q / d, q * c / d, d / a, a * z / q, q * q / (a * z)],
        [q / a, c, d / q, q * q / d, q * b / d, a * z / d, q * d / (a * z)],
    )


def _thm3_rhs(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    second = _thm3_second_prefactor(p) * _phi(p, [q * a / d, q * b / d], [q * c / d], z)
    return _thm3_first(p) - second


def _thm3_moduli(p: Params) -> Dict[str, float]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return {"z": abs(z), "cd/abz": abs(c * d / (a * b * z)), "qb/d": abs(q * b / d)}


def _thm3_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return [
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q)),
        ("pole:az/d", _off(a * z / d, q)),
        ("pole:c/d", _off(c / d, q, hi=-1)),
    ]


def _iterated_rhs(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    x = a * b * z
    prefactor = _ratio(p, [a * z, b * z, q * c / x, q * d / x], [q / a, q / b, c, d])
    return prefactor * _psi(p, [x / c, x / d], [a * z, b * z], c * d / x)


def _iterated_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return [
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q, hi=0)),
        ("pole:az", _off(a * z, q, hi=0)),
        ("pole:bz", _off(b * z, q, hi=0)),
        ("pole:abz/c", _off(a * b * z / c, q, lo=1)),
        ("pole:abz/d", _off(a * b * z / d, q, lo=1)),
    ]


def _reversed_term(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    x = a * b * z
    prefactor = _ratio(p, [q, q / d, c / a, c / b, x / d, q * d / x], [q / a, q / b, c, c / d, c * d / x, q * x / (c * d)])
    return prefactor * _phi(p, [q * a / c, q * b / c], [q * d / c], z)


_reversed_rhs = idem_symmetrize(_reversed_term, "c", "d")


def _reversed_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return [
        ("idem-degeneracy", _apart(c, d)),
        ("pole:c/d", _off(c / d, q)),
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q, hi=0)),
        ("pole:abz/cd", _off(a * b * z / (c * d), q, hi=-1)),
    ]


def _chu_lhs(p: Params) -> EvalResult:
    a, b, c, d, q = _unpack(p, "abcdq")
    return _psi(p, [a, b], [c, d], c * d / (q * a * b))


def _chu_rhs(p: Params) -> EvalResult:
    a, b, c, d, q = _unpack(p, "abcdq")
    x = c * d / (q * a * b)
    closed = _ratio(p, [q, a, c / b, d / b, c * d / (q * a), q * q * a / (c * d)], [c, d, q / b, q * a / c, q * a / d, x])
    series = _ratio(p, [q, q * a / b, q / c, q / d], [q * a / c, q * a / d, q / a, q / b]) * a
    return closed + series * _phi(p, [q * a / c, q * a / d], [q * a / b], q)


def _chu_moduli(p: Params) -> Dict[str, float]:
    a, b, c, d, q = _unpack(p, "abcdq")
    return {"cd/qab": abs(c * d / (q * a * b))}


def _chu_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d, q = _unpack(p, "abcdq")
    return [
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:c", _off(c, q, hi=0)),
        ("pole:d", _off(d, q, hi=0)),
        ("pole:c/a", _off(c / a, q, lo=1)),
        ("pole:d/a", _off(d / a, q, lo=1)),
        ("pole:b/a", _off(b / a, q, lo=1)),
    ]


def _dougall_lhs(p: Params) -> EvalResult:
    a, b, c, d = _unpack(p, "abcd")
    return eval_h2(a, b, c, d)


def _dougall_rhs(p: Params) -> EvalResult:
    a, b, c, d = _unpack(p, "abcd")
    top = gamma(1 - a) * gamma(1 - b) * gamma(c) * gamma(d) * gamma(c + d - a - b - 1)
    return top / (gamma(c - a) * gamma(c - b) * gamma(d - a) * gamma(d - b))


def _dougall_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, c, d = _unpack(p, "abcd")
    return [
        ("excess", (c + d - a - b).real >= CONFIG.h2_min_excess),
        ("pole:a", _not_near_integer(a, lo=1)),
        ("pole:b", _not_near_integer(b, lo=1)),
        ("pole:c", _not_near_integer(c, hi=0)),
        ("pole:d", _not_near_integer(d, hi=0)),
        ("zero:c-a", _not_near_integer(c - a, hi=0)),
        ("zero:c-b", _not_near_integer(c - b, hi=0)),
        ("zero:d-a", _not_near_integer(d - a, hi=0)),
        ("zero:d-b", _not_near_integer(d - b, hi=0)),
    ]


def _lattice_c(p: Params) -> complex:
    q = complex(p["q"])
    return q ** (1 + int(p["m"]))


def _shift_lhs(p: Params) -> EvalResult:
    a, b, d, z = _unpack(p, "abdz")
    return _psi(p, [a, b], [_lattice_c(p), d], z)


def _shift_rhs(p: Params) -> EvalResult:
    a, b, d, z, q = _unpack(p, "abdzq")
    m = int(p["m"])
    shift = q**-m
    prefactor = qpoch_list([a, b], q, -m) / qpoch_list([_lattice_c(p), d], q, -m) * z**-m
    return prefactor * _phi(p, [a * shift, b * shift], [d * shift], z)


def _shift_moduli(p: Params) -> Dict[str, float]:
    return {"z": abs(complex(p["z"]))}


def _shift_guards(p: Params) -> List[Tuple[str, bool]]:
    a, b, d, q = _unpack(p, "abdq")
    m = p["m"]
    valid_m = isinstance(m, int) and not isinstance(m, bool) and CONFIG.m_min <= m <= CONFIG.m_max
    if not valid_m:
        return [("m", False)]
    return [
        ("pole:a", _off(a, q, lo=1)),
        ("pole:b", _off(b, q, lo=1)),
        ("pole:d", _off(d, q, hi=m)),
    ]


def _f_form(p: Params) -> EvalResult:
    """The 2psi2 left side split at k = 0, negative half reversed and written with prod(c - q^i)."""
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    positive = eval_lattice_series([a, b], [c, d], q, z)
    negative = eval_lattice_series([q / d], [q / a, q / b], q, d / (a * b * z), c=c, lam=1, start=1)
    return positive + negative


def _g_thm1(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    positive = eval_lattice_series([a, a * b * z / d], [c, a * z], q, d / a)
    negative = eval_lattice_series([q / (a * z)], [q / a, q * d / (a * b * z)], q, 1 / b, c=c, lam=1, start=1)
    return _thm1_prefactor(p) * (positive + negative)


def _g_thm2_term(p: Params) -> EvalResult:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    prefactor = _ratio(p, [q, b, d / a, a * z, q / (a * z), c / a], [c, d, b / a, z, q / z, q / a])
    series = eval_lattice_series([q * a / d], [q, q * a / b], q, d / (a * b * z), c=c, lam=a)
    return prefactor * series


_g_thm2 = idem_symmetrize(_g_thm2_term, "a", "b")

_G_FORMS: Dict[str, Evaluator] = {
    "thm1_bailey": _g_thm1,
    "thm2_expansion": _g_thm2,
    "thm3_chen_gu": _thm3_rhs,
}


def _descriptor(
    name: str,
    params: str,
    region: str,
    reference: str,
    lhs: Evaluator,
    rhs: Evaluator,
    moduli: Moduli,
    guards: Guards = lambda p: [],
    draws: Optional[Mapping[str, Slot]] = None,
    min_tol: float = 0.0,
) -> IdentityDescriptor:
    slots = tuple(params)
    return IdentityDescriptor(
        name=name,
        params=slots,
        region=region,
        reference=reference,
        lhs=lhs,
        rhs=rhs,
        moduli=moduli,
        guards=guards,
        draws=dict(draws) if draws is not None else _slots(slots),
        min_tol=min_tol,
    )


@lru_cache(maxsize=1)
def catalog() -> Tuple[IdentityDescriptor, ...]:
    return (
        _descriptor(
            "ramanujan_1psi1",
            "aczq",
            "|c/a| < |z| < 1",
            "Ramanujan's 1psi1 summation, Gasper-Rahman (II.29)",
            _ramanujan_lhs,
            _ramanujan_rhs,
            _ramanujan_moduli,
            _ramanujan_guards,
        ),
        _descriptor(
            "q_binomial",
            "azq",
            "|z| < 1",
            "q-binomial theorem, Gasper-Rahman (II.3)",
            _binomial_lhs,
            _binomial_rhs,
            lambda p: {"z": abs(complex(p["z"]))},
        ),
        _descriptor(
            "q_gauss",
            "abcq",
            "|c/ab| < 1",
            "q-Gauss summation, Gasper-Rahman (II.8)",
            _gauss_lhs,
            _gauss_rhs,
            lambda p: {"c/ab": abs(complex(p["c"]) / (complex(p["a"]) * complex(p["b"])))},
            lambda p: [("pole:c", _off(complex(p["c"]), complex(p["q"]), hi=0))],
        ),
        _descriptor(
            "heine_iii1",
            "abczq",
            "max{|z|, |b|} < 1",
            "Heine's transformation, Gasper-Rahman (III.1)",
            _two_phi_one,
            _heine1_rhs,
            lambda p: {"z": abs(complex(p["z"])), "b": abs(complex(p["b"]))},
            lambda p: [
                ("pole:c", _off(complex(p["c"]), complex(p["q"]), hi=0)),
                ("pole:az", _off(complex(p["a"]) * complex(p["z"]), complex(p["q"]), hi=0)),
            ],
        ),
        _descriptor(
            "heine_iii2",
            "abczq",
            "max{|z|, |c/b|} < 1",
            "Heine's transformation, Gasper-Rahman (III.2)",
            _two_phi_one,
            _heine2_rhs,
            lambda p: {"z": abs(complex(p["z"])), "c/b": abs(complex(p["c"]) / complex(p["b"]))},
            lambda p: [
                ("pole:c", _off(complex(p["c"]), complex(p["q"]), hi=0)),
                ("pole:bz", _off(complex(p["b"]) * complex(p["z"]), complex(p["q"]), hi=0)),
            ],
        ),
        _descriptor(
            "watson_iii32",
            "abczq",
            "max{|z|, |qc/abz|} < 1",
            "Watson's three-term transformation, Gasper-Rahman (III.32)",
            _two_phi_one,
            idem_symmetrize(_watson_term, "a", "b"),
            lambda p: {
                "z": abs(complex(p["z"])),
                "qc/abz": abs(complex(p["q"]) * complex(p["c"]) / (complex(p["a"]) * complex(p["b"]) * complex(p["z"]))),
            },
            lambda p: [
                ("idem-degeneracy", _apart(complex(p["a"]), complex(p["b"]))),
                ("pole:b/a", _off(complex(p["b"]) / complex(p["a"]), complex(p["q"]))),
                ("pole:c", _off(complex(p["c"]), complex(p["q"]), hi=0)),
                ("pole:z", _off(complex(p["z"]), complex(p["q"]), lo=1)),
            ],
        ),
        _descriptor(
            "three_term_iii31",
            "abczq",
            "max{|z|, |qb/c|} < 1",
            "three-term transformation, Gasper-Rahman (III.31)",
            _two_phi_one,
            _three_term_rhs,
            lambda p: {
                "z": abs(complex(p["z"])),
                "qb/c": abs(complex(p["q"]) * complex(p["b"]) / complex(p["c"])),
            },
            lambda p: [
                ("pole:c", _off(complex(p["c"]), complex(p["q"]))),
                ("pole:a", _off(complex(p["a"]), complex(p["q"]), lo=1)),
                ("pole:az/c", _off(complex(p["a"]) * complex(p["z"]) / complex(p["c"]), complex(p["q"]))),
            ],
        ),
        _descriptor(
            "thm1_bailey",
            "abcdzq",
            "max{|z|, |cd/abz|, |d/a|, |c/b|} < 1",
            "Bailey (1950), 2psi2 transformation",
            _two_psi_two,
            _thm1_rhs,
            _thm1_moduli,
            _thm1_guards,
        ),
        _descriptor(
            "thm2_expansion",
            "abcdzq",
            "max{|z|, |cd/abz|} < 1",
            "Gasper-Rahman (5.4.4), r = 2: 2psi2 as two 2phi1 series, idem(a;b)",
            _two_psi_two,
            _thm2_rhs,
            _bilateral_moduli,
            _thm2_guards,
        ),
        _descriptor(
            "thm3_chen_gu",
            "abcdzq",
            "max{|z|, |cd/abz|, |qb/d|} < 1",
            "Chen-Gu, Cauchy's method: 2psi2 as a difference of two 2phi1 series",
            _two_psi_two,
            _thm3_rhs,
            _thm3_moduli,
            _thm3_guards,
        ),
        _descriptor(
            "bailey_iterated",
            "abcdzq",
            "max{|z|, |cd/abz|} < 1",
            "Bailey (1950), 2psi2 transformation iterated",
            _two_psi_two,
            _iterated_rhs,
            _bilateral_moduli,
            _iterated_guards,
        ),
        _descriptor(
            "expansion_r2_545",
            "abcdzq",
            "max{|z|, |cd/abz|} < 1",
            "Gasper-Rahman (5.4.5), r = 2, idem(c;d)",
            _two_psi_two,
            _reversed_rhs,
            _bilateral_moduli,
            _reversed_guards,
        ),
        _descriptor(
            "chu_formula",
            "abcdq",
            "|cd/qab| < 1",
            "Chu, 2psi2 formula at z = cd/qab",
            _chu_lhs,
            _chu_rhs,
            _chu_moduli,
            _chu_guards,
        ),
        _descriptor(
            "dougall_2h2",
            "abcd",
            "Re(c+d-a-b) > 1 (evaluated for Re(c+d-a-b) >= 3)",
            "Dougall (1907), 2H2 summation",
            _dougall_lhs,
            _dougall_rhs,
            lambda p: {},
            _dougall_guards,
            draws={
                "a": Slot.CLASSICAL_NUMERATOR,
                "b": Slot.CLASSICAL_NUMERATOR,
                "c": Slot.CLASSICAL_DENOMINATOR,
                "d": Slot.CLASSICAL_DENOMINATOR,
            },
            min_tol=CONFIG.dougall_tol,
        ),
        _descriptor(
            "finite_shift",
            "abdzqm",
            "|z| < 1, c = q^(1+m), m a positive integer",
            "Bailey (1950) at c = q^(1+m): 2psi2 as a prefactored 2phi1",
            _shift_lhs,
            _shift_rhs,
            _shift_moduli,
            _shift_guards,
        ),
    )


def _thm1_second_params(p: Params) -> Dict[str, Any]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return {"a": a * b * z / d, "b": a, "c": a * z, "d": c, "z": d / a, "q": q}


def _twice_rhs(p: Params) -> EvalResult:
    return _thm1_prefactor(p) * _thm1_rhs(_thm1_second_params(p))


def _twice_guards(p: Params) -> List[Tuple[str, bool]]:
    second = _thm1_second_params(p)
    checks = _thm1_guards(p) + [(f"second:{label}", ok) for label, ok in _thm1_guards(second)]
    checks += [(f"second:{label}", value < 1 - CONFIG.lattice_tol) for label, value in _thm1_moduli(second).items()]
    return checks + _iterated_guards(p)


def _reversal_params(p: Params) -> Dict[str, Any]:
    a, b, c, d, z, q = _unpack(p, "abcdzq")
    return {"a": q / c, "b": q / d, "c": q / a, "d": q / b, "z": c * d / (a * b * z), "q": q}


def _reversal_guards(p: Params) -> List[Tuple[str, bool]]:
    reversed_params = _reversal_params(p)
    return _reversed_guards(p) + [(f"reversed:{label}", ok) for label, ok in _thm2_guards(reversed_params)]


def _chu_params(p: Params) -> Dict[str, Any]:
    a, b, c, d, q = _unpack(p, "abcdq")
    return {"a": b, "b": a, "c": c, "d": d, "z": c * d / (q * a * b), "q": q}


def _chu_chain_rhs(p: Params) -> EvalResult:
    return _thm3_rhs(_chu_params(p))


def _chu_gauss_rhs(p: Params) -> EvalResult:
    a, b, c, d, q = _unpack(p, "abcdq")
    chained = _chu_params(p)
    gauss = _ratio(p, [c / b, c / a], [q * c / d, c * d / (q * a * b)])
    return _thm3_first(chained) - _thm3_second_prefactor(chained) * gauss


def _chu_chain_moduli(p: Params) -> Dict[str, float]:
    a, b, c, d, q = _unpack(p, "abcdq")
    return {"cd/qab": abs(c * d / (q * a * b)), "qa/d": abs(q * a / d)}


def _chu_chain_guards(p: Params) -> List[Tuple[str, bool]]:
    return _chu_guards(p) + [(f"chain:{label}", ok) for label, ok in _thm3_guards(_chu_params(p))]


def _with(p: Params, **values: Any) -> Dict[str, Any]:
    merged = dict(p)
    merged.update(values)
    return merged


def _d_eq_b_rhs(p: Params) -> EvalResult:
    return _thm2_rhs(_with(p, d=p["b"]))


def _d_eq_b_product(p: Params) -> EvalResult:
    return _ramanujan_rhs({"a": p["a"], "c": p["c"], "z": p["z"], "q": p["q"]})


def _d_eq_b_moduli(p: Params) -> Dict[str, float]:
    return _bilateral_moduli(_with(p, d=p["b"]))


def _d_eq_b_guards(p: Params) -> List[Tuple[str, bool]]:
    return _thm2_guards(_with(p, d=p["b"])) + _ramanujan_guards(p)


def _d_eq_a_rhs(p: Params) -> EvalResult:
    return _thm3_rhs(_with(p, d=p["a"]))


def _d_eq_a_product(p: Params) -> EvalResult:
    return _ramanujan_rhs({"a": p["b"], "c": p["c"], "z": p["z"], "q": p["q"]})


def _d_eq_a_moduli(p: Params) -> Dict[str, float]:
    return _thm3_moduli(_with(p, d=p["a"]))


def _d_eq_a_guards(p: Params) -> List[Tuple[str, bool]]:
    return _thm3_guards(_with(p, d=p["a"])) + _ramanujan_guards({"a": p["b"], "c": p["c"], "q": p["q"]})


def _one_phi_zero_form(p: Params) -> EvalResult:
    a, c, z, q = _unpack(p, "aczq")
    prefactor = _ratio(p, [q, c / a, a * z, q / (a * z)], [c, q / a, z, q / z])
    return prefactor * _phi(p, [q * a / c], [], c / (a * z))


def _one_phi_zero_guards(p: Params) -> List[Tuple[str, bool]]:
    z, q = _unpack(p, "zq")
    return _ramanujan_guards(p) + [("pole:z", _off(z, q, lo=1))]


@lru_cache(maxsize=1)
def derivations() -> Tuple[IdentityDescriptor, ...]:
    return (
        _descriptor(
            "bailey_twice",
            "abcdzq",
            "max{|z|, |cd/abz|, |d/a|, |c/b|} < 1",
            "Bailey's 2psi2 transformation applied twice",
            _iterated_rhs,
            _twice_rhs,
            _thm1_moduli,
            _twice_guards,
        ),
        _descriptor(
            "reversal_545",
            "abcdzq",
            "max{|z|, |cd/abz|} < 1",
            "(5.4.5) r = 2 versus the idem(a;b) expansion under k -> -k",
            _reversed_rhs,
            lambda p: _thm2_rhs(_reversal_params(p)),
            _bilateral_moduli,
            _reversal_guards,
        ),
        _descriptor(
            "chu_chain",
            "abcdq",
            "max{|cd/qab|, |qa/d|} < 1",
            "Chu's formula from the difference expansion, a <-> b, z = cd/qab",
            _chu_rhs,
            _chu_chain_rhs,
            _chu_chain_moduli,
            _chu_chain_guards,
        ),
        _descriptor(
            "chu_gauss_step",
            "abcdq",
            "max{|cd/qab|, |qa/d|} < 1",
            "Chu's formula after summing the second 2phi1 by q-Gauss",
            _chu_rhs,
            _chu_gauss_rhs,
            _chu_chain_moduli,
            _chu_chain_guards,
        ),
        _descriptor(
            "thm2_d_eq_b",
            "abczq",
            "|c/a| < |z| < 1",
            "idem(a;b) expansion at d = b against Ramanujan's product",
            _d_eq_b_rhs,
            _d_eq_b_product,
            _d_eq_b_moduli,
            _d_eq_b_guards,
        ),
        _descriptor(
            "thm3_d_eq_a",
            "abczq",
            "max{|z|, |c/bz|, |qb/a|} < 1",
            "difference expansion at d = a against Ramanujan's product (a -> b)",
            _d_eq_a_rhs,
            _d_eq_a_product,
            _d_eq_a_moduli,
            _d_eq_a_guards,
        ),
        _descriptor(
            "ramanujan_via_1phi0",
            "aczq",
            "|c/a| < |z| < 1",
            "1psi1 reduced to a 1phi0 series",
            _one_phi_zero_form,
            _ramanujan_rhs,
            _ramanujan_moduli,
            _one_phi_zero_guards,
        ),
    )


def get_identity(name: str) -> IdentityDescriptor:
    for descriptor in catalog() + derivations():
        if descriptor.name == name:
            return descriptor
    raise KeyError(f"unknown identity {name!r}")


def _compare(params: Params, lhs: EvalResult, rhs: EvalResult, tol: float) -> CheckResult:
    scale = max(lhs.magnitude, rhs.magnitude, 1e-300)
    rel_err = abs(lhs.value - rhs.value) / scale
    digits = max(lhs.cancellation_digits, rhs.cancellation_digits)
    effective_tol = tol * 10**digits
    return CheckResult(dict(params), lhs, rhs, rel_err, effective_tol, rel_err <= effective_tol)


def _tolerance(identity: IdentityDescriptor, base_tol: Optional[float]) -> float:
    return max(CONFIG.base_tol if base_tol is None else base_tol, identity.min_tol)


def shift_params(params: Params, m: int) -> Params:
    """The finite_shift parameter map of a lattice point with shift m."""
    shift = get_identity("finite_shift")
    point = {name: params[name] for name in shift.params if name != "m"}
    point["m"] = m
    return point


def _require(identity: IdentityDescriptor, params: Params) -> None:
    verdict = identity.admissible(params)
    if not verdict:
        raise InadmissibleError(verdict.reason)


def eval_side(identity: IdentityDescriptor, params: Params, side: Side | str) -> EvalResult:
    _require(identity, params)
    side = Side(side)
    return identity.lhs(params) if side is Side.LHS else identity.rhs(params)


def check(identity: IdentityDescriptor, params: Params, base_tol: Optional[float] = None) -> CheckResult:
    _require(identity, params)
    result = _compare(params, identity.lhs(params), identity.rhs(params), _tolerance(identity, base_tol))
    if not result.passed:
        logger.warning("%s failed: rel_err=%.3e tol=%.3e", identity.name, result.rel_err, result.effective_tol)
    return result


def fg_check(identity: IdentityDescriptor, params: Params, base_tol: Optional[float] = None) -> CheckResult:
    """Compare the split-series forms f(c) and g(c) of a bilateral expansion."""
    if identity.name not in _G_FORMS:
        raise InadmissibleError(f"no split-series form for {identity.name}")
    _require(identity, params)
    return _compare(params, _f_form(params), _G_FORMS[identity.name](params), _tolerance(identity, base_tol))


def lattice_check(identity: IdentityDescriptor, params: Params, m: int, base_tol: Optional[float] = None) -> CheckResult:
    """fg_check at c = q^(1+m), cross-checked against the finite-shift 2phi1 form."""
    if not CONFIG.m_min <= m <= CONFIG.m_max:
        raise InadmissibleError("m")
    point = {name: value for name, value in params.items() if name not in ("c", "m")}
    c = complex(point["q"]) ** (1 + m)
    point["c"] = c

    shift = get_identity("finite_shift")
    shifted = shift_params(point, m)
    _require(shift, shifted)

    result = fg_check(identity, point, base_tol)
    cross = _compare(shifted, result.lhs, shift.rhs(shifted), _tolerance(identity, base_tol))
    extras = {"m": m, "c": c, "shift_rel_err": cross.rel_err}
    passed = result.passed and cross.passed
    if not passed:
        logger.warning(
            "%s lattice m=%d failed: f/g rel_err=%.3e, shift rel_err=%.3e", identity.name, m, result.rel_err, cross.rel_err
        )
    return replace(result, passed=passed, extras=extras)
