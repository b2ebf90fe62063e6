import cmath
import itertools

import pytest

from src.errors import CapError, DivergesError, PoleError, SlowConvergenceError
from src.numerics import gamma
from src.qcore import INF, qpoch_inf, qpoch_list
from src.series import (
    SeriesKind,
    SeriesSpec,
    Verdict,
    converges,
    eval_h2,
    eval_lattice_series,
    eval_phi,
    eval_psi,
    eval_series,
    iter_terms,
    reverse_psi,
    split_psi,
    term,
)


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(x), abs(y))


def _ramanujan(a, c, q, z):
    top = qpoch_list([q, c / a, a * z, q / (a * z)], q, INF)
    bottom = qpoch_list([c, q / a, z, c / (a * z)], q, INF)
    return (top / bottom).value


def _dougall(a, b, c, d):
    top = gamma(1 - a) * gamma(1 - b) * gamma(c) * gamma(d) * gamma(c + d - a - b - 1)
    return (top / (gamma(c - a) * gamma(c - b) * gamma(d - a) * gamma(d - b))).value


def test_phi_at_zero_argument_is_one():
    assert eval_phi(SeriesSpec.unilateral([0.3 + 0.2j], [], 0.5, 0)).value == 1


def test_phi_geometric_example():
    # 1phi0(q; -; q, z) = 1/(1 - z)
    result = eval_phi(SeriesSpec.unilateral([0.5], [], 0.5, 0.5))
    assert _rel(result.value, 2.0) < 1e-12
    assert result.rel_err_estimate < 1e-12


def test_phi_q_binomial():
    for a, q, z in ((0.3 + 0.4j, 0.6, 0.7j), (1.8, -0.4 + 0.3j, 0.85), (0.05j, 0.2, -0.5)):
        value = eval_phi(SeriesSpec.unilateral([a], [], q, z)).value
        expected = (qpoch_inf(a * z, q) / qpoch_inf(z, q)).value
        assert _rel(value, expected) < 1e-10


def test_phi_terminates_on_negative_power_numerator():
    q, b, c, z = 0.5, 0.3 + 0.1j, 0.7, 0.4 - 0.2j
    spec = SeriesSpec.unilateral([q**-2, b], [c], q, z)
    terms = list(iter_terms(spec))
    assert len(terms) == 3
    expected = sum(term(spec, k).value for k in range(3))
    assert _rel(eval_phi(spec).value, expected) < 1e-14


def test_phi_cap_is_reported():
    spec = SeriesSpec.unilateral([0.3], [], 0.9, 0.95)
    with pytest.raises(CapError):
        eval_phi(spec, max_terms=5)


def test_psi_ramanujan_example():
    a, c, q, z = 0.4, 0.02, 0.2, 0.3
    result = eval_psi(SeriesSpec.bilateral([a], [c], q, z))
    assert _rel(result.value, _ramanujan(a, c, q, z)) < 1e-10


def test_psi_outside_region_diverges():
    with pytest.raises(DivergesError):
        eval_psi(SeriesSpec.bilateral([0.4], [0.02], 0.2, 1.5))

    spec = SeriesSpec.bilateral([0.4], [0.2], 0.2, 0.3)
    verdict = converges(spec)
    assert verdict.verdict is Verdict.DIVERGES
    assert verdict.neg_tail_ratio > 1
    with pytest.raises(DivergesError) as info:
        eval_psi(spec)
    assert info.value.diagnostic.verdict is Verdict.DIVERGES


def test_converges_classes():
    spec = SeriesSpec.bilateral([0.5, 0.8], [0.3, 0.16], 0.5, 0.4)
    verdict = converges(spec)
    assert verdict.verdict is Verdict.CONVERGES
    assert verdict.pos_tail_ratio == pytest.approx(0.4)
    assert verdict.neg_tail_ratio == pytest.approx(0.3)

    assert converges(SeriesSpec.unilateral([0.2], [], 0.5, 1.0)).verdict is Verdict.BOUNDARY
    assert converges(SeriesSpec.unilateral([0.2], [], 0.5, 3.0)).verdict is Verdict.DIVERGES
    # a numerator q^-3 terminates the series for any argument
    assert converges(SeriesSpec.unilateral([8.0], [], 0.5, 3.0)).verdict is Verdict.CONVERGES

    classical = converges(SeriesSpec.classical(0.1, 0.2, 2.5, 2.8))
    assert classical.verdict is Verdict.CONVERGES
    assert classical.excess == pytest.approx(5.0)
    assert converges(SeriesSpec.classical(0.5, 0.5, 0.7, 0.8)).verdict is Verdict.DIVERGES


def test_psi_unilateral_embedding():
    a, b, d, q, z = 0.3 + 0.2j, -0.5, 0.7j, 0.5, 0.6 - 0.3j
    bilateral = eval_psi(SeriesSpec.bilateral([a, b], [q, d], q, z)).value
    unilateral = eval_phi(SeriesSpec.unilateral([a, b], [d], q, z)).value
    assert _rel(bilateral, unilateral) < 1e-10


def test_split_parts_sum_to_the_whole():
    spec = SeriesSpec.bilateral([0.4], [0.02], 0.2, 0.3)
    positive, negative = split_psi(spec)
    assert _rel((positive + negative).value, eval_psi(spec).value) < 1e-12
    expected = sum(term(spec, -k).value for k in range(1, 25))
    assert _rel(negative.value, expected) < 1e-12


def test_split_negative_part_vanishes_with_denominator_q():
    q = 0.5
    _, negative = split_psi(SeriesSpec.bilateral([0.3, 0.2j], [q, 0.6], q, 0.4))
    assert negative.value == 0


def test_psi_reversal_symmetry():
    spec = SeriesSpec.bilateral([0.5 + 0.3j, 0.8], [0.3j, 0.16], 0.5 - 0.1j, 0.4 + 0.2j)
    reversed_spec = reverse_psi(spec)
    assert _rel(eval_psi(spec).value, eval_psi(reversed_spec).value) < 1e-10
    assert reverse_psi(reversed_spec).num == pytest.approx(spec.num)


def test_term_recurrence_matches_direct_products():
    z = 0.95 * cmath.exp(0.3j)
    spec = SeriesSpec.bilateral([0.3 + 0.2j, -0.5], [0.7, 0.2j], 0.5, z)
    for k in (10, 100, 1000):
        recurred = next(itertools.islice(iter_terms(spec), k, None))
        assert _rel(recurred, term(spec, k).value) < 1e-12
    backward = next(itertools.islice(iter_terms(spec, direction=-1), 19, None))
    assert _rel(backward, term(spec, -20).value) < 1e-12


def test_tightened_stopping_stays_within_estimate():
    spec = SeriesSpec.bilateral([0.5 + 0.3j, 0.8], [0.3j, 0.16], 0.5 - 0.1j, 0.9 * cmath.exp(1j))
    default = eval_psi(spec)
    tight = eval_psi(spec, rel_stop=1e-16, tail_stop=1e-15)
    assert abs(default.value - tight.value) / abs(tight.value) <= default.rel_err_estimate


def test_h2_matches_dougall():
    a, b, c, d = 0.1, 0.2, 2.5, 2.8
    result = eval_h2(a, b, c, d)
    assert _rel(result.value, _dougall(a, b, c, d)) < 1e-5
    assert _rel(eval_series(SeriesSpec.classical(a, b, c, d)).value, result.value) == 0


def test_h2_complex_parameters():
    a, b, c, d = -0.7 + 0.3j, 0.4 - 0.2j, 3.1 + 0.1j, 2.2 - 0.4j
    assert _rel(eval_h2(a, b, c, d).value, _dougall(a, b, c, d)) < 1e-5


def test_h2_equal_parameters_sum_to_zero():
    # b = d: the gamma product carries 1/Gamma(0)
    result = eval_h2(0.3, 1.7, 3.8, 1.7)
    assert abs(result.value) < 1e-7


def test_h2_refuses_slow_convergence():
    with pytest.raises(SlowConvergenceError):
        eval_h2(0.5, 0.5, 1.5, 1.5)


def test_h2_pole_parameters():
    with pytest.raises(PoleError):
        eval_h2(0.1, 0.2, -2, 6.0)
    with pytest.raises(PoleError):
        eval_h2(2, 0.2, 4.5, 4.0)


def test_classical_spec_validation():
    with pytest.raises(ValueError):
        SeriesSpec(SeriesKind.CLASSICAL_BILATERAL, (0.1,), (2.5, 2.8))
    with pytest.raises(ValueError):
        SeriesSpec.unilateral([0.3], [], 1.2, 0.5)


def test_lattice_series_without_product_is_phi():
    a, b, c, q, z = 0.3 + 0.2j, 1.2, 0.4j, 0.5, 0.6
    value = eval_lattice_series([a, b], [q, c], q, z).value
    assert _rel(value, eval_phi(SeriesSpec.unilateral([a, b], [c], q, z)).value) < 1e-12


def test_lattice_series_terminates_on_the_lattice():
    q, m = 0.5, 2
    c = q ** (1 + m)
    a, w = 0.3 + 0.1j, 2.5
    value = eval_lattice_series([a], [0.7], q, w, c=c, lam=1, start=1).value
    expected = 0j
    for k in range(1, m + 2):
        product = 1 + 0j
        for i in range(1, k + 1):
            product *= c - q**i
        expected += (qpoch_list([a], q, k) / qpoch_list([0.7], q, k)).value * product * w**k
    assert _rel(value, expected) < 1e-12


def test_lattice_series_diverging_limit():
    with pytest.raises(DivergesError):
        eval_lattice_series([0.3], [0.7], 0.5, 2.5, c=0.6, lam=1)
