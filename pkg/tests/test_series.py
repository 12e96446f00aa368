import math

import numpy as np
import pytest

from canontree.services import bigdp, series
from canontree.services.series import SeriesQ
from canontree.utils.interval import Interval


def test_hp_ladder():
    assert [series.hp(2, j) for j in range(5)] == [0, 1, 3, 7, 15]
    assert [series.hp(3, j) for j in range(4)] == [0, 1, 4, 13]
    for t in (2, 3, 5):
        for j in range(6):
            assert series.hp(t, j + 1) == 1 + t * series.hp(t, j)
    assert series.hp_index(2, 3).value == 7


def test_low_order_coefficients():
    H = series.series_H(2, 10)
    assert [H[n] for n in (0, 1, 4, 5)] == [1, 1, 3, 5]
    for t in (2, 3, 6):
        b = series.series_b(t, 8)
        assert b[0] == 0 and b[1] == 1


@pytest.mark.parametrize("t", [2, 3, 4, 5])
def test_coefficients_are_the_tree_counts(t):
    H = series.series_H(t, 120)
    assert all(H[n] == bigdp.count(t, n) for n in range(121))


@pytest.mark.parametrize("t", [2, 3])
def test_series_identity(t):
    order = 40
    H, a, b = series.series_H(t, order), series.series_a(t, order), series.series_b(t, order)
    assert (H * (1 - b)).coeffs == a.coeffs


def test_series_arithmetic():
    one_minus_q = SeriesQ.constant(1, 6) - SeriesQ.monomial(1, 6)
    geometric = one_minus_q.reciprocal()
    assert list(geometric.coeffs) == [1] * 7
    assert (geometric * one_minus_q)[0] == 1
    assert all((geometric * one_minus_q)[n] == 0 for n in range(1, 7))
    assert SeriesQ.monomial(3, 6).valuation() == 3
    assert SeriesQ.constant(0, 6).valuation() == 7


def test_series_dump_columns():
    frame = series.series_dump(2, 6)
    assert list(frame.columns) == ["n", "coefficient"]
    assert frame["coefficient"].tolist()[:5] == ["1", "1", "1", "2", "3"]
    with pytest.raises(ValueError):
        series.series_dump(2, 6, which="c")


def test_p_table_sums_to_one(q0_cert):
    p = series.p_table(2, q0_cert[2].q0, 60)
    total = sum(p[1:], p[0])
    assert total.overlaps(Interval(1.0 - 1e-12, 1.0))
    assert all(x.is_positive() for x in p)


def test_p_table_encloses_last_level_mean(q0_cert):
    p = series.p_table(2, q0_cert[2].q0, 80)
    mean = sum((2 * m * x for m, x in enumerate(p, start=1)), Interval(0.0))
    assert abs(mean.mid() - 3.3008907135661046) < 1e-8


@pytest.mark.parametrize("t", [2, 3, 5])
def test_p_table_matches_the_recursion(q0_cert, t):
    q0 = q0_cert[t].q0
    direct = series.p_table(t, q0, 30)
    recursive = series.p_recursive(t, q0, 30)
    for a, b in zip(direct, recursive):
        assert a.overlaps(b)


def test_p_table_decays_like_q_star(q0_cert):
    # p_r = O(r^2 q_*^r) with q_* = q0^(t/(t-1)); for t = 2 that is q0^2
    q0 = q0_cert[2].q0
    p = series.p_table(2, q0, 20)
    rs = np.arange(5, 21)
    logs = np.log([p[r - 1].mid() for r in rs])
    slope = np.polyfit(rs, logs, 1)[0]
    ln_q_star = 2 * math.log(q0.mid())
    assert abs(slope - ln_q_star) < 0.35
    assert slope < math.log(q0.mid()) - 0.2


def test_p_table_rejects_wide_enclosures():
    from canontree.utils.errors import CertificationError

    with pytest.raises(CertificationError):
        series.p_table(2, Interval(0.55, 0.56), 10)
