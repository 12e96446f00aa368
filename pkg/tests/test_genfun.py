from fractions import Fraction

import pytest

from canontree.services import genfun, series
from canontree.services.genfun import VALUE, DerivOrder, PhiJet
from canontree.utils.errors import HypothesisError, TruncationError
from canontree.utils.interval import ComplexBox, Interval

PINNED_ORDERS = [VALUE, (1, 0, 0), (0, 0, 1), (2, 0, 0), (1, 0, 1), (0, 0, 2)]
U_ORDERS = [(0, 1, 0), (0, 2, 0), (1, 1, 0), (0, 1, 1)]
THREE_TENTHS = Fraction(3, 10)


def evaluate(s, x: Fraction) -> Fraction:
    return sum((c * x ** n for n, c in enumerate(s.coeffs)), Fraction(0))


def test_deriv_order_is_capped_at_two():
    with pytest.raises(ValueError):
        DerivOrder(3, 0, 0).validate()
    with pytest.raises(ValueError):
        DerivOrder(1, 1, 1).validate()
    assert DerivOrder(1, 0, 1).validate().total == 2


def test_jet_product_rule_on_monomials():
    q = Interval(0.5)
    w = Interval(0.8)
    left = PhiJet.monomial(q, (1, 0, 0))
    right = PhiJet.monomial(q * w, (1, 0, 1))
    product = left * right
    expected = PhiJet.monomial(q * q * w, (2, 0, 1))
    for order in PINNED_ORDERS:
        assert product[order].overlaps(expected[order])
    # Phi_q Phi_w (q^2 w) = 2 q^2 w
    assert product[(1, 0, 1)].contains(2 * 0.25 * 0.8)


def test_zero_arguments_give_zero():
    zero = Interval(0.0)
    for order in [VALUE, (1, 0, 0), (2, 0, 0)]:
        assert genfun.eval_b(2, zero, 1, 1, order).inflated().contains(0.0)
    assert genfun.eval_D_height(3, zero, 1).inflated().contains(1.0)


@pytest.mark.parametrize("t", [2, 3])
@pytest.mark.parametrize("q", [0.3, 0.5, 0.6])
def test_tail_bounds_cover_the_next_terms(t, q):
    for w in (1.0, 0.9):
        for order in PINNED_ORDERS:
            short = genfun.eval_b(t, q, 1, w, order, J=4)
            long = genfun.eval_b(t, q, 1, w, order, J=10)
            assert short.inflated().overlaps(long.inflated())
            assert long.tail_bound <= short.tail_bound


@pytest.mark.parametrize("t", [2, 3])
def test_u_derivative_tails_cover_the_next_terms(t):
    for order in U_ORDERS:
        short = genfun.eval_b(t, 0.5, 0.9, 1, order, J=9)
        long = genfun.eval_b(t, 0.5, 0.9, 1, order, J=15)
        assert short.inflated().overlaps(long.inflated())


def test_u_derivatives_need_enough_levels():
    with pytest.raises(TruncationError):
        genfun.eval_b(2, 0.55, 1, 1, (0, 1, 0), J=6)
    genfun.eval_b(2, 0.55, 1, 1, (0, 1, 0), J=14)


def test_hypotheses_are_enforced():
    with pytest.raises(HypothesisError):
        genfun.eval_b(2, 0.7, 1, 1, (1, 0, 0))
    with pytest.raises(HypothesisError):
        genfun.eval_b(2, 1.0, 1, 1)
    # plain values only need a convergent tail
    genfun.eval_b(2, 0.7, 1, 1)


@pytest.mark.parametrize("t", [2, 3])
def test_finite_sum_agrees_with_exact_series(t):
    q = Interval.point(THREE_TENTHS)
    b_exact = evaluate(series.series_b(t, 200), THREE_TENTHS)
    a_exact = evaluate(series.series_a(t, 200), THREE_TENTHS)
    assert genfun.eval_b(t, q, 1, 1).inflated().inflate(1e-15).contains(b_exact)
    assert genfun.eval_a(t, q).inflated().inflate(1e-15).contains(a_exact)


def test_two_level_height_bound_is_sound():
    coarse = genfun.eval_D_height(2, 0.5, 1, J=2)
    fine = genfun.eval_D_height(2, 0.5, 1, J=14)
    assert coarse.inflated().overlaps(fine.inflated())
    assert genfun.height_tail_j2(2, 0.0, 1) == 0.0


def test_height_and_depth_denominators_agree_at_one():
    for t in (2, 3, 5):
        height = genfun.eval_D_height(t, 0.5, 1)
        depths = genfun.eval_D_depths(t, 0.5, 1)
        assert height.inflated().overlaps(depths.inflated())


def test_denominators_vanish_at_the_singularity(q0_cert):
    for t in (2, 3):
        q0 = q0_cert[t].q0
        assert genfun.eval_D_height(t, q0, 1).inflated().contains_zero()
        assert genfun.eval_D_depths(t, q0, 1).inflated().contains_zero()
        assert genfun.eval_b(t, q0, 1, 1).inflated().contains(1.0)


def test_denominator_rejects_u_derivatives():
    with pytest.raises(ValueError):
        genfun.eval_D_height(2, 0.5, 1, (0, 1, 0))
    with pytest.raises(ValueError):
        genfun.eval_denominator(2, "width", 0.5, 1)


@pytest.mark.parametrize("mode", ["height", "depths"])
def test_float_denominator_matches_the_certified_one(mode):
    value, dq = genfun.approx_denominator(2, mode, 0.5, 1.1, 14)
    certified = genfun.eval_denominator(2, mode, 0.5, 1.1)
    assert certified.inflated().inflate(1e-12).contains(value.real)
    assert abs(value.imag) < 1e-15
    slope = genfun.eval_denominator(2, mode, 0.5, 1.1, (1, 0, 0))
    # Phi_q D = q dD/dq
    assert slope.inflated().inflate(1e-10).contains(0.5 * dq.real)


def test_complex_arguments_enclose_conjugate_pairs():
    q = ComplexBox.around(complex(0.4, 0.1), 1e-12)
    value = genfun.eval_D_height(2, q, 1)
    mirrored = genfun.eval_D_height(2, q.conj(), 1)
    assert value.inflated().conj().overlaps(mirrored.inflated())


def test_shifted_u_at_level_zero_is_plain_b():
    for order in [VALUE, (0, 1, 0), (1, 1, 0)]:
        shifted = genfun.eval_b_at_shifted_u(2, 0.5, 0, order)
        plain = genfun.eval_b(2, 0.5, 1, 1, order)
        assert shifted.inflated().overlaps(plain.inflated())
    with pytest.raises(ValueError):
        genfun.eval_b_at_shifted_u(2, 0.5, -1)


def test_shifted_u_derivative_shrinks_with_depth():
    first = genfun.eval_b_at_shifted_u(2, 0.5, 1, (0, 1, 0)).inflated()
    deep = genfun.eval_b_at_shifted_u(2, 0.5, 4, (0, 1, 0)).inflated()
    assert deep.mag() < first.mag()
    # first term t q^(1 + t hp(j)) dominates at depth
    assert deep.mag() < 4 * 2 * 0.5 ** (1 + 2 * 15)
