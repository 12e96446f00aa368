import math
from fractions import Fraction

import pytest
import sympy

from canontree.utils.errors import IntervalDomainError
from canontree.utils.interval import (
    ONE,
    PI,
    ComplexBox,
    Interval,
    cos_range,
    sin_range,
    unit_circle_point,
)


def encloses(box: Interval, exact) -> bool:
    return Fraction(box.lo) <= Fraction(exact) <= Fraction(box.hi)


def test_third_is_enclosed_after_division():
    third = ONE / 3
    assert third.lo < third.hi
    assert encloses(third, Fraction(1, 3))


def test_repeated_sum_encloses_exact_value():
    total = Interval(0.0)
    for _ in range(10):
        total = total + Interval.point(Fraction(1, 10))
    assert total.contains(1.0)
    assert encloses(total, 1)


def test_exact_operations_stay_points():
    x = Interval(2.0) * Interval(3.0)
    assert x.lo <= 6.0 <= x.hi
    assert (Interval(5.0) + 0).lo == 5.0
    assert (Interval(7.0) * 1) == Interval(7.0)


def test_large_integers_are_widened():
    big = 2 ** 60 + 1
    box = Interval.point(big)
    assert Fraction(box.lo) <= big <= Fraction(box.hi)


def test_multiplication_sign_cases():
    x = Interval(-2.0, 3.0) * Interval(-1.0, 4.0)
    assert x.lo <= -8.0 and x.hi >= 12.0
    y = Interval(-3.0, -2.0) * Interval(-5.0, -4.0)
    assert y.lo <= 8.0 and y.hi >= 15.0 and y.lo > 7.9


def test_division_by_zero_interval_raises():
    with pytest.raises(IntervalDomainError):
        ONE / Interval(-1.0, 1.0)


def test_invalid_bounds_raise():
    with pytest.raises(IntervalDomainError):
        Interval(2.0, 1.0)


def test_ln_exp_sqrt_enclose_high_precision_values():
    x = Interval(2.0)
    ln2 = sympy.log(2).evalf(40)
    e = sympy.E.evalf(40)
    assert x.ln().lo <= float(ln2) <= x.ln().hi
    assert ONE.exp().lo <= float(e) <= ONE.exp().hi
    assert x.sqrt().contains(math.sqrt(2.0))
    with pytest.raises(IntervalDomainError):
        Interval(-1.0, 1.0).ln()
    with pytest.raises(IntervalDomainError):
        Interval(-1.0, 1.0).sqrt()


def test_exp_overflow_gives_infinite_upper_end():
    big = Interval(1.0, 1000.0).exp()
    assert big.hi == math.inf
    assert big.lo > 2.7


def test_powers_and_squares():
    x = Interval(-2.0, 1.0)
    assert x.sqr().lo == 0.0 and x.sqr().hi >= 4.0
    assert (x ** 2).lo == 0.0
    cube = x ** 3
    assert cube.lo <= -8.0 and cube.hi >= 1.0
    assert encloses(Interval(0.5) ** 10, Fraction(1, 1024))
    assert encloses(Interval(2.0) ** -2, Fraction(1, 4))


def test_mag_mig_and_predicates():
    x = Interval(-3.0, 2.0)
    assert x.mag() == 3.0 and x.mig() == 0.0
    assert Interval(1.0, 2.0).mig() == 1.0
    assert Interval(0.5, 1.0).is_positive()
    assert Interval(-1.0, -0.5).is_negative()
    assert x.contains_zero()
    assert Interval(1.0, 2.0).overlaps(Interval(2.0, 3.0))
    assert Interval(1.0, 2.0).intersect(Interval(3.0, 4.0)) is None
    assert Interval.hull_of([Interval(1.0), Interval(-1.0), Interval(4.0)]) == Interval(-1.0, 4.0)


def test_pi_encloses_pi():
    assert encloses(PI, Fraction(str(sympy.pi.evalf(40))))


def test_circle_ranges_contain_extrema():
    whole = cos_range(Interval(-0.1, 0.1))
    assert whole.hi == 1.0
    assert whole.lo <= math.cos(0.1)
    s = sin_range(Interval(1.0, 2.0))
    assert s.hi == 1.0
    assert s.lo <= math.sin(1.0)
    c = cos_range(Interval(3.0, 3.3))
    assert c.lo == -1.0


def test_unit_circle_point_contains_samples():
    phi = Interval(0.3, 0.4)
    box = unit_circle_point(phi)
    for x in (0.3, 0.35, 0.4):
        assert box.contains(complex(math.cos(x), math.sin(x)))
    assert unit_circle_point(Interval(0.0)).is_real()


def test_complex_arithmetic_encloses_samples():
    a = ComplexBox(Interval(0.5, 0.6), Interval(-0.1, 0.1))
    b = ComplexBox(Interval(1.0), Interval(2.0))
    for z in (complex(0.5, -0.1), complex(0.55, 0.0), complex(0.6, 0.1)):
        w = complex(1.0, 2.0)
        assert (a * b).contains(z * w)
        assert (a / b).contains(z / w)
        assert (a + b).contains(z + w)
        assert (1 - a).contains(1 - z)
    assert abs(b).contains(math.sqrt(5.0))
    assert b.conj().contains(complex(1.0, -2.0))


def test_interval_times_complex_box_dispatches_to_box():
    box = Interval(2.0) * ComplexBox(Interval(1.0), Interval(1.0))
    assert isinstance(box, ComplexBox)
    assert box.contains(complex(2.0, 2.0))


def test_complex_division_by_zero_box_raises():
    with pytest.raises(IntervalDomainError):
        ComplexBox(ONE) / ComplexBox(Interval(-1.0, 1.0), Interval(-1.0, 1.0))


def test_complex_power_matches_repeated_product():
    z = ComplexBox.around(complex(0.3, 0.4), 1e-12)
    cube = z ** 3
    assert cube.contains(complex(0.3, 0.4) ** 3)
    assert z.mag() >= 0.5 - 1e-9
    assert z.mig() <= 0.5 + 1e-9


def test_complex_sqrt_takes_the_principal_branch():
    assert ComplexBox(3, 4).sqrt().contains(complex(2, 1))
    assert ComplexBox(3, -4).sqrt().contains(complex(2, -1))
    assert ComplexBox(0, 2).sqrt().contains(complex(1, 1))
    assert ComplexBox(4).sqrt().re.contains(2)
    straddling = ComplexBox(Interval(3.0, 3.1), Interval(-0.1, 0.1)).sqrt()
    assert straddling.contains(complex(3, 0.1) ** 0.5)
    assert straddling.contains(complex(3, -0.1) ** 0.5)
    with pytest.raises(IntervalDomainError):
        ComplexBox(-4).sqrt()
    with pytest.raises(IntervalDomainError):
        ComplexBox(Interval(-1.0, 1.0), Interval(-0.5, 0.5)).sqrt()
