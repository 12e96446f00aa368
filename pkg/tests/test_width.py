import math
from collections import Counter
from fractions import Fraction

import pytest

from canontree.services import asymptotics, bigdp, model, width
from canontree.services.width import TransferMatrix
from canontree.utils import config
from canontree.utils.errors import CertificationError, ResourceLimitError


def test_matrix_dimension_and_support():
    assert TransferMatrix(2, 5).N == 4
    assert TransferMatrix(3, 6).N == 2
    assert TransferMatrix(3, 7).N == 3
    m = TransferMatrix(2, 6)
    assert list(m.support(1)) == [1, 2, 3]
    assert list(m.support(3)) == [2, 3, 4]
    assert list(m.support(5)) == [3, 4, 5]


def test_numeric_matrix_has_powers_of_q_on_its_band():
    grid = TransferMatrix(2, 4).numeric(0.5)
    assert grid.shape == (3, 3)
    assert grid[0, 0] == 0.5 and grid[0, 1] == 0.5 and grid[0, 2] == 0.0
    assert grid[2, 1] == 0.125 and grid[2, 2] == 0.125


def test_size_four_width_caps():
    assert width.width_capped_counts(2, 100, 4)[4] == 3
    assert width.width_capped_counts(2, 2, 4)[4] == 1
    assert width.width_capped_counts(2, 3, 4)[4] == 2


def test_caps_below_the_arity_leave_only_the_leaf():
    capped = width.width_capped_counts(3, 2, 6)
    assert capped.coeffs == (1, 0, 0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        width.width_capped_counts(2, 0, 4)


@pytest.mark.parametrize("t", [2, 3])
def test_capped_counts_grow_with_the_cap(t):
    n_max = 14
    previous = width.width_capped_counts(t, t, n_max)
    for K in range(t + 1, 1 + n_max * (t - 1) + 1):
        current = width.width_capped_counts(t, K, n_max)
        assert all(current[n] >= previous[n] for n in range(n_max + 1))
        previous = current
    assert all(previous[n] == bigdp.count(t, n) for n in range(n_max + 1))


@pytest.mark.parametrize("t", [2, 3])
def test_width_distribution_matches_brute_force(t):
    for n in range(0, 13):
        brute = Counter(model.parameters(p, t).w for p in model.enumerate_all(t, n))
        assert width.width_distribution(t, n) == dict(brute)


def test_width_mean_of_small_trees():
    assert width.width_mean(2, 4) == Fraction(3)
    assert width.width_mean(2, 1) == Fraction(2)
    assert width.width_mean(2, 0) == Fraction(1)
    assert width.width_mean(3, 9) == bigdp.dist(3, 9, "width").moments().mean


@pytest.fixture(scope="module")
def binary_qk():
    return [width.solve_qK(2, K) for K in range(2, 41)]


def test_qk_lies_above_q0_and_decreases(q0_cert, binary_qk):
    q0 = q0_cert[2].q0
    assert [c.K for c in binary_qk] == list(range(2, 41))
    assert all(c.qK.lo > q0.hi for c in binary_qk)
    assert all(b.qK.hi < a.qK.lo for a, b in zip(binary_qk, binary_qk[1:]))


def test_qk_keeps_its_precision_at_large_caps(binary_qk):
    for cert in binary_qk:
        assert cert.q_hi - cert.q_lo <= Fraction(1e-13)
        matrix = TransferMatrix(2, cert.K)
        assert width.verify_witness(matrix, cert.q_lo, cert.x_lo, upper=False)
        assert width.verify_witness(matrix, cert.q_hi, cert.x_hi, upper=True)


def test_qk_witnesses_verify_exactly():
    cert = width.solve_qK(3, 9)
    matrix = TransferMatrix(3, 9)
    assert width.verify_witness(matrix, cert.q_lo, cert.x_lo, upper=False)
    assert width.verify_witness(matrix, cert.q_hi, cert.x_hi, upper=True)
    assert cert.qK.width() < 1e-9


def test_qk_gap_decays_at_the_rate_of_q0(q0_cert, binary_qk):
    q0 = q0_cert[2].q0
    slope = width.qk_decay_slope([c for c in binary_qk if c.K >= 20], q0)
    rate = math.log(q0.mid())
    assert abs(slope - rate) <= 0.1 * abs(rate)


def test_unreachable_precision_is_a_certification_error():
    with pytest.raises(CertificationError):
        width.solve_qK(2, 8, precision=1e-20)


def test_equal_matrices_are_detected():
    assert TransferMatrix(10, 20).same_entries(TransferMatrix(10, 21))
    assert not TransferMatrix(2, 5).same_entries(TransferMatrix(2, 6))
    assert not TransferMatrix(3, 7).same_entries(TransferMatrix(3, 8))


def test_qk_is_shared_by_equal_matrices():
    a, b = width.solve_qK(10, 20), width.solve_qK(10, 21)
    assert a.qK.overlaps(b.qK)


def test_width_mean_bounds_are_exact_without_a_tail():
    means = width.width_mean_bounds(2, [0, 4, 9])
    assert [m.n for m in means] == [0, 4, 9]
    assert all(m.exact for m in means)
    assert means[1].lower == Fraction(3)
    assert means[2].lower == bigdp.dist(2, 9, "width").moments().mean


def test_width_mean_bounds_enclose_the_exact_mean():
    exact = width.width_mean(2, 40)
    loose = width.width_mean_bounds(2, [40], tail=Fraction(1, 100))[0]
    assert loose.lower <= exact <= loose.upper
    assert loose.upper - loose.lower <= Fraction(1, 100)


def test_width_mean_respects_its_cap():
    with pytest.raises(ResourceLimitError):
        width.width_mean_bounds(2, [config.WIDTH_MEAN_CAP + 1])


@pytest.mark.slow
def test_width_mean_grows_like_mu_w_log_n(q0_cert):
    mu_w = asymptotics.constant_width(2, q0_cert[2]).mid()
    slope = width.width_mean_slope(2, [250, 500, 1000, 2000, 4000])
    assert abs(slope - mu_w) <= 0.1 * mu_w


def test_qk_needs_a_nonempty_matrix():
    with pytest.raises(ValueError):
        width.solve_qK(3, 2)


@pytest.mark.parametrize("K", [6, 10, 14])
def test_determinant_agrees_with_the_denominator(K):
    assert width.determinant_agreement(2, K, 20) >= K // 2 + 1


def test_truncated_p_vector_is_a_perron_vector(q0_cert):
    for t, K in ((2, 12), (3, 18)):
        residuals = width.eigenvector_residuals(t, K, q0_cert[t].q0)
        assert len(residuals) == TransferMatrix(t, K).N
        assert all(r.ok for r in residuals)
