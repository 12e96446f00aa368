from fractions import Fraction

import pytest

from canontree.services import asymptotics, bigdp, genfun
from canontree.services.asymptotics import SigmaOperator, SigmaSpec, SigmaWeight
from canontree.utils import tables
from canontree.utils.errors import TruncationError
from canontree.utils.interval import Interval


def published(t, name):
    return tables.reference_interval(tables.published_values(t)[name])


def test_q0_for_binary_trees(q0_cert):
    cert = q0_cert[2]
    assert cert.q0.overlaps(published(2, "q0"))
    assert cert.q0.width() <= 2e-13
    assert cert.d_at_lo.is_positive()
    assert cert.d_at_hi.is_negative()
    assert cert.phi_q_d.is_negative()


@pytest.mark.parametrize("t", [2, 3, 5, 10, 20])
def test_q0_lies_in_the_expected_band(q0_cert, t):
    q0 = q0_cert[t].q0
    assert 0.5 < q0.lo
    assert q0.hi < 1 - 0.72 / t


def test_binary_report_matches_the_published_tables(constants_report):
    checks = asymptotics.check_tables(constants_report[2])
    assert len(checks) == 10
    failed = [c.quantity for c in checks if not c.ok]
    assert failed == []


@pytest.mark.slow
@pytest.mark.parametrize("t", range(3, 11))
def test_reports_match_the_published_tables(constants_report, t):
    checks = asymptotics.check_tables(constants_report[t])
    assert [c.quantity for c in checks if not c.ok] == []


def test_binary_constants_are_tight(constants_report):
    report = constants_report[2]
    for name in ("mu_h", "mu_d", "mu_m", "mu_w"):
        assert report.value(name).width() < 1e-10
    assert report.sigma2_tpl.width() < 1e-8
    assert report.mu_w.contains(1.710776751014961)


@pytest.mark.parametrize("t", [2, 3, 4])
def test_variances_are_positive_and_tpl_mean_is_scaled_height(constants_report, t):
    report = constants_report[t]
    for name in ("sigma2_h", "sigma2_d", "sigma2_m", "sigma2_tpl"):
        assert report.value(name).is_positive()
    assert report.mu_tpl.overlaps(report.mu_h * Fraction(t, 2))


def test_report_serialises_every_constant(constants_report):
    data = constants_report[2].to_json_dict()
    assert data["t"] == 2 and data["J"] == 14
    for name in asymptotics.CONSTANT_FIELDS:
        assert data[name]["lo"] <= data[name]["hi"]
    assert len(data["p_m"]) == 12


def test_plain_sum_is_t_times_phi_q_b(q0_cert):
    for t in (2, 3):
        q0 = q0_cert[t].q0
        s1 = asymptotics.sigma_sum(t, q0, SigmaSpec(weight=SigmaWeight.ONE, operator=SigmaOperator.U))
        bq = genfun.eval_b(t, q0, 1, 1, (1, 0, 0)).inflated()
        assert s1.overlaps(bq * t)


def test_sigma_sum_is_stable_in_the_truncation(q0_cert):
    q0 = q0_cert[2].q0
    for weight, operator in [
        (SigmaWeight.ONE, SigmaOperator.U),
        (SigmaWeight.HP, SigmaOperator.UU),
        (SigmaWeight.LOG_SUM, SigmaOperator.U),
    ]:
        spec = SigmaSpec(weight=weight, operator=operator)
        short = asymptotics.sigma_sum(2, q0, spec, J_sigma=8)
        long = asymptotics.sigma_sum(2, q0, spec, J_sigma=14)
        assert short.overlaps(long)


def test_unsupported_sums_are_rejected(q0_cert):
    spec = SigmaSpec(weight=SigmaWeight.HP, operator=SigmaOperator.U)
    with pytest.raises(ValueError):
        asymptotics.sigma_sum(2, q0_cert[2].q0, spec)


def test_small_truncation_is_refused_for_u_derivatives(q0_cert):
    with pytest.raises(TruncationError):
        asymptotics.constants_m(2, q0_cert[2], J=6)
    with pytest.raises(TruncationError):
        asymptotics.compute_constants(2, J=6)


def test_predicted_count_matches_the_exact_count(q0_cert):
    predicted = asymptotics.predicted_count(2, 100, q0_cert[2])
    ratio = Interval.point(bigdp.count(2, 100)) / predicted
    assert abs(ratio.mid() - 1) < 1e-6


def test_count_ratio_tends_to_one_over_q0(q0_cert):
    ratio = Fraction(bigdp.count(2, 201), bigdp.count(2, 200))
    assert abs(float(ratio) - 1 / q0_cert[2].q0.mid()) < 1e-4


def test_height_mean_grows_at_rate_mu_h(constants_report):
    low = bigdp.moments(2, 100, "height").mean
    high = bigdp.moments(2, 120, "height").mean
    slope = float(high - low) / 20
    assert abs(slope - constants_report[2].mu_h.mid()) < 1e-3


def test_expansions_need_large_arity(constants_report):
    with pytest.raises(ValueError):
        asymptotics.expansion_checks(constants_report[2])


@pytest.mark.slow
def test_large_arity_constants_follow_their_expansions(constants_report):
    checks = asymptotics.expansion_checks(constants_report[30])
    assert {c.quantity for c in checks} == {"q0", "mu_h", "sigma2_h", "mu_w", "R"}
    assert [c.quantity for c in checks if not c.ok] == []
