import json
import math

import pytest

from canontree.services import locallimit
from canontree.utils.interval import Interval


def test_root_at_phi_zero_is_the_real_singularity(q0_cert):
    cert = q0_cert[2]
    for mode in locallimit.MODES:
        box = locallimit.q0_of_w(2, Interval(0.0), cert, mode)
        assert box.re.overlaps(cert.q0)
        assert box.im.contains(0.0)


def test_root_moves_against_the_height_mean(q0_cert, constants_report):
    # q0'(1) = -q0 mu_h from implicit differentiation of D(q0(w), w) = 0
    cert = q0_cert[2]
    derivs = locallimit.implicit_derivatives(2, Interval(0.0), cert)
    expected = -(cert.q0 * constants_report[2].mu_h)
    assert derivs.q0w_prime.re.inflate(1e-9).overlaps(expected)
    assert derivs.q0w_prime.im.inflate(1e-9).contains(0.0)


@pytest.mark.parametrize("mode", locallimit.MODES)
def test_curvature_is_positive_at_zero(q0_cert, mode):
    assert locallimit.second_derivative_abs(2, Interval(0.0), q0_cert[2], mode).is_positive()


def test_curvature_is_symmetric(q0_cert):
    cert = q0_cert[2]
    plus = locallimit.second_derivative_abs(2, Interval(0.1), cert)
    minus = locallimit.second_derivative_abs(2, Interval(-0.1), cert)
    assert plus.overlaps(minus)


def test_far_cells_use_the_root_bound(q0_cert):
    assert locallimit.root_bound_threshold(2, "height") < 2.5
    assert locallimit.outer_cell_certify(2, Interval(2.5, 3.0), q0_cert[2]) == "root_bound"


def test_outer_certifier_refuses_the_minimum(q0_cert):
    cell = Interval(0.0, 0.05)
    assert locallimit.outer_cell_certify(2, cell, q0_cert[2], levels=4) is None


def test_unknown_mode_is_rejected(q0_cert):
    with pytest.raises(ValueError):
        locallimit.q0_of_w(2, Interval(0.0), q0_cert[2], mode="width")


@pytest.mark.slow
@pytest.mark.parametrize("mode", locallimit.MODES)
def test_binary_scan_is_verified(q0_cert, mode):
    cert = q0_cert[2]
    report = locallimit.verify_unique_min(2, mode, cert)
    assert report.verified
    assert report.covers_half_circle()
    assert 0.0 < report.central_radius <= math.pi + 1e-15
    assert report.min_outer_modulus() > cert.q0.hi
    payload = json.loads(report.model_dump_json())
    assert payload["status"] == "verified"
    assert payload["outer_cells"]
