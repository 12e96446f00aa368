import argparse
import asyncio
import json
from pathlib import Path

import pytest

from canontree.commands import analysis
from canontree.commands.common import parse_int_list, run_jobs
from canontree.main import main
from canontree.services import bigdp

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_int_list():
    assert parse_int_list("7") == [7]
    assert parse_int_list("2..5") == [2, 3, 4, 5]
    assert parse_int_list("2,3,5") == [2, 3, 5]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_int_list("5..2")
    with pytest.raises(argparse.ArgumentTypeError):
        parse_int_list("two")


def test_jobs_keep_input_order():
    assert asyncio.run(run_jobs(lambda x: x * x, [3, 1, 2], workers=2)) == [9, 1, 4]


def test_count_prints_a_bare_number(capsys):
    assert run(capsys, "count", "-t", "2", "-n", "4") == (0, "3\n", "")


def test_count_over_a_range_prints_csv(capsys):
    code, out, _ = run(capsys, "count", "-t", "2", "-n", "4,5")
    assert code == 0
    assert out == "t,n,count\n2,4,3\n2,5,5\n"


def test_dist_matches_golden_file(capsys, tmp_path):
    target = tmp_path / "dist.csv"
    code, out, _ = run(capsys, "dist", "-t", "2", "-n", "4", "--stat", "height", "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_text() == (GOLDEN / "dist_t2_n4_height.csv").read_text()


def test_moments_print_exact_and_decimal_values(capsys):
    code, out, _ = run(capsys, "moments", "-t", "2", "-n", "4", "--format", "json")
    assert code == 0
    row = json.loads(out)[0]
    assert row["mean"] == "10/3"
    assert row["mean_decimal"] == "3.333333333333"


def test_sample_of_the_star(capsys):
    assert run(capsys, "sample", "-t", "2", "-n", "1", "--seed", "7") == (0, "[1]\n", "")


def test_sample_json_carries_parameters(capsys):
    code, out, _ = run(capsys, "sample", "-t", "3", "-n", "6", "--seed", "1", "--size", "2", "--format", "json")
    assert code == 0
    records = json.loads(out)
    assert len(records) == 2
    for record in records:
        assert sum(record["profile"]) == 6
        assert record["parameters"]["tau"] == 13


def test_series_dump(capsys):
    code, out, _ = run(capsys, "series", "-t", "2", "-N", "5")
    assert code == 0
    assert out.splitlines() == ["n,coefficient", "0,1", "1,1", "2,1", "3,2", "4,3", "5,5"]


@pytest.mark.parametrize(
    "argv",
    [
        ["count", "-t", "x", "-n", "4"],
        ["count", "-t", "1", "-n", "4"],
        ["dist", "-t", "2", "-n", "4", "--stat", "depth"],
        ["moments", "-t", "2", "-n", "-3"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_with_two(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_single_value_commands_reject_lists(capsys):
    code, out, err = run(capsys, "dist", "-t", "2,3", "-n", "4")
    assert code == 1
    assert out == ""
    assert "single value" in err


def test_constants_report_the_failed_precondition(capsys):
    code, _, err = run(capsys, "constants", "-t", "2", "--J", "6")
    assert code == 1
    assert "precondition failed" in err


def test_constants_json_with_table_checks(capsys):
    code, out, _ = run(capsys, "constants", "-t", "2", "--json", "--check-tables")
    assert code == 0
    payload = json.loads(out)
    report = payload["reports"][0]
    assert report["t"] == 2
    assert report["q0"]["lo"] <= 0.5573678720139932 <= report["q0"]["hi"]
    assert payload["table_checks"] and all(c["ok"] for c in payload["table_checks"])
    assert payload["expansion_checks"] == []


def test_compare_at_size_zero_has_no_asymptotic_column(capsys):
    code, out, _ = run(capsys, "compare", "-t", "2", "-n", "0")
    assert code == 0
    assert out == "value,exact_probability,asymptotic_density\n0,1.000000000000,\n"


def test_compare_rejects_width(capsys):
    code, _, err = run(capsys, "compare", "-t", "2", "-n", "10", "--stat", "width")
    assert code == 1
    assert "width" in err


def test_height_is_close_to_its_normal_limit():
    frame = analysis.compare_frame(2, 60, "height")
    assert analysis.sup_distance(frame) < 0.03


def test_last_level_law_is_close_to_p_m():
    frame = analysis.compare_frame(2, 60, "last_level_leaves")
    assert (frame["asymptotic_density"] != "").all()
    assert analysis.sup_distance(frame) < 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("stat", ["height", "distinct_depths"])
def test_kolmogorov_distance_shrinks_with_n(stat):
    distances = [analysis.ks_distance(bigdp.dist(2, n, stat)) for n in (50, 100, 200)]
    assert distances[0] > distances[1] > distances[2]


def test_kolmogorov_distance_of_a_constant_is_an_error():
    with pytest.raises(ValueError):
        analysis.ks_distance(bigdp.dist(2, 1, "height"))


def test_qk_json_has_a_decay_slope(capsys):
    code, out, _ = run(capsys, "qk", "-t", "2", "-K", "6", "8", "10", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert [e["K"] for e in report["entries"]] == [6, 8, 10]
    assert all(e["gap"] > 0 for e in report["entries"])
    assert report["decay_slope"] < 0


def test_verify_series_suite(capsys, tmp_path):
    target = tmp_path / "verdict.json"
    code, out, _ = run(capsys, "verify", "--suite", "series", "-t", "2,3", "--output", str(target))
    assert code == 0 and out == ""
    verdict = json.loads(target.read_text())
    assert verdict["verified"] is True
    assert verdict["t"] == [2, 3]
    assert {c["check"] for c in verdict["checks"]} == {
        "[q^n] H = count",
        "count = enumeration",
        "p_m by coefficients = p_m by recursion",
    }


@pytest.mark.slow
def test_verify_width_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "width", "-t", "2")
    assert code == 0
    assert json.loads(out)["verified"] is True
