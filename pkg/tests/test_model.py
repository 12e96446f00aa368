from fractions import Fraction

import pytest

from canontree.services import model
from canontree.utils.errors import ProfileError


@pytest.mark.parametrize(
    "profile, t, expected",
    [
        ((1, 2, 4), 2, True),
        ((1, 3), 2, False),
        ((2, 1), 2, False),
        ((), 2, True),
        ((1, 3), 3, True),
        ((1, 0), 2, False),
        ((1, 2), 1, False),
    ],
)
def test_validate_profile(profile, t, expected):
    assert model.validate_profile(profile, t) is expected


def test_parameters_of_the_chain():
    p = model.parameters((1, 1, 1, 1), 2)
    assert (p.h, p.m, p.d, p.w, p.n, p.tau) == (4, 2, 4, 2, 4, 5)


def test_parameters_of_the_wide_tree():
    p = model.parameters((1, 1, 2), 2)
    assert (p.h, p.m, p.d, p.w, p.n) == (3, 4, 2, 4, 4)


def test_path_lengths_follow_the_linear_relations():
    p = model.parameters((1, 2, 1), 2)
    assert p.ell == 16
    # leaves at depths 2, 2, 2, 3, 3 and internal vertices at 0, 1, 1, 2
    assert p.ell_ext == 12
    assert p.ell_int == 4
    assert p.ell_ext + p.ell_int == p.ell


@pytest.mark.parametrize("t", [2, 3, 5])
def test_single_leaf(t):
    p = model.parameters((), t)
    assert (p.n, p.tau, p.h, p.m, p.d, p.w, p.ell) == (0, 1, 0, 1, 1, 1, 0)


def test_parameters_reject_invalid_profiles():
    with pytest.raises(ProfileError):
        model.parameters((1, 3), 2)


def test_star_code_and_partition():
    assert model.to_code((1,), 2) == ("1", "2")
    assert model.to_partition((1,), 2) == (1, 1)


def test_partition_of_the_wide_tree():
    assert model.to_partition((1, 1, 2), 2) == (1, 3, 3, 3, 3)


def test_chain_code_is_canonical():
    words = model.to_code((1, 1, 1, 1), 2)
    assert words == ("1", "21", "221", "2221", "2222")
    assert model.from_code(list(reversed(words)), 2) == (1, 1, 1, 1)


def test_enumerate_small_sizes():
    assert list(model.enumerate_all(2, 4)) == [(1, 1, 1, 1), (1, 1, 2), (1, 2, 1)]
    assert list(model.enumerate_all(2, 0)) == [()]
    assert len(list(model.enumerate_all(2, 5))) == 5


@pytest.mark.parametrize("t", [2, 3, 4])
def test_bijections_round_trip(t):
    for n in range(0, 11):
        seen = set()
        for p in model.enumerate_all(t, n):
            assert model.validate_profile(p, t)
            assert p not in seen
            seen.add(p)
            partition = model.to_partition(p, t)
            assert model.kraft_sum(partition, t) == Fraction(1)
            assert model.from_partition(partition, t) == p
            assert model.from_code(model.to_code(p, t), t) == p


@pytest.mark.parametrize("t", [2, 3])
def test_parameter_relations_hold_for_every_tree(t):
    for n in range(0, 13):
        for p in model.enumerate_all(t, n):
            v = model.parameters(p, t)
            assert v.tau == 1 + n * (t - 1)
            assert v.ell_ext + v.ell_int == v.ell
            assert t * v.ell_ext == (t - 1) * v.ell + t * n
            if v.h > 0:
                assert v.m % t == 0


def test_from_code_rejects_prefixes_and_bad_symbols():
    with pytest.raises(ProfileError):
        model.from_code(["1", "12", "2"], 2)
    with pytest.raises(ProfileError):
        model.from_code(["1", "3"], 2)
    with pytest.raises(ProfileError):
        model.from_code(["1", "1"], 2)


def test_from_code_rejects_non_canonical_codes():
    # same lengths as the chain, but the long words hang off the first symbol
    with pytest.raises(ProfileError):
        model.from_code(["2", "12", "112", "1111", "1112"], 2)


def test_from_partition_rejects_kraft_violations():
    with pytest.raises(ProfileError):
        model.from_partition((1, 2), 2)
    with pytest.raises(ProfileError):
        model.from_partition((2, 1, 1), 2)


def test_arity_must_be_at_least_two():
    with pytest.raises(ProfileError):
        model.check_arity(1)
    with pytest.raises(ProfileError):
        list(model.enumerate_all(1, 3))
