import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaymesh.errors import CapacityError, InfeasibleError, NonFiniteError, ValidationError
from relaymesh.opt_core import (
    SearchSpec,
    bell_number,
    bisect_min_feasible,
    golden_max,
    partitions_of,
    restricted_growth_strings,
    set_partitions,
)


def test_golden_max_interior_peak():
    x, v = golden_max(lambda a: -(a - 0.3) ** 2)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert v == pytest.approx(0.0, abs=1e-15)


def test_golden_max_endpoint_peaks():
    assert golden_max(lambda a: -a)[0] == 0.0
    assert golden_max(lambda a: a)[0] == 1.0


def test_golden_max_constant_prefers_smallest():
    assert golden_max(lambda a: 1.0)[0] == 0.0


def test_golden_max_nan_raises():
    with pytest.raises(NonFiniteError):
        golden_max(lambda a: float("nan"))


def test_search_spec_validation():
    with pytest.raises(ValidationError):
        SearchSpec(lo=1.0, hi=0.0)
    assert SearchSpec().iteration_bound() < 100


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.1, 10.0))
def test_golden_max_beats_grid_on_concave(c, k):
    f = lambda a: -k * abs(a - c) ** 1.5
    x, v = golden_max(f)
    grid = max(f(a) for a in np.linspace(0, 1, 1001))
    assert v >= grid - 1e-12


def test_bisect_min_feasible():
    t = bisect_min_feasible(lambda x: x >= math.pi, 0.0, 10.0, 1e-12)
    assert t >= math.pi and t - math.pi < 1e-11
    assert bisect_min_feasible(lambda x: True, 2.0, 3.0, 1e-9) == 2.0
    with pytest.raises(InfeasibleError):
        bisect_min_feasible(lambda x: False, 0.0, 1.0, 1e-9)


def test_rgs_small():
    assert list(restricted_growth_strings(3)) == [
        (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]


@pytest.mark.parametrize("n", range(1, 9))
def test_partition_counts_equal_bell(n):
    parts = list(set_partitions(n))
    assert len(parts) == bell_number(n)
    # each partition covers 0..n-1 exactly once and partitions are distinct
    for p in parts:
        assert sorted(x for b in p for x in b) == list(range(n))
    assert len({tuple(map(tuple, p)) for p in parts}) == len(parts)


def test_bell_numbers_known():
    assert [bell_number(n) for n in range(0, 9)] == [1, 1, 2, 5, 15, 52, 203, 877, 4140]


def test_partition_cap_and_domain():
    with pytest.raises(CapacityError):
        next(iter(set_partitions(9)))
    with pytest.raises(ValidationError):
        next(iter(set_partitions(0)))


def test_partitions_of_labels():
    parts = list(partitions_of((2, 3)))
    assert parts == [[(2, 3)], [(2,), (3,)]]
