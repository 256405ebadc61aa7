import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from relrand import (
    AttributeDomain,
    PathMatrix,
    StatisticError,
    StatisticSpec,
    UndefinedStatisticError,
    evaluate_chain,
    l1_distribution_distance,
    l1_group_vs_rest,
    proportion_difference,
    register_statistic,
    tuple_count,
    weighted_average_destination,
)


def matrix(counts, col_values=None):
    arr = np.asarray(counts)
    rows = AttributeDomain("S", tuple(f"s{i}" for i in range(arr.shape[0])))
    cols = AttributeDomain(
        "D", tuple(f"d{j}" for j in range(arr.shape[1])), col_values
    )
    return PathMatrix(rows, cols, arr)


count_matrices = arrays(
    np.int64,
    st.tuples(st.integers(2, 5), st.integers(2, 6)),
    elements=st.integers(0, 20),
)


def test_l1_identical_rows_is_zero():
    assert l1_distribution_distance(matrix([[1, 2, 3], [2, 4, 6]]), "s0", "s1") == 0.0


def test_l1_disjoint_supports_is_two():
    assert l1_distribution_distance(matrix([[1, 0], [0, 3]]), "s0", "s1") == 2.0


def test_l1_zero_row_is_undefined():
    with pytest.raises(UndefinedStatisticError) as err:
        l1_distribution_distance(matrix([[0, 0], [1, 2]]), "s0", "s1")
    assert "s0" in str(err.value)


def test_proportion_difference_equal_rows():
    assert proportion_difference(matrix([[2, 2], [3, 3]]), "s0", "s1", "d0") == 0.0


def test_proportion_difference_in_points():
    p = matrix([[3, 1], [1, 3]])
    assert proportion_difference(p, "s0", "s1", "d0") == pytest.approx(50.0)
    assert proportion_difference(p, "s1", "s0", "d0") == pytest.approx(-50.0)


def test_weighted_average_toy_drama(toy):
    p = evaluate_chain(toy)
    assert weighted_average_destination(p, "Drama") == pytest.approx(42.0)
    assert weighted_average_destination(p, "Romance") == pytest.approx(30.0)
    assert weighted_average_destination(p, "History") == pytest.approx(60.0)


def test_weighted_average_single_destination():
    p = matrix([[4]], col_values=(7.5,))
    assert weighted_average_destination(p, "s0") == pytest.approx(7.5)


def test_weighted_average_requires_values():
    with pytest.raises(StatisticError):
        weighted_average_destination(matrix([[1, 2]]), "s0")


def test_weighted_average_zero_row_undefined():
    p = matrix([[0, 0], [1, 1]], col_values=(1.0, 2.0))
    with pytest.raises(UndefinedStatisticError):
        weighted_average_destination(p, "s0")


def test_l1_group_vs_rest_identical_rows():
    assert l1_group_vs_rest(matrix([[1, 2], [1, 2]]), "s0") == 0.0


def test_l1_group_vs_rest_disjoint():
    assert l1_group_vs_rest(matrix([[2, 0], [0, 3], [0, 1]]), "s0") == 2.0


def test_l1_group_vs_rest_empty_complement():
    with pytest.raises(UndefinedStatisticError):
        l1_group_vs_rest(matrix([[2, 1], [0, 0]]), "s0")


def test_tuple_count_toy(toy):
    assert tuple_count(evaluate_chain(toy)) == 9.0
    assert tuple_count(evaluate_chain(toy, semantics="boolean")) == 4.0
    assert tuple_count(matrix([[0, 0], [0, 0]])) == 0.0


def test_spec_resolution_errors():
    with pytest.raises(StatisticError):
        StatisticSpec("no_such_statistic").resolve()
    with pytest.raises(StatisticError) as err:
        StatisticSpec("l1_distribution_distance", {"group_a": "x"}).resolve()
    assert "group_b" in str(err.value)
    with pytest.raises(StatisticError) as err:
        StatisticSpec("tuple_count", {"bogus": "1"}).resolve()
    assert "bogus" in str(err.value)


def test_custom_statistic_registration():
    register_statistic(
        "max_cell", lambda p: float(p.counts.max()), (), None, replace=True
    )
    spec = StatisticSpec("max_cell")
    assert spec.compute(matrix([[1, 5], [2, 0]])) == 5.0
    with pytest.raises(StatisticError):
        register_statistic("max_cell", lambda p: 0.0)


@st.composite
def matrix_and_rows(draw):
    counts = draw(count_matrices)
    counts = counts.copy()
    counts[:, 0] += 1  # keep every row defined
    i = draw(st.integers(0, counts.shape[0] - 1))
    j = draw(st.integers(0, counts.shape[0] - 1))
    return counts, i, j


@given(matrix_and_rows())
@settings(max_examples=60, deadline=None)
def test_l1_symmetric_and_bounded(data):
    counts, i, j = data
    p = matrix(counts)
    a, b = f"s{i}", f"s{j}"
    d = l1_distribution_distance(p, a, b)
    assert d == pytest.approx(l1_distribution_distance(p, b, a))
    assert 0.0 <= d <= 2.0
    if i == j:
        assert d == 0.0


@given(count_matrices)
@settings(max_examples=60, deadline=None)
def test_l1_triangle_inequality(counts):
    counts = counts.copy()
    counts[:, 0] += 1
    if counts.shape[0] < 3:
        return
    p = matrix(counts)
    d01 = l1_distribution_distance(p, "s0", "s1")
    d12 = l1_distribution_distance(p, "s1", "s2")
    d02 = l1_distribution_distance(p, "s0", "s2")
    assert d02 <= d01 + d12 + 1e-12


@given(count_matrices, st.permutations(list(range(6))))
@settings(max_examples=60, deadline=None)
def test_distances_invariant_under_column_reorder(counts, perm):
    counts = counts.copy()
    counts[:, 0] += 1
    order = [p for p in perm if p < counts.shape[1]]
    p = matrix(counts)
    q = matrix(counts[:, order])
    assert l1_distribution_distance(p, "s0", "s1") == pytest.approx(
        l1_distribution_distance(q, "s0", "s1")
    )
    assert l1_group_vs_rest(p, "s0") == pytest.approx(l1_group_vs_rest(q, "s0"))


@given(count_matrices, st.integers(2, 7))
@settings(max_examples=60, deadline=None)
def test_row_scaling_leaves_normalized_statistics_unchanged(counts, scale):
    counts = counts.copy()
    counts[:, 0] += 1
    p = matrix(counts)
    scaled = counts.copy()
    scaled[0] *= scale
    q = matrix(scaled)
    assert l1_distribution_distance(p, "s0", "s1") == pytest.approx(
        l1_distribution_distance(q, "s0", "s1")
    )
    assert proportion_difference(p, "s0", "s1", "d0") == pytest.approx(
        proportion_difference(q, "s0", "s1", "d0")
    )


@given(count_matrices)
@settings(max_examples=60, deadline=None)
def test_weighted_average_within_value_range(counts):
    counts = counts.copy()
    counts[:, 0] += 1
    values = tuple(float(v) for v in range(counts.shape[1]))
    p = matrix(counts, col_values=values)
    avg = weighted_average_destination(p, "s0")
    assert min(values) - 1e-9 <= avg <= max(values) + 1e-9
