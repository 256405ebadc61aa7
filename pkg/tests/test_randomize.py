import numpy as np
import pytest

from relrand import (
    AttributeDomain,
    BinaryRelation,
    EngineError,
    SwapChainConfig,
    RandomizationPoint,
    column_permute,
    enumerate_randomization_points,
    has_legal_swap,
    identity_relation,
    point_is_degenerate,
    randomize_chain,
    row_permute,
    swap_randomize,
    transpose,
)
from relrand.synthetic import SyntheticConfig, generate_structured

from conftest import make_relation


def test_config_validation():
    with pytest.raises(EngineError):
        SwapChainConfig(attempts_multiplier=0)
    with pytest.raises(EngineError):
        SwapChainConfig(master_seed=-1)
    with pytest.raises(EngineError):
        SwapChainConfig(sample_index=-1)
    with pytest.raises(EngineError):
        RandomizationPoint("columns", 0)


def test_swap_preserves_margins_everywhere(toy):
    rng = np.random.default_rng(3)
    rels = list(toy) + [make_relation(rng.random((6, 9)) < 0.4)]
    for rel in rels:
        for i in range(50):
            sample = swap_randomize(rel, SwapChainConfig(10, 123, i))
            assert np.array_equal(sample.row_sums, rel.row_sums)
            assert np.array_equal(sample.col_sums, rel.col_sums)
            assert sample.row_domain is rel.row_domain


def test_swap_deterministic_per_seed(toy):
    gm, _, _ = toy
    a = swap_randomize(gm, SwapChainConfig(10, 99, 5))
    b = swap_randomize(gm, SwapChainConfig(10, 99, 5))
    c = swap_randomize(gm, SwapChainConfig(10, 99, 6))
    assert a.canonical_bytes == b.canonical_bytes
    assert a.canonical_bytes != c.canonical_bytes  # overwhelmingly likely


def test_swap_tiny_relations_unchanged():
    one_edge = make_relation([[0, 1], [0, 0]])
    assert swap_randomize(one_edge, SwapChainConfig(10, 0, 0)) == one_edge
    empty = make_relation(np.zeros((2, 2), dtype=int))
    assert swap_randomize(empty, SwapChainConfig(10, 0, 0)) == empty


def test_swap_two_state_identity_is_fair():
    ident = identity_relation(
        AttributeDomain("D", ("x", "y")), AttributeDomain("E", ("p", "q"))
    )
    hits = sum(
        swap_randomize(ident, SwapChainConfig(10, 7, i)) == ident
        for i in range(10_000)
    )
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_swap_kernel_backends_agree(toy, monkeypatch):
    gm, _, _ = toy
    fast = [swap_randomize(gm, SwapChainConfig(10, 5, i)) for i in range(10)]
    monkeypatch.setenv("RELRAND_NO_NUMBA", "1")
    slow = [swap_randomize(gm, SwapChainConfig(10, 5, i)) for i in range(10)]
    assert [r.canonical_bytes for r in fast] == [r.canonical_bytes for r in slow]


def test_row_permute_single_row_unchanged():
    rel = make_relation([[1, 0, 1]])
    assert row_permute(rel, 3) == rel


def test_row_permute_uniform_over_three():
    ident = identity_relation(AttributeDomain("D", ("a", "b", "c")))
    counts = {}
    for i in range(10_000):
        sample = row_permute(ident, (11, i))
        counts[sample.canonical_bytes] = counts.get(sample.canonical_bytes, 0) + 1
    assert len(counts) == 6
    for n in counts.values():
        assert abs(n / 10_000 - 1 / 6) <= 0.02


def test_row_permute_preserves_row_vector_multiset(toy):
    _, md, _ = toy
    sample = row_permute(md, 4)
    original_rows = sorted(md.dense[i].tobytes() for i in range(md.n_rows))
    sampled_rows = sorted(sample.dense[i].tobytes() for i in range(sample.n_rows))
    assert original_rows == sampled_rows
    # some seed moves m6 onto the first director
    moved = any(
        row_permute(md, s).dense[5, 0] for s in range(20)
    )
    assert moved


def test_column_permute_single_column_unchanged():
    rel = make_relation([[1], [0]])
    assert column_permute(rel, 3) == rel


def test_column_permute_matches_transposed_row_permute(toy):
    _, _, da = toy
    for seed in range(10):
        direct = column_permute(da, seed)
        via_transpose = transpose(row_permute(transpose(da), seed))
        assert direct == via_transpose


def test_column_permute_two_columns_fair(toy):
    _, _, da = toy
    hits = sum(column_permute(da, (13, i)) == da for i in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_randomize_chain_relation_point(toy):
    gm, md, da = toy
    cfg = SwapChainConfig(10, 21, 3)
    chain = randomize_chain(toy, RandomizationPoint("relation", 0), cfg)
    assert chain[1] is md and chain[2] is da
    assert np.array_equal(chain[0].row_sums, gm.row_sums)


def test_randomize_chain_junction_point(toy):
    gm, md, da = toy
    cfg = SwapChainConfig(10, 21, 3)
    chain = randomize_chain(toy, RandomizationPoint("junction", 1), cfg)
    assert chain[0] is gm and chain[2] is da
    # junction relabeling permutes the left relation's columns
    assert np.array_equal(chain[1].row_sums, md.row_sums)
    assert sorted(chain[1].col_sums.tolist()) == sorted(md.col_sums.tolist())


def test_randomize_chain_single_relation(toy):
    gm, _, _ = toy
    chain = randomize_chain([gm], RandomizationPoint("relation", 0), SwapChainConfig(10, 1, 0))
    assert len(chain) == 1
    assert np.array_equal(chain[0].row_sums, gm.row_sums)


def test_randomize_chain_invalid_point(toy):
    cfg = SwapChainConfig(10, 0, 0)
    with pytest.raises(EngineError):
        randomize_chain(toy, RandomizationPoint("relation", 3), cfg)
    with pytest.raises(EngineError):
        randomize_chain(toy, RandomizationPoint("junction", 2), cfg)


def test_enumerate_points_generic_pair():
    rng = np.random.default_rng(2)
    a = make_relation(rng.random((3, 4)) < 0.5, "I", "J")
    b = BinaryRelation.from_dense(
        a.col_domain,
        AttributeDomain("K", ("k0", "k1", "k2")),
        rng.random((4, 3)) < 0.5,
    )
    points = enumerate_randomization_points([a, b])
    kinds = [(p.point.kind, p.point.position) for p in points]
    assert kinds == [("relation", 0), ("junction", 0), ("relation", 1)]


def test_enumerate_points_toy_chain_collapses(toy):
    points = enumerate_randomization_points(toy)
    kinds = [(p.point.kind, p.point.position) for p in points]
    assert kinds == [("relation", 0), ("relation", 1), ("relation", 2)]


def test_enumerate_points_one_to_one_right_neighbor():
    a = make_relation([[1, 1, 0], [0, 1, 1]], "I", "J")
    perm = BinaryRelation.from_dense(
        a.col_domain, AttributeDomain("K", ("k0", "k1", "k2")), np.eye(3, dtype=int)
    )
    points = enumerate_randomization_points([a, perm])
    kinds = [(p.point.kind, p.point.position) for p in points]
    assert kinds == [("relation", 0), ("relation", 1)]


def test_enumerate_points_synthetic_chain_keeps_five():
    su, um, mg = generate_structured(SyntheticConfig(seed=0))
    points = enumerate_randomization_points((su, um, mg))
    kinds = [(p.point.kind, p.point.position) for p in points]
    assert kinds == [
        ("relation", 0),
        ("junction", 0),
        ("relation", 1),
        ("junction", 1),
        ("relation", 2),
    ]
    # the kept junction after the gender table is flagged as the same null model
    assert points[1].equivalent_relation == 0
    assert points[3].equivalent_relation is None


def test_has_legal_swap_cases(toy):
    gm, md, da = toy
    assert has_legal_swap(gm) and has_legal_swap(md) and has_legal_swap(da)
    assert not has_legal_swap(make_relation(np.ones((2, 2), dtype=int)))
    assert not has_legal_swap(make_relation([[1, 1, 1], [1, 1, 0], [1, 0, 0]]))
    assert has_legal_swap(make_relation([[1, 0], [0, 1]]))
    assert not has_legal_swap(make_relation([[1, 0], [0, 0]]))


def test_degenerate_relation_samples_unchanged():
    full = make_relation(np.ones((2, 3), dtype=int))
    for i in range(5):
        assert swap_randomize(full, SwapChainConfig(10, 3, i)) == full
    assert point_is_degenerate([full], RandomizationPoint("relation", 0))


def test_junction_degeneracy_needs_multiple_shared_labels(toy):
    gm, md, da = toy
    assert not point_is_degenerate(toy, RandomizationPoint("junction", 0))
    narrow = make_relation([[1], [1]], "I", "J")
    other = BinaryRelation.from_dense(
        narrow.col_domain, AttributeDomain("K", ("k0", "k1")), [[1, 1]]
    )
    assert point_is_degenerate([narrow, other], RandomizationPoint("junction", 0))
