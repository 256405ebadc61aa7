import numpy as np
import pytest

from relrand import AttributeDomain, BinaryRelation, ChainQuery


def make_relation(dense, row_name="I", col_name="J", name=None, col_values=None):
    """Build a relation from a dense 0/1 array with generic label names."""
    arr = np.asarray(dense)
    rows = AttributeDomain(row_name, tuple(f"{row_name.lower()}{i}" for i in range(arr.shape[0])))
    cols = AttributeDomain(
        col_name,
        tuple(f"{col_name.lower()}{j}" for j in range(arr.shape[1])),
        col_values,
    )
    return BinaryRelation.from_dense(rows, cols, arr, name=name)


def compatible_pair(rng, n, m, k, density=0.5):
    """A random join-compatible (A, B) pair sharing the middle domain."""
    a = make_relation(rng.random((n, m)) < density, "I", "J", name="A")
    b_dense = rng.random((m, k)) < density
    b = BinaryRelation.from_dense(
        a.col_domain,
        AttributeDomain("K", tuple(f"k{j}" for j in range(k))),
        b_dense,
        name="B",
    )
    return a, b


@pytest.fixture(scope="session")
def toy():
    """The three-relation movie database used across the suite."""
    genre = AttributeDomain("Genre", ("Romance", "Drama", "History"))
    movie = AttributeDomain("Movie", tuple(f"m{i}" for i in range(1, 8)))
    director = AttributeDomain("Director", ("C. Waitt", "T. George"))
    age = AttributeDomain("Age", ("30", "60"), (30.0, 60.0))
    gm = BinaryRelation.from_labeled_pairs(
        genre,
        movie,
        [
            ("Romance", "m1"),
            ("Romance", "m2"),
            ("Drama", "m3"),
            ("Drama", "m4"),
            ("Drama", "m5"),
            ("Drama", "m6"),
            ("Drama", "m7"),
            ("History", "m6"),
            ("History", "m7"),
        ],
        name="GM",
    )
    md = BinaryRelation.from_labeled_pairs(
        movie,
        director,
        [(f"m{i}", "C. Waitt") for i in range(1, 6)]
        + [("m6", "T. George"), ("m7", "T. George")],
        name="MD",
    )
    da = BinaryRelation.from_labeled_pairs(
        director, age, [("C. Waitt", "30"), ("T. George", "60")], name="DA"
    )
    return gm, md, da


@pytest.fixture(scope="session")
def toy_query(toy):
    return ChainQuery(toy)
